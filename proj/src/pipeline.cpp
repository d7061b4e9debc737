#include "langnav/pipeline.hpp"

#include <algorithm>

#include "langnav/error.hpp"
#include "langnav/text.hpp"

namespace langnav {

ParsedCommand parse_command(std::string_view text, const ClassifierModel& model, const Lexicon& lex,
                            const SemanticMap* map, const GroundingConfig& cfg) {
  ParsedCommand out;
  out.raw = std::string(text);
  const Instruction ins = make_instruction(text, model.vocab);
  const ParsedPhrase* goal_phrase = nullptr;
  for (const auto& ph : ins.phrases) {
    ParsedPhrase p;
    p.text = ph.surface;
    const auto c = classify(ph, model);
    p.label = c.label;
    for (int k = 0; k < 3; ++k) p.probs[k] = c.probs[k];
    if (c.attention) p.attention.assign(c.attention->data(), c.attention->data() + c.attention->size());
    if (p.label != Label::Uninformative) {
      try {
        p.nouns = extract_nouns(p.text, lex);
      } catch (const Error& e) {
        p.error = e.what();
      }
    }
    out.phrases.push_back(std::move(p));
  }
  for (const auto& p : out.phrases) {
    if (p.label == Label::Goal) goal_phrase = &p;
    if (p.label != Label::Constraint) continue;
    for (const auto& n : p.nouns) {
      if (!n.known) continue;
      if (std::find(out.constraint_nouns.begin(), out.constraint_nouns.end(), n.text) == out.constraint_nouns.end()) {
        out.constraint_nouns.push_back(n.text);
      }
    }
  }
  if (!goal_phrase) return out;
  if (!goal_phrase->error.empty()) {
    out.goal_error = goal_phrase->error;
    return out;
  }
  if (map) {
    try {
      out.goal = ground_goal(goal_phrase->nouns, *map, lex, cfg);
      out.goal_noun = out.goal->noun;
    } catch (const Error& e) {
      out.goal_error = e.what();
    }
  } else {
    for (const auto& n : goal_phrase->nouns) {
      if (n.known) {
        out.goal_noun = n.text;
        break;
      }
    }
    if (!out.goal_noun) out.goal_error = "goal phrase has no known noun";
  }
  return out;
}

}  // namespace langnav
