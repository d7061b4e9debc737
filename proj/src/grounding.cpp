#include "langnav/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "langnav/error.hpp"
#include "langnav/text.hpp"

namespace langnav {
namespace {

constexpr std::pair<PosTag, std::string_view> kTagNames[] = {
    {PosTag::Noun, "noun"}, {PosTag::Generic, "generic"}, {PosTag::Verb, "verb"},     {PosTag::Stop, "stop"},
    {PosTag::Prep, "prep"}, {PosTag::Adv, "adv"},         {PosTag::Adj, "adj"},       {PosTag::Interj, "interj"},
    {PosTag::Conj, "conj"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view pos_tag_name(PosTag tag) {
  for (const auto& [t, n] : kTagNames) {
    if (t == tag) return n;
  }
  return "noun";
}

PosTag parse_pos_tag(std::string_view name) {
  for (const auto& [t, n] : kTagNames) {
    if (n == name) return t;
  }
  throw Error(ErrorCode::Parse, "unknown part-of-speech tag '" + std::string(name) + "'");
}

Lexicon Lexicon::parse(std::istream& in) {
  Lexicon lex;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(trim(f));
    const std::string where = "lexicon line " + std::to_string(line_no);
    if (fields.size() < 3) throw Error(ErrorCode::Parse, where + ": expected word, tag, vector");
    LexiconEntry e{fields[0], parse_pos_tag(fields[1]), {}};
    if (e.word.empty() || e.word != normalize(e.word)) throw Error(ErrorCode::Parse, where + ": word must be normalized");
    double norm2 = 0.0;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[i].size() || !std::isfinite(v)) throw Error(ErrorCode::Parse, where + ": bad number '" + fields[i] + "'");
      e.vector.push_back(v);
      norm2 += v * v;
    }
    if (norm2 == 0.0) throw Error(ErrorCode::InvariantViolation, where + ": zero vector for '" + e.word + "'");
    if (lex.dim_ == 0) lex.dim_ = static_cast<int>(e.vector.size());
    if (static_cast<int>(e.vector.size()) != lex.dim_) throw Error(ErrorCode::Parse, where + ": dimension mismatch");
    if (lex.index_.contains(e.word)) throw Error(ErrorCode::Parse, where + ": duplicate word '" + e.word + "'");
    lex.max_words_ = std::max(lex.max_words_, static_cast<int>(split_words(e.word).size()));
    lex.index_.emplace(e.word, lex.entries_.size());
    lex.entries_.push_back(std::move(e));
  }
  if (lex.entries_.empty()) throw Error(ErrorCode::Parse, "lexicon is empty");
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open lexicon " + path.string());
  return parse(in);
}

const LexiconEntry* Lexicon::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const LexiconEntry* Lexicon::resolve(std::string_view word) const {
  if (const auto* e = find(word)) return e;
  if (word.size() > 3 && word.ends_with("ies")) {
    if (const auto* e = find(std::string(word.substr(0, word.size() - 3)) + "y")) return e;
  }
  if (word.size() > 2 && word.ends_with("es")) {
    if (const auto* e = find(word.substr(0, word.size() - 2))) return e;
  }
  if (word.size() > 1 && word.ends_with("s")) {
    if (const auto* e = find(word.substr(0, word.size() - 1))) return e;
  }
  return nullptr;
}

void Lexicon::check_coverage(const SemanticMap& map) const {
  std::set<std::string> missing;
  for (const auto& l : map.locations) {
    if (!resolve(l.name)) missing.insert("location '" + l.name + "'");
  }
  for (const auto& o : map.objects) {
    if (!resolve(o.label)) missing.insert("object label '" + o.label + "'");
  }
  if (missing.empty()) return;
  std::string msg = "lexicon lacks entries for map '" + map.name + "':";
  for (const auto& m : missing) msg += " " + m;
  throw Error(ErrorCode::InvariantViolation, msg);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "cosine of vectors with different sizes");
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

double cosine_similarity(std::string_view a, std::string_view b, const Lexicon& lex) {
  const auto* ea = lex.resolve(a);
  const auto* eb = lex.resolve(b);
  if (!ea) throw Error(ErrorCode::UnknownWord, "'" + std::string(a) + "' is not in the lexicon");
  if (!eb) throw Error(ErrorCode::UnknownWord, "'" + std::string(b) + "' is not in the lexicon");
  return cosine(ea->vector, eb->vector);
}

std::vector<NounMention> extract_nouns(std::string_view phrase_text, const Lexicon& lex) {
  const auto words = split_words(phrase_text);
  std::vector<NounMention> out;
  bool have_known = false;
  std::size_t i = 0;
  while (i < words.size()) {
    const LexiconEntry* hit = nullptr;
    std::string text;
    std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(lex.max_words()), words.size() - i);
    for (; len >= 1; --len) {
      text = words[i];
      for (std::size_t k = 1; k < len; ++k) text += " " + words[i + k];
      if ((hit = lex.resolve(text))) break;
    }
    if (!hit) {
      out.push_back({words[i], "", false});
      ++i;
      continue;
    }
    i += len;
    if (hit->tag == PosTag::Prep && have_known) break;
    if (hit->tag != PosTag::Noun) continue;
    out.push_back({text, hit->word, true});
    have_known = true;
  }
  if (out.empty()) throw Error(ErrorCode::NoNoun, "no noun in '" + std::string(phrase_text) + "'");
  return out;
}

namespace {

struct BestLocation {
  std::size_t index = 0;
  double score = -2.0;
};

BestLocation best_location(const LexiconEntry& noun, const SemanticMap& map, const Lexicon& lex) {
  BestLocation best;
  for (std::size_t k = 0; k < map.locations.size(); ++k) {
    const auto* loc = lex.resolve(map.locations[k].name);
    if (!loc) throw Error(ErrorCode::UnknownWord, "location '" + map.locations[k].name + "' is not in the lexicon");
    const double s = cosine(noun.vector, loc->vector);
    if (s > best.score) best = {k, s};
  }
  return best;
}

}  // namespace

GoalGrounding ground_goal(std::string_view noun, const SemanticMap& map, const Lexicon& lex,
                          const GroundingConfig& cfg) {
  if (map.locations.empty()) throw Error(ErrorCode::EmptyMap, "map '" + map.name + "' has no named locations");
  const auto* e = lex.resolve(noun);
  if (!e) throw Error(ErrorCode::UnknownWord, "'" + std::string(noun) + "' is not in the lexicon");
  const auto best = best_location(*e, map, lex);
  if (!(best.score > cfg.goal_threshold)) {
    throw Error(ErrorCode::NoMatch, "no location matches '" + std::string(noun) + "' (best score " +
                                        std::to_string(best.score) + ")");
  }
  const auto& loc = map.locations[best.index];
  return {std::string(noun), loc.name, loc.position, best.score};
}

GoalGrounding ground_goal(const std::vector<NounMention>& nouns, const SemanticMap& map, const Lexicon& lex,
                          const GroundingConfig& cfg) {
  if (map.locations.empty()) throw Error(ErrorCode::EmptyMap, "map '" + map.name + "' has no named locations");
  const NounMention* pick = nullptr;
  double pick_score = -2.0;
  for (const auto& n : nouns) {
    if (!n.known) continue;
    const double s = best_location(*lex.find(n.canonical), map, lex).score;
    if (s > pick_score) {
      pick = &n;
      pick_score = s;
    }
  }
  if (!pick) throw Error(ErrorCode::NoNoun, "goal phrase has no known noun");
  auto g = ground_goal(pick->canonical, map, lex, cfg);
  g.noun = pick->text;
  return g;
}

std::vector<ConstraintGrounding> ground_constraints(const std::vector<std::string>& nouns, const DetectionFrame& frame,
                                                    const Lexicon& lex, const GroundingConfig& cfg) {
  std::vector<ConstraintGrounding> out;
  for (const auto& noun : nouns) {
    const auto* en = lex.resolve(noun);
    if (!en) continue;
    std::set<int> seen;
    for (const auto& d : frame.detections) {
      const auto* el = lex.resolve(d.label);
      if (!el || seen.contains(d.object_id)) continue;
      const double s = cosine(en->vector, el->vector);
      if (s > cfg.constraint_threshold) {
        seen.insert(d.object_id);
        out.push_back({noun, d.label, d.object_id, d.local, s, frame.timestamp, d.moving});
      }
    }
  }
  return out;
}

}  // namespace langnav
