#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "langnav/classifier.hpp"
#include "langnav/grounding.hpp"

namespace langnav {

struct ParsedPhrase {
  std::string text;
  Label label = Label::Uninformative;
  std::array<double, 3> probs{};
  std::vector<double> attention;  // empty unless the model has attention
  std::vector<NounMention> nouns;
  std::string error;              // noun extraction failure, if any
};

struct ParsedCommand {
  std::string raw;
  std::vector<ParsedPhrase> phrases;
  std::optional<std::string> goal_noun;
  // Set when a map was supplied and the goal grounded.
  std::optional<GoalGrounding> goal;
  std::string goal_error;
  // Known nouns of constraint phrases, first occurrence order, de-duplicated.
  std::vector<std::string> constraint_nouns;

  bool has_goal_phrase() const { return goal_noun.has_value() || !goal_error.empty(); }
};

// normalize -> split -> classify -> extract nouns -> ground the goal. The
// latest goal phrase wins. Without a map the goal noun is the first known
// noun of that phrase. Throws Error(EmptyInput) / Error(ZeroPhrases).
ParsedCommand parse_command(std::string_view text, const ClassifierModel& model, const Lexicon& lex,
                            const SemanticMap* map = nullptr, const GroundingConfig& cfg = {});

}  // namespace langnav
