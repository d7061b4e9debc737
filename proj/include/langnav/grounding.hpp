#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "langnav/world.hpp"

namespace langnav {

enum class PosTag { Noun, Generic, Verb, Stop, Prep, Adv, Adj, Interj, Conj };

std::string_view pos_tag_name(PosTag tag);
PosTag parse_pos_tag(std::string_view name);

struct LexiconEntry {
  std::string word;
  PosTag tag = PosTag::Noun;
  std::vector<double> vector;
};

// Word embeddings with part-of-speech tags. File format, one entry per line:
//   word, pos-tag, v1, ..., vm
// '#' starts a comment line; words may contain spaces ("information desk").
class Lexicon {
 public:
  static Lexicon parse(std::istream& in);
  static Lexicon load(const std::filesystem::path& path);

  const LexiconEntry* find(std::string_view word) const;
  // Exact entry, else plural folding against lexicon membership
  // ("-ies" -> "-y", then "-es", then "-s" stripped).
  const LexiconEntry* resolve(std::string_view word) const;
  int dimension() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  // Longest entry in words.
  int max_words() const { return max_words_; }

  // Throws Error(InvariantViolation) naming every location or object label
  // of the map that has no entry.
  void check_coverage(const SemanticMap& map) const;

 private:
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  int dim_ = 0;
  int max_words_ = 1;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);
// Throws Error(UnknownWord) when either word does not resolve.
double cosine_similarity(std::string_view a, std::string_view b, const Lexicon& lex);

struct GroundingConfig {
  double constraint_threshold = 0.6;
  double goal_threshold = 0.3;
};

struct NounMention {
  std::string text;       // as written ("chairs")
  std::string canonical;  // lexicon entry ("chairs"), empty when unknown
  bool known = false;

  friend bool operator==(const NounMention&, const NounMention&) = default;
};

// Content nouns in order. Multiword entries are matched greedily
// longest-first; verbs, stop words and other tags are dropped; "generic"
// nouns (robot, way, distance) are skipped; a preposition after the first
// known noun ends the head noun phrase ("table in the shop" -> table).
// Unknown words are kept with known = false. Throws Error(NoNoun).
std::vector<NounMention> extract_nouns(std::string_view phrase_text, const Lexicon& lex);

struct GoalGrounding {
  std::string noun;
  std::string location;
  Vec2 position;
  double score = 0.0;
};

// Location with maximal similarity, ties to declaration order. Throws
// Error(EmptyMap), Error(UnknownWord), or Error(NoMatch) when the best
// score is not above the goal threshold.
GoalGrounding ground_goal(std::string_view noun, const SemanticMap& map, const Lexicon& lex,
                          const GroundingConfig& cfg = {});

// Picks the mention whose best location similarity is highest (first on
// ties) and grounds it. Unknown mentions are ignored.
GoalGrounding ground_goal(const std::vector<NounMention>& nouns, const SemanticMap& map, const Lexicon& lex,
                          const GroundingConfig& cfg = {});

struct ConstraintGrounding {
  std::string noun;
  std::string label;
  int object_id = 0;
  Vec2 local;
  double score = 0.0;
  double timestamp = 0.0;
  bool moving = false;
};

// One grounding per (noun, object id) whose similarity exceeds the
// constraint threshold; unknown nouns and labels never match.
std::vector<ConstraintGrounding> ground_constraints(const std::vector<std::string>& nouns, const DetectionFrame& frame,
                                                    const Lexicon& lex, const GroundingConfig& cfg = {});

}  // namespace langnav
