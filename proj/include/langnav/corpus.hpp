#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "langnav/text.hpp"

namespace langnav {

struct GrammarParams {
  int max_constraints = 3;
  int max_fillers = 2;
  double coordination_probability = 0.2;
  // Each further tail is appended with this probability, up to max_tails.
  double tail_probability = 0.35;
  int max_tails = 1;
  double article_probability = 0.6;
  double test_fraction = 0.3;
};

// Template grammar for synthetic instructions. Templates use {loc}, {obj},
// {item} slots; constraint templates use {objs}, which may expand to two
// coordinated objects ("the table and chairs").
struct Grammar {
  std::map<std::string, std::vector<std::string>> slots;
  std::vector<std::string> goal;
  std::vector<std::string> constraint;
  std::vector<std::string> uninformative;
  std::vector<std::string> tails;
  std::vector<std::string> separators;
  GrammarParams params;

  static Grammar load(const std::filesystem::path& path);
  static Grammar parse(std::istream& in);
};

struct LabeledText {
  std::string text;
  Label label = Label::Uninformative;

  friend bool operator==(const LabeledText&, const LabeledText&) = default;
};

struct GeneratedInstruction {
  std::string text;
  std::vector<LabeledText> phrases;
};

std::vector<GeneratedInstruction> generate_instructions(const Grammar& grammar, std::uint64_t seed,
                                                        std::size_t n_instructions);

struct Corpus {
  std::vector<LabeledText> train;
  std::vector<LabeledText> test;
  std::uint64_t seed = 0;
  std::size_t n_instructions = 0;
  std::array<std::size_t, kNumLabels> train_counts{};
  std::array<std::size_t, kNumLabels> test_counts{};
};

// Phrase-level split by surface string: every occurrence of a surface lands in
// the same split. Requires n_instructions >= 10.
Corpus generate_corpus(const Grammar& grammar, std::uint64_t seed, std::size_t n_instructions);

// Line-delimited JSON: a header record {"schema","seed","instructions"}
// followed by {"phrase","label","split"} records.
void write_corpus(const Corpus& corpus, std::ostream& out);
Corpus read_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

std::vector<LabeledPhrase> tokenize_all(const std::vector<LabeledText>& texts, const Vocabulary& vocab);
Vocabulary build_vocabulary(const std::vector<LabeledText>& texts);

}  // namespace langnav
