#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace langnav {

enum class Label : int { Goal = 0, Constraint = 1, Uninformative = 2 };

inline constexpr int kNumLabels = 3;

std::string_view label_name(Label label);
// Accepts "goal", "constraint", "uninformative"; throws Error(Parse) otherwise.
Label parse_label(std::string_view name);

inline constexpr std::array<std::string_view, 4> kConjunctions = {"and", "then", "but", "also"};

// True for "," and the conjunction words.
bool is_separator(std::string_view token);

// Lowercases, drops punctuation other than commas and word-internal
// apostrophes/hyphens, turns each comma into a standalone token and collapses
// whitespace. Throws Error(EmptyInput) when nothing is left.
std::string normalize(std::string_view raw);

std::vector<std::string> split_words(std::string_view text);

// Splits normalized text into the maximal runs between separators. Throws
// Error(ZeroPhrases) when every token is a separator.
std::vector<std::string> split_phrases(std::string_view normalized);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();

  // Sorted, de-duplicated words from the given phrase texts.
  static Vocabulary build(std::span<const std::string> texts);
  static Vocabulary from_words(std::span<const std::string> words);

  int id(std::string_view word) const;
  const std::string& word(int id) const;
  int size() const { return static_cast<int>(words_.size()); }
  // Non-reserved words in id order.
  std::span<const std::string> words() const { return std::span(words_).subspan(2); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  int add(const std::string& word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

struct Phrase {
  std::vector<int> tokens;
  std::string surface;
};

// Throws Error(EmptyInput) for blank text.
Phrase tokenize(std::string_view phrase_text, const Vocabulary& vocab);

struct Instruction {
  std::string raw;
  std::vector<Phrase> phrases;
};

Instruction make_instruction(std::string_view raw, const Vocabulary& vocab);

struct LabeledPhrase {
  Phrase phrase;
  Label label = Label::Uninformative;
};

}  // namespace langnav
