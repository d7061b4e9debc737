#include "langnav/text.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "langnav/error.hpp"

namespace langnav {

std::string_view label_name(Label label) {
  switch (label) {
    case Label::Goal: return "goal";
    case Label::Constraint: return "constraint";
    case Label::Uninformative: return "uninformative";
  }
  return "uninformative";
}

Label parse_label(std::string_view name) {
  if (name == "goal") return Label::Goal;
  if (name == "constraint") return Label::Constraint;
  if (name == "uninformative") return Label::Uninformative;
  throw Error(ErrorCode::Parse, "unknown label '" + std::string(name) + "'");
}

bool is_separator(std::string_view token) {
  return token == "," || std::find(kConjunctions.begin(), kConjunctions.end(), token) != kConjunctions.end();
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string normalize(std::string_view raw) {
  std::string spaced;
  spaced.reserve(raw.size() + 8);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (is_word_char(c)) {
      spaced.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (c == ',') {
      spaced += " , ";
    } else if ((c == '\'' || c == '-') && i > 0 && i + 1 < raw.size() && is_word_char(raw[i - 1]) &&
               is_word_char(raw[i + 1])) {
      spaced.push_back(c);
    } else {
      spaced.push_back(' ');
    }
  }
  std::string out;
  for (const auto& w : split_words(spaced)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInput, "instruction is empty after normalization");
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::vector<std::string> split_phrases(std::string_view normalized) {
  std::vector<std::string> phrases;
  std::string current;
  for (const auto& w : split_words(normalized)) {
    if (is_separator(w)) {
      if (!current.empty()) phrases.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (!current.empty()) current.push_back(' ');
    current += w;
  }
  if (!current.empty()) phrases.push_back(std::move(current));
  if (phrases.empty()) throw Error(ErrorCode::ZeroPhrases, "no phrase left after splitting");
  return phrases;
}

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

int Vocabulary::add(const std::string& word) {
  auto [it, inserted] = ids_.emplace(word, static_cast<int>(words_.size()));
  if (inserted) words_.push_back(word);
  return it->second;
}

Vocabulary Vocabulary::build(std::span<const std::string> texts) {
  std::set<std::string> unique;
  for (const auto& t : texts) {
    for (auto& w : split_words(t)) unique.insert(std::move(w));
  }
  std::vector<std::string> sorted(unique.begin(), unique.end());
  return from_words(sorted);
}

Vocabulary Vocabulary::from_words(std::span<const std::string> words) {
  Vocabulary v;
  for (const auto& w : words) v.add(w);
  return v;
}

int Vocabulary::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= size()) throw Error(ErrorCode::IdOutOfRange, "token id " + std::to_string(id) + " out of range");
  return words_[static_cast<std::size_t>(id)];
}

Phrase tokenize(std::string_view phrase_text, const Vocabulary& vocab) {
  Phrase p;
  p.surface = std::string(phrase_text);
  for (const auto& w : split_words(phrase_text)) p.tokens.push_back(vocab.id(w));
  if (p.tokens.empty()) throw Error(ErrorCode::EmptyInput, "cannot tokenize an empty phrase");
  return p;
}

Instruction make_instruction(std::string_view raw, const Vocabulary& vocab) {
  Instruction ins;
  ins.raw = std::string(raw);
  for (const auto& text : split_phrases(normalize(raw))) ins.phrases.push_back(tokenize(text, vocab));
  return ins;
}

}  // namespace langnav
