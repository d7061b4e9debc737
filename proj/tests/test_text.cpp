#include <string>
#include <vector>

#include "doctest.h"
#include "langnav/error.hpp"
#include "langnav/random.hpp"
#include "langnav/text.hpp"

using namespace langnav;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected langnav::Error");
  return ErrorCode::Io;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

}  // namespace

TEST_CASE("normalize lowercases and strips punctuation") {
  CHECK(normalize("Go to the Restaurant.") == "go to the restaurant");
  CHECK(normalize("keep  away from people") == "keep away from people");
  CHECK(normalize("go to the lift, and wait") == "go to the lift , and wait");
  CHECK(code_of([] { normalize("   \t "); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { normalize("?!"); }) == ErrorCode::EmptyInput);
}

TEST_CASE("normalize golden fixtures") {
  const std::vector<std::pair<std::string, std::string>> golden = {
      {"Robot, go to the lift", "robot , go to the lift"},
      {"don't collide with people and walk to the information desk",
       "don't collide with people and walk to the information desk"},
      {"Go to the restaurant and you know, keep away from people.",
       "go to the restaurant and you know , keep away from people"},
      {"watch out -- the table!!", "watch out the table"},
      {"a well-known 'cafe'", "a well-known cafe"},
      {"GO,,to   the\tLAB", "go , , to the lab"},
      {"it's 3 o'clock", "it's 3 o'clock"},
  };
  for (const auto& [raw, want] : golden) CHECK(normalize(raw) == want);
}

TEST_CASE("split_phrases splits on conjunctions and commas") {
  using V = std::vector<std::string>;
  CHECK(split_phrases("go to the restaurant and you know , keep away from people") ==
        V{"go to the restaurant", "you know", "keep away from people"});
  CHECK(split_phrases("robot , go to the lift") == V{"robot", "go to the lift"});
  CHECK(split_phrases("go home") == V{"go home"});
  CHECK(split_phrases("move to the laboratory and watch out the table and chairs") ==
        V{"move to the laboratory", "watch out the table", "chairs"});
  CHECK(split_phrases(", and then go") == V{"go"});
  CHECK(code_of([] { split_phrases(", and , but"); }) == ErrorCode::ZeroPhrases);
}

TEST_CASE("split_phrases properties on random token streams") {
  const std::vector<std::string> pool = {"go", "to", "the", "lift", ",", "and", "then", "but", "also",
                                         "keep", "away", "people", "you", "know"};
  Rng rng(11);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> words;
    const auto n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) words.push_back(rng.pick(pool));
    const auto text = join(words, " ");
    std::vector<std::string> kept;
    for (const auto& w : words) {
      if (!is_separator(w)) kept.push_back(w);
    }
    if (kept.empty()) {
      CHECK(code_of([&] { split_phrases(text); }) == ErrorCode::ZeroPhrases);
      continue;
    }
    const auto phrases = split_phrases(text);
    // no separator survives, and the concatenated tokens equal the input minus separators
    std::vector<std::string> tokens;
    for (const auto& p : phrases) {
      for (const auto& w : split_words(p)) {
        CHECK_FALSE(is_separator(w));
        tokens.push_back(w);
      }
    }
    CHECK(tokens == kept);
    // round trip through " and "
    CHECK(split_phrases(join(phrases, " and ")) == phrases);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("vocabulary reserves PAD and UNK") {
  const std::vector<std::string> texts = {"go to the lift", "the lift"};
  const auto v = Vocabulary::build(texts);
  CHECK(v.size() == 2 + 4);
  CHECK(v.word(Vocabulary::kPad) == "<pad>");
  CHECK(v.word(Vocabulary::kUnk) == "<unk>");
  CHECK(v.id("zxqv") == Vocabulary::kUnk);
  for (int id = 2; id < v.size(); ++id) CHECK(v.id(v.word(id)) == id);
  CHECK(code_of([&] { v.word(v.size()); }) == ErrorCode::IdOutOfRange);
  CHECK(code_of([&] { v.word(-1); }) == ErrorCode::IdOutOfRange);
  CHECK(Vocabulary::from_words(v.words()) == v);
}

TEST_CASE("tokenize maps unknown words to UNK") {
  const std::vector<std::string> texts = {"go to the lift"};
  const auto v = Vocabulary::build(texts);
  const auto p = tokenize("go to the lift", v);
  REQUIRE(p.tokens.size() == 4);
  for (int id : p.tokens) CHECK(id != Vocabulary::kUnk);
  const auto q = tokenize("go to the zxqv", v);
  CHECK(q.tokens.back() == Vocabulary::kUnk);
  CHECK(code_of([&] { tokenize("  ", v); }) == ErrorCode::EmptyInput);
  // golden ids: sorted vocabulary go=2 lift=3 the=4 to=5
  CHECK(p.tokens == std::vector<int>{2, 5, 4, 3});
}

TEST_CASE("make_instruction concatenation invariant") {
  const std::vector<std::string> texts = {"go to the restaurant", "you know", "keep away from people"};
  const auto v = Vocabulary::build(texts);
  const std::string raw = "Go to the restaurant and you know, keep away from people.";
  const auto ins = make_instruction(raw, v);
  REQUIRE(ins.phrases.size() == 3);
  std::vector<int> concat;
  for (const auto& p : ins.phrases) concat.insert(concat.end(), p.tokens.begin(), p.tokens.end());
  std::vector<int> expected;
  for (const auto& w : split_words(normalize(raw))) {
    if (!is_separator(w)) expected.push_back(v.id(w));
  }
  CHECK(concat == expected);
}
