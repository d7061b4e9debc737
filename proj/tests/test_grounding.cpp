#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "langnav/error.hpp"
#include "langnav/grounding.hpp"
#include "langnav/map_io.hpp"
#include "langnav/random.hpp"

using namespace langnav;

namespace {

const Lexicon& shipped() {
  static const Lexicon lex = Lexicon::load(LANGNAV_DATA_DIR "/lexicon.csv");
  return lex;
}

// Three orthogonal nouns plus a few function words.
Lexicon toy() {
  std::istringstream in(
      "# toy\n"
      "table, noun, 1, 0, 0, 0\n"
      "person, noun, 0, 1, 0, 0\n"
      "people, noun, 0.05, 0.99, 0, 0.1\n"
      "hall, noun, 0, 0, 1, 0\n"
      "main hall, noun, 0, 0.2, 0.98, 0\n"
      "robot, generic, 0, 0, 0, 1\n"
      "go, verb, 0.5, 0.5, 0.5, 0.5\n"
      "the, stop, 0.3, 0, 0, 0.7\n"
      "to, prep, 0, 0.3, 0, 0.7\n"
      "in, prep, 0.3, 0.3, 0, 0.7\n");
  return Lexicon::parse(in);
}

SemanticMap map_with(std::vector<NamedLocation> locs) {
  SemanticMap m;
  m.name = "fixture";
  m.grid = GridMap(20, 20, 1.0, {0.0, 0.0});
  m.locations = std::move(locs);
  return m;
}

std::vector<std::string> texts(const std::vector<NounMention>& ns) {
  std::vector<std::string> out;
  for (const auto& n : ns) out.push_back(n.text);
  return out;
}

// Reads the lexicon file with plain string handling and computes the cosine
// in long double.
long double file_cosine(const std::string& a, const std::string& b) {
  std::ifstream in(LANGNAV_DATA_DIR "/lexicon.csv");
  std::string line;
  std::vector<long double> va;
  std::vector<long double> vb;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    const std::string w = line.substr(0, comma);
    if (w != a && w != b) continue;
    std::vector<long double> v;
    std::size_t pos = line.find(',', comma + 1);
    while (pos != std::string::npos) {
      v.push_back(std::stold(line.substr(pos + 1)));
      pos = line.find(',', pos + 1);
    }
    (w == a ? va : vb) = v;
  }
  REQUIRE(!va.empty());
  REQUIRE(va.size() == vb.size());
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    ab += va[i] * vb[i];
    aa += va[i] * va[i];
    bb += vb[i] * vb[i];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace

TEST_CASE("lexicon parsing") {
  const auto lex = toy();
  CHECK(lex.size() == 10);
  CHECK(lex.dimension() == 4);
  CHECK(lex.max_words() == 2);
  CHECK(lex.find("main hall")->tag == PosTag::Noun);
  CHECK(lex.find("robot")->tag == PosTag::Generic);

  auto bad = [](const char* text) {
    std::istringstream in(text);
    return Lexicon::parse(in);
  };
  CHECK_THROWS_AS(bad(""), Error);
  CHECK_THROWS_AS(bad("table, thing, 1, 0\n"), Error);
  CHECK_THROWS_AS(bad("table, noun, 1, x\n"), Error);
  CHECK_THROWS_AS(bad("table, noun, 1, 0\nchair, noun, 1\n"), Error);
  CHECK_THROWS_AS(bad("table, noun, 1, 0\ntable, noun, 0, 1\n"), Error);
  CHECK_THROWS_AS(bad("Table, noun, 1, 0\n"), Error);
  try {
    bad("table, noun, 0, 0\n");
    FAIL("zero vector accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvariantViolation);
  }
}

TEST_CASE("shipped lexicon") {
  const auto& lex = shipped();
  CHECK(lex.size() >= 200);
  CHECK(lex.dimension() == 32);
  // synonyms within 15 degrees of their head word
  for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{
           {"people", "person"}, {"children", "person"}, {"chairs", "chair"}, {"lab", "laboratory"},
           {"elevator", "lift"}, {"shop", "thrift shop"}, {"pedestrians", "person"}}) {
    CAPTURE(a);
    CHECK(cosine_similarity(a, b, lex) > std::cos(15.0 * std::numbers::pi / 180.0));
  }
  for (const char* path : {LANGNAV_DATA_DIR "/maps/scene1.json", LANGNAV_DATA_DIR "/maps/scene9.json"}) {
    CHECK_NOTHROW(lex.check_coverage(load_map(path)));
  }
}

TEST_CASE("coverage check names missing words") {
  auto m = map_with({{"hall", {1, 1}}, {"kitchen", {2, 2}}});
  m.objects.push_back({1, "sofa", {3, 3}, 0.3, {}});
  try {
    toy().check_coverage(m);
    FAIL("missing words accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvariantViolation);
    const std::string msg = e.what();
    CHECK(msg.find("kitchen") != std::string::npos);
    CHECK(msg.find("sofa") != std::string::npos);
    CHECK(msg.find("'hall'") == std::string::npos);
  }
}

TEST_CASE("cosine similarity") {
  const auto lex = toy();
  CHECK(cosine_similarity("table", "table", lex) == doctest::Approx(1.0));
  CHECK(cosine_similarity("table", "person", lex) == 0.0);
  CHECK_THROWS_AS(cosine_similarity("table", "sofa", lex), Error);
  try {
    cosine_similarity("sofa", "table", lex);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownWord);
  }
  // frozen from the long double oracle over the shipped file
  const double people = cosine_similarity("people", "person", shipped());
  CHECK(people == doctest::Approx(static_cast<double>(file_cosine("people", "person"))).epsilon(1e-12));
  CHECK(people == doctest::Approx(0.982859335484).epsilon(1e-10));
  CHECK(people > GroundingConfig{}.constraint_threshold);
}

TEST_CASE("cosine properties") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(8);
    std::vector<double> b(8);
    for (auto& v : a) v = rng.uniform(-1.0, 1.0);
    for (auto& v : b) v = rng.uniform(-1.0, 1.0);
    const double s = cosine(a, b);
    CHECK(s == cosine(b, a));
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    const double k = rng.uniform(0.01, 100.0);
    auto ka = a;
    for (auto& v : ka) v *= k;
    CHECK(cosine(ka, b) == doctest::Approx(s).epsilon(1e-12));
  }
  CHECK_THROWS_AS(cosine({1.0}, {1.0, 0.0}), Error);
}

TEST_CASE("plural folding") {
  const auto& lex = shipped();
  CHECK(lex.resolve("people")->word == "people");  // exact entry wins
  CHECK(lex.resolve("tables")->word == "tables");
  CHECK(lex.resolve("restaurants")->word == "restaurant");
  CHECK(lex.resolve("lifts")->word == "lift");
  CHECK(lex.resolve("laboratories")->word == "laboratory");
  CHECK(lex.resolve("cafes")->word == "cafe");
  CHECK(lex.resolve("s") == nullptr);
  CHECK(lex.resolve("zebras") == nullptr);
}

TEST_CASE("extract nouns") {
  const auto& lex = shipped();
  CHECK(texts(extract_nouns("go to the restaurant", lex)) == std::vector<std::string>{"restaurant"});
  CHECK(texts(extract_nouns("watch out the table and chairs", lex)) == std::vector<std::string>{"table", "chairs"});
  CHECK(texts(extract_nouns("walk to the information desk", lex)) == std::vector<std::string>{"information desk"});
  CHECK(texts(extract_nouns("go to the thrift shop to buy some water", lex)) ==
        std::vector<std::string>{"thrift shop"});
  CHECK(texts(extract_nouns("watch out the table in the shop", lex)) == std::vector<std::string>{"table"});
  CHECK(texts(extract_nouns("keep a distance from people", lex)) == std::vector<std::string>{"people"});
  CHECK(extract_nouns("keep away from people", lex)[0].canonical == "people");

  const auto unknown = extract_nouns("go to the zebra", lex);
  REQUIRE(unknown.size() == 1);
  CHECK(unknown[0] == NounMention{"zebra", "", false});
  // an unknown word before the preposition does not end collection
  CHECK(texts(extract_nouns("go zebra to the lift", lex)) == std::vector<std::string>{"zebra", "lift"});

  try {
    extract_nouns("go to the", lex);
    FAIL("no noun accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoNoun);
  }
  CHECK_THROWS_AS(extract_nouns("robot", lex), Error);  // generic
}

TEST_CASE("multiword matching is longest first") {
  const auto lex = toy();
  CHECK(texts(extract_nouns("go to the main hall", lex)) == std::vector<std::string>{"main hall"});
  CHECK(texts(extract_nouns("go to the hall", lex)) == std::vector<std::string>{"hall"});
  CHECK(texts(extract_nouns("the table in the hall", lex)) == std::vector<std::string>{"table"});
}

TEST_CASE("ground goal") {
  const auto& lex = shipped();
  const auto m = map_with({{"school", {1, 1}}, {"cafe", {5, 5}}});
  const auto g = ground_goal("school", m, lex);
  CHECK(g.location == "school");
  CHECK(g.position == Vec2{1, 1});
  CHECK(g.score == doctest::Approx(1.0));
  CHECK(ground_goal("classroom", m, lex).location == "school");
  CHECK(ground_goal("cafes", m, lex).location == "cafe");
  CHECK(ground_goal("diner", map_with({{"restaurant", {2, 2}}, {"cafe", {5, 5}}}), lex).location == "restaurant");

  auto code_of = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code_of([&] { ground_goal("table", m, lex); }) == ErrorCode::NoMatch);
  CHECK(code_of([&] { ground_goal("school", map_with({}), lex); }) == ErrorCode::EmptyMap);
  CHECK(code_of([&] { ground_goal("zebra", m, lex); }) == ErrorCode::UnknownWord);

  // ties go to declaration order
  const auto tie = map_with({{"hall", {1, 1}}, {"hall", {9, 9}}});
  CHECK(ground_goal("lobby", tie, lex).position == Vec2{1, 1});

  // best score at the threshold is rejected
  GroundingConfig at{0.6, 1.0};
  CHECK(code_of([&] { ground_goal("school", m, lex, at); }) == ErrorCode::NoMatch);
}

TEST_CASE("goal noun choice") {
  const auto& lex = shipped();
  const auto m = map_with({{"thrift shop", {1, 1}}, {"cafe", {5, 5}}});
  // "water" grounds nowhere; the location noun wins
  const auto nouns = std::vector<NounMention>{{"water", "water", true}, {"shop", "shop", true}};
  const auto g = ground_goal(nouns, m, lex);
  CHECK(g.noun == "shop");
  CHECK(g.location == "thrift shop");
  CHECK_THROWS_AS(ground_goal(std::vector<NounMention>{{"zebra", "", false}}, m, lex), Error);
}

TEST_CASE("argmax invariant under monotone transforms") {
  // scaling vectors leaves scores unchanged; a monotone transform of all
  // scores keeps the argmax, checked on random maps
  const auto& lex = shipped();
  const std::vector<std::string> names{"restaurant", "cafe", "school", "lift", "hall", "laboratory", "playground"};
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<NamedLocation> locs;
    for (const auto& n : names) {
      if (rng.chance(0.6)) locs.push_back({n, {rng.uniform(0, 19), rng.uniform(0, 19)}});
    }
    if (locs.empty()) continue;
    const auto m = map_with(locs);
    const std::string noun = rng.pick(std::vector<std::string>{"diner", "lobby", "classroom", "elevator", "park"});
    std::size_t best = 0;
    double best_t = -1e9;
    for (std::size_t k = 0; k < locs.size(); ++k) {
      const double t = std::exp(3.0 * cosine_similarity(noun, locs[k].name, lex));
      if (t > best_t) {
        best_t = t;
        best = k;
      }
    }
    if (std::log(best_t) / 3.0 > GroundingConfig{}.goal_threshold) {
      CHECK(ground_goal(noun, m, lex).location == locs[best].name);
    } else {
      CHECK_THROWS_AS(ground_goal(noun, m, lex), Error);
    }
  }
}

TEST_CASE("ground constraints") {
  const auto& lex = shipped();
  CHECK(ground_constraints({"people"}, DetectionFrame{1.0, {}}, lex).empty());

  DetectionFrame f{2.5, {{7, "person", {2.0, 1.0}, true}}};
  const auto g = ground_constraints({"people"}, f, lex);
  REQUIRE(g.size() == 1);
  CHECK(g[0].noun == "people");
  CHECK(g[0].label == "person");
  CHECK(g[0].object_id == 7);
  CHECK(g[0].local == Vec2{2.0, 1.0});
  CHECK(g[0].timestamp == 2.5);
  CHECK(g[0].moving);
  CHECK(g[0].score > 0.6);

  CHECK(ground_constraints({"table"}, f, lex).empty());
  CHECK(ground_constraints({"zebra"}, f, lex).empty());

  // one grounding per object id per noun
  DetectionFrame dup{0.0, {{3, "person", {1, 0}, false}, {3, "person", {1, 0}, false}}};
  CHECK(ground_constraints({"people"}, dup, lex).size() == 1);
  CHECK(ground_constraints({"people", "children"}, dup, lex).size() == 2);
}

TEST_CASE("ground constraints properties") {
  const auto& lex = shipped();
  const std::vector<std::string> labels{"person", "table", "chair", "dog", "cart", "bench", "plant", "bike"};
  const std::vector<std::string> nouns{"people", "tables", "chairs", "kids", "bikes", "seats"};
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    DetectionFrame f;
    const int n = static_cast<int>(rng.below(6));
    for (int k = 0; k < n; ++k) {
      f.detections.push_back({k, rng.pick(labels), {rng.uniform(-5, 5), rng.uniform(-5, 5)}, false});
    }
    std::vector<std::string> ask;
    for (const auto& w : nouns) {
      if (rng.chance(0.5)) ask.push_back(w);
    }
    GroundingConfig cfg;
    cfg.constraint_threshold = rng.uniform(0.2, 0.95);
    const auto before = ground_constraints(ask, f, lex, cfg);
    for (const auto& g : before) CHECK(g.score > cfg.constraint_threshold);
    f.detections.push_back({99, rng.pick(labels), {0, 1}, false});
    const auto after = ground_constraints(ask, f, lex, cfg);
    for (const auto& g : before) {
      bool found = false;
      for (const auto& h : after) found |= h.object_id == g.object_id && h.noun == g.noun;
      CHECK(found);
    }
  }
}
