#include "langnav/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "langnav/error.hpp"
#include "langnav/random.hpp"

namespace langnav {

using nlohmann::json;

Grammar Grammar::parse(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("grammar: ") + e.what());
  }
  Grammar g;
  try {
    g.slots = doc.at("slots").get<std::map<std::string, std::vector<std::string>>>();
    g.goal = doc.at("goal").get<std::vector<std::string>>();
    g.constraint = doc.at("constraint").get<std::vector<std::string>>();
    g.uninformative = doc.at("uninformative").get<std::vector<std::string>>();
    g.tails = doc.value("tails", std::vector<std::string>{});
    g.separators = doc.at("separators").get<std::vector<std::string>>();
    if (doc.contains("parameters")) {
      const auto& p = doc["parameters"];
      g.params.max_constraints = p.value("max_constraints", g.params.max_constraints);
      g.params.max_fillers = p.value("max_fillers", g.params.max_fillers);
      g.params.coordination_probability = p.value("coordination_probability", g.params.coordination_probability);
      g.params.tail_probability = p.value("tail_probability", g.params.tail_probability);
      g.params.max_tails = p.value("max_tails", g.params.max_tails);
      g.params.article_probability = p.value("article_probability", g.params.article_probability);
      g.params.test_fraction = p.value("test_fraction", g.params.test_fraction);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("grammar: ") + e.what());
  }
  if (g.goal.empty() || g.constraint.empty() || g.uninformative.empty() || g.separators.empty()) {
    throw Error(ErrorCode::InvariantViolation, "grammar needs goal, constraint, uninformative and separator entries");
  }
  return g;
}

Grammar Grammar::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open grammar " + path.string());
  return parse(in);
}

namespace {

class Expander {
 public:
  Expander(const Grammar& g, Rng& rng) : g_(g), rng_(rng) {}

  std::string expand(const std::string& tmpl) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
      if (tmpl[i] != '{') {
        out.push_back(tmpl[i++]);
        continue;
      }
      const auto close = tmpl.find('}', i);
      if (close == std::string::npos) throw Error(ErrorCode::Parse, "unterminated slot in '" + tmpl + "'");
      out += fill(tmpl.substr(i + 1, close - i - 1));
      i = close + 1;
    }
    return out;
  }

 private:
  const std::vector<std::string>& slot(const std::string& name) {
    auto it = g_.slots.find(name);
    if (it == g_.slots.end() || it->second.empty()) throw Error(ErrorCode::Parse, "grammar has no slot '" + name + "'");
    return it->second;
  }

  std::string object_phrase(const std::string& obj) {
    return rng_.chance(g_.params.article_probability) ? "the " + obj : obj;
  }

  std::string fill(const std::string& name) {
    if (name != "objs") return rng_.pick(slot(name));
    const auto& objs = slot("obj");
    const std::string first = rng_.pick(objs);
    std::string out = object_phrase(first);
    if (objs.size() > 1 && rng_.chance(g_.params.coordination_probability)) {
      std::string second = first;
      while (second == first) second = rng_.pick(objs);
      out += " and " + object_phrase(second);
    }
    return out;
  }

  const Grammar& g_;
  Rng& rng_;
};

struct Part {
  std::string text;
  Label label;
};

}  // namespace

std::vector<GeneratedInstruction> generate_instructions(const Grammar& grammar, std::uint64_t seed,
                                                        std::size_t n_instructions) {
  Rng rng(seed);
  Expander expander(grammar, rng);
  std::vector<GeneratedInstruction> out;
  out.reserve(n_instructions);
  const auto& p = grammar.params;

  for (std::size_t n = 0; n < n_instructions; ++n) {
    std::vector<Part> parts;
    auto with_tail = [&](std::string text) {
      for (int k = 0; k < p.max_tails && !grammar.tails.empty() && rng.chance(p.tail_probability); ++k) {
        text += " " + expander.expand(rng.pick(grammar.tails));
      }
      return text;
    };
    parts.push_back({with_tail(expander.expand(rng.pick(grammar.goal))), Label::Goal});
    const auto n_constraints = rng.below(static_cast<std::size_t>(p.max_constraints) + 1);
    for (std::size_t k = 0; k < n_constraints; ++k) {
      parts.push_back({with_tail(expander.expand(rng.pick(grammar.constraint))), Label::Constraint});
    }
    const auto n_fillers = rng.below(static_cast<std::size_t>(p.max_fillers) + 1);
    for (std::size_t k = 0; k < n_fillers; ++k) {
      parts.push_back({expander.expand(rng.pick(grammar.uninformative)), Label::Uninformative});
    }
    rng.shuffle(parts);

    GeneratedInstruction ins;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (k > 0) ins.text += rng.pick(grammar.separators);
      ins.text += parts[k].text;
      for (auto& frag : split_phrases(normalize(parts[k].text))) ins.phrases.push_back({std::move(frag), parts[k].label});
    }
    // Splitting the whole instruction must reproduce the per-part fragments.
    const auto whole = split_phrases(normalize(ins.text));
    if (whole.size() != ins.phrases.size()) throw std::logic_error("grammar template contains a separator: " + ins.text);
    for (std::size_t k = 0; k < whole.size(); ++k) {
      if (whole[k] != ins.phrases[k].text) throw std::logic_error("grammar template contains a separator: " + ins.text);
    }
    out.push_back(std::move(ins));
  }
  return out;
}

Corpus generate_corpus(const Grammar& grammar, std::uint64_t seed, std::size_t n_instructions) {
  if (n_instructions < 10) throw Error(ErrorCode::InvalidConfig, "corpus needs at least 10 instructions");
  const auto instructions = generate_instructions(grammar, seed, n_instructions);

  std::vector<std::string> surfaces;
  std::unordered_map<std::string, Label> label_of;
  for (const auto& ins : instructions) {
    for (const auto& ph : ins.phrases) {
      auto [it, inserted] = label_of.emplace(ph.text, ph.label);
      if (inserted) {
        surfaces.push_back(ph.text);
      } else if (it->second != ph.label) {
        throw std::logic_error("phrase '" + ph.text + "' generated with two labels");
      }
    }
  }

  Rng split_rng(seed ^ 0x5851f42d4c957f2dULL);
  split_rng.shuffle(surfaces);
  const auto n_test = static_cast<std::size_t>(grammar.params.test_fraction * static_cast<double>(surfaces.size()) + 0.5);
  std::unordered_set<std::string> test_surfaces(surfaces.begin(), surfaces.begin() + static_cast<std::ptrdiff_t>(n_test));

  Corpus c;
  c.seed = seed;
  c.n_instructions = n_instructions;
  for (const auto& ins : instructions) {
    for (const auto& ph : ins.phrases) {
      if (test_surfaces.contains(ph.text)) {
        c.test.push_back(ph);
        ++c.test_counts[static_cast<int>(ph.label)];
      } else {
        c.train.push_back(ph);
        ++c.train_counts[static_cast<int>(ph.label)];
      }
    }
  }
  for (int k = 0; k < kNumLabels; ++k) {
    if (c.train_counts[k] == 0 || c.test_counts[k] == 0) {
      throw Error(ErrorCode::InvariantViolation,
                  "corpus split has no '" + std::string(label_name(static_cast<Label>(k))) + "' phrases; raise the instruction count");
    }
  }
  return c;
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  out << json{{"schema", "langnav-corpus/1"}, {"seed", corpus.seed}, {"instructions", corpus.n_instructions}}.dump() << '\n';
  auto emit = [&](const std::vector<LabeledText>& items, const char* split) {
    for (const auto& p : items) {
      out << json{{"phrase", p.text}, {"label", label_name(p.label)}, {"split", split}}.dump() << '\n';
    }
  };
  emit(corpus.train, "train");
  emit(corpus.test, "test");
}

Corpus read_corpus(std::istream& in) {
  Corpus c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!rec.contains("phrase")) {
      c.seed = rec.value("seed", c.seed);
      c.n_instructions = rec.value("instructions", c.n_instructions);
      continue;
    }
    LabeledText t{rec.at("phrase").get<std::string>(), parse_label(rec.at("label").get<std::string>())};
    if (rec.value("split", std::string("train")) == "test") {
      ++c.test_counts[static_cast<int>(t.label)];
      c.test.push_back(std::move(t));
    } else {
      ++c.train_counts[static_cast<int>(t.label)];
      c.train.push_back(std::move(t));
    }
  }
  return c;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open corpus " + path.string());
  return read_corpus(in);
}

std::vector<LabeledPhrase> tokenize_all(const std::vector<LabeledText>& texts, const Vocabulary& vocab) {
  std::vector<LabeledPhrase> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back({tokenize(t.text, vocab), t.label});
  return out;
}

Vocabulary build_vocabulary(const std::vector<LabeledText>& texts) {
  std::vector<std::string> all;
  all.reserve(texts.size());
  for (const auto& t : texts) all.push_back(t.text);
  return Vocabulary::build(all);
}

}  // namespace langnav
