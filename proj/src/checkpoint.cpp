#include <cstdio>
#include <fstream>
#include <sstream>

#include "langnav/error.hpp"
#include "langnav/training.hpp"

namespace langnav {
namespace {

constexpr const char* kMagic = "langnav-model";
constexpr int kVersion = 1;

std::string expect_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, std::string("checkpoint truncated before ") + what);
  return line;
}

template <typename... Ts>
void read_fields(const std::string& line, const std::string& key, Ts&... out) {
  std::istringstream is(line);
  std::string k;
  is >> k;
  if (k != key) throw Error(ErrorCode::Parse, "checkpoint: expected '" + key + "', got '" + line + "'");
  ((is >> out), ...);
  if (is.fail()) throw Error(ErrorCode::Parse, "checkpoint: malformed '" + key + "' line");
}

}  // namespace

void save_model(const ClassifierModel& model, std::ostream& out) {
  validate(model.params, model.architecture);
  const auto& p = model.params;
  out << kMagic << ' ' << kVersion << '\n';
  out << "architecture " << architecture_name(model.architecture) << '\n';
  out << "dims " << p.embedding.cols() << ' ' << p.embedding.rows() << ' ' << p.forward.hidden_size() << '\n';
  out << "seed " << model.seed << '\n';
  const auto words = model.vocab.words();
  out << "vocab " << words.size() << '\n';
  for (const auto& w : words) out << w << '\n';
  const auto names = tensor_names(p);
  const auto views = tensor_views(p);
  char buf[32];
  for (std::size_t t = 0; t < views.size(); ++t) {
    out << "tensor " << names[t] << ' ' << views[t].size() << '\n';
    for (std::size_t i = 0; i < views[t].size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", views[t][i]);
      out << buf << (i + 1 == views[t].size() ? '\n' : ' ');
    }
  }
  out << "end\n";
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write model " + path.string());
  save_model(model, out);
  if (!out) throw Error(ErrorCode::Io, "failed writing model " + path.string());
}

ClassifierModel load_model(std::istream& in) {
  int version = 0;
  read_fields(expect_line(in, "header"), kMagic, version);
  if (version != kVersion) throw Error(ErrorCode::Parse, "unsupported checkpoint version " + std::to_string(version));
  std::string arch_name;
  read_fields(expect_line(in, "architecture"), "architecture", arch_name);
  ClassifierModel model;
  model.architecture = parse_architecture(arch_name);
  ModelDims dims;
  read_fields(expect_line(in, "dims"), "dims", dims.vocab_size, dims.embedding_dim, dims.hidden_dim);
  read_fields(expect_line(in, "seed"), "seed", model.seed);
  std::size_t n_words = 0;
  read_fields(expect_line(in, "vocab"), "vocab", n_words);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n_words; ++i) words.push_back(expect_line(in, "vocabulary word"));
  model.vocab = Vocabulary::from_words(words);
  if (model.vocab.size() != dims.vocab_size) throw Error(ErrorCode::Parse, "checkpoint vocabulary size mismatch");

  model.params = init_params(model.architecture, dims, 0);
  const auto names = tensor_names(model.params);
  auto views = tensor_views(model.params);
  for (std::size_t t = 0; t < views.size(); ++t) {
    std::string name;
    std::size_t size = 0;
    read_fields(expect_line(in, "tensor"), "tensor", name, size);
    if (name != names[t] || size != views[t].size()) {
      throw Error(ErrorCode::Parse, "checkpoint tensor '" + name + "' does not match expected '" +
                                        std::string(names[t]) + "' of size " + std::to_string(views[t].size()));
    }
    std::istringstream values(expect_line(in, "tensor values"));
    for (auto& v : views[t]) {
      std::string tok;
      if (!(values >> tok)) throw Error(ErrorCode::Parse, "checkpoint tensor '" + name + "' is short");
      v = std::strtod(tok.c_str(), nullptr);
    }
  }
  if (expect_line(in, "end") != "end") throw Error(ErrorCode::Parse, "checkpoint missing 'end'");
  validate(model.params, model.architecture);
  return model;
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open model " + path.string());
  return load_model(in);
}

}  // namespace langnav
