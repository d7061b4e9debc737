#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "langnav/classifier.hpp"
#include "langnav/corpus.hpp"
#include "langnav/kernels.hpp"

namespace langnav {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 1;
  int embedding_dim = 32;
  int hidden_dim = 64;
  kernels::Execution execution = kernels::Execution::Serial;
};

// Throws Error(InvalidConfig).
void validate(const TrainConfig& config);

struct TrainResult {
  ClassifierModel model;
  // Mean training cross-entropy of each epoch (over its mini-batches).
  std::vector<double> loss_curve;
};

// Vocabulary is built from the training split. Throws Error(Divergence) when
// the loss becomes non-finite.
TrainResult train(const Corpus& corpus, const TrainConfig& config, Architecture arch);
TrainResult train(const Vocabulary& vocab, std::span<const LabeledPhrase> samples, const TrainConfig& config,
                  Architecture arch);

// Adam state for one parameter set.
class Adam {
 public:
  Adam(const ModelParams& like, const TrainConfig& config);
  void step(ModelParams& params, const ModelParams& grad);
  long steps() const { return t_; }

 private:
  TrainConfig config_;
  ModelParams m_;
  ModelParams v_;
  long t_ = 0;
};

double evaluate_accuracy(const ClassifierModel& model, std::span<const LabeledPhrase> test);
double evaluate_accuracy(const ClassifierModel& model, std::span<const LabeledText> test);
double mean_loss(const ClassifierModel& model, std::span<const LabeledPhrase> samples);

// Text checkpoint:
//   langnav-model 1
//   architecture <tag>
//   dims <vocab> <embedding> <hidden>
//   seed <n>
//   vocab <count>  followed by one word per line (reserved ids excluded)
//   tensor <name> <size>  followed by values (column-major), %.17g
//   end
void save_model(const ClassifierModel& model, std::ostream& out);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(std::istream& in);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace langnav
