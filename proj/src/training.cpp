#include "langnav/training.hpp"

#include <cmath>
#include <numeric>

#include "langnav/error.hpp"
#include "langnav/random.hpp"

namespace langnav {

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be > 0");
  if (c.epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (c.batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch size must be >= 1");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "Adam betas must lie in [0, 1)");
  }
  if (!(c.epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "Adam epsilon must be > 0");
  if (c.embedding_dim < 1 || c.hidden_dim < 1) throw Error(ErrorCode::InvalidConfig, "dimensions must be >= 1");
}

Adam::Adam(const ModelParams& like, const TrainConfig& config)
    : config_(config), m_(zeros_like(like)), v_(zeros_like(like)) {}

void Adam::step(ModelParams& params, const ModelParams& grad) {
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto p = tensor_views(params);
  auto g = tensor_views(grad);
  auto m = tensor_views(m_);
  auto v = tensor_views(v_);
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      const double gi = g[k][i];
      m[k][i] = b1 * m[k][i] + (1.0 - b1) * gi;
      v[k][i] = b2 * v[k][i] + (1.0 - b2) * gi * gi;
      const double mhat = m[k][i] / c1;
      const double vhat = v[k][i] / c2;
      p[k][i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

TrainResult train(const Vocabulary& vocab, std::span<const LabeledPhrase> samples, const TrainConfig& config,
                  Architecture arch) {
  validate(config);
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "training set is empty");
  TrainResult out;
  out.model.architecture = arch;
  out.model.vocab = vocab;
  out.model.seed = config.seed;
  out.model.params = init_params(arch, {vocab.size(), config.embedding_dim, config.hidden_dim}, config.seed);

  Adam adam(out.model.params, config);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<LabeledPhrase> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(samples[order[i]]);
      auto lg = kernels::batch_gradients(batch, out.model.params, arch, config.execution);
      if (!std::isfinite(lg.loss)) {
        throw Error(ErrorCode::Divergence, "loss became non-finite in epoch " + std::to_string(epoch + 1));
      }
      total += lg.loss * static_cast<double>(batch.size());
      adam.step(out.model.params, lg.gradient);
    }
    out.loss_curve.push_back(total / static_cast<double>(samples.size()));
  }
  return out;
}

TrainResult train(const Corpus& corpus, const TrainConfig& config, Architecture arch) {
  if (corpus.train.empty()) throw Error(ErrorCode::EmptyInput, "corpus has no training phrases");
  const auto vocab = build_vocabulary(corpus.train);
  const auto samples = tokenize_all(corpus.train, vocab);
  return train(vocab, samples, config, arch);
}

double evaluate_accuracy(const ClassifierModel& model, std::span<const LabeledPhrase> test) {
  if (test.empty()) throw Error(ErrorCode::EmptyInput, "test set is empty");
  std::size_t correct = 0;
  for (const auto& s : test) {
    if (classify(s.phrase.tokens, model.params, model.architecture).label == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double evaluate_accuracy(const ClassifierModel& model, std::span<const LabeledText> test) {
  const auto tokenized = tokenize_all({test.begin(), test.end()}, model.vocab);
  return evaluate_accuracy(model, tokenized);
}

double mean_loss(const ClassifierModel& model, std::span<const LabeledPhrase> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
  double total = 0.0;
  for (const auto& s : samples) total += loss(classify(s.phrase.tokens, model.params, model.architecture).probs, s.label);
  return total / static_cast<double>(samples.size());
}

}  // namespace langnav
