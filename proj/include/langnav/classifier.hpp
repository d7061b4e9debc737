#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "langnav/text.hpp"

namespace langnav {

enum class Architecture { Lstm, BiLstm, AttBiLstm };

std::string_view architecture_name(Architecture arch);
// "lstm", "bilstm", "attbilstm".
Architecture parse_architecture(std::string_view name);

// Gate rows are stacked input, forget, cell, output (4p rows).
struct LstmParams {
  Eigen::MatrixXd input_weights;      // 4p x d
  Eigen::MatrixXd recurrent_weights;  // 4p x p
  Eigen::VectorXd bias;               // 4p

  Eigen::Index hidden_size() const { return recurrent_weights.cols(); }
  Eigen::Index input_size() const { return input_weights.cols(); }
};

struct AttentionHead {
  Eigen::VectorXd w;  // p
};

struct OutputHead {
  Eigen::MatrixXd weights;  // 3 x p
  Eigen::VectorXd bias;     // 3
};

// All trainable tensors. Gradients use the same type.
struct ModelParams {
  Eigen::MatrixXd embedding;  // d x V, column k embeds token k
  LstmParams forward;
  std::optional<LstmParams> backward;
  std::optional<AttentionHead> attention;
  OutputHead output;
};

ModelParams zeros_like(const ModelParams& params);

// Tensors in a fixed order (embedding, forward, backward, attention, output);
// absent components contribute nothing.
std::vector<std::span<double>> tensor_views(ModelParams& params);
std::vector<std::span<const double>> tensor_views(const ModelParams& params);
std::vector<std::string_view> tensor_names(const ModelParams& params);

struct ModelDims {
  int vocab_size = 0;
  int embedding_dim = 32;
  int hidden_dim = 64;
};

// uniform(-0.08, 0.08) everywhere, forget-gate bias 1.0.
ModelParams init_params(Architecture arch, const ModelDims& dims, std::uint64_t seed);

struct ClassifierModel {
  Architecture architecture = Architecture::AttBiLstm;
  Vocabulary vocab;
  ModelParams params;
  std::uint64_t seed = 0;
};

// Throws Error(InvariantViolation) when component presence does not match the
// architecture or shapes disagree.
void validate(const ModelParams& params, Architecture arch);

// Column i is the embedding of ids[i]. Throws Error(IdOutOfRange).
Eigen::MatrixXd embed_sequence(std::span<const int> ids, const Eigen::MatrixXd& table);

// Hidden states (p x T) from zero initial state. Throws Error(ShapeMismatch)
// or Error(EmptyInput).
Eigen::MatrixXd lstm_forward(const Eigen::MatrixXd& inputs, const LstmParams& params);

// Forward states plus backward states read in reverse order, summed per step.
Eigen::MatrixXd bilstm_states(const Eigen::MatrixXd& inputs, const LstmParams& fwd, const LstmParams& bwd);

// softmax_i(w . tanh(h_i)).
Eigen::VectorXd attention_weights(const Eigen::MatrixXd& states, const AttentionHead& head);

// tanh(sum_i alpha_i h_i). Throws Error(LengthMismatch) on size mismatch or
// when alpha does not sum to one within 1e-9.
Eigen::VectorXd summarize(const Eigen::MatrixXd& states, const Eigen::VectorXd& alpha);

Eigen::Vector3d output_probs(const Eigen::VectorXd& feature, const OutputHead& head);

struct Classification {
  Label label = Label::Uninformative;
  Eigen::Vector3d probs = Eigen::Vector3d::Zero();
  std::optional<Eigen::VectorXd> attention;
};

Classification classify(std::span<const int> ids, const ModelParams& params, Architecture arch);
Classification classify(const Phrase& phrase, const ClassifierModel& model);

inline constexpr double kProbabilityFloor = 1e-12;

// -log(max(probs[label], 1e-12)).
double loss(const Eigen::Vector3d& probs, Label label);

// Mean cross-entropy over the batch and its exact gradient
// (kernels::batch_gradients with Execution::Serial).
struct LossAndGradient {
  double loss = 0.0;
  ModelParams gradient;
};

LossAndGradient gradients(std::span<const LabeledPhrase> batch, const ModelParams& params, Architecture arch);

// Per-sample loss with gradient accumulated into `grad` scaled by `scale`.
double accumulate_sample_gradient(const LabeledPhrase& sample, const ModelParams& params, Architecture arch,
                                  ModelParams& grad, double scale);

}  // namespace langnav
