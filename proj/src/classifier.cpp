#include "langnav/classifier.hpp"

#include <cmath>
#include <string>

#include "langnav/error.hpp"
#include "langnav/kernels.hpp"
#include "langnav/random.hpp"

namespace langnav {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::Lstm: return "lstm";
    case Architecture::BiLstm: return "bilstm";
    case Architecture::AttBiLstm: return "attbilstm";
  }
  return "attbilstm";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "lstm") return Architecture::Lstm;
  if (name == "bilstm") return Architecture::BiLstm;
  if (name == "attbilstm") return Architecture::AttBiLstm;
  throw Error(ErrorCode::Parse, "unknown architecture '" + std::string(name) + "'");
}

namespace {

LstmParams lstm_zeros_like(const LstmParams& p) {
  return {MatrixXd::Zero(p.input_weights.rows(), p.input_weights.cols()),
          MatrixXd::Zero(p.recurrent_weights.rows(), p.recurrent_weights.cols()), VectorXd::Zero(p.bias.size())};
}

template <class Params, class Fn>
void visit_tensors(Params& params, Fn&& fn) {
  fn("embedding", params.embedding);
  fn("forward.input_weights", params.forward.input_weights);
  fn("forward.recurrent_weights", params.forward.recurrent_weights);
  fn("forward.bias", params.forward.bias);
  if (params.backward) {
    fn("backward.input_weights", params.backward->input_weights);
    fn("backward.recurrent_weights", params.backward->recurrent_weights);
    fn("backward.bias", params.backward->bias);
  }
  if (params.attention) fn("attention.w", params.attention->w);
  fn("output.weights", params.output.weights);
  fn("output.bias", params.output.bias);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

VectorXd softmax(const VectorXd& scores) {
  VectorXd e = (scores.array() - scores.maxCoeff()).exp();
  return e / e.sum();
}

int argmax_lowest(const Eigen::Vector3d& v) {
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

void check_lstm_shapes(const LstmParams& p, Index d, const char* which) {
  const Index h = p.recurrent_weights.cols();
  if (p.recurrent_weights.rows() != 4 * h || p.input_weights.rows() != 4 * h || p.bias.size() != 4 * h ||
      (d >= 0 && p.input_weights.cols() != d)) {
    throw Error(ErrorCode::ShapeMismatch, std::string(which) + " LSTM parameter shapes are inconsistent");
  }
}

struct LstmTrace {
  MatrixXd gates;       // 4p x T, activated
  MatrixXd cells;       // p x T
  MatrixXd tanh_cells;  // p x T
  MatrixXd hidden;      // p x T
};

LstmTrace run_lstm(const MatrixXd& inputs, const LstmParams& p) {
  if (inputs.cols() == 0) throw Error(ErrorCode::EmptyInput, "LSTM needs at least one input step");
  check_lstm_shapes(p, inputs.rows(), "input");
  const Index h = p.hidden_size();
  const Index steps = inputs.cols();
  LstmTrace tr;
  tr.gates.resize(4 * h, steps);
  tr.cells.resize(h, steps);
  tr.tanh_cells.resize(h, steps);
  tr.hidden.resize(h, steps);
  MatrixXd pre = p.input_weights * inputs;
  pre.colwise() += p.bias;
  VectorXd hprev = VectorXd::Zero(h);
  VectorXd cprev = VectorXd::Zero(h);
  VectorXd z(4 * h);
  for (Index t = 0; t < steps; ++t) {
    z.noalias() = pre.col(t) + p.recurrent_weights * hprev;
    auto gates = tr.gates.col(t);
    for (Index k = 0; k < h; ++k) {
      gates[k] = sigmoid(z[k]);
      gates[h + k] = sigmoid(z[h + k]);
      gates[2 * h + k] = std::tanh(z[2 * h + k]);
      gates[3 * h + k] = sigmoid(z[3 * h + k]);
    }
    for (Index k = 0; k < h; ++k) {
      const double c = gates[h + k] * cprev[k] + gates[k] * gates[2 * h + k];
      const double tc = std::tanh(c);
      tr.cells(k, t) = c;
      tr.tanh_cells(k, t) = tc;
      tr.hidden(k, t) = gates[3 * h + k] * tc;
    }
    hprev = tr.hidden.col(t);
    cprev = tr.cells.col(t);
  }
  return tr;
}

// Backpropagates dL/dh (p x T) through one direction. Parameter gradients are
// added to `grad` scaled by `scale`; the returned input gradient is unscaled.
MatrixXd backprop_lstm(const MatrixXd& inputs, const LstmTrace& tr, const MatrixXd& dhidden, const LstmParams& p,
                       LstmParams& grad, double scale) {
  const Index h = p.hidden_size();
  const Index steps = inputs.cols();
  MatrixXd dz(4 * h, steps);
  VectorXd dh_next = VectorXd::Zero(h);
  VectorXd dc_next = VectorXd::Zero(h);
  for (Index t = steps - 1; t >= 0; --t) {
    const auto gates = tr.gates.col(t);
    for (Index k = 0; k < h; ++k) {
      const double dh = dhidden(k, t) + dh_next[k];
      const double i = gates[k];
      const double f = gates[h + k];
      const double g = gates[2 * h + k];
      const double o = gates[3 * h + k];
      const double tc = tr.tanh_cells(k, t);
      const double c_prev = t > 0 ? tr.cells(k, t - 1) : 0.0;
      const double dc = dc_next[k] + dh * o * (1.0 - tc * tc);
      dz(k, t) = dc * g * i * (1.0 - i);
      dz(h + k, t) = dc * c_prev * f * (1.0 - f);
      dz(2 * h + k, t) = dc * i * (1.0 - g * g);
      dz(3 * h + k, t) = dh * tc * o * (1.0 - o);
      dc_next[k] = dc * f;
    }
    dh_next.noalias() = p.recurrent_weights.transpose() * dz.col(t);
  }
  grad.input_weights.noalias() += scale * (dz * inputs.transpose());
  if (steps > 1) {
    grad.recurrent_weights.noalias() += scale * (dz.rightCols(steps - 1) * tr.hidden.leftCols(steps - 1).transpose());
  }
  grad.bias.noalias() += scale * dz.rowwise().sum();
  return p.input_weights.transpose() * dz;
}

MatrixXd reversed(const MatrixXd& m) { return m.rowwise().reverse(); }

struct ForwardTrace {
  MatrixXd inputs;
  LstmTrace fwd;
  std::optional<LstmTrace> bwd;
  MatrixXd states;
  MatrixXd tanh_states;
  VectorXd alpha;
  VectorXd feature;
  Eigen::Vector3d probs;
};

ForwardTrace run_forward(std::span<const int> ids, const ModelParams& params, Architecture arch) {
  ForwardTrace tr;
  tr.inputs = embed_sequence(ids, params.embedding);
  tr.fwd = run_lstm(tr.inputs, params.forward);
  const Index steps = tr.inputs.cols();
  if (arch == Architecture::Lstm) {
    tr.states = tr.fwd.hidden;
  } else {
    if (!params.backward) throw Error(ErrorCode::InvariantViolation, "bidirectional model lacks backward LSTM");
    tr.bwd = run_lstm(reversed(tr.inputs), *params.backward);
    tr.states = tr.fwd.hidden + reversed(tr.bwd->hidden);
  }
  if (arch == Architecture::AttBiLstm) {
    if (!params.attention) throw Error(ErrorCode::InvariantViolation, "attention model lacks attention head");
    tr.tanh_states = tr.states.array().tanh();
    tr.alpha = softmax(tr.tanh_states.transpose() * params.attention->w);
    tr.feature = (tr.states * tr.alpha).array().tanh();
  } else {
    tr.feature = tr.states.col(steps - 1);
  }
  tr.probs = output_probs(tr.feature, params.output);
  return tr;
}

}  // namespace

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z;
  z.embedding = MatrixXd::Zero(params.embedding.rows(), params.embedding.cols());
  z.forward = lstm_zeros_like(params.forward);
  if (params.backward) z.backward = lstm_zeros_like(*params.backward);
  if (params.attention) z.attention = AttentionHead{VectorXd::Zero(params.attention->w.size())};
  z.output = {MatrixXd::Zero(params.output.weights.rows(), params.output.weights.cols()),
              VectorXd::Zero(params.output.bias.size())};
  return z;
}

std::vector<std::span<double>> tensor_views(ModelParams& params) {
  std::vector<std::span<double>> out;
  visit_tensors(params, [&](std::string_view, auto& t) { out.emplace_back(t.data(), static_cast<std::size_t>(t.size())); });
  return out;
}

std::vector<std::span<const double>> tensor_views(const ModelParams& params) {
  std::vector<std::span<const double>> out;
  visit_tensors(params, [&](std::string_view, const auto& t) { out.emplace_back(t.data(), static_cast<std::size_t>(t.size())); });
  return out;
}

std::vector<std::string_view> tensor_names(const ModelParams& params) {
  std::vector<std::string_view> out;
  visit_tensors(params, [&](std::string_view name, const auto&) { out.push_back(name); });
  return out;
}

ModelParams init_params(Architecture arch, const ModelDims& dims, std::uint64_t seed) {
  if (dims.vocab_size < 2 || dims.embedding_dim < 1 || dims.hidden_dim < 1) {
    throw Error(ErrorCode::InvalidConfig, "model dimensions must be positive");
  }
  Rng rng(seed);
  auto uniform = [&](Index rows, Index cols) {
    MatrixXd m(rows, cols);
    // Column-major fill keeps the draw order independent of Eigen internals.
    for (Index c = 0; c < cols; ++c) {
      for (Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-0.08, 0.08);
    }
    return m;
  };
  const Index d = dims.embedding_dim;
  const Index h = dims.hidden_dim;
  auto lstm = [&]() {
    LstmParams p{uniform(4 * h, d), uniform(4 * h, h), uniform(4 * h, 1).col(0)};
    p.bias.segment(h, h).setOnes();
    return p;
  };
  ModelParams params;
  params.embedding = uniform(d, dims.vocab_size);
  params.forward = lstm();
  if (arch != Architecture::Lstm) params.backward = lstm();
  if (arch == Architecture::AttBiLstm) params.attention = AttentionHead{uniform(h, 1).col(0)};
  params.output = {uniform(3, h), uniform(3, 1).col(0)};
  return params;
}

void validate(const ModelParams& params, Architecture arch) {
  const bool want_backward = arch != Architecture::Lstm;
  const bool want_attention = arch == Architecture::AttBiLstm;
  if (params.backward.has_value() != want_backward || params.attention.has_value() != want_attention) {
    throw Error(ErrorCode::InvariantViolation,
                "model components do not match architecture " + std::string(architecture_name(arch)));
  }
  const Index d = params.embedding.rows();
  check_lstm_shapes(params.forward, d, "forward");
  const Index h = params.forward.hidden_size();
  if (params.backward) {
    check_lstm_shapes(*params.backward, d, "backward");
    if (params.backward->hidden_size() != h) throw Error(ErrorCode::ShapeMismatch, "LSTM directions differ in size");
  }
  if (params.attention && params.attention->w.size() != h) throw Error(ErrorCode::ShapeMismatch, "attention size");
  if (params.output.weights.rows() != 3 || params.output.weights.cols() != h || params.output.bias.size() != 3) {
    throw Error(ErrorCode::ShapeMismatch, "output head must be 3 x hidden");
  }
  for (auto t : tensor_views(params)) {
    for (double v : t) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvariantViolation, "non-finite parameter");
    }
  }
}

MatrixXd embed_sequence(std::span<const int> ids, const MatrixXd& table) {
  MatrixXd out(table.rows(), static_cast<Index>(ids.size()));
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || ids[t] >= table.cols()) {
      throw Error(ErrorCode::IdOutOfRange, "token id " + std::to_string(ids[t]) + " outside embedding table");
    }
    out.col(static_cast<Index>(t)) = table.col(ids[t]);
  }
  return out;
}

MatrixXd lstm_forward(const MatrixXd& inputs, const LstmParams& params) { return run_lstm(inputs, params).hidden; }

MatrixXd bilstm_states(const MatrixXd& inputs, const LstmParams& fwd, const LstmParams& bwd) {
  if (fwd.hidden_size() != bwd.hidden_size()) throw Error(ErrorCode::ShapeMismatch, "LSTM directions differ in size");
  return lstm_forward(inputs, fwd) + reversed(lstm_forward(reversed(inputs), bwd));
}

VectorXd attention_weights(const MatrixXd& states, const AttentionHead& head) {
  if (states.cols() == 0) throw Error(ErrorCode::EmptyInput, "attention over an empty sequence");
  if (states.rows() != head.w.size()) throw Error(ErrorCode::ShapeMismatch, "attention vector size");
  return softmax(states.array().tanh().matrix().transpose() * head.w);
}

VectorXd summarize(const MatrixXd& states, const VectorXd& alpha) {
  if (states.cols() != alpha.size()) throw Error(ErrorCode::LengthMismatch, "attention length differs from state count");
  if (std::abs(alpha.sum() - 1.0) > 1e-9) throw Error(ErrorCode::LengthMismatch, "attention weights must sum to one");
  return (states * alpha).array().tanh();
}

Eigen::Vector3d output_probs(const VectorXd& feature, const OutputHead& head) {
  if (feature.size() != head.weights.cols()) throw Error(ErrorCode::ShapeMismatch, "feature size differs from output head");
  return softmax(head.weights * feature + head.bias);
}

Classification classify(std::span<const int> ids, const ModelParams& params, Architecture arch) {
  auto tr = run_forward(ids, params, arch);
  Classification out;
  out.probs = tr.probs;
  out.label = static_cast<Label>(argmax_lowest(tr.probs));
  if (arch == Architecture::AttBiLstm) out.attention = std::move(tr.alpha);
  return out;
}

Classification classify(const Phrase& phrase, const ClassifierModel& model) {
  return classify(phrase.tokens, model.params, model.architecture);
}

double loss(const Eigen::Vector3d& probs, Label label) {
  return -std::log(std::max(probs[static_cast<int>(label)], kProbabilityFloor));
}

double accumulate_sample_gradient(const LabeledPhrase& sample, const ModelParams& params, Architecture arch,
                                  ModelParams& grad, double scale) {
  const auto& ids = sample.phrase.tokens;
  const auto tr = run_forward(ids, params, arch);
  const int y = static_cast<int>(sample.label);
  const double sample_loss = loss(tr.probs, sample.label);

  Eigen::Vector3d dlogits = tr.probs;
  if (tr.probs[y] >= kProbabilityFloor) {
    dlogits[y] -= 1.0;
  } else {
    dlogits.setZero();  // clamped region of the loss is flat
  }
  grad.output.weights.noalias() += scale * dlogits * tr.feature.transpose();
  grad.output.bias.noalias() += scale * dlogits;
  const VectorXd dfeature = params.output.weights.transpose() * dlogits;

  const Index steps = tr.inputs.cols();
  MatrixXd dstates = MatrixXd::Zero(tr.states.rows(), steps);
  if (arch == Architecture::AttBiLstm) {
    const VectorXd dsum = dfeature.array() * (1.0 - tr.feature.array().square());
    dstates.noalias() = dsum * tr.alpha.transpose();
    const VectorXd dalpha = tr.states.transpose() * dsum;
    const VectorXd dscores = tr.alpha.array() * (dalpha.array() - tr.alpha.dot(dalpha));
    const auto& w = params.attention->w;
    grad.attention->w.noalias() += scale * tr.tanh_states * dscores;
    for (Index t = 0; t < steps; ++t) {
      dstates.col(t).array() += dscores[t] * w.array() * (1.0 - tr.tanh_states.col(t).array().square());
    }
  } else {
    dstates.col(steps - 1) = dfeature;
  }

  MatrixXd dinputs = backprop_lstm(tr.inputs, tr.fwd, dstates, params.forward, grad.forward, scale);
  if (tr.bwd) {
    dinputs += reversed(backprop_lstm(reversed(tr.inputs), *tr.bwd, reversed(dstates), *params.backward,
                                      *grad.backward, scale));
  }
  for (Index t = 0; t < steps; ++t) grad.embedding.col(ids[static_cast<std::size_t>(t)]) += scale * dinputs.col(t);
  return sample_loss;
}

LossAndGradient gradients(std::span<const LabeledPhrase> batch, const ModelParams& params, Architecture arch) {
  return kernels::batch_gradients(batch, params, arch, kernels::Execution::Serial);
}

}  // namespace langnav
