#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace earda::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Architecture {
  int input_dim = 2;
  int hidden = 16;
  int layers = 2;
  int head_width = 32;  // 0 makes each head a single linear layer
  int label_classes = 4;
  int domain_classes = 2;

  int feature_dim() const { return 2 * hidden; }
  void validate() const;  // throws ArgumentError
};

enum class Gate { Input = 0, Forget = 1, Cell = 2, Output = 3 };

// One direction of one recurrent layer. Gate blocks are stacked by rows in
// the order input, forget, cell, output.
struct LstmCell {
  Matrix w_input;   // 4H x in
  Matrix w_hidden;  // 4H x H
  Vector bias;      // 4H

  int hidden() const { return static_cast<int>(w_hidden.cols()); }
  auto gate_input_weight(Gate g) { return w_input.middleRows(static_cast<int>(g) * hidden(), hidden()); }
  auto gate_input_weight(Gate g) const {
    return w_input.middleRows(static_cast<int>(g) * hidden(), hidden());
  }
  auto gate_bias(Gate g) const { return bias.segment(static_cast<int>(g) * hidden(), hidden()); }
};

inline constexpr int kForward = 0;
inline constexpr int kBackward = 1;

// Stacked bidirectional recurrent feature extractor.
struct RecurrentParams {
  std::vector<std::array<LstmCell, 2>> layers;  // [layer][direction]

  int hidden() const { return layers.front()[0].hidden(); }
  int input_dim() const { return static_cast<int>(layers.front()[0].w_input.cols()); }
};

// linear -> ReLU -> linear; with an empty hidden layer, a single linear map.
struct HeadParams {
  Matrix w_hidden;
  Vector b_hidden;
  Matrix w_out;
  Vector b_out;

  bool has_hidden_layer() const { return w_hidden.size() > 0; }
  int output_dim() const { return static_cast<int>(w_out.rows()); }
  int input_dim() const {
    return static_cast<int>(has_hidden_layer() ? w_hidden.cols() : w_out.cols());
  }
};

// Feature extractor, label predictor and domain classifier parameters. The
// same type holds gradients and optimizer moments.
struct ModelParams {
  RecurrentParams feature;
  HeadParams label;
  HeadParams domain;
};

// Calls fn(name, tensor_from_each...) for every parameter tensor, in a fixed
// order. All arguments must share one architecture.
template <typename Fn, typename First, typename... Rest>
void for_each_tensor(Fn&& fn, First& first, Rest&... rest) {
  for (std::size_t l = 0; l < first.feature.layers.size(); ++l) {
    for (int d = 0; d < 2; ++d) {
      const std::string prefix =
          "feature.l" + std::to_string(l) + (d == kForward ? ".fwd." : ".bwd.");
      fn(prefix + "w_input", first.feature.layers[l][d].w_input,
         rest.feature.layers[l][d].w_input...);
      fn(prefix + "w_hidden", first.feature.layers[l][d].w_hidden,
         rest.feature.layers[l][d].w_hidden...);
      fn(prefix + "bias", first.feature.layers[l][d].bias, rest.feature.layers[l][d].bias...);
    }
  }
  auto head = [&](const std::string& prefix, auto member) {
    fn(prefix + "w_hidden", (first.*member).w_hidden, (rest.*member).w_hidden...);
    fn(prefix + "b_hidden", (first.*member).b_hidden, (rest.*member).b_hidden...);
    fn(prefix + "w_out", (first.*member).w_out, (rest.*member).w_out...);
    fn(prefix + "b_out", (first.*member).b_out, (rest.*member).b_out...);
  };
  head("label.", &ModelParams::label);
  head("domain.", &ModelParams::domain);
}

// Uniform(-a, a) weights with a = sqrt(6 / (fan_in + fan_out)) per gate
// block; zero biases except forget-gate biases, which start at 1.
ModelParams init_params(const Architecture& arch, std::uint64_t seed);
ModelParams zeros_like(const ModelParams& p);
Architecture architecture_of(const ModelParams& p);
std::size_t parameter_count(const ModelParams& p);

// --- forward / backward ---------------------------------------------------

struct DirectionTrace {
  Matrix gates;      // 4H x T, post-activation
  Matrix cell;       // H x T
  Matrix cell_tanh;  // H x T
  Matrix hidden;     // H x T
};

struct FeatureTrace {
  std::vector<Matrix> inputs;                       // per layer, in x T
  std::vector<std::array<DirectionTrace, 2>> dirs;  // per layer
};

// window is T x input_dim. Returns the top layer's forward hidden state at
// the last timestep followed by its backward hidden state at the first
// timestep (2H values). Throws ShapeError.
Vector feature_forward(const Matrix& window, const RecurrentParams& params,
                       FeatureTrace* trace = nullptr);

// Backpropagation through time. Accumulates into grads.
void feature_backward(const Vector& d_feature, const RecurrentParams& params,
                      const FeatureTrace& trace, RecurrentParams& grads);

struct HeadTrace {
  Vector input;
  Vector pre_activation;
  Vector activation;
};

Vector head_forward(const Vector& feature, const HeadParams& params, HeadTrace* trace = nullptr);

// Accumulates parameter gradients and returns the gradient w.r.t. the input.
Vector head_backward(const Vector& d_logits, const HeadParams& params, const HeadTrace& trace,
                     HeadParams& grads);

Vector softmax(const Vector& logits);

struct CrossEntropy {
  double loss;
  Vector grad;  // softmax - onehot
};

// Throws IndexError when truth is outside [0, logits.size()).
CrossEntropy softmax_ce(const Vector& logits, int truth);

// Gradient reversal: identity forward, -lambda * upstream backward.
inline Vector grl_forward(const Vector& x) { return x; }
inline Vector grl_backward(const Vector& upstream, double lambda) { return -lambda * upstream; }

// --- batches ----------------------------------------------------------------

struct Sample {
  std::reference_wrapper<const Matrix> window;
  int label = 0;
  int domain = 0;
  bool use_label_loss = true;
};

struct LossComponents {
  double label = 0.0;   // mean over samples with use_label_loss (0 if none)
  double domain = 0.0;  // mean over all samples
  double total = 0.0;   // label - lambda * domain
  std::size_t labeled = 0;
  std::size_t count = 0;
};

struct BackpropOptions {
  double lambda = 0.3;
  // Without the domain pathway the domain head is not evaluated, its
  // gradients stay zero and total equals the label loss.
  bool domain_pathway = true;
  // Per-sample work may be spread over threads; gradients are always reduced
  // in sample order, so results do not depend on this value.
  unsigned threads = 1;
};

struct BatchGradients {
  LossComponents loss;
  ModelParams grads;
};

// Gradients of E = L_y - lambda * L_d: the label head receives dL_y, the
// domain head dL_d (it minimizes the domain loss), and the feature extractor
// dL_y - lambda * dL_d through the reversal layer. Throws ArgumentError on an
// empty batch.
BatchGradients backprop_batch(std::span<const Sample> batch, const ModelParams& params,
                              const BackpropOptions& options);

// Forward-only evaluation of the same loss components.
LossComponents batch_loss(std::span<const Sample> batch, const ModelParams& params, double lambda,
                          bool domain_pathway = true);

// --- gradient verification --------------------------------------------------

struct GradCheckOptions {
  double eps = 1e-5;
  // 0 checks every coordinate; otherwise a seeded random subset (at least
  // 200 coordinates).
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 0;
  bool domain_pathway = true;
  // Applied to the analytic gradients before comparison (fault injection).
  std::function<void(ModelParams&)> tamper;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  Eigen::Index worst_index = -1;
  std::size_t checked = 0;
};

// Central differences vs analytic gradients, error |a-n| / max(1, |a|, |n|).
// Feature-extractor and label-head coordinates are checked against E; the
// domain head against L_d, which is the objective it descends. Throws
// ArgumentError unless 0 < eps <= 1e-3.
GradCheckResult grad_check(const ModelParams& params, std::span<const Sample> batch,
                           double lambda, const GradCheckOptions& options = {});

}  // namespace earda::nn
