#include "earda/optimizer.hpp"

#include <cmath>

#include "earda/errors.hpp"

namespace earda::nn {

OptimizerState make_optimizer(const ModelParams& params, const AdamConfig& config) {
  OptimizerState s;
  s.first_moment = zeros_like(params);
  s.second_moment = zeros_like(params);
  s.config = config;
  return s;
}

void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> first_moment, std::span<double> second_moment,
                 std::int64_t step, const AdamConfig& config) {
  if (grads.size() != params.size() || first_moment.size() != params.size() ||
      second_moment.size() != params.size())
    throw ShapeError("adam_update: buffer lengths differ");
  if (step < 1) throw ArgumentError("adam_update: step index must be >= 1");
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    first_moment[i] = config.beta1 * first_moment[i] + (1.0 - config.beta1) * g;
    second_moment[i] = config.beta2 * second_moment[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = first_moment[i] / correction1;
    const double v_hat = second_moment[i] / correction2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void adam_step(ModelParams& params, const ModelParams& grads, OptimizerState& state) {
  for_each_tensor(
      [](const std::string& name, const auto& p, const auto& g, const auto& m, const auto& v) {
        if (p.rows() != g.rows() || p.cols() != g.cols() || p.rows() != m.rows() ||
            p.cols() != m.cols() || p.rows() != v.rows() || p.cols() != v.cols())
          throw ShapeError("adam_step: shape mismatch for " + name);
      },
      params, grads, state.first_moment, state.second_moment);

  const std::int64_t step = state.step + 1;
  for_each_tensor(
      [&](const std::string&, auto& p, const auto& g, auto& m, auto& v) {
        const auto n = static_cast<std::size_t>(p.size());
        adam_update({p.data(), n}, {g.data(), n}, {m.data(), n}, {v.data(), n}, step, state.config);
      },
      params, grads, state.first_moment, state.second_moment);
  state.step = step;
}

}  // namespace earda::nn
