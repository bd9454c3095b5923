#pragma once

#include <cstdint>
#include <span>

#include "earda/nn.hpp"

namespace earda::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  ModelParams first_moment;
  ModelParams second_moment;
  std::int64_t step = 0;
  AdamConfig config;
};

OptimizerState make_optimizer(const ModelParams& params, const AdamConfig& config = {});

// One bias-corrected adaptive-moment update over flat buffers. step is the
// 1-based index of this update. Throws ShapeError on length mismatch.
void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> first_moment, std::span<double> second_moment,
                 std::int64_t step, const AdamConfig& config);

// Increments state.step and updates every tensor. Throws ShapeError when the
// gradient or moment shapes do not mirror the parameters.
void adam_step(ModelParams& params, const ModelParams& grads, OptimizerState& state);

}  // namespace earda::nn
