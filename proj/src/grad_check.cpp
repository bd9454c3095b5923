#include <algorithm>
#include <cmath>
#include <numeric>

#include "earda/errors.hpp"
#include "earda/nn.hpp"
#include "earda/rng.hpp"

namespace earda::nn {

namespace {

struct Coordinate {
  std::string tensor;
  double* value;
  double analytic;
  Eigen::Index index;
  bool domain_head;
};

}  // namespace

GradCheckResult grad_check(const ModelParams& params, std::span<const Sample> batch, double lambda,
                           const GradCheckOptions& options) {
  if (!(options.eps > 0.0) || options.eps > 1e-3)
    throw ArgumentError("grad_check eps must lie in (0, 1e-3]");

  BackpropOptions bp;
  bp.lambda = lambda;
  bp.domain_pathway = options.domain_pathway;
  auto analytic = backprop_batch(batch, params, bp).grads;
  if (options.tamper) options.tamper(analytic);

  ModelParams probe = params;
  std::vector<Coordinate> coords;
  for_each_tensor(
      [&](const std::string& name, auto& p, const auto& g) {
        const bool domain = name.rfind("domain.", 0) == 0;
        for (Eigen::Index i = 0; i < p.size(); ++i)
          coords.push_back({name, p.data() + i, g.data()[i], i, domain});
      },
      probe, analytic);
  if (!options.domain_pathway)
    std::erase_if(coords, [](const Coordinate& c) { return c.domain_head; });

  if (options.max_coordinates > 0 && options.max_coordinates < coords.size()) {
    const std::size_t keep = std::max<std::size_t>(options.max_coordinates, 200);
    if (keep < coords.size()) {
      Rng rng(options.seed);
      rng.shuffle(std::span<Coordinate>(coords));
      coords.resize(keep);
    }
  }

  auto objective = [&](bool domain_head) {
    const auto loss = batch_loss(batch, probe, lambda, options.domain_pathway);
    return domain_head ? loss.domain : loss.total;
  };

  GradCheckResult result;
  for (auto& c : coords) {
    const double saved = *c.value;
    *c.value = saved + options.eps;
    const double plus = objective(c.domain_head);
    *c.value = saved - options.eps;
    const double minus = objective(c.domain_head);
    *c.value = saved;
    const double numeric = (plus - minus) / (2.0 * options.eps);
    const double err = std::abs(c.analytic - numeric) /
                       std::max({1.0, std::abs(c.analytic), std::abs(numeric)});
    if (err > result.max_rel_error || result.worst_index < 0) {
      result.max_rel_error = err;
      result.worst_tensor = c.tensor;
      result.worst_index = c.index;
    }
    ++result.checked;
  }
  return result;
}

}  // namespace earda::nn
