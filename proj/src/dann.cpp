#include "earda/dann.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "earda/errors.hpp"
#include "earda/optimizer.hpp"
#include "earda/rng.hpp"

namespace earda::dann {

using datasets::LabeledWindow;
using datasets::Splits;

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kSourceOrderStream = 1;
constexpr std::uint64_t kTargetDrawStream = 2;

nn::Sample make_sample(const LabeledWindow& w, bool use_label) {
  return {std::cref(w.data), to_index(w.label), to_index(w.domain), use_label};
}

std::optional<double> maybe_accuracy(const DannModel& m, std::span<const LabeledWindow> ws,
                                     unsigned threads) {
  if (ws.empty()) return std::nullopt;
  return accuracy(m, ws, threads);
}

void clip_global_norm(nn::ModelParams& grads, double max_norm) {
  double sq = 0.0;
  nn::for_each_tensor([&](const std::string&, const auto& t) { sq += t.squaredNorm(); }, grads);
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  nn::for_each_tensor([&](const std::string&, auto& t) { t *= scale; }, grads);
}

TrainResult run(const Splits& source, const Splits* target, const TrainConfig& cfg) {
  cfg.validate();
  if (source.train.empty()) throw ArgumentError("source train set is empty");
  if (target && target->train.empty()) throw ArgumentError("target train set is empty");
  const bool adapt = target != nullptr;
  const auto start = std::chrono::steady_clock::now();

  TrainResult result;
  DannModel& model = result.model;
  model.params = nn::init_params(cfg.arch, derive_seed(cfg.seed, kInitStream));
  model.lambda = cfg.lambda;
  model.seed = cfg.seed;
  model.has_domain_head = adapt;

  nn::AdamConfig adam;
  adam.learning_rate = cfg.learning_rate;
  auto optimizer = nn::make_optimizer(model.params, adam);

  nn::BackpropOptions bp;
  bp.lambda = cfg.lambda;
  bp.domain_pathway = adapt;
  bp.threads = cfg.threads;

  Rng order_rng(derive_seed(cfg.seed, kSourceOrderStream));
  Rng target_rng(derive_seed(cfg.seed, kTargetDrawStream));
  const std::size_t n = source.train.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t steps = (n + cfg.batch_size - 1) / cfg.batch_size;

  std::vector<nn::Sample> batch;
  batch.reserve(2 * cfg.batch_size);
  nn::ModelParams best = model.params;
  double best_score = -1.0;
  result.report.domain_adaptation = adapt;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double label_sum = 0.0, domain_sum = 0.0, total_sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      batch.clear();
      const std::size_t end = std::min(n, (s + 1) * cfg.batch_size);
      for (std::size_t i = s * cfg.batch_size; i < end; ++i)
        batch.push_back(make_sample(source.train[order[i]], true));
      if (adapt) {
        for (std::size_t k = 0; k < cfg.batch_size; ++k) {
          const auto j = static_cast<std::size_t>(target_rng.index(target->train.size()));
          batch.push_back(make_sample(target->train[j], cfg.target_labels));
        }
      }
      auto step = nn::backprop_batch(batch, model.params, bp);
      if (cfg.clip_norm > 0.0) clip_global_norm(step.grads, cfg.clip_norm);
      nn::adam_step(model.params, step.grads, optimizer);
      label_sum += step.loss.label;
      domain_sum += step.loss.domain;
      total_sum += step.loss.total;
    }

    EpochRecord rec;
    const auto denom = static_cast<double>(steps);
    rec.label_loss = label_sum / denom;
    rec.domain_loss = domain_sum / denom;
    rec.total_loss = total_sum / denom;
    rec.source_val_accuracy = maybe_accuracy(model, source.val, cfg.threads);
    if (adapt) {
      rec.target_val_accuracy = maybe_accuracy(model, target->val, cfg.threads);
      if (!source.val.empty() && !target->val.empty())
        rec.domain_val_accuracy = domain_accuracy(model, source.val, target->val);
    }
    result.report.epochs.push_back(rec);

    if (cfg.selection == Selection::BestTargetVal) {
      const auto score = rec.target_val_accuracy ? rec.target_val_accuracy : rec.source_val_accuracy;
      if (score && *score >= best_score) {
        best_score = *score;
        best = model.params;
        result.report.selected_epoch = epoch + 1;
      }
    }
  }

  if (result.report.selected_epoch == 0) {
    result.report.selected_epoch = cfg.epochs;
  } else {
    model.params = std::move(best);
  }
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

void DannModel::validate() const {
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be non-negative");
  if (params.feature.layers.empty()) throw ShapeError("model has no recurrent layers");
  if (params.label.output_dim() != kNumActivities)
    throw ShapeError("label head must have " + std::to_string(kNumActivities) + " outputs");
  if (params.domain.output_dim() != 2) throw ShapeError("domain head must have 2 outputs");
}

std::string_view to_string(Selection s) {
  return s == Selection::Last ? "last" : "best_target_val";
}

Selection parse_selection(std::string_view s) {
  if (s == "last") return Selection::Last;
  if (s == "best_target_val") return Selection::BestTargetVal;
  throw ConfigError("unknown checkpoint selection '" + std::string(s) +
                    "' (expected last or best_target_val)");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ArgumentError("batch_size must be at least 1");
  if (epochs < 1) throw ArgumentError("epochs must be at least 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("lambda must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ArgumentError("learning_rate must be positive");
  if (!(clip_norm >= 0.0)) throw ArgumentError("clip_norm must be >= 0");
  arch.validate();
  if (arch.input_dim != static_cast<int>(datasets::kWindowChannels))
    throw ArgumentError("architecture input_dim must match the window channel count");
}

nlohmann::ordered_json to_json(const TrainReport& report, const TrainConfig& config) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json cfg = {
      {"lambda", config.lambda},
      {"batch_size", config.batch_size},
      {"epochs", config.epochs},
      {"learning_rate", config.learning_rate},
      {"clip_norm", config.clip_norm},
      {"seed", config.seed},
      {"target_filter_enabled", config.target_filter_enabled},
      {"target_filter",
       {{"cutoff_hz", config.target_filter.cutoff_hz},
        {"order", config.target_filter.order},
        {"zero_phase", config.target_filter.zero_phase}}},
      {"checkpoint_selection", to_string(config.selection)},
      {"target_labels", config.target_labels},
      {"architecture",
       {{"input_dim", config.arch.input_dim},
        {"hidden", config.arch.hidden},
        {"layers", config.arch.layers},
        {"head_width", config.arch.head_width}}},
  };
  ordered_json epochs = ordered_json::array();
  for (std::size_t i = 0; i < report.epochs.size(); ++i) {
    const auto& e = report.epochs[i];
    ordered_json rec = {{"epoch", i + 1}, {"label_loss", e.label_loss}};
    if (report.domain_adaptation) rec["domain_loss"] = e.domain_loss;
    rec["total_loss"] = e.total_loss;
    rec["source_val_accuracy"] = opt(e.source_val_accuracy);
    if (report.domain_adaptation) {
      rec["target_val_accuracy"] = opt(e.target_val_accuracy);
      rec["domain_val_accuracy"] = opt(e.domain_val_accuracy);
    }
    epochs.push_back(std::move(rec));
  }
  return {
      {"format_version", 1},
      {"kind", "train_report"},
      {"mode", report.domain_adaptation ? "dann" : "source_only"},
      {"config", std::move(cfg)},
      {"selected_epoch", report.selected_epoch},
      {"epochs", std::move(epochs)},
      {"wall_seconds", report.wall_seconds},
  };
}

nn::LossComponents total_loss(std::span<const LabeledWindow> source_batch,
                              std::span<const LabeledWindow> target_batch, const DannModel& model,
                              bool target_labels) {
  if (source_batch.empty() && target_batch.empty())
    throw ArgumentError("total_loss needs at least one window");
  std::vector<nn::Sample> batch;
  batch.reserve(source_batch.size() + target_batch.size());
  for (const auto& w : source_batch) batch.push_back(make_sample(w, true));
  for (const auto& w : target_batch) batch.push_back(make_sample(w, target_labels));
  return nn::batch_loss(batch, model.params, model.lambda, true);
}

TrainResult train_dann(const Splits& source, const Splits& target, const TrainConfig& config) {
  return run(source, &target, config);
}

TrainResult train_source_only(const Splits& source, const TrainConfig& config) {
  return run(source, nullptr, config);
}

Splits condition_target(const Splits& target, const TrainConfig& config) {
  if (!config.target_filter_enabled) return target;
  Splits out;
  out.train = datasets::filter_windows(target.train, config.target_filter);
  out.val = datasets::filter_windows(target.val, config.target_filter);
  out.test = datasets::filter_windows(target.test, config.target_filter);
  return out;
}

Prediction predict(const DannModel& model, const Eigen::MatrixXd& window) {
  const auto feature = nn::feature_forward(window, model.params.feature);
  Prediction p;
  p.probabilities = nn::softmax(nn::head_forward(feature, model.params.label));
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < p.probabilities.size(); ++i)
    if (p.probabilities(i) > p.probabilities(best)) best = i;
  p.label = activity_from_index(static_cast<int>(best));
  return p;
}

std::vector<ActivityLabel> predict_labels(const DannModel& model,
                                          std::span<const LabeledWindow> windows,
                                          unsigned threads) {
  std::vector<ActivityLabel> out(windows.size());
  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(windows.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < windows.size(); ++i) out[i] = predict(model, windows[i].data).label;
    return out;
  }
  std::vector<std::jthread> pool;
  for (unsigned k = 0; k < workers; ++k) {
    pool.emplace_back([&, k] {
      for (std::size_t i = k; i < windows.size(); i += workers)
        out[i] = predict(model, windows[i].data).label;
    });
  }
  pool.clear();
  return out;
}

double accuracy(const DannModel& model, std::span<const LabeledWindow> windows, unsigned threads) {
  if (windows.empty()) throw ArgumentError("accuracy of an empty window set");
  const auto predicted = predict_labels(model, windows, threads);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) hits += predicted[i] == windows[i].label ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(windows.size());
}

double domain_accuracy(const DannModel& model, std::span<const LabeledWindow> source,
                       std::span<const LabeledWindow> target) {
  if (source.empty() || target.empty())
    throw ArgumentError("domain accuracy needs windows from both domains");
  auto hit_rate = [&](std::span<const LabeledWindow> ws, int truth) {
    std::size_t hits = 0;
    for (const auto& w : ws) {
      const auto logits =
          nn::head_forward(nn::feature_forward(w.data, model.params.feature), model.params.domain);
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < logits.size(); ++i)
        if (logits(i) > logits(best)) best = i;
      hits += best == truth ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(ws.size());
  };
  return 0.5 * (hit_rate(source, to_index(DomainTag::Source)) +
                hit_rate(target, to_index(DomainTag::Target)));
}

}  // namespace earda::dann
