#include "earda/eval.hpp"

#include <cstdio>
#include <map>

#include "earda/errors.hpp"

namespace earda::eval {

using nlohmann::ordered_json;

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts)
    for (auto c : row) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t n = 0;
  for (int i = 0; i < kNumActivities; ++i) n += counts[i][i];
  return n;
}

std::uint64_t ConfusionMatrix::row_sum(int truth) const {
  std::uint64_t n = 0;
  for (auto c : counts[static_cast<std::size_t>(truth)]) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::col_sum(int predicted) const {
  std::uint64_t n = 0;
  for (const auto& row : counts) n += row[static_cast<std::size_t>(predicted)];
  return n;
}

ConfusionMatrix confusion(std::span<const ActivityLabel> truths,
                          std::span<const ActivityLabel> predictions) {
  if (truths.size() != predictions.size())
    throw ArgumentError("confusion: " + std::to_string(truths.size()) + " truths vs " +
                        std::to_string(predictions.size()) + " predictions");
  if (truths.empty()) throw ArgumentError("confusion: no predictions to score");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truths.size(); ++i)
    ++cm.counts[static_cast<std::size_t>(to_index(truths[i]))]
               [static_cast<std::size_t>(to_index(predictions[i]))];
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  Metrics m;
  m.confusion = cm;
  const auto total = cm.total();
  m.accuracy = total ? static_cast<double>(cm.trace()) / static_cast<double>(total) : 0.0;
  double f1_sum = 0.0;
  for (int c = 0; c < kNumActivities; ++c) {
    auto& k = m.classes[static_cast<std::size_t>(c)];
    const auto d = static_cast<double>(cm.counts[c][c]);
    const auto row = cm.row_sum(c);
    const auto col = cm.col_sum(c);
    k.support = row;
    k.degenerate = row == 0;
    k.recall = row ? d / static_cast<double>(row) : 0.0;
    k.precision = col ? d / static_cast<double>(col) : 0.0;
    // Equal to 2PR / (P + R), written so it stays exact in integer terms.
    k.f1 = row + col ? 2.0 * d / static_cast<double>(row + col) : 0.0;
    f1_sum += k.f1;
  }
  m.macro_f1 = f1_sum / kNumActivities;
  return m;
}

EvalReport report(std::span<const ActivityLabel> truths, std::span<const ActivityLabel> predictions,
                  std::optional<std::span<const HeadMovement>> groups) {
  EvalReport r;
  r.overall = metrics(confusion(truths, predictions));
  if (!groups) return r;
  if (groups->size() != truths.size())
    throw ArgumentError("report: group tags do not align with truths");
  std::map<HeadMovement, ConfusionMatrix> by_group;
  for (std::size_t i = 0; i < truths.size(); ++i)
    ++by_group[(*groups)[i]].counts[static_cast<std::size_t>(to_index(truths[i]))]
                                   [static_cast<std::size_t>(to_index(predictions[i]))];
  for (const auto& [head, cm] : by_group) r.groups.emplace_back(head, metrics(cm));
  return r;
}

EvalReport evaluate(const dann::DannModel& model, std::span<const datasets::LabeledWindow> windows,
                    unsigned threads) {
  const auto predicted = dann::predict_labels(model, windows, threads);
  std::vector<ActivityLabel> truths;
  std::vector<HeadMovement> heads;
  for (const auto& w : windows) {
    truths.push_back(w.label);
    heads.push_back(w.head);
  }
  return report(truths, predicted, std::span<const HeadMovement>(heads));
}

ordered_json to_json(const Metrics& m) {
  ordered_json per_class = ordered_json::object();
  for (int c = 0; c < kNumActivities; ++c) {
    const auto& k = m.classes[static_cast<std::size_t>(c)];
    per_class[std::string(to_string(activity_from_index(c)))] = {
        {"accuracy", k.recall}, {"precision", k.precision}, {"f1", k.f1},
        {"support", k.support}, {"degenerate", k.degenerate}};
  }
  ordered_json labels = ordered_json::array();
  for (auto a : kAllActivities) labels.push_back(to_string(a));
  return {{"count", m.confusion.total()},
          {"accuracy", m.accuracy},
          {"macro_f1", m.macro_f1},
          {"per_class", std::move(per_class)},
          {"confusion", {{"labels", std::move(labels)}, {"counts", m.confusion.counts}}}};
}

ordered_json to_json(const EvalReport& r) {
  ordered_json groups = ordered_json::object();
  for (const auto& [head, m] : r.groups) groups[std::string(to_string(head))] = to_json(m);
  return {{"format_version", 1},
          {"kind", "eval_report"},
          {"overall", to_json(r.overall)},
          {"groups", std::move(groups)}};
}

std::string format_table(const EvalReport& r) {
  std::vector<std::pair<std::string, const Metrics*>> columns;
  for (const auto& [head, m] : r.groups) columns.emplace_back(std::string(to_string(head)), &m);
  columns.emplace_back("overall", &r.overall);

  constexpr int kLabelWidth = 10;
  constexpr int kCellWidth = 13;
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-*s", kLabelWidth, "activity");
  out += buf;
  for (const auto& [name, m] : columns) {
    std::snprintf(buf, sizeof buf, "%*s", kCellWidth, name.c_str());
    out += buf;
  }
  out += '\n';
  std::snprintf(buf, sizeof buf, "%-*s", kLabelWidth, "");
  out += buf;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%*s", kCellWidth, "acc / F1");
    out += buf;
  }
  out += '\n';
  for (int c = 0; c < kNumActivities; ++c) {
    std::snprintf(buf, sizeof buf, "%-*s", kLabelWidth,
                  std::string(to_string(activity_from_index(c))).c_str());
    out += buf;
    for (const auto& [name, m] : columns) {
      const auto& k = m->classes[static_cast<std::size_t>(c)];
      if (k.degenerate)
        std::snprintf(buf, sizeof buf, "%*s", kCellWidth, "-");
      else
        std::snprintf(buf, sizeof buf, "%*.2f / %.2f", kCellWidth - 7, k.recall, k.f1);
      out += buf;
    }
    out += '\n';
  }
  std::snprintf(buf, sizeof buf, "%-*s", kLabelWidth, "overall");
  out += buf;
  for (const auto& [name, m] : columns) {
    std::snprintf(buf, sizeof buf, "%*.2f / %.2f", kCellWidth - 7, m->accuracy, m->macro_f1);
    out += buf;
  }
  out += '\n';
  return out;
}

DaComparison ablate_da(const datasets::Splits& source, const datasets::Splits& target_raw,
                       const dann::TrainConfig& config) {
  const auto target = dann::condition_target(target_raw, config);
  if (target.test.empty()) throw ArgumentError("ablate_da needs a non-empty target test split");
  DaComparison out;
  auto adapted = dann::train_dann(source, target, config);
  out.dann = evaluate(adapted.model, target.test, config.threads);
  out.dann_training = std::move(adapted.report);
  auto baseline = dann::train_source_only(source, config);
  out.source_only = evaluate(baseline.model, target.test, config.threads);
  out.source_only_training = std::move(baseline.report);
  out.accuracy_gap = out.dann.overall.accuracy - out.source_only.overall.accuracy;
  return out;
}

FilterComparison ablate_filter(const datasets::Splits& source, const datasets::Splits& target_raw,
                               const dann::TrainConfig& config) {
  if (target_raw.test.empty())
    throw ArgumentError("ablate_filter needs a non-empty target test split");
  FilterComparison out;
  auto run = [&](bool filtered, EvalReport& report, dann::TrainReport& training) {
    auto cfg = config;
    cfg.target_filter_enabled = filtered;
    const auto target = dann::condition_target(target_raw, cfg);
    auto result = dann::train_dann(source, target, cfg);
    report = evaluate(result.model, target.test, cfg.threads);
    training = std::move(result.report);
  };
  run(true, out.filtered, out.filtered_training);
  run(false, out.unfiltered, out.unfiltered_training);
  out.accuracy_gain = out.filtered.overall.accuracy - out.unfiltered.overall.accuracy;
  return out;
}

namespace {

ordered_json training_summary(const dann::TrainReport& r) {
  return {{"epochs", r.epochs.size()},
          {"selected_epoch", r.selected_epoch},
          {"wall_seconds", r.wall_seconds}};
}

}  // namespace

ordered_json to_json(const DaComparison& c, const dann::TrainConfig& config) {
  return {{"format_version", 1},
          {"kind", "ablation"},
          {"mode", "da"},
          {"seed", config.seed},
          {"target_filter_enabled", config.target_filter_enabled},
          {"dann", to_json(c.dann)},
          {"source_only", to_json(c.source_only)},
          {"gap",
           {{"accuracy", c.accuracy_gap},
            {"percentage_points", 100.0 * c.accuracy_gap},
            {"macro_f1", c.dann.overall.macro_f1 - c.source_only.overall.macro_f1}}},
          {"training",
           {{"dann", training_summary(c.dann_training)},
            {"source_only", training_summary(c.source_only_training)}}}};
}

ordered_json to_json(const FilterComparison& c, const dann::TrainConfig& config) {
  ordered_json per_condition = ordered_json::array();
  for (const auto& [head, m] : c.filtered.groups) {
    ordered_json row = {{"condition", to_string(head)}, {"filtered", m.accuracy}};
    for (const auto& [h2, m2] : c.unfiltered.groups) {
      if (h2 != head) continue;
      row["unfiltered"] = m2.accuracy;
      row["delta"] = m.accuracy - m2.accuracy;
    }
    per_condition.push_back(std::move(row));
  }
  return {{"format_version", 1},
          {"kind", "ablation"},
          {"mode", "filter"},
          {"seed", config.seed},
          {"filter",
           {{"cutoff_hz", config.target_filter.cutoff_hz},
            {"order", config.target_filter.order},
            {"zero_phase", config.target_filter.zero_phase}}},
          {"filtered", to_json(c.filtered)},
          {"unfiltered", to_json(c.unfiltered)},
          {"gain", {{"accuracy", c.accuracy_gain}, {"percentage_points", 100.0 * c.accuracy_gain}}},
          {"per_condition", std::move(per_condition)},
          {"training",
           {{"filtered", training_summary(c.filtered_training)},
            {"unfiltered", training_summary(c.unfiltered_training)}}}};
}

}  // namespace earda::eval
