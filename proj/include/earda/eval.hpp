#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "earda/dann.hpp"
#include "earda/labels.hpp"

namespace earda::eval {

// Rows are the true class, columns the prediction.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumActivities>, kNumActivities> counts{};

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(int truth) const;
  std::uint64_t col_sum(int predicted) const;
};

// Throws ArgumentError on empty or unequal-length inputs.
ConfusionMatrix confusion(std::span<const ActivityLabel> truths,
                          std::span<const ActivityLabel> predictions);

struct ClassMetrics {
  double recall = 0.0;  // reported as per-class accuracy
  double precision = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  bool degenerate = false;  // no windows of this class in the truths
};

struct Metrics {
  double accuracy = 0.0;
  std::array<ClassMetrics, kNumActivities> classes{};
  double macro_f1 = 0.0;
  ConfusionMatrix confusion;
};

Metrics metrics(const ConfusionMatrix& cm);

struct EvalReport {
  Metrics overall;
  // One entry per head-movement condition present, in enum order.
  std::vector<std::pair<HeadMovement, Metrics>> groups;
};

// Throws ArgumentError on length mismatches (groups, when given, must align
// with truths).
EvalReport report(std::span<const ActivityLabel> truths, std::span<const ActivityLabel> predictions,
                  std::optional<std::span<const HeadMovement>> groups = std::nullopt);

// Predicts every window and reports grouped by head movement.
EvalReport evaluate(const dann::DannModel& model, std::span<const datasets::LabeledWindow> windows,
                    unsigned threads = 1);

nlohmann::ordered_json to_json(const Metrics& m);
nlohmann::ordered_json to_json(const EvalReport& r);

// Activity rows by head-movement columns of "acc / F1" cells, followed by
// an overall column and an overall row.
std::string format_table(const EvalReport& r);

struct DaComparison {
  EvalReport dann;
  EvalReport source_only;
  dann::TrainReport dann_training;
  dann::TrainReport source_only_training;
  double accuracy_gap = 0.0;  // dann minus source-only, in accuracy units
};

// Trains both models with identical seeds and evaluates them on the
// conditioned target test split.
DaComparison ablate_da(const datasets::Splits& source, const datasets::Splits& target_raw,
                       const dann::TrainConfig& config);

struct FilterComparison {
  EvalReport filtered;
  EvalReport unfiltered;
  dann::TrainReport filtered_training;
  dann::TrainReport unfiltered_training;
  double accuracy_gain = 0.0;  // filtered minus unfiltered
};

// Runs train_dann twice, with and without the target low-pass, each
// evaluated on its own conditioning of the target test split.
FilterComparison ablate_filter(const datasets::Splits& source, const datasets::Splits& target_raw,
                               const dann::TrainConfig& config);

nlohmann::ordered_json to_json(const DaComparison& c, const dann::TrainConfig& config);
nlohmann::ordered_json to_json(const FilterComparison& c, const dann::TrainConfig& config);

}  // namespace earda::eval
