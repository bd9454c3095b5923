#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "earda/datasets.hpp"
#include "earda/nn.hpp"
#include "earda/signal.hpp"

namespace earda::dann {

struct DannModel {
  nn::ModelParams params;
  double lambda = 0.3;
  std::uint64_t seed = 0;
  // False for the no-adaptation baseline, whose domain head is never trained.
  bool has_domain_head = true;

  nn::Architecture architecture() const { return nn::architecture_of(params); }
  void validate() const;  // throws ShapeError / ArgumentError
};

enum class Selection { Last, BestTargetVal };

std::string_view to_string(Selection s);
Selection parse_selection(std::string_view s);  // throws ConfigError

struct TrainConfig {
  double lambda = 0.3;
  std::size_t batch_size = 32;
  std::size_t epochs = 200;
  double learning_rate = 1e-3;
  // Global gradient-norm ceiling applied before each update; 0 disables.
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  // Low-pass the target windows before training and evaluation.
  bool target_filter_enabled = true;
  signal::FilterSpec target_filter;
  Selection selection = Selection::BestTargetVal;
  // Target-train labels feed the label predictor (supervised adaptation).
  bool target_labels = true;
  unsigned threads = 1;
  nn::Architecture arch;

  void validate() const;  // throws ArgumentError
};

struct EpochRecord {
  double label_loss = 0.0;
  double domain_loss = 0.0;
  double total_loss = 0.0;
  std::optional<double> source_val_accuracy;
  std::optional<double> target_val_accuracy;
  // Balanced domain-head accuracy over source and target validation windows.
  std::optional<double> domain_val_accuracy;
};

struct TrainReport {
  bool domain_adaptation = true;
  std::vector<EpochRecord> epochs;
  double wall_seconds = 0.0;
  std::size_t selected_epoch = 0;  // 1-based
};

nlohmann::ordered_json to_json(const TrainReport& report, const TrainConfig& config);

// E = label_loss - lambda * domain_loss over one source and one target batch.
// Throws ArgumentError when both are empty.
nn::LossComponents total_loss(std::span<const datasets::LabeledWindow> source_batch,
                              std::span<const datasets::LabeledWindow> target_batch,
                              const DannModel& model, bool target_labels = true);

struct TrainResult {
  DannModel model;
  TrainReport report;
};

// One step per source batch: a shuffled source batch plus a target batch of
// the same size drawn with replacement, an adaptive-moment update, and an
// epoch-end validation pass. Throws ArgumentError on empty train sets.
TrainResult train_dann(const datasets::Splits& source, const datasets::Splits& target,
                       const TrainConfig& config);

// Same recipe on source data alone; the domain head keeps its
// initialization. Best-epoch selection falls back to source validation.
TrainResult train_source_only(const datasets::Splits& source, const TrainConfig& config);

// Filters target windows when config.target_filter_enabled.
datasets::Splits condition_target(const datasets::Splits& target, const TrainConfig& config);

struct Prediction {
  ActivityLabel label = ActivityLabel::Walking;
  nn::Vector probabilities;
};

// Argmax of the label-head softmax, ties to the lowest class. Throws
// ShapeError unless the window is T x input_dim.
Prediction predict(const DannModel& model, const Eigen::MatrixXd& window);
std::vector<ActivityLabel> predict_labels(const DannModel& model,
                                          std::span<const datasets::LabeledWindow> windows,
                                          unsigned threads = 1);

double accuracy(const DannModel& model, std::span<const datasets::LabeledWindow> windows,
                unsigned threads = 1);

// Mean of the per-domain hit rates of the domain head, so 0.5 is chance
// regardless of how many windows each side contributes.
double domain_accuracy(const DannModel& model, std::span<const datasets::LabeledWindow> source,
                       std::span<const datasets::LabeledWindow> target);

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Versioned header (format version, architecture, lambda, seed) followed by
// named row-major tensors. Load throws CompatibilityError on a foreign or
// newer file and CorruptionError on truncation or inconsistent contents.
void save_checkpoint(const DannModel& model, const std::filesystem::path& path);
DannModel load_checkpoint(const std::filesystem::path& path);
std::string serialize_checkpoint(const DannModel& model);
DannModel deserialize_checkpoint(std::string_view bytes, const std::string& what = "checkpoint");

}  // namespace earda::dann
