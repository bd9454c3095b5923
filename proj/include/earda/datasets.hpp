#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "earda/labels.hpp"
#include "earda/signal.hpp"

namespace earda::datasets {

inline constexpr std::size_t kWindowLength = 100;
inline constexpr std::size_t kWindowChannels = 2;
inline constexpr double kModelRateHz = 25.0;

// A model-ready sequence: rows are timesteps, column 0 is acceleration
// magnitude in g, column 1 is angular-rate magnitude in rad/s.
struct LabeledWindow {
  Eigen::MatrixXd data;
  ActivityLabel label = ActivityLabel::Walking;
  DomainTag domain = DomainTag::Source;
  HeadMovement head = HeadMovement::None;
  std::string origin;
};

// Builds a window and checks its invariants (100x2, finite, non-negative
// acceleration). Throws ShapeError or DataError.
LabeledWindow make_window(Eigen::MatrixXd data, ActivityLabel label, DomainTag domain,
                          HeadMovement head, std::string origin);
void validate(const LabeledWindow& w);

struct SplitSpec {
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;
  std::uint64_t seed = 0;

  void validate() const;  // throws ArgumentError
};

struct Splits {
  std::vector<LabeledWindow> train;
  std::vector<LabeledWindow> val;
  std::vector<LabeledWindow> test;
};

// --- canonical recordings -------------------------------------------------

// Canonical CSV columns, in canonical order.
inline constexpr std::array<std::string_view, 11> kCanonicalColumns = {
    "t", "ax", "ay", "az", "gx", "gy", "gz", "activity", "head_movement", "location", "accel_unit"};

// Parses a canonical recording. Throws IoError, SchemaError, DataError,
// LabelError or UnitError.
signal::RawRecording load_canonical(const std::filesystem::path& path);
signal::RawRecording parse_canonical(std::string_view text, std::string_view source_name = "<text>");
void save_canonical(const signal::RawRecording& rec, const std::filesystem::path& path);
std::string format_canonical(const signal::RawRecording& rec);

// --- public corpora --------------------------------------------------------

enum class Corpus { MotionSense, HHAR, UCIHAR, Shoaib };

std::string_view to_string(Corpus c);
Corpus parse_corpus(std::string_view s);  // throws ConfigError
double native_rate_hz(Corpus c);

// Reads a corpus from its published directory layout; one recording per
// subject/session (per body position for Shoaib). Throws CorpusFormatError.
std::vector<signal::RawRecording> adapt_public(Corpus corpus, const std::filesystem::path& root);

// Maps a corpus-native activity string onto the four in-scope activities.
// Out-of-scope activities map to nullopt; unrecognized strings also map to
// nullopt after a warning on stderr.
std::optional<ActivityLabel> harmonize_label(std::string_view source_label);

// --- conditioning ----------------------------------------------------------

struct PreprocessOptions {
  std::optional<signal::FilterSpec> filter;  // applied per raw axis
  double target_rate_hz = kModelRateHz;
  std::size_t window_length = kWindowLength;
  DomainTag domain = DomainTag::Source;
  std::string origin;
};

// Raw recording -> (optional per-axis low-pass) -> magnitudes -> g
// normalization -> resample -> non-overlapping windows. Windows whose
// samples do not share one in-scope activity are dropped.
std::vector<LabeledWindow> preprocess_recording(const signal::RawRecording& rec,
                                                const PreprocessOptions& options);

// Zero-phase low-pass over both channels of each window (window-level
// counterpart of per-axis filtering for already-conditioned data).
std::vector<LabeledWindow> filter_windows(std::span<const LabeledWindow> windows,
                                          const signal::FilterSpec& spec,
                                          double rate_hz = kModelRateHz);

// --- sampling ----------------------------------------------------------------

// Exactly per_class windows per activity, uniformly without replacement,
// output order shuffled by seed. Throws ShortageError naming the class.
std::vector<LabeledWindow> balanced_sample(std::span<const LabeledWindow> windows,
                                           std::size_t per_class, std::uint64_t seed);

// Seeded shuffle then contiguous partition; train and val sizes are
// round(n * frac) and test takes the remainder.
Splits split(std::span<const LabeledWindow> windows, const SplitSpec& spec);

std::array<std::size_t, kNumActivities> class_histogram(std::span<const LabeledWindow> windows);

// --- synthetic domain-shift generator ---------------------------------------

struct ActivityWaveform {
  double fundamental_hz;
  double accel_amplitude;  // g, earable (target) scale
  double gyro_baseline;    // rad/s, earable (target) scale
  double gyro_amplitude;   // rad/s, earable (target) scale
};

struct SynthConfig {
  std::size_t per_class = 50;
  double rate_hz = kModelRateHz;
  std::size_t window_length = kWindowLength;
  // Indexed by ActivityLabel. Standing has no periodic component.
  std::array<ActivityWaveform, 4> waveforms = {{
      {1.8, 0.25, 0.50, 0.35},   // walking
      {1.4, 0.20, 0.50, 0.30},   // upstairs
      {0.0, 0.00, 0.50, 0.00},   // standing
      {2.8, 0.60, 0.50, 0.60},   // jogging
  }};
  // Source (body-worn) oscillation amplitude relative to the earable.
  double source_amplitude_multiplier = 2.0;
  std::size_t harmonics = 2;
  double harmonic_decay = 0.5;
  double noise_sigma = 0.02;
  double standing_noise_sigma = 0.01;
  double jitter = 0.05;  // relative spread of per-window frequency and amplitude
  double band_low_hz = 6.0;
  double band_high_hz = 10.0;
  std::size_t interference_tones = 3;
  // Peak interference per HeadMovement code, in g on the acceleration
  // channel, split across interference_tones tones; the gyro channel
  // receives gyro_interference_ratio times that in rad/s.
  std::array<double, 6> interference_amplitude = {0.03, 0.08, 0.12, 0.12, 0.12, 0.0};
  double gyro_interference_ratio = 2.5;
  // When false the target is generated exactly like the source (no shift).
  bool domain_shift = true;

  void validate() const;  // throws ConfigError
};

struct SynthPack {
  std::vector<LabeledWindow> source;
  std::vector<LabeledWindow> target;
};

// Deterministic per seed. Target windows cycle through the five head
// movement conditions within each class.
SynthPack synth_generate(const SynthConfig& config, std::uint64_t seed);

// Lays windows end to end as a 3-axis canonical recording (magnitudes placed
// on a fixed unit direction, acceleration in g).
signal::RawRecording windows_to_recording(std::span<const LabeledWindow> windows, double rate_hz,
                                          SensorLocation location);

// --- window files ------------------------------------------------------------

struct WindowFileInfo {
  bool filtered = false;
};

// Binary tensor file: shape header (count, rows, cols), row-major values,
// then parallel label / domain / head columns and origins.
void save_windows(std::span<const LabeledWindow> windows, const std::filesystem::path& path,
                  WindowFileInfo info = {});
std::vector<LabeledWindow> load_windows(const std::filesystem::path& path,
                                        WindowFileInfo* info = nullptr);

}  // namespace earda::datasets
