// Synthetic source/target window generator. Each window is a gait-like
// periodic magnitude signal (fundamental plus decaying harmonics plus noise).
// Source windows move with a larger amplitude and rotation rate than the
// target, and target windows carry band-limited head-movement interference whose
// strength depends on their HeadMovement condition.

#include <cmath>
#include <numbers>

#include "earda/datasets.hpp"
#include "earda/errors.hpp"
#include "earda/rng.hpp"

namespace earda::datasets {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Tone {
  double freq;
  double amp;
  double phase;
};

std::vector<Tone> interference_tones(const SynthConfig& c, double total_amp, Rng& rng) {
  std::vector<Tone> tones;
  if (total_amp <= 0.0) return tones;
  const double per_tone = total_amp / static_cast<double>(c.interference_tones);
  for (std::size_t k = 0; k < c.interference_tones; ++k)
    tones.push_back({rng.uniform(c.band_low_hz, c.band_high_hz), per_tone * rng.uniform(0.5, 1.0),
                     rng.uniform(0.0, kTwoPi)});
  return tones;
}

double eval_tones(const std::vector<Tone>& tones, double t) {
  double v = 0.0;
  for (const auto& tone : tones) v += tone.amp * std::sin(kTwoPi * tone.freq * t + tone.phase);
  return v;
}

LabeledWindow generate_window(const SynthConfig& c, ActivityLabel activity, DomainTag domain,
                              HeadMovement head, Rng& rng) {
  const auto& wave = c.waveforms[static_cast<std::size_t>(to_index(activity))];
  const bool shifted_source = domain == DomainTag::Source || !c.domain_shift;
  const double scale = shifted_source ? c.source_amplitude_multiplier : 1.0;
  const auto n = static_cast<Eigen::Index>(c.window_length);
  Eigen::MatrixXd data(n, 2);

  const bool periodic = wave.fundamental_hz > 0.0;
  const double freq = wave.fundamental_hz * (1.0 + c.jitter * rng.uniform(-1.0, 1.0));
  const double acc_amp = scale * wave.accel_amplitude * (1.0 + c.jitter * rng.uniform(-1.0, 1.0));
  const double gyr_amp = scale * wave.gyro_amplitude * (1.0 + c.jitter * rng.uniform(-1.0, 1.0));
  std::vector<double> acc_phase(c.harmonics + 1), gyr_phase(c.harmonics + 1);
  for (std::size_t h = 0; h <= c.harmonics; ++h) {
    acc_phase[h] = rng.uniform(0.0, kTwoPi);
    gyr_phase[h] = rng.uniform(0.0, kTwoPi);
  }

  const bool interfered = domain == DomainTag::Target && c.domain_shift;
  const double interference = interfered ? c.interference_amplitude[static_cast<std::size_t>(
                                               to_index(head))]
                                         : 0.0;
  const auto acc_tones = interference_tones(c, interference, rng);
  const auto gyr_tones = interference_tones(c, c.gyro_interference_ratio * interference, rng);
  const double sigma = periodic ? c.noise_sigma : c.standing_noise_sigma;

  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / c.rate_hz;
    double acc = 1.0;
    double gyr = wave.gyro_baseline;
    if (periodic) {
      double weight = 1.0;
      for (std::size_t h = 0; h <= c.harmonics; ++h) {
        const double arg = kTwoPi * static_cast<double>(h + 1) * freq * t;
        acc += acc_amp * weight * std::sin(arg + acc_phase[h]);
        gyr += gyr_amp * weight * std::sin(arg + gyr_phase[h]);
        weight *= c.harmonic_decay;
      }
    }
    acc += eval_tones(acc_tones, t) + sigma * rng.normal();
    gyr += eval_tones(gyr_tones, t) + sigma * rng.normal();
    data(i, 0) = std::max(acc, 0.0);
    data(i, 1) = gyr;
  }
  return make_window(std::move(data), activity, domain, head,
                     domain == DomainTag::Source ? "synth-source" : "synth-target");
}

}  // namespace

void SynthConfig::validate() const {
  const double nyquist = rate_hz / 2.0;
  if (!(rate_hz > 0.0)) throw ConfigError("synth rate must be positive");
  if (window_length == 0) throw ConfigError("synth window length must be positive");
  if (!(band_low_hz > 0.0) || !(band_high_hz > band_low_hz))
    throw ConfigError("interference band must satisfy 0 < low < high");
  if (band_high_hz >= nyquist)
    throw ConfigError("interference band upper edge " + std::to_string(band_high_hz) +
                      " Hz is not below Nyquist (" + std::to_string(nyquist) + " Hz)");
  if (interference_tones == 0) throw ConfigError("at least one interference tone is required");
  if (!(source_amplitude_multiplier > 0.0))
    throw ConfigError("source amplitude multiplier must be positive");
  if (noise_sigma < 0.0 || standing_noise_sigma < 0.0 || jitter < 0.0 || jitter >= 1.0)
    throw ConfigError("noise and jitter settings out of range");
  for (const auto& w : waveforms) {
    const double top = w.fundamental_hz * static_cast<double>(harmonics + 1);
    if (w.fundamental_hz < 0.0 || top * (1.0 + jitter) >= nyquist)
      throw ConfigError("activity waveform harmonics reach Nyquist");
  }
  for (double a : interference_amplitude)
    if (a < 0.0) throw ConfigError("interference amplitudes must be non-negative");
}

SynthPack synth_generate(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  SynthPack pack;
  for (auto domain : {DomainTag::Source, DomainTag::Target}) {
    auto& out = domain == DomainTag::Source ? pack.source : pack.target;
    for (auto activity : kAllActivities) {
      Rng rng(derive_seed(seed, 16 * static_cast<std::uint64_t>(to_index(domain)) +
                                    static_cast<std::uint64_t>(to_index(activity))));
      for (std::size_t i = 0; i < config.per_class; ++i) {
        const auto head = domain == DomainTag::Source ? HeadMovement::None
                                                      : kHeadConditions[i % kHeadConditions.size()];
        out.push_back(generate_window(config, activity, domain, head, rng));
      }
    }
  }
  return pack;
}

signal::RawRecording windows_to_recording(std::span<const LabeledWindow> windows, double rate_hz,
                                          SensorLocation location) {
  // Fixed unit directions; the magnitude of each axis triple recovers the
  // channel value exactly (up to rounding) for non-negative channels.
  constexpr double kAccDir[3] = {0.6, 0.0, 0.8};
  constexpr double kGyrDir[3] = {0.0, 0.8, 0.6};
  signal::RawRecording rec;
  rec.accel_unit = AccelUnit::G;
  rec.location = location;
  rec.rate_hz = rate_hz;
  std::size_t k = 0;
  for (const auto& w : windows) {
    for (Eigen::Index i = 0; i < w.data.rows(); ++i, ++k) {
      rec.timestamps.push_back(static_cast<double>(k) / rate_hz);
      const double a = w.data(i, 0);
      const double g = w.data(i, 1);
      rec.accel.x.push_back(a * kAccDir[0]);
      rec.accel.y.push_back(a * kAccDir[1]);
      rec.accel.z.push_back(a * kAccDir[2]);
      rec.gyro.x.push_back(g * kGyrDir[0]);
      rec.gyro.y.push_back(g * kGyrDir[1]);
      rec.gyro.z.push_back(g * kGyrDir[2]);
      rec.activity.push_back(w.label);
      rec.head_movement.push_back(w.head);
    }
  }
  return rec;
}

}  // namespace earda::datasets
