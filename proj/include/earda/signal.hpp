#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "earda/labels.hpp"

namespace earda::signal {

inline constexpr double kStandardGravity = 9.80665;  // m/s^2

struct Axes3 {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> z;

  std::size_t size() const { return x.size(); }
};

// Timestamped 6-axis inertial stream. Annotation vectors are either empty
// (not annotated) or one entry per sample; a disengaged activity means the
// sample carries an out-of-scope activity.
struct RawRecording {
  std::vector<double> timestamps;  // seconds, non-decreasing
  Axes3 accel;
  AccelUnit accel_unit = AccelUnit::MetersPerSecond2;
  Axes3 gyro;  // rad/s
  double rate_hz = 0.0;
  SensorLocation location = SensorLocation::Pocket;
  std::vector<std::optional<ActivityLabel>> activity;
  std::vector<HeadMovement> head_movement;

  std::size_t size() const { return timestamps.size(); }

  // Throws DataError / LengthError when an invariant is violated.
  void validate() const;
};

struct FilterSpec {
  double cutoff_hz = 5.0;
  int order = 4;
  bool zero_phase = true;

  // Throws SpecError unless 0 < cutoff < rate/2 and order >= 1.
  void validate(double rate_hz) const;
};

struct Spectrum {
  std::vector<double> freqs;       // Hz, ascending from 0 to rate/2
  std::vector<double> magnitudes;  // single-sided amplitude
};

// Second-order section in transposed direct form II, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Maximally-flat low-pass design (bilinear transform with prewarping) as a
// cascade of sections, each with unity DC gain. Odd orders end with a
// first-order section (b2 = a2 = 0).
std::vector<Biquad> butterworth_lowpass(const FilterSpec& spec, double rate_hz);

std::vector<double> magnitude(std::span<const double> x, std::span<const double> y,
                              std::span<const double> z);
std::vector<double> magnitude(const Axes3& axes);

// Converts an acceleration magnitude series to multiples of g.
std::vector<double> normalize_gravity(std::span<const double> accel, AccelUnit unit);

// Single-pass causal filtering through the cascade, starting from the
// steady state that corresponds to the first sample.
std::vector<double> sos_filter(std::span<const double> series, std::span<const Biquad> sections);

// Low-pass filter. zero_phase applies the cascade forward and backward over
// an odd-reflected padding of 3*order samples on each end. Requires
// series.size() > 3*order.
std::vector<double> low_pass(std::span<const double> series, const FilterSpec& spec,
                             double rate_hz);

// Uniform-rate resampling to floor(len * to / from) samples. Down-sampling
// first applies a zero-phase order-4 low-pass at 0.45 * to_hz; samples are
// then interpolated with a Catmull-Rom cubic.
std::vector<double> resample(std::span<const double> series, double from_hz, double to_hz);

// Resampling of an irregularly timestamped series onto the uniform grid
// t0 + k / to_hz covering [t0, t_last]. Linear interpolation; the anti-alias
// filter runs at the series' mean rate when it exceeds to_hz.
std::vector<double> resample_on_grid(std::span<const double> timestamps,
                                     std::span<const double> series, double to_hz);

// One non-overlapping window cut from a 2-channel series.
struct WindowPayload {
  std::size_t begin = 0;
  std::vector<double> values;  // length x 2, row-major (accel, gyro)
  // Set when every sample carries the same in-scope activity.
  std::optional<ActivityLabel> activity;
  HeadMovement head = HeadMovement::None;  // majority over the window
};

// Cuts floor(n / length) windows; the trailing remainder is dropped.
// Annotation spans may be empty.
std::vector<WindowPayload> window(std::span<const double> accel, std::span<const double> gyro,
                                  std::size_t length,
                                  std::span<const std::optional<ActivityLabel>> activity = {},
                                  std::span<const HeadMovement> head = {});

// Amplitude spectrum of the mean-removed series. Requires at least 8
// samples; returns n/2 + 1 bins.
Spectrum spectrum(std::span<const double> series, double rate_hz);

}  // namespace earda::signal
