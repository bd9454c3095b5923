#include "earda/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "earda/errors.hpp"

namespace earda::signal {

namespace {

constexpr int kAntiAliasOrder = 4;
constexpr double kAntiAliasFraction = 0.45;

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw LengthError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                      std::to_string(b) + ")");
}

// Section state that reproduces the response to a constant unit input.
struct SectionState {
  double s1 = 0.0;
  double s2 = 0.0;
};

double section_dc_gain(const Biquad& q) {
  return (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
}

SectionState steady_state(const Biquad& q) {
  const double g = section_dc_gain(q);
  SectionState s;
  s.s2 = q.b2 - q.a2 * g;
  s.s1 = q.b1 - q.a1 * g + s.s2;
  return s;
}

// Point reflection about the end samples, as used for zero-phase padding.
std::vector<double> odd_extend(std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);
  return ext;
}

std::vector<double> zero_phase(std::span<const double> series, std::span<const Biquad> sections,
                               std::size_t pad) {
  auto ext = odd_extend(series, pad);
  auto forward = sos_filter(ext, sections);
  std::reverse(forward.begin(), forward.end());
  auto backward = sos_filter(forward, sections);
  std::reverse(backward.begin(), backward.end());
  return {backward.begin() + static_cast<std::ptrdiff_t>(pad),
          backward.end() - static_cast<std::ptrdiff_t>(pad)};
}

// Sample accessor with point-reflected ghost samples beyond either end.
double ghost_sample(std::span<const double> x, std::ptrdiff_t i) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (n == 1) return x[0];
  if (i < 0) {
    const auto m = std::min(-i, n - 1);
    return 2.0 * x[0] - x[static_cast<std::size_t>(m)];
  }
  if (i >= n) {
    const auto m = std::max<std::ptrdiff_t>(2 * (n - 1) - i, 0);
    return 2.0 * x[static_cast<std::size_t>(n - 1)] - x[static_cast<std::size_t>(m)];
  }
  return x[static_cast<std::size_t>(i)];
}

double catmull_rom(std::span<const double> x, double pos) {
  const double base = std::floor(pos);
  const double u = pos - base;
  const auto i = static_cast<std::ptrdiff_t>(base);
  const double p0 = ghost_sample(x, i - 1);
  const double p1 = ghost_sample(x, i);
  const double p2 = ghost_sample(x, i + 1);
  const double p3 = ghost_sample(x, i + 2);
  return 0.5 * (2.0 * p1 + (p2 - p0) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                (3.0 * (p1 - p2) + p3 - p0) * u * u * u);
}

std::vector<double> anti_alias(std::span<const double> series, double rate_hz, double to_hz) {
  const FilterSpec aa{kAntiAliasFraction * to_hz, kAntiAliasOrder, true};
  if (series.size() <= 3 * static_cast<std::size_t>(aa.order) || aa.cutoff_hz >= rate_hz / 2.0)
    return {series.begin(), series.end()};
  return low_pass(series, aa, rate_hz);
}

std::size_t output_length(double samples, double ratio) {
  // Guard against 200 * 25 / 50 landing on 99.999...
  return static_cast<std::size_t>(std::floor(samples * ratio + 1e-9));
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void RawRecording::validate() const {
  const std::size_t n = timestamps.size();
  require_same_length(accel.x.size(), n, "accel.x");
  require_same_length(accel.y.size(), n, "accel.y");
  require_same_length(accel.z.size(), n, "accel.z");
  require_same_length(gyro.x.size(), n, "gyro.x");
  require_same_length(gyro.y.size(), n, "gyro.y");
  require_same_length(gyro.z.size(), n, "gyro.z");
  if (!activity.empty()) require_same_length(activity.size(), n, "activity");
  if (!head_movement.empty()) require_same_length(head_movement.size(), n, "head_movement");
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz))
    throw DataError("sampling rate must be positive, got " + std::to_string(rate_hz));
  for (std::size_t i = 1; i < n; ++i)
    if (timestamps[i] < timestamps[i - 1])
      throw DataError("timestamps decrease at row " + std::to_string(i));
}

void FilterSpec::validate(double rate_hz) const {
  if (order < 1) throw SpecError("filter order must be >= 1");
  if (!(cutoff_hz > 0.0)) throw SpecError("filter cutoff must be positive");
  if (!(cutoff_hz < rate_hz / 2.0))
    throw SpecError("filter cutoff " + std::to_string(cutoff_hz) + " Hz is not below Nyquist (" +
                    std::to_string(rate_hz / 2.0) + " Hz)");
}

std::vector<Biquad> butterworth_lowpass(const FilterSpec& spec, double rate_hz) {
  spec.validate(rate_hz);
  const double k = std::tan(std::numbers::pi * spec.cutoff_hz / rate_hz);
  const double k2 = k * k;
  std::vector<Biquad> sections;
  const int pairs = spec.order / 2;
  for (int p = 0; p < pairs; ++p) {
    // Pole pair at angle (2p+1)pi/(2n) from the negative real axis.
    const double theta = (2.0 * p + 1.0) * std::numbers::pi / (2.0 * spec.order);
    const double inv_q = 2.0 * std::cos(theta);
    const double norm = 1.0 / (1.0 + k * inv_q + k2);
    Biquad q;
    q.b0 = k2 * norm;
    q.b1 = 2.0 * q.b0;
    q.b2 = q.b0;
    q.a1 = 2.0 * (k2 - 1.0) * norm;
    q.a2 = (1.0 - k * inv_q + k2) * norm;
    sections.push_back(q);
  }
  if (spec.order % 2 == 1) {
    Biquad q;
    q.b0 = k / (1.0 + k);
    q.b1 = q.b0;
    q.a1 = (k - 1.0) / (k + 1.0);
    sections.push_back(q);
  }
  return sections;
}

std::vector<double> magnitude(std::span<const double> x, std::span<const double> y,
                              std::span<const double> z) {
  require_same_length(x.size(), y.size(), "magnitude");
  require_same_length(x.size(), z.size(), "magnitude");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
  return out;
}

std::vector<double> magnitude(const Axes3& axes) { return magnitude(axes.x, axes.y, axes.z); }

std::vector<double> normalize_gravity(std::span<const double> accel, AccelUnit unit) {
  switch (unit) {
    case AccelUnit::G:
      return {accel.begin(), accel.end()};
    case AccelUnit::MetersPerSecond2: {
      std::vector<double> out(accel.size());
      std::transform(accel.begin(), accel.end(), out.begin(),
                     [](double a) { return a / kStandardGravity; });
      return out;
    }
  }
  throw UnitError("unknown acceleration unit tag");
}

std::vector<double> sos_filter(std::span<const double> series, std::span<const Biquad> sections) {
  std::vector<double> y(series.begin(), series.end());
  if (y.empty()) return y;
  double level = y.front();
  for (const auto& q : sections) {
    const auto zi = steady_state(q);
    double s1 = zi.s1 * level;
    double s2 = zi.s2 * level;
    level *= section_dc_gain(q);
    for (double& v : y) {
      const double x = v;
      const double out = q.b0 * x + s1;
      s1 = q.b1 * x - q.a1 * out + s2;
      s2 = q.b2 * x - q.a2 * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> low_pass(std::span<const double> series, const FilterSpec& spec,
                             double rate_hz) {
  const auto sections = butterworth_lowpass(spec, rate_hz);
  if (!spec.zero_phase) return sos_filter(series, sections);
  const auto pad = 3 * static_cast<std::size_t>(spec.order);
  if (series.size() <= pad)
    throw LengthError("zero-phase filtering needs more than " + std::to_string(pad) +
                      " samples, got " + std::to_string(series.size()));
  return zero_phase(series, sections, pad);
}

std::vector<double> resample(std::span<const double> series, double from_hz, double to_hz) {
  if (!(from_hz > 0.0) || !(to_hz > 0.0)) throw SpecError("resampling rates must be positive");
  if (series.empty()) return {};
  if (from_hz == to_hz) return {series.begin(), series.end()};

  std::vector<double> source = to_hz < from_hz ? anti_alias(series, from_hz, to_hz)
                                               : std::vector<double>(series.begin(), series.end());
  const std::size_t n_out = output_length(static_cast<double>(series.size()), to_hz / from_hz);
  const double step = from_hz / to_hz;
  std::vector<double> out(n_out);
  for (std::size_t k = 0; k < n_out; ++k) out[k] = catmull_rom(source, static_cast<double>(k) * step);
  return out;
}

std::vector<double> resample_on_grid(std::span<const double> timestamps,
                                     std::span<const double> series, double to_hz) {
  require_same_length(timestamps.size(), series.size(), "resample_on_grid");
  if (!(to_hz > 0.0)) throw SpecError("resampling rate must be positive");
  const std::size_t n = series.size();
  if (n == 0) return {};
  if (n == 1) return {series[0]};
  const double t0 = timestamps.front();
  const double span_s = timestamps.back() - t0;
  if (!(span_s > 0.0)) return {series[0]};
  const double mean_rate = static_cast<double>(n - 1) / span_s;
  const double duration = span_s + 1.0 / mean_rate;

  std::vector<double> source = mean_rate > to_hz
                                   ? anti_alias(series, mean_rate, to_hz)
                                   : std::vector<double>(series.begin(), series.end());

  const std::size_t n_out = output_length(duration, to_hz);
  std::vector<double> out(n_out);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n_out; ++k) {
    const double t = t0 + static_cast<double>(k) / to_hz;
    while (j + 1 < n && timestamps[j + 1] <= t) ++j;
    if (j + 1 >= n) {
      out[k] = source[n - 1];
      continue;
    }
    const double dt = timestamps[j + 1] - timestamps[j];
    const double u = dt > 0.0 ? (t - timestamps[j]) / dt : 0.0;
    out[k] = source[j] + u * (source[j + 1] - source[j]);
  }
  return out;
}

std::vector<WindowPayload> window(std::span<const double> accel, std::span<const double> gyro,
                                  std::size_t length,
                                  std::span<const std::optional<ActivityLabel>> activity,
                                  std::span<const HeadMovement> head) {
  if (length == 0) throw ArgumentError("window length must be positive");
  require_same_length(accel.size(), gyro.size(), "window channels");
  if (!activity.empty()) require_same_length(activity.size(), accel.size(), "window activity");
  if (!head.empty()) require_same_length(head.size(), accel.size(), "window head movement");

  const std::size_t count = accel.size() / length;
  std::vector<WindowPayload> out;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    WindowPayload p;
    p.begin = w * length;
    p.values.resize(2 * length);
    for (std::size_t i = 0; i < length; ++i) {
      p.values[2 * i] = accel[p.begin + i];
      p.values[2 * i + 1] = gyro[p.begin + i];
    }
    if (!activity.empty()) {
      const auto first = activity[p.begin];
      const bool unanimous =
          first.has_value() &&
          std::all_of(activity.begin() + static_cast<std::ptrdiff_t>(p.begin),
                      activity.begin() + static_cast<std::ptrdiff_t>(p.begin + length),
                      [&](const auto& a) { return a == first; });
      if (unanimous) p.activity = first;
    }
    if (!head.empty()) {
      std::array<std::size_t, kAllHeadMovements.size()> votes{};
      for (std::size_t i = 0; i < length; ++i) ++votes[static_cast<std::size_t>(head[p.begin + i])];
      const auto best = std::max_element(votes.begin(), votes.end());
      p.head = static_cast<HeadMovement>(best - votes.begin());
    }
    out.push_back(std::move(p));
  }
  return out;
}

Spectrum spectrum(std::span<const double> series, double rate_hz) {
  const std::size_t n = series.size();
  if (n < 8) throw LengthError("spectrum needs at least 8 samples, got " + std::to_string(n));
  if (!(rate_hz > 0.0)) throw SpecError("sampling rate must be positive");

  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  const std::size_t bins = n / 2 + 1;

  using RealBuf = std::unique_ptr<double, decltype(&fftw_free)>;
  using ComplexBuf = std::unique_ptr<fftw_complex, decltype(&fftw_free)>;
  RealBuf in(fftw_alloc_real(n), &fftw_free);
  ComplexBuf out(fftw_alloc_complex(bins), &fftw_free);
  for (std::size_t i = 0; i < n; ++i) in.get()[i] = series[i] - mean;

  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  Spectrum s;
  s.freqs.resize(bins);
  s.magnitudes.resize(bins);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < bins; ++k) {
    s.freqs[k] = static_cast<double>(k) * rate_hz * scale;
    const double abs = std::hypot(out.get()[k][0], out.get()[k][1]) * scale;
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    s.magnitudes[k] = unpaired ? abs : 2.0 * abs;
  }
  return s;
}

}  // namespace earda::signal
