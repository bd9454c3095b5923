#include <algorithm>
#include <cmath>
#include <numeric>

#include "earda/datasets.hpp"
#include "earda/errors.hpp"
#include "earda/rng.hpp"

namespace earda::datasets {

using signal::RawRecording;

void validate(const LabeledWindow& w) {
  if (w.data.rows() != static_cast<Eigen::Index>(kWindowLength) ||
      w.data.cols() != static_cast<Eigen::Index>(kWindowChannels))
    throw ShapeError("window must be " + std::to_string(kWindowLength) + "x" +
                     std::to_string(kWindowChannels) + ", got " + std::to_string(w.data.rows()) +
                     "x" + std::to_string(w.data.cols()));
  if (!w.data.allFinite()) throw DataError("window contains non-finite values");
  if ((w.data.col(0).array() < 0.0).any())
    throw DataError("window acceleration magnitude is negative");
}

LabeledWindow make_window(Eigen::MatrixXd data, ActivityLabel label, DomainTag domain,
                          HeadMovement head, std::string origin) {
  LabeledWindow w{std::move(data), label, domain, head, std::move(origin)};
  validate(w);
  return w;
}

void SplitSpec::validate() const {
  if (train_frac < 0.0 || val_frac < 0.0 || test_frac < 0.0)
    throw ArgumentError("split fractions must be non-negative");
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw ArgumentError("split fractions must sum to 1");
}

namespace {

bool is_uniform(std::span<const double> t, double rate_hz) {
  const double period = 1.0 / rate_hz;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs((t[i] - t[i - 1]) - period) > 0.05 * period) return false;
  return true;
}

}  // namespace

std::vector<LabeledWindow> preprocess_recording(const RawRecording& rec,
                                                const PreprocessOptions& options) {
  rec.validate();
  signal::Axes3 accel = rec.accel;
  signal::Axes3 gyro = rec.gyro;
  if (options.filter) {
    for (auto* axis : {&accel.x, &accel.y, &accel.z, &gyro.x, &gyro.y, &gyro.z})
      *axis = signal::low_pass(*axis, *options.filter, rec.rate_hz);
  }
  const auto acc_mag = signal::normalize_gravity(signal::magnitude(accel), rec.accel_unit);
  const auto gyr_mag = signal::magnitude(gyro);

  const double to = options.target_rate_hz;
  const bool uniform = is_uniform(rec.timestamps, rec.rate_hz);
  std::vector<double> acc_rs, gyr_rs;
  if (uniform) {
    acc_rs = signal::resample(acc_mag, rec.rate_hz, to);
    gyr_rs = signal::resample(gyr_mag, rec.rate_hz, to);
  } else {
    acc_rs = signal::resample_on_grid(rec.timestamps, acc_mag, to);
    gyr_rs = signal::resample_on_grid(rec.timestamps, gyr_mag, to);
  }

  // Annotations follow the nearest source sample on the new grid.
  const std::size_t n_out = acc_rs.size();
  std::vector<std::optional<ActivityLabel>> activity;
  std::vector<HeadMovement> head;
  if (!rec.activity.empty() || !rec.head_movement.empty()) {
    const std::size_t n = rec.size();
    std::size_t j = 0;
    for (std::size_t k = 0; k < n_out; ++k) {
      std::size_t src;
      if (uniform) {
        src = std::min<std::size_t>(
            static_cast<std::size_t>(std::llround(static_cast<double>(k) * rec.rate_hz / to)),
            n - 1);
      } else {
        const double t = rec.timestamps.front() + static_cast<double>(k) / to;
        while (j + 1 < n && rec.timestamps[j + 1] <= t) ++j;
        src = (j + 1 < n && t - rec.timestamps[j] > rec.timestamps[j + 1] - t) ? j + 1 : j;
      }
      if (!rec.activity.empty()) activity.push_back(rec.activity[src]);
      if (!rec.head_movement.empty()) head.push_back(rec.head_movement[src]);
    }
  }

  for (double& v : acc_rs) v = std::max(v, 0.0);
  const auto payloads = signal::window(acc_rs, gyr_rs, options.window_length, activity, head);
  std::vector<LabeledWindow> out;
  for (const auto& p : payloads) {
    if (!p.activity) continue;
    Eigen::MatrixXd data(static_cast<Eigen::Index>(options.window_length), 2);
    for (std::size_t i = 0; i < options.window_length; ++i) {
      data(static_cast<Eigen::Index>(i), 0) = p.values[2 * i];
      data(static_cast<Eigen::Index>(i), 1) = p.values[2 * i + 1];
    }
    out.push_back(make_window(std::move(data), *p.activity, options.domain, p.head, options.origin));
  }
  return out;
}

std::vector<LabeledWindow> filter_windows(std::span<const LabeledWindow> windows,
                                          const signal::FilterSpec& spec, double rate_hz) {
  std::vector<LabeledWindow> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    LabeledWindow f = w;
    for (Eigen::Index c = 0; c < f.data.cols(); ++c) {
      const Eigen::VectorXd col = w.data.col(c);
      const auto filtered =
          signal::low_pass(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                           spec, rate_hz);
      for (Eigen::Index i = 0; i < f.data.rows(); ++i)
        f.data(i, c) = filtered[static_cast<std::size_t>(i)];
    }
    f.data.col(0) = f.data.col(0).cwiseMax(0.0);
    validate(f);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<LabeledWindow> balanced_sample(std::span<const LabeledWindow> windows,
                                           std::size_t per_class, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kNumActivities> by_class;
  for (std::size_t i = 0; i < windows.size(); ++i)
    by_class[static_cast<std::size_t>(to_index(windows[i].label))].push_back(i);

  std::vector<std::size_t> chosen;
  for (auto a : kAllActivities) {
    auto& idx = by_class[static_cast<std::size_t>(to_index(a))];
    if (idx.size() < per_class)
      throw ShortageError("class '" + std::string(to_string(a)) + "' has " +
                          std::to_string(idx.size()) + " windows, " + std::to_string(per_class) +
                          " requested");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(to_index(a))));
    rng.shuffle(std::span<std::size_t>(idx));
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  Rng order(derive_seed(seed, 100));
  order.shuffle(std::span<std::size_t>(chosen));

  std::vector<LabeledWindow> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(windows[i]);
  return out;
}

Splits split(std::span<const LabeledWindow> windows, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = windows.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(spec.seed);
  rng.shuffle(std::span<std::size_t>(idx));

  const auto n_train =
      std::min<std::size_t>(static_cast<std::size_t>(std::llround(n * spec.train_frac)), n);
  const auto n_val =
      std::min<std::size_t>(static_cast<std::size_t>(std::llround(n * spec.val_frac)), n - n_train);

  Splits s;
  for (std::size_t k = 0; k < n; ++k) {
    auto& dst = k < n_train ? s.train : (k < n_train + n_val ? s.val : s.test);
    dst.push_back(windows[idx[k]]);
  }
  return s;
}

std::array<std::size_t, kNumActivities> class_histogram(std::span<const LabeledWindow> windows) {
  std::array<std::size_t, kNumActivities> h{};
  for (const auto& w : windows) ++h[static_cast<std::size_t>(to_index(w.label))];
  return h;
}

}  // namespace earda::datasets
