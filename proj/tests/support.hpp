#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "earda/datasets.hpp"
#include "earda/nn.hpp"
#include "earda/rng.hpp"

namespace earda::test {

inline std::vector<double> sine(double f, double rate, std::size_t n, double phase = 0.0,
                                double amplitude = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amplitude * std::sin(2 * std::numbers::pi * f * static_cast<double>(i) / rate + phase);
  return x;
}

// Amplitude of the f Hz component over y[begin, begin + count), by projection
// onto sin and cos. count should span whole periods.
inline double tone_amplitude(const std::vector<double>& y, double f, double rate, std::size_t begin,
                             std::size_t count) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = begin; i < begin + count; ++i) {
    const double ph = 2 * std::numbers::pi * f * static_cast<double>(i) / rate;
    s += y[i] * std::sin(ph);
    c += y[i] * std::cos(ph);
  }
  return 2.0 * std::hypot(s, c) / static_cast<double>(count);
}

// |H|^2 of an order-n digital low-pass designed by the prewarped bilinear
// transform; a forward-backward pass applies it once per direction.
inline double analytic_zero_phase_gain(double f, double cutoff, int order, double rate) {
  const double r = std::tan(std::numbers::pi * f / rate) / std::tan(std::numbers::pi * cutoff / rate);
  return 1.0 / (1.0 + std::pow(r, 2 * order));
}

inline Eigen::MatrixXd random_window(Rng& rng, int rows, int cols, double scale = 1.0) {
  Eigen::MatrixXd w(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = scale * rng.uniform(-1.0, 1.0);
  return w;
}

inline nn::ModelParams random_params(const nn::Architecture& arch, Rng& rng, double scale) {
  auto p = nn::init_params(arch, rng.next());
  nn::for_each_tensor(
      [&](const std::string&, auto& t) {
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = scale * rng.uniform(-1.0, 1.0);
      },
      p);
  return p;
}

// Balanced toy windows: one label-specific level and tone per class.
inline std::vector<datasets::LabeledWindow> toy_windows(std::size_t per_class, DomainTag domain,
                                                        std::uint64_t seed) {
  Rng rng(seed);
  std::vector<datasets::LabeledWindow> out;
  for (int c = 0; c < kNumActivities; ++c) {
    for (std::size_t k = 0; k < per_class; ++k) {
      Eigen::MatrixXd d(static_cast<Eigen::Index>(datasets::kWindowLength), 2);
      for (Eigen::Index t = 0; t < d.rows(); ++t) {
        d(t, 0) = 1.0 + 0.2 * c + 0.05 * rng.normal();
        d(t, 1) = 0.1 * c + 0.1 * std::sin(0.3 * (c + 1) * static_cast<double>(t)) + 0.02 * rng.normal();
        d(t, 1) = std::abs(d(t, 1));
      }
      const auto head = domain == DomainTag::Target ? kHeadConditions[k % kHeadConditions.size()]
                                                    : HeadMovement::None;
      out.push_back(datasets::make_window(std::move(d), activity_from_index(c), domain, head, "toy"));
    }
  }
  return out;
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("earda-test-" + name);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& rel) const { return path / rel; }
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace earda::test
