#include <doctest.h>

#include <cmath>

#include "earda/errors.hpp"
#include "earda/nn.hpp"
#include "earda/optimizer.hpp"
#include "support.hpp"

using namespace earda;
using namespace earda::nn;
using earda::test::random_params;
using earda::test::random_window;

namespace {

Architecture small_arch() {
  Architecture a;
  a.hidden = 4;
  a.head_width = 8;
  return a;
}

// Swaps the two directions of every layer; deeper layers also see their
// input halves ([fwd ; bwd]) exchanged.
RecurrentParams swap_directions(const RecurrentParams& p) {
  RecurrentParams out = p;
  const int h = p.hidden();
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    std::swap(out.layers[l][0], out.layers[l][1]);
    if (l == 0) continue;
    for (auto& cell : out.layers[l]) {
      Matrix w = cell.w_input;
      cell.w_input.leftCols(h) = w.rightCols(h);
      cell.w_input.rightCols(h) = w.leftCols(h);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("init_params shapes and forget bias") {
  const Architecture arch;
  const auto p = init_params(arch, 1);
  REQUIRE(p.feature.layers.size() == 2);
  CHECK(p.feature.layers[0][0].w_input.rows() == 64);
  CHECK(p.feature.layers[0][0].w_input.cols() == 2);
  CHECK(p.feature.layers[1][1].w_input.cols() == 32);
  CHECK(p.label.w_hidden.rows() == 32);
  CHECK(p.label.output_dim() == 4);
  CHECK(p.domain.output_dim() == 2);
  for (const auto& layer : p.feature.layers)
    for (const auto& cell : layer) {
      CHECK((cell.gate_bias(Gate::Forget).array() == 1.0).all());
      CHECK((cell.gate_bias(Gate::Input).array() == 0.0).all());
      const double limit = std::sqrt(6.0 / (cell.w_input.cols() + cell.hidden()));
      CHECK(cell.w_input.cwiseAbs().maxCoeff() <= limit);
    }
  CHECK(architecture_of(p).hidden == 16);
  const auto q = init_params(arch, 1);
  CHECK(q.feature.layers[1][0].w_hidden == p.feature.layers[1][0].w_hidden);
  CHECK(init_params(arch, 2).label.w_out != p.label.w_out);
}

TEST_CASE("feature_forward rejects bad shapes") {
  const auto p = init_params(small_arch(), 0);
  CHECK_THROWS_AS(feature_forward(Matrix::Zero(10, 3), p.feature), ShapeError);
  CHECK_THROWS_AS(feature_forward(Matrix::Zero(0, 2), p.feature), ShapeError);
}

TEST_CASE("feature_forward is pure per sample") {
  Rng rng(8);
  const auto p = random_params(small_arch(), rng, 0.5);
  const Matrix a = random_window(rng, 20, 2);
  const Matrix b = random_window(rng, 20, 2);
  const Vector fa = feature_forward(a, p.feature);
  feature_forward(b, p.feature);
  CHECK(feature_forward(a, p.feature) == fa);

  std::vector<Matrix> windows{a, b};
  std::vector<Sample> both{{windows[0], 1, 0, true}, {windows[1], 2, 1, true}};
  std::vector<Sample> first{{windows[0], 1, 0, true}};
  const auto g_both = backprop_batch(both, p, {});
  const auto g_first = backprop_batch(first, p, {});
  CHECK(std::isfinite(g_both.loss.total));
  CHECK(g_first.loss.count == 1);
}

TEST_CASE("reversed window swaps the directional features") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_params(small_arch(), rng, 0.8);
    const Matrix w = random_window(rng, 12, 2);
    const Matrix rev = w.colwise().reverse();
    const Vector f = feature_forward(w, p.feature);
    const Vector g = feature_forward(rev, swap_directions(p.feature));
    const int h = p.feature.hidden();
    CHECK((f.head(h) - g.tail(h)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((f.tail(h) - g.head(h)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("outputs stay finite for bounded parameters") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_params(small_arch(), rng, 10.0);
    std::vector<Matrix> windows;
    for (int i = 0; i < 4; ++i) windows.push_back(random_window(rng, 15, 2, 10.0));
    std::vector<Sample> batch;
    for (int i = 0; i < 4; ++i) batch.push_back({windows[static_cast<std::size_t>(i)], i, i % 2, true});
    const auto g = backprop_batch(batch, p, {});
    CHECK(std::isfinite(g.loss.total));
    bool finite = true;
    for_each_tensor([&](const std::string&, const auto& t) { finite = finite && t.allFinite(); }, g.grads);
    CHECK(finite);
  }
}

TEST_CASE("softmax_ce gradient matches finite differences") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    Vector logits(4);
    for (int i = 0; i < 4; ++i) logits[i] = rng.uniform(-5, 5);
    const int truth = static_cast<int>(rng.index(4));
    const auto ce = softmax_ce(logits, truth);
    for (int i = 0; i < 4; ++i) {
      const double eps = 1e-6;
      Vector up = logits, dn = logits;
      up[i] += eps;
      dn[i] -= eps;
      const double fd = (softmax_ce(up, truth).loss - softmax_ce(dn, truth).loss) / (2 * eps);
      CHECK(std::abs(fd - ce.grad[i]) <= 1e-8);
    }
  }
  CHECK_THROWS_AS(softmax_ce(Vector::Zero(4), 4), IndexError);
  CHECK_THROWS_AS(softmax_ce(Vector::Zero(4), -1), IndexError);
  const Vector big = (Vector(3) << 1000.0, 0.0, -1000.0).finished();
  CHECK(std::isfinite(softmax_ce(big, 2).loss));
}

TEST_CASE("gradient reversal") {
  const Vector x = (Vector(3) << 1.5, -2.0, 0.25).finished();
  CHECK(grl_forward(x) == x);
  const Vector g = grl_backward(x, 0.3);
  for (int i = 0; i < 3; ++i) CHECK(g[i] == -0.3 * x[i]);
}

TEST_CASE("all-zero model loss values") {
  auto p = init_params(Architecture{}, 0);
  for_each_tensor([](const std::string&, auto& t) { t.setZero(); }, p);
  const Matrix w = Matrix::Constant(100, 2, 0.7);
  std::vector<Sample> batch{{w, 0, 0, true}, {w, 3, 1, true}};
  const auto loss = batch_loss(batch, p, 0.3);
  CHECK(loss.label == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(loss.domain == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(loss.total - 1.178350) <= 1e-6);
}

TEST_CASE("backprop_batch loss equals batch_loss and honours masks") {
  Rng rng(13);
  const auto p = random_params(small_arch(), rng, 0.5);
  std::vector<Matrix> windows;
  for (int i = 0; i < 6; ++i) windows.push_back(random_window(rng, 10, 2));
  std::vector<Sample> batch;
  for (int i = 0; i < 6; ++i)
    batch.push_back({windows[static_cast<std::size_t>(i)], i % 4, i < 3 ? 0 : 1, i < 4});
  const auto g = backprop_batch(batch, p, {0.3, true, 1});
  const auto l = batch_loss(batch, p, 0.3);
  CHECK(g.loss.labeled == 4);
  CHECK(g.loss.count == 6);
  CHECK(std::abs(g.loss.total - l.total) <= 1e-12);
  CHECK(std::abs(g.loss.total - (g.loss.label - 0.3 * g.loss.domain)) <= 1e-12);

  const auto off = backprop_batch(batch, p, {0.3, false, 1});
  CHECK(off.loss.total == off.loss.label);
  CHECK(off.grads.domain.w_out.isZero(0.0));
  CHECK_THROWS_AS(backprop_batch(std::span<const Sample>{}, p, {}), ArgumentError);
}

TEST_CASE("gradients do not depend on the thread count") {
  Rng rng(17);
  const auto p = random_params(small_arch(), rng, 0.5);
  std::vector<Matrix> windows;
  for (int i = 0; i < 9; ++i) windows.push_back(random_window(rng, 10, 2));
  std::vector<Sample> batch;
  for (int i = 0; i < 9; ++i) batch.push_back({windows[static_cast<std::size_t>(i)], i % 4, i % 2, true});
  const auto one = backprop_batch(batch, p, {0.3, true, 1});
  for (unsigned threads : {2u, 3u, 8u}) {
    const auto many = backprop_batch(batch, p, {0.3, true, threads});
    CHECK(many.loss.total == one.loss.total);
    bool same = true;
    for_each_tensor([&](const std::string&, const auto& a, const auto& b) { same = same && a == b; },
                    one.grads, many.grads);
    CHECK(same);
  }
}

TEST_CASE("grad_check on a reduced model") {
  for (std::uint64_t seed : {1u, 2u}) {
    Rng rng(seed);
    const auto p = init_params(small_arch(), seed);
    std::vector<Matrix> windows;
    for (int i = 0; i < 4; ++i) windows.push_back(random_window(rng, 10, 2));
    std::vector<Sample> batch;
    for (int i = 0; i < 4; ++i) batch.push_back({windows[static_cast<std::size_t>(i)], i, i % 2, true});
    for (double lambda : {0.0, 0.3}) {
      const auto r = grad_check(p, batch, lambda);
      CAPTURE(r.worst_tensor);
      CHECK(r.max_rel_error <= 1e-4);
      CHECK(r.checked == parameter_count(p));
    }
  }
}

TEST_CASE("grad_check catches a corrupted gradient") {
  Rng rng(3);
  const auto p = init_params(small_arch(), 3);
  std::vector<Matrix> windows{random_window(rng, 10, 2), random_window(rng, 10, 2)};
  std::vector<Sample> batch{{windows[0], 1, 0, true}, {windows[1], 2, 1, true}};
  GradCheckOptions opt;
  opt.tamper = [](ModelParams& g) { g.feature.layers[1][1].w_hidden(2, 1) += 1e-2; };
  const auto r = grad_check(p, batch, 0.3, opt);
  CHECK(r.max_rel_error > 1e-3);
  CHECK(r.worst_tensor == "feature.l1.bwd.w_hidden");
  // Flipping the reversal sign on the feature extractor is also caught.
  opt.tamper = [&](ModelParams& g) {
    const auto plain = backprop_batch(batch, p, {0.0, true, 1}).grads;
    for_each_tensor(
        [](const std::string& name, auto& gt, const auto& pt) {
          if (name.starts_with("feature.")) gt = 2 * pt - gt;
        },
        g, plain);
  };
  CHECK(grad_check(p, batch, 0.3, opt).max_rel_error > 1e-3);
  CHECK_THROWS_AS(grad_check(p, batch, 0.3, {.eps = 1e-2}), ArgumentError);
}

TEST_CASE("adam matches a hand-computed update") {
  std::vector<double> w{1.0, -2.0};
  const std::vector<double> g{0.5, -0.1};
  std::vector<double> m(2, 0.0), v(2, 0.0);
  const AdamConfig cfg;
  adam_update(w, g, m, v, 1, cfg);
  for (int i = 0; i < 2; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double mh = (0.1 * g[k]) / (1 - 0.9);
    const double vh = (0.001 * g[k] * g[k]) / (1 - 0.999);
    const double start = i == 0 ? 1.0 : -2.0;
    CHECK(w[k] == doctest::Approx(start - 1e-3 * mh / (std::sqrt(vh) + 1e-8)).epsilon(1e-14));
  }
  // Second step with the same gradient.
  const double m2 = 0.9 * 0.05 + 0.1 * 0.5, v2 = 0.999 * 0.00025 + 0.001 * 0.25;
  const double expected = w[0] - 1e-3 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
  adam_update(w, g, m, v, 2, cfg);
  CHECK(w[0] == doctest::Approx(expected).epsilon(1e-14));
  std::vector<double> short_m(1);
  CHECK_THROWS_AS(adam_update(w, g, short_m, v, 3, cfg), ShapeError);
}

TEST_CASE("adam_step walks every tensor") {
  auto p = init_params(small_arch(), 5);
  const auto before = p;
  auto grads = zeros_like(p);
  for_each_tensor([](const std::string&, auto& t) { t.setConstant(1.0); }, grads);
  auto state = make_optimizer(p);
  adam_step(p, grads, state);
  CHECK(state.step == 1);
  bool moved = true;
  for_each_tensor(
      [&](const std::string&, const auto& a, const auto& b) {
        moved = moved && ((b.array() - a.array()).abs() - 1e-3).abs().maxCoeff() < 1e-9;
      },
      p, before);
  CHECK(moved);
}
