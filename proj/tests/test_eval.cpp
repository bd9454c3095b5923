#include <doctest.h>

#include <algorithm>

#include "earda/errors.hpp"
#include "earda/eval.hpp"
#include "support.hpp"

using namespace earda;
using namespace earda::eval;

namespace {

struct Draw {
  std::vector<ActivityLabel> truths, predictions;
  std::vector<HeadMovement> groups;
};

Draw random_draw(Rng& rng) {
  Draw d;
  const auto n = 1 + rng.index(300);
  // Skewed class mix so some draws leave classes empty.
  const auto classes = 1 + rng.index(4);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto t = activity_from_index(static_cast<int>(rng.index(classes)));
    const auto p = rng.uniform() < 0.6 ? t : activity_from_index(static_cast<int>(rng.index(4)));
    d.truths.push_back(t);
    d.predictions.push_back(p);
    d.groups.push_back(kHeadConditions[rng.index(kHeadConditions.size())]);
  }
  return d;
}

}  // namespace

TEST_CASE("metric algebra on random confusion matrices") {
  Rng rng(2024);
  for (int draw = 0; draw < 1000; ++draw) {
    const auto d = random_draw(rng);
    const auto r = report(d.truths, d.predictions, std::span<const HeadMovement>(d.groups));
    const auto& cm = r.overall.confusion;
    REQUIRE(cm.total() == d.truths.size());
    CHECK(r.overall.accuracy == static_cast<double>(cm.trace()) / static_cast<double>(cm.total()));
    for (int c = 0; c < kNumActivities; ++c) {
      const auto& k = r.overall.classes[static_cast<std::size_t>(c)];
      const auto denom = cm.row_sum(c) + cm.col_sum(c);
      const double expected = denom ? 2.0 * static_cast<double>(cm.counts[c][c]) / static_cast<double>(denom) : 0.0;
      CHECK(k.f1 == expected);
      CHECK(k.degenerate == (cm.row_sum(c) == 0));
    }
    double weighted = 0.0;
    std::uint64_t count = 0;
    for (const auto& [head, m] : r.groups) {
      weighted += m.accuracy * static_cast<double>(m.confusion.total());
      count += m.confusion.total();
    }
    CHECK(count == cm.total());
    CHECK(std::abs(weighted / static_cast<double>(count) - r.overall.accuracy) <= 1e-12);
  }
}

TEST_CASE("report is permutation invariant") {
  Rng rng(7);
  for (int draw = 0; draw < 50; ++draw) {
    auto d = random_draw(rng);
    const auto before = to_json(report(d.truths, d.predictions, std::span<const HeadMovement>(d.groups))).dump();
    std::vector<std::size_t> order(d.truths.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span(order));
    Draw p;
    for (auto i : order) {
      p.truths.push_back(d.truths[i]);
      p.predictions.push_back(d.predictions[i]);
      p.groups.push_back(d.groups[i]);
    }
    CHECK(to_json(report(p.truths, p.predictions, std::span<const HeadMovement>(p.groups))).dump() == before);
  }
}

TEST_CASE("metrics on a hand-checked matrix") {
  using A = ActivityLabel;
  const std::vector<A> t{A::Walking, A::Walking, A::Walking, A::Upstairs, A::Jogging, A::Jogging};
  const std::vector<A> p{A::Walking, A::Walking, A::Upstairs, A::Upstairs, A::Jogging, A::Walking};
  const auto m = report(t, p).overall;
  CHECK(m.accuracy == doctest::Approx(4.0 / 6.0));
  const auto& walk = m.classes[0];
  CHECK(walk.recall == doctest::Approx(2.0 / 3.0));
  CHECK(walk.precision == doctest::Approx(2.0 / 3.0));
  CHECK(walk.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(m.classes[1].f1 == doctest::Approx(2.0 / 3.0));
  CHECK(m.classes[2].degenerate);
  CHECK(m.classes[2].f1 == 0.0);
  CHECK(m.classes[3].f1 == doctest::Approx(2.0 / 3.0));
  CHECK(m.macro_f1 == doctest::Approx(0.5));
}

TEST_CASE("report argument errors") {
  const std::vector<ActivityLabel> a{ActivityLabel::Walking};
  const std::vector<ActivityLabel> b{ActivityLabel::Walking, ActivityLabel::Jogging};
  CHECK_THROWS_AS(report(a, b), ArgumentError);
  CHECK_THROWS_AS(report({}, {}), ArgumentError);
  const std::vector<HeadMovement> g{HeadMovement::Yaw, HeadMovement::Roll};
  CHECK_THROWS_AS(report(a, a, std::span<const HeadMovement>(g)), ArgumentError);
}

TEST_CASE("table and json layout") {
  using A = ActivityLabel;
  const std::vector<A> t{A::Walking, A::Jogging, A::Standing};
  const std::vector<A> p{A::Walking, A::Jogging, A::Walking};
  const std::vector<HeadMovement> g{HeadMovement::Yaw, HeadMovement::Yaw, HeadMovement::Pitch};
  const auto r = report(t, p, std::span<const HeadMovement>(g));
  REQUIRE(r.groups.size() == 2);
  CHECK(r.groups[0].first == HeadMovement::Yaw);
  const auto table = format_table(r);
  CHECK(table.find("yaw") != std::string::npos);
  CHECK(table.find("pitch") != std::string::npos);
  CHECK(table.find("overall") != std::string::npos);
  CHECK(table.find("upstairs") != std::string::npos);
  const auto j = to_json(r);
  CHECK(j["format_version"] == 1);
  CHECK(j["overall"]["count"] == 3);
  CHECK(j["overall"]["per_class"]["upstairs"]["degenerate"] == true);
  CHECK(j["groups"]["yaw"]["accuracy"] == 1.0);
}

TEST_CASE("evaluate groups model predictions by head movement") {
  const auto ws = earda::test::toy_windows(5, DomainTag::Target, 3);
  dann::DannModel m{nn::init_params(nn::Architecture{}, 1)};
  const auto r = evaluate(m, ws);
  CHECK(r.overall.confusion.total() == ws.size());
  CHECK(r.groups.size() == 5);
  CHECK(evaluate(m, ws, 3).overall.accuracy == r.overall.accuracy);
  CHECK(r.overall.accuracy == doctest::Approx(dann::accuracy(m, ws)));
}
