#include "coupler.hpp"

#include <cmath>

#include "doctest.h"
#include "errors.hpp"

using namespace aoinet;
using namespace aoinet::coupler;

namespace {

const double kSqrt10 = std::sqrt(10.0);

macro::MacroParams link_at(double theta) { return {theta, 4.0, 1.0, 0.0}; }

double mean_class_sojourn(const EquilibriumSolution& s) {
  double sum = 0.0;
  for (const auto& c : s.per_class) sum += c.mean_sojourn.value;
  return sum / s.per_class.size();
}

}  // namespace

TEST_CASE("chi_update maps [0,1] into [0,1]") {
  microq::ArrivalSpec a{0.17};
  for (double chi : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double next = chi_update(chi, a, link_at(kSqrt10), 10);
    CHECK(next >= 0.0);
    CHECK(next <= 1.0);
  }
}

TEST_CASE("chi_update at full idleness gives 1 - alpha") {
  // chi = 1 freezes all interferers silent, so every class decodes with
  // probability 1 and each queue idles with probability 1 - alpha.
  microq::ArrivalSpec a{0.17};
  CHECK(chi_update(1.0, a, link_at(kSqrt10), 10) ==
        doctest::Approx(0.83).epsilon(1e-12));
}

TEST_CASE("solve reaches the known equilibrium in light traffic") {
  microq::ArrivalSpec a{0.05};
  FixedPointConfig cfg;
  cfg.tol = 1e-8;
  const EquilibriumSolution s = solve(a, link_at(kSqrt10), 10, cfg);

  REQUIRE(s.converged);
  CHECK(s.chi == doctest::Approx(0.944431464390626).epsilon(1e-6));
  CHECK(s.trajectory.front() == 1.0);
  CHECK(s.trajectory.back() == s.chi);
  CHECK(static_cast<int>(s.trajectory.size()) == s.iterations + 1);
  for (double c : s.trajectory) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }

  // Self-consistency: one more pass through the map reproduces chi.
  const double again = chi_update(s.chi, a, link_at(kSqrt10), 10);
  CHECK(std::fabs(again - s.chi) < 1e-7);

  REQUIRE(s.per_class.size() == 10);
  CHECK(all_classes_stable(s));
  CHECK(s.table.d.front() == doctest::Approx(0.832454468830682).epsilon(1e-6));
  CHECK(s.table.d.back() == doctest::Approx(0.954328777810668).epsilon(1e-6));
  CHECK(mean_class_sojourn(s) ==
        doctest::Approx(1.173601302910118).epsilon(1e-6));
  REQUIRE_FALSE(s.aoi.network.unbounded);
  CHECK(s.aoi.network.value ==
        doctest::Approx(21.173601302910118).epsilon(1e-6));
}

TEST_CASE("solve matches known operating points across link qualities") {
  FixedPointConfig cfg;
  cfg.tol = 1e-8;

  SUBCASE("unit threshold, alpha 0.35") {
    const EquilibriumSolution s = solve({0.35}, link_at(1.0), 10, cfg);
    REQUIRE(s.converged);
    CHECK(s.chi == doctest::Approx(0.419875138475288).epsilon(1e-6));
    REQUIRE(all_classes_stable(s));
    CHECK(s.aoi.network.value ==
          doctest::Approx(7.342535513823638).epsilon(1e-6));
  }
  SUBCASE("low threshold, alpha 0.61") {
    const EquilibriumSolution s =
        solve({0.61}, link_at(std::pow(10.0, -0.5)), 10, cfg);
    REQUIRE(s.converged);
    CHECK(s.chi == doctest::Approx(0.229094647844048).epsilon(1e-6));
    REQUIRE(all_classes_stable(s));
    CHECK(s.aoi.network.value ==
          doctest::Approx(7.112355410589745).epsilon(1e-6));
  }
  SUBCASE("low threshold, alpha 0.63 loses the weakest class") {
    const EquilibriumSolution s =
        solve({0.63}, link_at(std::pow(10.0, -0.5)), 10, cfg);
    REQUIRE(s.converged);
    CHECK_FALSE(s.per_class[0].stable);
    CHECK_FALSE(all_classes_stable(s));
    CHECK(s.aoi.network.unbounded);
  }
}

TEST_CASE("solve with most classes saturated keeps the survivors finite") {
  FixedPointConfig cfg;
  cfg.tol = 1e-8;
  const EquilibriumSolution s = solve({0.25}, link_at(kSqrt10), 10, cfg);
  REQUIRE(s.converged);
  CHECK(s.chi == doctest::Approx(0.065040119375614).epsilon(1e-6));
  for (int n = 0; n < 8; ++n) {
    CHECK_FALSE(s.per_class[n].stable);
    CHECK(s.per_class[n].mean_sojourn.unbounded);
    CHECK(s.aoi.per_class[n].unbounded);
  }
  REQUIRE(s.per_class[8].stable);
  REQUIRE(s.per_class[9].stable);
  CHECK(s.aoi.per_class[8].value ==
        doctest::Approx(15.924651186179389).epsilon(1e-5));
  CHECK(s.aoi.per_class[9].value ==
        doctest::Approx(8.408154681093801).epsilon(1e-6));
  CHECK(s.aoi.network.unbounded);
}

TEST_CASE("multi-start agrees at a single-branch operating point") {
  FixedPointConfig cfg;
  cfg.tol = 1e-8;
  const MultiStartResult r =
      solve_multi({0.05}, link_at(kSqrt10), 10, cfg, {0.0, 0.5, 1.0});
  REQUIRE(r.solutions.size() == 3);
  CHECK(r.consistent);
  for (const auto& s : r.solutions) {
    REQUIRE(s.converged);
    CHECK(s.chi == doctest::Approx(0.944431464390626).epsilon(1e-6));
  }
}

TEST_CASE("multi-start reports both branches at a bistable point") {
  microq::ArrivalSpec a{0.17};
  FixedPointConfig cfg;
  cfg.tol = 1e-8;
  cfg.max_iters = 2000;
  const MultiStartResult r = solve_multi(a, link_at(kSqrt10), 10, cfg,
                                         {0.0, 0.25, 0.5, 0.75, 1.0});
  REQUIRE(r.solutions.size() == 5);
  CHECK_FALSE(r.consistent);

  for (int i : {0, 1, 2}) {
    REQUIRE(r.solutions[i].converged);
    CHECK(r.solutions[i].chi ==
          doctest::Approx(0.299445976124534).epsilon(1e-6));
    CHECK_FALSE(all_classes_stable(r.solutions[i]));
    CHECK_FALSE(r.solutions[i].per_class[0].stable);
    CHECK_FALSE(r.solutions[i].per_class[2].stable);
    CHECK(r.solutions[i].per_class[3].stable);
  }
  for (int i : {3, 4}) {
    REQUIRE(r.solutions[i].converged);
    CHECK(r.solutions[i].chi ==
          doctest::Approx(0.620013692307916).epsilon(1e-6));
    CHECK(all_classes_stable(r.solutions[i]));
  }
}

TEST_CASE("vanishing traffic drives the network to full idleness") {
  FixedPointConfig cfg;
  cfg.tol = 1e-10;
  const EquilibriumSolution s = solve({1e-6}, link_at(kSqrt10), 10, cfg);
  REQUIRE(s.converged);
  CHECK(s.chi > 0.9999);
}

TEST_CASE("damping converges to the same fixed point") {
  FixedPointConfig plain;
  plain.tol = 1e-8;
  FixedPointConfig damped = plain;
  damped.damping = 0.5;
  damped.max_iters = 2000;
  const EquilibriumSolution a = solve({0.05}, link_at(kSqrt10), 10, plain);
  const EquilibriumSolution b = solve({0.05}, link_at(kSqrt10), 10, damped);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(a.chi == doctest::Approx(b.chi).epsilon(1e-6));
  CHECK(b.iterations > a.iterations);
}

TEST_CASE("iteration budget exhaustion is reported, not thrown") {
  microq::ArrivalSpec a{0.17};
  FixedPointConfig cfg;
  cfg.tol = 1e-8;
  cfg.max_iters = 3;
  const EquilibriumSolution s = solve(a, link_at(kSqrt10), 10, cfg);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 3);
  CHECK(s.trajectory.size() == 4);
  CHECK(s.chi >= 0.0);
  CHECK(s.chi <= 1.0);
}

TEST_CASE("stability frontier matches the known thresholds") {
  std::vector<double> grid;
  for (double alpha = 0.05; alpha < 0.795; alpha += 0.02)
    grid.push_back(std::round(alpha * 100.0) / 100.0);
  FixedPointConfig cfg;
  cfg.max_iters = 2000;

  FrontierResult r = stability_frontier(link_at(kSqrt10), grid, 10, cfg);
  REQUIRE(r.found);
  CHECK(r.alpha == doctest::Approx(0.15));

  r = stability_frontier(link_at(1.0), grid, 10, cfg);
  REQUIRE(r.found);
  CHECK(r.alpha == doctest::Approx(0.35));

  r = stability_frontier(link_at(std::pow(10.0, -0.5)), grid, 10, cfg);
  REQUIRE(r.found);
  CHECK(r.alpha == doctest::Approx(0.61));
}

TEST_CASE("stability frontier reports absence on a hopeless grid") {
  FixedPointConfig cfg;
  const FrontierResult r =
      stability_frontier(link_at(kSqrt10), {0.5, 0.7, 0.9}, 10, cfg);
  CHECK_FALSE(r.found);
}

TEST_CASE("general path-loss compensation feeds the slow moment route") {
  macro::MacroParams link{1.0, 4.0, 0.5, 0.0};
  const double next = chi_update(0.5, {0.3}, link, 4);
  CHECK(next >= 0.0);
  CHECK(next <= 1.0);
}

TEST_CASE("configuration and parameter validation") {
  FixedPointConfig cfg;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(solve({0.1}, link_at(1.0), 10, cfg), ParamError);
  cfg = {};
  cfg.chi_init = 1.5;
  CHECK_THROWS_AS(solve({0.1}, link_at(1.0), 10, cfg), ParamError);
  cfg = {};
  cfg.damping = 0.0;
  CHECK_THROWS_AS(solve({0.1}, link_at(1.0), 10, cfg), ParamError);
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(solve({0.1}, link_at(1.0), 10, cfg), ParamError);
  cfg = {};
  CHECK_THROWS_AS(solve({0.1}, link_at(1.0), 0, cfg), ParamError);
  CHECK_THROWS_AS(solve({1.2}, link_at(1.0), 10, cfg), ParamError);
  CHECK_THROWS_AS(solve({0.1}, link_at(-2.0), 10, cfg), ParamError);
}
