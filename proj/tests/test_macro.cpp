#include "macro.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "specfun.hpp"

using namespace aoinet;
using namespace aoinet::macro;

namespace {

// Independent route to the eps = 1 moments: the closed forms must agree with
// exp(-(2/eta) * int_1^inf y^{2/eta-1} * bracket(y) dy) where the bracket is
// the per-slot or frozen-activity interference factor. The tail is only
// algebraic, so the substitution y = w^{-2/(1-2/eta)} maps it onto [0,1].
double moment_by_quadrature(int b, double theta, double eta, double chi,
                            bool static_activity) {
  specfun::QuadratureSpec spec;
  const double d2 = 2.0 / eta;
  const double p_hi = 2.0 / (1.0 - d2);
  auto f = [&](double w) {
    const double y = std::pow(w, -p_hi);
    double bracket;
    if (static_activity)
      bracket =
          -(1.0 - chi) * std::expm1(b * std::log1p(-theta / (y + theta)));
    else
      bracket = -std::expm1(b * std::log1p(-theta * (1.0 - chi) / (y + theta)));
    return p_hi * std::pow(w, 1.0 - p_hi) * bracket;
  };
  const double integral = specfun::integrate_finite(f, 0.0, 1.0, spec).value;
  return std::exp(-d2 * integral);
}

const double kSqrt10 = std::sqrt(10.0);

}  // namespace

TEST_CASE("moment_closed_form trivial limits") {
  MacroParams p{kSqrt10, 4.0, 1.0, 1.0};
  CHECK(moment_closed_form(1, p) == doctest::Approx(1.0).epsilon(1e-14));
  p.chi = 0.5;
  p.theta = 1e-12;
  CHECK(moment_closed_form(1, p) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("moment_closed_form reference values") {
  MacroParams p{kSqrt10, 4.0, 1.0, 0.5};
  CHECK(moment_closed_form(1, p) ==
        doctest::Approx(0.3901676540776376).epsilon(1e-11));
  CHECK(moment_closed_form(2, p) ==
        doctest::Approx(0.1751642492144010).epsilon(1e-11));
  MacroParams p2{0.25, 3.1, 1.0, 0.2};
  CHECK(moment_closed_form(1, p2) ==
        doctest::Approx(0.7098178976441318).epsilon(1e-11));
  CHECK(moment_closed_form(2, p2) ==
        doctest::Approx(0.5113104082788701).epsilon(1e-11));
}

TEST_CASE("moment_closed_form_static reference values") {
  MacroParams p{kSqrt10, 4.0, 1.0, 0.5};
  CHECK(moment_closed_form_static(1, p) ==
        doctest::Approx(0.3901676540776376).epsilon(1e-11));
  CHECK(moment_closed_form_static(2, p) ==
        doctest::Approx(0.2015526066197690).epsilon(1e-11));
  MacroParams p2{0.25, 3.1, 1.0, 0.2};
  CHECK(moment_closed_form_static(2, p2) ==
        doctest::Approx(0.5131948847071240).epsilon(1e-11));
}

TEST_CASE("closed forms agree with the integral route") {
  for (double theta : {0.3162277660168379, 1.0, 3.1622776601683795}) {
    for (double chi : {0.0, 0.35, 0.8}) {
      MacroParams p{theta, 4.0, 1.0, chi};
      for (int b : {1, 2}) {
        CHECK(moment_closed_form(b, p) ==
              doctest::Approx(moment_by_quadrature(b, theta, 4.0, chi, false))
                  .epsilon(1e-9));
        CHECK(moment_closed_form_static(b, p) ==
              doctest::Approx(moment_by_quadrature(b, theta, 4.0, chi, true))
                  .epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("moment_closed_form eps guard") {
  MacroParams p{1.0, 4.0, 0.5, 0.5};
  CHECK_THROWS_AS(moment_closed_form(1, p), UnsupportedError);
  CHECK_THROWS_AS(moment_closed_form_static(1, p), UnsupportedError);
}

TEST_CASE("moment_integral basic behavior") {
  specfun::QuadratureSpec spec;
  spec.rel_tol = 1e-8;
  spec.abs_tol = 1e-10;

  MacroParams all_idle{1.0, 4.0, 0.5, 1.0};
  CHECK(moment_integral(1, all_idle, spec) == doctest::Approx(1.0).epsilon(1e-7));

  MacroParams p{1.0, 4.0, 0.5, 0.5};
  const double mb1 = moment_integral(1, p, spec);
  const double mb2 = moment_integral(2, p, spec);
  CHECK(mb2 <= mb1);
  CHECK(mb1 > 0.0);
  CHECK(mb1 < 1.0);

  MacroParams eps1{1.0, 4.0, 1.0, 0.5};
  CHECK_THROWS_AS(moment_integral(1, eps1, spec), UnsupportedError);
}

TEST_CASE("moment_integral approaches the closed form as eps -> 1") {
  specfun::QuadratureSpec spec;
  spec.rel_tol = 1e-8;
  spec.abs_tol = 1e-10;
  MacroParams near{1.0, 4.0, 0.999, 0.5};
  MacroParams at{1.0, 4.0, 1.0, 0.5};
  const double integral = moment_integral(1, near, spec);
  const double closed = moment_closed_form(1, at);
  CHECK(std::fabs(integral - closed) < 2e-2);
}

TEST_CASE("first moment decreasing in theta and in 1-chi") {
  double prev = 2.0;
  for (double theta_db = -10.0; theta_db <= 10.0; theta_db += 2.0) {
    MacroParams p{std::pow(10.0, theta_db / 10.0), 4.0, 1.0, 0.5};
    const double m1 = moment_closed_form(1, p);
    CHECK(m1 < prev);
    prev = m1;
  }
  prev = 0.0;
  for (double chi = 0.0; chi <= 1.0; chi += 0.1) {
    MacroParams p{kSqrt10, 4.0, 1.0, chi};
    const double m1 = moment_closed_form(1, p);
    CHECK(m1 > prev);
    prev = m1;
  }
}

TEST_CASE("moment ordering m2 <= m1 at random parameter points") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> uth(-10.0, 10.0);
  std::uniform_real_distribution<double> ueta(2.1, 6.0);
  std::uniform_real_distribution<double> uchi(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    MacroParams p{std::pow(10.0, uth(rng) / 10.0), ueta(rng), 1.0, uchi(rng)};
    const double m1 = moment_closed_form(1, p);
    const double m2 = moment_closed_form(2, p);
    CHECK(m2 <= m1 + 1e-14);
    CHECK(m2 >= m1 * m1 - 1e-12);
  }
}

TEST_CASE("meta_ccdf edges and monotonicity") {
  MetaMoments m{0.3901676540776376, 0.2015526066197690, 0.5};
  CHECK(meta_ccdf(1e-9, m) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::fabs(meta_ccdf(1.0 - 1e-9, m)) < 1e-6);
  double prev = 2.0;
  for (double delta = 0.05; delta < 1.0; delta += 0.05) {
    const double v = meta_ccdf(delta, m);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK_THROWS_AS(meta_ccdf(0.0, m), ParamError);
  CHECK_THROWS_AS(meta_ccdf(1.0, m), ParamError);
}

TEST_CASE("meta_ccdf degenerate signal and point-mass fallback") {
  MetaMoments point{0.7, 0.49, 1.0};
  CHECK_THROWS_AS(meta_ccdf(0.5, point), DegenerateDistribution);
  CHECK(meta_ccdf_or_point(0.5, point) == 1.0);
  CHECK(meta_ccdf_or_point(0.8, point) == 0.0);
}

TEST_CASE("beta_fit reference values") {
  MetaMoments frozen{0.3901676540776376, 0.2015526066197690, 0.5};
  double a = 0.0, b = 0.0;
  beta_fit(frozen, a, b);
  CHECK(a == doctest::Approx(1.4920679731777870).epsilon(1e-9));
  CHECK(b == doctest::Approx(2.3321033992673710).epsilon(1e-9));

  MetaMoments printed{0.3901676540776376, 0.1751642492144010, 0.5};
  beta_fit(printed, a, b);
  CHECK(a == doctest::Approx(3.6578609283462736).epsilon(1e-9));
  CHECK(b == doctest::Approx(5.7172394679013697).epsilon(1e-9));
}

TEST_CASE("quantize reference class values") {
  MetaMoments m{0.3901676540776376, 0.2015526066197690, 0.5};
  QoSClassTable t = quantize(10, m);
  REQUIRE(t.d.size() == 10);
  const double expected[10] = {0.0655874754273, 0.143122560602, 0.209663247158,
                               0.27320530176,   0.33681887327,  0.402722072599,
                               0.473354109688,  0.552422460874, 0.647602114234,
                               0.785601619012};
  for (int n = 0; n < 10; ++n)
    CHECK(t.d[n] == doctest::Approx(expected[n]).epsilon(1e-6));

  const double expected_w[9] = {0.10681434862,  0.177047277811, 0.241578941336,
                                0.304860047792, 0.369346695489, 0.437262064161,
                                0.511504521916, 0.597184004296, 0.707252884569};
  for (int k = 0; k < 9; ++k)
    CHECK(t.boundaries[k + 1] == doctest::Approx(expected_w[k]).epsilon(1e-6));
  CHECK(t.boundaries.front() == 0.0);
  CHECK(t.boundaries.back() == 1.0);
}

TEST_CASE("quantize N=1 gives the median") {
  MetaMoments m{0.3901676540776376, 0.2015526066197690, 0.5};
  QoSClassTable t = quantize(1, m);
  CHECK(t.d[0] == doctest::Approx(0.369346695488974).epsilon(1e-6));
}

TEST_CASE("quantize degenerate point mass") {
  MetaMoments point{0.7, 0.49, 1.0};
  QoSClassTable t = quantize(10, point);
  for (double dn : t.d) CHECK(dn == 0.7);
}

TEST_CASE("quantize table ordering invariants") {
  MetaMoments m{0.3901676540776376, 0.2015526066197690, 0.5};
  QoSClassTable t = quantize(10, m);
  for (int n = 0; n < 10; ++n) {
    CHECK(t.boundaries[n] < t.d[n]);
    CHECK(t.d[n] < t.boundaries[n + 1]);
    if (n > 0) CHECK(t.d[n - 1] < t.d[n]);
  }
}

TEST_CASE("quantize round trip against meta_ccdf") {
  MetaMoments m{0.3901676540776376, 0.2015526066197690, 0.5};
  const double tol = 1e-9;
  QoSClassTable t = quantize(10, m, tol);
  for (int n = 0; n < 10; ++n) {
    const double hi = t.boundaries[n + 1];
    const double lo = t.boundaries[n];
    const double mass = meta_ccdf_or_point(std::max(lo, 1e-15), m) -
                        (hi >= 1.0 ? 0.0 : meta_ccdf_or_point(hi, m));
    CHECK(std::fabs(mass - 0.1) <= 2.0 * tol + 1e-12);
  }
}

TEST_CASE("class means approach m1 as N grows") {
  MetaMoments m{0.3901676540776376, 0.2015526066197690, 0.5};
  auto mean_gap = [&](int n_classes) {
    QoSClassTable t = quantize(n_classes, m);
    double s = 0.0;
    for (double dn : t.d) s += dn;
    return std::fabs(s / n_classes - m.m1);
  };
  CHECK(mean_gap(100) < mean_gap(10));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(MacroParams({-1.0, 4.0, 1.0, 0.5}).validate(), ParamError);
  CHECK_THROWS_AS(MacroParams({1.0, 2.0, 1.0, 0.5}).validate(), ParamError);
  CHECK_THROWS_AS(MacroParams({1.0, 4.0, 0.0, 0.5}).validate(), ParamError);
  CHECK_THROWS_AS(MacroParams({1.0, 4.0, 1.0, 1.5}).validate(), ParamError);
  MetaMoments bad{0.5, 0.6, 0.5};
  CHECK_THROWS_AS(bad.validate(), ParamError);
}
