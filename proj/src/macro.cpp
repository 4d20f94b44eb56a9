#include "macro.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "errors.hpp"

namespace aoinet::macro {

namespace {

constexpr double kDegenerateVarTol = 1e-12;

double binom(int n, int k) {
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                             std::lgamma(n - k + 1.0)));
}

// Shared alternating sum of the closed forms. Each term carries
// C(b,n) (-1)^{n+1} s_n / (n - 2/eta) * 2F1(n, n-2/eta; n+1-2/eta; -theta),
// with s_n the caller-supplied power factor.
double closed_form_sum(int b, double theta, double eta,
                       const std::function<double(int)>& power_factor) {
  const double delta2 = 2.0 / eta;
  double sum = 0.0;
  for (int n = 1; n <= b; ++n) {
    const double sign = (n % 2 == 1) ? 1.0 : -1.0;
    const double hyp =
        specfun::gauss_2f1(n, n - delta2, n + 1.0 - delta2, -theta);
    sum += binom(b, n) * sign * power_factor(n) / (n - delta2) * hyp;
  }
  return std::exp(-delta2 * sum);
}

}  // namespace

void MacroParams::validate() const {
  if (!(theta > 0.0)) throw ParamError("MacroParams: theta must be positive");
  if (!(eta > 2.0)) throw ParamError("MacroParams: eta must exceed 2");
  if (!(eps > 0.0 && eps <= 1.0)) throw ParamError("MacroParams: eps outside (0,1]");
  if (!(chi >= 0.0 && chi <= 1.0)) throw ParamError("MacroParams: chi outside [0,1]");
}

void MetaMoments::validate() const {
  if (!(m1 >= 0.0 && m1 <= 1.0)) throw ParamError("MetaMoments: m1 outside [0,1]");
  if (!(m2 >= 0.0 && m2 <= 1.0)) throw ParamError("MetaMoments: m2 outside [0,1]");
  if (m2 > m1 + 1e-12) throw ParamError("MetaMoments: m2 exceeds m1");
  if (m2 < m1 * m1 - 1e-9) throw ParamError("MetaMoments: negative variance");
  if (!(chi_used >= 0.0 && chi_used <= 1.0))
    throw ParamError("MetaMoments: chi_used outside [0,1]");
}

double moment_closed_form(int b, const MacroParams& p) {
  p.validate();
  if (b < 1) throw ParamError("moment_closed_form: b must be >= 1");
  if (p.eps != 1.0)
    throw UnsupportedError(
        "moment_closed_form covers eps = 1 only; use moment_integral");
  const double chibar_theta = (1.0 - p.chi) * p.theta;
  return closed_form_sum(b, p.theta, p.eta, [chibar_theta](int n) {
    return std::pow(chibar_theta, n);
  });
}

double moment_closed_form_static(int b, const MacroParams& p) {
  p.validate();
  if (b < 1) throw ParamError("moment_closed_form_static: b must be >= 1");
  if (p.eps != 1.0)
    throw UnsupportedError(
        "moment_closed_form_static covers eps = 1 only; use moment_integral");
  const double chibar = 1.0 - p.chi;
  const double theta = p.theta;
  return closed_form_sum(b, theta, p.eta, [chibar, theta](int n) {
    return chibar * std::pow(theta, n);
  });
}

double moment_integral(int b, const MacroParams& p,
                       const specfun::QuadratureSpec& q) {
  p.validate();
  if (b < 1) throw ParamError("moment_integral: b must be >= 1");
  if (p.eps == 1.0)
    throw UnsupportedError(
        "moment_integral covers eps < 1 only; use moment_closed_form");

  const double delta2 = 2.0 / p.eta;
  const double kappa = 2.0 / (p.eta * (1.0 - p.eps));
  const double theta = p.theta;
  const double chi = p.chi;

  specfun::QuadratureSpec inner_spec = q;
  inner_spec.rel_tol = std::max(q.rel_tol, 1e-9);
  inner_spec.abs_tol = std::max(q.abs_tol, 1e-12);

  // 1 - ((y + theta chi)/(y + theta))^b, stable against cancellation at
  // large y where the ratio approaches 1.
  auto bracket = [=](double y) {
    return -std::expm1(b * std::log1p(-theta * (1.0 - chi) / (y + theta)));
  };

  // The y-integrand only decays like y^{2/eta - 2}, so each half is pulled
  // onto [0,1]: y = s^{2/delta} below 1, y = w^{-2/(1-delta)} above it.
  // Both substitutions leave an integrand that vanishes linearly at 0.
  const double q_lo = 2.0 / delta2;
  const double p_hi = 2.0 / (1.0 - delta2);

  auto outer = [&](double z) {
    auto inner_lo = [&](double s) {
      const double y = std::pow(s, q_lo);
      const double arg = z * std::pow(y, kappa);
      return q_lo * s * bracket(y) *
             specfun::lower_inc_gamma(1.0 + p.eps, arg);
    };
    auto inner_hi = [&](double w) {
      const double y = std::pow(w, -p_hi);
      if (!std::isfinite(y)) return 0.0;
      const double arg = z * std::pow(y, kappa);
      return p_hi * std::pow(w, 1.0 - p_hi) * bracket(y) *
             specfun::lower_inc_gamma(1.0 + p.eps, arg);
    };
    const double inner_val =
        specfun::integrate_finite(inner_lo, 0.0, 1.0, inner_spec).value +
        specfun::integrate_finite(inner_hi, 0.0, 1.0, inner_spec).value;
    return std::exp(-z - 2.0 * std::pow(z, 1.0 - p.eps) / p.eta * inner_val);
  };

  return specfun::integrate_semi_infinite(outer, 0.0, q).value;
}

bool is_degenerate(const MetaMoments& m) {
  return m.m2 <= m.m1 * m.m1 + kDegenerateVarTol;
}

void beta_fit(const MetaMoments& m, double& a, double& b) {
  const double var = m.m2 - m.m1 * m.m1;
  if (var <= kDegenerateVarTol) throw DegenerateDistribution(m.m1);
  const double scale = (m.m1 - m.m2) / var;
  a = m.m1 * scale;
  b = (1.0 - m.m1) * scale;
}

double meta_ccdf(double delta, const MetaMoments& m) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ParamError("meta_ccdf: delta outside (0,1)");
  m.validate();
  if (is_degenerate(m)) throw DegenerateDistribution(m.m1);
  double a, b;
  beta_fit(m, a, b);
  return 1.0 - specfun::reg_inc_beta(delta, a, b);
}

double meta_ccdf_or_point(double delta, const MetaMoments& m) {
  try {
    return meta_ccdf(delta, m);
  } catch (const DegenerateDistribution& d) {
    return delta < d.point_mass() ? 1.0 : 0.0;
  }
}

QoSClassTable quantize(int n_classes, const MetaMoments& m, double tol) {
  if (n_classes < 1) throw ParamError("quantize: n_classes must be >= 1");
  if (!(tol > 0.0)) throw ParamError("quantize: tol must be positive");
  m.validate();

  QoSClassTable table;
  table.n_classes = n_classes;
  table.d.resize(n_classes);
  table.boundaries.resize(n_classes + 1);

  if (is_degenerate(m)) {
    for (int n = 0; n < n_classes; ++n) table.d[n] = m.m1;
    for (int n = 0; n <= n_classes; ++n) table.boundaries[n] = m.m1;
    return table;
  }

  double a, b;
  beta_fit(m, a, b);

  table.boundaries[0] = 0.0;
  table.boundaries[n_classes] = 1.0;
  for (int k = 1; k < n_classes; ++k)
    table.boundaries[k] =
        specfun::reg_inc_beta_inv(static_cast<double>(k) / n_classes, a, b, tol);
  // The representative of class n sits at the class's half-mass point.
  for (int n = 0; n < n_classes; ++n)
    table.d[n] =
        specfun::reg_inc_beta_inv((n + 0.5) / n_classes, a, b, tol);
  return table;
}

}  // namespace aoinet::macro
