#ifndef AOINET_SPECFUN_HPP
#define AOINET_SPECFUN_HPP

#include <functional>

namespace aoinet::specfun {

// Controls for the adaptive quadrature routines.
struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
  // Truncation point on the transformed semi-infinite axis; integrands here
  // are exponentially damped, so mass beyond it is far below the tolerances.
  double semi_infinite_cutoff = 1e6;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

// Regularized incomplete beta function I_x(a,b), with I_1(a,b) = 1.
double reg_inc_beta(double x, double a, double b);

// Inverse of I_x(a,b) in x, by bisection to `tol` on the CDF scale.
double reg_inc_beta_inv(double p, double a, double b, double tol = 1e-9,
                        int max_iters = 200);

// Lower incomplete gamma gamma(a,y); y may be +infinity, giving Gamma(a).
double lower_inc_gamma(double a, double y);

// Gauss hypergeometric 2F1(a,b;c;z) for z <= 0.
double gauss_2f1(double a, double b, double c, double z);

// Adaptive Gauss-Kronrod 7/15 on a finite interval.
QuadratureResult integrate_finite(const std::function<double(double)>& f,
                                  double lo, double hi,
                                  const QuadratureSpec& spec);

// Integral of f over (lower, infinity) via the map t = lower + u/(1-u).
QuadratureResult integrate_semi_infinite(const std::function<double(double)>& f,
                                         double lower,
                                         const QuadratureSpec& spec);

namespace detail {
// Direct power series, convergent for |z| < 1.
double gauss_2f1_series(double a, double b, double c, double z);
// Pfaff transform z -> z/(z-1), convergent for all z <= 0.
double gauss_2f1_pfaff(double a, double b, double c, double z);
}  // namespace detail

}  // namespace aoinet::specfun

#endif  // AOINET_SPECFUN_HPP
