#ifndef AOINET_MACRO_HPP
#define AOINET_MACRO_HPP

#include <vector>

#include "specfun.hpp"

namespace aoinet::macro {

// Channel and load parameters of the macroscopic analysis. theta is always
// linear scale here; dB conversion happens once at the CLI boundary.
struct MacroParams {
  double theta = 1.0;
  double eta = 4.0;
  double eps = 1.0;
  double chi = 1.0;

  void validate() const;
};

struct MetaMoments {
  double m1 = 0.0;
  double m2 = 0.0;
  double chi_used = 0.0;

  void validate() const;
};

// N equiprobable success-probability classes with their representative
// values d_1 < ... < d_N and boundaries w_1 < ... < w_{N+1}.
struct QoSClassTable {
  int n_classes = 0;
  std::vector<double> d;
  std::vector<double> boundaries;
};

// b-th moment of the conditional success probability, full power-control
// compensation (eps = 1), interferers active independently per slot with
// probability 1-chi. Evaluated from the alternating 2F1 sum.
double moment_closed_form(int b, const MacroParams& p);

// Variant of the closed form with the interferer population thinned once by
// 1-chi (activity frozen over the realization) instead of per slot. First
// moments coincide with moment_closed_form; higher moments differ.
double moment_closed_form_static(int b, const MacroParams& p);

// b-th moment by direct evaluation of the double integral, for eps < 1.
double moment_integral(int b, const MacroParams& p,
                       const specfun::QuadratureSpec& q);

// True when the moment pair describes a (numerically) zero-variance
// distribution; such pairs are treated as a point mass at m1.
bool is_degenerate(const MetaMoments& m);

// Fitted beta shape parameters for a non-degenerate moment pair.
void beta_fit(const MetaMoments& m, double& a, double& b);

// CCDF of the success probability across links, beta approximation.
// Throws DegenerateDistribution for a zero-variance moment pair.
double meta_ccdf(double delta, const MetaMoments& m);

// CCDF with the point-mass case folded in (step at m1).
double meta_ccdf_or_point(double delta, const MetaMoments& m);

// Splits the fitted distribution into n equiprobable classes and finds the
// representative d_n that halves each class's mass. Degenerate input gives
// every d_n = m1.
QoSClassTable quantize(int n_classes, const MetaMoments& m, double tol = 1e-9);

}  // namespace aoinet::macro

#endif  // AOINET_MACRO_HPP
