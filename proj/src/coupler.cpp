#include "coupler.hpp"

#include <cmath>

#include "errors.hpp"

namespace aoinet::coupler {

namespace {

macro::MetaMoments moments_at(double chi, const macro::MacroParams& link) {
  macro::MacroParams p = link;
  p.chi = chi;
  macro::MetaMoments m;
  if (p.eps == 1.0) {
    m.m1 = macro::moment_closed_form(1, p);
    m.m2 = macro::moment_closed_form(2, p);
  } else {
    specfun::QuadratureSpec q;
    q.rel_tol = 1e-9;
    q.abs_tol = 1e-11;
    m.m1 = macro::moment_integral(1, p, q);
    m.m2 = macro::moment_integral(2, p, q);
  }
  m.chi_used = chi;
  return m;
}

}  // namespace

void FixedPointConfig::validate() const {
  if (!(tol > 0.0)) throw ParamError("FixedPointConfig: tol must be positive");
  if (max_iters < 1) throw ParamError("FixedPointConfig: max_iters must be >= 1");
  if (!(chi_init >= 0.0 && chi_init <= 1.0))
    throw ParamError("FixedPointConfig: chi_init outside [0,1]");
  if (!(damping > 0.0 && damping <= 1.0))
    throw ParamError("FixedPointConfig: damping outside (0,1]");
}

double chi_update(double chi, const microq::ArrivalSpec& arrival,
                  const macro::MacroParams& link, int n_classes) {
  const macro::MetaMoments m = moments_at(chi, link);
  const macro::QoSClassTable table = macro::quantize(n_classes, m);
  double sum = 0.0;
  for (double dn : table.d) {
    const microq::ClassQueueStats s = microq::steady_state(arrival, dn);
    sum += s.x0;
  }
  return sum / n_classes;
}

EquilibriumSolution solve(const microq::ArrivalSpec& arrival,
                          const macro::MacroParams& link, int n_classes,
                          const FixedPointConfig& cfg) {
  arrival.validate();
  cfg.validate();
  if (n_classes < 1) throw ParamError("solve: n_classes must be >= 1");
  {
    macro::MacroParams check = link;
    check.chi = 0.0;
    check.validate();
  }

  EquilibriumSolution sol;
  double chi = cfg.chi_init;
  sol.trajectory.push_back(chi);

  for (int k = 1; k <= cfg.max_iters; ++k) {
    const double chi_new = chi_update(chi, arrival, link, n_classes);
    const double chi_next = (1.0 - cfg.damping) * chi + cfg.damping * chi_new;
    const double delta = std::fabs(chi_next - chi);
    chi = chi_next;
    sol.trajectory.push_back(chi);
    sol.iterations = k;
    if (delta < cfg.tol) {
      sol.converged = true;
      break;
    }
  }

  sol.chi = chi;
  sol.moments = moments_at(chi, link);
  sol.table = macro::quantize(n_classes, sol.moments);
  sol.per_class.reserve(n_classes);
  for (double dn : sol.table.d)
    sol.per_class.push_back(microq::class_stats(arrival, dn));
  sol.aoi = microq::peak_aoi(arrival, sol.table);
  return sol;
}

MultiStartResult solve_multi(const microq::ArrivalSpec& arrival,
                             const macro::MacroParams& link, int n_classes,
                             const FixedPointConfig& cfg,
                             const std::vector<double>& starts) {
  MultiStartResult r;
  r.solutions.reserve(starts.size());
  for (double s : starts) {
    FixedPointConfig c = cfg;
    c.chi_init = s;
    r.solutions.push_back(solve(arrival, link, n_classes, c));
  }
  r.consistent = true;
  for (std::size_t i = 1; i < r.solutions.size(); ++i)
    if (std::fabs(r.solutions[i].chi - r.solutions[0].chi) > 10.0 * cfg.tol)
      r.consistent = false;
  return r;
}

bool all_classes_stable(const EquilibriumSolution& s) {
  for (const auto& c : s.per_class)
    if (!c.stable) return false;
  return !s.per_class.empty();
}

FrontierResult stability_frontier(const macro::MacroParams& link,
                                  const std::vector<double>& alpha_grid,
                                  int n_classes, const FixedPointConfig& cfg) {
  FrontierResult r;
  FixedPointConfig pessimistic = cfg;
  pessimistic.chi_init = 0.0;
  for (double alpha : alpha_grid) {
    const EquilibriumSolution s =
        solve({alpha}, link, n_classes, pessimistic);
    if (s.converged && all_classes_stable(s) &&
        (!r.found || alpha > r.alpha)) {
      r.alpha = alpha;
      r.found = true;
    }
  }
  return r;
}

}  // namespace aoinet::coupler
