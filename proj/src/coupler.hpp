#ifndef AOINET_COUPLER_HPP
#define AOINET_COUPLER_HPP

#include <vector>

#include "macro.hpp"
#include "microq.hpp"

namespace aoinet::coupler {

struct FixedPointConfig {
  // Convergence tolerance on |chi_k - chi_{k-1}|.
  double tol = 1e-6;
  int max_iters = 500;
  double chi_init = 1.0;
  // 1 is plain Picard iteration; smaller values damp oscillation near
  // stability frontiers.
  double damping = 1.0;

  void validate() const;
};

struct EquilibriumSolution {
  double chi = 0.0;
  macro::MetaMoments moments;
  macro::QoSClassTable table;
  std::vector<microq::ClassQueueStats> per_class;
  microq::PeakAoIResult aoi;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trajectory;
};

// One macroscopic/microscopic pass: moments at the given chi, quantization
// into n_classes, per-class idle probabilities (0 when unstable), averaged
// into the next chi.
double chi_update(double chi, const microq::ArrivalSpec& arrival,
                  const macro::MacroParams& link, int n_classes);

// Fixed-point iteration coupling interference and queue idleness. link.chi
// is ignored; iteration starts from cfg.chi_init. Non-convergence is
// reported through the converged flag with the trajectory attached, not as
// an exception.
EquilibriumSolution solve(const microq::ArrivalSpec& arrival,
                          const macro::MacroParams& link, int n_classes,
                          const FixedPointConfig& cfg);

struct MultiStartResult {
  std::vector<EquilibriumSolution> solutions;
  // True when every start landed on the same chi within 10x tolerance.
  bool consistent = false;
};

// Runs solve from each starting point and reports every attained fixed
// point; disagreeing starts are returned side by side, never collapsed.
MultiStartResult solve_multi(const microq::ArrivalSpec& arrival,
                             const macro::MacroParams& link, int n_classes,
                             const FixedPointConfig& cfg,
                             const std::vector<double>& starts);

bool all_classes_stable(const EquilibriumSolution& s);

struct FrontierResult {
  double alpha = 0.0;
  bool found = false;
};

// Largest arrival probability on the grid for which every class is stable.
// Solved from chi_init = 0, the maximal-interference start, so a point
// counts as stable only if the pessimistic branch of the fixed point is.
FrontierResult stability_frontier(const macro::MacroParams& link,
                                  const std::vector<double>& alpha_grid,
                                  int n_classes, const FixedPointConfig& cfg);

}  // namespace aoinet::coupler

#endif  // AOINET_COUPLER_HPP
