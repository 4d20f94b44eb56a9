#ifndef AOINET_ERRORS_HPP
#define AOINET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aoinet {

// Invalid argument values detected at an operation boundary.
class ParamError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// An iterative numeric scheme did not reach its tolerance within budget.
// Carries the best estimate obtained so far when one exists.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg)
      : std::runtime_error(msg), best_estimate_(0.0), has_estimate_(false) {}
  NumericError(const std::string& msg, double best_estimate)
      : std::runtime_error(msg), best_estimate_(best_estimate), has_estimate_(true) {}

  bool has_estimate() const { return has_estimate_; }
  double best_estimate() const { return best_estimate_; }

private:
  double best_estimate_;
  bool has_estimate_;
};

// A formula was invoked outside the parameter regime it covers.
class UnsupportedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Zero-variance success-probability distribution: the fitted shape collapses
// to a point mass. Callers catch this and treat the mass location directly.
class DegenerateDistribution : public std::runtime_error {
public:
  explicit DegenerateDistribution(double point_mass)
      : std::runtime_error("degenerate success-probability distribution (point mass)"),
        point_mass_(point_mass) {}

  double point_mass() const { return point_mass_; }

private:
  double point_mass_;
};

// The queue is unstable: sojourn-time quantities diverge and no PMF exists.
class UnstableQueue : public std::runtime_error {
public:
  UnstableQueue() : std::runtime_error("unstable queue: sojourn time unbounded") {}
};

// Spatial sampling failed to populate every cell within the draw budget.
class TopologyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace aoinet

#endif  // AOINET_ERRORS_HPP
