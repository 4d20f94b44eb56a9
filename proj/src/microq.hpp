#ifndef AOINET_MICROQ_HPP
#define AOINET_MICROQ_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "macro.hpp"

namespace aoinet::microq {

struct ArrivalSpec {
  double alpha = 0.0;

  void validate() const;
};

// A real value or the explicit +infinity marker used for quantities that
// diverge on unstable queues. Serialized as the token "inf", never as a
// floating-point infinity.
struct ExtendedReal {
  double value = 0.0;
  bool unbounded = false;

  static ExtendedReal finite(double v) { return {v, false}; }
  static ExtendedReal unbounded_marker() { return {0.0, true}; }
  std::string to_string() const;
};

// Which reading of the sojourn distribution to evaluate. system_time weights
// an arrival that finds v-1 packets ahead by x_{v-1} and counts the delivery
// slot, giving total mass 1 on m >= 1. literal keeps the weights at x_v with
// an atom of x_0 at m = 0.
enum class SojournSemantics { system_time, literal };

struct ClassQueueStats {
  double d = 0.0;
  bool stable = false;
  double x0 = 0.0;
  double ratio = 0.0;
  std::vector<double> sojourn_pmf;
  ExtendedReal mean_sojourn;
};

struct PeakAoIResult {
  std::vector<ExtendedReal> per_class;
  ExtendedReal network;
};

// Stationary queue description for service probability d: stability flag,
// idle probability x0 and geometric ratio R. The sojourn fields are left for
// sojourn_pmf / class_stats.
ClassQueueStats steady_state(const ArrivalSpec& a, double d);

// P(queue occupancy = i) for i = 0..; truncated once cumulative mass reaches
// 1 - truncation. Occupancy is counted after arrivals join, before service.
std::vector<double> queue_length_pmf(const ClassQueueStats& s,
                                     double truncation = 1e-9,
                                     std::size_t cap = 1000000);

// Sojourn-time PMF over m = 0,1,2,...; index 0 carries mass only under the
// literal semantics. Throws UnstableQueue when alpha >= d (no PMF exists).
std::vector<double> sojourn_pmf(const ArrivalSpec& a, double d,
                                double truncation = 1e-9,
                                SojournSemantics sem = SojournSemantics::system_time,
                                std::size_t cap = 1000000);

// Mean sojourn in closed form, (d - alpha^2) / (d (d - alpha)).
double mean_sojourn_closed(const ArrivalSpec& a, double d);

// Full per-class bundle: steady state plus sojourn PMF and its mean (PMF sum
// with the geometric tail remainder folded in).
ClassQueueStats class_stats(const ArrivalSpec& a, double d,
                            double truncation = 1e-9);

// Per-class and network peak age: 1/alpha plus the mean sojourn, averaged
// across classes for the network value; unbounded when any class is unstable.
PeakAoIResult peak_aoi(const ArrivalSpec& a, const macro::QoSClassTable& table);

}  // namespace aoinet::microq

#endif  // AOINET_MICROQ_HPP
