#include "microq.hpp"

#include <cmath>
#include <cstdio>

#include "errors.hpp"

namespace aoinet::microq {

namespace {

// x_i for i >= 1 in the form x0 * (alpha / ((1-alpha) d)) * R^{i-1}, which
// stays finite across the whole stable range including d = 1.
double x_above_zero_base(double alpha, double d, double x0) {
  return x0 * alpha / ((1.0 - alpha) * d);
}

}  // namespace

void ArrivalSpec::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ParamError("ArrivalSpec: alpha outside (0,1]");
}

std::string ExtendedReal::to_string() const {
  if (unbounded) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

ClassQueueStats steady_state(const ArrivalSpec& a, double d) {
  a.validate();
  if (!(d > 0.0 && d <= 1.0))
    throw ParamError("steady_state: service probability outside (0,1]");

  ClassQueueStats s;
  s.d = d;
  s.stable = a.alpha / d < 1.0;
  if (!s.stable) {
    s.x0 = 0.0;
    s.ratio = 0.0;
    s.mean_sojourn = ExtendedReal::unbounded_marker();
    return s;
  }
  s.x0 = (d - a.alpha) / d;
  s.ratio = a.alpha * (1.0 - d) / ((1.0 - a.alpha) * d);
  return s;
}

std::vector<double> queue_length_pmf(const ClassQueueStats& s,
                                     double truncation, std::size_t cap) {
  if (!s.stable) throw UnstableQueue();
  if (!(truncation > 0.0 && truncation < 1.0))
    throw ParamError("queue_length_pmf: truncation outside (0,1)");

  const double alpha = s.d - s.x0 * s.d;  // back out alpha = d(1 - x0)
  std::vector<double> pmf;
  pmf.push_back(s.x0);
  double cum = s.x0;
  double xi = x_above_zero_base(alpha, s.d, s.x0);
  while (1.0 - cum > truncation && pmf.size() < cap && xi > 0.0) {
    pmf.push_back(xi);
    cum += xi;
    xi *= s.ratio;
  }
  return pmf;
}

std::vector<double> sojourn_pmf(const ArrivalSpec& a, double d,
                                double truncation, SojournSemantics sem,
                                std::size_t cap) {
  a.validate();
  if (!(d > 0.0 && d <= 1.0))
    throw ParamError("sojourn_pmf: service probability outside (0,1]");
  if (!(truncation > 0.0 && truncation < 1.0))
    throw ParamError("sojourn_pmf: truncation outside (0,1)");
  if (!(a.alpha < d)) throw UnstableQueue();

  const double alpha = a.alpha;
  const double dbar = 1.0 - d;
  const double x0 = (d - alpha) / d;
  const double ratio = alpha * dbar / ((1.0 - alpha) * d);
  const double x1 = x_above_zero_base(alpha, d, x0);

  std::vector<double> pmf;
  if (sem == SojournSemantics::system_time) {
    // Mixture of negative-binomial passage times with weights x_{v-1}; its
    // PMF obeys a second-order linear recurrence with constant coefficients
    // lambda = dbar + ratio*d being the asymptotic tail ratio.
    const double lam = dbar + ratio * d;
    const double c1 = dbar + lam;
    const double c2 = -dbar * lam;
    pmf.push_back(0.0);
    double p1 = x0 * d;
    pmf.push_back(p1);
    double cum = p1;
    if (1.0 - cum > truncation) {
      double p2 = x0 * d * dbar + x1 * d * d;
      pmf.push_back(p2);
      cum += p2;
      double prev2 = p1, prev1 = p2;
      while (1.0 - cum > truncation && pmf.size() < cap) {
        const double pm = c1 * prev1 + c2 * prev2;
        pmf.push_back(pm);
        cum += pm;
        prev2 = prev1;
        prev1 = pm;
      }
    }
  } else if (dbar == 0.0) {
    // Every attempt succeeds, so spending m slots in the system means
    // exactly m successes and the mixture collapses onto P(W = m) = x_m.
    pmf.push_back(x0);
    double cum = x0;
    double xv = x1;
    while (1.0 - cum > truncation && pmf.size() < cap && xv > 0.0) {
      pmf.push_back(xv);
      cum += xv;
      xv *= ratio;
    }
  } else {
    // Literal reading: atom x0 at m = 0, then weights x_v with binomial
    // counts of successes inside m slots.
    pmf.push_back(x0);
    double cum = x0;
    for (std::size_t m = 1; 1.0 - cum > truncation && m < cap; ++m) {
      // binom(m-1, v-1) d^v dbar^{m-v} for v = 1..m, weight x_v
      double term = std::pow(dbar, static_cast<double>(m - 1)) * d;  // v = 1
      double xv = x1;
      double pm = 0.0;
      for (std::size_t v = 1; v <= m; ++v) {
        pm += xv * term;
        if (v < m) {
          term *= static_cast<double>(m - v) / static_cast<double>(v) * d / dbar;
          xv *= ratio;
        }
      }
      pmf.push_back(pm);
      cum += pm;
    }
  }
  return pmf;
}

double mean_sojourn_closed(const ArrivalSpec& a, double d) {
  a.validate();
  if (!(d > 0.0 && d <= 1.0))
    throw ParamError("mean_sojourn_closed: service probability outside (0,1]");
  if (!(a.alpha < d)) throw UnstableQueue();
  return (d - a.alpha * a.alpha) / (d * (d - a.alpha));
}

ClassQueueStats class_stats(const ArrivalSpec& a, double d, double truncation) {
  ClassQueueStats s = steady_state(a, d);
  if (!s.stable) return s;

  s.sojourn_pmf = sojourn_pmf(a, d, truncation);
  double mean = 0.0;
  double cum = 0.0;
  for (std::size_t m = 0; m < s.sojourn_pmf.size(); ++m) {
    mean += static_cast<double>(m) * s.sojourn_pmf[m];
    cum += s.sojourn_pmf[m];
  }
  // Fold in the geometric tail beyond the truncation point: remaining mass q
  // sits at M + 1/(1-lambda) on average.
  const double lam = (1.0 - d) / (1.0 - a.alpha);
  const double q = 1.0 - cum;
  if (q > 0.0 && lam < 1.0) {
    const double M = static_cast<double>(s.sojourn_pmf.size() - 1);
    mean += q * (M + 1.0 / (1.0 - lam));
  }
  s.mean_sojourn = ExtendedReal::finite(mean);
  return s;
}

PeakAoIResult peak_aoi(const ArrivalSpec& a, const macro::QoSClassTable& table) {
  a.validate();
  if (table.n_classes < 1 ||
      table.d.size() != static_cast<std::size_t>(table.n_classes))
    throw ParamError("peak_aoi: invalid class table");

  PeakAoIResult r;
  r.per_class.reserve(table.n_classes);
  const double interarrival = 1.0 / a.alpha;
  double mean_sum = 0.0;
  bool any_unstable = false;
  for (double dn : table.d) {
    if (a.alpha < dn) {
      const double w = mean_sojourn_closed(a, dn);
      r.per_class.push_back(ExtendedReal::finite(interarrival + w));
      mean_sum += w;
    } else {
      r.per_class.push_back(ExtendedReal::unbounded_marker());
      any_unstable = true;
    }
  }
  if (any_unstable)
    r.network = ExtendedReal::unbounded_marker();
  else
    r.network =
        ExtendedReal::finite(interarrival + mean_sum / table.n_classes);
  return r;
}

}  // namespace aoinet::microq
