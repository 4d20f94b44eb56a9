#ifndef AOINET_TESTS_DES_ORACLE_HPP
#define AOINET_TESTS_DES_ORACLE_HPP

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

namespace des_oracle {

struct GeoGeo1Result {
  // Occupancy counted after the slot's arrival joins, before service.
  std::vector<double> occupancy;
  // Histogram of per-packet system times (delivery - arrival + 1).
  std::vector<double> sojourn;
  double mean_sojourn = 0.0;
  std::uint64_t delivered = 0;
};

// Single-queue discrete-time simulation: per slot, a Bernoulli(alpha)
// arrival joins, then a non-empty queue serves its head with probability d.
inline GeoGeo1Result run_geo_geo1(double alpha, double d, std::uint64_t slots,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };

  GeoGeo1Result r;
  r.occupancy.assign(64, 0.0);
  r.sojourn.assign(64, 0.0);

  std::deque<std::uint64_t> queue;
  double sojourn_sum = 0.0;

  for (std::uint64_t t = 0; t < slots; ++t) {
    if (uniform() < alpha) queue.push_back(t);

    const std::size_t occ = queue.size();
    if (occ >= r.occupancy.size()) r.occupancy.resize(occ + 1, 0.0);
    r.occupancy[occ] += 1.0;

    if (!queue.empty() && uniform() < d) {
      const std::uint64_t sojourn = t - queue.front() + 1;
      queue.pop_front();
      if (sojourn >= r.sojourn.size()) r.sojourn.resize(sojourn + 1, 0.0);
      r.sojourn[sojourn] += 1.0;
      sojourn_sum += static_cast<double>(sojourn);
      ++r.delivered;
    }
  }

  for (double& v : r.occupancy) v /= static_cast<double>(slots);
  if (r.delivered > 0) {
    for (double& v : r.sojourn) v /= static_cast<double>(r.delivered);
    r.mean_sojourn = sojourn_sum / static_cast<double>(r.delivered);
  }
  return r;
}

// Total variation distance between a model PMF and an empirical one, padding
// the shorter tail with zeros.
inline double total_variation(const std::vector<double>& a,
                              const std::vector<double>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pa = i < a.size() ? a[i] : 0.0;
    const double pb = i < b.size() ? b[i] : 0.0;
    tv += pa > pb ? pa - pb : pb - pa;
  }
  return 0.5 * tv;
}

}  // namespace des_oracle

#endif  // AOINET_TESTS_DES_ORACLE_HPP
