#ifndef AOINET_SIMNET_HPP
#define AOINET_SIMNET_HPP

#include <cstdint>
#include <vector>

namespace aoinet::simnet {

struct NetworkConfig {
  double bs_density = 1.0;  // BS per km^2
  double area_side = 10.0;  // km
  double alpha = 0.25;      // arrival probability per slot
  double theta = 1.0;       // linear SIR threshold
  double eta = 4.0;         // path-loss exponent
  double eps = 1.0;         // path-loss compensation factor
  double rho = -90.0;       // power-control target, dBm; cancels in SIR
  std::uint64_t n_slots_max = 20000;   // measurement slots, also warmup cap
  std::uint64_t warmup_window = 1000;  // slots per steady-state check
  double steady_tol = 1e-3;
  std::uint64_t seed = 1;
  int n_realizations = 20;

  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct SpatialRealization {
  std::vector<Point> bs_positions;
  std::vector<Point> device_positions;  // exactly one per BS
  std::vector<int> serving;             // device -> BS, identity by construction
  std::vector<double> link_distance;    // torus distance to the serving BS
  std::vector<double> tx_power_factor;  // r^(eta*eps)
};

struct SimRecord {
  int realization_index = 0;
  bool steady = false;
  std::uint64_t warmup_slots = 0;
  std::uint64_t measured_slots = 0;

  // Per device, measurement phase only.
  std::vector<std::uint64_t> attempts;
  std::vector<std::uint64_t> successes;
  std::vector<std::uint64_t> busy_slots;
  std::vector<std::uint64_t> idle_slots;
  std::vector<double> sojourn_sum;
  std::vector<std::uint64_t> sojourn_count;
  std::vector<double> peak_sum;
  std::vector<std::uint64_t> peak_count;
  std::vector<double> success_prob;  // successes/attempts, NaN when no attempts

  // Per device, whole run; arrivals = deliveries + final_queue_len exactly.
  std::vector<std::uint64_t> arrivals;
  std::vector<std::uint64_t> deliveries;
  std::vector<std::uint64_t> final_queue_len;

  double mean_sojourn = 0.0;  // NaN when no deliveries were measured
  double network_peak = 0.0;  // NaN when no peak samples were measured
  double x0_hat = 0.0;        // measured idle fraction across devices
};

// Full per-slot log of one device, spanning warmup and measurement.
struct DeviceTrace {
  int device = -1;
  std::vector<std::uint64_t> aoi;  // age during each slot
  std::vector<std::uint8_t> arrived;
  std::vector<std::uint8_t> attempted;
  std::vector<std::uint8_t> delivered;
  std::vector<std::int64_t> delivered_generation;  // -1 on no delivery
  std::vector<std::uint64_t> sojourn_samples;
  std::vector<std::uint64_t> peak_samples;
};

struct AggregateReport {
  std::vector<double> ccdf;  // aligned with the delta grid passed in
  std::size_t devices_included = 0;
  std::size_t devices_excluded = 0;
  double mean_sojourn = 0.0;
  double network_peak = 0.0;

  struct ClassRow {
    double mean_success = 0.0;
    double mean_sojourn = 0.0;
    double peak = 0.0;
    std::size_t devices = 0;
  };
  std::vector<ClassRow> per_class;  // ascending success probability

  bool all_steady = true;
};

namespace detail {

// One independent engine seed per (realization, purpose). Purposes:
// 0 topology, 1 arrivals, 2 fading, 3 the realization's own identity that
// run_realization splits further.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t realization,
                             std::uint64_t purpose);

double torus_distance(const Point& a, const Point& b, double side);

}  // namespace detail

// Poisson number of BSs (resampled if zero) uniform on the square, one
// device per BS placed uniformly in its torus-Voronoi cell by rejection.
SpatialRealization generate_topology(const NetworkConfig& cfg,
                                     std::uint64_t seed);

// Slotted dynamics: arrivals join at the slot start, every non-empty queue
// transmits its head in the same slot, and success is decided by SIR against
// fresh unit-mean exponential fades. Statistics are collected after the
// windowed idle fraction settles within steady_tol; failing that within
// n_slots_max warmup slots leaves steady = false and measures anyway.
SimRecord run_realization(const SpatialRealization& topo,
                          const NetworkConfig& cfg, std::uint64_t seed,
                          int trace_device, DeviceTrace* trace);
SimRecord run_realization(const SpatialRealization& topo,
                          const NetworkConfig& cfg, std::uint64_t seed);

// n_realizations independent topology + dynamics runs, optionally spread
// over a worker pool; results are ordered by realization index regardless
// of scheduling.
std::vector<SimRecord> simulate(const NetworkConfig& cfg, int jobs = 1);

// Empirical complementary CDF of per-device success probabilities over the
// grid; NaN entries (devices without attempts) are skipped.
std::vector<double> empirical_ccdf(const std::vector<double>& probs,
                                   const std::vector<double>& delta_grid);

// Pools records: meta CCDF over devices with at least min_attempts
// attempts, overall sojourn and peak means over every recorded sample, and
// per-class rows formed by sorting devices into n_classes equal-size groups
// by empirical success probability.
AggregateReport aggregate(const std::vector<SimRecord>& records,
                          const std::vector<double>& delta_grid,
                          int n_classes, std::uint64_t min_attempts = 50);

}  // namespace aoinet::simnet

#endif  // AOINET_SIMNET_HPP
