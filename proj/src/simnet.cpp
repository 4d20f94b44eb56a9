#include "simnet.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <tuple>

#include "errors.hpp"

namespace aoinet::simnet {

namespace detail {

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t realization,
                             std::uint64_t purpose) {
  std::uint64_t z =
      master + 0x9e3779b97f4a7c15ULL * (2654435761ULL * realization + purpose + 1ULL);
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

double torus_distance(const Point& a, const Point& b, double side) {
  double dx = std::fabs(a.x - b.x);
  double dy = std::fabs(a.y - b.y);
  if (dx > side - dx) dx = side - dx;
  if (dy > side - dy) dy = side - dy;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace detail

namespace {

constexpr std::uint64_t kStreamTopology = 0;
constexpr std::uint64_t kStreamArrivals = 1;
constexpr std::uint64_t kStreamFading = 2;
constexpr std::uint64_t kStreamRealization = 3;
constexpr std::uint64_t kPlacementCap = 1000000;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exp_unit_mean(std::mt19937_64& rng) {
  return -std::log1p(-uniform01(rng));
}

int torus_nearest(const std::vector<Point>& bs, const Point& p, double side) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < bs.size(); ++b) {
    const double d = detail::torus_distance(bs[b], p, side);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(b);
    }
  }
  return best;
}

}  // namespace

void NetworkConfig::validate() const {
  if (!(bs_density > 0.0))
    throw ParamError("NetworkConfig: bs_density must be positive");
  if (!(area_side > 0.0))
    throw ParamError("NetworkConfig: area_side must be positive");
  if (!(area_side * area_side * bs_density >= 20.0))
    throw ParamError("NetworkConfig: expected BS count below 20");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ParamError("NetworkConfig: alpha outside [0,1]");
  if (!(theta > 0.0)) throw ParamError("NetworkConfig: theta must be positive");
  if (!(eta > 2.0)) throw ParamError("NetworkConfig: eta must exceed 2");
  if (!(eps > 0.0 && eps <= 1.0))
    throw ParamError("NetworkConfig: eps outside (0,1]");
  if (n_slots_max < 1)
    throw ParamError("NetworkConfig: n_slots_max must be >= 1");
  if (warmup_window < 1)
    throw ParamError("NetworkConfig: warmup_window must be >= 1");
  if (!(steady_tol > 0.0))
    throw ParamError("NetworkConfig: steady_tol must be positive");
  if (n_realizations < 1)
    throw ParamError("NetworkConfig: n_realizations must be >= 1");
}

SpatialRealization generate_topology(const NetworkConfig& cfg,
                                     std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(detail::substream_seed(seed, 0, kStreamTopology));
  const double side = cfg.area_side;

  std::poisson_distribution<int> bs_count(cfg.bs_density * side * side);
  int n = 0;
  while (n == 0) n = bs_count(rng);

  SpatialRealization topo;
  topo.bs_positions.resize(n);
  for (auto& p : topo.bs_positions) {
    p.x = uniform01(rng) * side;
    p.y = uniform01(rng) * side;
  }

  topo.device_positions.resize(n);
  topo.serving.resize(n);
  std::vector<char> filled(n, 0);
  int remaining = n;
  std::uint64_t since_last_fill = 0;
  while (remaining > 0) {
    Point p{uniform01(rng) * side, uniform01(rng) * side};
    const int b = torus_nearest(topo.bs_positions, p, side);
    if (!filled[b] &&
        detail::torus_distance(topo.bs_positions[b], p, side) > 0.0) {
      topo.device_positions[b] = p;
      topo.serving[b] = b;
      filled[b] = 1;
      --remaining;
      since_last_fill = 0;
    } else if (++since_last_fill > kPlacementCap) {
      throw TopologyError("device placement exhausted its rejection budget");
    }
  }

  topo.link_distance.resize(n);
  topo.tx_power_factor.resize(n);
  for (int i = 0; i < n; ++i) {
    topo.link_distance[i] = detail::torus_distance(
        topo.device_positions[i], topo.bs_positions[i], side);
    topo.tx_power_factor[i] =
        std::pow(topo.link_distance[i], cfg.eta * cfg.eps);
  }
  return topo;
}

SimRecord run_realization(const SpatialRealization& topo,
                          const NetworkConfig& cfg, std::uint64_t seed,
                          int trace_device, DeviceTrace* trace) {
  cfg.validate();
  const std::size_t n = topo.bs_positions.size();
  if (n == 0 || topo.device_positions.size() != n ||
      topo.serving.size() != n || topo.link_distance.size() != n ||
      topo.tx_power_factor.size() != n)
    throw TopologyError("inconsistent spatial realization");
  for (double r : topo.link_distance)
    if (!(r > 0.0)) throw TopologyError("zero-length serving link");

  std::mt19937_64 arr_rng(detail::substream_seed(seed, 0, kStreamArrivals));
  std::mt19937_64 fad_rng(detail::substream_seed(seed, 0, kStreamFading));

  // Received own-signal coefficient r^(eta(eps-1)) and the interference
  // coefficients r_i^(eta eps) * dist(i, b)^(-eta), fixed for the run.
  std::vector<double> signal(n);
  for (std::size_t i = 0; i < n; ++i)
    signal[i] = std::pow(topo.link_distance[i], cfg.eta * (cfg.eps - 1.0));
  std::vector<std::vector<double>> intf(n, std::vector<double>(n, 0.0));
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t i = 0; i < n; ++i)
      if (i != b)
        intf[b][i] =
            topo.tx_power_factor[i] /
            std::pow(detail::torus_distance(topo.device_positions[i],
                                            topo.bs_positions[b],
                                            cfg.area_side),
                     cfg.eta);

  SimRecord rec;
  rec.attempts.assign(n, 0);
  rec.successes.assign(n, 0);
  rec.busy_slots.assign(n, 0);
  rec.idle_slots.assign(n, 0);
  rec.sojourn_sum.assign(n, 0.0);
  rec.sojourn_count.assign(n, 0);
  rec.peak_sum.assign(n, 0.0);
  rec.peak_count.assign(n, 0);
  rec.success_prob.assign(n, std::numeric_limits<double>::quiet_NaN());
  rec.arrivals.assign(n, 0);
  rec.deliveries.assign(n, 0);
  rec.final_queue_len.assign(n, 0);

  if (trace != nullptr) {
    *trace = DeviceTrace{};
    trace->device = trace_device;
    if (trace_device < 0 || static_cast<std::size_t>(trace_device) >= n)
      throw ParamError("run_realization: trace device out of range");
  }

  std::vector<std::deque<std::int64_t>> queue(n);
  std::vector<std::uint64_t> aoi(n, 0);
  std::vector<char> has_delivered(n, 0);
  std::vector<char> active(n, 0);
  std::vector<char> success(n, 0);
  std::vector<double> own_fade(n, 0.0);

  std::int64_t t = 0;
  bool measuring = false;
  std::uint64_t window_idle = 0;
  std::uint64_t slots_in_window = 0;
  double prev_window_x0 = -1.0;
  std::uint64_t measured = 0;
  std::uint64_t idle_total = 0;

  while (true) {
    if (!measuring && rec.warmup_slots == cfg.n_slots_max) {
      measuring = true;  // warmup budget exhausted; rec.steady stays false
    }
    if (measuring && measured == cfg.n_slots_max) break;

    const bool trace_this =
        trace != nullptr;  // traces span warmup and measurement

    // Arrivals join at the slot start and may transmit this very slot.
    for (std::size_t i = 0; i < n; ++i) {
      const bool arrived = uniform01(arr_rng) < cfg.alpha;
      if (arrived) {
        queue[i].push_back(t);
        ++rec.arrivals[i];
      }
      active[i] = queue[i].empty() ? 0 : 1;
      if (trace_this && static_cast<int>(i) == trace_device) {
        trace->aoi.push_back(aoi[i]);
        trace->arrived.push_back(arrived ? 1 : 0);
        trace->attempted.push_back(active[i]);
      }
    }

    // Fades are drawn in fixed index order: own channels first, then each
    // receiving BS's interferers, so outcomes do not depend on layout.
    for (std::size_t i = 0; i < n; ++i)
      if (active[i]) own_fade[i] = exp_unit_mean(fad_rng);

    for (std::size_t b = 0; b < n; ++b) {
      success[b] = 0;
      if (!active[b]) continue;
      double denom = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (active[i] && i != b) denom += intf[b][i] * exp_unit_mean(fad_rng);
      const double num = signal[b] * own_fade[b];
      success[b] = (denom == 0.0 || num > cfg.theta * denom) ? 1 : 0;
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (measuring) {
        if (active[i]) {
          ++rec.busy_slots[i];
          ++rec.attempts[i];
        } else {
          ++rec.idle_slots[i];
          ++idle_total;
        }
      } else if (!active[i]) {
        ++window_idle;
      }

      std::int64_t delivered_generation = -1;
      if (success[i]) {
        const std::int64_t g = queue[i].front();
        queue[i].pop_front();
        ++rec.deliveries[i];
        delivered_generation = g;
        const std::uint64_t sojourn = static_cast<std::uint64_t>(t - g + 1);
        const std::uint64_t peak = aoi[i] + 1;
        if (measuring) {
          ++rec.successes[i];
          rec.sojourn_sum[i] += static_cast<double>(sojourn);
          ++rec.sojourn_count[i];
          if (has_delivered[i]) {
            rec.peak_sum[i] += static_cast<double>(peak);
            ++rec.peak_count[i];
          }
        }
        if (trace_this && static_cast<int>(i) == trace_device) {
          trace->sojourn_samples.push_back(sojourn);
          if (has_delivered[i]) trace->peak_samples.push_back(peak);
        }
        aoi[i] = static_cast<std::uint64_t>(t - g + 1);
        has_delivered[i] = 1;
      } else {
        ++aoi[i];
      }
      if (trace_this && static_cast<int>(i) == trace_device) {
        trace->delivered.push_back(success[i]);
        trace->delivered_generation.push_back(delivered_generation);
      }
    }

    ++t;
    if (measuring) {
      ++measured;
    } else {
      ++rec.warmup_slots;
      if (++slots_in_window == cfg.warmup_window) {
        const double x0 = static_cast<double>(window_idle) /
                          (static_cast<double>(n) * cfg.warmup_window);
        if (prev_window_x0 >= 0.0 &&
            std::fabs(x0 - prev_window_x0) < cfg.steady_tol) {
          rec.steady = true;
          measuring = true;
        }
        prev_window_x0 = x0;
        window_idle = 0;
        slots_in_window = 0;
      }
    }
  }

  rec.measured_slots = measured;
  double sojourn_total = 0.0, peak_total = 0.0;
  std::uint64_t sojourn_n = 0, peak_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rec.final_queue_len[i] = queue[i].size();
    if (rec.attempts[i] > 0)
      rec.success_prob[i] = static_cast<double>(rec.successes[i]) /
                            static_cast<double>(rec.attempts[i]);
    sojourn_total += rec.sojourn_sum[i];
    sojourn_n += rec.sojourn_count[i];
    peak_total += rec.peak_sum[i];
    peak_n += rec.peak_count[i];
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.mean_sojourn = sojourn_n > 0 ? sojourn_total / sojourn_n : nan;
  rec.network_peak = peak_n > 0 ? peak_total / peak_n : nan;
  rec.x0_hat = static_cast<double>(idle_total) /
               (static_cast<double>(n) * static_cast<double>(measured));
  return rec;
}

SimRecord run_realization(const SpatialRealization& topo,
                          const NetworkConfig& cfg, std::uint64_t seed) {
  return run_realization(topo, cfg, seed, -1, nullptr);
}

std::vector<SimRecord> simulate(const NetworkConfig& cfg, int jobs) {
  cfg.validate();
  if (jobs < 1) throw ParamError("simulate: jobs must be >= 1");

  const int n_real = cfg.n_realizations;
  std::vector<SimRecord> records(n_real);
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (int r = next.fetch_add(1); r < n_real; r = next.fetch_add(1)) {
      try {
        const SpatialRealization topo = generate_topology(
            cfg, detail::substream_seed(cfg.seed, r, kStreamTopology));
        SimRecord rec = run_realization(
            topo, cfg, detail::substream_seed(cfg.seed, r, kStreamRealization));
        rec.realization_index = r;
        records[r] = std::move(rec);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int pool = std::min(jobs, n_real);
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int w = 0; w < pool; ++w) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return records;
}

std::vector<double> empirical_ccdf(const std::vector<double>& probs,
                                   const std::vector<double>& delta_grid) {
  std::vector<double> valid;
  valid.reserve(probs.size());
  for (double p : probs)
    if (!std::isnan(p)) valid.push_back(p);

  std::vector<double> ccdf(delta_grid.size(),
                           std::numeric_limits<double>::quiet_NaN());
  if (valid.empty()) return ccdf;
  for (std::size_t j = 0; j < delta_grid.size(); ++j) {
    std::size_t above = 0;
    for (double p : valid)
      if (p > delta_grid[j]) ++above;
    ccdf[j] = static_cast<double>(above) / static_cast<double>(valid.size());
  }
  return ccdf;
}

AggregateReport aggregate(const std::vector<SimRecord>& records,
                          const std::vector<double>& delta_grid,
                          int n_classes, std::uint64_t min_attempts) {
  if (records.empty()) throw ParamError("aggregate: no records");
  if (n_classes < 1) throw ParamError("aggregate: n_classes must be >= 1");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  AggregateReport rep;

  // (success probability, device, realization); the device-major tie-break
  // keeps duplicated records pooling to the single-record result.
  struct Entry {
    double p;
    int device;
    int realization;
    const SimRecord* rec;
  };
  std::vector<Entry> entries;
  double sojourn_total = 0.0, peak_total = 0.0;
  std::uint64_t sojourn_n = 0, peak_n = 0;
  std::size_t excluded = 0;

  for (const SimRecord& rec : records) {
    rep.all_steady = rep.all_steady && rec.steady;
    for (std::size_t i = 0; i < rec.success_prob.size(); ++i) {
      if (rec.attempts[i] >= min_attempts && !std::isnan(rec.success_prob[i]))
        entries.push_back(
            {rec.success_prob[i], static_cast<int>(i), rec.realization_index,
             &rec});
      else
        ++excluded;
      sojourn_total += rec.sojourn_sum[i];
      sojourn_n += rec.sojourn_count[i];
      peak_total += rec.peak_sum[i];
      peak_n += rec.peak_count[i];
    }
  }

  rep.devices_included = entries.size();
  rep.devices_excluded = excluded;
  rep.mean_sojourn = sojourn_n > 0 ? sojourn_total / sojourn_n : nan;
  rep.network_peak = peak_n > 0 ? peak_total / peak_n : nan;

  rep.ccdf.assign(delta_grid.size(), nan);
  if (!entries.empty()) {
    for (std::size_t j = 0; j < delta_grid.size(); ++j) {
      std::size_t above = 0;
      for (const Entry& e : entries)
        if (e.p > delta_grid[j]) ++above;
      rep.ccdf[j] =
          static_cast<double>(above) / static_cast<double>(entries.size());
    }
  }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.p, a.device, a.realization) <
           std::tie(b.p, b.device, b.realization);
  });

  const std::size_t m = entries.size();
  rep.per_class.resize(n_classes);
  for (int g = 0; g < n_classes; ++g) {
    const std::size_t lo = m * g / n_classes;
    const std::size_t hi = m * (g + 1) / n_classes;
    AggregateReport::ClassRow& row = rep.per_class[g];
    row.devices = hi - lo;
    if (row.devices == 0) {
      row.mean_success = nan;
      row.mean_sojourn = nan;
      row.peak = nan;
      continue;
    }
    double p_sum = 0.0, s_sum = 0.0, pk_sum = 0.0;
    std::uint64_t s_n = 0, pk_n = 0;
    for (std::size_t k = lo; k < hi; ++k) {
      const Entry& e = entries[k];
      p_sum += e.p;
      s_sum += e.rec->sojourn_sum[e.device];
      s_n += e.rec->sojourn_count[e.device];
      pk_sum += e.rec->peak_sum[e.device];
      pk_n += e.rec->peak_count[e.device];
    }
    row.mean_success = p_sum / static_cast<double>(row.devices);
    row.mean_sojourn = s_n > 0 ? s_sum / s_n : nan;
    row.peak = pk_n > 0 ? pk_sum / pk_n : nan;
  }
  return rep;
}

}  // namespace aoinet::simnet
