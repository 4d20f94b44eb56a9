#include "aoinet.h"

#include <algorithm>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "coupler.hpp"
#include "errors.hpp"
#include "macro.hpp"
#include "microq.hpp"
#include "simnet.hpp"
#include "specfun.hpp"

struct aoinet_equilibrium {
  aoinet::coupler::EquilibriumSolution sol;
};

struct aoinet_sim_result {
  std::vector<aoinet::simnet::SimRecord> records;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

// Runs the body and maps the library's exception types onto status codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const aoinet::ParamError& e) {
    return fail(AOINET_ERR_PARAM, e.what());
  } catch (const aoinet::UnsupportedError& e) {
    return fail(AOINET_ERR_UNSUPPORTED, e.what());
  } catch (const aoinet::DegenerateDistribution& e) {
    return fail(AOINET_ERR_DEGENERATE, e.what());
  } catch (const aoinet::UnstableQueue& e) {
    return fail(AOINET_ERR_UNSTABLE, e.what());
  } catch (const aoinet::TopologyError& e) {
    return fail(AOINET_ERR_TOPOLOGY, e.what());
  } catch (const aoinet::NumericError& e) {
    return fail(AOINET_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(AOINET_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(AOINET_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* msg) {
  if (!ok) throw aoinet::ParamError(msg);
}

double as_double(const aoinet::microq::ExtendedReal& v) {
  return v.unbounded ? std::numeric_limits<double>::infinity() : v.value;
}

aoinet::macro::MetaMoments make_moments(double m1, double m2) {
  aoinet::macro::MetaMoments m;
  m.m1 = m1;
  m.m2 = m2;
  m.chi_used = 0.0;
  m.validate();
  return m;
}

aoinet::coupler::FixedPointConfig make_fp_config(
    const aoinet_fixed_point_config* cfg) {
  aoinet::coupler::FixedPointConfig out;
  if (cfg) {
    out.tol = cfg->tol;
    out.max_iters = cfg->max_iters;
    out.chi_init = cfg->chi_init;
    out.damping = cfg->damping;
  }
  return out;
}

// The quadrature settings used for every eps < 1 moment evaluated through
// this surface; matches what the equilibrium solver uses internally.
const aoinet::specfun::QuadratureSpec kMomentQuad{1e-9, 1e-11, 2000, 1e6};

aoinet::simnet::NetworkConfig make_net_config(const aoinet_sim_config* cfg) {
  require(cfg != nullptr, "simulate: cfg is NULL");
  aoinet::simnet::NetworkConfig out;
  out.bs_density = cfg->bs_density;
  out.area_side = cfg->area_side;
  out.alpha = cfg->alpha;
  out.theta = cfg->theta;
  out.eta = cfg->eta;
  out.eps = cfg->eps;
  out.rho = cfg->rho;
  out.n_slots_max = cfg->n_slots_max;
  out.warmup_window = cfg->warmup_window;
  out.steady_tol = cfg->steady_tol;
  out.seed = cfg->seed;
  out.n_realizations = cfg->n_realizations;
  return out;
}

}  // namespace

extern "C" {

const char* aoinet_version(void) { return "1.0.0"; }

const char* aoinet_last_error(void) { return g_last_error.c_str(); }

int aoinet_reg_inc_beta(double x, double a, double b, double* out) {
  return guarded([&] {
    require(out != nullptr, "reg_inc_beta: out is NULL");
    *out = aoinet::specfun::reg_inc_beta(x, a, b);
    return AOINET_OK;
  });
}

int aoinet_lower_inc_gamma(double a, double y, double* out) {
  return guarded([&] {
    require(out != nullptr, "lower_inc_gamma: out is NULL");
    *out = aoinet::specfun::lower_inc_gamma(a, y);
    return AOINET_OK;
  });
}

int aoinet_gauss_2f1(double a, double b, double c, double z, double* out) {
  return guarded([&] {
    require(out != nullptr, "gauss_2f1: out is NULL");
    *out = aoinet::specfun::gauss_2f1(a, b, c, z);
    return AOINET_OK;
  });
}

int aoinet_moment_closed_form(int b, double theta, double eta, double chi,
                              double* out) {
  return guarded([&] {
    require(out != nullptr, "moment_closed_form: out is NULL");
    *out = aoinet::macro::moment_closed_form(b, {theta, eta, 1.0, chi});
    return AOINET_OK;
  });
}

int aoinet_moment_closed_form_static(int b, double theta, double eta,
                                     double chi, double* out) {
  return guarded([&] {
    require(out != nullptr, "moment_closed_form_static: out is NULL");
    *out = aoinet::macro::moment_closed_form_static(b, {theta, eta, 1.0, chi});
    return AOINET_OK;
  });
}

int aoinet_moment_integral(int b, double theta, double eta, double eps,
                           double chi, double* out) {
  return guarded([&] {
    require(out != nullptr, "moment_integral: out is NULL");
    *out = aoinet::macro::moment_integral(b, {theta, eta, eps, chi},
                                          kMomentQuad);
    return AOINET_OK;
  });
}

int aoinet_meta_ccdf(double delta, double m1, double m2, double* out) {
  return guarded([&] {
    require(out != nullptr, "meta_ccdf: out is NULL");
    *out = aoinet::macro::meta_ccdf(delta, make_moments(m1, m2));
    return AOINET_OK;
  });
}

int aoinet_meta_ccdf_or_point(double delta, double m1, double m2,
                              double* out) {
  return guarded([&] {
    require(out != nullptr, "meta_ccdf_or_point: out is NULL");
    *out = aoinet::macro::meta_ccdf_or_point(delta, make_moments(m1, m2));
    return AOINET_OK;
  });
}

int aoinet_quantize(int n_classes, double m1, double m2, double* d,
                    double* boundaries) {
  return guarded([&] {
    require(d != nullptr, "quantize: d is NULL");
    const aoinet::macro::QoSClassTable table =
        aoinet::macro::quantize(n_classes, make_moments(m1, m2));
    std::copy(table.d.begin(), table.d.end(), d);
    if (boundaries)
      std::copy(table.boundaries.begin(), table.boundaries.end(), boundaries);
    return AOINET_OK;
  });
}

int aoinet_queue_steady_state(double alpha, double d, int* stable, double* x0,
                              double* ratio) {
  return guarded([&] {
    const aoinet::microq::ClassQueueStats s =
        aoinet::microq::steady_state({alpha}, d);
    if (stable) *stable = s.stable ? 1 : 0;
    if (x0) *x0 = s.x0;
    if (ratio) *ratio = s.ratio;
    return AOINET_OK;
  });
}

int aoinet_mean_sojourn(double alpha, double d, double* out) {
  return guarded([&] {
    require(out != nullptr, "mean_sojourn: out is NULL");
    *out = aoinet::microq::mean_sojourn_closed({alpha}, d);
    return AOINET_OK;
  });
}

int aoinet_sojourn_pmf(double alpha, double d, double truncation, double* out,
                       size_t cap, size_t* len) {
  return guarded([&] {
    require(len != nullptr, "sojourn_pmf: len is NULL");
    const std::vector<double> pmf =
        aoinet::microq::sojourn_pmf({alpha}, d, truncation);
    *len = pmf.size();
    if (out) std::copy_n(pmf.begin(), std::min(cap, pmf.size()), out);
    return AOINET_OK;
  });
}

int aoinet_peak_aoi(double alpha, const double* d, int n_classes,
                    double* per_class, double* network) {
  return guarded([&] {
    require(d != nullptr, "peak_aoi: d is NULL");
    require(network != nullptr, "peak_aoi: network is NULL");
    require(n_classes >= 1, "peak_aoi: n_classes must be >= 1");
    aoinet::macro::QoSClassTable table;
    table.n_classes = n_classes;
    table.d.assign(d, d + n_classes);
    const aoinet::microq::PeakAoIResult r =
        aoinet::microq::peak_aoi({alpha}, table);
    if (per_class)
      for (int i = 0; i < n_classes; ++i) per_class[i] = as_double(r.per_class[i]);
    *network = as_double(r.network);
    return AOINET_OK;
  });
}

void aoinet_fixed_point_config_default(aoinet_fixed_point_config* cfg) {
  if (!cfg) return;
  const aoinet::coupler::FixedPointConfig d;
  cfg->tol = d.tol;
  cfg->max_iters = d.max_iters;
  cfg->chi_init = d.chi_init;
  cfg->damping = d.damping;
}

int aoinet_solve(double alpha, double theta, double eta, double eps,
                 int n_classes, const aoinet_fixed_point_config* cfg,
                 aoinet_equilibrium** out) {
  return guarded([&] {
    require(out != nullptr, "solve: out is NULL");
    *out = nullptr;
    auto eq = std::make_unique<aoinet_equilibrium>();
    eq->sol = aoinet::coupler::solve({alpha}, {theta, eta, eps, 0.0},
                                     n_classes, make_fp_config(cfg));
    *out = eq.release();
    return AOINET_OK;
  });
}

double aoinet_equilibrium_chi(const aoinet_equilibrium* eq) {
  return eq ? eq->sol.chi : std::numeric_limits<double>::quiet_NaN();
}

int aoinet_equilibrium_converged(const aoinet_equilibrium* eq) {
  return eq && eq->sol.converged ? 1 : 0;
}

int aoinet_equilibrium_iterations(const aoinet_equilibrium* eq) {
  return eq ? eq->sol.iterations : 0;
}

void aoinet_equilibrium_moments(const aoinet_equilibrium* eq, double* m1,
                                double* m2) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (m1) *m1 = eq ? eq->sol.moments.m1 : nan;
  if (m2) *m2 = eq ? eq->sol.moments.m2 : nan;
}

int aoinet_equilibrium_class_count(const aoinet_equilibrium* eq) {
  return eq ? eq->sol.table.n_classes : 0;
}

int aoinet_equilibrium_class_row(const aoinet_equilibrium* eq, int index,
                                 double* d, int* stable, double* x0,
                                 double* mean_sojourn, double* peak_aoi) {
  return guarded([&] {
    require(eq != nullptr, "class_row: handle is NULL");
    require(index >= 0 && index < eq->sol.table.n_classes,
            "class_row: index out of range");
    const aoinet::microq::ClassQueueStats& s = eq->sol.per_class[index];
    if (d) *d = s.d;
    if (stable) *stable = s.stable ? 1 : 0;
    if (x0) *x0 = s.x0;
    if (mean_sojourn) *mean_sojourn = as_double(s.mean_sojourn);
    if (peak_aoi) *peak_aoi = as_double(eq->sol.aoi.per_class[index]);
    return AOINET_OK;
  });
}

double aoinet_equilibrium_network_peak(const aoinet_equilibrium* eq) {
  if (!eq) return std::numeric_limits<double>::quiet_NaN();
  return as_double(eq->sol.aoi.network);
}

int aoinet_equilibrium_ccdf(const aoinet_equilibrium* eq, const double* deltas,
                            size_t n, double* out) {
  return guarded([&] {
    require(eq != nullptr, "equilibrium_ccdf: handle is NULL");
    require(deltas != nullptr || n == 0, "equilibrium_ccdf: deltas is NULL");
    require(out != nullptr || n == 0, "equilibrium_ccdf: out is NULL");
    for (size_t i = 0; i < n; ++i)
      out[i] = aoinet::macro::meta_ccdf_or_point(deltas[i], eq->sol.moments);
    return AOINET_OK;
  });
}

size_t aoinet_equilibrium_trajectory(const aoinet_equilibrium* eq, double* out,
                                     size_t cap) {
  if (!eq) return 0;
  const std::vector<double>& t = eq->sol.trajectory;
  if (out) std::copy_n(t.begin(), std::min(cap, t.size()), out);
  return t.size();
}

void aoinet_equilibrium_free(aoinet_equilibrium* eq) { delete eq; }

int aoinet_stability_frontier(double theta, double eta, double eps,
                              int n_classes, const double* alpha_grid,
                              size_t n, const aoinet_fixed_point_config* cfg,
                              int* found, double* alpha_out) {
  return guarded([&] {
    require(alpha_grid != nullptr, "stability_frontier: alpha_grid is NULL");
    require(n > 0, "stability_frontier: empty alpha grid");
    require(found != nullptr, "stability_frontier: found is NULL");
    require(alpha_out != nullptr, "stability_frontier: alpha_out is NULL");
    const std::vector<double> grid(alpha_grid, alpha_grid + n);
    const aoinet::coupler::FrontierResult r = aoinet::coupler::stability_frontier(
        {theta, eta, eps, 0.0}, grid, n_classes, make_fp_config(cfg));
    *found = r.found ? 1 : 0;
    *alpha_out = r.alpha;
    return AOINET_OK;
  });
}

void aoinet_sim_config_default(aoinet_sim_config* cfg) {
  if (!cfg) return;
  const aoinet::simnet::NetworkConfig d;
  cfg->bs_density = d.bs_density;
  cfg->area_side = d.area_side;
  cfg->alpha = d.alpha;
  cfg->theta = d.theta;
  cfg->eta = d.eta;
  cfg->eps = d.eps;
  cfg->rho = d.rho;
  cfg->n_slots_max = d.n_slots_max;
  cfg->warmup_window = d.warmup_window;
  cfg->steady_tol = d.steady_tol;
  cfg->seed = d.seed;
  cfg->n_realizations = d.n_realizations;
}

int aoinet_simulate(const aoinet_sim_config* cfg, int jobs,
                    aoinet_sim_result** out) {
  return guarded([&] {
    require(out != nullptr, "simulate: out is NULL");
    *out = nullptr;
    auto res = std::make_unique<aoinet_sim_result>();
    res->records = aoinet::simnet::simulate(make_net_config(cfg), jobs);
    *out = res.release();
    return AOINET_OK;
  });
}

int aoinet_sim_realization_count(const aoinet_sim_result* res) {
  return res ? static_cast<int>(res->records.size()) : 0;
}

int aoinet_sim_realization_row(const aoinet_sim_result* res, int index,
                               int* steady, uint64_t* warmup_slots,
                               uint64_t* measured_slots, double* mean_sojourn,
                               double* network_peak, double* x0_hat) {
  return guarded([&] {
    require(res != nullptr, "realization_row: handle is NULL");
    require(index >= 0 && index < static_cast<int>(res->records.size()),
            "realization_row: index out of range");
    const aoinet::simnet::SimRecord& r = res->records[index];
    if (steady) *steady = r.steady ? 1 : 0;
    if (warmup_slots) *warmup_slots = r.warmup_slots;
    if (measured_slots) *measured_slots = r.measured_slots;
    if (mean_sojourn) *mean_sojourn = r.mean_sojourn;
    if (network_peak) *network_peak = r.network_peak;
    if (x0_hat) *x0_hat = r.x0_hat;
    return AOINET_OK;
  });
}

int aoinet_sim_ccdf(const aoinet_sim_result* res, const double* deltas,
                    size_t n, uint64_t min_attempts, double* out) {
  return guarded([&] {
    require(res != nullptr, "sim_ccdf: handle is NULL");
    require(deltas != nullptr || n == 0, "sim_ccdf: deltas is NULL");
    require(out != nullptr || n == 0, "sim_ccdf: out is NULL");
    const std::vector<double> grid(deltas, deltas + n);
    const aoinet::simnet::AggregateReport rep =
        aoinet::simnet::aggregate(res->records, grid, 1, min_attempts);
    std::copy(rep.ccdf.begin(), rep.ccdf.end(), out);
    return AOINET_OK;
  });
}

int aoinet_sim_summary(const aoinet_sim_result* res, uint64_t min_attempts,
                       double* mean_sojourn, double* network_peak,
                       uint64_t* devices_included, uint64_t* devices_excluded,
                       int* all_steady) {
  return guarded([&] {
    require(res != nullptr, "sim_summary: handle is NULL");
    const aoinet::simnet::AggregateReport rep =
        aoinet::simnet::aggregate(res->records, {0.5}, 1, min_attempts);
    if (mean_sojourn) *mean_sojourn = rep.mean_sojourn;
    if (network_peak) *network_peak = rep.network_peak;
    if (devices_included) *devices_included = rep.devices_included;
    if (devices_excluded) *devices_excluded = rep.devices_excluded;
    if (all_steady) *all_steady = rep.all_steady ? 1 : 0;
    return AOINET_OK;
  });
}

int aoinet_sim_class_rows(const aoinet_sim_result* res, int n_classes,
                          uint64_t min_attempts, double* mean_success,
                          double* mean_sojourn, double* peak,
                          uint64_t* devices) {
  return guarded([&] {
    require(res != nullptr, "sim_class_rows: handle is NULL");
    const aoinet::simnet::AggregateReport rep =
        aoinet::simnet::aggregate(res->records, {0.5}, n_classes, min_attempts);
    for (int i = 0; i < n_classes; ++i) {
      const aoinet::simnet::AggregateReport::ClassRow& row = rep.per_class[i];
      if (mean_success) mean_success[i] = row.mean_success;
      if (mean_sojourn) mean_sojourn[i] = row.mean_sojourn;
      if (peak) peak[i] = row.peak;
      if (devices) devices[i] = row.devices;
    }
    return AOINET_OK;
  });
}

void aoinet_sim_free(aoinet_sim_result* res) { delete res; }

}  // extern "C"
