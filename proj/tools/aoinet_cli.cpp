#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <limits>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "aoinet.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitGateFailed = 1;
constexpr int kExitNonConverged = 2;
constexpr int kExitParamError = 3;
constexpr int kExitRuntimeError = 4;

// User-facing input problems: bad flags, bad config, refused comparisons.
class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_real(const std::string& tok, const std::string& what) {
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "-inf") return -std::numeric_limits<double>::infinity();
  if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw CliError(what + ": cannot parse '" + tok + "' as a number");
  }
  if (pos != tok.size())
    throw CliError(what + ": trailing characters in '" + tok + "'");
  return v;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// "start:stop:step" with a positive step, endpoints inclusive.
std::vector<double> parse_grid(const std::string& s, const std::string& what) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  if (parts.size() != 3)
    throw CliError(what + ": expected start:stop:step, got '" + s + "'");
  const double start = parse_real(parts[0], what);
  const double stop = parse_real(parts[1], what);
  const double step = parse_real(parts[2], what);
  if (!(std::isfinite(start) && std::isfinite(stop) && std::isfinite(step)))
    throw CliError(what + ": grid endpoints must be finite");
  if (!(step > 0.0)) throw CliError(what + ": step must be positive");
  if (stop < start - 1e-12)
    throw CliError(what + ": stop must not precede start");
  const double span = (stop - start) / step;
  if (span > 200000.0) throw CliError(what + ": grid too large");
  const std::size_t n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    out.push_back(start + static_cast<double>(k) * step);
  return out;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_real(tok, what));
  if (out.empty()) throw CliError(what + ": empty list");
  return out;
}

std::string iso_utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw CliError("cannot create directory " + p.string());
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw CliError("cannot open " + p.string() + " for writing");
  out << content;
  if (!out) throw CliError("failed writing " + p.string());
}

// JSON has no infinity; unbounded and undefined values travel as strings.
json jnum(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

double jget_real(const json& j, const std::string& key,
                 const std::string& where) {
  if (!j.contains(key)) throw CliError(where + ": missing key '" + key + "'");
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_real(v.get<std::string>(), where + "." + key);
  throw CliError(where + ": key '" + key + "' is not a number");
}

void check_api(int rc) {
  if (rc == AOINET_OK) return;
  const std::string msg = aoinet_last_error();
  if (rc == AOINET_ERR_PARAM) throw CliError(msg);
  throw std::runtime_error(msg);
}

json load_json_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CliError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw CliError(p.string() + ": " + e.what());
  }
}

const std::vector<std::string> kConfigKeys = {
    "alpha",       "theta",       "theta_db",      "eta",
    "eps",         "classes",     "tol",           "max_iters",
    "chi_init",    "damping",     "delta_grid",    "bs_density",
    "area_side",   "slots",       "realizations",  "warmup_window",
    "steady_tol",  "min_attempts", "seed",         "jobs",
    "out",         "alpha_grid",  "theta_db_list", "ccdf_tol",
    "peak_tol",    "sojourn_tol", "analysis",      "simulation"};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  const json cfg = load_json_file(path);
  if (!cfg.is_object()) throw CliError(path + ": config must be a JSON object");
  for (const auto& item : cfg.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), item.key()) ==
        kConfigKeys.end())
      throw CliError(path + ": unknown config key '" + item.key() + "'");
  }
  return cfg;
}

template <typename T>
T resolved(const CLI::Option* opt, const T& flag_value, const json& cfg,
           const char* key, const T& fallback) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  if (cfg.contains(key)) {
    try {
      return cfg.at(key).get<T>();
    } catch (const json::exception&) {
      throw CliError(std::string("config key '") + key + "' has the wrong type");
    }
  }
  return fallback;
}

double resolve_theta(const CLI::Option* theta_opt, double theta_flag,
                     const CLI::Option* db_opt, double db_flag,
                     const json& cfg) {
  if (theta_opt->count() > 0) return theta_flag;
  if (db_opt->count() > 0) return db_to_linear(db_flag);
  const bool has_linear = cfg.contains("theta");
  const bool has_db = cfg.contains("theta_db");
  if (has_linear && has_db)
    throw CliError("config sets both theta and theta_db");
  if (has_linear) return cfg.at("theta").get<double>();
  if (has_db) return db_to_linear(cfg.at("theta_db").get<double>());
  return 1.0;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& params, const std::vector<std::string>& outputs,
                    const std::string& started) {
  json m;
  m["command"] = command;
  m["version"] = aoinet_version();
  m["started_utc"] = started;
  m["finished_utc"] = iso_utc_now();
  m["params"] = params;
  m["outputs"] = outputs;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

struct EquilibriumGuard {
  aoinet_equilibrium* eq = nullptr;
  ~EquilibriumGuard() { aoinet_equilibrium_free(eq); }
};

struct SimGuard {
  aoinet_sim_result* res = nullptr;
  ~SimGuard() { aoinet_sim_free(res); }
};

// ---- analyze ----

struct AnalyzeOpts {
  std::string config, out = ".", delta_grid = "0.01:0.99:0.01";
  double alpha = 0.25, theta = 1.0, theta_db = 0.0, eta = 4.0, eps = 1.0;
  double tol = 1e-8, chi_init = 1.0, damping = 1.0;
  int classes = 10, max_iters = 2000, jobs = 1;
  std::uint64_t seed = 1;
  CLI::Option *o_alpha = nullptr, *o_theta = nullptr, *o_theta_db = nullptr,
              *o_eta = nullptr, *o_eps = nullptr, *o_classes = nullptr,
              *o_tol = nullptr, *o_max_iters = nullptr, *o_chi_init = nullptr,
              *o_damping = nullptr, *o_delta_grid = nullptr, *o_out = nullptr;
};

int run_analyze(const AnalyzeOpts& a) {
  const std::string started = iso_utc_now();
  const json cfg = load_config(a.config);
  const double alpha = resolved(a.o_alpha, a.alpha, cfg, "alpha", 0.25);
  const double theta =
      resolve_theta(a.o_theta, a.theta, a.o_theta_db, a.theta_db, cfg);
  const double eta = resolved(a.o_eta, a.eta, cfg, "eta", 4.0);
  const double eps = resolved(a.o_eps, a.eps, cfg, "eps", 1.0);
  const int classes = resolved(a.o_classes, a.classes, cfg, "classes", 10);
  const double tol = resolved(a.o_tol, a.tol, cfg, "tol", 1e-8);
  const int max_iters =
      resolved(a.o_max_iters, a.max_iters, cfg, "max_iters", 2000);
  const double chi_init =
      resolved(a.o_chi_init, a.chi_init, cfg, "chi_init", 1.0);
  const double damping = resolved(a.o_damping, a.damping, cfg, "damping", 1.0);
  const std::string grid_spec = resolved(a.o_delta_grid, a.delta_grid, cfg,
                                         "delta_grid",
                                         std::string("0.01:0.99:0.01"));
  const fs::path out =
      resolved(a.o_out, a.out, cfg, "out", std::string("."));

  const std::vector<double> deltas = parse_grid(grid_spec, "--delta-grid");
  ensure_dir(out);

  const aoinet_fixed_point_config fp{tol, max_iters, chi_init, damping};
  EquilibriumGuard g;
  check_api(aoinet_solve(alpha, theta, eta, eps, classes, &fp, &g.eq));

  std::ostringstream eq_csv;
  eq_csv << "class,d,stable,x0,mean_sojourn,peak_aoi\n";
  for (int k = 0; k < classes; ++k) {
    double d = 0.0, x0 = 0.0, sojourn = 0.0, peak = 0.0;
    int stable = 0;
    check_api(aoinet_equilibrium_class_row(g.eq, k, &d, &stable, &x0, &sojourn,
                                           &peak));
    eq_csv << (k + 1) << ',' << fmt(d) << ',' << stable << ',' << fmt(x0)
           << ',' << fmt(sojourn) << ',' << fmt(peak) << '\n';
  }
  write_text(out / "equilibrium.csv", eq_csv.str());

  std::vector<double> ccdf(deltas.size(), 0.0);
  check_api(
      aoinet_equilibrium_ccdf(g.eq, deltas.data(), deltas.size(), ccdf.data()));
  std::ostringstream ccdf_csv;
  ccdf_csv << "delta,ccdf\n";
  for (std::size_t i = 0; i < deltas.size(); ++i)
    ccdf_csv << fmt(deltas[i]) << ',' << fmt(ccdf[i]) << '\n';
  write_text(out / "ccdf.csv", ccdf_csv.str());

  const std::size_t traj_len = aoinet_equilibrium_trajectory(g.eq, nullptr, 0);
  std::vector<double> traj(traj_len, 0.0);
  aoinet_equilibrium_trajectory(g.eq, traj.data(), traj_len);
  std::ostringstream traj_csv;
  traj_csv << "iter,chi\n";
  for (std::size_t i = 0; i < traj_len; ++i)
    traj_csv << i << ',' << fmt(traj[i]) << '\n';
  write_text(out / "trajectory.csv", traj_csv.str());

  const bool converged = aoinet_equilibrium_converged(g.eq) != 0;
  const double peak = aoinet_equilibrium_network_peak(g.eq);
  const double sojourn =
      std::isinf(peak) ? peak : peak - 1.0 / alpha;
  double m1 = 0.0, m2 = 0.0;
  aoinet_equilibrium_moments(g.eq, &m1, &m2);

  json summary;
  summary["alpha"] = alpha;
  summary["theta"] = theta;
  summary["chi"] = aoinet_equilibrium_chi(g.eq);
  summary["converged"] = converged;
  summary["iterations"] = aoinet_equilibrium_iterations(g.eq);
  summary["m1"] = m1;
  summary["m2"] = m2;
  summary["classes"] = classes;
  summary["network_mean_sojourn"] = jnum(sojourn);
  summary["network_peak_aoi"] = jnum(peak);
  write_text(out / "summary.json", summary.dump(2) + "\n");

  json params;
  params["alpha"] = alpha;
  params["theta"] = theta;
  params["eta"] = eta;
  params["eps"] = eps;
  params["classes"] = classes;
  params["tol"] = tol;
  params["max_iters"] = max_iters;
  params["chi_init"] = chi_init;
  params["damping"] = damping;
  params["delta_grid"] = grid_spec;
  write_manifest(out, "analyze", params,
                 {"equilibrium.csv", "ccdf.csv", "trajectory.csv",
                  "summary.json"},
                 started);

  if (!converged) {
    std::fprintf(stderr,
                 "analyze: fixed point did not converge within %d iterations "
                 "(last chi %s); trajectory written\n",
                 max_iters, fmt(traj.empty() ? 0.0 : traj.back()).c_str());
    return kExitNonConverged;
  }
  std::printf("chi %s after %d iterations; network peak AoI %s\n",
              fmt(aoinet_equilibrium_chi(g.eq)).c_str(),
              aoinet_equilibrium_iterations(g.eq), fmt(peak).c_str());
  return kExitOk;
}

// ---- simulate ----

struct SimulateOpts {
  std::string config, out = ".", delta_grid = "0.01:0.99:0.01";
  double alpha = 0.25, theta = 1.0, theta_db = 0.0, eta = 4.0, eps = 1.0;
  double bs_density = 1.0, area_side = 10.0, steady_tol = 1e-3, tol = 1e-8;
  int classes = 10, jobs = 1;
  std::uint64_t slots = 20000, realizations = 20, warmup_window = 1000,
                min_attempts = 50, seed = 1;
  CLI::Option *o_alpha = nullptr, *o_theta = nullptr, *o_theta_db = nullptr,
              *o_eta = nullptr, *o_eps = nullptr, *o_classes = nullptr,
              *o_bs_density = nullptr, *o_area_side = nullptr,
              *o_slots = nullptr, *o_realizations = nullptr,
              *o_warmup = nullptr, *o_steady_tol = nullptr,
              *o_min_attempts = nullptr, *o_seed = nullptr, *o_jobs = nullptr,
              *o_delta_grid = nullptr, *o_out = nullptr;
};

int run_simulate(const SimulateOpts& s) {
  const std::string started = iso_utc_now();
  const json cfg = load_config(s.config);
  const double alpha = resolved(s.o_alpha, s.alpha, cfg, "alpha", 0.25);
  const double theta =
      resolve_theta(s.o_theta, s.theta, s.o_theta_db, s.theta_db, cfg);
  const double eta = resolved(s.o_eta, s.eta, cfg, "eta", 4.0);
  const double eps = resolved(s.o_eps, s.eps, cfg, "eps", 1.0);
  const int classes = resolved(s.o_classes, s.classes, cfg, "classes", 10);
  const double bs_density =
      resolved(s.o_bs_density, s.bs_density, cfg, "bs_density", 1.0);
  const double area_side =
      resolved(s.o_area_side, s.area_side, cfg, "area_side", 10.0);
  const std::uint64_t slots =
      resolved(s.o_slots, s.slots, cfg, "slots", std::uint64_t{20000});
  const std::uint64_t realizations = resolved(
      s.o_realizations, s.realizations, cfg, "realizations", std::uint64_t{20});
  const std::uint64_t warmup = resolved(s.o_warmup, s.warmup_window, cfg,
                                        "warmup_window", std::uint64_t{1000});
  const double steady_tol =
      resolved(s.o_steady_tol, s.steady_tol, cfg, "steady_tol", 1e-3);
  const std::uint64_t min_attempts = resolved(
      s.o_min_attempts, s.min_attempts, cfg, "min_attempts", std::uint64_t{50});
  const std::uint64_t seed =
      resolved(s.o_seed, s.seed, cfg, "seed", std::uint64_t{1});
  const int jobs = resolved(s.o_jobs, s.jobs, cfg, "jobs", 1);
  const std::string grid_spec = resolved(s.o_delta_grid, s.delta_grid, cfg,
                                         "delta_grid",
                                         std::string("0.01:0.99:0.01"));
  const fs::path out =
      resolved(s.o_out, s.out, cfg, "out", std::string("."));

  const std::vector<double> deltas = parse_grid(grid_spec, "--delta-grid");
  if (realizations < 1 || realizations > 1000000)
    throw CliError("simulate: --realizations outside [1, 1e6]");
  ensure_dir(out);

  aoinet_sim_config net;
  aoinet_sim_config_default(&net);
  net.bs_density = bs_density;
  net.area_side = area_side;
  net.alpha = alpha;
  net.theta = theta;
  net.eta = eta;
  net.eps = eps;
  net.n_slots_max = slots;
  net.warmup_window = warmup;
  net.steady_tol = steady_tol;
  net.seed = seed;
  net.n_realizations = static_cast<int>(realizations);

  SimGuard g;
  check_api(aoinet_simulate(&net, jobs, &g.res));

  const int n_real = aoinet_sim_realization_count(g.res);
  std::ostringstream real_csv;
  real_csv << "realization,steady,warmup_slots,measured_slots,mean_sojourn,"
              "network_peak,x0_hat\n";
  for (int r = 0; r < n_real; ++r) {
    int steady = 0;
    std::uint64_t warm = 0, meas = 0;
    double sojourn = 0.0, peak = 0.0, x0 = 0.0;
    check_api(aoinet_sim_realization_row(g.res, r, &steady, &warm, &meas,
                                         &sojourn, &peak, &x0));
    real_csv << r << ',' << steady << ',' << warm << ',' << meas << ','
             << fmt(sojourn) << ',' << fmt(peak) << ',' << fmt(x0) << '\n';
  }
  write_text(out / "realizations.csv", real_csv.str());

  std::vector<double> ccdf(deltas.size(), 0.0);
  check_api(aoinet_sim_ccdf(g.res, deltas.data(), deltas.size(), min_attempts,
                            ccdf.data()));
  std::ostringstream ccdf_csv;
  ccdf_csv << "delta,ccdf\n";
  for (std::size_t i = 0; i < deltas.size(); ++i)
    ccdf_csv << fmt(deltas[i]) << ',' << fmt(ccdf[i]) << '\n';
  write_text(out / "ccdf.csv", ccdf_csv.str());

  std::vector<double> succ(classes, 0.0), soj(classes, 0.0), peak(classes, 0.0);
  std::vector<std::uint64_t> devices(classes, 0);
  check_api(aoinet_sim_class_rows(g.res, classes, min_attempts, succ.data(),
                                  soj.data(), peak.data(), devices.data()));
  std::ostringstream class_csv;
  class_csv << "class,mean_success,mean_sojourn,peak_aoi,devices\n";
  for (int k = 0; k < classes; ++k)
    class_csv << (k + 1) << ',' << fmt(succ[k]) << ',' << fmt(soj[k]) << ','
              << fmt(peak[k]) << ',' << devices[k] << '\n';
  write_text(out / "classes.csv", class_csv.str());

  double mean_sojourn = 0.0, network_peak = 0.0;
  std::uint64_t included = 0, excluded = 0;
  int all_steady = 0;
  check_api(aoinet_sim_summary(g.res, min_attempts, &mean_sojourn,
                               &network_peak, &included, &excluded,
                               &all_steady));

  json summary;
  summary["alpha"] = alpha;
  summary["theta"] = theta;
  summary["realizations"] = n_real;
  summary["mean_sojourn"] = jnum(mean_sojourn);
  summary["network_peak_aoi"] = jnum(network_peak);
  summary["devices_included"] = included;
  summary["devices_excluded"] = excluded;
  summary["all_steady"] = all_steady != 0;
  write_text(out / "summary.json", summary.dump(2) + "\n");

  json params;
  params["alpha"] = alpha;
  params["theta"] = theta;
  params["eta"] = eta;
  params["eps"] = eps;
  params["classes"] = classes;
  params["bs_density"] = bs_density;
  params["area_side"] = area_side;
  params["slots"] = slots;
  params["realizations"] = realizations;
  params["warmup_window"] = warmup;
  params["steady_tol"] = steady_tol;
  params["min_attempts"] = min_attempts;
  params["seed"] = seed;
  params["jobs"] = jobs;
  params["delta_grid"] = grid_spec;
  write_manifest(out, "simulate", params,
                 {"realizations.csv", "ccdf.csv", "classes.csv",
                  "summary.json"},
                 started);

  std::printf(
      "%d realizations; network peak AoI %s; %" PRIu64 " devices pooled\n",
      n_real, fmt(network_peak).c_str(), included);
  return kExitOk;
}

// ---- compare ----

struct CompareOpts {
  std::string config, out = ".", analysis, simulation;
  double ccdf_tol = 0.05, peak_tol = 0.05, sojourn_tol = 0.0;
  CLI::Option *o_analysis = nullptr, *o_simulation = nullptr,
              *o_ccdf_tol = nullptr, *o_peak_tol = nullptr,
              *o_sojourn_tol = nullptr, *o_out = nullptr;
};

std::vector<std::pair<double, double>> read_ccdf_csv(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CliError("cannot open " + p.string());
  std::string line;
  if (!std::getline(in, line) || line != "delta,ccdf")
    throw CliError(p.string() + ": expected header 'delta,ccdf'");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw CliError(p.string() + ": malformed row '" + line + "'");
    rows.emplace_back(parse_real(line.substr(0, comma), p.string()),
                      parse_real(line.substr(comma + 1), p.string()));
  }
  if (rows.empty()) throw CliError(p.string() + ": no data rows");
  return rows;
}

int run_compare(const CompareOpts& c) {
  const std::string started = iso_utc_now();
  const json cfg = load_config(c.config);
  const std::string analysis_dir =
      resolved(c.o_analysis, c.analysis, cfg, "analysis", std::string());
  const std::string simulation_dir =
      resolved(c.o_simulation, c.simulation, cfg, "simulation", std::string());
  if (analysis_dir.empty()) throw CliError("compare: --analysis is required");
  if (simulation_dir.empty())
    throw CliError("compare: --simulation is required");
  const double ccdf_tol =
      resolved(c.o_ccdf_tol, c.ccdf_tol, cfg, "ccdf_tol", 0.05);
  const double peak_tol =
      resolved(c.o_peak_tol, c.peak_tol, cfg, "peak_tol", 0.05);
  const bool gate_sojourn =
      (c.o_sojourn_tol && c.o_sojourn_tol->count() > 0) ||
      cfg.contains("sojourn_tol");
  const double sojourn_tol =
      resolved(c.o_sojourn_tol, c.sojourn_tol, cfg, "sojourn_tol", 0.0);
  const fs::path out =
      resolved(c.o_out, c.out, cfg, "out", std::string("."));

  const fs::path a_dir(analysis_dir), s_dir(simulation_dir);
  const json a_manifest = load_json_file(a_dir / "manifest.json");
  const json s_manifest = load_json_file(s_dir / "manifest.json");
  const json& ap = a_manifest.at("params");
  const json& sp = s_manifest.at("params");

  // The physical model and the evaluation grid must agree before any
  // numbers are compared.
  std::vector<std::string> mismatches;
  for (const char* key : {"alpha", "theta", "eta", "eps"}) {
    const double av = jget_real(ap, key, "analysis manifest");
    const double sv = jget_real(sp, key, "simulation manifest");
    if (std::abs(av - sv) > 1e-12 * std::max(1.0, std::abs(sv)))
      mismatches.push_back(std::string(key) + ": analysis=" + fmt(av) +
                           " simulation=" + fmt(sv));
  }
  {
    const std::string ag = ap.value("delta_grid", std::string("<missing>"));
    const std::string sg = sp.value("delta_grid", std::string("<missing>"));
    if (ag != sg)
      mismatches.push_back("delta_grid: analysis=" + ag + " simulation=" + sg);
  }
  if (!mismatches.empty()) {
    std::fprintf(stderr, "compare: parameter mismatch between reports\n");
    for (const std::string& m : mismatches)
      std::fprintf(stderr, "  %s\n", m.c_str());
    return kExitParamError;
  }

  const auto model = read_ccdf_csv(a_dir / "ccdf.csv");
  const auto sim = read_ccdf_csv(s_dir / "ccdf.csv");
  if (model.size() != sim.size())
    throw CliError("compare: CCDF row counts differ");

  ensure_dir(out);
  std::ostringstream agree_csv;
  agree_csv << "delta,model_ccdf,sim_ccdf,gap\n";
  double sup = 0.0, sup_delta = 0.0;
  bool gaps_defined = true;
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (std::abs(model[i].first - sim[i].first) > 1e-9)
      throw CliError("compare: CCDF grids differ at row " + std::to_string(i));
    const double gap = std::abs(model[i].second - sim[i].second);
    if (std::isnan(gap)) gaps_defined = false;
    if (gap > sup) {
      sup = gap;
      sup_delta = model[i].first;
    }
    agree_csv << fmt(model[i].first) << ',' << fmt(model[i].second) << ','
              << fmt(sim[i].second) << ',' << fmt(gap) << '\n';
  }
  write_text(out / "agreement.csv", agree_csv.str());

  const json a_summary = load_json_file(a_dir / "summary.json");
  const json s_summary = load_json_file(s_dir / "summary.json");
  const double model_peak =
      jget_real(a_summary, "network_peak_aoi", "analysis summary");
  const double sim_peak =
      jget_real(s_summary, "network_peak_aoi", "simulation summary");
  const double model_sojourn =
      jget_real(a_summary, "network_mean_sojourn", "analysis summary");
  const double sim_sojourn =
      jget_real(s_summary, "mean_sojourn", "simulation summary");

  const auto rel_err = [](double reference, double value) {
    if (!std::isfinite(reference) || !std::isfinite(value))
      return std::numeric_limits<double>::infinity();
    return std::abs(value - reference) / std::abs(reference);
  };
  const double peak_err = rel_err(model_peak, sim_peak);
  const double sojourn_err = rel_err(model_sojourn, sim_sojourn);

  const bool ccdf_pass = gaps_defined && sup <= ccdf_tol;
  const bool peak_pass = peak_err <= peak_tol;
  const bool sojourn_pass = !gate_sojourn || sojourn_err <= sojourn_tol;
  const bool pass = ccdf_pass && peak_pass && sojourn_pass;

  json summary;
  summary["ccdf_sup_norm"] = jnum(gaps_defined
                                      ? sup
                                      : std::numeric_limits<double>::quiet_NaN());
  summary["ccdf_sup_delta"] = sup_delta;
  summary["ccdf_tol"] = ccdf_tol;
  summary["ccdf_pass"] = ccdf_pass;
  summary["peak_rel_err"] = jnum(peak_err);
  summary["peak_tol"] = peak_tol;
  summary["peak_pass"] = peak_pass;
  summary["sojourn_rel_err"] = jnum(sojourn_err);
  if (gate_sojourn) {
    summary["sojourn_tol"] = sojourn_tol;
    summary["sojourn_pass"] = sojourn_pass;
  }
  summary["pass"] = pass;
  write_text(out / "summary.json", summary.dump(2) + "\n");

  json params;
  params["analysis"] = analysis_dir;
  params["simulation"] = simulation_dir;
  params["ccdf_tol"] = ccdf_tol;
  params["peak_tol"] = peak_tol;
  if (gate_sojourn) params["sojourn_tol"] = sojourn_tol;
  params["alpha"] = ap.at("alpha");
  params["theta"] = ap.at("theta");
  params["eta"] = ap.at("eta");
  params["eps"] = ap.at("eps");
  params["delta_grid"] = ap.at("delta_grid");
  write_manifest(out, "compare", params, {"agreement.csv", "summary.json"},
                 started);

  std::printf("CCDF sup-norm %s at delta %s (tol %s) %s\n",
              fmt(gaps_defined ? sup
                               : std::numeric_limits<double>::quiet_NaN())
                  .c_str(),
              fmt(sup_delta).c_str(), fmt(ccdf_tol).c_str(),
              ccdf_pass ? "PASS" : "FAIL");
  std::printf("peak AoI rel err %s (tol %s) %s\n", fmt(peak_err).c_str(),
              fmt(peak_tol).c_str(), peak_pass ? "PASS" : "FAIL");
  if (gate_sojourn)
    std::printf("mean sojourn rel err %s (tol %s) %s\n",
                fmt(sojourn_err).c_str(), fmt(sojourn_tol).c_str(),
                sojourn_pass ? "PASS" : "FAIL");
  else
    std::printf("mean sojourn rel err %s (not gated)\n",
                fmt(sojourn_err).c_str());
  return pass ? kExitOk : kExitGateFailed;
}

// ---- sweep ----

struct SweepOpts {
  std::string config, out = ".", alpha_grid, theta_db_list;
  double eta = 4.0, eps = 1.0, tol = 1e-8, damping = 1.0;
  int classes = 10, max_iters = 2000, jobs = 1;
  CLI::Option *o_alpha_grid = nullptr, *o_theta_db_list = nullptr,
              *o_eta = nullptr, *o_eps = nullptr, *o_classes = nullptr,
              *o_tol = nullptr, *o_max_iters = nullptr, *o_damping = nullptr,
              *o_jobs = nullptr, *o_out = nullptr;
};

int run_sweep(const SweepOpts& w) {
  const std::string started = iso_utc_now();
  const json cfg = load_config(w.config);
  const std::string grid_spec =
      resolved(w.o_alpha_grid, w.alpha_grid, cfg, "alpha_grid", std::string());
  const std::string theta_spec = resolved(w.o_theta_db_list, w.theta_db_list,
                                          cfg, "theta_db_list", std::string());
  if (grid_spec.empty()) throw CliError("sweep: --alpha-grid is required");
  if (theta_spec.empty()) throw CliError("sweep: --theta-db-list is required");
  const double eta = resolved(w.o_eta, w.eta, cfg, "eta", 4.0);
  const double eps = resolved(w.o_eps, w.eps, cfg, "eps", 1.0);
  const int classes = resolved(w.o_classes, w.classes, cfg, "classes", 10);
  const double tol = resolved(w.o_tol, w.tol, cfg, "tol", 1e-8);
  const int max_iters =
      resolved(w.o_max_iters, w.max_iters, cfg, "max_iters", 2000);
  const double damping = resolved(w.o_damping, w.damping, cfg, "damping", 1.0);
  const int jobs = resolved(w.o_jobs, w.jobs, cfg, "jobs", 1);
  const fs::path out =
      resolved(w.o_out, w.out, cfg, "out", std::string("."));
  if (jobs < 1) throw CliError("sweep: --jobs must be >= 1");

  const std::vector<double> alphas = parse_grid(grid_spec, "--alpha-grid");
  const std::vector<double> theta_dbs =
      parse_list(theta_spec, "--theta-db-list");
  ensure_dir(out);

  struct Point {
    double theta_db;
    double alpha;
  };
  std::vector<Point> points;
  points.reserve(theta_dbs.size() * alphas.size());
  for (double tdb : theta_dbs)
    for (double alpha : alphas) points.push_back({tdb, alpha});

  struct Row {
    double peak = 0.0;
    double sojourn = 0.0;
    bool all_stable = false;
    bool converged = false;
    int rc = AOINET_OK;
    std::string error;
  };
  std::vector<Row> rows(points.size());

  // Every point starts from chi_init = 0, the maximal-interference branch,
  // so "all classes stable" is a pessimistic claim.
  const aoinet_fixed_point_config fp{tol, max_iters, 0.0, damping};
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < points.size();
         i = next.fetch_add(1)) {
      Row& row = rows[i];
      aoinet_equilibrium* eq = nullptr;
      row.rc = aoinet_solve(points[i].alpha, db_to_linear(points[i].theta_db),
                            eta, eps, classes, &fp, &eq);
      if (row.rc != AOINET_OK) {
        row.error = aoinet_last_error();
        continue;
      }
      row.converged = aoinet_equilibrium_converged(eq) != 0;
      row.peak = aoinet_equilibrium_network_peak(eq);
      row.sojourn = std::isinf(row.peak) ? row.peak
                                         : row.peak - 1.0 / points[i].alpha;
      row.all_stable = true;
      for (int k = 0; k < classes; ++k) {
        int stable = 0;
        aoinet_equilibrium_class_row(eq, k, nullptr, &stable, nullptr, nullptr,
                                     nullptr);
        if (stable == 0) row.all_stable = false;
      }
      aoinet_equilibrium_free(eq);
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), points.size());
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  for (const Row& row : rows) {
    if (row.rc == AOINET_ERR_PARAM) throw CliError(row.error);
    if (row.rc != AOINET_OK) throw std::runtime_error(row.error);
  }

  std::ostringstream sweep_csv;
  sweep_csv << "theta_db,alpha,peak_aoi,mean_sojourn,all_stable\n";
  for (std::size_t i = 0; i < points.size(); ++i)
    sweep_csv << fmt(points[i].theta_db) << ',' << fmt(points[i].alpha) << ','
              << fmt(rows[i].peak) << ',' << fmt(rows[i].sojourn) << ','
              << (rows[i].all_stable ? 1 : 0) << '\n';
  write_text(out / "sweep.csv", sweep_csv.str());

  std::ostringstream frontier_csv;
  frontier_csv << "theta_db,found,alpha_stable\n";
  json frontier_json = json::array();
  for (std::size_t t = 0; t < theta_dbs.size(); ++t) {
    bool found = false;
    double best = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const Row& row = rows[t * alphas.size() + a];
      if (row.converged && row.all_stable) {
        found = true;
        best = alphas[a];
      }
    }
    frontier_csv << fmt(theta_dbs[t]) << ',' << (found ? 1 : 0) << ','
                 << fmt(best) << '\n';
    json entry;
    entry["theta_db"] = theta_dbs[t];
    entry["found"] = found;
    entry["alpha_stable"] = jnum(best);
    frontier_json.push_back(entry);
  }
  write_text(out / "frontier.csv", frontier_csv.str());

  json non_converged = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!rows[i].converged) {
      json entry;
      entry["theta_db"] = points[i].theta_db;
      entry["alpha"] = points[i].alpha;
      non_converged.push_back(entry);
    }
  }

  json summary;
  summary["points"] = points.size();
  summary["non_converged"] = non_converged;
  summary["frontier"] = frontier_json;
  write_text(out / "summary.json", summary.dump(2) + "\n");

  json params;
  params["theta_db_list"] = theta_spec;
  params["alpha_grid"] = grid_spec;
  params["eta"] = eta;
  params["eps"] = eps;
  params["classes"] = classes;
  params["tol"] = tol;
  params["max_iters"] = max_iters;
  params["chi_init"] = 0.0;
  params["damping"] = damping;
  params["jobs"] = jobs;
  write_manifest(out, "sweep", params,
                 {"sweep.csv", "frontier.csv", "summary.json"}, started);

  for (const auto& entry : frontier_json)
    std::printf("theta %s dB: largest all-stable alpha %s\n",
                fmt(entry["theta_db"].get<double>()).c_str(),
                entry["found"].get<bool>()
                    ? fmt(entry["alpha_stable"].get<double>()).c_str()
                    : "none");
  if (!non_converged.empty()) {
    std::fprintf(stderr, "sweep: %zu points did not converge\n",
                 non_converged.size());
    return kExitNonConverged;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Success-probability, queueing, and age analysis for "
               "large-scale uplink networks"};
  app.require_subcommand(1);

  AnalyzeOpts an;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Solve the coupled equilibrium and write reports");
  analyze->add_option("--config", an.config, "JSON config file");
  an.o_out = analyze->add_option("--out", an.out, "Output directory");
  an.o_alpha = analyze->add_option("--alpha", an.alpha,
                                   "Arrival probability per slot");
  an.o_theta = analyze->add_option("--theta", an.theta,
                                   "SIR threshold, linear scale");
  an.o_theta_db =
      analyze->add_option("--theta-db", an.theta_db, "SIR threshold in dB");
  an.o_theta->excludes(an.o_theta_db);
  an.o_theta_db->excludes(an.o_theta);
  an.o_eta = analyze->add_option("--eta", an.eta, "Path-loss exponent");
  an.o_eps = analyze->add_option("--eps", an.eps,
                                 "Path-loss compensation factor");
  an.o_classes =
      analyze->add_option("--classes", an.classes, "Number of QoS classes");
  an.o_tol = analyze->add_option("--tol", an.tol,
                                 "Fixed-point convergence tolerance");
  an.o_max_iters = analyze->add_option("--max-iters", an.max_iters,
                                       "Fixed-point iteration budget");
  an.o_chi_init = analyze->add_option("--chi-init", an.chi_init,
                                      "Starting idle probability");
  an.o_damping =
      analyze->add_option("--damping", an.damping, "Iteration damping factor");
  an.o_delta_grid = analyze->add_option(
      "--delta-grid", an.delta_grid, "CCDF grid as start:stop:step");
  analyze->add_option("--seed", an.seed, "Unused; accepted for uniformity");
  analyze->add_option("--jobs", an.jobs, "Unused; accepted for uniformity");

  SimulateOpts si;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run the spatial network simulator and write reports");
  simulate->add_option("--config", si.config, "JSON config file");
  si.o_out = simulate->add_option("--out", si.out, "Output directory");
  si.o_alpha = simulate->add_option("--alpha", si.alpha,
                                    "Arrival probability per slot");
  si.o_theta = simulate->add_option("--theta", si.theta,
                                    "SIR threshold, linear scale");
  si.o_theta_db =
      simulate->add_option("--theta-db", si.theta_db, "SIR threshold in dB");
  si.o_theta->excludes(si.o_theta_db);
  si.o_theta_db->excludes(si.o_theta);
  si.o_eta = simulate->add_option("--eta", si.eta, "Path-loss exponent");
  si.o_eps = simulate->add_option("--eps", si.eps,
                                  "Path-loss compensation factor");
  si.o_classes = simulate->add_option("--classes", si.classes,
                                      "Number of empirical classes");
  si.o_bs_density = simulate->add_option("--bs-density", si.bs_density,
                                         "Base stations per square km");
  si.o_area_side =
      simulate->add_option("--area-side", si.area_side, "Torus side in km");
  si.o_slots = simulate->add_option("--slots", si.slots,
                                    "Measured slots per realization");
  si.o_realizations = simulate->add_option("--realizations", si.realizations,
                                           "Number of spatial realizations");
  si.o_warmup = simulate->add_option("--warmup-window", si.warmup_window,
                                     "Slots per steady-state check");
  si.o_steady_tol = simulate->add_option("--steady-tol", si.steady_tol,
                                         "Warmup settling tolerance");
  si.o_min_attempts = simulate->add_option(
      "--min-attempts", si.min_attempts,
      "Exclude devices with fewer measured attempts");
  si.o_seed = simulate->add_option("--seed", si.seed, "Master random seed");
  si.o_jobs = simulate->add_option("--jobs", si.jobs, "Worker threads");
  si.o_delta_grid = simulate->add_option(
      "--delta-grid", si.delta_grid, "CCDF grid as start:stop:step");
  simulate->add_option("--tol", si.tol, "Unused; accepted for uniformity");

  CompareOpts co;
  CLI::App* compare = app.add_subcommand(
      "compare", "Check a simulation report against an analysis report");
  compare->add_option("--config", co.config, "JSON config file");
  co.o_out = compare->add_option("--out", co.out, "Output directory");
  co.o_analysis = compare->add_option("--analysis", co.analysis,
                                      "Directory written by analyze");
  co.o_simulation = compare->add_option("--simulation", co.simulation,
                                        "Directory written by simulate");
  co.o_ccdf_tol = compare->add_option("--ccdf-tol", co.ccdf_tol,
                                      "Gate on the CCDF sup-norm");
  co.o_peak_tol = compare->add_option("--peak-tol", co.peak_tol,
                                      "Gate on peak AoI relative error");
  co.o_sojourn_tol = compare->add_option(
      "--sojourn-tol", co.sojourn_tol,
      "Gate on mean sojourn relative error (reported only when absent)");

  SweepOpts sw;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Evaluate the equilibrium across an alpha grid per theta");
  sweep->add_option("--config", sw.config, "JSON config file");
  sw.o_out = sweep->add_option("--out", sw.out, "Output directory");
  sw.o_alpha_grid = sweep->add_option("--alpha-grid", sw.alpha_grid,
                                      "Arrival grid as start:stop:step");
  sw.o_theta_db_list = sweep->add_option(
      "--theta-db-list", sw.theta_db_list, "Comma-separated thresholds in dB");
  sw.o_eta = sweep->add_option("--eta", sw.eta, "Path-loss exponent");
  sw.o_eps =
      sweep->add_option("--eps", sw.eps, "Path-loss compensation factor");
  sw.o_classes =
      sweep->add_option("--classes", sw.classes, "Number of QoS classes");
  sw.o_tol =
      sweep->add_option("--tol", sw.tol, "Fixed-point convergence tolerance");
  sw.o_max_iters = sweep->add_option("--max-iters", sw.max_iters,
                                     "Fixed-point iteration budget");
  sw.o_damping =
      sweep->add_option("--damping", sw.damping, "Iteration damping factor");
  sw.o_jobs = sweep->add_option("--jobs", sw.jobs, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitParamError;
  }

  try {
    if (app.got_subcommand(analyze)) return run_analyze(an);
    if (app.got_subcommand(simulate)) return run_simulate(si);
    if (app.got_subcommand(compare)) return run_compare(co);
    if (app.got_subcommand(sweep)) return run_sweep(sw);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParamError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntimeError;
  }
  return kExitParamError;
}
