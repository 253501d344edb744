#include "nstorus/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nstorus/analyticity.hpp"
#include "nstorus/majorant.hpp"
#include "nstorus/ns_mild.hpp"

namespace nstorus {

namespace fs = std::filesystem;

namespace {

void write_atomic(const fs::path& path, const std::string& payload) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error("cannot open for writing: " + tmp.string());
    os << payload;
  }
  fs::rename(tmp, path);
}

std::string csv_line(std::initializer_list<double> values) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (double v : values) {
    if (!first) os << ",";
    os << v;
    first = false;
  }
  os << "\n";
  return os.str();
}

json base_summary(const RunManifest& m) {
  return json{{"experiment", m.experiment},
              {"status", "ok"},
              {"seed", m.seed},
              {"output_dir", m.output_dir},
              {"outputs", json::array()}};
}

json picard_json(const PicardReport& rep) {
  return json{{"iterations", rep.iterations},
              {"converged", rep.converged},
              {"final_residual", rep.residuals.empty() ? 0.0 : rep.residuals.back()},
              {"residuals", rep.residuals},
              {"contraction_ratios", rep.contraction_ratios}};
}

// ---------------------------------------------------------------------------

json run_solve(const RunManifest& m) {
  const SpectralField vhat = generate_initial(m.initial, m.config, m.seed);
  auto [traj, rep] = picard_solve(vhat, m.config);
  const std::vector<double> residuals = momentum_residual(traj);

  const fs::path out(m.output_dir);
  save_trajectory(traj, out / "trajectory");

  std::string csv = "t,momentum_residual\n";
  double max_res = 0;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    csv += csv_line({traj.times[i + 1], residuals[i]});
    max_res = std::max(max_res, residuals[i]);
  }
  write_atomic(out / "residual.csv", csv);

  json summary = base_summary(m);
  summary["picard"] = picard_json(rep);
  summary["max_momentum_residual"] = max_res;
  summary["outputs"] = {(out / "trajectory").string(), (out / "residual.csv").string()};

  if (m.extra.contains("check_quadrature") && m.extra["check_quadrature"].get<bool>()) {
    SolverConfig fine = m.config;
    fine.time_grid *= 2;
    auto [traj2, rep2] = picard_solve(vhat, fine);
    double dev = 0;
    for (std::size_t i = 0; i < traj.nodes(); ++i)
      dev = std::max(dev, l1_distance(traj.states[i], traj2.states[2 * i]));
    summary["quadrature"] = {{"grid_doubling_deviation", dev},
                             {"within_tol", dev <= m.config.quad_tol}};
  }
  return summary;
}

json run_certify(const RunManifest& m) {
  const json opts = m.extra.value("certify", json::object());
  const double search_hi = opts.value("search_hi", 64.0);
  const int scan_bound = opts.value("scan_bound", 30);

  const SpectralField vhat = generate_initial(m.initial, m.config, m.seed);
  const CertifiedConstants consts = certified_constants(m.config.dim, m.config.viscosity);
  const MajorantSequence Vhat = majorize_initial(vhat);

  CertReport report;
  report.a = consts.a;
  report.rho = consts.rho;
  report.lemma1_c = consts.lemma1_c;
  report.t_cert = certified_time(Vhat, m.config.smoothness, consts, search_hi);
  report.t_cert_at_search_bound = report.t_cert >= search_hi;
  report.scans = run_constant_scans(m.config.dim, m.config.viscosity, scan_bound);
  report.a_dominance_ok = a_dominance_trials(m.config.dim, m.config.viscosity, 20, m.seed + 1);

  GlobalProbe probe;
  probe.dim = m.config.dim;
  probe.horizon = opts.value("probe_horizon", 50.0);
  const GlobalThresholdResult global = global_threshold(m.config.smoothness, consts, probe);
  report.mu = global.mu;
  report.probe = global.probe;
  report.data_norm = norm_hs(vhat, m.config.smoothness);
  report.global = report.data_norm <= report.mu;

  const fs::path out(m.output_dir);
  write_atomic(out / "cert.json", cert_report_to_json(report).dump(2) + "\n");

  json summary = base_summary(m);
  summary["cert"] = cert_report_to_json(report);
  summary["outputs"] = {(out / "cert.json").string()};
  return summary;
}

json run_decay(const RunManifest& m) {
  const json opts = m.extra.value("decay", json::object());
  const double floor_value = opts.value("floor", 1e-12);

  const SpectralField vhat = generate_initial(m.initial, m.config, m.seed);
  auto [traj, rep] = picard_solve(vhat, m.config);

  std::string csv = "t,slope,intercept,shells\n";
  json fits = json::array();
  for (std::size_t i = 0; i < traj.nodes(); ++i) {
    try {
      const DecayFit fit = decay_rate_fit(traj.states[i], floor_value);
      csv += csv_line({traj.times[i], fit.slope, fit.intercept,
                       static_cast<double>(fit.modes_used)});
      fits.push_back({{"t", traj.times[i]},
                      {"slope", fit.slope},
                      {"intercept", fit.intercept},
                      {"shells", fit.modes_used}});
    } catch (const TooFewModesError&) {
      fits.push_back({{"t", traj.times[i]}, {"slope", nullptr}});
    }
  }

  const fs::path out(m.output_dir);
  write_atomic(out / "decay.csv", csv);

  json summary = base_summary(m);
  summary["picard"] = picard_json(rep);
  summary["fits"] = fits;
  summary["outputs"] = {(out / "decay.csv").string()};

  try {
    const MeanDecayReport mean = mean_decay_check(traj);
    std::string mcsv = "t,sup_deviation\n";
    for (std::size_t i = 0; i < mean.times.size(); ++i)
      mcsv += csv_line({mean.times[i], mean.sup_deviation[i]});
    write_atomic(out / "mean_decay.csv", mcsv);
    summary["mean_decay"] = {{"rate", mean.rate}, {"constant", mean.constant}};
    summary["outputs"].push_back((out / "mean_decay.csv").string());
  } catch (const DegenerateFieldError&) {
    summary["mean_decay"] = {{"degenerate", true}};
  }
  return summary;
}

json run_uniqueness(const RunManifest& m) {
  const json opts = m.extra.value("uniqueness", json::object());
  const double delta = opts.value("delta", 1e-6);
  const double r_tilde = opts.value("r_tilde", 0.1);
  const double r = opts.value("r", 0.05);
  const double t_hat = opts.value("t_hat", 0.5);
  const double probe_offset = opts.value("probe_offset", 0.1);
  std::vector<int> mode = opts.value("mode", std::vector<int>{0, 1});
  if (static_cast<int>(mode.size()) != m.config.dim)
    throw ConfigError("uniqueness.mode", "perturbation mode arity mismatch");

  const SpectralField v1 = generate_initial(m.initial, m.config, m.seed);
  std::vector<double> dir(m.config.dim, 0.0);
  detail::solenoidal_direction(mode, dir);
  SpectralField pert = single_mode(m.config.dim, m.config.trunc, mode, 1.0, dir);
  const double pert_norm = norm_analytic(pert, r_tilde);
  pert *= delta / pert_norm;
  const SpectralField v2 = v1 + pert;

  const UniquenessReport rep = uniqueness_gap(v1, v2, r_tilde, r, t_hat, m.config,
                                              probe_offset);

  std::string csv = "t,gap_r_tilde,gap_r\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    csv += csv_line({rep.times[i], rep.gap_r_tilde[i], rep.gap_r[i]});
  const fs::path out(m.output_dir);
  write_atomic(out / "uniqueness.csv", csv);

  json summary = base_summary(m);
  summary["uniqueness"] = {{"delta", delta},
                           {"r_tilde", r_tilde},
                           {"r", r},
                           {"t_hat", t_hat},
                           {"K", rep.K},
                           {"envelope_constant", rep.envelope_constant},
                           {"gap_at_probe", rep.gap_at_probe},
                           {"probe_time", rep.probe_time},
                           {"continuous", rep.continuous}};
  summary["outputs"] = {(out / "uniqueness.csv").string()};
  return summary;
}

json run_majorant_check(const RunManifest& m) {
  const SpectralField vhat = generate_initial(m.initial, m.config, m.seed);
  const CertifiedConstants consts = certified_constants(m.config.dim, m.config.viscosity);
  const MajorantSequence Vhat = majorize_initial(vhat);
  const double t_cert = certified_time(Vhat, m.config.smoothness, consts);

  SolverConfig cfg = m.config;
  cfg.horizon = std::min(cfg.horizon, t_cert);

  auto [vtraj, vrep] = majorant_solve(Vhat, consts.a, consts.rho, cfg.horizon,
                                      cfg.time_grid, 1e-13, 400);

  int violations = 0;
  double worst_excess = 0;
  int iterates = 0;
  auto observer = [&](int, const Trajectory& iter) {
    ++iterates;
    const DominationReport rep = dominates(iter, vtraj, cfg.viscosity);
    if (!rep.dominated) {
      ++violations;
      worst_excess = std::max(worst_excess, rep.excess);
    }
  };
  auto [traj, rep] = picard_solve(vhat, cfg, observer);

  std::string csv = "t,sup_velocity,sup_majorant\n";
  for (std::size_t i = 0; i < traj.nodes(); ++i) {
    const Eigen::ArrayXd shifted =
        vtraj.states[i].coeffs *
        (-(cfg.viscosity * traj.times[i] / 2.0) * vhat.modes().l2()).exp();
    csv += csv_line({traj.times[i], traj.states[i].max_abs(), shifted.maxCoeff()});
  }
  const fs::path out(m.output_dir);
  write_atomic(out / "majorant.csv", csv);

  json summary = base_summary(m);
  summary["picard"] = picard_json(rep);
  summary["majorant"] = {{"t_cert", t_cert},
                         {"horizon_used", cfg.horizon},
                         {"iterates_checked", iterates},
                         {"violations", violations},
                         {"worst_excess", worst_excess},
                         {"majorant_converged", vrep.converged}};
  summary["outputs"] = {(out / "majorant.csv").string()};
  if (violations > 0) summary["status"] = "violation";
  return summary;
}

struct PropsOutcome {
  json rows = json::array();
  bool all_pass = true;
};

PropsOutcome run_props_suite(int dim, int trunc, int trials, std::uint64_t seed) {
  PropsOutcome out;
  std::mt19937_64 rng(seed);
  for (MajorantProperty prop : kAllMajorantProperties) {
    int failures = 0;
    for (int trial = 0; trial < trials; ++trial) {
      const DominatedPair a = random_dominated_pair(dim, trunc, rng);
      const DominatedPair b = random_dominated_pair(dim, trunc, rng);
      const CalculusCheckResult res = calculus_check(prop, a.u, b.u, a.U, b.U);
      if (!res.pass) ++failures;
    }
    out.rows.push_back({{"property", majorant_property_name(prop)},
                        {"dim", dim},
                        {"trunc", trunc},
                        {"trials", trials},
                        {"failures", failures}});
    if (failures > 0) out.all_pass = false;
  }
  return out;
}

json run_props(const RunManifest& m) {
  const json opts = m.extra.value("props", json::object());
  const int trials = opts.value("trials", 100);
  const int scan_bound = opts.value("scan_bound", 30);

  json report;
  bool all_pass = true;
  json rows = json::array();
  for (auto [dim, trunc] : {std::pair{2, 4}, std::pair{3, 3}}) {
    const PropsOutcome outcome = run_props_suite(dim, trunc, trials, m.seed + dim);
    for (const auto& row : outcome.rows) rows.push_back(row);
    all_pass = all_pass && outcome.all_pass;
  }
  report["rows"] = rows;

  json scans = json::array();
  for (int dim : {2, 3}) {
    const ConstantScanReport scan = run_constant_scans(dim, m.config.viscosity, scan_bound);
    scans.push_back({{"dim", dim},
                     {"bound", scan.bound},
                     {"lemma1", scan.lemma1_ok},
                     {"projected_multiplier", scan.projected_multiplier_ok},
                     {"rho_exponent", scan.rho_exponent_ok},
                     {"rho_pair_sampled", scan.rho_pair_sampled_ok}});
    all_pass = all_pass && scan.all_ok;
    const bool dominance = a_dominance_trials(dim, m.config.viscosity, 20, m.seed + 10 + dim);
    scans.back()["a_dominance"] = dominance;
    all_pass = all_pass && dominance;
  }
  report["scans"] = scans;
  report["all_pass"] = all_pass;

  const fs::path out(m.output_dir);
  write_atomic(out / "props.json", report.dump(2) + "\n");

  json summary = base_summary(m);
  summary["props"] = report;
  summary["outputs"] = {(out / "props.json").string()};
  if (!all_pass) summary["status"] = "violation";
  return summary;
}

}  // namespace

RunManifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("manifest", "manifest must be a JSON object");
  RunManifest m;
  if (!j.contains("version")) throw ConfigError("version", "manifest.version is required");
  m.version = j.at("version").get<int>();
  if (m.version != 1) throw ConfigError("version", "unsupported manifest version");
  if (j.contains("experiment")) m.experiment = j.at("experiment").get<std::string>();
  if (!j.contains("config")) throw ConfigError("config", "manifest.config is required");
  m.config = config_from_json(j.at("config"));
  if (!j.contains("initial")) throw ConfigError("initial", "manifest.initial is required");
  const json& init = j.at("initial");
  if (!init.contains("generator"))
    throw ConfigError("initial.generator", "manifest.initial.generator is required");
  m.initial.generator = init.at("generator").get<std::string>();
  m.initial.mode = init.value("mode", std::vector<int>{});
  m.initial.direction = init.value("direction", std::vector<double>{});
  m.initial.amplitude = init.value("amplitude", 1.0);
  m.initial.smoothness = init.value("smoothness", m.config.smoothness);
  m.initial.path = init.value("path", std::string{});
  m.output_dir = j.value("output_dir", std::string("out"));
  m.seed = j.value("seed", std::uint64_t{0});
  m.reproducible = j.value("reproducible", false);
  for (const char* key : {"uniqueness", "props", "certify", "decay", "check_quadrature"})
    if (j.contains(key)) m.extra[key] = j.at(key);
  return m;
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("manifest", "cannot open manifest: " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("manifest", std::string("manifest parse error: ") + e.what());
  }
  return manifest_from_json(j);
}

json manifest_to_json(const RunManifest& m) {
  json j{{"version", m.version},
         {"experiment", m.experiment},
         {"config", config_to_json(m.config)},
         {"output_dir", m.output_dir},
         {"seed", m.seed},
         {"reproducible", m.reproducible}};
  json init{{"generator", m.initial.generator}};
  if (!m.initial.mode.empty()) init["mode"] = m.initial.mode;
  if (!m.initial.direction.empty()) init["direction"] = m.initial.direction;
  init["amplitude"] = m.initial.amplitude;
  init["smoothness"] = m.initial.smoothness;
  if (!m.initial.path.empty()) init["path"] = m.initial.path;
  j["initial"] = init;
  for (auto& [key, value] : m.extra.items()) j[key] = value;
  return j;
}

int run_experiment(const RunManifest& manifest, std::ostream& out) {
  try {
    json summary;
    if (manifest.experiment == "solve")
      summary = run_solve(manifest);
    else if (manifest.experiment == "certify")
      summary = run_certify(manifest);
    else if (manifest.experiment == "decay")
      summary = run_decay(manifest);
    else if (manifest.experiment == "uniqueness")
      summary = run_uniqueness(manifest);
    else if (manifest.experiment == "majorant-check")
      summary = run_majorant_check(manifest);
    else if (manifest.experiment == "props")
      summary = run_props(manifest);
    else
      throw ConfigError("experiment", "unknown experiment: " + manifest.experiment);
    out << summary.dump(2) << std::endl;
    return summary["status"] == "ok" ? 0 : 1;
  } catch (const ConfigError& e) {
    out << json{{"error", {{"code", "config"}, {"field", e.field}, {"message", e.what()}}}}
               .dump(2)
        << std::endl;
    return 2;
  } catch (const DivergedError& e) {
    out << json{{"error",
                 {{"code", "diverged"},
                  {"iterations", e.iterations},
                  {"message", e.what()}}}}
               .dump(2)
        << std::endl;
    return 1;
  } catch (const Error& e) {
    out << json{{"error", {{"code", "numerical"}, {"message", e.what()}}}}.dump(2)
        << std::endl;
    return 1;
  } catch (const json::exception& e) {
    out << json{{"error", {{"code", "config"}, {"message", e.what()}}}}.dump(2) << std::endl;
    return 2;
  }
}

}  // namespace nstorus
