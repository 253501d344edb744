// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not tuned at runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nstorus/analyticity.hpp"
#include "nstorus/generators.hpp"
#include "nstorus/majorant.hpp"
#include "nstorus/norms.hpp"
#include "nstorus/ns_mild.hpp"
#include "test_util.hpp"

using namespace nstorus;
using nstorus::testing::random_field;

namespace {

struct Gate {
  int failures = 0;
  void criterion(const std::string& id, bool pass, const std::string& detail) {
    std::printf("[%s] %-4s %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  template <typename F>
  void run(const std::string& id, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      criterion(id, false, std::string("exception: ") + e.what());
    }
  }
};

template <typename... Args>
std::string fmt(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

SpectralField scaled_random_hs(int dim, int trunc, double s, double target_norm,
                               std::uint64_t seed) {
  SpectralField v = random_hs(dim, trunc, s, 1.0, seed);
  v *= target_norm / norm_hs(v, s);
  return v;
}

// ---------------------------------------------------------------------------

void a1_taylor_green(Gate& gate) {
  const auto start = std::chrono::steady_clock::now();
  SolverConfig cfg;
  cfg.dim = 2;
  cfg.trunc = 16;
  cfg.viscosity = 1.0;
  cfg.smoothness = 2.0;
  cfg.horizon = 1.0;
  cfg.time_grid = 128;
  cfg.picard_tol = 1e-10;

  const SpectralField vhat = taylor_green(cfg.trunc);
  auto [traj, rep] = picard_solve(vhat, cfg);

  double worst_v = 0, worst_p = 0;
  for (std::size_t i = 0; i < traj.nodes(); ++i) {
    const double t = traj.times[i];
    SpectralField exact = taylor_green(cfg.trunc);
    exact *= std::exp(-2.0 * cfg.viscosity * t);
    worst_v = std::max(worst_v, l1_distance(traj.states[i], exact));

    // p = (cos 2x_1 + cos 2x_2) e^{-4νt} / 4: modes (±2,0),(0,±2) at e^{-4νt}/8.
    SpectralField p_exact(2, cfg.trunc, 1);
    const double c = std::exp(-4.0 * cfg.viscosity * t) / 8.0;
    p_exact.set_coeff({2, 0}, c);
    p_exact.set_coeff({-2, 0}, c);
    p_exact.set_coeff({0, 2}, c);
    p_exact.set_coeff({0, -2}, c);
    worst_p = std::max(worst_p, l1_distance(pressure_recover(traj.states[i]), p_exact));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = rep.converged && worst_v <= 1e-8 && worst_p <= 1e-8 && seconds <= 60.0;
  gate.criterion("A1", pass,
                 fmt("Taylor-Green regression: velocity err %.2e <= 1e-8, pressure err "
                     "%.2e <= 1e-8, %.1f s <= 60 s",
                     worst_v, worst_p, seconds));
}

void a2_smoothing_and_strip(Gate& gate) {
  SolverConfig cfg;
  cfg.dim = 2;
  cfg.trunc = 32;
  cfg.viscosity = 0.25;
  cfg.smoothness = 2.0;
  cfg.horizon = 0.5;
  cfg.time_grid = 64;
  cfg.picard_tol = 1e-12;

  const SpectralField vhat = scaled_random_hs(2, cfg.trunc, cfg.smoothness, 6e-3, 2024);
  const CertifiedConstants consts = certified_constants(cfg.dim, cfg.viscosity);
  const double t_cert = certified_time(majorize_initial(vhat), cfg.smoothness, consts);

  auto [traj, rep] = picard_solve(vhat, cfg);

  bool slopes_ok = rep.converged && t_cert >= 0.5;
  std::string detail = fmt("T_cert %.3f >= 0.5;", t_cert);
  for (int node : {cfg.time_grid / 2, cfg.time_grid}) {
    const double t = traj.times[node];
    const DecayFit fit = decay_rate_fit(traj.states[node], 1e-12);
    const double bound = -cfg.viscosity * t / 2 * 0.9;
    slopes_ok = slopes_ok && fit.slope <= bound;
    detail += fmt(" t=%.2f slope %.3f <= %.4f (%d shells);", t, fit.slope, bound,
                  fit.modes_used);
  }
  gate.criterion("A2", slopes_ok, "smoothing rate: " + detail);

  // Strip boundedness at t = 0.5 for |y|_m up to 0.9 ν c̲ t / 3, c̲ = 1/sqrt(2).
  const double t = traj.times.back();
  const double width = 0.9 * cfg.viscosity * t / (3.0 * std::sqrt(2.0));
  bool strip_ok = true;
  double worst_ratio = 0;
  for (auto [y0, y1] :
       {std::pair{width, 0.0}, {0.0, width}, {width, width}, {width, -width}}) {
    const double y[2] = {y0, y1};
    double lo = 0, hi = 0;
    for (int samples : {8, 16, 32}) {
      const double sup = strip_evaluate(traj.states.back(), y, samples);
      strip_ok = strip_ok && std::isfinite(sup) && sup > 0;
      lo = lo == 0 ? sup : std::min(lo, sup);
      hi = std::max(hi, sup);
    }
    worst_ratio = std::max(worst_ratio, hi / lo);
    strip_ok = strip_ok && hi / lo < 10.0;
  }
  gate.criterion("A2b", strip_ok,
                 fmt("strip boundedness at |y|_m = %.4f: grid-to-grid sup ratio %.2f < 10",
                     width, worst_ratio));
}

void a3_mean_decay(Gate& gate) {
  SolverConfig cfg;
  cfg.dim = 2;
  cfg.trunc = 8;
  cfg.viscosity = 1.0;
  cfg.smoothness = 2.0;
  cfg.horizon = 20.0;
  cfg.time_grid = 320;
  cfg.picard_tol = 1e-14;

  const CertifiedConstants consts = certified_constants(cfg.dim, cfg.viscosity);
  GlobalProbe probe;
  probe.trunc = 6;
  const double mu = global_threshold(cfg.smoothness, consts, probe).mu;

  const SpectralField vhat = scaled_random_hs(2, cfg.trunc, cfg.smoothness, mu / 2, 314159);
  auto [traj, rep] = picard_solve(vhat, cfg);
  const MeanDecayReport mean = mean_decay_check(traj);
  const double bound = 0.9 * cfg.viscosity / 2;
  gate.criterion("A3", rep.converged && mean.rate >= bound,
                 fmt("small data (norm %.2e = mu/2): fitted decay rate %.3f >= %.3f "
                     "over t in [10, 20]",
                     mu / 2, mean.rate, bound));
}

void a4_domination(Gate& gate) {
  const int seeds = 20;
  int violations = 0;
  int converged = 0;
  double worst_excess = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    SolverConfig cfg;
    cfg.dim = 2;
    cfg.trunc = 8;
    cfg.viscosity = 1.0;
    cfg.smoothness = 2.0;
    cfg.picard_tol = 1e-12;

    const SpectralField vhat =
        scaled_random_hs(2, cfg.trunc, cfg.smoothness, 0.05, 9000 + seed);
    const CertifiedConstants consts = certified_constants(cfg.dim, cfg.viscosity);
    const MajorantSequence Vhat = majorize_initial(vhat);
    cfg.horizon = certified_time(Vhat, cfg.smoothness, consts);
    cfg.time_grid = 48;

    auto [vtraj, vrep] =
        majorant_solve(Vhat, consts.a, consts.rho, cfg.horizon, cfg.time_grid, 1e-13, 400);
    if (!vrep.converged) continue;

    auto observer = [&](int, const Trajectory& iter) {
      const DominationReport drep = dominates(iter, vtraj, cfg.viscosity);
      if (!drep.dominated) {
        ++violations;
        worst_excess = std::max(worst_excess, drep.excess);
      }
    };
    auto [traj, rep] = picard_solve(vhat, cfg, observer);
    if (rep.converged) ++converged;
  }
  gate.criterion("A4", violations == 0 && converged == seeds,
                 fmt("majorant domination: %d/%d runs converged, %d violating iterates "
                     "(worst excess %.2e)",
                     converged, seeds, violations, worst_excess));
}

void a5_certified_time_soundness(Gate& gate) {
  const int count = 50;
  const CertifiedConstants consts = certified_constants(2, 1.0);
  int diverged = 0, converged = 0;
  bool monotone = true;
  double prev_tcert = std::numeric_limits<double>::infinity();
  double min_tcert = std::numeric_limits<double>::infinity(), max_tcert = 0;
  for (int i = 0; i < count; ++i) {
    const double norm = 1e-3 * std::pow(1000.0, i / double(count - 1));  // 1e-3 .. 1
    SolverConfig cfg;
    cfg.dim = 2;
    cfg.trunc = 8;
    cfg.viscosity = 1.0;
    cfg.smoothness = 2.0;
    cfg.picard_tol = 1e-10;
    cfg.time_grid = 32;

    const SpectralField vhat = scaled_random_hs(2, cfg.trunc, cfg.smoothness, norm, 500 + i);
    const double t_cert = certified_time(majorize_initial(vhat), cfg.smoothness, consts);
    if (t_cert > prev_tcert * (1 + 1e-9)) monotone = false;
    prev_tcert = t_cert;
    min_tcert = std::min(min_tcert, t_cert);
    max_tcert = std::max(max_tcert, t_cert);

    cfg.horizon = t_cert;
    try {
      auto [traj, rep] = picard_solve(vhat, cfg);
      if (rep.converged) ++converged;
    } catch (const DivergedError&) {
      ++diverged;
    }
  }
  gate.criterion("A5", diverged == 0 && converged == count && monotone,
                 fmt("certified horizons sound: 0 diverged, %d/%d converged, T_cert "
                     "nonincreasing in the data norm (range %.2e .. %.2e)",
                     converged, count, min_tcert, max_tcert));
}

void a6_calculus_suite(Gate& gate) {
  int failures = 0;
  long checks = 0;
  for (auto [dim, trunc] : {std::pair{2, 4}, std::pair{3, 3}}) {
    std::mt19937_64 rng(600 + dim);
    for (int trial = 0; trial < 100; ++trial) {
      const DominatedPair a = random_dominated_pair(dim, trunc, rng);
      const DominatedPair b = random_dominated_pair(dim, trunc, rng);
      for (MajorantProperty prop : kAllMajorantProperties) {
        if (!calculus_check(prop, a.u, b.u, a.U, b.U).pass) ++failures;
        ++checks;
      }
    }
  }
  bool scans_ok = true;
  for (int dim : {2, 3}) {
    const ConstantScanReport scan = run_constant_scans(dim, 1.0, 30);
    scans_ok = scans_ok && scan.all_ok;
    scans_ok = scans_ok && a_dominance_trials(dim, 1.0, 20, 42 + dim);
  }
  gate.criterion("A6", failures == 0 && scans_ok,
                 fmt("calculus rows: %ld row checks, %d failures; constant scans to "
                     "|k|_inf <= 30 %s",
                     checks, failures, scans_ok ? "pass" : "fail"));
}

void a7_uniqueness(Gate& gate) {
  SolverConfig cfg;
  cfg.dim = 2;
  cfg.trunc = 8;
  cfg.viscosity = 1.0;
  cfg.smoothness = 2.0;
  cfg.horizon = 1.0;
  cfg.time_grid = 100;
  cfg.picard_tol = 1e-11;

  const double r_tilde = 0.1, r = 0.05, t_hat = 0.5, delta = 1e-6;
  const SpectralField v1 = scaled_random_hs(2, cfg.trunc, cfg.smoothness, 0.05, 77);

  const UniquenessReport same = uniqueness_gap(v1, v1, r_tilde, r, t_hat, cfg);
  const double worst_same =
      *std::max_element(same.gap_r_tilde.begin(), same.gap_r_tilde.end());

  const int k[2] = {0, 1};
  const double dir[2] = {1.0, 0.0};
  SpectralField pert = single_mode(2, cfg.trunc, k, 1.0, dir);
  pert *= delta / norm_analytic(pert, r_tilde);
  const UniquenessReport perturbed = uniqueness_gap(v1, v1 + pert, r_tilde, r, t_hat, cfg);

  const bool pass = worst_same <= 2 * cfg.picard_tol &&
                    perturbed.gap_at_probe <= 100 * delta && perturbed.continuous;
  gate.criterion("A7", pass,
                 fmt("uniqueness: identical-data gap %.2e <= %.0e; perturbed gap at "
                     "t_hat+0.1: %.2e <= 1e-4",
                     worst_same, 2 * cfg.picard_tol, perturbed.gap_at_probe));
}

void a8_oracle_equivalence(Gate& gate) {
  std::mt19937_64 rng(808);
  double worst_conv = 0;
  for (auto [dim, trunc] : {std::pair{2, 8}, std::pair{3, 4}}) {
    for (int trial = 0; trial < 5; ++trial) {
      const SpectralField f = random_field(dim, trunc, 1, rng, false);
      const SpectralField g = random_field(dim, trunc, 1, rng, false);
      const SpectralField direct = convolve(f, g, ConvolveMethod::Direct);
      const SpectralField fast = convolve(f, g, ConvolveMethod::Fft);
      worst_conv = std::max(worst_conv,
                            double((direct.coeffs() - fast.coeffs()).abs().maxCoeff()));
    }
  }

  // Grid-doubling order for the Duhamel quadrature against the closed-form
  // constant-forcing integral on a single mode: |k|_e² = 2.
  const double nu = 1.0, t = 1.0;
  const int k[2] = {1, 1};
  SpectralField f(2, 4, 2);
  f.set_coeff(k, {0.4, -0.2}, 0);
  const SpectralField zero(2, 4, 2);
  const std::complex<double> exact =
      std::complex<double>(0.4, -0.2) * (1 - std::exp(-2 * nu * t)) / (2 * nu);
  std::vector<double> errors;
  for (int M : {16, 32, 64, 128}) {
    const auto times = uniform_times(t, M);
    std::vector<SpectralField> rhs(times.size(), f);
    errors.push_back(std::abs(duhamel_apply(zero, rhs, nu, times).coeff(k, 0) - exact));
  }
  double min_order = 10;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    min_order = std::min(min_order, std::log2(errors[i] / errors[i + 1]));

  gate.criterion("A8", worst_conv <= 1e-12 && min_order >= 1.9,
                 fmt("oracle equivalence: conv fast-vs-direct %.2e <= 1e-12; duhamel "
                     "grid-doubling order %.2f >= 1.9",
                     worst_conv, min_order));
}

void a9_invariants(Gate& gate) {
  SolverConfig cfg;
  cfg.dim = 2;
  cfg.trunc = 8;
  cfg.viscosity = 1.0;
  cfg.smoothness = 2.0;
  cfg.horizon = 0.5;
  cfg.time_grid = 32;
  cfg.picard_tol = 1e-12;
  const SpectralField vhat = scaled_random_hs(2, cfg.trunc, cfg.smoothness, 0.05, 99);

  double worst_div = 0;
  auto observer = [&](int, const Trajectory& iter) {
    for (const auto& s : iter.states)
      worst_div = std::max(worst_div, divergence_l1_relative(s));
  };
  auto [traj, rep] = picard_solve(vhat, cfg, observer);
  const bool div_ok = worst_div <= 1e-12;

  bool mean_ok = true;
  const Eigen::Index zero_idx = vhat.modes().zero_index();
  for (const auto& s : traj.states)
    for (int c = 0; c < 2; ++c)
      if (std::abs(s(zero_idx, c) - vhat(zero_idx, c)) > 1e-12) mean_ok = false;

  const auto energy = energy_series(traj);
  const double dt = cfg.horizon / cfg.time_grid;
  const double slack = 10 * dt * dt * energy[0] + 10 * cfg.picard_tol;
  bool energy_ok = true;
  for (std::size_t i = 0; i + 1 < energy.size(); ++i)
    if (energy[i + 1] > energy[i] + slack) energy_ok = false;

  std::mt19937_64 rng(909);
  bool roundtrip_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const SpectralField r = random_field(2, 6, 1, rng, true, true);
    const double scale = r.l1();
    if (l1_distance(laplacian(inv_laplacian(r)), r) > 1e-13 * scale) roundtrip_ok = false;
    if (l1_distance(inv_laplacian(laplacian(r)), r) > 1e-13 * scale) roundtrip_ok = false;
  }

  std::uniform_real_distribution<double> unit(0.05, 1.0);
  bool cauchy_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const SpectralField r = random_field(2, 5, 1, rng);
    if (!cauchy_inequality_check(r, unit(rng), unit(rng))) cauchy_ok = false;
  }

  gate.criterion("A9", div_ok && mean_ok && energy_ok && roundtrip_ok && cauchy_ok,
                 fmt("invariants: iterate divergence %.1e <= 1e-12, mean %s, energy %s, "
                     "inverse-laplacian round-trip %s, cauchy sweep %s",
                     worst_div, mean_ok ? "pinned" : "drifts",
                     energy_ok ? "monotone" : "grows", roundtrip_ok ? "ok" : "bad",
                     cauchy_ok ? "ok" : "bad"));
}

}  // namespace

int main() {
  Gate gate;
  gate.run("A1", [&] { a1_taylor_green(gate); });
  gate.run("A2", [&] { a2_smoothing_and_strip(gate); });
  gate.run("A3", [&] { a3_mean_decay(gate); });
  gate.run("A4", [&] { a4_domination(gate); });
  gate.run("A5", [&] { a5_certified_time_soundness(gate); });
  gate.run("A6", [&] { a6_calculus_suite(gate); });
  gate.run("A7", [&] { a7_uniqueness(gate); });
  gate.run("A8", [&] { a8_oracle_equivalence(gate); });
  gate.run("A9", [&] { a9_invariants(gate); });
  std::printf("%d criterion(s) failed\n", gate.failures);
  return gate.failures == 0 ? 0 : 1;
}
