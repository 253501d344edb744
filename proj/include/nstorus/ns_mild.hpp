#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nstorus/config.hpp"
#include "nstorus/convolve.hpp"
#include "nstorus/field.hpp"
#include "nstorus/norms.hpp"
#include "nstorus/operators.hpp"
#include "nstorus/serialize.hpp"

namespace nstorus {

/// Time-indexed velocity states on a uniform grid 0 = t_0 < ... < t_M = T.
struct Trajectory {
  SolverConfig config;
  std::vector<double> times;
  std::vector<SpectralField> states;

  const SpectralField& at(std::size_t i) const { return states.at(i); }
  std::size_t nodes() const { return states.size(); }
};

/// Convergence record of a fixed-point solve.
struct PicardReport {
  int iterations = 0;
  std::vector<double> residuals;          // sup-over-grid ℓ¹ distance per sweep
  bool converged = false;
  std::vector<double> contraction_ratios; // residual[i+1] / residual[i]
};

inline std::vector<double> uniform_times(double horizon, int cells) {
  std::vector<double> t(cells + 1);
  for (int i = 0; i <= cells; ++i) t[i] = horizon * static_cast<double>(i) / cells;
  return t;
}

/// ‖div v‖_{ℓ¹} / ‖v‖_{ℓ¹} (0 for the zero field).
inline double divergence_l1_relative(const SpectralField& v) {
  const double scale = v.l1();
  if (scale == 0.0) return 0.0;
  return divergence(v).l1() / scale;
}

/// B(v)^a = A^a_l ∂_j (v^j v^l) summed over repeated j, l: the Leray-projected
/// advection written through exact Galerkin products. Divergence-free by
/// construction; a cheap residual assert guards the multiplier arithmetic.
inline SpectralField nonlinear_term(const SpectralField& v,
                                    ConvolveMethod method = ConvolveMethod::Auto,
                                    int threads = 1) {
  if (v.components() != v.dim()) throw ShapeError("nonlinear_term: expects a velocity field");
  const int n = v.dim();
  const auto& ms = v.modes();
  const Eigen::Index L = ms.size();
  const Eigen::Index zero = ms.zero_index();

  // u^l = Σ_j ∂_j (v^j v^l); products are symmetric in (j, l).
  std::vector<std::vector<SpectralField>> prod(n);
  for (int j = 0; j < n; ++j) prod[j].resize(n);
  for (int j = 0; j < n; ++j)
    for (int l = j; l < n; ++l) {
      prod[j][l] = convolve(component(v, j), component(v, l), method, threads);
      if (l != j) prod[l][j] = prod[j][l];
    }
  SpectralField u(v.modes_ptr(), n);
  for (int l = 0; l < n; ++l) {
    SpectralField acc(v.modes_ptr(), 1);
    for (int j = 0; j < n; ++j) acc += derivative(prod[j][l], j);
    u.coeffs().col(l) = acc.coeffs().col(0);
  }

  // A^a_l u^l = k_a (k·u)/|k|_e² - u^a per mode; -u^a at k = 0 (where u = 0).
  SpectralField out(v.modes_ptr(), n);
  for (Eigen::Index i = 0; i < L; ++i) {
    std::complex<double> kdotu(0);
    for (int d = 0; d < n; ++d) kdotu += double(ms.k(i, d)) * u(i, d);
    const double inv = i == zero ? 0.0 : 1.0 / ms.l2sq()(i);
    for (int a = 0; a < n; ++a) out(i, a) = double(ms.k(i, a)) * kdotu * inv - u(i, a);
  }

  // Projection roundoff scales with the pre-projection field (amplified by
  // |k|), not with the output: near-gradient advection cancels almost fully.
  const double roundoff_floor = 4e-15 * (ms.l1() * u.coeffs().abs().rowwise().sum()).sum();
  if (divergence(out).l1() > 1e-12 * out.l1() + roundoff_floor)
    throw Error("nonlinear_term: projected advection failed the divergence check");
  return out;
}

/// p = -Δ⁻¹ ∂_i∂_j (v^i v^j) with the gauge p_0 = 0.
inline SpectralField pressure_recover(const SpectralField& v,
                                      ConvolveMethod method = ConvolveMethod::Auto,
                                      int threads = 1) {
  if (v.components() != v.dim()) throw ShapeError("pressure_recover: expects a velocity field");
  const int n = v.dim();
  const auto& ms = v.modes();
  const Eigen::Index zero = ms.zero_index();
  SpectralField p(v.modes_ptr(), 1);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const SpectralField w = convolve(component(v, i), component(v, j), method, threads);
      const double sym = (i == j) ? 1.0 : 2.0;
      const Eigen::ArrayXd ki = ms.k().col(i).cast<double>();
      const Eigen::ArrayXd kj = ms.k().col(j).cast<double>();
      p.coeffs().col(0) +=
          (-sym * ki * kj / ms.l2sq().cwiseMax(1.0)).cast<std::complex<double>>() *
          w.coeffs().col(0);
    }
  p(zero, 0) = 0.0;
  return p;
}

/// Mild update u(t) = Sᵗ v̂ + ∫₀ᵗ S^{t-ξ} f(ξ) dξ at t = times.back(), with the
/// integral by composite trapezoid over the grid and the semigroup factor
/// evaluated exactly at the nodes.
inline SpectralField duhamel_apply(const SpectralField& vhat,
                                   std::span<const SpectralField> rhs_history,
                                   double nu, std::span<const double> times) {
  if (rhs_history.size() != times.size() || times.empty())
    throw InsufficientHistoryError("duhamel_apply: history does not match the time grid");
  if (times.front() != 0.0)
    throw InsufficientHistoryError("duhamel_apply: history must start at t = 0");
  const double t = times.back();
  SpectralField out = heat_semigroup(vhat, t, nu);
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    const double dt = times[j + 1] - times[j];
    if (dt <= 0) throw InsufficientHistoryError("duhamel_apply: grid must be increasing");
    out += (dt / 2) * heat_semigroup(rhs_history[j], t - times[j], nu);
    out += (dt / 2) * heat_semigroup(rhs_history[j + 1], t - times[j + 1], nu);
  }
  return out;
}

using PicardObserver = std::function<void(int iteration, const Trajectory&)>;

/// Picard iteration for the mild equation v = G(v),
/// G(v)(t) = Sᵗ v̂ + ∫₀ᵗ S^{t-ξ} B(v)(ξ) dξ, on the uniform grid of the
/// config. Starts from v⁽⁰⁾(t) = Sᵗ v̂ and sweeps until the sup-over-grid ℓ¹
/// residual drops below picard_tol. Each sweep evaluates the trapezoid
/// quadrature through the cell recurrence
///   Q_{i+1} = S^{Δt} Q_i + (Δt/2)(S^{Δt} f_i + f_{i+1}),
/// which reproduces the composite sum with exact node factors. After every
/// sweep the iterate is re-projected onto the divergence-free subspace to
/// remove floating-point drift.
///
/// Throws DivergedError when residuals grow for 3 consecutive sweeps (the
/// horizon is past the contraction regime; shrink T, e.g. to the certified
/// horizon).
inline std::pair<Trajectory, PicardReport> picard_solve(const SpectralField& vhat,
                                                        const SolverConfig& config,
                                                        const PicardObserver& observer = {}) {
  config.validate();
  if (vhat.dim() != config.dim || vhat.trunc() != config.trunc)
    throw ShapeError("picard_solve: initial data does not match the config cube");
  if (vhat.components() != vhat.dim())
    throw ShapeError("picard_solve: initial data must be a velocity field");
  if (!vhat.all_finite()) throw Error("picard_solve: non-finite initial data");
  if (divergence_l1_relative(vhat) > 1e-10)
    throw Error("picard_solve: initial data is not divergence-free");

  const int M = config.time_grid;
  const double nu = config.viscosity;
  const double dt = config.horizon / M;
  const int n = config.dim;

  Trajectory traj;
  traj.config = config;
  traj.times = uniform_times(config.horizon, M);
  traj.states.reserve(M + 1);
  for (int i = 0; i <= M; ++i)
    traj.states.push_back(heat_semigroup(vhat, traj.times[i], nu));
  if (observer) observer(0, traj);

  PicardReport report;
  const double scale0 = std::max(vhat.l1(), 1.0);
  int growth_streak = 0;

  for (int sweep = 1; sweep <= config.max_iterations; ++sweep) {
    std::vector<SpectralField> rhs(M + 1);
    for (int i = 0; i <= M; ++i)
      rhs[i] = nonlinear_term(traj.states[i], ConvolveMethod::Auto, config.threads);

    Trajectory next;
    next.config = config;
    next.times = traj.times;
    next.states.reserve(M + 1);
    next.states.push_back(vhat);

    SpectralField quad(vhat.modes_ptr(), n);
    for (int i = 1; i <= M; ++i) {
      quad = heat_semigroup(quad, dt, nu);
      quad += (dt / 2) * heat_semigroup(rhs[i - 1], dt, nu);
      quad += (dt / 2) * rhs[i];
      SpectralField state = heat_semigroup(vhat, traj.times[i], nu) + quad;
      next.states.push_back(leray_project(state));
    }

    double residual = 0;
    for (int i = 0; i <= M; ++i)
      residual = std::max(residual, l1_distance(next.states[i], traj.states[i]));

    if (!report.residuals.empty()) {
      report.contraction_ratios.push_back(
          report.residuals.back() > 0 ? residual / report.residuals.back() : 0.0);
      if (residual > report.residuals.back())
        ++growth_streak;
      else
        growth_streak = 0;
    }
    report.residuals.push_back(residual);
    report.iterations = sweep;
    traj = std::move(next);
    if (observer) observer(sweep, traj);

    const bool blown_up = !traj.states[M].all_finite() || traj.states[M].l1() > 1e8 * scale0;
    if (growth_streak >= 3 || blown_up)
      throw DivergedError(sweep, report.residuals);
    if (residual <= config.picard_tol) {
      report.converged = true;
      break;
    }
  }
  report.converged = !report.residuals.empty() && report.residuals.back() <= config.picard_tol;
  return {std::move(traj), std::move(report)};
}

/// Strong-form residual ‖v_t + (v,∇)v + ∇p - νΔv‖_{ℓ¹} at the interior grid
/// nodes, with v_t by centered difference and p recovered from v. Expected
/// O(Δt²) + picard_tol for a converged trajectory.
inline std::vector<double> momentum_residual(const Trajectory& traj,
                                             ConvolveMethod method = ConvolveMethod::Auto,
                                             int threads = 1) {
  const int M = static_cast<int>(traj.nodes()) - 1;
  if (M < 2) throw GridError("momentum_residual: need at least 3 grid nodes");
  const int n = traj.config.dim;
  const double nu = traj.config.viscosity;
  std::vector<double> out;
  out.reserve(M - 1);
  for (int i = 1; i < M; ++i) {
    const SpectralField& v = traj.states[i];
    const double two_dt = traj.times[i + 1] - traj.times[i - 1];
    SpectralField residual = (1.0 / two_dt) * (traj.states[i + 1] - traj.states[i - 1]);
    for (int l = 0; l < n; ++l) {
      SpectralField adv(v.modes_ptr(), 1);
      for (int j = 0; j < n; ++j)
        adv += convolve(component(v, j), derivative(component(v, l), j), method, threads);
      residual.coeffs().col(l) += adv.coeffs().col(0);
    }
    residual += gradient(pressure_recover(v, method, threads));
    residual -= nu * laplacian(v);
    out.push_back(residual.l1());
  }
  return out;
}

/// Kinetic-energy proxy Σ_k Σ_c |v_k|² per grid node. With exact Galerkin
/// products the nonlinearity is energy-neutral, so the series decreases along
/// converged trajectories up to quadrature error.
inline std::vector<double> energy_series(const Trajectory& traj) {
  std::vector<double> e;
  e.reserve(traj.nodes());
  for (const auto& s : traj.states) e.push_back(s.coeffs().abs2().sum());
  return e;
}

struct ContinuityReport {
  std::vector<double> times;
  std::vector<double> v_norms;  // ‖∂^κ v(t) - ∂^κ v̂‖_{s-|κ|}
  std::vector<double> p_norms;  // same for the recovered pressure
  bool decreasing_toward_zero = false;
};

/// Initial-continuity diagnostic: the norm of ∂^κ v(t) - ∂^κ v̂ in H_{s-|κ|}
/// over the first few grid nodes (likewise for the pressure against the
/// pressure of v̂). Passes when both sequences shrink monotonically as t → 0.
inline ContinuityReport initial_continuity_check(const Trajectory& traj,
                                                 std::span<const int> kappa, double s,
                                                 int nodes = 5) {
  const int n = traj.config.dim;
  if (static_cast<int>(kappa.size()) != n)
    throw ShapeError("initial_continuity_check: multi-index arity mismatch");
  double order = 0;
  for (int d = 0; d < n; ++d) {
    if (kappa[d] < 0) throw ShapeError("initial_continuity_check: negative multi-index");
    order += kappa[d];
  }
  auto dk = [&](SpectralField f) {
    for (int d = 0; d < n; ++d)
      for (int rep = 0; rep < kappa[d]; ++rep) f = derivative(f, d);
    return f;
  };
  const double index = s - order;
  const SpectralField dv0 = dk(traj.states[0]);
  const SpectralField dp0 = dk(pressure_recover(traj.states[0]));

  ContinuityReport rep;
  const int count = std::min<int>(nodes, static_cast<int>(traj.nodes()));
  for (int i = 0; i < count; ++i) {
    rep.times.push_back(traj.times[i]);
    rep.v_norms.push_back(norm_hs(SpectralField(dk(traj.states[i]) - dv0), index));
    rep.p_norms.push_back(
        norm_hs(SpectralField(dk(pressure_recover(traj.states[i])) - dp0), index));
  }
  rep.decreasing_toward_zero = true;
  for (int i = 0; i + 1 < count; ++i) {
    if (rep.v_norms[i] > rep.v_norms[i + 1] + 1e-14) rep.decreasing_toward_zero = false;
    if (rep.p_norms[i] > rep.p_norms[i + 1] + 1e-14) rep.decreasing_toward_zero = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Trajectory directory layout: config.json, times.json, field_%06zu.tmf
// ---------------------------------------------------------------------------

inline void save_trajectory(const Trajectory& traj, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "config.json");
    os << config_to_json(traj.config).dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "times.json");
    os << json{{"times", traj.times}}.dump() << "\n";
  }
  char name[32];
  for (std::size_t i = 0; i < traj.nodes(); ++i) {
    std::snprintf(name, sizeof(name), "field_%06zu.tmf", i);
    save_field(traj.states[i], (dir / name).string());
  }
}

inline Trajectory load_trajectory(const std::filesystem::path& dir) {
  Trajectory traj;
  {
    std::ifstream is(dir / "config.json");
    if (!is) throw Error("load_trajectory: missing config.json");
    traj.config = config_from_json(json::parse(is));
  }
  {
    std::ifstream is(dir / "times.json");
    if (!is) throw Error("load_trajectory: missing times.json");
    traj.times = json::parse(is).at("times").get<std::vector<double>>();
  }
  char name[32];
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::snprintf(name, sizeof(name), "field_%06zu.tmf", i);
    traj.states.push_back(load_field((dir / name).string()));
  }
  return traj;
}

}  // namespace nstorus
