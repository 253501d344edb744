#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "nstorus/field.hpp"
#include "nstorus/norms.hpp"
#include "nstorus/ns_mild.hpp"
#include "nstorus/operators.hpp"

namespace nstorus {

/// Least-squares fit of log(shell-max |f_k|) against |k|_e.
struct DecayFit {
  double slope = 0;      // per unit |k|_e; negative for decaying spectra
  double intercept = 0;
  double rms_residual = 0;
  int modes_used = 0;    // number of shells entering the fit
};

/// Fits the empirical coefficient decay rate over Euclidean shells
/// |k|_e ∈ [q, q+1). Each shell contributes its maximal modulus (over modes
/// and components) at the |k|_e of the maximising mode; shells below the
/// floor are dropped. Needs at least 5 usable shells.
inline DecayFit decay_rate_fit(const SpectralField& f, double floor_value) {
  if (floor_value <= 0) throw Error("decay_rate_fit: floor must be positive");
  const auto& ms = f.modes();
  std::map<int, std::pair<double, double>> shells;  // q -> (max |f_k|, |k|_e of argmax)
  for (Eigen::Index i = 0; i < ms.size(); ++i) {
    double mag = 0;
    for (int c = 0; c < f.components(); ++c) mag = std::max(mag, std::abs(f(i, c)));
    const int q = static_cast<int>(std::floor(ms.l2()(i)));
    auto& slot = shells[q];
    if (mag > slot.first) slot = {mag, ms.l2()(i)};
  }
  std::vector<double> xs, ys;
  for (const auto& [q, data] : shells)
    if (data.first > floor_value) {
      xs.push_back(data.second);
      ys.push_back(std::log(data.first));
    }
  const int m = static_cast<int>(xs.size());
  if (m < 5)
    throw TooFewModesError("decay_rate_fit: only " + std::to_string(m) +
                           " shells above the floor");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  DecayFit fit;
  fit.modes_used = m;
  const double denom = m * sxx - sx * sx;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss = 0;
  for (int i = 0; i < m; ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += e * e;
  }
  fit.rms_residual = std::sqrt(ss / m);
  return fit;
}

namespace detail {

/// points × modes matrix of e^{i(k,x) - (k,y)} over the uniform sample grid.
inline Eigen::MatrixXcd phase_matrix(const ModeSet& ms, int samples_per_axis,
                                     std::span<const double> y = {}) {
  const int n = ms.dim();
  Eigen::Index points = 1;
  for (int d = 0; d < n; ++d) points *= samples_per_axis;
  Eigen::MatrixXcd P(points, ms.size());
  std::vector<double> x(n);
  for (Eigen::Index p = 0; p < points; ++p) {
    Eigen::Index rem = p;
    for (int d = n - 1; d >= 0; --d) {
      x[d] = 2 * std::numbers::pi * static_cast<double>(rem % samples_per_axis) /
             samples_per_axis;
      rem /= samples_per_axis;
    }
    for (Eigen::Index i = 0; i < ms.size(); ++i) {
      double phase = 0, damp = 0;
      for (int d = 0; d < n; ++d) {
        phase += ms.k(i, d) * x[d];
        if (!y.empty()) damp += ms.k(i, d) * y[d];
      }
      P(p, i) = std::exp(std::complex<double>(-damp, phase));
    }
  }
  return P;
}

}  // namespace detail

/// Sup over a uniform sample grid of Σ_c |f^c(x + iy)|: the observable size
/// of the field on the complexified torus at imaginary offset y.
inline double strip_evaluate(const SpectralField& f, std::span<const double> y,
                             int samples_per_axis = 16) {
  if (!y.empty() && static_cast<int>(y.size()) != f.dim())
    throw ShapeError("strip_evaluate: offset arity mismatch");
  const Eigen::MatrixXcd P = detail::phase_matrix(f.modes(), samples_per_axis, y);
  const Eigen::MatrixXcd values = P * f.coeffs().matrix();
  return values.cwiseAbs().rowwise().sum().maxCoeff();
}

struct MeanDecayReport {
  std::vector<double> times;
  std::vector<double> sup_deviation;  // max_x Σ_c |v(t,x) - v_0| per node
  double rate = 0;                    // fitted exponential decay rate (positive)
  double constant = 0;                // implied prefactor c in c e^{-rate t}
};

/// Decay of the solution to its mean: fits log max_x|v(t,·) - v_0| against t
/// over the tail half of the grid.
inline MeanDecayReport mean_decay_check(const Trajectory& traj, int samples_per_axis = 32) {
  if (traj.nodes() < 4) throw GridError("mean_decay_check: trajectory too short");
  const auto& ms = traj.states[0].modes();
  const Eigen::Index zero = ms.zero_index();
  const Eigen::MatrixXcd P = detail::phase_matrix(ms, samples_per_axis);

  MeanDecayReport rep;
  rep.times = traj.times;
  rep.sup_deviation.reserve(traj.nodes());
  for (const SpectralField& v : traj.states) {
    SpectralField dev = v;
    for (int c = 0; c < v.components(); ++c) dev(zero, c) = 0.0;
    const Eigen::MatrixXcd values = P * dev.coeffs().matrix();
    rep.sup_deviation.push_back(values.cwiseAbs().rowwise().sum().maxCoeff());
  }

  const std::size_t start = traj.nodes() / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = start; i < traj.nodes(); ++i) {
    if (rep.sup_deviation[i] < 1e-250) continue;
    const double x = rep.times[i], y = std::log(rep.sup_deviation[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw DegenerateFieldError("mean_decay_check: field is constant");
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  rep.rate = -slope;
  rep.constant = std::exp((sy - slope * sx) / m);
  return rep;
}

/// ‖Df‖*_r ≤ (1/(eδ)) ‖f‖*_{r+δ}: the derivative form of the Cauchy
/// inequality with the sharp constant max_q q e^{-qδ} = 1/(eδ).
inline bool cauchy_inequality_check(const SpectralField& f, double r, double delta) {
  if (delta <= 0) throw Error("cauchy_inequality_check: delta must be positive");
  if (r < 0) throw Error("cauchy_inequality_check: r must be nonnegative");
  const double lhs = norm_analytic(d_multiplier(f), r);
  const double rhs = norm_analytic(f, r + delta) / (std::numbers::e * delta);
  return lhs <= rhs * (1 + 1e-12);
}

struct UniquenessReport {
  std::vector<double> times;
  std::vector<double> gap_r_tilde;   // ‖v₁ - v₂‖*_{r̃} per node
  std::vector<double> gap_r;         // same at the inner radius r
  double K = 0;                      // sup over [t̂, T] of gap_r_tilde
  double envelope_constant = 0;      // least C with gap_r ≤ K C e (t - t̂)/(r̃ - r)
  double gap_at_probe = 0;           // gap_r_tilde at t̂ + probe_offset
  double probe_time = 0;
  bool continuous = true;            // no >10× jump between adjacent nodes
  PicardReport report1, report2;
};

/// Runs two solves and reports the analytic-norm gap between them: the
/// executable trace of the uniqueness estimate. Identical data must stay at
/// solver precision; perturbed data exhibits Lipschitz continuous dependence.
/// Admissibility: α r̃ < t̂ with α = 3/(ν c̲), c̲ = 1/sqrt(n).
inline UniquenessReport uniqueness_gap(const SpectralField& v1hat, const SpectralField& v2hat,
                                       double r_tilde, double r, double t_hat,
                                       const SolverConfig& config,
                                       double probe_offset = 0.1) {
  v1hat.require_same_shape(v2hat);
  if (!(r >= 0 && r < r_tilde)) throw Error("uniqueness_gap: need 0 <= r < r_tilde");
  const double alpha = 3.0 * std::sqrt(static_cast<double>(config.dim)) / config.viscosity;
  if (alpha * r_tilde >= t_hat)
    throw Error("uniqueness_gap: admissibility alpha*r_tilde < t_hat violated");
  if (t_hat >= config.horizon) throw Error("uniqueness_gap: t_hat must lie inside [0, T)");

  auto [traj1, rep1] = picard_solve(v1hat, config);
  auto [traj2, rep2] = picard_solve(v2hat, config);

  UniquenessReport rep;
  rep.times = traj1.times;
  rep.report1 = rep1;
  rep.report2 = rep2;
  for (std::size_t i = 0; i < traj1.nodes(); ++i) {
    const SpectralField diff = traj1.states[i] - traj2.states[i];
    rep.gap_r_tilde.push_back(norm_analytic(diff, r_tilde));
    rep.gap_r.push_back(norm_analytic(diff, r));
    if (rep.times[i] >= t_hat) rep.K = std::max(rep.K, rep.gap_r_tilde.back());
  }

  if (rep.K > 0) {
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
      const double dt = rep.times[i] - t_hat;
      if (dt <= 0) continue;
      const double c = rep.gap_r[i] * (r_tilde - r) / (rep.K * std::numbers::e * dt);
      rep.envelope_constant = std::max(rep.envelope_constant, c);
    }
  }

  const double probe_t = t_hat + probe_offset;
  std::size_t best = 0;
  for (std::size_t i = 1; i < rep.times.size(); ++i)
    if (std::abs(rep.times[i] - probe_t) < std::abs(rep.times[best] - probe_t)) best = i;
  rep.gap_at_probe = rep.gap_r_tilde[best];
  rep.probe_time = rep.times[best];

  const double scale = std::max(rep.K, 1e-300);
  for (std::size_t i = 0; i + 1 < rep.times.size(); ++i) {
    const double a = rep.gap_r_tilde[i], b = rep.gap_r_tilde[i + 1];
    if (a > 1e-14 * scale && b > 1e-14 * scale)
      if (b > 10 * a || a > 10 * b) rep.continuous = false;
  }
  return rep;
}

}  // namespace nstorus
