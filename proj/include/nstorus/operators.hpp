#pragma once

#include <cmath>
#include <complex>

#include "nstorus/field.hpp"

namespace nstorus {

namespace detail {

/// Apply a real per-mode multiplier to every component.
template <typename Scalar>
SpectralFieldT<Scalar> apply_multiplier(const SpectralFieldT<Scalar>& f,
                                        const Eigen::ArrayXd& m) {
  SpectralFieldT<Scalar> out = f;
  for (int c = 0; c < f.components(); ++c)
    out.coeffs().col(c) *= m.cast<std::complex<Scalar>>();
  return out;
}

}  // namespace detail

/// ∂_j: multiplies mode k by i k_j. Axis is 0-based.
template <typename Scalar>
SpectralFieldT<Scalar> derivative(const SpectralFieldT<Scalar>& f, int axis) {
  if (axis < 0 || axis >= f.dim()) throw ShapeError("derivative: axis out of range");
  const ModeSet& ms = f.modes();
  SpectralFieldT<Scalar> out = f;
  const Eigen::ArrayXcd ik = ms.k().col(axis).cast<double>() * std::complex<double>(0, 1);
  for (int c = 0; c < f.components(); ++c)
    out.coeffs().col(c) *= ik.cast<std::complex<Scalar>>();
  return out;
}

/// ∇f of a scalar field: the vector (∂_1 f, …, ∂_n f).
template <typename Scalar>
SpectralFieldT<Scalar> gradient(const SpectralFieldT<Scalar>& f) {
  if (f.components() != 1) throw ShapeError("gradient: expects a scalar field");
  const ModeSet& ms = f.modes();
  SpectralFieldT<Scalar> out(f.modes_ptr(), f.dim());
  for (int d = 0; d < f.dim(); ++d) {
    const Eigen::ArrayXcd ik = ms.k().col(d).cast<double>() * std::complex<double>(0, 1);
    out.coeffs().col(d) = f.coeffs().col(0) * ik.cast<std::complex<Scalar>>();
  }
  return out;
}

/// div v = Σ_j ∂_j v^j of a velocity field.
template <typename Scalar>
SpectralFieldT<Scalar> divergence(const SpectralFieldT<Scalar>& v) {
  if (v.components() != v.dim()) throw ShapeError("divergence: expects components == dim");
  const ModeSet& ms = v.modes();
  SpectralFieldT<Scalar> out(v.modes_ptr(), 1);
  for (int d = 0; d < v.dim(); ++d) {
    const Eigen::ArrayXcd ik = ms.k().col(d).cast<double>() * std::complex<double>(0, 1);
    out.coeffs().col(0) += v.coeffs().col(d) * ik.cast<std::complex<Scalar>>();
  }
  return out;
}

/// Δ: multiplies mode k by -|k|_e².
template <typename Scalar>
SpectralFieldT<Scalar> laplacian(const SpectralFieldT<Scalar>& f) {
  return detail::apply_multiplier(f, (-f.modes().l2sq()).eval());
}

/// Δ⁻¹ on the zero-mean subspace: coeff(k) <- -coeff(k)/|k|_e² for k ≠ 0.
/// The caller must honour the zero-mean contract; tolerance is relative to
/// the field's ℓ¹ size.
template <typename Scalar>
SpectralFieldT<Scalar> inv_laplacian(const SpectralFieldT<Scalar>& f,
                                     Scalar mean_tol_rel = Scalar(1e-12)) {
  const Eigen::Index zero = f.modes().zero_index();
  const Scalar tol = mean_tol_rel * f.l1();
  for (int c = 0; c < f.components(); ++c) {
    const Scalar mean_abs = std::abs(f(zero, c));
    if (mean_abs > tol) throw NonZeroMeanError(static_cast<double>(mean_abs),
                                               static_cast<double>(tol));
  }
  Eigen::ArrayXd m = -f.modes().l2sq().cwiseMax(1.0).inverse();
  m(zero) = 0.0;
  SpectralFieldT<Scalar> out = detail::apply_multiplier(f, m);
  for (int c = 0; c < f.components(); ++c) out(zero, c) = std::complex<Scalar>(0);
  return out;
}

/// Heat semigroup Sᵗ: multiplies mode k by e^{-ν|k|_e² t}.
template <typename Scalar>
SpectralFieldT<Scalar> heat_semigroup(const SpectralFieldT<Scalar>& f, Scalar t, Scalar nu) {
  if (t < 0) throw Error("heat_semigroup: negative time rejected");
  if (nu <= 0) throw Error("heat_semigroup: viscosity must be positive");
  return detail::apply_multiplier(
      f, (-(static_cast<double>(nu * t)) * f.modes().l2sq()).exp().eval());
}

/// P_ρ^λ: multiplies mode k by e^{-λ|k|_e² ρ}. Same family as Sᵗ with the
/// diffusion constant made explicit.
template <typename Scalar>
SpectralFieldT<Scalar> p_semigroup(const SpectralFieldT<Scalar>& f, Scalar lambda, Scalar rho) {
  if (lambda < 0) throw Error("p_semigroup: negative time rejected");
  if (rho <= 0) throw Error("p_semigroup: rho must be positive");
  return detail::apply_multiplier(
      f, (-(static_cast<double>(lambda * rho)) * f.modes().l2sq()).exp().eval());
}

/// Λᵗ: multiplies mode k by e^{-|k|_e t ν/2}, the first-order smoothing that
/// measures the growing analyticity strip.
template <typename Scalar>
SpectralFieldT<Scalar> lambda_smoothing(const SpectralFieldT<Scalar>& f, Scalar t, Scalar nu) {
  if (t < 0) throw Error("lambda_smoothing: negative time rejected");
  return detail::apply_multiplier(
      f, (-(static_cast<double>(nu * t) / 2.0) * f.modes().l2()).exp().eval());
}

/// D: multiplies mode k by |k|_1.
template <typename Scalar>
SpectralFieldT<Scalar> d_multiplier(const SpectralFieldT<Scalar>& f) {
  return detail::apply_multiplier(f, f.modes().l1());
}

/// A^a_b = Δ⁻¹∂_a∂_b - δ_ab applied to a scalar field; the mode-k multiplier
/// is k_a k_b / |k|_e² - δ_ab, and -δ_ab at k = 0. Indices are 0-based.
template <typename Scalar>
SpectralFieldT<Scalar> a_operator(const SpectralFieldT<Scalar>& u, int a, int b) {
  if (u.components() != 1) throw ShapeError("a_operator: expects a scalar field");
  if (a < 0 || a >= u.dim() || b < 0 || b >= u.dim())
    throw ShapeError("a_operator: component index out of range");
  const ModeSet& ms = u.modes();
  const Eigen::ArrayXd ka = ms.k().col(a).cast<double>();
  const Eigen::ArrayXd kb = ms.k().col(b).cast<double>();
  Eigen::ArrayXd m = ka * kb / ms.l2sq().cwiseMax(1.0);
  m(ms.zero_index()) = 0.0;
  if (a == b) m -= 1.0;
  return detail::apply_multiplier(u, m);
}

/// Leray projection: v_k <- v_k - k (k·v_k)/|k|_e² for k ≠ 0. Removes the
/// gradient part; identity on the mean mode.
template <typename Scalar>
SpectralFieldT<Scalar> leray_project(const SpectralFieldT<Scalar>& v) {
  if (v.components() != v.dim()) throw ShapeError("leray_project: expects components == dim");
  SpectralFieldT<Scalar> out = v;
  const auto& ms = v.modes();
  const Eigen::Index L = ms.size();
  const Eigen::Index zero = ms.zero_index();
  const int n = v.dim();
  for (Eigen::Index i = 0; i < L; ++i) {
    if (i == zero) continue;
    std::complex<Scalar> kdotv(0);
    for (int d = 0; d < n; ++d) kdotv += Scalar(ms.k(i, d)) * v(i, d);
    const Scalar inv = Scalar(1) / Scalar(ms.l2sq()(i));
    for (int d = 0; d < n; ++d) out(i, d) -= Scalar(ms.k(i, d)) * kdotv * inv;
  }
  return out;
}

}  // namespace nstorus
