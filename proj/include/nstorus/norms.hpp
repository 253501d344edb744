#pragma once

#include <cmath>

#include "nstorus/field.hpp"

namespace nstorus {

/// ‖f‖_s = Σ_k |f_k| w(k)^s summed over all components, w(k) = max(|k|_1, 1).
template <typename Scalar>
Scalar norm_hs(const SpectralFieldT<Scalar>& f, Scalar s) {
  const Eigen::ArrayXd w = f.modes().weights().pow(static_cast<double>(s));
  Scalar total = 0;
  for (int c = 0; c < f.components(); ++c)
    total += (f.coeffs().col(c).abs() * w.cast<Scalar>()).sum();
  return total;
}

/// Analytic norm ‖f‖*_r = Σ_k |f_k| e^{|k|_1 r} over all components.
/// Finiteness of the untruncated sum certifies holomorphy on |Im x| < r;
/// on truncated fields it is a computable diagnostic.
template <typename Scalar>
Scalar norm_analytic(const SpectralFieldT<Scalar>& f, Scalar r) {
  if (r < 0) throw Error("norm_analytic: radius must be >= 0");
  const Eigen::ArrayXd w = (f.modes().l1() * static_cast<double>(r)).exp();
  Scalar total = 0;
  for (int c = 0; c < f.components(); ++c)
    total += (f.coeffs().col(c).abs() * w.cast<Scalar>()).sum();
  return total;
}

/// Analytic-norm distance between same-shape fields.
template <typename Scalar>
Scalar analytic_distance(const SpectralFieldT<Scalar>& f, const SpectralFieldT<Scalar>& g,
                         Scalar r) {
  f.require_same_shape(g);
  const Eigen::ArrayXd w = (f.modes().l1() * static_cast<double>(r)).exp();
  Scalar total = 0;
  for (int c = 0; c < f.components(); ++c)
    total += ((f.coeffs().col(c) - g.coeffs().col(c)).abs() * w.cast<Scalar>()).sum();
  return total;
}

}  // namespace nstorus
