#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nstorus/config.hpp"
#include "nstorus/field.hpp"
#include "nstorus/operators.hpp"
#include "nstorus/serialize.hpp"

namespace nstorus {

/// The classical 2-D vortex v = (sin x₁ cos x₂, -cos x₁ sin x₂): four modes
/// (±1, ±1) per component, exactly divergence-free in double precision.
inline SpectralField taylor_green(int trunc) {
  SpectralField v(2, trunc, 2);
  const std::complex<double> i4(0, 0.25);
  // sin x₁ cos x₂
  v.set_coeff({1, 1}, -i4, 0);
  v.set_coeff({1, -1}, -i4, 0);
  v.set_coeff({-1, 1}, i4, 0);
  v.set_coeff({-1, -1}, i4, 0);
  // -cos x₁ sin x₂
  v.set_coeff({1, 1}, i4, 1);
  v.set_coeff({1, -1}, -i4, 1);
  v.set_coeff({-1, 1}, i4, 1);
  v.set_coeff({-1, -1}, -i4, 1);
  return v;
}

/// amplitude · cos((k,x)) · e with e the Leray projection of the requested
/// direction; an already-solenoidal direction passes through unchanged.
inline SpectralField single_mode(int dim, int trunc, std::span<const int> k,
                                 double amplitude, std::span<const double> direction) {
  if (static_cast<int>(k.size()) != dim || static_cast<int>(direction.size()) != dim)
    throw GeneratorError("initial.mode", "single-mode: arity mismatch with dim");
  long l2 = 0;
  for (int kd : k) l2 += static_cast<long>(kd) * kd;
  if (l2 == 0) throw GeneratorError("initial.mode", "single-mode: k must be nonzero");
  SpectralField v(dim, trunc, dim);
  if (v.modes().index_of(k) < 0)
    throw GeneratorError("initial.mode", "single-mode: k outside the truncation cube");

  double kdote = 0, enorm = 0;
  for (int d = 0; d < dim; ++d) {
    kdote += k[d] * direction[d];
    enorm += direction[d] * direction[d];
  }
  if (enorm == 0) throw GeneratorError("initial.direction", "single-mode: zero direction");
  std::vector<double> e(dim);
  double pnorm = 0;
  for (int d = 0; d < dim; ++d) {
    e[d] = direction[d] - k[d] * kdote / static_cast<double>(l2);
    pnorm += e[d] * e[d];
  }
  if (pnorm < 1e-28)
    throw GeneratorError("initial.direction", "single-mode: direction parallel to k");

  std::vector<int> kneg(dim);
  for (int d = 0; d < dim; ++d) kneg[d] = -k[d];
  for (int d = 0; d < dim; ++d) {
    v.set_coeff(k, amplitude * e[d] / 2, d);
    v.set_coeff(kneg, amplitude * e[d] / 2, d);
  }
  return v;
}

namespace detail {

/// Deterministic integer vector orthogonal to k: k_b e_a - k_a e_b with b the
/// axis of the largest |k_d|. The integer arithmetic makes (k, u) exactly
/// zero in floating point.
inline void solenoidal_direction(std::span<const int> k, std::span<double> u) {
  const int n = static_cast<int>(k.size());
  int b = 0;
  for (int d = 1; d < n; ++d)
    if (std::abs(k[d]) > std::abs(k[b])) b = d;
  const int a = b == 0 ? 1 : 0;
  std::fill(u.begin(), u.end(), 0.0);
  u[a] = k[b];
  u[b] = -k[a];
  const double norm = std::sqrt(u[a] * u[a] + u[b] * u[b]);
  u[a] /= norm;
  u[b] /= norm;
}

}  // namespace detail

/// Random divergence-free data with deterministic per-mode magnitudes
/// amplitude · w(k)^{-(s+n+1)} and seeded phases: one solenoidal polarisation
/// per conjugate mode pair. ‖·‖_s is finite by construction and scales
/// linearly with the amplitude.
inline SpectralField random_hs(int dim, int trunc, double s, double amplitude,
                               std::uint64_t seed) {
  SpectralField v(dim, trunc, dim);
  const auto& ms = v.modes();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  std::vector<int> k(dim);
  std::vector<double> u(dim);
  const Eigen::Index zero = ms.zero_index();
  // Lexicographically positive modes only; the mirror image carries the
  // conjugate so the field is real-valued.
  for (Eigen::Index i = zero + 1; i < ms.size(); ++i) {
    for (int d = 0; d < dim; ++d) k[d] = ms.k(i, d);
    detail::solenoidal_direction(k, u);
    const double mag = amplitude * std::pow(ms.weight(i), -(s + dim + 1));
    const std::complex<double> phi = std::polar(mag, angle(rng));
    for (int d = 0; d < dim; ++d) {
      v(i, d) = phi * u[d];
      v(ms.negated(i), d) = std::conj(phi * u[d]);
    }
  }
  return v;
}

/// Named initial-data source for the CLI.
struct InitialSpec {
  std::string generator;           // taylor-green | single-mode | random-hs | file
  std::vector<int> mode;           // single-mode
  std::vector<double> direction;   // single-mode
  double amplitude = 1.0;          // single-mode, random-hs
  double smoothness = 2.0;         // random-hs
  std::string path;                // file
};

inline SpectralField generate_initial(const InitialSpec& spec, const SolverConfig& config,
                                      std::uint64_t seed) {
  if (spec.generator == "taylor-green") {
    if (config.dim != 2)
      throw GeneratorError("initial.generator", "taylor-green requires dim == 2");
    return taylor_green(config.trunc);
  }
  if (spec.generator == "single-mode")
    return single_mode(config.dim, config.trunc, spec.mode, spec.amplitude, spec.direction);
  if (spec.generator == "random-hs")
    return random_hs(config.dim, config.trunc, spec.smoothness, spec.amplitude, seed);
  if (spec.generator == "file") {
    SpectralField f = load_field(spec.path);
    if (f.dim() != config.dim || f.trunc() != config.trunc || f.components() != config.dim)
      throw GeneratorError("initial.path", "field file does not match the config cube");
    return f;
  }
  throw GeneratorError("initial.generator", "unknown generator: " + spec.generator);
}

}  // namespace nstorus
