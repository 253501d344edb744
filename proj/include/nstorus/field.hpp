#pragma once

#include <Eigen/Dense>

#include <complex>
#include <initializer_list>
#include <memory>
#include <span>
#include <utility>

#include "nstorus/errors.hpp"
#include "nstorus/modes.hpp"

namespace nstorus {

/// Truncated Fourier representation of a 2π-periodic field on the n-torus.
///
/// Holds one complex coefficient per (mode, component) over the cube
/// |k|_∞ ≤ N. components() == 1 is a scalar field, components() == dim()
/// a velocity field. Values are immutable in spirit: every operator in the
/// library returns a fresh field, so instances can be shared across threads.
template <typename Scalar>
class SpectralFieldT {
 public:
  using Complex = std::complex<Scalar>;
  using CoeffArray = Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic>;

  SpectralFieldT() = default;

  SpectralFieldT(int dim, int trunc, int components)
      : modes_(ModeSet::get(dim, trunc)), components_(components) {
    if (components < 1) throw ShapeError("SpectralField: components must be >= 1");
    coeffs_ = CoeffArray::Zero(modes_->size(), components);
  }

  SpectralFieldT(std::shared_ptr<const ModeSet> modes, int components)
      : modes_(std::move(modes)), components_(components) {
    if (components < 1) throw ShapeError("SpectralField: components must be >= 1");
    coeffs_ = CoeffArray::Zero(modes_->size(), components);
  }

  int dim() const { return modes_->dim(); }
  int trunc() const { return modes_->trunc(); }
  int components() const { return components_; }
  Eigen::Index num_modes() const { return modes_->size(); }
  const ModeSet& modes() const { return *modes_; }
  std::shared_ptr<const ModeSet> modes_ptr() const { return modes_; }

  const CoeffArray& coeffs() const { return coeffs_; }
  CoeffArray& coeffs() { return coeffs_; }

  Complex operator()(Eigen::Index mode, int comp = 0) const { return coeffs_(mode, comp); }
  Complex& operator()(Eigen::Index mode, int comp = 0) { return coeffs_(mode, comp); }

  /// Coefficient at wavevector k; zero outside the cube.
  Complex coeff(std::span<const int> k, int comp = 0) const {
    const Eigen::Index i = modes_->index_of(k);
    return i < 0 ? Complex(0) : coeffs_(i, comp);
  }
  Complex coeff(std::initializer_list<int> k, int comp = 0) const {
    return coeff(std::span<const int>(k.begin(), k.size()), comp);
  }

  void set_coeff(std::span<const int> k, Complex value, int comp = 0) {
    const Eigen::Index i = modes_->index_of(k);
    if (i < 0) throw ShapeError("set_coeff: wavevector outside truncation cube");
    coeffs_(i, comp) = value;
  }
  void set_coeff(std::initializer_list<int> k, Complex value, int comp = 0) {
    set_coeff(std::span<const int>(k.begin(), k.size()), value, comp);
  }

  bool same_shape(const SpectralFieldT& other) const {
    return dim() == other.dim() && trunc() == other.trunc() &&
           components_ == other.components_;
  }

  /// coeff(-k) == conj(coeff(k)) within tol, i.e. the field is real-valued.
  bool is_conjugate_symmetric(Scalar tol = Scalar(1e-12)) const {
    const Eigen::Index L = num_modes();
    for (int c = 0; c < components_; ++c)
      for (Eigen::Index i = 0; i < L; ++i)
        if (std::abs(coeffs_(i, c) - std::conj(coeffs_(L - 1 - i, c))) > tol) return false;
    return true;
  }

  /// Project onto the real-valued subspace: coeff(k) <- (coeff(k) + conj(coeff(-k)))/2.
  void enforce_conjugate_symmetry() {
    const Eigen::Index L = num_modes();
    for (int c = 0; c < components_; ++c)
      for (Eigen::Index i = 0; i < L / 2 + 1; ++i) {
        const Complex avg =
            Scalar(0.5) * (coeffs_(i, c) + std::conj(coeffs_(L - 1 - i, c)));
        coeffs_(i, c) = avg;
        coeffs_(L - 1 - i, c) = std::conj(avg);
      }
  }

  bool all_finite() const { return coeffs_.isFinite().all(); }

  Scalar max_abs() const { return coeffs_.abs().maxCoeff(); }

  /// Σ over all modes and components of |coeff| (the ℓ¹ norm, = ‖·‖_0 up to
  /// the k = 0 weight convention).
  Scalar l1() const { return coeffs_.abs().sum(); }

  /// Value of the truncated series at the complex point x + iy:
  /// Σ_k f_k e^{i(k,x) - (k,y)} per component.
  Eigen::Vector<Complex, Eigen::Dynamic> evaluate(std::span<const Scalar> x,
                                                  std::span<const Scalar> y = {}) const {
    const Eigen::Index L = num_modes();
    Eigen::Vector<Complex, Eigen::Dynamic> out =
        Eigen::Vector<Complex, Eigen::Dynamic>::Zero(components_);
    for (Eigen::Index i = 0; i < L; ++i) {
      Scalar phase = 0, damp = 0;
      for (int d = 0; d < dim(); ++d) {
        phase += Scalar(modes_->k(i, d)) * x[d];
        if (!y.empty()) damp += Scalar(modes_->k(i, d)) * y[d];
      }
      const Complex factor = std::exp(Complex(-damp, phase));
      for (int c = 0; c < components_; ++c) out(c) += coeffs_(i, c) * factor;
    }
    return out;
  }

  SpectralFieldT& operator+=(const SpectralFieldT& rhs) {
    require_same_shape(rhs);
    coeffs_ += rhs.coeffs_;
    return *this;
  }
  SpectralFieldT& operator-=(const SpectralFieldT& rhs) {
    require_same_shape(rhs);
    coeffs_ -= rhs.coeffs_;
    return *this;
  }
  SpectralFieldT& operator*=(Scalar a) {
    coeffs_ *= a;
    return *this;
  }
  SpectralFieldT& operator*=(Complex a) {
    coeffs_ *= a;
    return *this;
  }

  friend SpectralFieldT operator+(SpectralFieldT a, const SpectralFieldT& b) { return a += b; }
  friend SpectralFieldT operator-(SpectralFieldT a, const SpectralFieldT& b) { return a -= b; }
  friend SpectralFieldT operator*(Scalar a, SpectralFieldT f) { return f *= a; }
  friend SpectralFieldT operator*(SpectralFieldT f, Scalar a) { return f *= a; }

  void require_same_shape(const SpectralFieldT& other) const {
    if (!same_shape(other)) throw ShapeError("field shape mismatch");
  }

 private:
  std::shared_ptr<const ModeSet> modes_;
  int components_ = 0;
  CoeffArray coeffs_;
};

using SpectralField = SpectralFieldT<double>;

/// View of one component as a scalar field (copying the column).
template <typename Scalar>
SpectralFieldT<Scalar> component(const SpectralFieldT<Scalar>& f, int comp) {
  SpectralFieldT<Scalar> out(f.modes_ptr(), 1);
  out.coeffs().col(0) = f.coeffs().col(comp);
  return out;
}

/// Σ over components and modes of |f_k - g_k| (ℓ¹ distance).
template <typename Scalar>
Scalar l1_distance(const SpectralFieldT<Scalar>& f, const SpectralFieldT<Scalar>& g) {
  f.require_same_shape(g);
  return (f.coeffs() - g.coeffs()).abs().sum();
}

}  // namespace nstorus
