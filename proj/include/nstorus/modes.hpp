#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "nstorus/errors.hpp"

namespace nstorus {

/// ℓ¹ norm |k| = Σ|k_j| of an integer wavevector.
inline double wavevector_l1(std::span<const int> k) {
  long s = 0;
  for (int kj : k) s += std::abs(static_cast<long>(kj));
  return static_cast<double>(s);
}

/// Squared Euclidean norm |k|_e² = Σ k_j².
inline double wavevector_l2sq(std::span<const int> k) {
  long s = 0;
  for (int kj : k) s += static_cast<long>(kj) * kj;
  return static_cast<double>(s);
}

/// Max norm |k|_m = max_j |k_j|.
inline double wavevector_linf(std::span<const int> k) {
  long s = 0;
  for (int kj : k) s = std::max(s, std::abs(static_cast<long>(kj)));
  return static_cast<double>(s);
}

/// The cube of retained wavevectors {k ∈ Z^n : |k|_∞ ≤ N} in lexicographic
/// order (k_0 most significant, each coordinate ascending from -N to N).
/// Shared immutable bookkeeping for every field with the same (dim, trunc):
/// the integer mode table and precomputed norms.
class ModeSet {
 public:
  ModeSet(int dim, int trunc) : dim_(dim), trunc_(trunc) {
    if (dim < 1) throw ShapeError("ModeSet: dim must be >= 1");
    if (trunc < 1) throw ShapeError("ModeSet: trunc must be >= 1");
    const int side = 2 * trunc + 1;
    Eigen::Index count = 1;
    for (int d = 0; d < dim; ++d) count *= side;
    k_.resize(count, dim);
    l1_.resize(count);
    l2sq_.resize(count);
    l2_.resize(count);
    std::vector<int> cur(dim, -trunc);
    for (Eigen::Index i = 0; i < count; ++i) {
      long s1 = 0, s2 = 0;
      for (int d = 0; d < dim; ++d) {
        k_(i, d) = cur[d];
        s1 += std::abs(static_cast<long>(cur[d]));
        s2 += static_cast<long>(cur[d]) * cur[d];
      }
      l1_(i) = static_cast<double>(s1);
      l2sq_(i) = static_cast<double>(s2);
      l2_(i) = std::sqrt(l2sq_(i));
      for (int d = dim - 1; d >= 0; --d) {
        if (++cur[d] <= trunc) break;
        cur[d] = -trunc;
      }
    }
  }

  int dim() const { return dim_; }
  int trunc() const { return trunc_; }
  Eigen::Index size() const { return k_.rows(); }

  /// Integer mode table, size() x dim.
  const Eigen::ArrayXXi& k() const { return k_; }
  const Eigen::ArrayXd& l1() const { return l1_; }
  const Eigen::ArrayXd& l2sq() const { return l2sq_; }
  const Eigen::ArrayXd& l2() const { return l2_; }

  int k(Eigen::Index mode, int axis) const { return k_(mode, axis); }

  /// Lexicographic index of a wavevector; -1 if outside the cube.
  Eigen::Index index_of(std::span<const int> k) const {
    Eigen::Index idx = 0;
    const int side = 2 * trunc_ + 1;
    for (int d = 0; d < dim_; ++d) {
      if (std::abs(k[d]) > trunc_) return -1;
      idx = idx * side + (k[d] + trunc_);
    }
    return idx;
  }

  /// Index of -k. Negation reverses lexicographic order.
  Eigen::Index negated(Eigen::Index mode) const { return size() - 1 - mode; }

  /// Index of the zero mode (cube centre).
  Eigen::Index zero_index() const { return (size() - 1) / 2; }

  /// The H_s weight w(k) = max(|k|_1, 1); keeps the mean mode visible and
  /// makes w(k)^s finite for negative s.
  double weight(Eigen::Index mode) const { return std::max(l1_(mode), 1.0); }

  Eigen::ArrayXd weights() const { return l1_.max(1.0); }

  /// Shared instance per (dim, trunc); ModeSet is immutable so sharing is safe.
  static std::shared_ptr<const ModeSet> get(int dim, int trunc) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const ModeSet>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{dim, trunc}];
    if (!slot) slot = std::make_shared<const ModeSet>(dim, trunc);
    return slot;
  }

 private:
  int dim_;
  int trunc_;
  Eigen::ArrayXXi k_;
  Eigen::ArrayXd l1_;
  Eigen::ArrayXd l2sq_;
  Eigen::ArrayXd l2_;
};

}  // namespace nstorus
