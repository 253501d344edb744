#pragma once

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <complex>
#include <thread>
#include <vector>

#include "nstorus/field.hpp"

namespace nstorus {

enum class ConvolveMethod { Auto, Direct, Fft };

namespace detail {

template <typename F>
void parallel_for(Eigen::Index begin, Eigen::Index end, int threads, F&& body) {
  const Eigen::Index count = end - begin;
  if (threads <= 1 || count < 2) {
    for (Eigen::Index i = begin; i < end; ++i) body(i);
    return;
  }
  const int nt = static_cast<int>(std::min<Eigen::Index>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    const Eigen::Index lo = begin + count * t / nt;
    const Eigen::Index hi = begin + count * (t + 1) / nt;
    pool.emplace_back([lo, hi, &body] {
      for (Eigen::Index i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Exact truncated convolution by the double loop over mode pairs. Output
/// mode k collects Σ_{p+q=k} a_p b_q with p, q, k all inside the cube.
template <typename Value>
void convolve_direct(const ModeSet& ms, const Value* a, const Value* b, Value* out,
                     int threads) {
  const Eigen::Index L = ms.size();
  const int n = ms.dim();
  const int N = ms.trunc();
  const int side = 2 * N + 1;
  parallel_for(0, L, threads, [&](Eigen::Index o) {
    Value acc{};
    for (Eigen::Index p = 0; p < L; ++p) {
      Eigen::Index q = 0;
      bool inside = true;
      for (int d = 0; d < n; ++d) {
        const int qd = ms.k(o, d) - ms.k(p, d);
        if (qd < -N || qd > N) {
          inside = false;
          break;
        }
        q = q * side + (qd + N);
      }
      if (inside) acc += a[p] * b[q];
    }
    out[o] = acc;
  });
}

/// Smallest 5-smooth integer >= n; keeps the mixed-radix FFT fast.
inline int next_fast_size(int n) {
  for (int m = n;; ++m) {
    int r = m;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

/// Zero-padded FFT convolution. With P >= 2(2N+1)-1 points per axis the
/// cyclic product reproduces the linear convolution on the whole doubled
/// spectrum, so the retained cube is alias-free.
inline void convolve_fft(const ModeSet& ms, const std::complex<double>* a,
                         const std::complex<double>* b, std::complex<double>* out,
                         int threads) {
  const Eigen::Index L = ms.size();
  const int n = ms.dim();
  const int N = ms.trunc();
  const int P = next_fast_size(2 * (2 * N + 1) - 1);
  Eigen::Index total = 1;
  for (int d = 0; d < n; ++d) total *= P;

  std::vector<Eigen::Index> stride(n);
  stride[n - 1] = 1;
  for (int d = n - 2; d >= 0; --d) stride[d] = stride[d + 1] * P;

  auto padded_index = [&](Eigen::Index mode) {
    Eigen::Index idx = 0;
    for (int d = 0; d < n; ++d) {
      const int kd = ms.k(mode, d);
      idx += static_cast<Eigen::Index>(kd >= 0 ? kd : kd + P) * stride[d];
    }
    return idx;
  };

  std::vector<std::complex<double>> fa(total), fb(total);
  for (Eigen::Index i = 0; i < L; ++i) {
    const Eigen::Index j = padded_index(i);
    fa[j] = a[i];
    fb[j] = b[i];
  }

  // Separable n-dimensional transform: 1-D FFTs along every axis line.
  auto transform = [&](std::vector<std::complex<double>>& data, bool inverse) {
    for (int axis = 0; axis < n; ++axis) {
      const Eigen::Index st = stride[axis];
      const Eigen::Index lines = total / P;
      parallel_for(0, lines, threads, [&](Eigen::Index line) {
        // Decompose the line id into the base offset of an axis-aligned run.
        Eigen::Index rem = line, base = 0;
        for (int d = n - 1; d >= 0; --d) {
          if (d == axis) continue;
          const Eigen::Index coord = rem % P;
          rem /= P;
          base += coord * stride[d];
        }
        thread_local Eigen::FFT<double> fft;
        std::vector<std::complex<double>> in(P), sp(P);
        for (int i = 0; i < P; ++i) in[i] = data[base + i * st];
        if (inverse)
          fft.inv(sp, in);
        else
          fft.fwd(sp, in);
        for (int i = 0; i < P; ++i) data[base + i * st] = sp[i];
      });
    }
  };

  transform(fa, false);
  transform(fb, false);
  for (Eigen::Index i = 0; i < total; ++i) fa[i] *= fb[i];
  transform(fa, true);

  for (Eigen::Index i = 0; i < L; ++i) out[i] = fa[padded_index(i)];
}

}  // namespace detail

/// Fourier coefficients of the pointwise product fg, Galerkin-truncated to
/// the cube |k|_∞ ≤ N: (fg)_k = Σ_{j+m=k} f_j g_m computed alias-free.
/// Both inputs must be scalar fields on the same cube. Direct and FFT paths
/// are interchangeable; Auto picks the direct loop for N ≤ 8.
template <typename Scalar>
SpectralFieldT<Scalar> convolve(const SpectralFieldT<Scalar>& f, const SpectralFieldT<Scalar>& g,
                                ConvolveMethod method = ConvolveMethod::Auto, int threads = 1) {
  if (f.dim() != g.dim() || f.trunc() != g.trunc())
    throw ShapeError("convolve: dim/trunc mismatch");
  if (f.components() != 1 || g.components() != 1)
    throw ShapeError("convolve: expects scalar fields");
  SpectralFieldT<Scalar> out(f.modes_ptr(), 1);
  if (method == ConvolveMethod::Auto)
    method = f.trunc() <= 8 ? ConvolveMethod::Direct : ConvolveMethod::Fft;
  if (method == ConvolveMethod::Direct) {
    detail::convolve_direct(f.modes(), f.coeffs().col(0).data(), g.coeffs().col(0).data(),
                            out.coeffs().col(0).data(), threads);
  } else {
    if constexpr (std::is_same_v<Scalar, double>) {
      detail::convolve_fft(f.modes(), f.coeffs().col(0).data(), g.coeffs().col(0).data(),
                           out.coeffs().col(0).data(), threads);
    } else {
      throw Error("convolve: FFT path is double precision only");
    }
  }
  return out;
}

/// Convolution of nonnegative coefficient sequences (majorant arithmetic).
/// The result is clamped at zero so FFT roundoff cannot produce a negative
/// majorant coefficient.
inline Eigen::ArrayXd convolve_nonneg(const ModeSet& ms, const Eigen::ArrayXd& a,
                                      const Eigen::ArrayXd& b,
                                      ConvolveMethod method = ConvolveMethod::Auto,
                                      int threads = 1) {
  if (a.size() != ms.size() || b.size() != ms.size())
    throw ShapeError("convolve_nonneg: size mismatch");
  Eigen::ArrayXd out(ms.size());
  if (method == ConvolveMethod::Auto)
    method = ms.trunc() <= 8 ? ConvolveMethod::Direct : ConvolveMethod::Fft;
  if (method == ConvolveMethod::Direct) {
    detail::convolve_direct(ms, a.data(), b.data(), out.data(), threads);
  } else {
    std::vector<std::complex<double>> ca(ms.size()), cb(ms.size()), co(ms.size());
    for (Eigen::Index i = 0; i < ms.size(); ++i) {
      ca[i] = a(i);
      cb[i] = b(i);
    }
    detail::convolve_fft(ms, ca.data(), cb.data(), co.data(), threads);
    for (Eigen::Index i = 0; i < ms.size(); ++i) out(i) = co[i].real();
  }
  return out.max(0.0);
}

}  // namespace nstorus
