#pragma once

// Fourier analysis on F_p:
//   fhat(z) = sum_x f(x) e_p(xz),   f(x) = p^{-1} sum_z fhat(z) e_p(-xz),
//   ||f||_r = (sum_x |f(x)|^r)^{1/r}  (plain sum, no density weight),
//   ||f||_2 = p^{-1/2} ||fhat||_2.

#include <bfp/fp_core.hpp>
#include <bfp/parallel.hpp>
#include <bfp/summation.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace bfp {

/// A complex-valued function on F_p.
class GridFunction {
 public:
  explicit GridFunction(FieldPtr field) : field_(std::move(field)), values_(field_->size()) {}

  GridFunction(FieldPtr field, std::vector<complex> values) : field_(std::move(field)), values_(std::move(values)) {
    if (values_.size() != field_->size()) {
      throw Error(ErrorKind::InvalidArgument, "grid function length " + std::to_string(values_.size()) +
                                                  " does not match p=" + std::to_string(field_->p()));
    }
    for (const auto& v : values_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw Error(ErrorKind::InvalidArgument, "grid function has a non-finite entry");
      }
    }
  }

  static GridFunction delta(FieldPtr field, std::uint64_t at = 0) {
    GridFunction f(std::move(field));
    f.values_.at(at) = 1.0;
    return f;
  }

  static GridFunction constant(FieldPtr field, complex c) {
    GridFunction f(std::move(field));
    for (auto& v : f.values_) v = c;
    return f;
  }

  /// Entries with real and imaginary parts uniform in [-1, 1).
  static GridFunction random(FieldPtr field, std::uint64_t seed) {
    GridFunction f(std::move(field));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (auto& v : f.values_) {
      const double re = unif(rng);
      v = complex(re, unif(rng));
    }
    return f;
  }

  const FieldContext& field() const noexcept { return *field_; }
  const FieldPtr& field_ptr() const noexcept { return field_; }
  std::size_t size() const noexcept { return values_.size(); }

  complex& operator[](std::uint64_t x) { return values_[x]; }
  const complex& operator[](std::uint64_t x) const { return values_[x]; }
  complex& operator[](FpElement x) { return values_[x.value]; }
  const complex& operator[](FpElement x) const { return values_[x.value]; }

  std::span<complex> values() noexcept { return values_; }
  std::span<const complex> values() const noexcept { return values_; }

  GridFunction& operator*=(complex c) {
    for (auto& v : values_) v *= c;
    return *this;
  }
  friend GridFunction operator*(complex c, GridFunction f) { return f *= c; }

  GridFunction& operator+=(const GridFunction& other) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
  }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }

  GridFunction conj() const {
    GridFunction g(*this);
    for (auto& v : g.values_) v = std::conj(v);
    return g;
  }

 private:
  FieldPtr field_;
  std::vector<complex> values_;
};

enum class DftMode { naive, fast };

namespace detail {

inline void fft_radix2(std::vector<complex>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1U;
    for (; j & bit; bit >>= 1U) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1U) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::size_t half = len / 2;
    // Twiddles computed directly rather than by recurrence to keep error O(eps log n).
    std::vector<complex> tw(half);
    for (std::size_t k = 0; k < half; ++k) tw[k] = std::polar(1.0, ang * static_cast<double>(k));
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const complex u = a[i + k];
        const complex v = a[i + k + half] * tw[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= scale;
  }
}

/// out(z) = sum_x in(x) exp(sign * 2 pi i xz / p) by Bluestein's chirp-z
/// reduction to a power-of-two cyclic convolution.
inline std::vector<complex> bluestein(std::span<const complex> in, double sign) {
  const std::size_t p = in.size();
  if (p == 1) return {in[0]};
  std::size_t m = 1;
  while (m < 2 * p - 1) m <<= 1U;

  // chirp[k] = exp(sign * pi i k^2 / p), with k^2 reduced mod 2p for accuracy.
  std::vector<complex> chirp(p);
  const auto two_p = static_cast<unsigned __int128>(2 * p);
  for (std::size_t k = 0; k < p; ++k) {
    const auto k2 = static_cast<double>(static_cast<unsigned __int128>(k) * k % two_p);
    chirp[k] = std::polar(1.0, sign * std::numbers::pi * k2 / static_cast<double>(p));
  }

  std::vector<complex> a(m);
  std::vector<complex> b(m);
  for (std::size_t k = 0; k < p; ++k) a[k] = in[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < p; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

  fft_radix2(a, false);
  fft_radix2(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_radix2(a, true);

  std::vector<complex> out(p);
  for (std::size_t z = 0; z < p; ++z) out[z] = a[z] * chirp[z];
  return out;
}

}  // namespace detail

/// fhat(z) = sum_x f(x) e_p(xz). `naive` is the compensated O(p^2) sum,
/// `fast` the O(p log p) chirp-z path.
inline GridFunction dft(const GridFunction& f, DftMode mode = DftMode::fast, unsigned threads = 1) {
  const auto& ctx = f.field();
  const std::size_t p = ctx.size();
  std::vector<complex> out(p);
  if (mode == DftMode::fast) {
    out = detail::bluestein(f.values(), -1.0);
  } else {
    const auto& roots = ctx.unit_roots();
    parallel_for(p, threads, [&](std::size_t z) {
      CompensatedSum acc;
      std::uint64_t xz = 0;
      for (std::size_t x = 0; x < p; ++x) {
        acc += f[x] * roots[xz];
        xz += z;
        if (xz >= p) xz -= p;
      }
      out[z] = acc.value();
    });
  }
  return GridFunction(f.field_ptr(), std::move(out));
}

/// f(x) = p^{-1} sum_z fhat(z) e_p(-xz).
inline GridFunction idft(const GridFunction& fhat, DftMode mode = DftMode::fast) {
  const auto& ctx = fhat.field();
  const std::size_t p = ctx.size();
  std::vector<complex> out(p);
  if (mode == DftMode::fast) {
    out = detail::bluestein(fhat.values(), 1.0);
  } else {
    const auto& roots = ctx.unit_roots();
    for (std::size_t x = 0; x < p; ++x) {
      CompensatedSum acc;
      std::uint64_t xz = 0;
      for (std::size_t z = 0; z < p; ++z) {
        acc += fhat[z] * std::conj(roots[xz]);
        xz += x;
        if (xz >= p) xz -= p;
      }
      out[x] = acc.value();
    }
  }
  const double scale = 1.0 / static_cast<double>(p);
  for (auto& v : out) v *= scale;
  return GridFunction(fhat.field_ptr(), std::move(out));
}

/// (sum_x |f(x)|^r)^{1/r}, pairwise-reduced.
inline double norm(const GridFunction& f, double r = 2.0) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "norm exponent must be positive");
  std::vector<double> powers(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) {
    const double a = std::abs(f[x]);
    powers[x] = r == 2.0 ? a * a : std::pow(a, r);
  }
  const double s = pairwise_sum(powers);
  return r == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / r);
}

/// | ||f||_2 - p^{-1/2} ||fhat||_2 |.
inline double parseval_residual(const GridFunction& f, DftMode mode = DftMode::fast) {
  const double p = static_cast<double>(f.field().p());
  return std::abs(norm(f, 2.0) - norm(dft(f, mode), 2.0) / std::sqrt(p));
}

/// Hermitian inner product sum_x a(x) conj(b(x)).
inline complex inner(const GridFunction& a, const GridFunction& b) {
  CompensatedSum acc;
  for (std::size_t x = 0; x < a.size(); ++x) acc += a[x] * std::conj(b[x]);
  return acc.value();
}

}  // namespace bfp
