#pragma once

// The quadratic Gauss-sum kernel K(a,b) = p^{-1} sum_y e_p(a y^2 + b y).

#include <bfp/fp_core.hpp>
#include <bfp/summation.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace bfp {

/// A complex sum result with an absolute-error estimate.
struct KernelValue {
  complex value{};
  double abs_error = 0.0;

  double modulus() const { return std::abs(value); }
};

inline KernelValue operator*(const KernelValue& a, const KernelValue& b) {
  return {a.value * b.value, std::abs(a.value) * b.abs_error + std::abs(b.value) * a.abs_error + a.abs_error * b.abs_error};
}

inline KernelValue conj(const KernelValue& a) { return {std::conj(a.value), a.abs_error}; }

/// sigma_p, the unit-modulus constant in the closed form of K.
struct SigmaP {
  complex value{};
};

inline SigmaP sigma_p(const FieldContext& ctx) { return {ctx.sigma()}; }

/// Direct O(p) summation of K(a,b).
inline KernelValue K_brute(const FieldContext& ctx, FpElement a, FpElement b) {
  const std::uint64_t p = ctx.p();
  CompensatedSum acc;
  // phase(y) = a y^2 + b y, advanced by the first difference a(2y+1) + b.
  FpElement phase(0);
  FpElement step = ctx.add(a, b);
  const FpElement two_a = ctx.add(a, a);
  for (std::uint64_t y = 0; y < p; ++y) {
    acc += ctx.ep(phase);
    phase = ctx.add(phase, step);
    step = ctx.add(step, two_a);
  }
  const double inv_p = 1.0 / static_cast<double>(p);
  return {acc.value() * inv_p, acc.error_estimate() * inv_p};
}

/// Closed form: 1 if a=b=0; 0 if a=0, b!=0; otherwise
/// p^{-1/2} (a/p) e_p(-b^2 / 4a) sigma_p.
inline KernelValue K_closed(const FieldContext& ctx, FpElement a, FpElement b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (a.is_zero()) return {b.is_zero() ? complex(1.0) : complex(0.0), 0.0};
  const FpElement shift = ctx.mul(ctx.sq(b), ctx.mul(ctx.quarter(), ctx.inv(a)));
  const double scale = static_cast<double>(ctx.legendre(a)) / std::sqrt(static_cast<double>(ctx.p()));
  const complex v = scale * ctx.ep(ctx.neg(shift)) * ctx.sigma();
  return {v, 8.0 * eps * std::abs(scale)};
}

/// K_closed on the whole grid F_p x F_p (row a, column b).
class GaussKernelTable {
 public:
  explicit GaussKernelTable(const FieldContext& ctx) : p_(ctx.p()), values_(p_ * p_) {
    for (std::uint64_t a = 0; a < p_; ++a) {
      for (std::uint64_t b = 0; b < p_; ++b) values_[a * p_ + b] = K_closed(ctx, FpElement(a), FpElement(b)).value;
    }
  }

  const complex& operator()(std::uint64_t a, std::uint64_t b) const { return values_[a * p_ + b]; }
  const complex& operator()(FpElement a, FpElement b) const { return values_[a.value * p_ + b.value]; }
  std::uint64_t p() const noexcept { return p_; }

 private:
  std::uint64_t p_;
  std::vector<complex> values_;
};

}  // namespace bfp
