#pragma once

// Exact evaluation of complete exponential sums of quadratic polynomials,
//   S = sum_{y in F_p^n} e_p(y^T M y + L^T y + c),
// by repeated completion of the square. Every pivot contributes one factor
// sqrt(p) (a/p) sigma_p e_p(-l^2/4a); every variable left with no quadratic
// part contributes p or kills the sum.

#include <bfp/fp_core.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>

namespace bfp {

/// S = sign * sigma_p^{pivots} * p^{half_powers/2} * e_p(phase), or S = 0.
struct QuadraticSumResult {
  bool vanishes = false;
  int sign = 1;
  int pivots = 0;
  int half_powers = 0;
  FpElement phase{};

  /// |S| as a power of p, meaningful when the sum does not vanish.
  double log_p_modulus() const { return 0.5 * half_powers; }

  complex value(const FieldContext& ctx, double scale = 1.0) const {
    if (vanishes) return {0.0, 0.0};
    complex s = static_cast<double>(sign) * scale * std::pow(static_cast<double>(ctx.p()), 0.5 * half_powers) * ctx.ep(phase);
    for (int i = 0; i < pivots; ++i) s *= ctx.sigma();
    return s;
  }
};

/// A quadratic polynomial in N variables over F_p with symmetric quadratic
/// part: Q(y) = sum_{j,k} m[j][k] y_j y_k + sum_j l[j] y_j + c.
template <std::size_t N>
struct QuadraticPolynomial {
  std::array<std::array<FpElement, N>, N> m{};
  std::array<FpElement, N> l{};
  FpElement c{};

  /// Adds coeff * y_j * y_k (j may equal k).
  void add_monomial(const FieldContext& ctx, std::size_t j, std::size_t k, FpElement coeff) {
    if (j == k) {
      m[j][j] = ctx.add(m[j][j], coeff);
      return;
    }
    const FpElement h = ctx.mul(coeff, ctx.half());
    m[j][k] = ctx.add(m[j][k], h);
    m[k][j] = ctx.add(m[k][j], h);
  }

  FpElement evaluate(const FieldContext& ctx, const std::array<FpElement, N>& y) const {
    FpElement acc = c;
    for (std::size_t j = 0; j < N; ++j) {
      acc = ctx.add(acc, ctx.mul(l[j], y[j]));
      for (std::size_t k = 0; k < N; ++k) acc = ctx.add(acc, ctx.mul(m[j][k], ctx.mul(y[j], y[k])));
    }
    return acc;
  }
};

/// Eliminates variables in the order given by `preference`, completing the
/// square on the first remaining variable with a nonzero diagonal entry. When
/// only off-diagonal terms remain, the shear y_j -> y_j + y_k creates a
/// diagonal entry 2 m[j][k] at k.
template <std::size_t N>
QuadraticSumResult quadratic_exponential_sum(const FieldContext& ctx, QuadraticPolynomial<N> q,
                                             const std::array<std::size_t, N>& preference) {
  QuadraticSumResult out;
  std::array<bool, N> alive{};
  alive.fill(true);

  for (std::size_t round = 0; round < N; ++round) {
    std::optional<std::size_t> pivot;
    for (auto i : preference) {
      if (alive[i] && !q.m[i][i].is_zero()) {
        pivot = i;
        break;
      }
    }
    if (!pivot) {
      // Shear on the first nonzero off-diagonal pair among live variables.
      for (std::size_t j = 0; j < N && !pivot; ++j) {
        if (!alive[j]) continue;
        for (std::size_t k = 0; k < N; ++k) {
          if (k == j || !alive[k] || q.m[j][k].is_zero()) continue;
          // y_j = y'_j + y'_k: row/column j is added into row/column k.
          for (std::size_t t = 0; t < N; ++t) q.m[k][t] = ctx.add(q.m[k][t], q.m[j][t]);
          for (std::size_t t = 0; t < N; ++t) q.m[t][k] = ctx.add(q.m[t][k], q.m[t][j]);
          q.l[k] = ctx.add(q.l[k], q.l[j]);
          pivot = k;
          break;
        }
      }
    }
    if (!pivot) break;

    const std::size_t i = *pivot;
    const FpElement a = q.m[i][i];
    const FpElement a_inv = ctx.inv(a);
    // Q = a y_i^2 + y_i * (2 sum_{j!=i} m[i][j] y_j + l_i) + rest. Summing over
    // y_i leaves rest - (linear form)^2 / 4a.
    for (std::size_t j = 0; j < N; ++j) {
      if (!alive[j] || j == i) continue;
      for (std::size_t k = 0; k < N; ++k) {
        if (!alive[k] || k == i) continue;
        q.m[j][k] = ctx.sub(q.m[j][k], ctx.mul(a_inv, ctx.mul(q.m[i][j], q.m[i][k])));
      }
      q.l[j] = ctx.sub(q.l[j], ctx.mul(a_inv, ctx.mul(q.m[i][j], q.l[i])));
    }
    q.c = ctx.sub(q.c, ctx.mul(ctx.mul(ctx.quarter(), a_inv), ctx.sq(q.l[i])));
    out.sign *= ctx.legendre(a);
    out.pivots += 1;
    out.half_powers += 1;
    alive[i] = false;
    for (std::size_t t = 0; t < N; ++t) {
      q.m[i][t] = FpElement(0);
      q.m[t][i] = FpElement(0);
    }
    q.l[i] = FpElement(0);
  }

  // Remaining variables appear at most linearly.
  for (std::size_t j = 0; j < N; ++j) {
    if (!alive[j]) continue;
    if (!q.l[j].is_zero()) {
      out.vanishes = true;
      return out;
    }
    out.half_powers += 2;
  }
  out.phase = q.c;
  return out;
}

}  // namespace bfp
