#pragma once

// Reduced kernels produced by squaring out ||T(f1,f2)||_2^2:
//
//   R1(x; y) = x1 y1^2 - x2 y2^2 - x3 y3^2 + (x3+x2-x1)(y2+y3-y1)^2 + (x2-x1)(y1-y3)
//   K1(x)    = p^{-3} sum_{y1,y2,y3} e_p(R1)
//
//   G  = y1^2 - y3^2 - y4^2 + y6^2 - y1 + y3 + y4 - y6
//   R2 = -(u2+u3)^2 (y3-y1)^2 / u3 + (u1+u3)^2 (y6-y4)^2 / u3
//        + u2 y3^2 + (u2+u3) y1^2 - 2 (u2+u3) y1 y3 + u2 (y1-y3)
//        - [u1 y6^2 + (u1+u3) y4^2 - 2 (u1+u3) y4 y6 + u1 (y4-y6)]
//   K2(u)    = p^{-4} sum_{y1,y3,y4,y6 : G=0} e_p(R2)
//
// together with the products H1, H2 whose partial sums collapse onto K1, K2.

#include <bfp/fp_core.hpp>
#include <bfp/gauss.hpp>
#include <bfp/parallel.hpp>
#include <bfp/quadratic_sum.hpp>
#include <bfp/summation.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iterator>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bfp {

struct K1Point {
  FpElement x1, x2, x3;
};

struct K2Point {
  FpElement u1, u2, u3;
};

/// Caps on the brute-force enumerators.
struct BruteLimits {
  std::uint64_t k1_cap = 199;
  std::uint64_t k2_cap = 61;
  std::uint64_t k2_full_cap = 31;
};

namespace detail {

inline void check_cap(const FieldContext& ctx, std::uint64_t cap, const char* what) {
  if (ctx.p() > cap) {
    throw Error(ErrorKind::BudgetExceeded,
                std::string(what) + ": p=" + std::to_string(ctx.p()) + " above brute-force cap " + std::to_string(cap));
  }
}

inline void check_k2_domain(const K2Point& u) {
  if (u.u3.is_zero()) throw Error(ErrorKind::DegenerateInput, "K2 requires u3 != 0");
  if (u.u1 == u.u2) throw Error(ErrorKind::DegenerateInput, "K2 requires u1 != u2");
}

}  // namespace detail

/// Residue of R1 at (x; y1, y2, y3).
inline FpElement R1_phase(const FieldContext& ctx, const K1Point& x, FpElement y1, FpElement y2, FpElement y3) {
  const FpElement c = ctx.sub(ctx.add(x.x3, x.x2), x.x1);
  const FpElement w = ctx.sub(ctx.add(y2, y3), y1);
  FpElement r = ctx.mul(x.x1, ctx.sq(y1));
  r = ctx.sub(r, ctx.mul(x.x2, ctx.sq(y2)));
  r = ctx.sub(r, ctx.mul(x.x3, ctx.sq(y3)));
  r = ctx.add(r, ctx.mul(c, ctx.sq(w)));
  r = ctx.add(r, ctx.mul(ctx.sub(x.x2, x.x1), ctx.sub(y1, y3)));
  return r;
}

/// R1 as a quadratic polynomial in (y1, y2, y3).
inline QuadraticPolynomial<3> R1_polynomial(const FieldContext& ctx, const K1Point& x) {
  QuadraticPolynomial<3> q;
  const FpElement one(1);
  const FpElement minus_one = ctx.neg(one);
  q.add_monomial(ctx, 0, 0, x.x1);
  q.add_monomial(ctx, 1, 1, ctx.neg(x.x2));
  q.add_monomial(ctx, 2, 2, ctx.neg(x.x3));
  // c (y2 + y3 - y1)^2
  const FpElement c = ctx.sub(ctx.add(x.x3, x.x2), x.x1);
  const std::array<FpElement, 3> w{minus_one, one, one};
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t k = j; k < 3; ++k) {
      FpElement coeff = ctx.mul(c, ctx.mul(w[j], w[k]));
      if (j != k) coeff = ctx.add(coeff, coeff);
      q.add_monomial(ctx, j, k, coeff);
    }
  }
  const FpElement d = ctx.sub(x.x2, x.x1);
  q.l[0] = d;
  q.l[2] = ctx.neg(d);
  return q;
}

enum class BruteStrategy {
  /// Plain triple loop over (y1, y2, y3).
  direct,
  /// The y3-sum depends on (y1, y2) only through the linear coefficient of y3,
  /// so the p inner sums are tabulated once by direct summation and the outer
  /// double loop looks them up. Same terms, O(p^2).
  factored,
};

/// K1 by direct summation of p^3 terms.
inline KernelValue K1_brute(const FieldContext& ctx, const K1Point& x, BruteStrategy strategy = BruteStrategy::direct,
                            const BruteLimits& limits = {}) {
  detail::check_cap(ctx, limits.k1_cap, "K1_brute");
  const std::uint64_t p = ctx.p();
  const double scale = 1.0 / (static_cast<double>(p) * static_cast<double>(p) * static_cast<double>(p));
  const FpElement zero(0);
  const FpElement one(1);
  // Coefficient of y3^2 in R1 is x2 - x1 for every (y1, y2).
  const FpElement a3 = ctx.sub(x.x2, x.x1);
  const FpElement two_a3 = ctx.add(a3, a3);

  if (strategy == BruteStrategy::direct) {
    CompensatedSum acc;
    for (std::uint64_t y1 = 0; y1 < p; ++y1) {
      for (std::uint64_t y2 = 0; y2 < p; ++y2) {
        FpElement phase = R1_phase(ctx, x, FpElement(y1), FpElement(y2), zero);
        FpElement step = ctx.sub(R1_phase(ctx, x, FpElement(y1), FpElement(y2), one), phase);
        for (std::uint64_t y3 = 0; y3 < p; ++y3) {
          acc += ctx.ep(phase);
          phase = ctx.add(phase, step);
          step = ctx.add(step, two_a3);
        }
      }
    }
    return {acc.value() * scale, acc.error_estimate() * scale};
  }

  // inner[b] = sum_{y3} e_p(a3 y3^2 + b y3)
  std::vector<complex> inner(p);
  double inner_err = 0.0;
  for (std::uint64_t b = 0; b < p; ++b) {
    CompensatedSum acc;
    FpElement phase(0);
    FpElement step = ctx.add(a3, FpElement(b));
    for (std::uint64_t y3 = 0; y3 < p; ++y3) {
      acc += ctx.ep(phase);
      phase = ctx.add(phase, step);
      step = ctx.add(step, two_a3);
    }
    inner[b] = acc.value();
    inner_err = std::max(inner_err, acc.error_estimate());
  }
  // R1(y3) = r0 + b y3 + a3 y3^2 with b = R1(y3=1) - r0 - a3. Along y2, r0 is
  // quadratic and b linear, so both advance by finite differences.
  auto r0_at = [&](std::uint64_t y1, std::uint64_t y2) { return R1_phase(ctx, x, FpElement(y1), FpElement(y2 % p), zero); };
  auto b_at = [&](std::uint64_t y1, std::uint64_t y2) {
    return ctx.sub(ctx.sub(R1_phase(ctx, x, FpElement(y1), FpElement(y2 % p), one), r0_at(y1, y2)), a3);
  };
  CompensatedSum acc;
  for (std::uint64_t y1 = 0; y1 < p; ++y1) {
    FpElement r0 = r0_at(y1, 0);
    const FpElement r0_1 = r0_at(y1, 1);
    FpElement dr = ctx.sub(r0_1, r0);
    const FpElement ddr = ctx.sub(ctx.sub(r0_at(y1, 2), r0_1), dr);
    FpElement b = b_at(y1, 0);
    const FpElement db = ctx.sub(b_at(y1, 1), b);
    for (std::uint64_t y2 = 0; y2 < p; ++y2) {
      acc += ctx.ep(r0) * inner[b.value];
      r0 = ctx.add(r0, dr);
      dr = ctx.add(dr, ddr);
      b = ctx.add(b, db);
    }
  }
  const double err = acc.error_estimate() + static_cast<double>(p) * static_cast<double>(p) * inner_err;
  return {acc.value() * scale, err * scale};
}

/// Exact structure of sum_y e_p(R1), eliminating y2, then y3, then y1.
inline QuadraticSumResult K1_structure(const FieldContext& ctx, const K1Point& x) {
  return quadratic_exponential_sum<3>(ctx, R1_polynomial(ctx, x), {1, 2, 0});
}

/// K1 in O(1) by iterated completion of squares.
inline KernelValue K1_reduced(const FieldContext& ctx, const K1Point& x) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double p = static_cast<double>(ctx.p());
  const auto s = K1_structure(ctx, x);
  const complex v = s.value(ctx, 1.0 / (p * p * p));
  return {v, 16.0 * eps * std::abs(v)};
}

/// (x3 + x2)(x2 - x1)(x3 - x1).
inline FpElement detA(const FieldContext& ctx, const K1Point& x) {
  return ctx.mul(ctx.mul(ctx.add(x.x3, x.x2), ctx.sub(x.x2, x.x1)), ctx.sub(x.x3, x.x1));
}

/// The symmetric matrix of the quadratic part of R1 (half its Hessian).
inline std::array<std::array<FpElement, 3>, 3> matrix_A(const FieldContext& ctx, const K1Point& x) {
  const FpElement c = ctx.sub(ctx.add(x.x3, x.x2), x.x1);
  const FpElement mc = ctx.neg(c);
  return {{{ctx.add(x.x3, x.x2), mc, mc}, {mc, ctx.sub(x.x3, x.x1), c}, {mc, c, ctx.sub(x.x2, x.x1)}}};
}

/// Cofactor expansion of det(matrix_A).
inline FpElement detA_explicit(const FieldContext& ctx, const K1Point& x) {
  const auto a = matrix_A(ctx, x);
  auto minor = [&](std::size_t r1, std::size_t r2, std::size_t c1, std::size_t c2) {
    return ctx.sub(ctx.mul(a[r1][c1], a[r2][c2]), ctx.mul(a[r1][c2], a[r2][c1]));
  };
  FpElement d = ctx.mul(a[0][0], minor(1, 2, 1, 2));
  d = ctx.sub(d, ctx.mul(a[0][1], minor(1, 2, 0, 2)));
  d = ctx.add(d, ctx.mul(a[0][2], minor(1, 2, 0, 1)));
  return d;
}

/// K(s1-n1, n1) conj K(s1-n2, n2) conj K(s2-n1, n1) K(s2-n2, n2).
inline KernelValue H1(const FieldContext& ctx, FpElement s1, FpElement s2, FpElement n1, FpElement n2) {
  return K_closed(ctx, ctx.sub(s1, n1), n1) * conj(K_closed(ctx, ctx.sub(s1, n2), n2)) *
         conj(K_closed(ctx, ctx.sub(s2, n1), n1)) * K_closed(ctx, ctx.sub(s2, n2), n2);
}

/// K1(x1, x2, x3) conj K1(x1, x4, x3).
inline KernelValue H2(const FieldContext& ctx, FpElement x1, FpElement x2, FpElement x3, FpElement x4) {
  return K1_reduced(ctx, {x1, x2, x3}) * conj(K1_reduced(ctx, {x1, x4, x3}));
}

inline FpElement G_constraint(const FieldContext& ctx, FpElement y1, FpElement y3, FpElement y4, FpElement y6) {
  FpElement g = ctx.sub(ctx.sq(y1), ctx.sq(y3));
  g = ctx.sub(g, ctx.sq(y4));
  g = ctx.add(g, ctx.sq(y6));
  g = ctx.sub(g, y1);
  g = ctx.add(g, y3);
  g = ctx.add(g, y4);
  g = ctx.sub(g, y6);
  return g;
}

/// Residue of R2; requires u3 != 0.
inline FpElement R2_phase(const FieldContext& ctx, const K2Point& u, FpElement y1, FpElement y3, FpElement y4,
                          FpElement y6) {
  const FpElement u3_inv = ctx.inv(u.u3);
  const FpElement a2 = ctx.add(u.u2, u.u3);
  const FpElement a1 = ctx.add(u.u1, u.u3);
  FpElement r = ctx.neg(ctx.mul(u3_inv, ctx.mul(ctx.sq(ctx.sub(y3, y1)), ctx.sq(a2))));
  r = ctx.add(r, ctx.mul(u3_inv, ctx.mul(ctx.sq(ctx.sub(y6, y4)), ctx.sq(a1))));
  r = ctx.add(r, ctx.mul(u.u2, ctx.sq(y3)));
  r = ctx.add(r, ctx.mul(a2, ctx.sq(y1)));
  r = ctx.sub(r, ctx.mul(ctx.add(a2, a2), ctx.mul(y1, y3)));
  r = ctx.add(r, ctx.mul(u.u2, ctx.sub(y1, y3)));
  FpElement b = ctx.mul(u.u1, ctx.sq(y6));
  b = ctx.add(b, ctx.mul(a1, ctx.sq(y4)));
  b = ctx.sub(b, ctx.mul(ctx.add(a1, a1), ctx.mul(y4, y6)));
  b = ctx.add(b, ctx.mul(u.u1, ctx.sub(y4, y6)));
  return ctx.sub(r, b);
}

/// Square roots of every residue, for solving G = 0 in y6.
class SqrtTable {
 public:
  explicit SqrtTable(const FieldContext& ctx) : roots_(ctx.size()) {
    for (std::uint64_t a = 0; a < ctx.p(); ++a) roots_[a] = ctx.sqrt_mod(FpElement(a));
  }
  const std::vector<FpElement>& operator()(FpElement a) const { return roots_[a.value]; }

 private:
  std::vector<std::vector<FpElement>> roots_;
};

/// K2 by enumerating (y1, y3, y4) and solving G = 0 as y6^2 - y6 + c = 0,
/// i.e. y6 = (1 + r)/2 with r^2 = 1 - 4c.
inline KernelValue K2_brute(const FieldContext& ctx, const K2Point& u, const BruteLimits& limits = {},
                            const SqrtTable* roots = nullptr) {
  detail::check_k2_domain(u);
  detail::check_cap(ctx, limits.k2_cap, "K2_brute");
  std::optional<SqrtTable> own;
  if (roots == nullptr) roots = &own.emplace(ctx);
  const std::uint64_t p = ctx.p();
  const FpElement one(1);
  const FpElement four(4 % p);
  CompensatedSum acc;
  for (std::uint64_t a = 0; a < p; ++a) {
    const FpElement y1(a);
    for (std::uint64_t b = 0; b < p; ++b) {
      const FpElement y3(b);
      for (std::uint64_t d = 0; d < p; ++d) {
        const FpElement y4(d);
        // c = G - (y6^2 - y6)
        const FpElement c = G_constraint(ctx, y1, y3, y4, FpElement(0));
        const FpElement disc = ctx.sub(one, ctx.mul(four, c));
        for (const FpElement r : (*roots)(disc)) {
          const FpElement y6 = ctx.mul(ctx.add(one, r), ctx.half());
          acc += ctx.ep(R2_phase(ctx, u, y1, y3, y4, y6));
        }
      }
    }
  }
  const double p4 = std::pow(static_cast<double>(p), 4);
  return {acc.value() / p4, acc.error_estimate() / p4};
}

/// K2 by the full O(p^4) enumeration with a membership test for G = 0.
inline KernelValue K2_full_enumeration(const FieldContext& ctx, const K2Point& u, const BruteLimits& limits = {}) {
  detail::check_k2_domain(u);
  detail::check_cap(ctx, limits.k2_full_cap, "K2_full_enumeration");
  const std::uint64_t p = ctx.p();
  CompensatedSum acc;
  for (std::uint64_t a = 0; a < p; ++a) {
    for (std::uint64_t b = 0; b < p; ++b) {
      for (std::uint64_t d = 0; d < p; ++d) {
        for (std::uint64_t e = 0; e < p; ++e) {
          const FpElement y1(a), y3(b), y4(d), y6(e);
          if (!G_constraint(ctx, y1, y3, y4, y6).is_zero()) continue;
          acc += ctx.ep(R2_phase(ctx, u, y1, y3, y4, y6));
        }
      }
    }
  }
  const double p4 = std::pow(static_cast<double>(p), 4);
  return {acc.value() / p4, acc.error_estimate() / p4};
}

/// K1_reduced tabulated on the whole grid F_p^3 (p^3 complex values).
class K1Table {
 public:
  K1Table(const FieldContext& ctx, unsigned threads = 1) : p_(ctx.p()), values_(p_ * p_ * p_) {
    parallel_for(p_ * p_, threads, [&](std::size_t row) {
      const FpElement x1(row / p_), x2(row % p_);
      for (std::uint64_t x3 = 0; x3 < p_; ++x3) values_[row * p_ + x3] = K1_reduced(ctx, {x1, x2, FpElement(x3)}).value;
    });
  }

  const complex& operator()(FpElement x1, FpElement x2, FpElement x3) const {
    return values_[(x1.value * p_ + x2.value) * p_ + x3.value];
  }

 private:
  std::uint64_t p_;
  std::vector<complex> values_;
};

/// K2 as the collapse sum_{u4} H2(u4, u2, u3 + u4, u1); O(p).
inline KernelValue K2_via_H2(const FieldContext& ctx, const K2Point& u, const K1Table* table = nullptr) {
  detail::check_k2_domain(u);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  CompensatedSum acc;
  double err = 0.0;
  for (std::uint64_t w = 0; w < ctx.p(); ++w) {
    const FpElement u4(w);
    const FpElement x3 = ctx.add(u.u3, u4);
    if (table != nullptr) {
      acc += (*table)(u4, u.u2, x3) * std::conj((*table)(u4, u.u1, x3));
    } else {
      const auto h = H2(ctx, u4, u.u2, x3, u.u1);
      acc += h.value;
      err += h.abs_error;
    }
  }
  if (table != nullptr) err = 32.0 * eps * acc.abs_sum();
  return {acc.value(), err + acc.error_estimate()};
}

enum class Detection { empirical, algebraic };

inline const char* to_string(Detection d) { return d == Detection::empirical ? "empirical" : "algebraic"; }

/// Values of u3 for a fixed (u1, u2) where K2 escapes the p^{-5/2} bound.
struct ExceptionalSet {
  std::pair<FpElement, FpElement> owner;
  std::vector<FpElement> members;
  Detection detection = Detection::empirical;
};

/// Which of the rank-drop conditions a candidate u3 satisfies (bit mask).
enum AlgebraicCondition : unsigned {
  kSumVanishes = 1U,   // u1 + u2 + u3 = 0
  kRatioIsOne = 2U,    // u1(u1+u3)/u3^2 - u2(u2+u3)/(u1(u1+u3)) = 1, denominators cleared
  kRatioIsZero = 4U,   // the same expression = 0, denominators cleared
};

/// Bit mask of AlgebraicCondition satisfied by u3.
inline unsigned algebraic_conditions(const FieldContext& ctx, FpElement u1, FpElement u2, FpElement u3) {
  unsigned mask = 0;
  if (ctx.add(ctx.add(u1, u2), u3).is_zero()) mask |= kSumVanishes;
  const FpElement a1 = ctx.mul(u1, ctx.add(u1, u3));
  const FpElement a2 = ctx.mul(u2, ctx.add(u2, u3));
  const FpElement u3sq = ctx.sq(u3);
  // u1^2 (u1+u3)^2 - u2(u2+u3) u3^2 = k * u3^2 u1 (u1+u3)
  const FpElement lhs = ctx.sub(ctx.sq(a1), ctx.mul(a2, u3sq));
  if (ctx.sub(lhs, ctx.mul(u3sq, a1)).is_zero()) mask |= kRatioIsOne;
  if (lhs.is_zero()) mask |= kRatioIsZero;
  return mask;
}

/// p^{5/2} |K2(u1, u2, u3)| for every u3 in F_p (index 0 left at 0).
inline std::vector<double> normalized_K2_profile(const FieldContext& ctx, FpElement u1, FpElement u2,
                                                 const K1Table* table = nullptr) {
  const double scale = std::pow(static_cast<double>(ctx.p()), 2.5);
  std::vector<double> out(ctx.size(), 0.0);
  for (std::uint64_t w = 1; w < ctx.p(); ++w) out[w] = scale * K2_via_H2(ctx, {u1, u2, FpElement(w)}, table).modulus();
  return out;
}

/// empirical: {u3 != 0 : p^{5/2}|K2| > tau}. algebraic: nonzero roots of the
/// three rank-drop conditions after clearing denominators.
inline ExceptionalSet exceptional_set(const FieldContext& ctx, FpElement u1, FpElement u2, Detection method,
                                      double tau = 2.0, const K1Table* table = nullptr) {
  if (u1 == u2) throw Error(ErrorKind::DegenerateInput, "exceptional_set requires u1 != u2");
  ExceptionalSet out{{u1, u2}, {}, method};
  if (method == Detection::empirical) {
    const auto profile = normalized_K2_profile(ctx, u1, u2, table);
    for (std::uint64_t w = 1; w < ctx.p(); ++w) {
      if (profile[w] > tau) out.members.emplace_back(w);
    }
  } else {
    for (std::uint64_t w = 1; w < ctx.p(); ++w) {
      if (algebraic_conditions(ctx, u1, u2, FpElement(w)) != 0) out.members.emplace_back(w);
    }
  }
  return out;
}

struct ExceptionalComparison {
  ExceptionalSet empirical;
  ExceptionalSet algebraic;
  std::vector<FpElement> empirical_only;
  std::vector<FpElement> algebraic_only;
};

inline ExceptionalComparison compare_exceptional_sets(const FieldContext& ctx, FpElement u1, FpElement u2,
                                                      double tau = 2.0, const K1Table* table = nullptr) {
  ExceptionalComparison c{exceptional_set(ctx, u1, u2, Detection::empirical, tau, table),
                          exceptional_set(ctx, u1, u2, Detection::algebraic, tau, table),
                          {},
                          {}};
  auto less = [](FpElement a, FpElement b) { return a.value < b.value; };
  std::set_difference(c.empirical.members.begin(), c.empirical.members.end(), c.algebraic.members.begin(),
                      c.algebraic.members.end(), std::back_inserter(c.empirical_only), less);
  std::set_difference(c.algebraic.members.begin(), c.algebraic.members.end(), c.empirical.members.begin(),
                      c.empirical.members.end(), std::back_inserter(c.algebraic_only), less);
  return c;
}

/// u4 with u3 (u2 + u3 + u4)(u2 - u4) = 0, where a factor K1 of
/// H2(u4, u2, u3 + u4, u1) can be degenerate.
inline std::vector<FpElement> degenerate_u4_set(const FieldContext& ctx, FpElement u2, FpElement u3) {
  if (u3.is_zero()) {
    std::vector<FpElement> all;
    for (std::uint64_t w = 0; w < ctx.p(); ++w) all.emplace_back(w);
    return all;
  }
  std::vector<FpElement> out{u2, ctx.neg(ctx.add(u2, u3))};
  std::sort(out.begin(), out.end(), [](FpElement a, FpElement b) { return a.value < b.value; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace bfp
