#pragma once

// The bilinear operator
//   T(f1, f2)(s) = sum_{n != s} f1(s - n) f2(n) K(s - n, n),
// the exact decomposition of ||T(f1,f2)||_2^2 and the two Cauchy-Schwarz
// steps that reduce it to the kernels K1 and K2, and an alternating power
// method for lower bounds on the operator norm.

#include <bfp/fp_core.hpp>
#include <bfp/gauss.hpp>
#include <bfp/kernels.hpp>
#include <bfp/parallel.hpp>
#include <bfp/report.hpp>
#include <bfp/spectral.hpp>
#include <bfp/summation.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bfp {

namespace detail {

inline void check_same_field(const GridFunction& f1, const GridFunction& f2) {
  if (f1.field().p() != f2.field().p()) {
    throw Error(ErrorKind::InvalidArgument, "f1 and f2 live on different fields");
  }
}

}  // namespace detail

/// T(f1, f2) with the kernel read from a precomputed table.
inline GridFunction apply_T(const GaussKernelTable& kernel, const GridFunction& f1, const GridFunction& f2,
                            unsigned threads = 1) {
  detail::check_same_field(f1, f2);
  const std::uint64_t p = f1.field().p();
  std::vector<complex> out(p);
  parallel_for(p, threads, [&](std::size_t s) {
    CompensatedSum acc;
    for (std::uint64_t n = 0; n < p; ++n) {
      if (n == s) continue;
      const std::uint64_t a = s >= n ? s - n : s + p - n;
      acc += f1[a] * f2[n] * kernel(a, n);
    }
    out[s] = acc.value();
  });
  return GridFunction(f1.field_ptr(), std::move(out));
}

/// T(f1, f2) evaluating K in closed form per term.
inline GridFunction apply_T(const GridFunction& f1, const GridFunction& f2, unsigned threads = 1) {
  detail::check_same_field(f1, f2);
  const auto& ctx = f1.field();
  const std::uint64_t p = ctx.p();
  std::vector<complex> out(p);
  parallel_for(p, threads, [&](std::size_t s) {
    CompensatedSum acc;
    for (std::uint64_t n = 0; n < p; ++n) {
      if (n == s) continue;
      const FpElement a = ctx.sub(FpElement(s), FpElement(n));
      acc += f1[a] * f2[n] * K_closed(ctx, a, FpElement(n)).value;
    }
    out[s] = acc.value();
  });
  return GridFunction(f1.field_ptr(), std::move(out));
}

/// ||T(f1,f2)||_2^2 against the sum of its main and diagonal-correction terms.
struct NormDecomposition {
  double lhs = 0.0;            // ||T(f1,f2)||_2^2
  complex main_term{};         // n2 unrestricted
  complex correction{};        // minus the n2 = s terms
  complex correction_reduced{};  // same, after K(0,s) = [s = 0]
  double residual = 0.0;       // |lhs - (main_term + correction)|
  double correction_bound = 0.0;  // p^{-1/2} ||f1||^2 ||f2||^2
};

struct OperatorLimits {
  std::uint64_t decomposition_cap = 101;
  std::uint64_t chain_cap = 31;
};

inline NormDecomposition decompose_norm(const GridFunction& f1, const GridFunction& f2,
                                        const OperatorLimits& limits = {}) {
  detail::check_same_field(f1, f2);
  const auto& ctx = f1.field();
  detail::check_cap(ctx, limits.decomposition_cap, "decompose_norm");
  const std::uint64_t p = ctx.p();
  const GaussKernelTable K(ctx);
  auto sub = [p](std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + p - b; };

  NormDecomposition d;
  const double t = norm(apply_T(K, f1, f2), 2.0);
  d.lhs = t * t;

  CompensatedSum main;
  for (std::uint64_t s = 0; s < p; ++s) {
    for (std::uint64_t n1 = 0; n1 < p; ++n1) {
      if (n1 == s) continue;
      const complex left = f1[sub(s, n1)] * f2[n1] * K(sub(s, n1), n1);
      for (std::uint64_t n2 = 0; n2 < p; ++n2) {
        main += left * std::conj(f1[sub(s, n2)] * f2[n2] * K(sub(s, n2), n2));
      }
    }
  }
  d.main_term = main.value();

  CompensatedSum corr;
  for (std::uint64_t s = 0; s < p; ++s) {
    for (std::uint64_t n1 = 0; n1 < p; ++n1) {
      if (n1 == s) continue;
      corr += -(f1[sub(s, n1)] * f2[n1] * std::conj(f1[0]) * std::conj(f2[s]) * K(sub(s, n1), n1) *
                std::conj(K(0, s)));
    }
  }
  d.correction = corr.value();

  CompensatedSum reduced;
  for (std::uint64_t n1 = 1; n1 < p; ++n1) {
    reduced += -(f1[sub(0, n1)] * f2[n1] * std::conj(f1[0]) * std::conj(f2[0]) * K(sub(0, n1), n1));
  }
  d.correction_reduced = reduced.value();

  d.residual = std::abs(d.lhs - (d.main_term + d.correction));
  const double n1sq = std::pow(norm(f1, 2.0), 2);
  const double n2sq = std::pow(norm(f2, 2.0), 2);
  d.correction_bound = n1sq * n2sq / std::sqrt(static_cast<double>(p));
  return d;
}

inline double decomposition_residual(const GridFunction& f1, const GridFunction& f2, const OperatorLimits& limits = {}) {
  return decompose_norm(f1, f2, limits).residual;
}

/// Every quantity along the two Cauchy-Schwarz reductions, evaluated by
/// direct summation. Lambda1 and Lambda2 take f = f1.
struct CauchyChain {
  complex main_term{};      // ||T||^2 main term, n1 != s, n2 free
  double lambda1 = 0.0;     // sum_{n1,n2} |B(n1,n2)|^2, real and >= 0
  complex lambda1_direct{}; // the restricted quadruple sum over H1
  complex lambda1_diag{};   // s1 = s2 part
  complex lambda1_off{};    // s1 != s2 part
  double lambda1_diag_bound = 0.0;  // p^{-2} sum |..| + p^{-1} sum |..|
  complex side_raw{};       // n1 = s2 terms of the off-diagonal part
  complex side{};           // same, after K(0, s2) = [s2 = 0]
  double side_bound = 0.0;  // p^{-3/2} sum |..| + p^{-1} sum |..|
  complex refined{};        // s1 != s2, n1 and n2 unrestricted
  complex refined_h1{};     // refined after x = (s1-n1, s1-n2, s2-n1), summing H1 over x4
  complex simplified{};     // refined with the x4 sum collapsed to K1
  complex lambda2{};        // sum over H2
  complex lambda2_diag{};   // x2 = x4
  complex lambda2_off{};    // x2 != x4
  complex lambda2_k2{};     // off-diagonal part collapsed to K2
  double f1_norm_sq = 0.0;
  double f2_norm_sq = 0.0;

  std::vector<Assertion> assertions(std::uint64_t p, double rel_tol = 1e-8) const;
};

inline CauchyChain cauchy_chain(const GridFunction& f1, const GridFunction& f2, const OperatorLimits& limits = {}) {
  detail::check_same_field(f1, f2);
  const auto& ctx = f1.field();
  detail::check_cap(ctx, limits.chain_cap, "cauchy_chain");
  const std::uint64_t p = ctx.p();
  const GaussKernelTable K(ctx);
  const K1Table K1(ctx);
  const GridFunction& f = f1;
  auto sub = [p](std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + p - b; };
  auto add = [p](std::uint64_t a, std::uint64_t b) { return a + b >= p ? a + b - p : a + b; };
  auto h1 = [&](std::uint64_t s1, std::uint64_t s2, std::uint64_t n1, std::uint64_t n2) {
    return K(sub(s1, n1), n1) * std::conj(K(sub(s1, n2), n2)) * std::conj(K(sub(s2, n1), n1)) * K(sub(s2, n2), n2);
  };
  auto k1 = [&](std::uint64_t a, std::uint64_t b, std::uint64_t c) { return K1(FpElement(a), FpElement(b), FpElement(c)); };
  const double pd = static_cast<double>(p);

  CauchyChain c;
  c.f1_norm_sq = std::pow(norm(f1, 2.0), 2);
  c.f2_norm_sq = std::pow(norm(f2, 2.0), 2);

  {
    CompensatedSum acc;
    for (std::uint64_t s = 0; s < p; ++s) {
      for (std::uint64_t n1 = 0; n1 < p; ++n1) {
        if (n1 == s) continue;
        const complex left = f1[sub(s, n1)] * f2[n1] * K(sub(s, n1), n1);
        for (std::uint64_t n2 = 0; n2 < p; ++n2) acc += left * std::conj(f1[sub(s, n2)] * f2[n2] * K(sub(s, n2), n2));
      }
    }
    c.main_term = acc.value();
  }

  // Lambda1 as the squared l2 norm of B(n1,n2) = sum_{s != n1} f(s-n1) conj f(s-n2) K(s-n1,n1) conj K(s-n2,n2).
  {
    std::vector<double> sq(p * p);
    for (std::uint64_t n1 = 0; n1 < p; ++n1) {
      for (std::uint64_t n2 = 0; n2 < p; ++n2) {
        CompensatedSum b;
        for (std::uint64_t s = 0; s < p; ++s) {
          if (s == n1) continue;
          b += f[sub(s, n1)] * std::conj(f[sub(s, n2)]) * K(sub(s, n1), n1) * std::conj(K(sub(s, n2), n2));
        }
        sq[n1 * p + n2] = std::norm(b.value());
      }
    }
    c.lambda1 = pairwise_sum(sq);
  }

  auto term1 = [&](std::uint64_t s1, std::uint64_t s2, std::uint64_t n1, std::uint64_t n2) {
    return f[sub(s1, n1)] * std::conj(f[sub(s2, n1)]) * std::conj(f[sub(s1, n2)]) * f[sub(s2, n2)] * h1(s1, s2, n1, n2);
  };

  {
    CompensatedSum all, diag, off, refined;
    for (std::uint64_t s1 = 0; s1 < p; ++s1) {
      for (std::uint64_t s2 = 0; s2 < p; ++s2) {
        for (std::uint64_t n1 = 0; n1 < p; ++n1) {
          for (std::uint64_t n2 = 0; n2 < p; ++n2) {
            const complex t = term1(s1, s2, n1, n2);
            if (s1 != s2) refined += t;
            if (n1 == s1 || n1 == s2) continue;
            all += t;
            if (s1 == s2) {
              diag += t;
            } else {
              off += t;
            }
          }
        }
      }
    }
    c.lambda1_direct = all.value();
    c.lambda1_diag = diag.value();
    c.lambda1_off = off.value();
    c.refined = refined.value();
  }

  {
    CompensatedSum first, second;
    for (std::uint64_t s = 0; s < p; ++s) {
      for (std::uint64_t n1 = 0; n1 < p; ++n1) {
        if (n1 == s) continue;
        for (std::uint64_t n2 = 0; n2 < p; ++n2) {
          if (n2 == s) continue;
          first += std::norm(f[sub(s, n1)]) * std::norm(f[sub(s, n2)]);
        }
      }
    }
    for (std::uint64_t n1 = 1; n1 < p; ++n1) second += std::norm(f[sub(0, n1)]) * std::norm(f[0]);
    c.lambda1_diag_bound = first.value().real() / (pd * pd) + second.value().real() / pd;
  }

  {
    CompensatedSum raw, reduced, generic, special;
    for (std::uint64_t s1 = 0; s1 < p; ++s1) {
      for (std::uint64_t s2 = 0; s2 < p; ++s2) {
        if (s1 == s2) continue;
        for (std::uint64_t n2 = 0; n2 < p; ++n2) raw += term1(s1, s2, s2, n2);
      }
    }
    for (std::uint64_t s1 = 1; s1 < p; ++s1) {
      for (std::uint64_t n2 = 0; n2 < p; ++n2) {
        const complex coeff = f[s1] * std::conj(f[0]) * std::conj(f[sub(s1, n2)]) * f[sub(0, n2)];
        reduced += coeff * h1(s1, 0, 0, n2);
        const bool off_axis = n2 != 0 && sub(s1, n2) != 0;
        if (off_axis) {
          generic += std::abs(coeff);
        } else {
          special += std::abs(coeff);
        }
      }
    }
    c.side_raw = raw.value();
    c.side = reduced.value();
    c.side_bound = generic.value().real() * std::pow(pd, -1.5) + special.value().real() / pd;
  }

  {
    CompensatedSum via_h1, via_k1;
    for (std::uint64_t x1 = 0; x1 < p; ++x1) {
      for (std::uint64_t x3 = 0; x3 < p; ++x3) {
        if (x1 == x3) continue;
        for (std::uint64_t x2 = 0; x2 < p; ++x2) {
          const complex coeff = f[x1] * std::conj(f[x3]) * std::conj(f[x2]) * f[sub(add(x2, x3), x1)];
          CompensatedSum inner;
          for (std::uint64_t x4 = 0; x4 < p; ++x4) {
            inner += h1(add(x2, x4), sub(add(add(x2, x3), x4), x1), sub(add(x2, x4), x1), x4);
          }
          via_h1 += coeff * inner.value();
          via_k1 += coeff * k1(x1, x2, x3);
        }
      }
    }
    c.refined_h1 = via_h1.value();
    c.simplified = via_k1.value();
  }

  {
    CompensatedSum all, diag, off;
    for (std::uint64_t x1 = 0; x1 < p; ++x1) {
      for (std::uint64_t x3 = 0; x3 < p; ++x3) {
        if (x1 == x3) continue;
        const std::uint64_t u3 = sub(x3, x1);
        for (std::uint64_t x2 = 0; x2 < p; ++x2) {
          for (std::uint64_t x4 = 0; x4 < p; ++x4) {
            const complex t = f[x4] * std::conj(f[x2]) * std::conj(f[add(x4, u3)]) * f[add(x2, u3)] * k1(x1, x2, x3) *
                              std::conj(k1(x1, x4, x3));
            all += t;
            if (x2 == x4) {
              diag += t;
            } else {
              off += t;
            }
          }
        }
      }
    }
    c.lambda2 = all.value();
    c.lambda2_diag = diag.value();
    c.lambda2_off = off.value();
  }

  {
    CompensatedSum acc;
    for (std::uint64_t u1 = 0; u1 < p; ++u1) {
      for (std::uint64_t u2 = 0; u2 < p; ++u2) {
        if (u1 == u2) continue;
        for (std::uint64_t u3 = 1; u3 < p; ++u3) {
          const complex coeff = f[u1] * std::conj(f[u2]) * std::conj(f[add(u1, u3)]) * f[add(u2, u3)];
          acc += coeff * K2_via_H2(ctx, {FpElement(u1), FpElement(u2), FpElement(u3)}, &K1).value;
        }
      }
    }
    c.lambda2_k2 = acc.value();
  }
  return c;
}

/// The checks along the chain. Identities are compared at rel_tol relative to
/// the natural scale ||f1||^4 (times ||f2||^4 where f2 enters); inequalities
/// must hold with nonnegative slack up to the same rounding allowance.
inline std::vector<Assertion> CauchyChain::assertions(std::uint64_t p, double rel_tol) const {
  const double f4 = f1_norm_sq * f1_norm_sq;
  const double scale1 = std::max(f4, 1e-300);
  const double slack = rel_tol * scale1;
  std::vector<Assertion> out;
  out.push_back(check_le("lambda1_is_sum_of_squares", std::abs(lambda1_direct - lambda1), slack));
  out.push_back(check_le("main_term_le_f2sq_sqrt_lambda1",
                         std::abs(main_term) - f2_norm_sq * std::sqrt(lambda1), rel_tol * f4 * f2_norm_sq * f2_norm_sq));
  out.push_back(check_le("lambda1_split", std::abs(lambda1_direct - (lambda1_diag + lambda1_off)), slack));
  out.push_back(check_le("lambda1_diag_le_displayed_bound", std::abs(lambda1_diag) - lambda1_diag_bound, slack));
  out.push_back(check_le("side_case_reduction", std::abs(side_raw - side), slack));
  out.push_back(check_le("side_case_le_displayed_bound", std::abs(side) - side_bound, slack));
  out.push_back(check_le("offdiag_eq_refined_minus_2re_side",
                         std::abs(lambda1_off - (refined - 2.0 * side.real())), slack));
  out.push_back(check_le("refined_eq_sum_h1", std::abs(refined - refined_h1), slack));
  out.push_back(check_le("refined_eq_simplified_k1", std::abs(refined - simplified), slack));
  out.push_back(check_le("lambda2_real_nonnegative", std::max(std::abs(lambda2.imag()), -lambda2.real()), slack));
  out.push_back(check_le("simplified_le_fsq_sqrt_lambda2",
                         std::abs(simplified) - f1_norm_sq * std::sqrt(std::max(lambda2.real(), 0.0)), slack));
  out.push_back(check_le("lambda2_split", std::abs(lambda2 - (lambda2_diag + lambda2_off)), slack));
  out.push_back(check_le("lambda2_offdiag_eq_k2_form", std::abs(lambda2_off - lambda2_k2), slack));
  (void)p;
  return out;
}

/// Lower bound on ||T|| with the functions that realize it.
struct NormEstimate {
  double value = 0.0;
  GridFunction witness_f1;
  GridFunction witness_f2;
  unsigned restarts = 0;
  bool converged = false;
  std::vector<double> running_max;  // best value after each start
};

struct NormEstimateConfig {
  unsigned restarts = 32;
  unsigned max_iters = 200;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  unsigned inner_iters = 4;
  unsigned threads = 1;
};

/// ||T(f1,f2)||_2 / (||f1||_2 ||f2||_2).
inline double operator_ratio(const GaussKernelTable& K, const GridFunction& f1, const GridFunction& f2) {
  const double denom = norm(f1, 2.0) * norm(f2, 2.0);
  if (denom == 0.0) return 0.0;
  return norm(apply_T(K, f1, f2), 2.0) / denom;
}

namespace detail {

/// Dense p x p matrix, row-major.
struct DenseMatrix {
  std::size_t n = 0;
  std::vector<complex> a;

  std::vector<complex> apply(const std::vector<complex>& v) const {
    std::vector<complex> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      complex s = 0.0;
      const complex* row = &a[i * n];
      for (std::size_t j = 0; j < n; ++j) s += row[j] * v[j];
      out[i] = s;
    }
    return out;
  }

  std::vector<complex> apply_adjoint(const std::vector<complex>& w) const {
    std::vector<complex> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const complex wi = w[i];
      const complex* row = &a[i * n];
      for (std::size_t j = 0; j < n; ++j) out[j] += std::conj(row[j]) * wi;
    }
    return out;
  }
};

/// Matrix of f1 -> T(f1, f2): entry (s, a) = f2(s - a) K(a, s - a) for a != 0.
inline DenseMatrix first_slot_matrix(const GaussKernelTable& K, const GridFunction& f2) {
  const std::uint64_t p = K.p();
  DenseMatrix m{p, std::vector<complex>(p * p)};
  for (std::uint64_t s = 0; s < p; ++s) {
    for (std::uint64_t a = 1; a < p; ++a) {
      const std::uint64_t n = s >= a ? s - a : s + p - a;
      m.a[s * p + a] = f2[n] * K(a, n);
    }
  }
  return m;
}

/// Matrix of f2 -> T(f1, f2): entry (s, n) = f1(s - n) K(s - n, n) for n != s.
inline DenseMatrix second_slot_matrix(const GaussKernelTable& K, const GridFunction& f1) {
  const std::uint64_t p = K.p();
  DenseMatrix m{p, std::vector<complex>(p * p)};
  for (std::uint64_t s = 0; s < p; ++s) {
    for (std::uint64_t n = 0; n < p; ++n) {
      if (n == s) continue;
      const std::uint64_t a = s >= n ? s - n : s + p - n;
      m.a[s * p + n] = f1[a] * K(a, n);
    }
  }
  return m;
}

inline double l2(const std::vector<complex>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

/// Power iteration on M^H M from a warm start; returns the unit vector.
/// ||M v|| is nondecreasing along the iteration.
inline std::vector<complex> power_step(const DenseMatrix& m, std::vector<complex> v, unsigned iters) {
  for (unsigned k = 0; k < iters; ++k) {
    auto w = m.apply_adjoint(m.apply(v));
    const double nw = l2(w);
    if (nw == 0.0) break;
    for (auto& x : w) x /= nw;
    v = std::move(w);
  }
  return v;
}

struct AscentResult {
  double value = 0.0;
  GridFunction f1;
  GridFunction f2;
  bool converged = false;
};

inline AscentResult alternating_ascent(const GaussKernelTable& K, GridFunction f1, GridFunction f2,
                                       const NormEstimateConfig& cfg) {
  auto normalize = [](GridFunction& f) {
    const double n = norm(f, 2.0);
    if (n > 0.0) f *= complex(1.0 / n);
  };
  normalize(f1);
  normalize(f2);
  double best = operator_ratio(K, f1, f2);
  bool converged = false;
  for (unsigned it = 0; it < cfg.max_iters; ++it) {
    {
      const auto m = first_slot_matrix(K, f2);
      std::vector<complex> v(f1.values().begin(), f1.values().end());
      f1 = GridFunction(f1.field_ptr(), power_step(m, std::move(v), cfg.inner_iters));
    }
    {
      const auto m = second_slot_matrix(K, f1);
      std::vector<complex> v(f2.values().begin(), f2.values().end());
      f2 = GridFunction(f2.field_ptr(), power_step(m, std::move(v), cfg.inner_iters));
    }
    const double r = operator_ratio(K, f1, f2);
    const double gain = r - best;
    best = r;
    if (gain < cfg.tol * std::max(best, 1e-300)) {
      converged = true;
      break;
    }
  }
  return {best, std::move(f1), std::move(f2), converged};
}

inline GridFunction residue_indicator(const FieldPtr& field) {
  GridFunction f(field);
  for (std::uint64_t x = 1; x < field->p(); ++x) {
    if (field->legendre(FpElement(x)) == 1) f[x] = 1.0;
  }
  return f;
}

}  // namespace detail

/// Best ratio from one explicit starting pair.
inline NormEstimate estimate_norm_from(const GridFunction& f1, const GridFunction& f2, const NormEstimateConfig& cfg = {}) {
  detail::check_same_field(f1, f2);
  const GaussKernelTable K(f1.field());
  auto r = detail::alternating_ascent(K, f1, f2, cfg);
  NormEstimate e{r.value, std::move(r.f1), std::move(r.f2), 1, r.converged, {r.value}};
  e.value = operator_ratio(K, e.witness_f1, e.witness_f2);
  e.running_max = {e.value};
  return e;
}

/// Deterministic starts (delta, constant, quadratic-residue indicator pairs)
/// followed by `restarts` seeded random pairs; keeps the running maximum.
inline NormEstimate estimate_norm(const FieldPtr& field, const NormEstimateConfig& cfg = {}) {
  const GaussKernelTable K(*field);
  std::vector<std::pair<GridFunction, GridFunction>> starts;
  starts.emplace_back(GridFunction::delta(field, 1), GridFunction::delta(field, 1));
  starts.emplace_back(GridFunction::constant(field, 1.0), GridFunction::constant(field, 1.0));
  starts.emplace_back(detail::residue_indicator(field), detail::residue_indicator(field));
  for (unsigned r = 0; r < cfg.restarts; ++r) {
    starts.emplace_back(GridFunction::random(field, split_seed(cfg.seed, 2 * r)),
                        GridFunction::random(field, split_seed(cfg.seed, 2 * r + 1)));
  }

  std::vector<std::optional<detail::AscentResult>> results(starts.size());
  parallel_for(starts.size(), cfg.threads, [&](std::size_t i) {
    results[i] = detail::alternating_ascent(K, starts[i].first, starts[i].second, cfg);
  });

  NormEstimate best{-1.0, GridFunction(field), GridFunction(field), cfg.restarts, false, {}};
  for (auto& r : results) {
    if (r->value > best.value) {
      best.value = r->value;
      best.witness_f1 = r->f1;
      best.witness_f2 = r->f2;
      best.converged = r->converged;
    }
    best.running_max.push_back(best.value);
  }
  best.value = operator_ratio(K, best.witness_f1, best.witness_f2);
  return best;
}

}  // namespace bfp
