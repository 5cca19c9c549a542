#include "oracles.hpp"

#include <bfp/operator.hpp>

#include <gtest/gtest.h>

#include <algorithm>

using namespace bfp;

namespace {

double l2_diff(const GridFunction& a, const std::vector<complex>& b) {
  double s = 0;
  for (std::size_t i = 0; i < b.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

/// max ||T(f1,f2)|| / (||f1|| ||f2||) over real f1 in span{delta_a, delta_b} and
/// real f2 in span{delta_c, delta_d}. For fixed f1 the best f2 is the top
/// eigenvector of a 2x2 Gram matrix; f1's angle is scanned then golden-refined.
double two_sparse_oracle(std::uint64_t p) {
  std::vector<complex> K(p * p);
  for (std::uint64_t a = 0; a < p; ++a)
    for (std::uint64_t b = 0; b < p; ++b) K[a * p + b] = oracle::K(a, b, p);
  // T(f1, delta_c)(s) = f1(s - c) K(s - c, c) for s != c
  auto column = [&](double w_a, std::uint64_t a, double w_b, std::uint64_t b, std::uint64_t c) {
    std::vector<complex> v(p);
    for (std::uint64_t s = 0; s < p; ++s) {
      if (s == c) continue;
      const std::uint64_t m = (s + p - c) % p;
      const double f = (m == a ? w_a : 0.0) + (m == b ? w_b : 0.0);
      v[s] = f * K[m * p + c];
    }
    return v;
  };
  auto top = [&](double theta, std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    const double wa = std::cos(theta), wb = std::sin(theta);
    const double n1 = a == b ? std::abs(wa + wb) : 1.0;
    if (n1 < 1e-12) return 0.0;
    const auto vc = column(wa, a, wb, b, c);
    const auto vd = column(wa, a, wb, b, d);
    double g11 = 0, g22 = 0, g12 = 0;
    for (std::uint64_t s = 0; s < p; ++s) {
      g11 += std::norm(vc[s]);
      g22 += std::norm(vd[s]);
      g12 += (vc[s] * std::conj(vd[s])).real();
    }
    if (c == d) return std::sqrt(g11) / n1;
    const double tr = g11 + g22, det = g11 * g22 - g12 * g12;
    return std::sqrt(std::max(0.0, tr / 2 + std::sqrt(std::max(0.0, tr * tr / 4 - det)))) / n1;
  };
  double best = 0.0;
  for (std::uint64_t a = 0; a < p; ++a)
    for (std::uint64_t b = a; b < p; ++b)
      for (std::uint64_t c = 0; c < p; ++c)
        for (std::uint64_t d = c; d < p; ++d) {
          constexpr int kGrid = 360;
          double bt = 0, bv = -1;
          for (int i = 0; i < kGrid; ++i) {
            const double t = M_PI * i / kGrid;
            const double v = top(t, a, b, c, d);
            if (v > bv) bv = v, bt = t;
          }
          double lo = bt - M_PI / kGrid, hi = bt + M_PI / kGrid;
          const double g = (std::sqrt(5.0) - 1) / 2;
          for (int i = 0; i < 80; ++i) {
            const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
            if (top(m1, a, b, c, d) < top(m2, a, b, c, d)) lo = m1; else hi = m2;
          }
          best = std::max({best, bv, top((lo + hi) / 2, a, b, c, d)});
        }
  return best;
}

}  // namespace

TEST(ApplyT, MatchesKernelOracle) {
  const auto f = make_field(7);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f1 = GridFunction::random(f, 2 * seed), f2 = GridFunction::random(f, 2 * seed + 1);
    const std::vector<complex> a(f1.values().begin(), f1.values().end()), b(f2.values().begin(), f2.values().end());
    const auto expect = oracle::T(a, b, 7);
    EXPECT_LT(l2_diff(apply_T(f1, f2), expect), 1e-10);
    EXPECT_LT(l2_diff(apply_T(GaussKernelTable(*f), f1, f2, 3), expect), 1e-10);
  }
}

TEST(ApplyT, DiagonalExclusionForDeltas) {
  const auto f = make_field(7);
  const auto d = GridFunction::delta(f);
  // Only n = s = 0 contributes, and it is excluded.
  EXPECT_EQ(norm(apply_T(d, d)), 0.0);
  // With n = s kept, the s = 0 entry is K(0,0) = 1 and the norm is 1.
  EXPECT_NEAR(std::abs(oracle::K(0, 0, 7)), 1.0, 1e-15);
}

TEST(ApplyT, ZeroAndBilinear) {
  const auto f = make_field(11);
  const auto f1 = GridFunction::random(f, 1), f2 = GridFunction::random(f, 2), g = GridFunction::random(f, 3);
  EXPECT_EQ(norm(apply_T(f1, GridFunction(f))), 0.0);
  const complex alpha(1.5, -0.25);
  auto combo = f1;
  combo *= alpha;
  combo += g;
  auto expect = apply_T(f1, f2);
  expect *= alpha;
  expect += apply_T(g, f2);
  EXPECT_LT(l2_diff(apply_T(combo, f2), std::vector<complex>(expect.values().begin(), expect.values().end())), 1e-9);
  auto combo2 = f2;
  combo2 *= alpha;
  combo2 += g;
  auto expect2 = apply_T(f1, f2);
  expect2 *= alpha;
  expect2 += apply_T(f1, g);
  EXPECT_LT(l2_diff(apply_T(f1, combo2), std::vector<complex>(expect2.values().begin(), expect2.values().end())), 1e-9);
  EXPECT_THROW(apply_T(f1, GridFunction::random(make_field(13), 1)), Error);
}

TEST(Decomposition, ResidualAndCorrectionBound) {
  for (std::uint64_t p : {7, 11, 31}) {
    const auto f = make_field(p);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto f1 = GridFunction::random(f, 10 + s), f2 = GridFunction::random(f, 20 + s);
      const auto d = decompose_norm(f1, f2);
      const double scale = std::pow(norm(f1) * norm(f2), 2);
      EXPECT_LE(d.residual, 1e-10 * scale);
      EXPECT_LE(std::abs(d.correction), d.correction_bound);
      EXPECT_LT(std::abs(d.correction - d.correction_reduced), 1e-10 * scale);
    }
  }
  const auto d7 = GridFunction::delta(make_field(7));
  EXPECT_LE(decomposition_residual(d7, d7), 1e-12);
  try {
    decompose_norm(GridFunction::delta(make_field(103)), GridFunction::delta(make_field(103)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
  }
}

TEST(CauchyChain, AllChecksHold) {
  for (std::uint64_t p : {7, 11}) {
    const auto f = make_field(p);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto c = cauchy_chain(GridFunction::random(f, 2 * s), GridFunction::random(f, 2 * s + 1));
      for (const auto& a : c.assertions(p)) EXPECT_TRUE(a.pass) << a.name << " p=" << p << " " << a.observed;
    }
  }
  EXPECT_THROW(cauchy_chain(GridFunction::delta(make_field(37)), GridFunction::delta(make_field(37))), Error);
}

TEST(EstimateNorm, WitnessesAndMonotonicity) {
  const auto f = make_field(13);
  NormEstimateConfig cfg;
  cfg.restarts = 8;
  const auto e = estimate_norm(f, cfg);
  const GaussKernelTable K(*f);
  EXPECT_NEAR(operator_ratio(K, e.witness_f1, e.witness_f2), e.value, 1e-9);
  EXPECT_GE(e.value, 0.0);
  ASSERT_EQ(e.running_max.size(), 3U + cfg.restarts);
  for (std::size_t i = 1; i < e.running_max.size(); ++i) EXPECT_GE(e.running_max[i], e.running_max[i - 1]);

  cfg.restarts = 16;
  EXPECT_GE(estimate_norm(f, cfg).value, e.value);
  EXPECT_EQ(estimate_norm(f, cfg).value, estimate_norm(f, cfg).value);
}

TEST(EstimateNorm, ScaleInvariantStarts) {
  const auto f = make_field(11);
  const auto f1 = GridFunction::random(f, 1), f2 = GridFunction::random(f, 2);
  auto g1 = f1, g2 = f2;
  g1 *= complex(3.0, 0.0);
  g2 *= complex(0.0, -0.5);
  EXPECT_NEAR(estimate_norm_from(f1, f2).value, estimate_norm_from(g1, g2).value, 1e-9);
}

TEST(EstimateNorm, DominatesTwoSparseOracleAtSeven) {
  const double oracle_value = two_sparse_oracle(7);
  const auto e = estimate_norm(make_field(7));
  // a single pair of deltas already reaches |K(1,0)| = 7^{-1/2}
  EXPECT_GT(oracle_value, 1.0 / std::sqrt(7.0) - 1e-12);
  EXPECT_GE(e.value, oracle_value - 1e-6) << "oracle " << oracle_value;
  EXPECT_LE(e.value, 1.0);
}
