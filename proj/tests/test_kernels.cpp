#include "oracles.hpp"

#include <bfp/kernels.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace bfp;

namespace {

K1Point pt(std::uint64_t a, std::uint64_t b, std::uint64_t c) { return {FpElement(a), FpElement(b), FpElement(c)}; }

}  // namespace

TEST(R1Phase, Examples) {
  const auto f = make_field(7);
  for (std::uint64_t y = 0; y < 7; ++y) EXPECT_EQ(R1_phase(*f, pt(0, 0, 0), FpElement(y), FpElement(3), FpElement(5)).value, 0U);
  EXPECT_EQ(R1_phase(*f, pt(1, 0, 0), FpElement(1), FpElement(0), FpElement(0)).value, 6U);  // -1 mod 7
}

TEST(R1Phase, TermByTermOracleExhaustive) {
  const std::uint64_t p = 7;
  const auto f = make_field(p);
  for (std::uint64_t i = 0; i < p * p * p; ++i) {
    const auto x = pt(i / 49, i / 7 % 7, i % 7);
    const auto poly = R1_polynomial(*f, x);
    for (std::uint64_t j = 0; j < p * p * p; ++j) {
      const std::uint64_t y1 = j / 49, y2 = j / 7 % 7, y3 = j % 7;
      const auto expect = oracle::R1(i / 49, i / 7 % 7, i % 7, y1, y2, y3, p);
      ASSERT_EQ(R1_phase(*f, x, FpElement(y1), FpElement(y2), FpElement(y3)).value, expect);
      ASSERT_EQ(poly.evaluate(*f, {FpElement(y1), FpElement(y2), FpElement(y3)}).value, expect);
    }
  }
}

TEST(K1Brute, ExamplesAndCap) {
  const auto f = make_field(7);
  EXPECT_LT(std::abs(K1_brute(*f, pt(0, 0, 0)).value - 1.0), 1e-12);
  EXPECT_NEAR(K1_brute(*f, pt(1, 2, 3)).modulus(), std::pow(7.0, -1.5), 1e-9);
  for (std::uint64_t x2 = 1; x2 < 7; ++x2) {
    EXPECT_LE(K1_brute(*f, pt(0, x2, 7 - x2)).modulus(), 1.0 / 7 + 1e-9);
  }
  try {
    K1_brute(*make_field(211), pt(1, 2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
  }
}

TEST(K1Brute, StrategiesAgreeWithOracle) {
  const auto f = make_field(7);
  for (std::uint64_t i = 0; i < 343; i += 5) {
    const auto x = pt(i / 49, i / 7 % 7, i % 7);
    const auto d = K1_brute(*f, x, BruteStrategy::direct);
    EXPECT_LT(std::abs(d.value - K1_brute(*f, x, BruteStrategy::factored).value), 1e-12);
    EXPECT_LT(std::abs(d.value - oracle::K1(i / 49, i / 7 % 7, i % 7, 7)), 1e-12);
  }
}

TEST(K1Reduced, FullGridsAgainstBrute) {
  for (std::uint64_t p : {7, 11}) {
    const auto f = make_field(p);
    for (std::uint64_t i = 0; i < p * p * p; ++i) {
      const auto x = pt(i / (p * p), i / p % p, i % p);
      ASSERT_LT(std::abs(K1_reduced(*f, x).value - K1_brute(*f, x).value), 1e-8) << i;
    }
  }
  EXPECT_LT(std::abs(K1_reduced(*make_field(13), pt(1, 2, 3)).value - oracle::K1(1, 2, 3, 13)), 1e-12);
  EXPECT_EQ(K1_reduced(*make_field(13), pt(0, 0, 0)).value, complex(1.0));
}

TEST(K1Reduced, ExactModulusOffDeterminantLocus) {
  for (std::uint64_t p : {7, 11, 13}) {
    const auto f = make_field(p);
    for (std::uint64_t i = 0; i < p * p * p; ++i) {
      const auto x = pt(i / (p * p), i / p % p, i % p);
      const double m = K1_reduced(*f, x).modulus();
      if (!detA(*f, x).is_zero()) {
        ASSERT_NEAR(std::pow(static_cast<double>(p), 1.5) * m, 1.0, 1e-6);
      } else if (!(x.x3 == x.x1)) {
        ASSERT_LE(m, 1.0 / static_cast<double>(p) + 1e-9);
      }
    }
  }
}

TEST(DetA, ExamplesAndExplicitDeterminant) {
  const auto f = make_field(7);
  EXPECT_EQ(detA(*f, pt(1, 2, 3)).value, 3U);
  EXPECT_TRUE(detA(*f, pt(1, 1, 3)).is_zero());
  for (std::uint64_t i = 0; i < 343; ++i) {
    const auto x = pt(i / 49, i / 7 % 7, i % 7);
    ASSERT_EQ(detA(*f, x), detA_explicit(*f, x));
  }
}

TEST(H1, ExamplesAndOracle) {
  const auto f = make_field(7);
  const FpElement z(0);
  EXPECT_LT(std::abs(H1(*f, z, z, z, z).value - 1.0), 1e-15);
  for (std::uint64_t n1 = 1; n1 < 7; ++n1)
    for (std::uint64_t n2 = 1; n2 < 7; ++n2) {
      EXPECT_NEAR(H1(*f, z, z, FpElement(n1), FpElement(n2)).modulus(), 1.0 / 49, 1e-12);
    }
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const std::uint64_t s1 = rng() % 7, s2 = rng() % 7, n1 = rng() % 7, n2 = rng() % 7;
    const auto K = [](std::uint64_t a, std::uint64_t b) { return oracle::K(a, b, 7); };
    const auto expect = K((s1 + 7 - n1) % 7, n1) * std::conj(K((s1 + 7 - n2) % 7, n2)) *
                        std::conj(K((s2 + 7 - n1) % 7, n1)) * K((s2 + 7 - n2) % 7, n2);
    EXPECT_LT(std::abs(H1(*f, FpElement(s1), FpElement(s2), FpElement(n1), FpElement(n2)).value - expect), 1e-12);
  }
}

TEST(H2, DiagonalNondegenerateAndDegenerate) {
  const auto f = make_field(11);
  const auto h = H2(*f, FpElement(1), FpElement(2), FpElement(3), FpElement(2));
  EXPECT_GE(h.value.real(), 0.0);
  EXPECT_EQ(h.value.imag(), 0.0);
  EXPECT_NEAR(H2(*f, FpElement(1), FpElement(2), FpElement(3), FpElement(4)).modulus(), std::pow(11.0, -3), 1e-8);
  // x3 + x2 = 0 for the first factor, x3 != x1
  EXPECT_LE(H2(*f, FpElement(1), FpElement(8), FpElement(3), FpElement(4)).modulus(), 1.0 / 121 + 1e-8);
}

TEST(GConstraint, Examples) {
  const auto f = make_field(7);
  const FpElement z(0), o(1);
  EXPECT_TRUE(G_constraint(*f, z, z, z, z).is_zero());
  EXPECT_TRUE(G_constraint(*f, o, o, o, o).is_zero());
  EXPECT_TRUE(G_constraint(*f, o, z, z, z).is_zero());
  EXPECT_EQ(G_constraint(*f, FpElement(2), z, z, z).value, 2U);
}

TEST(K2, DomainAndCaps) {
  const auto f = make_field(7);
  try {
    K2_brute(*f, {FpElement(1), FpElement(2), FpElement(0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateInput);
  }
  EXPECT_THROW(K2_via_H2(*f, {FpElement(1), FpElement(1), FpElement(2)}), Error);
  try {
    K2_brute(*make_field(67), {FpElement(1), FpElement(2), FpElement(3)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
  }
}

TEST(K2, BruteFullEnumerationAndCollapseAtSeven) {
  const auto f = make_field(7);
  const K1Table table(*f);
  for (std::uint64_t a = 0; a < 7; ++a)
    for (std::uint64_t b = 0; b < 7; ++b) {
      if (a == b) continue;
      for (std::uint64_t w = 1; w < 7; ++w) {
        const K2Point u{FpElement(a), FpElement(b), FpElement(w)};
        const auto brute = K2_brute(*f, u);
        EXPECT_LT(std::abs(brute.value - K2_full_enumeration(*f, u).value), 1e-10);
        EXPECT_LT(std::abs(brute.value - K2_via_H2(*f, u).value), 1e-8);
        EXPECT_LT(std::abs(brute.value - K2_via_H2(*f, u, &table).value), 1e-8);
      }
    }
}

TEST(K2, SampledAtThirtyOneHasSmallError) {
  const auto f = make_field(31);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    const std::uint64_t a = rng() % 31, b = (a + 1 + rng() % 30) % 31, w = 1 + rng() % 30;
    const auto v = K2_via_H2(*f, {FpElement(a), FpElement(b), FpElement(w)});
    EXPECT_TRUE(std::isfinite(v.value.real()) && std::isfinite(v.value.imag()));
    EXPECT_LE(v.abs_error, 1e-8);
    EXPECT_LT(std::abs(v.value - K2_brute(*f, {FpElement(a), FpElement(b), FpElement(w)}).value), 1e-8);
  }
}

TEST(ExceptionalSet, AlgebraicContainsAntidiagonal) {
  const auto f = make_field(31);
  for (std::uint64_t a = 0; a < 31; a += 3)
    for (std::uint64_t b = 1; b < 31; b += 4) {
      if (a == b || (a + b) % 31 == 0) continue;
      const auto s = exceptional_set(*f, FpElement(a), FpElement(b), Detection::algebraic);
      const FpElement target = f->neg(f->add(FpElement(a), FpElement(b)));
      EXPECT_NE(std::find(s.members.begin(), s.members.end(), target), s.members.end());
    }
  EXPECT_THROW(exceptional_set(*f, FpElement(2), FpElement(2), Detection::empirical), Error);
}

TEST(ExceptionalSet, ComparisonPartitionsMembers) {
  const auto f = make_field(31);
  const K1Table table(*f);
  const auto c = compare_exceptional_sets(*f, FpElement(3), FpElement(7), 2.0, &table);
  EXPECT_EQ(c.empirical.detection, Detection::empirical);
  for (auto m : c.empirical_only)
    EXPECT_EQ(std::find(c.algebraic.members.begin(), c.algebraic.members.end(), m), c.algebraic.members.end());
  // Raising the threshold past the observed sup empties the empirical set.
  const auto high = exceptional_set(*f, FpElement(3), FpElement(7), Detection::empirical, 6.0, &table);
  EXPECT_TRUE(high.members.empty());
}

TEST(DegenerateU4, RootsOfTheLinearFactors) {
  const auto f = make_field(7);
  // u4 = u2 and u4 = -(u2 + u3)
  EXPECT_EQ(degenerate_u4_set(*f, FpElement(1), FpElement(3)), (std::vector<FpElement>{FpElement(1), FpElement(3)}));
  // both roots coincide when 2 u2 + u3 = 0
  EXPECT_EQ(degenerate_u4_set(*f, FpElement(2), FpElement(3)), std::vector<FpElement>{FpElement(2)});
  EXPECT_EQ(degenerate_u4_set(*f, FpElement(2), FpElement(0)).size(), 7U);
}
