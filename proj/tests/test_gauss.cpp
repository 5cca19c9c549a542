#include "oracles.hpp"

#include <bfp/gauss.hpp>

#include <gtest/gtest.h>

using namespace bfp;

TEST(Sigma, FrozenValues) {
  EXPECT_LT(std::abs(sigma_p(*make_field(5)).value - complex(1.0, 0.0)), 1e-12);
  EXPECT_LT(std::abs(sigma_p(*make_field(7)).value - complex(0.0, -1.0)), 1e-12);
  for (std::uint64_t p : {5, 7, 11, 13, 101, 1009}) {
    const auto s = sigma_p(*make_field(p)).value;
    EXPECT_NEAR(std::abs(s), 1.0, 1e-12);
    EXPECT_LT(std::abs(std::pow(s, 4) - 1.0), 1e-9);
    // p^{-1/2} sum_y e_p(y^2), from the independent character
    EXPECT_LT(std::abs(s - oracle::K(1, 0, p) * std::sqrt(static_cast<double>(p))), 1e-10);
  }
}

TEST(KBrute, Examples) {
  for (std::uint64_t p : {5, 7, 13}) {
    const auto f = make_field(p);
    EXPECT_LT(std::abs(K_brute(*f, FpElement(0), FpElement(0)).value - 1.0), 1e-12);
    for (std::uint64_t b = 1; b < p; ++b) EXPECT_LT(K_brute(*f, FpElement(0), FpElement(b)).modulus(), 1e-12);
  }
  EXPECT_NEAR(K_brute(*make_field(7), FpElement(1), FpElement(0)).modulus(), 1.0 / std::sqrt(7.0), 1e-12);
}

TEST(KClosed, ExamplesAndOracle) {
  const auto f = make_field(7);
  EXPECT_EQ(K_closed(*f, FpElement(0), FpElement(0)).value, complex(1.0));
  EXPECT_LT(std::abs(K_closed(*f, FpElement(1), FpElement(0)).value - f->sigma() / std::sqrt(7.0)), 1e-15);
  for (std::uint64_t p : {5, 7, 11, 13, 17, 19}) {
    const auto g = make_field(p);
    for (std::uint64_t a = 0; a < p; ++a)
      for (std::uint64_t b = 0; b < p; ++b) {
        const auto closed = K_closed(*g, FpElement(a), FpElement(b));
        EXPECT_LT(std::abs(closed.value - K_brute(*g, FpElement(a), FpElement(b)).value), 1e-10);
        EXPECT_LT(std::abs(closed.value - oracle::K(a, b, p)), 1e-10);
        EXPECT_LE(closed.abs_error, 1e-6);
      }
  }
}

TEST(KClosed, ModulusExhaustive) {
  for (std::uint64_t p = 3; p <= 101; ++p) {
    if (!is_prime(p)) continue;
    const auto g = make_field(p);
    const GaussKernelTable table(*g);
    for (std::uint64_t a = 1; a < p; ++a)
      for (std::uint64_t b = 0; b < p; ++b) ASSERT_NEAR(std::abs(table(a, b)), 1.0 / std::sqrt(static_cast<double>(p)), 1e-10);
  }
}

TEST(KernelValue, ProductPropagatesError) {
  const KernelValue a{complex(2.0, 0.0), 0.1}, b{complex(0.0, 3.0), 0.2};
  const auto c = a * b;
  EXPECT_EQ(c.value, complex(0.0, 6.0));
  EXPECT_NEAR(c.abs_error, 2.0 * 0.2 + 3.0 * 0.1 + 0.02, 1e-15);
  EXPECT_EQ(conj(b).value, complex(0.0, -3.0));
}
