#include <bfp/spectral.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace bfp;

namespace {

double rel_diff(const GridFunction& a, const GridFunction& b) {
  std::vector<complex> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return norm(GridFunction(a.field_ptr(), std::move(d))) / std::max(norm(b), 1e-300);
}

}  // namespace

TEST(GridFunction, ValidatesLengthAndFiniteness) {
  const auto f = make_field(7);
  EXPECT_THROW(GridFunction(f, std::vector<complex>(6)), Error);
  std::vector<complex> v(7);
  v[2] = complex(std::nan(""), 0.0);
  EXPECT_THROW(GridFunction(f, v), Error);
}

TEST(Dft, DeltaAndConstant) {
  for (std::uint64_t p : {7, 13, 101}) {
    const auto f = make_field(p);
    for (auto mode : {DftMode::naive, DftMode::fast}) {
      const auto d = dft(GridFunction::delta(f), mode);
      for (std::size_t z = 0; z < p; ++z) EXPECT_LT(std::abs(d[z] - 1.0), 1e-12);
      const auto c = dft(GridFunction::constant(f, 1.0), mode);
      EXPECT_LT(std::abs(c[0] - static_cast<double>(p)), 1e-9);
      for (std::size_t z = 1; z < p; ++z) EXPECT_LT(std::abs(c[z]), 1e-9);
    }
  }
}

TEST(Dft, NaiveMatchesFastAndDefinition) {
  const auto f = make_field(101);
  const auto g = GridFunction::random(f, 7);
  const auto fast = dft(g, DftMode::fast);
  const auto naive = dft(g, DftMode::naive);
  EXPECT_LT(rel_diff(fast, naive), 1e-9);
  // Spot-check the definition with explicit angles, sign negative.
  for (std::size_t z : {0, 1, 50, 100}) {
    complex s = 0;
    for (std::size_t x = 0; x < 101; ++x) s += g[x] * std::polar(1.0, -2.0 * M_PI * static_cast<double>(x * z % 101) / 101.0);
    EXPECT_LT(std::abs(s - fast[z]), 1e-10);
  }
}

TEST(Dft, Linearity) {
  const auto f = make_field(97);
  auto a = GridFunction::random(f, 1), b = GridFunction::random(f, 2);
  const complex alpha(0.3, -1.2), beta(2.0, 0.5);
  auto lhs_in = a;
  lhs_in *= alpha;
  auto bb = b;
  bb *= beta;
  lhs_in += bb;
  auto rhs = dft(a);
  rhs *= alpha;
  auto db = dft(b);
  db *= beta;
  rhs += db;
  EXPECT_LT(rel_diff(dft(lhs_in), rhs), 1e-9);
}

TEST(Idft, RoundTripAndExamples) {
  const auto f = make_field(97);
  const auto g = GridFunction::random(f, 11);
  EXPECT_LT(rel_diff(idft(dft(g)), g), 1e-9);
  EXPECT_LT(rel_diff(idft(dft(g, DftMode::naive), DftMode::naive), g), 1e-9);
  EXPECT_LT(rel_diff(idft(GridFunction::constant(f, 1.0)), GridFunction::delta(f)), 1e-12);
  auto pd = GridFunction::delta(f);
  pd *= 97.0;
  EXPECT_LT(rel_diff(idft(pd), GridFunction::constant(f, 1.0)), 1e-12);
}

TEST(Norm, Examples) {
  const auto f = make_field(7);
  EXPECT_DOUBLE_EQ(norm(GridFunction::delta(f)), 1.0);
  EXPECT_NEAR(norm(GridFunction::constant(f, 1.0)), std::sqrt(7.0), 1e-15);
  EXPECT_NEAR(norm(GridFunction::constant(f, 1.0), 1.0), 7.0, 1e-14);
  EXPECT_THROW(norm(GridFunction::delta(f), 0.0), Error);
  const auto g = GridFunction::random(f, 3);
  double s = 0;
  for (auto v : g.values()) s += std::norm(v);
  EXPECT_NEAR(norm(g) * norm(g), s, 1e-12 * s);
}

TEST(Parseval, ResidualSmall) {
  const auto f7 = make_field(7);
  EXPECT_LE(parseval_residual(GridFunction::delta(f7)), 1e-12);
  EXPECT_LE(parseval_residual(GridFunction::constant(f7, 1.0)), 1e-12);
  for (std::uint64_t p : {7, 97, 499, 1009}) {
    const auto f = make_field(p);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto g = GridFunction::random(f, s);
      EXPECT_LE(parseval_residual(g), 1e-9 * norm(g));
      EXPECT_LE(parseval_residual(g, DftMode::naive), 1e-9 * norm(g));
    }
  }
}

TEST(GridFunction, RandomIsSeeded) {
  const auto f = make_field(31);
  EXPECT_EQ(GridFunction::random(f, 5).values()[3], GridFunction::random(f, 5).values()[3]);
  EXPECT_NE(GridFunction::random(f, 5).values()[3], GridFunction::random(f, 6).values()[3]);
}
