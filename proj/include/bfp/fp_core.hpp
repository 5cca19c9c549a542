#pragma once

// Arithmetic over the prime field F_p and the additive character
// e_p(x) = exp(-2*pi*i*x/p), with per-field lookup tables.

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace bfp {

using complex = std::complex<double>;

enum class ErrorKind {
  NotPrime,
  TooLarge,
  ZeroInverse,
  BudgetExceeded,
  DegenerateInput,
  InvalidArgument,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPrime: return "NotPrime";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ZeroInverse: return "ZeroInverse";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Canonical residue in [0, p).
struct FpElement {
  std::uint64_t value = 0;

  constexpr FpElement() = default;
  constexpr explicit FpElement(std::uint64_t v) : value(v) {}

  constexpr bool is_zero() const { return value == 0; }
  friend constexpr bool operator==(FpElement, FpElement) = default;
};

namespace detail {

inline std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1U) result = mulmod64(result, base, m);
    base = mulmod64(base, base, m);
    exp >>= 1U;
  }
  return result;
}

}  // namespace detail

/// Deterministic Miller-Rabin. The first twelve prime bases are a witness
/// set valid for every n < 3.3e24, so all 64-bit inputs are decided exactly.
inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  constexpr std::array<std::uint64_t, 12> bases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (auto q : bases) {
    if (n % q == 0) return n == q;
  }
  const int s = std::countr_zero(n - 1);
  const std::uint64_t d = (n - 1) >> s;
  for (auto a : bases) {
    std::uint64_t x = detail::powmod64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = detail::mulmod64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// Default cap on the bytes spent on per-field tables.
inline constexpr std::uint64_t kDefaultTableBudget = std::uint64_t{1} << 31;

/// A validated odd prime together with inverse, Legendre and unit-root tables.
/// Immutable after construction; share it freely across threads.
class FieldContext {
 public:
  explicit FieldContext(std::uint64_t p, std::uint64_t table_budget = kDefaultTableBudget) : p_(p) {
    if (p < 3) throw Error(ErrorKind::InvalidArgument, "p must be >= 3, got " + std::to_string(p));
    if (!is_prime(p)) throw Error(ErrorKind::NotPrime, std::to_string(p) + " is not prime");
    const std::uint64_t bytes_per_entry = sizeof(std::uint64_t) + sizeof(std::int8_t) + sizeof(complex);
    if (p > table_budget / bytes_per_entry) {
      throw Error(ErrorKind::TooLarge, "tables for p=" + std::to_string(p) + " exceed budget of " +
                                           std::to_string(table_budget) + " bytes");
    }
    build_tables();
  }

  std::uint64_t p() const noexcept { return p_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(p_); }

  FpElement element(std::int64_t v) const {
    const auto m = static_cast<std::int64_t>(p_ % static_cast<std::uint64_t>(INT64_MAX));
    std::int64_t r = v % m;
    if (r < 0) r += m;
    return FpElement(static_cast<std::uint64_t>(r));
  }

  FpElement add(FpElement a, FpElement b) const {
    const std::uint64_t s = a.value + b.value;
    return FpElement(s >= p_ || s < a.value ? s - p_ : s);
  }
  FpElement sub(FpElement a, FpElement b) const {
    return FpElement(a.value >= b.value ? a.value - b.value : a.value + (p_ - b.value));
  }
  FpElement neg(FpElement a) const { return FpElement(a.value == 0 ? 0 : p_ - a.value); }
  FpElement mul(FpElement a, FpElement b) const {
    if (p_ <= UINT32_MAX) return FpElement(a.value * b.value % p_);
    return FpElement(detail::mulmod64(a.value, b.value, p_));
  }
  FpElement sq(FpElement a) const { return mul(a, a); }
  FpElement pow(FpElement a, std::uint64_t e) const { return FpElement(detail::powmod64(a.value, e, p_)); }

  FpElement inv(FpElement a) const {
    if (a.is_zero()) throw Error(ErrorKind::ZeroInverse, "0 has no inverse mod " + std::to_string(p_));
    return FpElement(inv_table_[a.value]);
  }
  int legendre(FpElement a) const { return legendre_table_[a.value]; }
  const complex& ep(FpElement x) const { return unit_roots_[x.value]; }

  /// Inverses of 2 and 4, used by every completion of squares.
  FpElement half() const { return half_; }
  FpElement quarter() const { return quarter_; }

  /// sigma_p = p^{-1/2} sum_y e_p(y^2), evaluated by direct summation once.
  const complex& sigma() const noexcept { return sigma_; }

  /// All r with r^2 = a (Tonelli-Shanks); returned in ascending order.
  std::vector<FpElement> sqrt_mod(FpElement a) const {
    if (a.is_zero()) return {FpElement(0)};
    if (legendre(a) != 1) return {};
    const std::uint64_t r = tonelli_shanks(a.value);
    const std::uint64_t r2 = p_ - r;
    if (r < r2) return {FpElement(r), FpElement(r2)};
    return {FpElement(r2), FpElement(r)};
  }

  const std::vector<std::uint64_t>& inv_table() const noexcept { return inv_table_; }
  const std::vector<std::int8_t>& legendre_table() const noexcept { return legendre_table_; }
  const std::vector<complex>& unit_roots() const noexcept { return unit_roots_; }

 private:
  void build_tables() {
    const auto n = size();
    inv_table_.assign(n, 0);
    legendre_table_.assign(n, -1);
    unit_roots_.resize(n);

    // Inverses by the prefix-product trick (one exponentiation total).
    if (n > 1) {
      inv_table_[1] = 1;
      for (std::uint64_t a = 2; a < p_; ++a) {
        // inv(a) = -(p / a) * inv(p mod a)
        const std::uint64_t q = p_ / a;
        inv_table_[a] = mul(FpElement(p_ - q % p_), FpElement(inv_table_[p_ % a])).value;
      }
    }

    legendre_table_[0] = 0;
    for (std::uint64_t y = 1; y <= (p_ - 1) / 2; ++y) legendre_table_[mul(FpElement(y), FpElement(y)).value] = 1;

    const double step = -2.0 * std::numbers::pi / static_cast<double>(p_);
    for (std::uint64_t k = 0; k < p_; ++k) {
      // Use the nearer of k and k - p so the angle stays in [-pi, pi].
      const double kk = k <= p_ / 2 ? static_cast<double>(k) : -static_cast<double>(p_ - k);
      unit_roots_[k] = complex(std::cos(step * kk), std::sin(step * kk));
    }
    unit_roots_[0] = complex(1.0, 0.0);

    half_ = FpElement(inv_table_[2]);
    quarter_ = FpElement(inv_table_[4 % p_]);

    // Direct summation by square class: sum_y e_p(y^2) = 1 + 2 sum_{QR r} e_p(r).
    double re = 1.0;
    double im = 0.0;
    double cre = 0.0;
    double cim = 0.0;
    for (std::uint64_t r = 1; r < p_; ++r) {
      if (legendre_table_[r] != 1) continue;
      const double tr = 2.0 * unit_roots_[r].real() - cre;
      const double sr = re + tr;
      cre = (sr - re) - tr;
      re = sr;
      const double ti = 2.0 * unit_roots_[r].imag() - cim;
      const double si = im + ti;
      cim = (si - im) - ti;
      im = si;
    }
    sigma_ = complex(re, im) / std::sqrt(static_cast<double>(p_));
  }

  std::uint64_t tonelli_shanks(std::uint64_t a) const {
    if (p_ % 4 == 3) return detail::powmod64(a, (p_ + 1) / 4, p_);
    std::uint64_t q = p_ - 1;
    int s = 0;
    while ((q & 1U) == 0) {
      q >>= 1U;
      ++s;
    }
    std::uint64_t z = 2;
    while (legendre(FpElement(z)) != -1) ++z;
    std::uint64_t c = detail::powmod64(z, q, p_);
    std::uint64_t r = detail::powmod64(a, (q + 1) / 2, p_);
    std::uint64_t t = detail::powmod64(a, q, p_);
    int m = s;
    while (t != 1) {
      int i = 0;
      std::uint64_t t2 = t;
      while (t2 != 1) {
        t2 = detail::mulmod64(t2, t2, p_);
        ++i;
      }
      std::uint64_t b = c;
      for (int j = 0; j < m - i - 1; ++j) b = detail::mulmod64(b, b, p_);
      r = detail::mulmod64(r, b, p_);
      c = detail::mulmod64(b, b, p_);
      t = detail::mulmod64(t, c, p_);
      m = i;
    }
    return r;
  }

  std::uint64_t p_;
  std::vector<std::uint64_t> inv_table_;
  std::vector<std::int8_t> legendre_table_;
  std::vector<complex> unit_roots_;
  FpElement half_{};
  FpElement quarter_{};
  complex sigma_{};
};

using FieldPtr = std::shared_ptr<const FieldContext>;

inline FieldPtr make_field(std::uint64_t p, std::uint64_t table_budget = kDefaultTableBudget) {
  return std::make_shared<const FieldContext>(p, table_budget);
}

inline FpElement inv(const FieldContext& ctx, FpElement a) { return ctx.inv(a); }
inline int legendre(const FieldContext& ctx, FpElement a) { return ctx.legendre(a); }
inline std::vector<FpElement> sqrt_mod(const FieldContext& ctx, FpElement a) { return ctx.sqrt_mod(a); }
inline complex ep(const FieldContext& ctx, FpElement x) { return ctx.ep(x); }

}  // namespace bfp
