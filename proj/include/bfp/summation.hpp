#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>

namespace bfp {

/// Neumaier-compensated accumulator for complex terms. Also tracks the term
/// count and the sum of term moduli so callers can attach an error estimate.
class CompensatedSum {
 public:
  void add(std::complex<double> term) {
    add_component(re_, cre_, term.real());
    add_component(im_, cim_, term.imag());
    abs_sum_ += std::abs(term);
    ++count_;
  }

  CompensatedSum& operator+=(std::complex<double> term) {
    add(term);
    return *this;
  }

  std::complex<double> value() const { return {re_ + cre_, im_ + cim_}; }
  std::size_t count() const noexcept { return count_; }
  double abs_sum() const noexcept { return abs_sum_; }

  /// eps * sqrt(n) * sum|t|: covers the rounding already present in each
  /// tabulated term plus the residual of the compensated reduction.
  double error_estimate() const {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    return eps * std::sqrt(static_cast<double>(count_ == 0 ? 1 : count_)) * abs_sum_ +
           2.0 * eps * std::abs(value());
  }

 private:
  static void add_component(double& sum, double& comp, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double re_ = 0.0;
  double im_ = 0.0;
  double cre_ = 0.0;
  double cim_ = 0.0;
  double abs_sum_ = 0.0;
  std::size_t count_ = 0;
};

/// Pairwise (cascade) sum; the reduction order depends only on the length.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const auto half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace bfp
