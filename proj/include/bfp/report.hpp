#pragma once

#include <bfp/fp_core.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bfp {

/// One checked inequality or identity: pass iff observed <= bound.
struct Assertion {
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double bound = 0.0;
};

inline Assertion check_le(std::string name, double observed, double bound) {
  return {std::move(name), observed <= bound, observed, bound};
}

/// A grid point whose normalized value is reported individually.
struct ExceptionalPoint {
  std::vector<std::uint64_t> coords;
  complex value{};
  double normalized = 0.0;
  double abs_error = 0.0;
  std::string tag;
};

/// Least-squares fit log(y) = intercept + slope * log(x).
struct ConstantFit {
  double constant = 0.0;  // exp(intercept)
  double exponent = 0.0;  // slope
  double residual = 0.0;  // RMS of log residuals
};

/// One row of a scan: a named stratum with its size and summary values.
struct Stratum {
  std::string name;
  std::uint64_t points = 0;
  double sup = 0.0;
  std::vector<std::pair<std::string, double>> metrics;
};

struct ScanReport {
  std::string scan_id;
  std::uint64_t p = 0;
  std::string grid;
  double normalized_sup = 0.0;
  std::vector<ExceptionalPoint> exceptional_points;
  std::optional<ConstantFit> constant_fit;
  double wall_time = 0.0;
  std::uint64_t seed = 0;
  std::vector<Stratum> strata;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<Assertion> assertions;

  double metric(const std::string& name) const {
    for (const auto& [k, v] : metrics) {
      if (k == name) return v;
    }
    throw Error(ErrorKind::InvalidArgument, "no metric named " + name + " in " + scan_id);
  }
};

}  // namespace bfp
