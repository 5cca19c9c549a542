#pragma once

// Counting quadratic progressions x, x+y, x+y^2 (y != 0) inside A subset F_p.

#include <bfp/fp_core.hpp>
#include <bfp/parallel.hpp>
#include <bfp/report.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace bfp {

/// A subset of F_p with O(1) membership.
class SetIndicator {
 public:
  SetIndicator(std::uint64_t p, std::vector<std::uint64_t> members) : p_(p), bits_(p, 0) {
    for (auto x : members) {
      if (x >= p) throw Error(ErrorKind::InvalidArgument, "set member " + std::to_string(x) + " outside F_p");
      bits_[x] = 1;
    }
    for (std::uint64_t x = 0; x < p; ++x) {
      if (bits_[x]) members_.push_back(x);
    }
  }

  static SetIndicator full(std::uint64_t p) {
    std::vector<std::uint64_t> all(p);
    std::iota(all.begin(), all.end(), std::uint64_t{0});
    return {p, std::move(all)};
  }

  std::uint64_t p() const noexcept { return p_; }
  bool contains(std::uint64_t x) const { return bits_[x] != 0; }
  const std::vector<std::uint64_t>& members() const noexcept { return members_; }
  std::uint64_t cardinality() const noexcept { return members_.size(); }
  double density() const { return static_cast<double>(members_.size()) / static_cast<double>(p_); }

  SetIndicator translate(std::uint64_t t) const {
    std::vector<std::uint64_t> shifted;
    shifted.reserve(members_.size());
    for (auto x : members_) shifted.push_back((x + t) % p_);
    return {p_, std::move(shifted)};
  }

 private:
  std::uint64_t p_;
  std::vector<std::uint8_t> bits_;
  std::vector<std::uint64_t> members_;
};

struct ProgressionCount {
  std::uint64_t count = 0;  // pairs (x, y), y != 0, with x, x+y, x+y^2 in A
  double heuristic = 0.0;   // density^3 p (p - 1)
};

/// Exact pair count, O(p |A|): y outer, x over the members of A.
inline ProgressionCount count_progressions(const FieldContext& ctx, const SetIndicator& a) {
  const std::uint64_t p = ctx.p();
  if (a.p() != p) throw Error(ErrorKind::InvalidArgument, "set and field disagree on p");
  std::uint64_t count = 0;
  for (std::uint64_t y = 1; y < p; ++y) {
    const std::uint64_t y2 = ctx.sq(FpElement(y)).value;
    for (auto x : a.members()) {
      std::uint64_t b = x + y;
      if (b >= p) b -= p;
      if (!a.contains(b)) continue;
      std::uint64_t c = x + y2;
      if (c >= p) c -= p;
      if (a.contains(c)) ++count;
    }
  }
  const double d = a.density();
  return {count, d * d * d * static_cast<double>(p) * static_cast<double>(p - 1)};
}

enum class SetKind { random, interval, quadratic_residues };

inline const char* to_string(SetKind k) {
  switch (k) {
    case SetKind::random: return "random";
    case SetKind::interval: return "interval";
    case SetKind::quadratic_residues: return "quadratic_residues";
  }
  return "unknown";
}

/// Target cardinality for a density: ceil(density * p), computed with a
/// small tolerance so densities like 3/11 land exactly.
inline std::uint64_t target_cardinality(std::uint64_t p, double density) {
  const double raw = density * static_cast<double>(p);
  auto n = static_cast<std::uint64_t>(std::ceil(raw - 1e-9));
  return std::min<std::uint64_t>(std::max<std::uint64_t>(n, 1), p);
}

inline SetIndicator sample_set(const FieldContext& ctx, SetKind kind, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "density must lie in (0, 1], got " + std::to_string(density));
  }
  const std::uint64_t p = ctx.p();
  const std::uint64_t n = target_cardinality(p, density);
  std::vector<std::uint64_t> members;
  switch (kind) {
    case SetKind::interval: {
      members.resize(n);
      std::iota(members.begin(), members.end(), std::uint64_t{0});
      break;
    }
    case SetKind::quadratic_residues: {
      for (std::uint64_t x = 1; x < p && members.size() < n; ++x) {
        if (ctx.legendre(FpElement(x)) == 1) members.push_back(x);
      }
      // Pad with non-residues (0 first) when the density exceeds 1/2.
      for (std::uint64_t x = 0; x < p && members.size() < n; ++x) {
        if (ctx.legendre(FpElement(x)) != 1) members.push_back(x);
      }
      break;
    }
    case SetKind::random: {
      // Independent Bernoulli(density) draws, then trimmed or padded to n.
      std::mt19937_64 rng(seed);
      std::bernoulli_distribution keep(density);
      std::vector<std::uint64_t> in, out;
      for (std::uint64_t x = 0; x < p; ++x) (keep(rng) ? in : out).push_back(x);
      std::shuffle(in.begin(), in.end(), rng);
      std::shuffle(out.begin(), out.end(), rng);
      while (in.size() > n) in.pop_back();
      while (in.size() < n) {
        in.push_back(out.back());
        out.pop_back();
      }
      members = std::move(in);
      break;
    }
  }
  return {p, std::move(members)};
}

/// For each density: mean/min/max counts over seeded trials, their ratio to
/// density^3 p (p-1), and the fraction of trials with no progression.
inline ScanReport density_sweep(const FieldContext& ctx, SetKind kind, const std::vector<double>& densities,
                                unsigned trials, std::uint64_t seed, unsigned threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  ScanReport report;
  report.scan_id = "roth_density_sweep";
  report.p = ctx.p();
  report.seed = seed;
  report.grid = std::string("kind=") + to_string(kind) + ", trials=" + std::to_string(trials) + ", densities=" +
                std::to_string(densities.size());
  double sup_ratio = 0.0;
  for (std::size_t di = 0; di < densities.size(); ++di) {
    const double density = densities[di];
    std::vector<ProgressionCount> counts(trials);
    std::vector<double> actual_density(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
      const auto set = sample_set(ctx, kind, density, split_seed(seed, di * 1000003ULL + t));
      counts[t] = count_progressions(ctx, set);
      actual_density[t] = set.density();
    });
    double sum = 0.0, lo = 0.0, hi = 0.0;
    unsigned empty = 0;
    for (unsigned t = 0; t < trials; ++t) {
      const auto c = static_cast<double>(counts[t].count);
      sum += c;
      lo = t == 0 ? c : std::min(lo, c);
      hi = t == 0 ? c : std::max(hi, c);
      if (counts[t].count == 0) ++empty;
    }
    const double mean = trials ? sum / trials : 0.0;
    const double heuristic = density * density * density * static_cast<double>(ctx.p()) * static_cast<double>(ctx.p() - 1);
    const double ratio = heuristic > 0.0 ? mean / heuristic : 0.0;
    sup_ratio = std::max(sup_ratio, ratio);
    Stratum s;
    s.name = "density=" + std::to_string(density);
    s.points = trials;
    s.sup = hi;
    s.metrics = {{"density", density},
                 {"realized_density", trials ? actual_density[0] : 0.0},
                 {"mean", mean},
                 {"min", lo},
                 {"max", hi},
                 {"heuristic", heuristic},
                 {"ratio", ratio},
                 {"empty_fraction", trials ? static_cast<double>(empty) / trials : 0.0}};
    report.strata.push_back(std::move(s));
  }
  report.normalized_sup = sup_ratio;
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace bfp
