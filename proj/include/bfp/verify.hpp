#pragma once

// Verification campaigns over parameter grids: normalized suprema of K1 and
// K2, power-law fits of the operator-norm estimates, and the one-variable
// character sum S(y1, y2, y3).

#include <bfp/fp_core.hpp>
#include <bfp/gauss.hpp>
#include <bfp/kernels.hpp>
#include <bfp/operator.hpp>
#include <bfp/parallel.hpp>
#include <bfp/report.hpp>
#include <bfp/summation.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace bfp {

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct SupTracker {
  std::uint64_t points = 0;
  double sup = 0.0;
  double inf = 0.0;
  std::vector<std::uint64_t> argmax;
  complex value_at_max{};
  double error_at_max = 0.0;

  void observe(double v, std::vector<std::uint64_t> at, complex raw, double err) {
    if (points == 0 || v < inf) inf = v;
    if (points == 0 || v > sup) {
      sup = v;
      argmax = std::move(at);
      value_at_max = raw;
      error_at_max = err;
    }
    ++points;
  }
};

}  // namespace detail

struct K1ScanConfig {
  std::uint64_t full_grid_cap = 31;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Sup of p^{3/2}|K1| where detA != 0, and of p|K1| on the covered degenerate
/// loci (x3 + x2 = 0 or x2 = x1, with x3 != x1). Full grid up to the cap;
/// above it, stratified samples that deliberately hit the degenerate lines.
inline ScanReport scan_K1(const FieldContext& ctx, const K1ScanConfig& cfg = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t p = ctx.p();
  const double pd = static_cast<double>(p);
  const bool full = p <= cfg.full_grid_cap;

  std::vector<K1Point> points;
  if (full) {
    points.reserve(p * p * p);
    for (std::uint64_t a = 0; a < p; ++a)
      for (std::uint64_t b = 0; b < p; ++b)
        for (std::uint64_t c = 0; c < p; ++c) points.push_back({FpElement(a), FpElement(b), FpElement(c)});
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::uint64_t> u(0, p - 1);
    points.reserve(cfg.samples);
    for (std::uint64_t i = 0; i < cfg.samples; ++i) {
      const FpElement a(u(rng)), b(u(rng)), c(u(rng));
      switch (i % 5) {
        case 3: points.push_back({a, b, ctx.neg(b)}); break;  // x3 + x2 = 0
        case 4: points.push_back({a, a, c}); break;           // x2 = x1
        default: points.push_back({a, b, c}); break;
      }
    }
  }

  std::vector<KernelValue> values(points.size());
  parallel_for(points.size(), cfg.threads, [&](std::size_t i) { values[i] = K1_reduced(ctx, points[i]); });

  detail::SupTracker nondeg, deg_sum, deg_eq, excluded;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& x = points[i];
    const auto& v = values[i];
    std::vector<std::uint64_t> at{x.x1.value, x.x2.value, x.x3.value};
    if (!detA(ctx, x).is_zero()) {
      nondeg.observe(std::pow(pd, 1.5) * v.modulus(), at, v.value, v.abs_error * std::pow(pd, 1.5));
    } else if (x.x3 == x.x1) {
      excluded.observe(pd * v.modulus(), at, v.value, v.abs_error * pd);
    } else if (ctx.add(x.x3, x.x2).is_zero()) {
      deg_sum.observe(pd * v.modulus(), at, v.value, v.abs_error * pd);
    } else {
      deg_eq.observe(pd * v.modulus(), at, v.value, v.abs_error * pd);
    }
  }

  ScanReport r;
  r.scan_id = "kernel_scan_k1";
  r.p = p;
  r.seed = cfg.seed;
  r.grid = full ? "full grid F_p^3" : "stratified samples: 3/5 uniform, 1/5 on x3=-x2, 1/5 on x2=x1";
  r.normalized_sup = nondeg.sup;
  // exponent e: the stratum reports p^e |K1|
  auto stratum = [&](const char* name, const detail::SupTracker& t, double exponent) {
    Stratum s{name, t.points, t.sup, {{"inf", t.inf}, {"normalization_exponent", exponent}}};
    r.strata.push_back(std::move(s));
    if (t.points > 0) r.exceptional_points.push_back({t.argmax, t.value_at_max, t.sup, t.error_at_max, name});
  };
  stratum("nondegenerate", nondeg, 1.5);
  stratum("x3+x2=0", deg_sum, 1.0);
  stratum("x2=x1", deg_eq, 1.0);
  stratum("x3=x1", excluded, 1.0);
  r.metrics = {{"nondegenerate_sup", nondeg.sup},
               {"nondegenerate_inf", nondeg.inf},
               {"degenerate_sup", std::max(deg_sum.sup, deg_eq.sup)},
               {"points", static_cast<double>(points.size())}};
  r.assertions.push_back(check_le("k1_nondegenerate_exact_modulus",
                                  std::max(std::abs(nondeg.sup - 1.0), std::abs(nondeg.inf - 1.0)), 1e-6));
  r.assertions.push_back(check_le("k1_degenerate_le_inverse_p", std::max(deg_sum.sup, deg_eq.sup), 1.0 + 1e-9 * pd));
  r.wall_time = detail::seconds_since(t0);
  return r;
}

struct K2ScanConfig {
  std::uint64_t pair_samples = 200;
  double tau = 2.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t max_recorded_points = 256;
};

/// For each sampled (u1, u2) with u1 != u2: p^{5/2}|K2| over all u3 != 0,
/// the exceptional count at tau, the off-exceptional sup, and agreement with
/// the algebraic candidate set.
inline ScanReport scan_K2(const FieldContext& ctx, const K2ScanConfig& cfg = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t p = ctx.p();
  const K1Table table(ctx, cfg.threads);

  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
  if (p * (p - 1) <= cfg.pair_samples) {
    for (std::uint64_t a = 0; a < p; ++a)
      for (std::uint64_t b = 0; b < p; ++b)
        if (a != b) pairs.emplace_back(a, b);
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::uint64_t> u(0, p - 1);
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    while (pairs.size() < cfg.pair_samples) {
      const auto a = u(rng), b = u(rng);
      if (a == b || !seen.emplace(a, b).second) continue;
      pairs.emplace_back(a, b);
    }
  }

  struct PairResult {
    std::vector<double> profile;
  };
  std::vector<PairResult> results(pairs.size());
  parallel_for(pairs.size(), cfg.threads, [&](std::size_t i) {
    results[i].profile = normalized_K2_profile(ctx, FpElement(pairs[i].first), FpElement(pairs[i].second), &table);
  });

  ScanReport r;
  r.scan_id = "kernel_scan_k2";
  r.p = p;
  r.seed = cfg.seed;
  r.grid = std::to_string(pairs.size()) + " (u1,u2) pairs x all u3 != 0, tau=" + std::to_string(cfg.tau);

  std::map<std::size_t, std::uint64_t> count_histogram;
  std::size_t max_count = 0;
  double total_count = 0.0;
  double off_sup = 0.0;
  double overall_sup = 0.0;
  double tau_for_three = 0.0;
  std::uint64_t empirical_only = 0, algebraic_only = 0, antidiagonal_flagged = 0, antidiagonal_total = 0;
  std::uint64_t exceptional_total = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const FpElement u1(pairs[i].first), u2(pairs[i].second);
    const auto& prof = results[i].profile;
    std::size_t count = 0;
    std::vector<double> sorted;
    for (std::uint64_t w = 1; w < p; ++w) {
      const double v = prof[w];
      sorted.push_back(v);
      overall_sup = std::max(overall_sup, v);
      const FpElement u3(w);
      const unsigned cond = algebraic_conditions(ctx, u1, u2, u3);
      const bool flagged = v > cfg.tau;
      if (cond & kSumVanishes) {
        ++antidiagonal_total;
        if (flagged) ++antidiagonal_flagged;
      }
      if (flagged) {
        ++count;
        ++exceptional_total;
        if (cond == 0) ++empirical_only;
        if (r.exceptional_points.size() < cfg.max_recorded_points) {
          const auto kv = K2_via_H2(ctx, {u1, u2, u3}, &table);
          const double scale = std::pow(static_cast<double>(p), 2.5);
          r.exceptional_points.push_back(
              {{u1.value, u2.value, w}, kv.value, v, kv.abs_error * scale, cond ? "algebraic" : "empirical_only"});
        }
      } else {
        off_sup = std::max(off_sup, v);
        if (cond != 0) ++algebraic_only;
      }
    }
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted.size() > 3) tau_for_three = std::max(tau_for_three, sorted[3]);
    max_count = std::max(max_count, count);
    total_count += static_cast<double>(count);
    ++count_histogram[count];
  }
  for (const auto& [count, n] : count_histogram) {
    r.strata.push_back({"exceptional_count=" + std::to_string(count), n, static_cast<double>(count), {}});
  }
  r.normalized_sup = off_sup;
  r.metrics = {{"pairs", static_cast<double>(pairs.size())},
               {"tau", cfg.tau},
               {"max_exceptional_count", static_cast<double>(max_count)},
               {"mean_exceptional_count", pairs.empty() ? 0.0 : total_count / pairs.size()},
               {"exceptional_total", static_cast<double>(exceptional_total)},
               {"off_exceptional_sup", off_sup},
               {"overall_sup", overall_sup},
               {"tau_needed_for_count_le_3", tau_for_three},
               {"empirical_only", static_cast<double>(empirical_only)},
               {"algebraic_only", static_cast<double>(algebraic_only)},
               {"antidiagonal_flagged", static_cast<double>(antidiagonal_flagged)},
               {"antidiagonal_total", static_cast<double>(antidiagonal_total)}};
  r.assertions.push_back(check_le("k2_exceptional_count_le_3", static_cast<double>(max_count), 3.0));
  r.wall_time = detail::seconds_since(t0);
  return r;
}

/// Least squares in log-log coordinates.
inline ConstantFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) throw Error(ErrorKind::InvalidArgument, "power-law fit needs >= 2 matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nd = static_cast<double>(n);
  const double slope = (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / nd;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(ys[i]) - (intercept + slope * std::log(xs[i]));
    rss += e * e;
  }
  return {std::exp(intercept), slope, std::sqrt(rss / nd)};
}

struct ScalingFit {
  ScanReport report;
  std::vector<NormEstimate> estimates;
};

/// Reference decay exponents for comparison with the fitted slope.
inline constexpr std::array<std::pair<const char*, double>, 4> kReferenceExponents{{
    {"exponent_-1/10", -0.1},
    {"exponent_-1/8", -0.125},
    {"exponent_-3/16", -0.1875},
    {"exponent_-1/2", -0.5},
}};

inline ScalingFit scaling_fit(const std::vector<std::uint64_t>& primes, const NormEstimateConfig& cfg = {}) {
  if (primes.size() < 4) throw Error(ErrorKind::InvalidArgument, "scaling_fit needs at least 4 primes");
  const auto t0 = std::chrono::steady_clock::now();
  ScalingFit out;
  std::vector<double> xs, ys;
  for (auto p : primes) {
    const auto field = make_field(p);
    auto e = estimate_norm(field, cfg);
    const GaussKernelTable K(*field);
    const double recheck = operator_ratio(K, e.witness_f1, e.witness_f2);
    xs.push_back(static_cast<double>(p));
    ys.push_back(e.value);
    const double pd = static_cast<double>(p);
    out.report.strata.push_back({"p=" + std::to_string(p),
                                 p,
                                 e.value,
                                 {{"p", pd},
                                  {"estimate", e.value},
                                  {"log_p", std::log(pd)},
                                  {"log_estimate", std::log(e.value)},
                                  {"witness_recheck_diff", std::abs(recheck - e.value)},
                                  {"converged", e.converged ? 1.0 : 0.0},
                                  {"estimate_times_sqrt_p", e.value * std::sqrt(pd)}}});
    out.estimates.push_back(std::move(e));
  }
  const auto fit = fit_power_law(xs, ys);
  auto& r = out.report;
  r.scan_id = "scaling_fit";
  r.p = primes.back();
  r.seed = cfg.seed;
  r.grid = std::to_string(primes.size()) + " primes, restarts=" + std::to_string(cfg.restarts) +
           ", max_iters=" + std::to_string(cfg.max_iters);
  r.constant_fit = fit;
  r.normalized_sup = *std::max_element(ys.begin(), ys.end());
  r.metrics = {{"slope", fit.exponent}, {"intercept", std::log(fit.constant)}, {"constant", fit.constant},
               {"residual", fit.residual}};
  for (const auto& [name, e] : kReferenceExponents) {
    r.metrics.emplace_back(name, e);
    // Constant C_e that makes C_e p^e pass through the geometric mean of the data.
    double s = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += std::log(ys[i]) - e * std::log(xs[i]);
    r.metrics.emplace_back(std::string("constant_at_") + name, std::exp(s / static_cast<double>(xs.size())));
  }
  r.assertions.push_back(check_le("scaling_slope_le_-1/10_plus_0.05", fit.exponent, -0.1 + 0.05));
  r.wall_time = detail::seconds_since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// One-variable character sum
//   S(y1,y2,y3) = sum_{y4} ((h1 h2)/p) e_p(y3 (h2 - h1) / 4),
//   h1 = (y1 - 2 y4)/y4 + 1,  h2 = (y1 - 2 y4)/(y2 - y1 + y4) + 1,
// over y4 != 0, y1 - y2 (where h1 or h2 is undefined).

/// Lines where S has no cancellation.
enum class CharSumClass {
  generic,
  y2_y3_zero,       // y2 = y3 = 0: h1 h2 = 1 and the phase vanishes
  y1_eq_y2_y3_zero, // y1 = y2, y3 = 0
  y1_eq_y2,         // y1 = y2, y3 != 0: h1 = h2, so the phase vanishes for every y3
};

inline const char* to_string(CharSumClass c) {
  switch (c) {
    case CharSumClass::generic: return "generic";
    case CharSumClass::y2_y3_zero: return "y2=y3=0";
    case CharSumClass::y1_eq_y2_y3_zero: return "y1=y2,y3=0";
    case CharSumClass::y1_eq_y2: return "y1=y2,y3!=0";
  }
  return "unknown";
}

inline CharSumClass classify_char_sum(FpElement y1, FpElement y2, FpElement y3) {
  if (y2.is_zero() && y3.is_zero()) return CharSumClass::y2_y3_zero;
  if (y1 == y2 && y3.is_zero()) return CharSumClass::y1_eq_y2_y3_zero;
  if (y1 == y2) return CharSumClass::y1_eq_y2;
  return CharSumClass::generic;
}

inline KernelValue char_sum_S(const FieldContext& ctx, FpElement y1, FpElement y2, FpElement y3) {
  const FpElement one(1);
  const FpElement two(2 % ctx.p());
  const FpElement skip = ctx.sub(y1, y2);
  const FpElement phase_scale = ctx.mul(ctx.quarter(), y3);
  CompensatedSum acc;
  for (std::uint64_t w = 1; w < ctx.p(); ++w) {
    const FpElement y4(w);
    if (y4 == skip) continue;
    const FpElement num = ctx.sub(y1, ctx.mul(two, y4));
    const FpElement h1 = ctx.add(ctx.mul(ctx.inv(y4), num), one);
    const FpElement h2 = ctx.add(ctx.mul(ctx.inv(ctx.add(ctx.sub(y2, y1), y4)), num), one);
    const int chi = ctx.legendre(ctx.mul(h1, h2));
    if (chi == 0) continue;
    acc += static_cast<double>(chi) * ctx.ep(ctx.mul(phase_scale, ctx.sub(h2, h1)));
  }
  return {acc.value(), acc.error_estimate()};
}

struct CharSumScanConfig {
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Sup of p^{-1/2}|S| over generic triples; each degenerate class is swept
/// separately. Samples: 9/10 uniform, 1/10 spread over the degenerate lines.
inline ScanReport scan_char_sum(const FieldContext& ctx, const CharSumScanConfig& cfg = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t p = ctx.p();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::uint64_t> u(0, p - 1);
  std::vector<std::array<FpElement, 3>> pts;
  pts.reserve(cfg.samples);
  for (std::uint64_t i = 0; i < cfg.samples; ++i) {
    const FpElement a(u(rng)), b(u(rng)), c(u(rng));
    switch (i % 30) {
      case 0: pts.push_back({a, FpElement(0), FpElement(0)}); break;
      case 1: pts.push_back({a, a, FpElement(0)}); break;
      case 2: pts.push_back({a, a, c}); break;
      default: pts.push_back({a, b, c}); break;
    }
  }
  std::vector<KernelValue> vals(pts.size());
  parallel_for(pts.size(), cfg.threads, [&](std::size_t i) { vals[i] = char_sum_S(ctx, pts[i][0], pts[i][1], pts[i][2]); });

  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  std::map<CharSumClass, detail::SupTracker> by_class;
  for (auto c : {CharSumClass::generic, CharSumClass::y2_y3_zero, CharSumClass::y1_eq_y2_y3_zero, CharSumClass::y1_eq_y2})
    by_class[c];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto cls = classify_char_sum(pts[i][0], pts[i][1], pts[i][2]);
    by_class[cls].observe(scale * vals[i].modulus(), {pts[i][0].value, pts[i][1].value, pts[i][2].value}, vals[i].value,
                          vals[i].abs_error * scale);
  }

  ScanReport r;
  r.scan_id = "charsum_scan";
  r.p = p;
  r.seed = cfg.seed;
  r.grid = std::to_string(cfg.samples) + " samples: 9/10 uniform, 1/10 on degenerate lines";
  for (const auto& [cls, t] : by_class) {
    r.strata.push_back({to_string(cls), t.points, t.sup, {{"inf", t.inf}, {"normalization_exponent", -0.5}}});
    if (t.points > 0) r.exceptional_points.push_back({t.argmax, t.value_at_max, t.sup, t.error_at_max, to_string(cls)});
  }
  const auto& g = by_class[CharSumClass::generic];
  r.normalized_sup = g.sup;
  r.metrics = {{"generic_sup", g.sup},
               {"generic_points", static_cast<double>(g.points)},
               {"degenerate_y2_y3_zero_points", static_cast<double>(by_class[CharSumClass::y2_y3_zero].points)},
               {"degenerate_y1_eq_y2_y3_zero_points", static_cast<double>(by_class[CharSumClass::y1_eq_y2_y3_zero].points)},
               {"degenerate_y1_eq_y2_points", static_cast<double>(by_class[CharSumClass::y1_eq_y2].points)},
               {"degenerate_sup", std::max({by_class[CharSumClass::y2_y3_zero].sup,
                                            by_class[CharSumClass::y1_eq_y2_y3_zero].sup,
                                            by_class[CharSumClass::y1_eq_y2].sup})}};
  r.assertions.push_back(check_le("charsum_generic_sup_le_4", g.sup, 4.0));
  r.wall_time = detail::seconds_since(t0);
  return r;
}

}  // namespace bfp
