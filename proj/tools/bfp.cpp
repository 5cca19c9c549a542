// bfp: command-line driver for the verification campaigns.
//
//   bfp gauss-check --p 13
//   bfp kernel-scan --which k1 --p 11 --format csv
//   bfp roth-count --p 7 --set full
//   bfp selftest --seed 42
//
// Exit codes: 0 all assertions pass, 1 an assertion failed, 2 usage error.

#include <bfp/fp_core.hpp>
#include <bfp/gauss.hpp>
#include <bfp/io.hpp>
#include <bfp/kernels.hpp>
#include <bfp/operator.hpp>
#include <bfp/parallel.hpp>
#include <bfp/roth.hpp>
#include <bfp/selftest.hpp>
#include <bfp/verify.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using bfp::io::json;

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::optional<std::uint64_t> p;
  std::vector<std::uint64_t> primes;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string format = "json";
  std::string output;
  // kernel-scan
  std::string which = "k1";
  double tau = 2.0;
  std::uint64_t pairs = 200;
  std::uint64_t samples = 0;  // 0: per-subcommand default
  // identity-check
  unsigned trials = 50;
  // operator-norm / scaling-fit
  unsigned restarts = 32;
  unsigned max_iters = 200;
  double tol = 1e-10;
  bool witnesses = false;
  // roth-count
  std::string set = "full";
  double density = 0.3;
  std::vector<double> densities;
  unsigned sweep_trials = 20;
  // selftest
  std::vector<int> criteria;
};

bfp::FieldPtr field_from(const Options& o, std::uint64_t fallback, std::uint64_t cap = 0) {
  const std::uint64_t p = o.p.value_or(fallback);
  if (p < 3) throw UsageError("--p: must be a prime >= 3, got " + std::to_string(p));
  if (!bfp::is_prime(p)) throw UsageError("--p: " + std::to_string(p) + " is not prime");
  if (cap && p > cap) throw UsageError("--p: " + std::to_string(p) + " exceeds this subcommand's cap " + std::to_string(cap));
  return bfp::make_field(p);
}

void emit(const Options& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.output);
  if (!f) throw UsageError("--output: cannot open " + o.output);
  f << text;
}

int finish_json(const Options& o, const bfp::io::Document& doc) {
  emit(o, doc.to_json().dump(2) + "\n");
  return doc.all_pass() ? 0 : kExitFail;
}

int finish_csv_reports(const Options& o, const bfp::io::Document& doc, const std::vector<bfp::ScanReport>& reports) {
  std::ostringstream os;
  bfp::io::write_csv(os, reports);
  emit(o, os.str());
  return doc.all_pass() ? 0 : kExitFail;
}

int finish_csv_kv(const Options& o, const bfp::io::Document& doc, const std::vector<std::pair<std::string, double>>& rows) {
  std::ostringstream os;
  bfp::io::write_csv_kv(os, rows);
  emit(o, os.str());
  return doc.all_pass() ? 0 : kExitFail;
}

int gauss_check(const Options& o) {
  const auto field = field_from(o, 13, 1009);
  const auto& ctx = *field;
  const std::uint64_t p = ctx.p();
  double diff = 0.0, mod_dev = 0.0, max_err = 0.0;
  const double target = 1.0 / std::sqrt(static_cast<double>(p));
  for (std::uint64_t a = 0; a < p; ++a) {
    for (std::uint64_t b = 0; b < p; ++b) {
      const auto closed = bfp::K_closed(ctx, bfp::FpElement(a), bfp::FpElement(b));
      const auto brute = bfp::K_brute(ctx, bfp::FpElement(a), bfp::FpElement(b));
      diff = std::max(diff, std::abs(closed.value - brute.value));
      max_err = std::max(max_err, brute.abs_error);
      if (a != 0) mod_dev = std::max({mod_dev, std::abs(closed.modulus() - target), std::abs(brute.modulus() - target)});
    }
  }
  const auto sigma = bfp::sigma_p(ctx).value;
  bfp::io::Document doc(p, o.seed, {{"subcommand", "gauss-check"}});
  doc.results.push_back({{"max_abs_diff", diff},
                         {"modulus_max_dev", mod_dev},
                         {"brute_abs_error_max", max_err},
                         {"sigma_p", bfp::io::to_json(sigma)}});
  doc.assertions = {bfp::check_le("max_abs_diff", diff, 1e-10), bfp::check_le("modulus_max_dev", mod_dev, 1e-10),
                    bfp::check_le("sigma_modulus_dev", std::abs(std::abs(sigma) - 1.0), 1e-12),
                    bfp::check_le("sigma_fourth_power_dev", std::abs(std::pow(sigma, 4) - 1.0), 1e-9)};
  if (o.format == "csv") {
    return finish_csv_kv(o, doc, {{"max_abs_diff", diff}, {"modulus_max_dev", mod_dev}, {"sigma_re", sigma.real()},
                                  {"sigma_im", sigma.imag()}});
  }
  return finish_json(o, doc);
}

int kernel_scan(const Options& o) {
  bfp::ScanReport r;
  json config{{"subcommand", "kernel-scan"}, {"which", o.which}};
  std::uint64_t p = 0;
  if (o.which == "k1") {
    const auto field = field_from(o, 31);
    bfp::K1ScanConfig c;
    c.seed = o.seed;
    c.threads = o.threads;
    if (o.samples) c.samples = o.samples;
    config["samples"] = c.samples;
    r = bfp::scan_K1(*field, c);
    p = field->p();
  } else {
    const auto field = field_from(o, 31, 251);
    bfp::K2ScanConfig c;
    c.seed = o.seed;
    c.threads = o.threads;
    c.tau = o.tau;
    c.pair_samples = o.pairs;
    config["tau"] = c.tau;
    config["pairs"] = c.pair_samples;
    r = bfp::scan_K2(*field, c);
    p = field->p();
  }
  bfp::io::Document doc(p, o.seed, config);
  doc.add_report(r);
  return o.format == "csv" ? finish_csv_reports(o, doc, {r}) : finish_json(o, doc);
}

int identity_check(const Options& o) {
  const auto field = field_from(o, 7, 31);
  const auto p = field->p();
  auto prefixed = [](std::vector<bfp::Assertion> as, const std::string& prefix) {
    for (auto& a : as) a.name = prefix + a.name;
    return as;
  };
  bfp::io::Document doc(p, o.seed, {{"subcommand", "identity-check"}, {"trials", o.trials}});
  const auto dec = prefixed(bfp::selftest::decomposition_checks(field, o.trials, o.seed), "decomposition.");
  const auto chain = prefixed(bfp::selftest::chain_checks(field, o.trials, o.seed, o.threads), "chain.");
  doc.assertions.insert(doc.assertions.end(), dec.begin(), dec.end());
  doc.assertions.insert(doc.assertions.end(), chain.begin(), chain.end());
  // The collapse identities enumerate K2 by brute force on the full grid: O(p^6).
  if (p <= 13) {
    const auto col = prefixed(bfp::selftest::collapse_checks(*field), "collapse.");
    doc.assertions.insert(doc.assertions.end(), col.begin(), col.end());
  }
  std::vector<std::pair<std::string, double>> rows;
  for (const auto& a : doc.assertions) rows.emplace_back(a.name, a.observed);
  doc.results.push_back({{"checks", doc.assertions.size()}, {"collapse_checked", p <= 13}});
  return o.format == "csv" ? finish_csv_kv(o, doc, rows) : finish_json(o, doc);
}

bfp::NormEstimateConfig norm_config(const Options& o) {
  bfp::NormEstimateConfig c;
  c.restarts = o.restarts;
  c.max_iters = o.max_iters;
  c.tol = o.tol;
  c.seed = o.seed;
  c.threads = o.threads;
  return c;
}

json norm_config_json(const bfp::NormEstimateConfig& c) {
  return {{"restarts", c.restarts}, {"max_iters", c.max_iters}, {"tol", c.tol}};
}

int operator_norm(const Options& o) {
  const auto field = field_from(o, 31, 1009);
  const auto cfg = norm_config(o);
  const auto e = bfp::estimate_norm(field, cfg);
  const bfp::GaussKernelTable K(*field);
  const double recheck = std::abs(bfp::operator_ratio(K, e.witness_f1, e.witness_f2) - e.value);
  double drops = 0.0;
  for (std::size_t i = 1; i < e.running_max.size(); ++i) drops = std::max(drops, e.running_max[i - 1] - e.running_max[i]);

  auto config = norm_config_json(cfg);
  config["subcommand"] = "operator-norm";
  bfp::io::Document doc(field->p(), o.seed, config);
  doc.results.push_back(bfp::io::to_json(e, o.witnesses));
  doc.assertions = {bfp::check_le("witness_recheck_diff", recheck, 1e-9),
                    bfp::check_le("running_max_decrease", drops, 0.0)};
  if (o.format == "csv") {
    std::vector<std::pair<std::string, double>> rows;
    for (std::size_t i = 0; i < e.running_max.size(); ++i) rows.emplace_back("start_" + std::to_string(i), e.running_max[i]);
    return finish_csv_kv(o, doc, rows);
  }
  return finish_json(o, doc);
}

int scaling_fit(const Options& o) {
  std::vector<std::uint64_t> primes = o.primes.empty() ? std::vector<std::uint64_t>{11, 31, 101, 211, 499} : o.primes;
  for (auto p : primes) {
    if (p < 3 || !bfp::is_prime(p)) throw UsageError("--primes: " + std::to_string(p) + " is not an odd prime");
    if (p > 1009) throw UsageError("--primes: " + std::to_string(p) + " exceeds the dense-matrix cap 1009");
  }
  if (primes.size() < 4) throw UsageError("--primes: need at least 4 primes");
  const auto cfg = norm_config(o);
  const auto fit = bfp::scaling_fit(primes, cfg);
  auto config = norm_config_json(cfg);
  config["subcommand"] = "scaling-fit";
  config["primes"] = primes;
  bfp::io::Document doc(primes.back(), o.seed, config);
  doc.add_report(fit.report);
  json est = json::array();
  for (const auto& e : fit.estimates) est.push_back(bfp::io::to_json(e, o.witnesses));
  doc.results.push_back({{"estimates", est}});
  return o.format == "csv" ? finish_csv_reports(o, doc, {fit.report}) : finish_json(o, doc);
}

int roth_count(const Options& o) {
  const auto field = field_from(o, 101);
  const auto& ctx = *field;
  const std::uint64_t p = ctx.p();
  static const std::map<std::string, bfp::SetKind> kinds{
      {"random", bfp::SetKind::random}, {"interval", bfp::SetKind::interval}, {"qr", bfp::SetKind::quadratic_residues}};
  if (!o.densities.empty()) {
    if (o.set == "full") throw UsageError("--densities: needs --set random|interval|qr");
    for (double d : o.densities)
      if (!(d > 0.0 && d <= 1.0)) throw UsageError("--densities: each density must lie in (0, 1]");
    const auto r = bfp::density_sweep(ctx, kinds.at(o.set), o.densities, o.sweep_trials, o.seed, o.threads);
    bfp::io::Document doc(p, o.seed, {{"subcommand", "roth-count"}, {"set", o.set}, {"trials", o.sweep_trials}});
    doc.add_report(r);
    return o.format == "csv" ? finish_csv_reports(o, doc, {r}) : finish_json(o, doc);
  }
  if (!(o.density > 0.0 && o.density <= 1.0)) throw UsageError("--density: must lie in (0, 1]");
  const auto set = o.set == "full" ? bfp::SetIndicator::full(p) : bfp::sample_set(ctx, kinds.at(o.set), o.density, o.seed);
  const auto c = bfp::count_progressions(ctx, set);
  const double total = static_cast<double>(p) * static_cast<double>(p - 1);
  json config{{"subcommand", "roth-count"}, {"set", o.set}};
  if (o.set != "full") config["density"] = o.density;
  bfp::io::Document doc(p, o.seed, config);
  doc.results.push_back({{"set", o.set},
                         {"cardinality", set.cardinality()},
                         {"density", set.density()},
                         {"count", c.count},
                         {"heuristic", c.heuristic},
                         {"ratio", c.heuristic > 0 ? static_cast<double>(c.count) / c.heuristic : 0.0}});
  doc.assertions.push_back(bfp::check_le("count_le_p(p-1)", static_cast<double>(c.count), total));
  if (o.set == "full") {
    doc.assertions.push_back(bfp::check_le("full_count_minus_p(p-1)", std::abs(static_cast<double>(c.count) - total), 0.0));
  }
  if (o.format == "csv") {
    return finish_csv_kv(o, doc, {{"cardinality", static_cast<double>(set.cardinality())},
                                  {"count", static_cast<double>(c.count)},
                                  {"heuristic", c.heuristic}});
  }
  return finish_json(o, doc);
}

int charsum_scan(const Options& o) {
  const auto field = field_from(o, 101);
  bfp::CharSumScanConfig c;
  c.seed = o.seed;
  c.threads = o.threads;
  if (o.samples) c.samples = o.samples;
  const auto r = bfp::scan_char_sum(*field, c);
  bfp::io::Document doc(field->p(), o.seed, {{"subcommand", "charsum-scan"}, {"samples", c.samples}});
  doc.add_report(r);
  return o.format == "csv" ? finish_csv_reports(o, doc, {r}) : finish_json(o, doc);
}

int selftest(const Options& o) {
  std::vector<int> ids = o.criteria;
  if (ids.empty())
    for (int i = 1; i <= bfp::selftest::kInProcessCriteria; ++i) ids.push_back(i);
  for (int id : ids)
    if (id < 1 || id > bfp::selftest::kInProcessCriteria)
      throw UsageError("--criteria: " + std::to_string(id) + " is not in 1.." +
                       std::to_string(bfp::selftest::kInProcessCriteria));
  const bfp::selftest::Config cfg{o.seed, o.threads};
  bfp::io::Document doc(0, o.seed, {{"subcommand", "selftest"}, {"criteria", ids}});
  json timing = json::array();
  bool timing_ok = true;
  double total = 0.0;
  for (int id : ids) {
    const auto r = bfp::selftest::run_criterion(id, cfg);
    std::cerr << (r.pass() ? "PASS" : "FAIL") << " criterion " << id << ": " << r.title << '\n';
    doc.results.push_back(bfp::io::to_json(r));
    for (auto a : r.assertions) {
      a.name = "c" + std::to_string(id) + "." + a.name;
      doc.assertions.push_back(std::move(a));
    }
    for (const auto& t : r.timing) {
      timing_ok = timing_ok && t.pass;
      auto j = bfp::io::to_json(t);
      j["name"] = "c" + std::to_string(id) + "." + t.name;
      timing.push_back(j);
    }
    doc.envelope["wall_time"]["c" + std::to_string(id)] = r.wall_time;
    total += r.wall_time;
  }
  const auto budget = bfp::check_le("suite_runtime_seconds", total, 900.0);
  timing_ok = timing_ok && budget.pass;
  timing.push_back(bfp::io::to_json(budget));
  doc.envelope["timing"] = timing;
  std::vector<std::pair<std::string, double>> rows;
  for (const auto& a : doc.assertions) rows.emplace_back(a.name, a.observed);
  const int code = o.format == "csv" ? finish_csv_kv(o, doc, rows) : finish_json(o, doc);
  return code == 0 && !timing_ok ? kExitFail : code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-field bilinear estimate verification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--p", o.p, "Prime modulus");
  app.add_option("--primes", o.primes, "Prime list (scaling-fit)");
  app.add_option("--seed", o.seed, "Seed for all randomness");
  app.add_option("--threads", o.threads, std::string("Worker threads; 0 = ") + bfp::kThreadsEnv + " or auto");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output", o.output, "Output file (default stdout)");

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Sub subs[] = {
      {"gauss-check", "Closed-form vs brute-force Gauss-sum kernel on the full grid", gauss_check},
      {"kernel-scan", "Normalized sup scan of K1 or K2", kernel_scan},
      {"identity-check", "Norm decomposition, Cauchy-Schwarz chain and collapse identities", identity_check},
      {"operator-norm", "Lower-bound estimate of the operator norm with witnesses", operator_norm},
      {"scaling-fit", "Log-log fit of norm estimates over primes", scaling_fit},
      {"roth-count", "Count progressions x, x+y, x+y^2 in a set", roth_count},
      {"charsum-scan", "Sup of p^{-1/2}|S| over sampled (y1,y2,y3)", charsum_scan},
      {"selftest", "Run the acceptance suite", selftest},
  };
  std::map<CLI::App*, const Sub*> dispatch;
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    dispatch[sc] = &s;
    const std::string name = s.name;
    if (name == "kernel-scan") {
      sc->add_option("--which", o.which, "Kernel")->check(CLI::IsMember({"k1", "k2"}));
      sc->add_option("--tau", o.tau, "Exceptional threshold on p^{5/2}|K2|")->check(CLI::PositiveNumber);
      sc->add_option("--pairs", o.pairs, "Sampled (u1,u2) pairs")->check(CLI::PositiveNumber);
      sc->add_option("--samples", o.samples, "Random K1 samples above the full-grid cap");
    } else if (name == "identity-check") {
      sc->add_option("--trials", o.trials, "Random (f1,f2) pairs")->check(CLI::PositiveNumber);
    } else if (name == "operator-norm" || name == "scaling-fit") {
      sc->add_option("--restarts", o.restarts, "Random restarts");
      sc->add_option("--max-iters", o.max_iters, "Alternating iterations per start")->check(CLI::PositiveNumber);
      sc->add_option("--tol", o.tol, "Relative improvement that stops a start")->check(CLI::PositiveNumber);
      sc->add_flag("--witnesses", o.witnesses, "Include witness functions in the JSON");
    } else if (name == "roth-count") {
      sc->add_option("--set", o.set, "Set kind")->check(CLI::IsMember({"full", "random", "interval", "qr"}));
      sc->add_option("--density", o.density, "Density of the sampled set");
      sc->add_option("--densities", o.densities, "Density sweep (with --trials)");
      sc->add_option("--trials", o.sweep_trials, "Trials per density")->check(CLI::PositiveNumber);
    } else if (name == "charsum-scan") {
      sc->add_option("--samples", o.samples, "Sampled (y1,y2,y3)");
    } else if (name == "selftest") {
      sc->add_option("--criteria", o.criteria, "Subset of criteria to run");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  o.threads = bfp::resolve_threads(o.threads);

  try {
    for (const auto& [sc, s] : dispatch)
      if (sc->parsed()) return s->run(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const bfp::Error& e) {
    std::cerr << "error (" << bfp::to_string(e.kind()) << "): " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
