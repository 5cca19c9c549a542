#pragma once

// JSON and CSV encodings of reports. Everything that varies run to run
// (wall times, timestamps, budget checks) goes in the "envelope" object so the
// rest of the document is a pure function of (arguments, seed).

#include <bfp/operator.hpp>
#include <bfp/report.hpp>
#include <bfp/selftest.hpp>
#include <bfp/spectral.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace bfp::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

inline json to_json(complex z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const Assertion& a) {
  return {{"name", a.name}, {"pass", a.pass}, {"observed", a.observed}, {"bound", a.bound}};
}

inline json to_json(const std::vector<Assertion>& as) {
  json out = json::array();
  for (const auto& a : as) out.push_back(to_json(a));
  return out;
}

inline json metrics_json(const std::vector<std::pair<std::string, double>>& ms) {
  json out = json::object();
  for (const auto& [k, v] : ms) out[k] = v;
  return out;
}

/// ScanReport without wall_time (that goes to the envelope).
inline json to_json(const ScanReport& r) {
  json j{{"scan_id", r.scan_id}, {"p", r.p}, {"grid", r.grid}, {"seed", r.seed}, {"normalized_sup", r.normalized_sup}};
  j["metrics"] = metrics_json(r.metrics);
  if (r.constant_fit) {
    j["constant_fit"] = {{"constant", r.constant_fit->constant},
                         {"exponent", r.constant_fit->exponent},
                         {"residual", r.constant_fit->residual}};
  } else {
    j["constant_fit"] = nullptr;
  }
  json strata = json::array();
  for (const auto& s : r.strata) {
    strata.push_back({{"name", s.name}, {"points", s.points}, {"sup", s.sup}, {"metrics", metrics_json(s.metrics)}});
  }
  j["strata"] = std::move(strata);
  json pts = json::array();
  for (const auto& e : r.exceptional_points) {
    pts.push_back({{"coords", e.coords},
                   {"value", to_json(e.value)},
                   {"normalized", e.normalized},
                   {"abs_error", e.abs_error},
                   {"tag", e.tag}});
  }
  j["exceptional_points"] = std::move(pts);
  return j;
}

inline json to_json(const GridFunction& f) {
  json out = json::array();
  for (auto v : f.values()) out.push_back(to_json(v));
  return out;
}

inline json to_json(const NormEstimate& e, bool witnesses) {
  json j{{"value", e.value}, {"restarts", e.restarts}, {"converged", e.converged}, {"running_max", e.running_max}};
  if (witnesses) {
    j["witness_f1"] = to_json(e.witness_f1);
    j["witness_f2"] = to_json(e.witness_f2);
  }
  return j;
}

inline json to_json(const selftest::CriterionResult& c) {
  return {{"id", c.id},
          {"title", c.title},
          {"pass", c.pass()},
          {"assertions", to_json(c.assertions)},
          {"metrics", metrics_json(c.metrics)}};
}

/// Top-level document builder.
struct Document {
  json meta = json::object();
  json results = json::array();
  std::vector<Assertion> assertions;
  json envelope = json::object();

  Document(std::uint64_t p, std::uint64_t seed, json config) {
    meta = {{"version", kVersion}, {"p", p}, {"seed", seed}, {"config", std::move(config)}};
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    envelope["timestamp"] = buf;
    envelope["wall_time"] = json::object();
  }

  void add_report(const ScanReport& r) {
    results.push_back(io::to_json(r));
    assertions.insert(assertions.end(), r.assertions.begin(), r.assertions.end());
    envelope["wall_time"][r.scan_id] = r.wall_time;
  }

  bool all_pass() const {
    for (const auto& a : assertions)
      if (!a.pass) return false;
    return true;
  }

  json to_json() const {
    return {{"meta", meta}, {"results", results}, {"assertions", io::to_json(assertions)}, {"envelope", envelope}};
  }
};

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// One row per stratum: scan_id, p, stratum, points, sup, then the union of
/// stratum metric names in order of first appearance.
inline void write_csv(std::ostream& os, const std::vector<ScanReport>& reports) {
  std::vector<std::string> cols;
  for (const auto& r : reports)
    for (const auto& s : r.strata)
      for (const auto& [k, v] : s.metrics)
        if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
  os << "scan_id,p,stratum,points,sup";
  for (const auto& c : cols) os << ',' << csv_escape(c);
  os << '\n';
  for (const auto& r : reports) {
    for (const auto& s : r.strata) {
      os << csv_escape(r.scan_id) << ',' << r.p << ',' << csv_escape(s.name) << ',' << s.points << ','
         << csv_number(s.sup);
      for (const auto& c : cols) {
        os << ',';
        for (const auto& [k, v] : s.metrics)
          if (k == c) {
            os << csv_number(v);
            break;
          }
      }
      os << '\n';
    }
  }
}

/// Flat name,value rows for results that are not strata-shaped.
inline void write_csv_kv(std::ostream& os, const std::vector<std::pair<std::string, double>>& rows) {
  os << "name,value\n";
  for (const auto& [k, v] : rows) os << csv_escape(k) << ',' << csv_number(v) << '\n';
}

}  // namespace bfp::io
