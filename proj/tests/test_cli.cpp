// Runs the built bfp binary and inspects exit codes and output.
#include <json.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + BFP_CLI_PATH + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

nlohmann::ordered_json without_envelope(const std::string& text) {
  auto j = nlohmann::ordered_json::parse(text);
  j.erase("envelope");
  return j;
}

}  // namespace

TEST(Cli, GaussCheckExample) {
  const auto r = run("gauss-check --p 13");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"meta", "results", "assertions", "envelope"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_LE(j["results"][0]["max_abs_diff"].get<double>(), 1e-10);
  for (const auto& a : j["assertions"]) EXPECT_TRUE(a["pass"].get<bool>());
}

TEST(Cli, RothCountExample) {
  const auto r = run("roth-count --p 7 --set full");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["results"][0]["count"].get<std::uint64_t>(), 42U);
}

TEST(Cli, KernelScanCsvHasOneRowPerStratum) {
  const auto r = run("kernel-scan --which k1 --p 11 --format csv");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 5);  // header + 4 strata
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("gauss-check --p 9").code, 2);
  EXPECT_EQ(run("gauss-check --p 1013").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("gauss-check --format xml").code, 2);
  EXPECT_EQ(run("roth-count --p 7 --set full --densities 0.5").code, 2);
  EXPECT_EQ(run("scaling-fit --primes 11 13 17").code, 2);
  EXPECT_EQ(run("selftest --criteria 14").code, 2);
}

TEST(Cli, FailedAssertionExitsOne) {
  // A threshold below the typical normalized K2 size flags many points per pair.
  EXPECT_EQ(run("kernel-scan --which k2 --p 13 --tau 0.5 --pairs 5").code, 1);
}

TEST(Cli, SameArgvSameBytesOutsideEnvelope) {
  const std::string args = "charsum-scan --p 101 --samples 3000 --seed 7";
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(without_envelope(a.out).dump(), without_envelope(b.out).dump());
  // Thread count does not change results.
  const auto c = run(args + " --threads 3"), d = run(args, "BFP_THREADS=2");
  EXPECT_EQ(without_envelope(a.out)["results"].dump(), without_envelope(c.out)["results"].dump());
  EXPECT_EQ(without_envelope(a.out)["results"].dump(), without_envelope(d.out)["results"].dump());
}

TEST(Cli, OutputFile) {
  const std::string path = testing::TempDir() + "bfp_cli_out.json";
  ASSERT_EQ(run("identity-check --p 7 --trials 3 --output " + path).code, 0);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_TRUE(nlohmann::json::parse(ss.str()).contains("assertions"));
}
