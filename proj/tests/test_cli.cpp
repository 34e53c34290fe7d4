#include <json.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

using json = nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI with stderr captured to a temporary file.
CliRun run_cli(const std::string& args) {
  char errname[] = "/tmp/mckay_cli_errXXXXXX";
  const int fd = mkstemp(errname);
  if (fd >= 0) close(fd);
  const std::string cmd = std::string(MCKAY_CLI_PATH) + " " + args + " 2>" + errname;
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (FILE* e = std::fopen(errname, "r")) {
    while ((got = fread(buf.data(), 1, buf.size(), e)) > 0) r.err.append(buf.data(), got);
    std::fclose(e);
  }
  std::remove(errname);
  return r;
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::vector<std::string>& header) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      if (first) header.push_back(cell);
      else row.push_back(std::stod(cell));
    }
    if (!first) rows.push_back(row);
    first = false;
  }
  return rows;
}

int column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return static_cast<int>(k);
  return -1;
}

} // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli("").code, 1);
  EXPECT_EQ(run_cli("fixed-points --n 1").code, 1);
  EXPECT_EQ(run_cli("fixed-points").code, 1);
  EXPECT_EQ(run_cli("flow --n 3").code, 1);
  EXPECT_EQ(run_cli("fixed-points --n 3 --zeta 1,2").code, 1);
  EXPECT_EQ(run_cli("holonomy --point '{\"alpha\":[1,1],\"beta\":[1,2]}'").code, 1);  // not flat
  EXPECT_EQ(run_cli("flow --n 3 --source-index 2").code, 1);                           // index-0 source
  EXPECT_EQ(run_cli("--help").code, 0);
}

TEST(Cli, DegenerateLevel) {
  const CliRun r = run_cli("fixed-points --n 4 --zeta 1,-1,1,-1");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, FixedPointsZ3) {
  const CliRun r = run_cli("fixed-points --n 3 --zeta a=1,b=2");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["records"].size(), 3u);
  EXPECT_EQ(j["records"][2]["morse_index"], 0);
  EXPECT_EQ(j["records"][0]["morse_index"], 2);
  EXPECT_EQ(j["records"][1]["morse_index"], 2);
  EXPECT_NEAR(j["records"][2]["morse_value"].get<double>(), 5.0, 1e-12);
}

TEST(Cli, FixedPointsCensus) {
  const CliRun five = run_cli("fixed-points --n 5");
  ASSERT_EQ(five.code, 0);
  EXPECT_EQ(json::parse(five.out)["records"].size(), 5u);
  const CliRun four = run_cli("fixed-points --n 4");
  ASSERT_EQ(four.code, 0);
  const json j = json::parse(four.out);
  ASSERT_EQ(j["records"].size(), 3u);
  int families = 0;
  for (const auto& r : j["records"]) families += r["kind"] == "family";
  EXPECT_EQ(families, 1);
}

// Closed-form ℤ₃ flow: the residual columns stay at roundoff; 1e-10 holds while Φ ≲ 1e5.
TEST(Cli, ClosedFormResiduals) {
  const CliRun r = run_cli("flow --n 3 --source-index 0 --closed-form --morse-target 1e4");
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> header;
  const auto rows = parse_csv(r.out, header);
  ASSERT_GT(rows.size(), 10u);
  const int rr = column(header, "residual_real"), rc = column(header, "residual_complex");
  ASSERT_GE(rr, 0);
  ASSERT_GE(rc, 0);
  for (const auto& row : rows) {
    EXPECT_LE(row[rr], 1e-10);
    EXPECT_LE(row[rc], 1e-10);
  }
  // default horizon: the conservation bound for emitted trajectories
  const CliRun d = run_cli("flow --n 3 --source-index 0 --closed-form");
  ASSERT_EQ(d.code, 0);
  header.clear();
  for (const auto& row : parse_csv(d.out, header)) {
    EXPECT_LE(row[rr], 1e-8);
    EXPECT_LE(row[rc], 1e-8);
  }
}

TEST(Cli, NumericFlowSummary) {
  const CliRun r = run_cli("flow --n 2 --source-index 0 --stride 50");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("closed-form deviation"), std::string::npos);
  const auto pos = r.err.find("closed-form deviation (aligned by Morse value): ");
  ASSERT_NE(pos, std::string::npos);
  const double dev = std::stod(r.err.substr(pos + std::string("closed-form deviation (aligned by Morse value): ").size()));
  EXPECT_LE(dev, 1e-6);
  std::vector<std::string> header;
  const auto rows = parse_csv(r.out, header);
  EXPECT_EQ(header.front(), "t");
  EXPECT_EQ(header.back(), "residual_complex");
  const int m = column(header, "morse_value");
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_GT(rows[k][m], rows[k - 1][m]);
}

TEST(Cli, MissingSource) {
  EXPECT_EQ(run_cli("flow --n 3 --source-index 7").code, 1);
}

TEST(Cli, Deterministic) {
  const CliRun a = run_cli("flow --n 4 --source-index 0 --stride 20");
  const CliRun b = run_cli("flow --n 4 --source-index 0 --stride 20");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const CliRun c = run_cli("verify-conjecture --n 4 --seed 3");
  const CliRun d = run_cli("verify-conjecture --n 4 --seed 3");
  EXPECT_EQ(c.out, d.out);
}

TEST(Cli, HolonomyZ2) {
  const CliRun r = run_cli("holonomy --point '{\"n\":2,\"alpha\":[1,0],\"beta\":[0,0]}' --base 0.6,0,0.8,0 --gamma 1");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  const auto& M = j["matrix"];
  EXPECT_NEAR(M[0][0][0].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(M[0][1][0].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(M[1][1][0].get<double>(), -1.0, 1e-12);
  // R(-1)·exp(2v₁A) puts -2v₁a below the diagonal
  EXPECT_NEAR(M[1][0][0].get<double>(), -1.2, 1e-12);
}

TEST(Cli, VerifyZ2Holds) {
  const CliRun r = run_cli("verify-conjecture --n 2");
  EXPECT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["conjecture_holds"].get<bool>());
  EXPECT_EQ(j["components"][0]["matched_irrep"], 1);
}

// The generic pipeline sends both ℤ₃ components to the same irrep (recorded finding).
TEST(Cli, VerifyZ3Outcome) {
  const CliRun r = run_cli("verify-conjecture --n 3");
  EXPECT_EQ(r.code, 4) << r.err;
  const json j = json::parse(r.out);
  EXPECT_FALSE(j["conjecture_holds"].get<bool>());
  ASSERT_EQ(j["components"].size(), 2u);
  EXPECT_TRUE(j["all_matched"].get<bool>());
  EXPECT_FALSE(j["injective"].get<bool>());
}

TEST(Cli, VerifyZ3EqualParameters) {
  const CliRun r = run_cli("verify-conjecture --n 3 --zeta a=1,b=1");
  EXPECT_NE(r.err.find("|a| = |b|"), std::string::npos);
  const json j = json::parse(r.out);
  ASSERT_FALSE(j["warnings"].empty());
}

TEST(Cli, Selftest) {
  const CliRun r = run_cli("selftest");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("selftest passed"), std::string::npos);
  const CliRun f = run_cli("selftest --inject-fault moment-sign");
  EXPECT_NE(f.code, 0);
  EXPECT_NE(f.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(run_cli("selftest --inject-fault nonsense").code, 1);
}
