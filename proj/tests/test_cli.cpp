// End-to-end checks of the mdstop binary: output shape, exit codes,
// determinism of emitted files, and the config round trip.
#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd = std::string(MDSTOP_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  CmdResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

} // namespace

TEST_CASE("run emits one deterministic JSON record") {
  const std::string args =
      "run --model arch1:0.03:0.3:6 --epsilon 0.05 --delta 0.05 --seed 7";
  const CmdResult a = run_cli(args);
  const CmdResult b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);

  const auto j = nlohmann::json::parse(a.out);
  CHECK(j.contains("tau"));
  CHECK(j.contains("mu_star"));
  CHECK(j.contains("mu_at_stop"));
  CHECK(j.contains("v_at_stop"));
  CHECK(j.contains("criterion"));
  CHECK(j.contains("total_samples"));
  CHECK(j.contains("hit_cap"));
  CHECK(j["hit_cap"].get<bool>() == false);
  CHECK(j["criterion"].get<double>() <= 0.05);
}

TEST_CASE("degenerate run returns the exact mean at tau=1") {
  const CmdResult r = run_cli(
      "run --model iid:normal:1.25:0 --variance conditional --inflation none "
      "--epsilon 0.1 --delta 0.05 --seed 3");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["tau"].get<int>() == 1);
  CHECK(j["mu_star"].get<double>() == 1.25);
}

TEST_CASE("validation failures exit with code 1") {
  CHECK(run_cli("run --model bogus:1 --epsilon 0.1 --delta 0.05").exit_code == 1);
  CHECK(run_cli("run --epsilon -1 --delta 0.05").exit_code == 1);
  CHECK(run_cli("run --epsilon 0.1 --delta 2").exit_code == 1);
  CHECK(run_cli("trace --format yaml").exit_code == 1);
}

TEST_CASE("cv runs land within epsilon of 1/6 in at least 90% of seeds") {
  int hits = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    const CmdResult r = run_cli("run --model cv:usq_half --epsilon 0.01 --delta 0.05 "
                                "--seed " + std::to_string(s));
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    if (std::fabs(j["mu_star"].get<double>() - 1.0 / 6.0) <= 0.01) ++hits;
  }
  CHECK(hits >= 90);
}

TEST_CASE("trace emits the per-batch hierarchy, v0sq near-flat for arch1") {
  const CmdResult r = run_cli("trace --model arch1:0.03:0.3:6 --t-max 8 --seed 1");
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,batch_size,mu,v0sq,v1sq,v2sq,criterion");
  std::string row;
  int rows = 0;
  while (std::getline(lines, row)) {
    ++rows;
    // v0sq is the fourth field
    std::istringstream fields(row);
    std::string f;
    for (int i = 0; i < 4; ++i) std::getline(fields, f, ',');
    const double v0sq = std::stod(f);
    CHECK(std::fabs(v0sq - 0.3093) < 0.01);
  }
  CHECK(rows == 8);
}

TEST_CASE("long cv trace settles into the optimal-variance band") {
  const CmdResult r =
      run_cli("trace --model cv:usq_half --t-max 10 --seed 5 --format json");
  REQUIRE(r.exit_code == 0);
  const auto rows = nlohmann::json::parse(r.out);
  REQUIRE(rows.size() == 10);
  const double v2sq = rows.back()["v2sq"].get<double>();
  CHECK(v2sq >= 1.2e-3);
  CHECK(v2sq <= 1.6e-3);
  CHECK(rows.back()["v0sq"].is_null()); // no closed form for cv
}

TEST_CASE("iid trace variance settles near the true value") {
  const CmdResult r =
      run_cli("trace --model iid:normal:0:1 --t-max 8 --seed 9 --format json");
  REQUIRE(r.exit_code == 0);
  const auto rows = nlohmann::json::parse(r.out);
  const double v2sq = rows.back()["v2sq"].get<double>(); // |M(8)| = 15961 >= 1e4
  CHECK(std::fabs(v2sq - 1.0) < 0.05);
}

TEST_CASE("evaluate writes byte-identical files across reruns and thread counts") {
  const std::string base = "evaluate --model iid:normal:3:0 --variance conditional "
                           "--inflation none --grid-eps 0.01:0.1 --grid-delta 0.05:0.2 "
                           "--grid-points 2 --runs 10 --seed 4 ";
  REQUIRE(run_cli(base + "--threads 1 --out /tmp/mdstop_cli_a").exit_code == 0);
  REQUIRE(run_cli(base + "--threads 2 --out /tmp/mdstop_cli_b").exit_code == 0);
  CHECK(slurp("/tmp/mdstop_cli_a.csv") == slurp("/tmp/mdstop_cli_b.csv"));
  CHECK(slurp("/tmp/mdstop_cli_a.summary.json") == slurp("/tmp/mdstop_cli_b.summary.json"));

  // every cell of the degenerate model succeeds
  std::istringstream lines(slurp("/tmp/mdstop_cli_a.csv"));
  std::string row;
  std::getline(lines, row); // header
  while (std::getline(lines, row)) {
    std::istringstream fields(row);
    std::string f;
    for (int i = 0; i < 3; ++i) std::getline(fields, f, ',');
    CHECK(std::stod(f) == 1.0); // p
  }
}

TEST_CASE("config file drives a run and flags override it") {
  {
    std::ofstream cfg("/tmp/mdstop_cli_cfg.json");
    cfg << R"({"model":"iid:normal:0:1","epsilon":0.2,"delta":0.1,"seed":7})" << "\n";
  }
  const CmdResult from_cfg = run_cli("run --config /tmp/mdstop_cli_cfg.json");
  const CmdResult from_flags =
      run_cli("run --model iid:normal:0:1 --epsilon 0.2 --delta 0.1 --seed 7");
  REQUIRE(from_cfg.exit_code == 0);
  CHECK(from_cfg.out == from_flags.out);

  const CmdResult overridden =
      run_cli("run --config /tmp/mdstop_cli_cfg.json --epsilon 0.4");
  REQUIRE(overridden.exit_code == 0);
  CHECK(overridden.out != from_cfg.out);

  {
    std::ofstream cfg("/tmp/mdstop_cli_bad.json");
    cfg << R"({"model":"iid:normal:0:1","unknown_key":1})" << "\n";
  }
  CHECK(run_cli("run --config /tmp/mdstop_cli_bad.json").exit_code == 1);
}

TEST_CASE("the effective config round-trips to identical output") {
  const CmdResult first =
      run_cli("run --model arch1:0.03:0.3:6 --epsilon 0.08 --delta 0.07 --seed 12 "
              "--emit-config /tmp/mdstop_cli_eff.json");
  REQUIRE(first.exit_code == 0);
  const CmdResult replay = run_cli("run --config /tmp/mdstop_cli_eff.json");
  REQUIRE(replay.exit_code == 0);
  CHECK(replay.out == first.out);
}

TEST_CASE("verify passes and exits zero") {
  const CmdResult r = run_cli("verify --seed 11");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("verification passed") != std::string::npos);
  CHECK(r.out.find("[FAIL]") == std::string::npos);
}
