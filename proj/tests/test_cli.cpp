// Runs the built forced-osc executable; FORCED_OSC_CLI and CONFIG_DIR come
// from the build.

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(FORCED_OSC_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(CONFIG_DIR) + "/" + name; }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("gentrig with n = 1 tabulates the sine", "[cli]") {
  const auto r = run("gentrig --n 1 --set gentrig.samples=257");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# forced-osc gentrig config_hash=", 0) == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 258);
  CHECK(rows[0] == std::vector<std::string>{"kappa", "sn", "cn", "residual"});
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double k = std::stod(rows[i][0]);
    worst = std::max({worst, std::abs(std::stod(rows[i][1]) - std::sin(k)),
                      std::abs(std::stod(rows[i][2]) - std::cos(k))});
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("verify passes on the Morris config", "[cli]") {
  const auto r = run("-c " + config("morris.json") + " verify");
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS lie equations") != std::string::npos);
}

TEST_CASE("normalform reports the smoothness ledger", "[cli]") {
  const auto r = run("-c " + config("acceptance_n2.json") + " normalform");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["smoothness_ledger"] == nlohmann::json({{"p_0", 0}, {"p_1", 1}, {"p_2", 2}}));
  CHECK(j["smoothness_ok"] == true);
  CHECK(j["shape"]["special_kappa_free_from_2"] == true);
  CHECK(j["threshold"]["overall"]["K"].get<double>() > 1.0);
  CHECK(j.contains("config_hash"));
  REQUIRE(j["generators"]["stage1"].size() == 1);
  CHECK(j["generators"]["stage1"][0]["exponent"] == 2);
}

TEST_CASE("printed config round-trips", "[cli]") {
  const auto a = run("-c " + config("generic_n3.json") + " --set scan.jobs=2 --print-config");
  REQUIRE(a.code == 0);
  const std::string path = "cli_roundtrip.json";
  std::ofstream(path) << a.out;
  const auto b = run("-c " + path + " --print-config");
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  std::remove(path.c_str());
}

TEST_CASE("exit codes", "[cli]") {
  CHECK(run("--set nope=1 verify").code == 2);
  CHECK(run("--n 0 gentrig").code == 2);
  CHECK(run("--set integrator.rtol=0.5 orbit").code == 2);
  CHECK(run("--bogus-flag verify").code == 2);
  CHECK(run("").code == 2);
  // n = 1 has no Λ chart for the period map
  CHECK(run("--n 1 --set p=[] poincare").code == 2);
  // the orbit starts inside the chart floor and the period map refuses it
  CHECK(run("--set poincare.K=1e-9 poincare").code == 3);
}

TEST_CASE("serial runs are bit-reproducible", "[cli]") {
  const std::string args = "-c " + config("acceptance_n2.json") +
                           " scan --set scan.seeds=3 --set scan.iterations=5";
  const auto a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto c = run(args + " --jobs 3");
  CHECK(c.out == a.out);
}
