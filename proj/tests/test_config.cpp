#include <forced_osc/config.hpp>

#include <catch_amalgamated.hpp>

using namespace forced_osc;

TEST_CASE("defaults resolve and validate", "[config]") {
  const auto c = RunConfig::from_json(json::object());
  CHECK(c.n == 2);
  CHECK(c.normal_form.i_max == 6);
  CHECK(c.normal_form.q_min == -4);
  CHECK(c.forcing().present(0));
  CHECK(std::isinf(c.integrator.max_step));
  const auto c3 = RunConfig::from_json({{"n", 3}});
  CHECK(c3.normal_form.i_max == 9);
  CHECK(c3.normal_form.q_min == -6);
}

TEST_CASE("printed config re-parses to the same config", "[config]") {
  json user = {{"n", 3},
               {"T", 2.0},
               {"integrator", {{"rtol", 1e-9}, {"max_step", 0.01}, {"direction", "forward"}}},
               {"scan", {{"jobs", 4}, {"seeds", 7}}},
               {"output", {{"data", "out.csv"}}}};
  const auto c = RunConfig::from_json(user);
  const auto dumped = c.to_json().dump(2);
  const auto again = RunConfig::from_json(json::parse(dumped));
  CHECK(again.to_json() == c.to_json());
  CHECK(again.hash() == c.hash());
  CHECK(again.integrator.direction == Direction::forward);
  CHECK(again.integrator.max_step == 0.01);
  CHECK(again.scan.jobs == 4);
}

TEST_CASE("unknown keys and bad types are rejected", "[config]") {
  CHECK_THROWS_AS(RunConfig::from_json({{"nn", 2}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"scan", {{"seed", 3}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"scan", 3}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"T", "one"}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"n", 2.5}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"integrator", {{"direction", "sideways"}}}}),
                  ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"integrator", {{"rtol", 1e-3}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json({{"p", {{{"j", 0}, {"cosine", {1.0}}}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(json::array()), ConfigError);
}

TEST_CASE("dotted overrides apply leaf-wise", "[config]") {
  json j = {{"scan", {{"seeds", 3}}}};
  set_dotted(j, "scan.jobs=8");
  set_dotted(j, "output.data=run.csv");
  set_dotted(j, "integrator.direction=forward");
  const auto c = RunConfig::from_json(j);
  CHECK(c.scan.seeds == 3);
  CHECK(c.scan.jobs == 8);
  CHECK(c.output.data == "run.csv");
  CHECK(c.integrator.direction == Direction::forward);
  json bad = json::object();
  set_dotted(bad, "scan.unknown=1");
  CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);
  CHECK_THROWS_AS(set_dotted(bad, "novalue"), ConfigError);
}

TEST_CASE("config hash tracks content", "[config]") {
  const auto a = RunConfig::from_json(json::object());
  const auto b = RunConfig::from_json({{"scan", {{"iterations", 10}}}});
  CHECK(a.hash().size() == 16);
  CHECK(a.hash() == RunConfig::from_json(json::object()).hash());
  CHECK(a.hash() != b.hash());
}

TEST_CASE("execution-only settings leave the hash alone", "[config]") {
  const auto a = RunConfig::from_json(json::object());
  const auto b = RunConfig::from_json({{"scan", {{"jobs", 8}}}, {"output", {{"data", "x.csv"}}}});
  CHECK(a.hash() == b.hash());
}
