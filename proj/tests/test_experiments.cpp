#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <doctest.h>

#include "yamabe/experiments.hpp"
#include "yamabe/parallel.hpp"

using namespace yamabe;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("yamabe_lab_tests_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

json small_flow() {
  return json::parse(R"({
    "schema_version": 1,
    "scenario": "flow",
    "geometry": {"m": 3, "n": 0, "model": "sphere"},
    "grid": {"kind": "full_chart", "nodes": 40},
    "flow": {"t_end": 0.02, "dt_max": 1e-3, "output_interval": 0.01,
             "initial": {"kind": "cosine", "value": 1.0, "amplitude": 0.2}}
  })");
}

}  // namespace

TEST_CASE("configuration schema") {
  CHECK(parse_config(small_flow()).scenario == Scenario::Flow);
  CHECK(default_config(Scenario::Verify).workers == 1);

  json j = small_flow();
  j["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = small_flow();
  j.erase("schema_version");
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = small_flow();
  j["colour"] = "red";
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = small_flow();
  j["flow"]["dt_maximum"] = 1.0;
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = small_flow();
  j["bvp"] = json::object();
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = small_flow();
  j["scenario"] = "teleport";
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  j = small_flow();
  j["workers"] = 0;
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("nested keys are checked when the scenario runs") {
  json j = small_flow();
  j["flow"]["initial"]["phase"] = 1.0;
  CHECK_THROWS_AS(run_scenario(parse_config(j), scratch("nested")), ConfigError);
  j = json{{"schema_version", 1}, {"scenario", "dichotomy"}, {"sweep", {{"r_mins", {1e-2}}, {"typo", 1}}}};
  CHECK_THROWS_AS(run_scenario(parse_config(j), scratch("nested2")), ConfigError);
}

TEST_CASE("scenario names round trip") {
  for (Scenario s : {Scenario::Verify, Scenario::Flow, Scenario::Bvp, Scenario::RemovabilitySweep,
                     Scenario::CompletenessSweep, Scenario::DichotomySweep}) {
    CHECK(scenario_from_string(to_string(s)) == s);
  }
}

TEST_CASE("flow scenario writes deterministic output") {
  const auto d1 = scratch("flow1"), d2 = scratch("flow2");
  const ScenarioReport r1 = run_scenario(parse_config(small_flow()), d1);
  const ScenarioReport r2 = run_scenario(parse_config(small_flow()), d2);
  CHECK(r1.all_passed());
  const std::string csv = slurp(d1 / "flow.csv");
  CHECK(csv == slurp(d2 / "flow.csv"));
  CHECK(slurp(d1 / "summary.json") == slurp(d2 / "summary.json"));
  CHECK(csv.rfind("t,r,u,U_gauge,u_min,u_max,length\n", 0) == 0);
  // header plus 3 outputs of 40 nodes
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 40);
  const json summary = json::parse(slurp(d1 / "summary.json"));
  CHECK(summary["scenario"] == "flow");
  CHECK(summary["passed"] == true);
  CHECK_FALSE(summary.contains("runtime"));
  CHECK(std::filesystem::exists(d1 / "timing.json"));
}

TEST_CASE("bvp scenario") {
  json j{{"schema_version", 1},
         {"scenario", "bvp"},
         {"geometry", {{"m", 3}, {"n", 0}, {"model", "flat"}}},
         {"bvp", {{"problem", "eigenvalue"}, {"eps", 0.1}}}};
  const auto dir = scratch("bvp");
  const ScenarioReport r = run_scenario(parse_config(j), dir);
  CHECK(r.all_passed());
  CHECK(r.statistics["eigenvalue"].get<double>() == doctest::Approx(986.96).epsilon(1e-3));
  j["bvp"]["problem"] = "singular_profile";
  j["geometry"] = {{"m", 3}, {"n", 0}, {"model", "sphere"}};
  CHECK_THROWS(run_scenario(parse_config(j), dir));
}

TEST_CASE("parallel map keeps order and reports the first failure") {
  const auto squares = parallel_map(100, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < squares.size(); ++i) CHECK(squares[i] == static_cast<int>(i * i));
  CHECK(parallel_map(0, 4, [](std::size_t i) { return i; }).empty());
  try {
    parallel_map(50, 3, [](std::size_t i) -> int {
      if (i == 7 || i == 30) throw std::runtime_error("fail " + std::to_string(i));
      return 0;
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "fail 7");
  }
}

TEST_CASE("check rows") {
  CHECK(check_le("x", "a", 1.0, 2.0).passed);
  CHECK_FALSE(check_le("x", "a", 3.0, 2.0).passed);
  CHECK(check_ge("x", "a", 3.0, 2.0).passed);
  CHECK_FALSE(check_flag("x", "a", false).passed);
  CriterionResult r{"x", "t", {check_le("x", "a", 1.0, 2.0), check_le("x", "b", 3.0, 2.0)}, 0.0};
  CHECK_FALSE(r.passed());
  CHECK(r.headline().name == "b");
  CHECK_FALSE(CriterionResult{}.passed());
}

TEST_CASE("fast criteria pass") {
  CHECK(criterion_power_curvature().passed());
  CHECK(criterion_borderline().passed());
  CHECK(criterion_derivatives().passed());
  CHECK(criterion_annulus().passed());
  CHECK(criterion_eigenvalue().passed());
}

TEST_CASE("sweep assessments flag the expected failures") {
  RemovabilityParams p;
  p.r_mins = {0.1, 0.05};
  std::vector<RemovabilityRow> rows{{0.1, 1, 1, 0, 1}, {0.1, 10, 1, 0.2, 1}, {0.1, 100, 1, 0.3, 1},
                                    {0.05, 1, 1, 0, 1}, {0.05, 10, 1, 0.3, 1}, {0.05, 100, 1, 0.3, 1.5}};
  const CriterionResult r = assess_removability(rows, p);
  CHECK_FALSE(r.rows[0].passed);  // deviation grew
  CHECK_FALSE(r.rows[1].passed);
  CHECK_FALSE(r.rows[2].passed);  // spread 0.5

  DichotomyParams d;
  d.r_mins = {1e-2, 1e-3};
  std::vector<DichotomyRow> drows{{0, 1e-2, 4, 1}, {0, 1e-3, 5, 1}, {1, 1e-2, 10, 1}, {1, 1e-3, 50, 2}};
  const CriterionResult dr = assess_dichotomy(drows, d);
  REQUIRE(dr.rows.size() == 2);
  CHECK(dr.rows[0].passed);
  CHECK_FALSE(dr.rows[1].passed);
}
