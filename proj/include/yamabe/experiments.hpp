#pragma once

// Scenario runner behind the command line tool: configuration parsing,
// the verification criteria, flow/BVP runs and the parameter sweeps, with
// CSV and JSON output.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "yamabe/barrier.hpp"
#include "yamabe/comparison.hpp"
#include "yamabe/elliptic_bvp.hpp"
#include "yamabe/flow_solver.hpp"
#include "yamabe/model_geometry.hpp"

namespace yamabe {

/// One measured quantity against its threshold.
struct CheckRow {
  std::string criterion;  ///< acceptance criterion number, e.g. "6"
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  std::string relation;  ///< "<=", ">=", "<", ">", "==" or "flag"
  bool passed = false;
  std::string detail;
};

CheckRow check_le(std::string criterion, std::string name, double measured, double threshold,
                  std::string detail = {});
CheckRow check_ge(std::string criterion, std::string name, double measured, double threshold,
                  std::string detail = {});
CheckRow check_flag(std::string criterion, std::string name, bool ok, std::string detail = {});

struct CriterionResult {
  std::string id;
  std::string title;
  std::vector<CheckRow> rows;
  double runtime_seconds = 0.0;

  bool passed() const;
  /// The first failing row, or the first row.
  const CheckRow& headline() const;
};

// Parameters of the individual criteria. Defaults are the published targets.

struct HomothetyParams {
  Eigen::Index nodes = 400;
  double dt_max = 2e-5;
  double t_check = 0.1;
  double rel_tol = 1e-3;
  double extinction_tol = 2e-3;
  double runtime_limit = 10.0;
};
CriterionResult criterion_homothety(const HomothetyParams& p = {});

struct PowerCurvatureParams {
  std::vector<std::pair<int, int>> pairs{{5, 1}, {6, 2}, {7, 2}};
  double rel_tol = 1e-12;
  std::size_t samples = 200;
};
CriterionResult criterion_power_curvature(const PowerCurvatureParams& p = {});

struct BorderlineParams {
  int m = 4;
  int n = 1;
  std::size_t samples = 2000;
  double L_check = 1e6;
  double rel_tol = 0.05;
};
CriterionResult criterion_borderline(const BorderlineParams& p = {});

struct DerivativeParams {
  double r_lo = 1e-6;
  double r_hi = 0.1;
  std::size_t samples = 60;
  double fd_tol = 1e-6;
  double route_tol = 1e-9;
};
CriterionResult criterion_derivatives(const DerivativeParams& p = {});

struct BarrierParams {
  std::uint64_t seed = 1;
  int trials = 10;
  double delta = 0.5;
  double r_min = 1e-4;
  Eigen::Index nodes = 200;
  double t_end = 0.2;
  double tol_factor = 10.0;
  double newton_tol = 1e-10;
  // bound run
  double bound_r_min = 1e-6;
  double epsilon = 0.2;
  double inner_multiplier = 1000.0;
  double bound_slack = 1e-8;
};
CriterionResult criterion_barrier(const BarrierParams& p = {});

struct RemovabilityParams {
  std::vector<double> r_mins{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> multipliers{1.0, 10.0, 100.0};
  double deviation_multiplier = 10.0;
  double probe_r = 0.5;
  double t_probe = 0.05;
  double delta = 0.25;
  double dev_tol = 1e-2;
  double sup_rel_tol = 0.2;
  Eigen::Index nodes = 400;
  Eigen::Index reference_nodes = 800;
  double dt_max = 2e-4;
  double initial_amplitude = 0.3;
  double runtime_limit = 120.0;
  int workers = 1;
};

/// Raw sweep data shared by the criterion and the CLI sweep.
struct RemovabilityRow {
  double r_min = 0.0;
  double K = 1.0;
  double u_probe = 0.0;
  double deviation = 0.0;  ///< relative to the restriction run at the same r_min
  double sup_ratio = 0.0;
};
std::vector<RemovabilityRow> removability_sweep(const RemovabilityParams& p);
/// Checks on sweep rows (everything except the runtime limit).
CriterionResult assess_removability(const std::vector<RemovabilityRow>& rows, const RemovabilityParams& p);
CriterionResult criterion_removability(const RemovabilityParams& p = {});

struct CompletenessParams {
  int m = 3;
  int n = 1;
  double profile_r_min = 1e-8;
  double asymptote_r = 1e-4;
  double asymptote_tol = 0.02;
  std::vector<double> profile_r_mins{1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  double length_r0 = 1.0;
  double slope_tol = 0.05;
  std::vector<double> amplitudes{10.0, 100.0, 1000.0};
  double flow_r_min = 1e-4;
  double flow_t_end = 0.05;
  double flow_r0 = 0.5;
  Eigen::Index flow_nodes = 600;
  double saturation_tol = 1e-3;
  int workers = 1;
};

struct CompletenessData {
  EllipticSolution profile;
  std::vector<double> profile_lengths;  ///< per profile_r_mins entry
  std::vector<double> flow_lengths;     ///< per amplitude
};
CompletenessData completeness_sweep(const CompletenessParams& p);
CriterionResult assess_completeness(const CompletenessData& data, const CompletenessParams& p);
CriterionResult criterion_completeness(const CompletenessParams& p = {});

/// Same singular inner data u = k_flat r_min^{-2} for a non-complete (n = 0)
/// and a complete (n = 1) pair on the 3-sphere, as r_min shrinks.
struct DichotomyParams {
  int m = 3;
  std::vector<int> ns{0, 1};
  std::vector<double> r_mins{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double inner_coefficient = 1.0 / 3.0;
  double t_end = 0.05;
  Eigen::Index nodes = 600;
  double delta = 0.25;
  double length_r0 = 0.5;
  /// last/first sup ratio separating "bounded" from "growing".
  double growth_threshold = 10.0;
  int workers = 1;
};

struct DichotomyRow {
  int n = 0;
  double r_min = 0.0;
  /// sup of u(t)/u(0) over [sqrt(r_min), delta).
  double sup_ratio = 0.0;
  double length = 0.0;
};
std::vector<DichotomyRow> dichotomy_sweep(const DichotomyParams& p);
CriterionResult assess_dichotomy(const std::vector<DichotomyRow>& rows, const DichotomyParams& p);

struct AppendixParams {
  std::uint64_t seed = 1;
  double dt = 1e-3;
  double slack = 1e-2;
  std::size_t pairs = 1000000;
  int green_trials = 100;
  double green_tol = 1e-6;
  Eigen::Index green_nodes = 801;
};
CriterionResult criterion_appendix(const AppendixParams& p = {});

struct AnnulusParams {
  std::vector<std::pair<int, int>> pairs{{5, 1}, {4, 1}};
  std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  double slope_tol = 0.1;
  double max_lap_spread = 2.0;
};
CriterionResult criterion_annulus(const AnnulusParams& p = {});

struct EigenParams {
  double eps = 0.1;
  std::vector<double> sweep{0.4, 0.2, 0.1, 0.05, 0.025};
  double rel_tol = 0.01;
  double slope_tol = 0.1;
  Eigen::Index nodes = 400;
};
CriterionResult criterion_eigenvalue(const EigenParams& p = {});

struct GaugeParams {
  int m = 5;
  int n = 1;
  double r_min = 0.01;
  double r_max = 0.5;
  Eigen::Index nodes = 201;
  double dt = 1e-4;
  double t_end = 0.02;
  double factor = 5.0;
};
CriterionResult criterion_gauge(const GaugeParams& p = {});

// ---------------------------------------------------------------- scenarios

enum class Scenario { Verify, Flow, Bvp, RemovabilitySweep, CompletenessSweep, DichotomySweep };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

constexpr int kSchemaVersion = 1;

struct ScenarioConfig {
  Scenario scenario = Scenario::Verify;
  std::uint64_t seed = 1;
  int workers = 1;
  /// The parsed document; sections are read by the scenario that owns them.
  nlohmann::json document = nlohmann::json::object();
};

/// Validates schema_version, the scenario name and every key against the
/// schema. Throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json& document);
ScenarioConfig load_config(const std::filesystem::path& path);
/// Minimal valid configuration for a scenario (all defaults).
ScenarioConfig default_config(Scenario scenario);

struct ScenarioReport {
  Scenario scenario = Scenario::Verify;
  std::vector<CheckRow> checks;
  nlohmann::json statistics = nlohmann::json::object();
  std::vector<std::string> artifacts;
  double runtime_seconds = 0.0;

  bool all_passed() const;
  /// Deterministic summary (no timings).
  nlohmann::json summary() const;
};

/// Runs the scenario and writes its CSV files plus summary.json into out_dir
/// (created if needed). Module errors are rethrown with the scenario name.
ScenarioReport run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

}  // namespace yamabe
