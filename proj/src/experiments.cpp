#include "yamabe/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "yamabe/errors.hpp"

namespace yamabe {

using nlohmann::json;

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Verify: return "verify";
    case Scenario::Flow: return "flow";
    case Scenario::Bvp: return "bvp";
    case Scenario::RemovabilitySweep: return "removability";
    case Scenario::CompletenessSweep: return "completeness";
    case Scenario::DichotomySweep: return "dichotomy";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& name) {
  for (Scenario s : {Scenario::Verify, Scenario::Flow, Scenario::Bvp, Scenario::RemovabilitySweep,
                     Scenario::CompletenessSweep, Scenario::DichotomySweep}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

namespace {

// ------------------------------------------------------------------ schema

using KeySet = std::set<std::string>;

void reject_unknown(const json& obj, const KeySet& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const KeySet kGeometryKeys{"m", "n", "model", "r_max"};
const KeySet kGridKeys{"kind", "r_min", "r_max", "nodes"};
const KeySet kFlowKeys{"t_end",           "dt_initial", "dt_max",  "dt_min", "newton_tol", "newton_max_iter",
                       "extinction_floor", "output_interval", "gauge", "initial", "inner", "outer"};
const KeySet kInitialKeys{"kind", "value", "amplitude", "frequency"};
const KeySet kBoundaryKeys{"kind", "value"};
const KeySet kBvpKeys{"problem", "eps", "r_min", "nodes", "tol"};
const KeySet kVerifyKeys{"criteria"};
const KeySet kRemovabilityKeys{"r_mins", "multipliers", "deviation_multiplier", "probe_r", "t_probe", "delta",
                               "dev_tol", "sup_rel_tol", "nodes", "reference_nodes", "dt_max", "amplitude"};
const KeySet kCompletenessKeys{"m",         "n",        "profile_r_min", "asymptote_r", "asymptote_tol",
                               "profile_r_mins", "length_r0", "slope_tol",     "amplitudes",  "flow_r_min",
                               "flow_t_end", "flow_r0",  "flow_nodes",    "saturation_tol"};
const KeySet kDichotomyKeys{"m", "ns", "r_mins", "inner_coefficient", "t_end", "nodes", "delta", "length_r0",
                            "growth_threshold"};

std::map<Scenario, KeySet> sections_by_scenario() {
  return {{Scenario::Verify, {"verify"}},
          {Scenario::Flow, {"geometry", "grid", "flow"}},
          {Scenario::Bvp, {"geometry", "bvp"}},
          {Scenario::RemovabilitySweep, {"sweep"}},
          {Scenario::CompletenessSweep, {"sweep"}},
          {Scenario::DichotomySweep, {"sweep"}}};
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("key '") + key + "': " + e.what());
  }
}

json section(const json& doc, const char* name) { return doc.contains(name) ? doc.at(name) : json::object(); }

// ------------------------------------------------------------------ output

std::string number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::string quoted(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

void write_checks(const std::filesystem::path& path, const std::vector<CheckRow>& rows) {
  CsvWriter csv(path, {"criterion", "name", "measured", "threshold", "relation", "passed", "detail"});
  for (const auto& r : rows) {
    csv.row({r.criterion, quoted(r.name), number(r.measured), number(r.threshold), r.relation,
             r.passed ? "true" : "false", quoted(r.detail)});
  }
}

json doubles(const std::vector<double>& v) { return json(v); }

// ------------------------------------------------------------------ verify

using CriterionFn = std::function<CriterionResult(const ScenarioConfig&)>;

std::vector<std::pair<std::string, CriterionFn>> criterion_table() {
  return {
      {"1", [](const ScenarioConfig&) { return criterion_homothety(); }},
      {"2", [](const ScenarioConfig&) { return criterion_power_curvature(); }},
      {"3", [](const ScenarioConfig&) { return criterion_borderline(); }},
      {"4", [](const ScenarioConfig&) { return criterion_derivatives(); }},
      {"5",
       [](const ScenarioConfig& c) {
         BarrierParams p;
         p.seed = c.seed;
         return criterion_barrier(p);
       }},
      {"6",
       [](const ScenarioConfig& c) {
         RemovabilityParams p;
         p.workers = c.workers;
         return criterion_removability(p);
       }},
      {"7",
       [](const ScenarioConfig& c) {
         CompletenessParams p;
         p.workers = c.workers;
         return criterion_completeness(p);
       }},
      {"8",
       [](const ScenarioConfig& c) {
         AppendixParams p;
         p.seed = c.seed;
         return criterion_appendix(p);
       }},
      {"9", [](const ScenarioConfig&) { return criterion_annulus(); }},
      {"10", [](const ScenarioConfig&) { return criterion_eigenvalue(); }},
      {"11", [](const ScenarioConfig&) { return criterion_gauge(); }},
  };
}

void run_verify(const ScenarioConfig& config, const std::filesystem::path& out, ScenarioReport& report,
                json& timing) {
  const json v = section(config.document, "verify");
  const auto table = criterion_table();
  std::vector<std::string> wanted;
  for (const auto& [id, _] : table) wanted.push_back(id);
  if (v.contains("criteria")) wanted = get_or<std::vector<std::string>>(v, "criteria", {});
  for (const auto& id : wanted) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == id; });
    if (it == table.end()) throw ConfigError("verify.criteria: unknown criterion '" + id + "'");
  }
  json per = json::object();
  for (const auto& [id, fn] : table) {
    if (std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
    const CriterionResult r = fn(config);
    // Runtime rows are machine dependent; they stay out of the deterministic CSV.
    for (const auto& row : r.rows) {
      if (row.name != "runtime seconds") report.checks.push_back(row);
      else if (!row.passed) report.checks.push_back(row);
    }
    per[id] = {{"title", r.title}, {"passed", r.passed()}};
    timing[id] = r.runtime_seconds;
  }
  report.statistics["criteria"] = per;
  write_checks(out / "verify.csv", report.checks);
  report.artifacts.push_back("verify.csv");
}

// ------------------------------------------------------------------ flow

ModelGeometry geometry_from(const json& g) {
  return make_geometry(get_or<int>(g, "m", 3), get_or<int>(g, "n", 0),
                       model_from_string(get_or<std::string>(g, "model", "sphere")), get_or<double>(g, "r_max", 1.0));
}

GridPtr grid_from(const json& g, const ModelGeometry& geom) {
  const std::string kind = get_or<std::string>(g, "kind", "full_chart");
  const Eigen::Index nodes = get_or<Eigen::Index>(g, "nodes", 400);
  const double r_max = get_or<double>(g, "r_max", geom.domain_max());
  const bool pole = geom.has_outer_pole() && r_max >= geom.domain_max();
  if (kind == "full_chart") return share(RadialGrid::full_chart(geom, nodes));
  if (kind == "geometric") return share(RadialGrid::geometric(get_or<double>(g, "r_min", 1e-4), r_max, nodes, pole));
  if (kind == "uniform") return share(RadialGrid::uniform(get_or<double>(g, "r_min", 1e-2), r_max, nodes, pole));
  if (kind == "centered") return share(RadialGrid::centered(r_max, nodes, pole));
  throw ConfigError("grid.kind: unknown grid '" + kind + "'");
}

std::function<double(double)> initial_from(const json& j) {
  reject_unknown(j, kInitialKeys, "flow.initial");
  const std::string kind = get_or<std::string>(j, "kind", "constant");
  const double value = get_or<double>(j, "value", 1.0);
  const double amp = get_or<double>(j, "amplitude", 0.0);
  const double freq = get_or<double>(j, "frequency", 1.0);
  if (kind == "constant") return [value](double) { return value; };
  if (kind == "cosine") return [=](double r) { return value + amp * std::cos(freq * r); };
  if (kind == "sine") return [=](double r) { return value + amp * std::sin(freq * r); };
  throw ConfigError("flow.initial.kind: unknown profile '" + kind + "'");
}

Gauge gauge_from(const std::string& name) {
  if (name == "base") return Gauge::base();
  if (name == "tilde_power") return Gauge::tilde(BarrierFactor::power());
  if (name == "tilde_log") return Gauge::tilde(BarrierFactor::borderline_log());
  throw ConfigError("flow.gauge: unknown gauge '" + name + "'");
}

/// Boundary value is given for the metric factor u and converted to the gauge.
BoundarySpec boundary_from(const json& j, const char* where, double r, const Gauge& gauge, double eta) {
  reject_unknown(j, kBoundaryKeys, where);
  const std::string kind = get_or<std::string>(j, "kind", "pole");
  if (kind == "pole") return BoundarySpec::pole_regularity();
  if (kind == "zero_flux") return BoundarySpec::zero_flux();
  if (kind == "constant") {
    double u = get_or<double>(j, "value", 1.0);
    if (gauge.kind == GaugeKind::BarrierTilde) u /= gauge.factor->value(r);
    return BoundarySpec::constant(std::pow(u, eta));
  }
  throw ConfigError(std::string(where) + ".kind: unknown boundary '" + kind + "'");
}

void run_flow(const ScenarioConfig& config, const std::filesystem::path& out, ScenarioReport& report) {
  const ModelGeometry geom = geometry_from(section(config.document, "geometry"));
  const GridPtr grid = grid_from(section(config.document, "grid"), geom);
  const json f = section(config.document, "flow");
  const double eta = geom.eta_value();
  FlowConfig cfg;
  cfg.dt_initial = get_or<double>(f, "dt_initial", cfg.dt_initial);
  cfg.dt_max = get_or<double>(f, "dt_max", cfg.dt_max);
  cfg.dt_min = get_or<double>(f, "dt_min", cfg.dt_min);
  cfg.newton_tol = get_or<double>(f, "newton_tol", cfg.newton_tol);
  cfg.newton_max_iter = get_or<int>(f, "newton_max_iter", cfg.newton_max_iter);
  cfg.extinction_floor = get_or<double>(f, "extinction_floor", cfg.extinction_floor);
  cfg.validate();
  const double t_end = get_or<double>(f, "t_end", 0.1);
  if (!(t_end > 0.0)) throw ConfigError("flow.t_end must be positive");
  const Gauge gauge = gauge_from(get_or<std::string>(f, "gauge", "base"));
  const auto u0 = initial_from(section(f, "initial"));
  const RadialField u_init = RadialField::sample(grid, u0);
  require_positive(u_init, "initial metric factor");
  const RadialField U0 = gauge.kind == GaugeKind::BaseMetric
                             ? RadialField(grid, u_init.values.array().pow(eta).matrix())
                             : to_tilde_gauge(u_init, *gauge.factor, eta);
  const BoundarySpec inner = boundary_from(section(f, "inner"), "flow.inner", grid->r_min(), gauge, eta);
  const BoundarySpec outer = boundary_from(section(f, "outer"), "flow.outer", grid->r_max(), gauge, eta);
  const FlowState s0 = make_flow_state(geom, U0, gauge, inner, outer, cfg);

  RunOptions opts;
  opts.output_interval = get_or<double>(f, "output_interval", t_end / 10.0);
  opts.keep_snapshots = true;
  const double r_end = grid->r_max();
  std::vector<Monitor> monitors{
      {"u_min", [](const FlowState& s) { return metric_factor(s).values.minCoeff(); }},
      {"u_max", [](const FlowState& s) { return metric_factor(s).values.maxCoeff(); }},
      {"length", [r_end](const FlowState& s) { return completeness_length(s, r_end); }},
  };
  const FlowResult res = run(s0, cfg, t_end, monitors, opts);

  std::vector<std::string> header{"t", "r", "u", "U_gauge"};
  for (const auto& m : monitors) header.push_back(m.name);
  CsvWriter csv(out / "flow.csv", header);
  bool positive = true;
  bool finite = true;
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    const FlowState& s = res.snapshots[k];
    const RadialField u = metric_factor(s);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      std::vector<std::string> row{number(s.t), number(u.r()(i)), number(u(i)), number(s.U(i))};
      for (const auto& series : res.series) row.push_back(number(series.values[k]));
      csv.row(row);
      if (!std::isfinite(u(i))) finite = false;
      if (!(u(i) > 0.0)) positive = false;
    }
  }
  report.artifacts.push_back("flow.csv");
  report.checks.push_back(check_flag("flow", "metric factor finite at every output", finite));
  report.checks.push_back(check_flag("flow", "metric factor positive at every output", positive));
  report.statistics["final_time"] = res.final_state.t;
  report.statistics["steps"] = res.final_state.steps;
  report.statistics["outputs"] = res.snapshots.size();
  report.statistics["extinction_time"] = res.extinction_time ? json(*res.extinction_time) : json(nullptr);
  report.statistics["u_min_final"] = res.series[0].values.back();
  report.statistics["u_max_final"] = res.series[1].values.back();
}

// ------------------------------------------------------------------ bvp

void write_field(const std::filesystem::path& path, const RadialField& field, const char* column) {
  CsvWriter csv(path, {"r", column});
  for (Eigen::Index i = 0; i < field.size(); ++i) csv.row({number(field.r()(i)), number(field(i))});
}

void run_bvp(const ScenarioConfig& config, const std::filesystem::path& out, ScenarioReport& report) {
  const ModelGeometry geom = geometry_from(section(config.document, "geometry"));
  const json b = section(config.document, "bvp");
  const std::string problem = get_or<std::string>(b, "problem", "eigenvalue");
  report.statistics["problem"] = problem;
  if (problem == "scalar_flat" || problem == "eigenvalue") {
    EllipticOptions opts;
    opts.nodes = get_or<Eigen::Index>(b, "nodes", opts.nodes);
    opts.tol = get_or<double>(b, "tol", opts.tol);
    const double eps = get_or<double>(b, "eps", 0.1);
    if (problem == "scalar_flat") {
      const EllipticSolution s = scalar_flat_gauge(geom, eps, opts);
      write_field(out / "bvp.csv", s.field, "U");
      report.statistics["residual_norm"] = s.residual_norm;
      report.statistics["U_min"] = s.field.values.minCoeff();
      report.checks.push_back(check_flag("bvp", "scalar-flat gauge positive", s.field.values.minCoeff() > 0.0));
      report.checks.push_back(check_le("bvp", "residual norm", s.residual_norm, 1e-8));
    } else {
      const EigenResult e = lowest_dirichlet_eigenvalue(geom, eps, opts);
      write_field(out / "bvp.csv", e.eigenfunction, "eigenfunction");
      report.statistics["eigenvalue"] = e.value;
      report.statistics["rayleigh"] = e.rayleigh;
      report.statistics["iterations"] = e.iterations;
      report.checks.push_back(check_le("bvp", "|eigenvalue - Rayleigh quotient| / eigenvalue",
                                       std::abs(e.value - e.rayleigh) / e.value, 1e-8));
    }
  } else if (problem == "singular_profile") {
    SingularProfileOptions opts;
    opts.nodes = get_or<Eigen::Index>(b, "nodes", opts.nodes);
    opts.tol = get_or<double>(b, "tol", opts.tol);
    const double r_min = get_or<double>(b, "r_min", 1e-6);
    const EllipticSolution s = singular_yamabe_profile(geom, r_min, opts);
    write_field(out / "bvp.csv", s.field, "u");
    const double k = singular_profile_coefficient(geom);
    report.statistics["coefficient"] = k;
    report.statistics["residual_norm"] = s.residual_norm;
    if (s.asymptote) {
      report.statistics["fit_exponent"] = s.asymptote->exponent;
      report.statistics["fit_coefficient"] = s.asymptote->coefficient;
      report.checks.push_back(check_le("bvp", "|fitted exponent + 2|", std::abs(s.asymptote->exponent + 2.0), 0.01));
    }
    report.checks.push_back(check_flag("bvp", "profile positive", s.field.values.minCoeff() > 0.0));
  } else {
    throw ConfigError("bvp.problem: unknown problem '" + problem + "'");
  }
  report.artifacts.push_back("bvp.csv");
}

// ------------------------------------------------------------------ sweeps

void run_removability(const ScenarioConfig& config, const std::filesystem::path& out, ScenarioReport& report) {
  const json s = section(config.document, "sweep");
  reject_unknown(s, kRemovabilityKeys, "sweep");
  RemovabilityParams p;
  p.r_mins = get_or(s, "r_mins", p.r_mins);
  p.multipliers = get_or(s, "multipliers", p.multipliers);
  p.deviation_multiplier = get_or(s, "deviation_multiplier", p.deviation_multiplier);
  p.probe_r = get_or(s, "probe_r", p.probe_r);
  p.t_probe = get_or(s, "t_probe", p.t_probe);
  p.delta = get_or(s, "delta", p.delta);
  p.dev_tol = get_or(s, "dev_tol", p.dev_tol);
  p.sup_rel_tol = get_or(s, "sup_rel_tol", p.sup_rel_tol);
  p.nodes = get_or(s, "nodes", p.nodes);
  p.reference_nodes = get_or(s, "reference_nodes", p.reference_nodes);
  p.dt_max = get_or(s, "dt_max", p.dt_max);
  p.initial_amplitude = get_or(s, "amplitude", p.initial_amplitude);
  p.workers = config.workers;
  if (p.r_mins.empty() || p.multipliers.empty()) throw ConfigError("sweep: r_mins and multipliers must be nonempty");
  const auto rows = removability_sweep(p);
  CsvWriter csv(out / "removability.csv", {"r_min", "K", "u_probe", "deviation", "sup_ratio"});
  for (const auto& r : rows) {
    csv.row({number(r.r_min), number(r.K), number(r.u_probe), number(r.deviation), number(r.sup_ratio)});
  }
  report.artifacts.push_back("removability.csv");
  report.checks = assess_removability(rows, p).rows;
}

void run_completeness(const ScenarioConfig& config, const std::filesystem::path& out, ScenarioReport& report) {
  const json s = section(config.document, "sweep");
  reject_unknown(s, kCompletenessKeys, "sweep");
  CompletenessParams p;
  p.m = get_or(s, "m", p.m);
  p.n = get_or(s, "n", p.n);
  p.profile_r_min = get_or(s, "profile_r_min", p.profile_r_min);
  p.asymptote_r = get_or(s, "asymptote_r", p.asymptote_r);
  p.asymptote_tol = get_or(s, "asymptote_tol", p.asymptote_tol);
  p.profile_r_mins = get_or(s, "profile_r_mins", p.profile_r_mins);
  p.length_r0 = get_or(s, "length_r0", p.length_r0);
  p.slope_tol = get_or(s, "slope_tol", p.slope_tol);
  p.amplitudes = get_or(s, "amplitudes", p.amplitudes);
  p.flow_r_min = get_or(s, "flow_r_min", p.flow_r_min);
  p.flow_t_end = get_or(s, "flow_t_end", p.flow_t_end);
  p.flow_r0 = get_or(s, "flow_r0", p.flow_r0);
  p.flow_nodes = get_or(s, "flow_nodes", p.flow_nodes);
  p.saturation_tol = get_or(s, "saturation_tol", p.saturation_tol);
  p.workers = config.workers;
  if (p.profile_r_mins.size() < 2 || p.amplitudes.size() < 2) {
    throw ConfigError("sweep: profile_r_mins and amplitudes need at least two entries");
  }
  const CompletenessData data = completeness_sweep(p);
  CsvWriter csv(out / "completeness.csv", {"series", "parameter", "length"});
  for (std::size_t i = 0; i < p.profile_r_mins.size(); ++i) {
    csv.row({"profile_r_min", number(p.profile_r_mins[i]), number(data.profile_lengths[i])});
  }
  for (std::size_t i = 0; i < p.amplitudes.size(); ++i) {
    csv.row({"flow_amplitude", number(p.amplitudes[i]), number(data.flow_lengths[i])});
  }
  write_field(out / "profile.csv", data.profile.field, "u");
  report.artifacts.push_back("completeness.csv");
  report.artifacts.push_back("profile.csv");
  report.statistics["coefficient"] = singular_profile_coefficient(make_geometry(p.m, p.n, Model::SphereTube));
  report.statistics["profile_lengths"] = doubles(data.profile_lengths);
  report.statistics["flow_lengths"] = doubles(data.flow_lengths);
  report.checks = assess_completeness(data, p).rows;
}

void run_dichotomy(const ScenarioConfig& config, const std::filesystem::path& out, ScenarioReport& report) {
  const json s = section(config.document, "sweep");
  reject_unknown(s, kDichotomyKeys, "sweep");
  DichotomyParams p;
  p.m = get_or(s, "m", p.m);
  p.ns = get_or(s, "ns", p.ns);
  p.r_mins = get_or(s, "r_mins", p.r_mins);
  p.inner_coefficient = get_or(s, "inner_coefficient", p.inner_coefficient);
  p.t_end = get_or(s, "t_end", p.t_end);
  p.nodes = get_or(s, "nodes", p.nodes);
  p.delta = get_or(s, "delta", p.delta);
  p.length_r0 = get_or(s, "length_r0", p.length_r0);
  p.growth_threshold = get_or(s, "growth_threshold", p.growth_threshold);
  p.workers = config.workers;
  const auto rows = dichotomy_sweep(p);
  CsvWriter csv(out / "dichotomy.csv", {"n", "r_min", "sup_ratio", "length"});
  for (const auto& r : rows) csv.row({std::to_string(r.n), number(r.r_min), number(r.sup_ratio), number(r.length)});
  report.artifacts.push_back("dichotomy.csv");
  report.checks = assess_dichotomy(rows, p).rows;
}

}  // namespace

// ------------------------------------------------------------------ config

ScenarioConfig parse_config(const json& document) {
  if (!document.is_object()) throw ConfigError("configuration must be a JSON object");
  if (!document.contains("schema_version")) throw ConfigError("missing schema_version");
  if (!document.at("schema_version").is_number_integer() || document.at("schema_version").get<int>() != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + document.at("schema_version").dump() + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
  if (!document.contains("scenario")) throw ConfigError("missing scenario");
  ScenarioConfig c;
  c.scenario = scenario_from_string(get_or<std::string>(document, "scenario", ""));
  c.seed = get_or<std::uint64_t>(document, "seed", 1);
  c.workers = get_or<int>(document, "workers", 1);
  if (c.workers < 1) throw ConfigError("workers must be at least 1");

  KeySet allowed{"schema_version", "scenario", "seed", "workers"};
  for (const auto& s : sections_by_scenario().at(c.scenario)) allowed.insert(s);
  reject_unknown(document, allowed, "configuration");
  if (document.contains("geometry")) reject_unknown(document["geometry"], kGeometryKeys, "geometry");
  if (document.contains("grid")) reject_unknown(document["grid"], kGridKeys, "grid");
  if (document.contains("flow")) reject_unknown(document["flow"], kFlowKeys, "flow");
  if (document.contains("bvp")) reject_unknown(document["bvp"], kBvpKeys, "bvp");
  if (document.contains("verify")) reject_unknown(document["verify"], kVerifyKeys, "verify");
  if (document.contains("sweep") && !document["sweep"].is_object()) throw ConfigError("sweep: expected an object");
  c.document = document;
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

ScenarioConfig default_config(Scenario scenario) {
  return parse_config({{"schema_version", kSchemaVersion}, {"scenario", to_string(scenario)}});
}

bool ScenarioReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRow& r) { return r.passed; });
}

json ScenarioReport::summary() const {
  json rows = json::array();
  for (const auto& r : checks) {
    rows.push_back({{"criterion", r.criterion},
                    {"name", r.name},
                    {"measured", r.measured},
                    {"threshold", r.threshold},
                    {"relation", r.relation},
                    {"passed", r.passed},
                    {"detail", r.detail}});
  }
  return {{"schema_version", kSchemaVersion},
          {"scenario", to_string(scenario)},
          {"passed", all_passed()},
          {"checks", rows},
          {"statistics", statistics},
          {"artifacts", artifacts}};
}

ScenarioReport run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  ScenarioReport report;
  report.scenario = config.scenario;
  json timing = json::object();
  try {
    switch (config.scenario) {
      case Scenario::Verify: run_verify(config, out_dir, report, timing); break;
      case Scenario::Flow: run_flow(config, out_dir, report); break;
      case Scenario::Bvp: run_bvp(config, out_dir, report); break;
      case Scenario::RemovabilitySweep: run_removability(config, out_dir, report); break;
      case Scenario::CompletenessSweep: run_completeness(config, out_dir, report); break;
      case Scenario::DichotomySweep: run_dichotomy(config, out_dir, report); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(to_string(config.scenario)) + ": " + e.what());
  }
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  timing["total"] = report.runtime_seconds;
  report.artifacts.push_back("summary.json");
  write_json(out_dir / "summary.json", report.summary());
  write_json(out_dir / "timing.json", timing);
  return report;
}

}  // namespace yamabe
