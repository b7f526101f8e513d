#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "yamabe/experiments.hpp"
#include "yamabe/parallel.hpp"

namespace yamabe {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Least squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double smoothstep_clamped(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

}  // namespace

CheckRow check_le(std::string criterion, std::string name, double measured, double threshold, std::string detail) {
  return {std::move(criterion), std::move(name), measured, threshold, "<=", measured <= threshold, std::move(detail)};
}

CheckRow check_ge(std::string criterion, std::string name, double measured, double threshold, std::string detail) {
  return {std::move(criterion), std::move(name), measured, threshold, ">=", measured >= threshold, std::move(detail)};
}

CheckRow check_flag(std::string criterion, std::string name, bool ok, std::string detail) {
  return {std::move(criterion), std::move(name), ok ? 1.0 : 0.0, 1.0, "flag", ok, std::move(detail)};
}

bool CriterionResult::passed() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.passed; });
}

const CheckRow& CriterionResult::headline() const {
  for (const auto& r : rows) {
    if (!r.passed) return r;
  }
  return rows.front();
}

// 1 ---------------------------------------------------------------------------

CriterionResult criterion_homothety(const HomothetyParams& p) {
  Stopwatch clock;
  CriterionResult out{"1", "homothety of the round 3-sphere", {}, 0.0};
  const ModelGeometry geom = make_geometry(3, 0, Model::SphereTube);
  auto grid = share(RadialGrid::full_chart(geom, p.nodes));
  FlowConfig cfg;
  cfg.dt_initial = p.dt_max / 2.0;
  cfg.dt_max = p.dt_max;
  const FlowState s0 = make_flow_state(geom, RadialField::sample(grid, [](double) { return 1.0; }), Gauge::base(),
                                       BoundarySpec::pole_regularity(), BoundarySpec::pole_regularity(), cfg);
  const FlowResult at_check = run(s0, cfg, p.t_check);
  const RadialField u = metric_factor(at_check.final_state);
  const double exact = 1.0 - 6.0 * p.t_check;
  double err = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) err = std::max(err, relative(u(i), exact));
  const double spread = (u.values.maxCoeff() - u.values.minCoeff()) / exact;
  out.rows.push_back(check_le("1", "relative error of u at t_check", err, p.rel_tol, "u = " + fmt(u.values.mean())));
  out.rows.push_back(check_le("1", "spatial spread of u at t_check", spread, 1e-10));

  const FlowResult to_end = run(at_check.final_state, cfg, 0.25);
  const double t_ext = to_end.extinction_time.value_or(std::numeric_limits<double>::infinity());
  out.rows.push_back(check_le("1", "|extinction time - 1/6|", std::abs(t_ext - 1.0 / 6.0), p.extinction_tol,
                              "t_ext = " + fmt(t_ext)));
  out.runtime_seconds = clock.seconds();
  out.rows.push_back(check_le("1", "runtime seconds", out.runtime_seconds, p.runtime_limit));
  return out;
}

// 2 ---------------------------------------------------------------------------

CriterionResult criterion_power_curvature(const PowerCurvatureParams& p) {
  Stopwatch clock;
  CriterionResult out{"2", "constant curvature of the power factor", {}, 0.0};
  const BarrierFactor f = BarrierFactor::power();
  for (auto [m, n] : p.pairs) {
    const ModelGeometry geom = make_geometry(m, n, Model::FlatTube);
    const double target = (m - 1.0) * (m - 2.0 - 2.0 * n);
    // The scalar-flat case m = 2n + 2 has target 0; measure against m - 1 there.
    const double scale = std::max(std::abs(target), m - 1.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < p.samples; ++k) {
      const double r = std::pow(10.0, -9.0 + 9.0 * (k + 0.5) / static_cast<double>(p.samples));
      worst = std::max(worst, std::abs(factor_curvature_at(geom, f, r) - target) / scale);
      worst = std::max(worst, std::abs(factor_curvature_simplified(geom, f, r) - target) / scale);
    }
    std::ostringstream name;
    name << "max relative deviation from " << target << " (m=" << m << ", n=" << n << ")";
    out.rows.push_back(check_le("2", name.str(), worst, p.rel_tol));
  }
  out.runtime_seconds = clock.seconds();
  return out;
}

// 3 ---------------------------------------------------------------------------

CriterionResult criterion_borderline(const BorderlineParams& p) {
  Stopwatch clock;
  CriterionResult out{"3", "borderline curvature", {}, 0.0};
  const ModelGeometry geom = make_geometry(p.m, p.n, Model::FlatTube);
  const BarrierFactor f = BarrierFactor::borderline_log();
  // Log-uniform in r over [1e-12, e^{-2}], evaluated on the log scale so the
  // cap itself is included.
  const double L_lo = 2.0;
  const double L_hi = -std::log(1e-12);
  double min_R = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.samples; ++k) {
    const double L = L_lo + (L_hi - L_lo) * static_cast<double>(k) / static_cast<double>(p.samples - 1);
    min_R = std::min(min_R, factor_curvature_log(geom, f, L));
    if (k > 0) min_R = std::min(min_R, factor_curvature_at(geom, f, std::exp(-L)));
  }
  out.rows.push_back(check_ge("3", "min curvature on [1e-12, e^-2] (strictly positive)", min_R,
                              std::numeric_limits<double>::min()));
  const double limit = 2.0 * p.n * (p.m - 1.0) / 3.0;
  const double scaled = std::cbrt(p.L_check) * factor_curvature_log(geom, f, p.L_check);
  out.rows.push_back(check_le("3", "relative deviation of L^(1/3) R from 2n(m-1)/3", relative(scaled, limit),
                              p.rel_tol, "L^(1/3) R = " + fmt(scaled)));
  out.runtime_seconds = clock.seconds();
  return out;
}

// 4 ---------------------------------------------------------------------------

CriterionResult criterion_derivatives(const DerivativeParams& p) {
  Stopwatch clock;
  CriterionResult out{"4", "closed-form derivatives of the borderline factor", {}, 0.0};
  const BarrierFactor f = BarrierFactor::borderline_log();
  auto value = [&](double r) { return f.value(r); };
  // Central differences with one Richardson step (fourth order).
  auto d1 = [&](double r, double h) { return (value(r + h) - value(r - h)) / (2.0 * h); };
  auto d2 = [&](double r, double h) { return (value(r + h) - 2.0 * value(r) + value(r - h)) / (h * h); };
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  for (std::size_t k = 0; k < p.samples; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(p.samples - 1);
    const double r = p.r_lo * std::pow(p.r_hi / p.r_lo, t);
    const double h = 4e-3 * r;
    const double fd1 = (4.0 * d1(r, h / 2) - d1(r, h)) / 3.0;
    const double fd2 = (4.0 * d2(r, h / 2) - d2(r, h)) / 3.0;
    e1 = std::max(e1, relative(f.first(r), fd1));
    e2 = std::max(e2, relative(f.second(r), fd2));
    e3 = std::max(e3, relative(f.first_squared(r), fd1 * fd1));
  }
  out.rows.push_back(check_le("4", "f' against finite differences", e1, p.fd_tol));
  out.rows.push_back(check_le("4", "f'' against finite differences", e2, p.fd_tol));
  out.rows.push_back(check_le("4", "(f')^2 against finite differences", e3, p.fd_tol));

  double route = 0.0;
  for (auto [m, n] : std::vector<std::pair<int, int>>{{4, 1}, {6, 2}, {5, 1}}) {
    for (Model model : {Model::FlatTube, Model::SphereTube}) {
      const ModelGeometry geom = make_geometry(m, n, model);
      for (std::size_t k = 0; k < p.samples; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(p.samples - 1);
        const double r = p.r_lo * std::pow(p.r_hi / p.r_lo, t);
        route = std::max(route, relative(factor_curvature_simplified(geom, f, r), factor_curvature_at(geom, f, r)));
      }
    }
  }
  out.rows.push_back(check_le("4", "collected curvature against the raw route", route, p.route_tol));
  out.runtime_seconds = clock.seconds();
  return out;
}

// 5 ---------------------------------------------------------------------------

CriterionResult criterion_barrier(const BarrierParams& p) {
  Stopwatch clock;
  CriterionResult out{"5", "discrete barrier principle", {}, 0.0};
  const ModelGeometry geom = make_geometry(5, 1, Model::FlatTube);
  const BarrierFactor f = BarrierFactor::power();
  const double eta = geom.eta_value();
  const Supersolution V{1.0, f, eta};

  const PositivityScan scan = positivity_radius(geom, f);
  out.rows.push_back(check_ge("5", "positivity radius of the tilde curvature", scan.delta, p.delta));

  FlowConfig cfg;
  cfg.dt_initial = 1e-5;
  cfg.dt_max = 1e-3;
  cfg.newton_tol = p.newton_tol;
  auto grid = share(RadialGrid::geometric(p.r_min, p.delta, p.nodes));
  const RadialField Vg = V.sample(grid);
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < p.trials; ++trial) {
    const double a = uni(rng), b = uni(rng), phase = 2.0 * std::numbers::pi * uni(rng);
    const double floor = 0.1 + 0.4 * uni(rng);
    const double s_in = 0.5 + 0.5 * uni(rng), s_out = 0.5 + 0.5 * uni(rng);
    const RadialField U0 = RadialField::sample(grid, [&](double r) {
      const double wave = 0.5 + 0.5 * a * std::sin(20.0 * b * std::log(r) + phase);
      return V(r) * (floor + (1.0 - floor) * wave);
    });
    const FlowState s = make_flow_state(geom, U0, Gauge::tilde(f), BoundarySpec::barrier_level(s_in * V(p.r_min)),
                                        BoundarySpec::constant(s_out * V(p.delta)), cfg);
    double w = -std::numeric_limits<double>::infinity();
    RunOptions opts;
    opts.on_step = [&](const FlowState& st) { w = std::max(w, (st.U.values - Vg.values).maxCoeff()); };
    run(s, cfg, p.t_end, {}, opts);
    worst = std::max(worst, w);
  }
  out.rows.push_back(check_le("5", "max(U - V) over all steps and trials", worst, p.tol_factor * p.newton_tol));

  // Data above V at the inner boundary, controlled inside the cutoff.
  const TestFunctionPhi tf(geom, f, p.epsilon, p.delta);
  const double C = fit_cutoff_constant(tf);
  cfg.dt_initial = 1e-6;
  auto fine = share(RadialGrid::geometric(p.bound_r_min, p.delta, 2 * p.nodes));
  RadialField U0 = V.sample(fine);
  U0.values *= 0.9;
  const FlowState s = make_flow_state(geom, U0, Gauge::tilde(f),
                                      BoundarySpec::barrier_level(p.inner_multiplier * V(p.bound_r_min)),
                                      BoundarySpec::constant(V(p.delta)), cfg);
  const double Q = (geom.m() - 1.0) * p.epsilon * C / eta;
  double excess = -std::numeric_limits<double>::infinity();
  RunOptions opts;
  opts.on_step = [&](const FlowState& st) {
    const double w = std::max(0.0, barrier_monitor(st, V, tf));
    excess = std::max(excess, w - power_bound(eta, Q, 0.0, st.t));
  };
  run(s, cfg, p.t_end, {}, opts);
  out.rows.push_back(check_flag("5", "cutoff support clears the inner boundary", tf.rho(p.bound_r_min) > 2.0,
                                "rho(r_min) = " + fmt(tf.rho(p.bound_r_min))));
  out.rows.push_back(check_le("5", "max of w(t) - ((m-1) eps C t / eta)^eta", excess, p.bound_slack,
                              "C = " + fmt(C)));
  out.runtime_seconds = clock.seconds();
  return out;
}

// 6 ---------------------------------------------------------------------------

std::vector<RemovabilityRow> removability_sweep(const RemovabilityParams& p) {
  const ModelGeometry geom = make_geometry(3, 0, Model::SphereTube);
  const double eta = geom.eta_value();
  const double amp = p.initial_amplitude;
  auto u0 = [amp](double r) { return 1.0 + amp * std::cos(r); };

  FlowConfig cfg;
  cfg.dt_initial = 1e-6;
  cfg.dt_max = p.dt_max;
  const double t_ref = p.t_probe * 1.2;

  // Smooth reference on the whole sphere, traced at every truncation radius.
  auto ref_grid = share(RadialGrid::full_chart(geom, p.reference_nodes));
  const RadialField ref0 = RadialField::sample(ref_grid, [&](double r) { return std::pow(u0(r), eta); });
  std::vector<BoundaryTrace> traces(p.r_mins.size());
  for (std::size_t k = 0; k < p.r_mins.size(); ++k) traces[k].push(0.0, ref0.at(p.r_mins[k]));
  RunOptions opts;
  opts.on_step = [&](const FlowState& s) {
    for (std::size_t k = 0; k < p.r_mins.size(); ++k) traces[k].push(s.t, s.U.at(p.r_mins[k]));
  };
  run(make_flow_state(geom, ref0, Gauge::base(), BoundarySpec::pole_regularity(), BoundarySpec::pole_regularity(),
                      cfg),
      cfg, t_ref, {}, opts);

  std::vector<double> Ks{1.0};
  for (double K : p.multipliers) {
    if (K != 1.0) Ks.push_back(K);
  }
  const std::size_t nK = Ks.size();
  struct Job {
    double u_probe;
    double sup;
  };
  const auto jobs = parallel_map(p.r_mins.size() * nK, p.workers, [&](std::size_t idx) {
    const std::size_t k = idx / nK;
    const double K = Ks[idx % nK];
    const double r_min = p.r_mins[k];
    auto grid = share(RadialGrid::geometric(r_min, geom.domain_max(), p.nodes, true));
    const RadialField u_init = RadialField::sample(grid, u0);
    const RadialField U0(grid, u_init.values.array().pow(eta).matrix());
    const BoundarySpec inner =
        K == 1.0 ? BoundarySpec::restriction(traces[k]) : BoundarySpec::inflated(traces[k], K, eta);
    const FlowResult res = run(make_flow_state(geom, U0, Gauge::base(), inner, BoundarySpec::pole_regularity(), cfg),
                               cfg, p.t_probe);
    return Job{metric_factor(res.final_state).at(p.probe_r), sup_ratio(res.final_state, u_init, p.delta)};
  });

  std::vector<RemovabilityRow> rows;
  for (std::size_t k = 0; k < p.r_mins.size(); ++k) {
    const double base = jobs[k * nK].u_probe;
    for (std::size_t j = 0; j < nK; ++j) {
      const Job& job = jobs[k * nK + j];
      rows.push_back({p.r_mins[k], Ks[j], job.u_probe, std::abs(job.u_probe / base - 1.0), job.sup});
    }
  }
  return rows;
}

CriterionResult assess_removability(const std::vector<RemovabilityRow>& rows, const RemovabilityParams& p) {
  CriterionResult out{"6", "removability of a point on the 3-sphere", {}, 0.0};
  std::vector<double> dev;
  for (const auto& r : rows) {
    if (r.K == p.deviation_multiplier) dev.push_back(r.deviation);
  }
  bool monotone = dev.size() >= 2;
  std::string curve;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    if (i > 0 && !(dev[i] < dev[i - 1])) monotone = false;
    curve += (i ? " " : "") + fmt(dev[i]);
  }
  out.rows.push_back(check_flag("6", "deviation decreases with r_min", monotone, "deviations: " + curve));
  out.rows.push_back(check_le("6", "relative deviation of u at the probe, smallest r_min",
                              dev.empty() ? 1.0 : dev.back(), p.dev_tol));
  const double r_last = p.r_mins.back();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::string sups;
  for (const auto& r : rows) {
    if (r.r_min != r_last) continue;
    if (std::find(p.multipliers.begin(), p.multipliers.end(), r.K) == p.multipliers.end()) continue;
    lo = std::min(lo, r.sup_ratio);
    hi = std::max(hi, r.sup_ratio);
    sups += (sups.empty() ? "" : " ") + fmt(r.sup_ratio);
  }
  out.rows.push_back(check_le("6", "relative spread of sup_ratio across K", (hi - lo) / lo, p.sup_rel_tol,
                              "sup_ratio: " + sups));
  return out;
}

CriterionResult criterion_removability(const RemovabilityParams& p) {
  Stopwatch clock;
  CriterionResult out = assess_removability(removability_sweep(p), p);
  out.runtime_seconds = clock.seconds();
  out.rows.push_back(check_le("6", "runtime seconds", out.runtime_seconds, p.runtime_limit));
  return out;
}

// 7 ---------------------------------------------------------------------------

CompletenessData completeness_sweep(const CompletenessParams& p) {
  const ModelGeometry geom = make_geometry(p.m, p.n, Model::SphereTube);
  const double eta = geom.eta_value();
  CompletenessData data;
  data.profile = singular_yamabe_profile(geom, p.profile_r_min);
  data.profile_lengths = parallel_map(p.profile_r_mins.size(), p.workers, [&](std::size_t k) {
    const EllipticSolution s = singular_yamabe_profile(geom, p.profile_r_mins[k]);
    return completeness_length(s.field, p.length_r0);
  });
  data.flow_lengths = parallel_map(p.amplitudes.size(), p.workers, [&](std::size_t k) {
    FlowConfig cfg;
    cfg.dt_initial = 1e-6;
    cfg.dt_max = 5e-4;
    auto grid = share(RadialGrid::geometric(p.flow_r_min, geom.domain_max(), p.flow_nodes, true));
    const FlowState s = make_flow_state(geom, RadialField::sample(grid, [](double) { return 1.0; }), Gauge::base(),
                                        BoundarySpec::constant(std::pow(p.amplitudes[k], eta)),
                                        BoundarySpec::pole_regularity(), cfg);
    return completeness_length(run(s, cfg, p.flow_t_end).final_state, p.flow_r0);
  });
  return data;
}

CriterionResult assess_completeness(const CompletenessData& data, const CompletenessParams& p) {
  CriterionResult out{"7", "complete side: singular profile and growing length", {}, 0.0};
  const ModelGeometry geom = make_geometry(p.m, p.n, Model::SphereTube);
  const double k = singular_profile_coefficient(geom);
  const double r = p.asymptote_r;
  const double scaled = r * r * data.profile.field.at(r);
  out.rows.push_back(check_le("7", "relative deviation of r^2 u from k at the probe radius", relative(scaled, k),
                              p.asymptote_tol, "r^2 u = " + fmt(scaled) + ", k = " + fmt(k)));

  std::vector<double> slopes;
  for (std::size_t i = 1; i < p.profile_r_mins.size(); ++i) {
    slopes.push_back((data.profile_lengths[i] - data.profile_lengths[i - 1]) /
                     std::log(p.profile_r_mins[i - 1] / p.profile_r_mins[i]));
  }
  const double smin = *std::min_element(slopes.begin(), slopes.end());
  const double smax = *std::max_element(slopes.begin(), slopes.end());
  std::string s_text;
  for (double s : slopes) s_text += (s_text.empty() ? "" : " ") + fmt(s);
  out.rows.push_back(check_le("7", "relative spread of d length / d(-log r_min)", (smax - smin) / smin, p.slope_tol,
                              "slopes: " + s_text));

  bool growing = true;
  bool saturated = false;
  std::string l_text;
  for (std::size_t i = 0; i < data.flow_lengths.size(); ++i) {
    l_text += (l_text.empty() ? "" : " ") + fmt(data.flow_lengths[i]);
    if (i == 0) continue;
    const double gain = data.flow_lengths[i] - data.flow_lengths[i - 1];
    if (!(gain > 0.0)) growing = false;
    if (gain <= p.saturation_tol * data.flow_lengths[i - 1]) saturated = true;
  }
  out.rows.push_back(check_flag("7", "completeness length grows with the inner amplitude", growing, "lengths: " + l_text));
  out.rows.push_back(check_flag("7", "no saturation flag", !saturated));
  return out;
}

CriterionResult criterion_completeness(const CompletenessParams& p) {
  Stopwatch clock;
  CriterionResult out = assess_completeness(completeness_sweep(p), p);
  out.runtime_seconds = clock.seconds();
  return out;
}

std::vector<DichotomyRow> dichotomy_sweep(const DichotomyParams& p) {
  const std::size_t per_n = p.r_mins.size();
  return parallel_map(p.ns.size() * per_n, p.workers, [&](std::size_t idx) {
    const int n = p.ns[idx / per_n];
    const double r_min = p.r_mins[idx % per_n];
    const ModelGeometry geom = make_geometry(p.m, n, Model::SphereTube);
    const double eta = geom.eta_value();
    FlowConfig cfg;
    cfg.dt_initial = 1e-8;
    cfg.dt_max = 5e-4;
    auto grid = share(RadialGrid::geometric(r_min, geom.domain_max(), p.nodes, true));
    const RadialField ones = RadialField::sample(grid, [](double) { return 1.0; });
    const FlowState s = make_flow_state(
        geom, ones, Gauge::base(), BoundarySpec::constant(std::pow(p.inner_coefficient / (r_min * r_min), eta)),
        BoundarySpec::pole_regularity(), cfg);
    const FlowState end = run(s, cfg, p.t_end).final_state;
    return DichotomyRow{n, r_min, sup_ratio(end, ones, p.delta, std::sqrt(r_min)),
                        completeness_length(end, p.length_r0)};
  });
}

CriterionResult assess_dichotomy(const std::vector<DichotomyRow>& rows, const DichotomyParams& p) {
  CriterionResult out{"dichotomy", "bounded versus growing response to singular inner data", {}, 0.0};
  for (int n : p.ns) {
    std::vector<double> sups;
    for (const auto& r : rows) {
      if (r.n == n) sups.push_back(r.sup_ratio);
    }
    if (sups.size() < 2) continue;
    const double growth = sups.back() / sups.front();
    const ModelGeometry geom = make_geometry(p.m, n, Model::SphereTube);
    const std::string tag = " (m=" + std::to_string(p.m) + ", n=" + std::to_string(n) + ")";
    if (geom.complete_regime()) {
      out.rows.push_back(check_ge("dichotomy", "sup ratio growth" + tag, growth, p.growth_threshold));
    } else {
      out.rows.push_back(check_le("dichotomy", "sup ratio growth" + tag, growth, p.growth_threshold));
    }
  }
  return out;
}

// 8 ---------------------------------------------------------------------------

CriterionResult criterion_appendix(const AppendixParams& p) {
  Stopwatch clock;
  CriterionResult out{"8", "comparison bounds", {}, 0.0};
  auto sample = [&](const std::function<double(double)>& fn, double T) {
    TimeSeries s;
    const int steps = static_cast<int>(std::llround(T / p.dt));
    for (int i = 0; i <= steps; ++i) {
      s.times.push_back(i * p.dt);
      s.values.push_back(fn(i * p.dt));
    }
    return s;
  };

  bool gronwall_ok = true;
  for (auto [a, b, J0] : std::vector<std::array<double, 3>>{{1.0, 0.0, 1.0}, {2.0, 4.0, 0.0}, {0.5, 1.0, 2.0}}) {
    auto exact = [=](double t) { return gronwall_bound(a, b, J0, t); };
    const DiniResult r = dini_check(sample(exact, 1.0), [=](double, double v) { return a * v + b; }, p.slack, exact);
    gronwall_ok = gronwall_ok && r.passed;
  }
  out.rows.push_back(check_flag("8", "linear growth equality cases pass the Dini check", gronwall_ok));

  bool power_ok = true;
  for (auto [eta, Q, v0] :
       std::vector<std::array<double, 3>>{{2.0, 1.0, 0.0}, {1.0, 1.0, 0.0}, {3.0, 0.5, 0.5}, {0.5, 1.0, 1.0}}) {
    auto exact = [=](double t) { return power_bound(eta, Q, v0, t); };
    const DiniResult r = dini_check(
        sample(exact, 1.0), [=](double, double v) { return v > 0.0 ? eta * Q * std::pow(v, 1.0 - 1.0 / eta) : 0.0; },
        p.slack, exact);
    power_ok = power_ok && r.passed;
  }
  out.rows.push_back(check_flag("8", "power growth equality cases pass the Dini check", power_ok));

  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> expo(-3.0, 3.0);
  const std::array<double, 4> etas{0.25, 0.5, 1.0, 1.5};
  std::size_t failures = 0;
  for (std::size_t i = 0; i < p.pairs; ++i) {
    double a = std::pow(10.0, expo(rng));
    double b = std::pow(10.0, expo(rng));
    if (a > b) std::swap(a, b);
    const double eta = etas[i % etas.size()];
    const PowerDifference d = power_difference(a, b, eta);
    const double tol = 1e-12 * std::max({std::pow(b, eta), d.bound_by_b, 1e-300});
    if (d.difference > d.bound_by_a + tol || d.difference > d.bound_by_b + tol) ++failures;
  }
  out.rows.push_back(check_le("8", "violations of the power difference inequalities", static_cast<double>(failures), 0.0,
                              std::to_string(p.pairs) + " random pairs"));

  const ModelGeometry geom = make_geometry(5, 1, Model::FlatTube);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double r_lo = 0.05, r_hi = 1.0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < p.green_trials; ++trial) {
    std::array<double, 9> c{};
    for (double& x : c) x = normal(rng);
    const double a = 0.1 + 0.2 * uni(rng), w = 0.05 + 0.1 * uni(rng), b = 0.6 + 0.2 * uni(rng);
    auto f = [c, r_lo, r_hi](double r) {
      const double s = std::numbers::pi * (r - r_lo) / (r_hi - r_lo);
      double v = c[0];
      for (int k = 1; k <= 4; ++k) v += c[2 * k - 1] * std::cos(k * s) + c[2 * k] * std::sin(k * s);
      return v;
    };
    auto phi = [=](double r) { return smoothstep_clamped((r - a) / w) * (1.0 - smoothstep_clamped((r - b) / w)); };
    worst = std::max(worst, green_defect_extrapolated(geom, f, phi, r_lo, r_hi, p.green_nodes));
  }
  out.rows.push_back(check_le("8", "largest extrapolated Green defect", worst, p.green_tol,
                              std::to_string(p.green_trials) + " random fields"));
  out.runtime_seconds = clock.seconds();
  return out;
}

// 9 ---------------------------------------------------------------------------

CriterionResult criterion_annulus(const AnnulusParams& p) {
  Stopwatch clock;
  CriterionResult out{"9", "annular cutoff scaling", {}, 0.0};
  for (auto [m, n] : p.pairs) {
    const ModelGeometry geom = make_geometry(m, n, Model::SphereTube);
    std::vector<double> x, y;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double eps : p.eps) {
      const AnnulusTestFunction tf = annulus_test_function(geom, eps);
      x.push_back(std::log(eps));
      y.push_back(std::log(tf.positive_lap_mass()));
      lo = std::min(lo, tf.max_lap() * eps * eps);
      hi = std::max(hi, tf.max_lap() * eps * eps);
    }
    const double slope = fit_slope(x, y);
    const double expected = m - n - 2.0;
    std::ostringstream tag;
    tag << " (m=" << m << ", n=" << n << ")";
    out.rows.push_back(check_le("9", "|slope - (m-n-2)|" + tag.str(), std::abs(slope - expected), p.slope_tol,
                                "slope = " + fmt(slope)));
    out.rows.push_back(check_le("9", "spread of eps^2 max Laplacian" + tag.str(), hi / lo, p.max_lap_spread));
  }
  out.runtime_seconds = clock.seconds();
  return out;
}

// 10 --------------------------------------------------------------------------

CriterionResult criterion_eigenvalue(const EigenParams& p) {
  Stopwatch clock;
  CriterionResult out{"10", "Dirichlet eigenvalue growth", {}, 0.0};
  const ModelGeometry geom = make_geometry(3, 0, Model::FlatTube);
  EllipticOptions opts;
  opts.nodes = p.nodes;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const EigenResult e = lowest_dirichlet_eigenvalue(geom, p.eps, opts);
  out.rows.push_back(check_le("10", "relative error against pi^2/eps^2", relative(e.value, pi2 / (p.eps * p.eps)),
                              p.rel_tol, "lambda = " + fmt(e.value)));
  std::vector<double> x, y;
  bool monotone = true;
  double prev = 0.0;
  for (std::size_t k = 0; k < p.sweep.size(); ++k) {
    const double lam = lowest_dirichlet_eigenvalue(geom, p.sweep[k], opts).value;
    if (k > 0 && p.sweep[k] < p.sweep[k - 1] && !(lam > prev)) monotone = false;
    prev = lam;
    x.push_back(std::log(p.sweep[k]));
    y.push_back(std::log(lam));
  }
  out.rows.push_back(check_flag("10", "eigenvalue increases as eps decreases", monotone));
  const double slope = fit_slope(x, y);
  out.rows.push_back(
      check_le("10", "|log-log slope + 2|", std::abs(slope + 2.0), p.slope_tol, "slope = " + fmt(slope)));
  out.runtime_seconds = clock.seconds();
  return out;
}

// 11 --------------------------------------------------------------------------

CriterionResult criterion_gauge(const GaugeParams& p) {
  Stopwatch clock;
  CriterionResult out{"11", "gauge covariance", {}, 0.0};
  const ModelGeometry geom = make_geometry(p.m, p.n, Model::FlatTube);
  const BarrierFactor f = BarrierFactor::power();
  const double eta = geom.eta_value();
  auto u0 = [](double r) { return 1.0 + 0.5 * std::sin(6.0 * r) + 2.0 * r * r; };
  auto solve = [&](Eigen::Index nodes, bool tilde) {
    auto grid = share(RadialGrid::geometric(p.r_min, p.r_max, nodes));
    FlowConfig cfg;
    cfg.dt_initial = cfg.dt_max = cfg.dt_min = p.dt;
    const RadialField u = RadialField::sample(grid, u0);
    auto level = [&](double r) { return tilde ? std::pow(u0(r) / f.value(r), eta) : std::pow(u0(r), eta); };
    const RadialField U = tilde ? to_tilde_gauge(u, f, eta) : RadialField(grid, u.values.array().pow(eta).matrix());
    const FlowState s = make_flow_state(geom, U, tilde ? Gauge::tilde(f) : Gauge::base(),
                                        BoundarySpec::constant(level(p.r_min)), BoundarySpec::constant(level(p.r_max)),
                                        cfg);
    return metric_factor(run(s, cfg, p.t_end).final_state);
  };
  const RadialField base = solve(p.nodes, false);
  const RadialField tilde = solve(p.nodes, true);
  const RadialField fine = solve(2 * p.nodes - 1, false);
  double gauge_gap = 0.0, self = 0.0;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    gauge_gap = std::max(gauge_gap, relative(tilde(i), base(i)));
    self = std::max(self, relative(fine(2 * i), base(i)));
  }
  out.rows.push_back(check_le("11", "gauge gap / self-convergence error", gauge_gap / self, p.factor,
                              "gap = " + fmt(gauge_gap) + ", self = " + fmt(self)));
  out.runtime_seconds = clock.seconds();
  return out;
}

}  // namespace yamabe
