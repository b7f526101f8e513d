#include "yamabe/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace yamabe {

void BoundaryTrace::push(double t, double value) {
  if (!times.empty() && t <= times.back()) {
    if (t == times.back()) {
      values.back() = value;
      return;
    }
    throw DomainError("boundary trace times must increase");
  }
  times.push_back(t);
  values.push_back(value);
}

double BoundaryTrace::operator()(double t) const {
  if (times.empty()) throw DomainError("empty boundary trace");
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  const double s = (t - times[i]) / (times[i + 1] - times[i]);
  return (1.0 - s) * values[i] + s * values[i + 1];
}

BoundarySpec BoundarySpec::dirichlet(std::function<double(double)> profile) {
  return {Kind::Dirichlet, std::move(profile), 1.0};
}

BoundarySpec BoundarySpec::constant(double value) {
  if (!(value > 0.0)) throw DomainError("Dirichlet value must be positive");
  return dirichlet([value](double) { return value; });
}

BoundarySpec BoundarySpec::restriction(BoundaryTrace trace) {
  return {Kind::Restriction, [trace = std::move(trace)](double t) { return trace(t); }, 1.0};
}

BoundarySpec BoundarySpec::inflated(BoundaryTrace trace, double K, double eta) {
  if (!(K >= 1.0)) throw DomainError("inflation multiplier must satisfy K >= 1");
  const double scale = std::pow(K, eta);
  return {Kind::Inflated, [trace = std::move(trace), scale](double t) { return scale * trace(t); }, K};
}

BoundarySpec BoundarySpec::barrier_level(double value) {
  if (!(value > 0.0)) throw DomainError("barrier level must be positive");
  return {Kind::BarrierLevel, [value](double) { return value; }, 1.0};
}

double BoundarySpec::value(double t) const {
  if (!prescribes_value() || !profile) throw DomainError("boundary kind has no prescribed value");
  const double v = profile(t);
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("boundary profile must stay positive");
  return v;
}

const char* to_string(BoundarySpec::Kind kind) {
  switch (kind) {
    case BoundarySpec::Kind::PoleRegularity: return "pole_regularity";
    case BoundarySpec::Kind::ZeroFlux: return "zero_flux";
    case BoundarySpec::Kind::Dirichlet: return "dirichlet";
    case BoundarySpec::Kind::Restriction: return "restriction";
    case BoundarySpec::Kind::Inflated: return "inflated";
    case BoundarySpec::Kind::BarrierLevel: return "barrier_level";
  }
  return "?";
}

void FlowConfig::validate() const {
  if (!(dt_initial > 0 && dt_max > 0 && dt_min > 0 && newton_tol > 0 && newton_max_iter > 0 &&
        extinction_floor > 0 && growth >= 1.0)) {
    throw ConfigError("flow config parameters must be positive");
  }
  if (dt_min > dt_max) throw ConfigError("flow config needs dt_min <= dt_max");
}

namespace {

EndRule end_rule(const ModelGeometry& geom, const RadialGrid& grid, const BoundarySpec& bc, bool inner) {
  using K = BoundarySpec::Kind;
  if (bc.kind == K::ZeroFlux) return {EndRule::Kind::Mirror, 1};
  if (bc.kind == K::PoleRegularity) {
    if (inner) {
      if (!grid.inner_reflect) throw DomainError("inner pole regularity needs a grid centred on N");
      return {EndRule::Kind::ReflectAboutZero, 1};
    }
    if (!grid.pole_flag) throw DomainError("outer pole regularity needs a grid ending at the model pole");
    return natural_end_rules(geom, grid).second;
  }
  return {EndRule::Kind::OneSided, 1};  // row replaced by the Dirichlet condition
}

// Coefficients of  -R U + c * scale * (U'' + drift U')  in the active gauge.
struct GaugeOperator {
  RadialStencil stencil;  // drift stencil, unscaled
  Eigen::VectorXd scale;
  Eigen::VectorXd curvature;
  // Converts U to u^eta, the quantity the extinction floor applies to.
  Eigen::VectorXd level_weight;
};

GaugeOperator gauge_operator(const FlowState& s) {
  const RadialGrid& grid = *s.grid();
  const Eigen::Index n = grid.size();
  Eigen::VectorXd drift = sampled_drift(s.geom, grid);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd curvature(n);
  Eigen::VectorXd level_weight = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) curvature(i) = s.geom.base_scalar_curvature(grid.nodes(i));
  if (s.gauge.kind == GaugeKind::BarrierTilde) {
    const BarrierFactor& f = *s.gauge.factor;
    const double m = s.geom.m();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = grid.nodes(i);
      const double fv = f.value(r);
      // Delta_{f g} U = f^{-1} (U'' + A U') + (m-2)/2 f^{-2} f' U'
      drift(i) += 0.5 * (m - 2.0) * f.first(r) / fv;
      scale(i) = 1.0 / fv;
      curvature(i) = factor_curvature_at(s.geom, f, r);
      level_weight(i) = std::pow(fv, s.geom.eta_value());
    }
  }
  const EndRule inner = end_rule(s.geom, grid, s.inner_bc, true);
  const EndRule outer = end_rule(s.geom, grid, s.outer_bc, false);
  return {drift_stencil(grid, drift, inner, outer), std::move(scale), std::move(curvature), std::move(level_weight)};
}

struct Attempt {
  bool converged = false;
  Eigen::VectorXd U;
  int iterations = 0;
};

// Backward Euler from s over dt for W = U^{1+1/eta}. Newton runs on U: the
// map U -> W is convex, so the iteration approaches small roots from above
// without overshooting (the regime near extinction).
Attempt solve_backward_euler(const FlowState& s, const GaugeOperator& op, double dt, const FlowConfig& cfg) {
  const Eigen::Index n = s.U.size();
  const double eta = s.geom.eta_value();
  const double power = 1.0 + 1.0 / eta;
  const double c = (s.geom.m() - 1.0) / eta;
  const double gain = dt * (eta + 1.0);
  const double t_new = s.t + dt;
  const Tridiagonal& L = op.stencil.tri;

  const Eigen::ArrayXd W_old = s.U.values.array().pow(power);
  Eigen::ArrayXd U = s.U.values.array();

  const bool inner_fixed = s.inner_bc.prescribes_value();
  const bool outer_fixed = s.outer_bc.prescribes_value();
  double U_inner = 0.0, U_outer = 0.0;
  if (inner_fixed) U(0) = U_inner = s.inner_bc.value(t_new);
  if (outer_fixed) U(n - 1) = U_outer = s.outer_bc.value(t_new);

  Attempt out;
  auto accept = [&](const Eigen::ArrayXd& Uv, int it) {
    out.converged = true;
    out.U = Uv.matrix();
    out.iterations = it;
  };

  auto residual = [&](const Eigen::ArrayXd& Uv) {
    const Eigen::ArrayXd LU = op.stencil.apply(Uv.matrix()).array();
    Eigen::ArrayXd F = Uv.pow(power) - W_old - gain * (-op.curvature.array() * Uv + c * op.scale.array() * LU);
    if (inner_fixed) F(0) = (Uv(0) - U_inner) * power * std::pow(U_inner, power - 1.0);
    if (outer_fixed) F(n - 1) = (Uv(n - 1) - U_outer) * power * std::pow(U_outer, power - 1.0);
    return F;
  };
  // Residual relative to the local size of W, so that nodes where U is
  // small (near N, or close to extinction) are resolved as well.
  auto size_of = [&](const Eigen::ArrayXd& Uv, const Eigen::ArrayXd& F) {
    return (F.abs() / (Uv.pow(power) + W_old)).maxCoeff();
  };

  Eigen::ArrayXd F = residual(U);
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    if (!F.allFinite()) return out;
    const double f0 = size_of(U, F);
    if (f0 <= cfg.newton_tol) {
      accept(U, it);
      return out;
    }
    Tridiagonal J(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double k = gain * c * op.scale(i);
      J.diag(i) = power * std::pow(U(i), power - 1.0) + gain * op.curvature(i) - k * L.diag(i);
      if (i > 0) J.lower(i) = -k * L.lower(i);
      if (i + 1 < n) J.upper(i) = -k * L.upper(i);
    }
    if (inner_fixed) {
      J.diag(0) = power * std::pow(U_inner, power - 1.0);
      J.upper(0) = 0.0;
    }
    if (outer_fixed) {
      J.diag(n - 1) = power * std::pow(U_outer, power - 1.0);
      J.lower(n - 1) = 0.0;
    }
    Eigen::ArrayXd delta;
    try {
      delta = J.solve(-F.matrix()).array();
    } catch (const NoConvergence&) {
      return out;
    }
    if (!delta.allFinite()) return out;
    // A full Newton update that is tiny relative to U counts as converged
    // even when rounding keeps the residual above tolerance.
    if ((U + delta > 0.0).all() && (delta.abs() / U).maxCoeff() <= cfg.newton_tol) {
      accept(U + delta, it + 1);
      return out;
    }
    // Damping: stay positive, then backtrack on the residual.
    double lambda = 1.0;
    Eigen::ArrayXd trial;
    Eigen::ArrayXd F_trial;
    bool positive = false;
    for (int k = 0; k < 60; ++k) {
      trial = U + lambda * delta;
      positive = (trial > 0.0).all();
      if (positive) {
        F_trial = residual(trial);
        if (F_trial.allFinite() && (size_of(trial, F_trial) < f0 || k >= 8)) break;
      }
      lambda *= 0.5;
    }
    if (!positive || F_trial.size() != n) return out;
    U = trial;
    F = F_trial;
  }
  if (F.allFinite() && size_of(U, F) <= cfg.newton_tol) accept(U, cfg.newton_max_iter);
  return out;
}

}  // namespace

FlowState make_flow_state(const ModelGeometry& geom, RadialField U0, Gauge gauge, BoundarySpec inner,
                          BoundarySpec outer, const FlowConfig& config) {
  config.validate();
  require_positive(U0, "initial data U0");
  if (gauge.kind == GaugeKind::BarrierTilde) {
    if (!gauge.factor) throw DomainError("tilde gauge needs a barrier factor");
    if (inner.kind == BoundarySpec::Kind::PoleRegularity || outer.kind == BoundarySpec::Kind::PoleRegularity) {
      throw DomainError("tilde gauge runs need explicit boundary data");
    }
    for (Eigen::Index i = 0; i < U0.size(); ++i) gauge.factor->check(U0.r()(i));
  }
  FlowState s{0.0, std::move(U0), std::move(gauge), geom, std::move(inner), std::move(outer),
              config.dt_initial, FlowStatus::Running, 0};
  // Surfaces grid/boundary mismatches before the first step.
  (void)gauge_operator(s);
  return s;
}

FlowState step_until(const FlowState& state, const FlowConfig& config, double t_limit) {
  if (state.status == FlowStatus::Extinct) return state;
  const GaugeOperator op = gauge_operator(state);
  double dt = std::min(state.dt > 0.0 ? state.dt : config.dt_initial, config.dt_max);
  const double proposed = dt;
  bool clipped = false;
  if (state.t + dt >= t_limit) {
    dt = t_limit - state.t;
    clipped = true;
  }
  if (!(dt > 0.0)) return state;

  const double floor = config.extinction_floor;
  for (;;) {
    const Attempt a = solve_backward_euler(state, op, dt, config);
    if (a.converged) {
      const Eigen::VectorXd level = a.U.cwiseProduct(op.level_weight);
      const double lo = level.minCoeff();
      const double hi = level.maxCoeff();
      if (lo > floor) {
        FlowState next = state;
        next.t = clipped && dt == t_limit - state.t ? t_limit : state.t + dt;
        next.U = RadialField(state.U.grid, a.U);
        next.steps += 1;
        const double base = clipped ? proposed : dt;
        next.dt = std::min(config.dt_max, base * (a.iterations <= 8 ? config.growth : 1.0));
        return next;
      }
      if (hi <= floor || dt <= config.dt_min) {
        FlowState next = state;
        next.t = state.t + dt;
        next.U = RadialField(state.U.grid, a.U.cwiseMax(std::numeric_limits<double>::min()));
        next.status = FlowStatus::Extinct;
        next.steps += 1;
        return next;
      }
    }
    if (dt <= config.dt_min) {
      std::ostringstream os;
      os << "Newton iteration failed at t = " << state.t << " with dt = " << dt;
      throw NewtonDivergence(os.str(), state);
    }
    dt = std::max(0.5 * dt, config.dt_min);
    clipped = false;
  }
}

FlowState step(const FlowState& state, const FlowConfig& config) {
  return step_until(state, config, std::numeric_limits<double>::infinity());
}

const MonitorSeries& FlowResult::monitor(const std::string& name) const {
  for (const auto& s : series) {
    if (s.name == name) return s;
  }
  throw DomainError("no monitor named " + name);
}

FlowResult run(const FlowState& state, const FlowConfig& config, double t_end, const std::vector<Monitor>& monitors,
               const RunOptions& options) {
  config.validate();
  FlowResult result{{}, {}, state, std::nullopt};
  if (t_end <= state.t) return result;
  for (const auto& m : monitors) result.series.push_back({m.name, {}, {}});

  auto sample = [&](const FlowState& s) {
    for (std::size_t k = 0; k < monitors.size(); ++k) {
      result.series[k].times.push_back(s.t);
      result.series[k].values.push_back(monitors[k].fn(s));
    }
    if (options.keep_snapshots) result.snapshots.push_back(s);
  };

  FlowState s = state;
  sample(s);
  const double interval = options.output_interval > 0.0 ? options.output_interval : (t_end - state.t);
  long k = 1;
  double next_output = std::min(t_end, state.t + interval);
  while (s.t < t_end) {
    try {
      s = step_until(s, config, next_output);
    } catch (const FlowError&) {
      throw;
    }
    if (options.on_step) options.on_step(s);
    if (s.status == FlowStatus::Extinct) {
      result.extinction_time = s.t;
      sample(s);
      break;
    }
    if (s.t >= next_output) {
      sample(s);
      ++k;
      next_output = std::min(t_end, state.t + static_cast<double>(k) * interval);
    }
  }
  result.final_state = s;
  return result;
}

RadialField metric_factor(const FlowState& state) {
  const double eta = state.geom.eta_value();
  if (state.gauge.kind == GaugeKind::BaseMetric) {
    return RadialField(state.U.grid, state.U.values.array().pow(1.0 / eta).matrix());
  }
  return from_tilde_gauge(state.U, *state.gauge.factor, eta);
}

double barrier_monitor(const FlowState& state, const Supersolution& V, const TestFunctionPhi& tf) {
  if (state.gauge.kind != GaugeKind::BarrierTilde || state.gauge.factor->kind() != V.factor.kind() ||
      V.factor.kind() != tf.factor().kind()) {
    throw DomainError("barrier_monitor needs a tilde-gauge state with the supersolution's factor");
  }
  double w = 0.0;
  const auto& r = state.U.r();
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (r(i) >= tf.delta()) continue;
    w = std::max(w, (state.U(i) - V(r(i))) * tf.phi(r(i)));
  }
  return w;
}

double sup_ratio(const FlowState& state, const RadialField& u_initial, double delta, double r_lower) {
  const RadialField u = metric_factor(state);
  if (u_initial.size() != u.size()) throw DomainError("sup_ratio: initial field on a different grid");
  double sup = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double r = u.r()(i);
    if (r < delta && r >= r_lower) sup = std::max(sup, u(i) / u_initial(i));
  }
  return sup;
}

double completeness_length(const RadialField& u, double r0) {
  require_positive(u, "metric factor u");
  const auto& r = u.r();
  if (r0 < r(0) || r0 > r(r.size() - 1)) throw DomainError("completeness_length: r0 outside the grid");
  double length = 0.0;
  for (Eigen::Index i = 1; i < r.size() && r(i - 1) < r0; ++i) {
    const double hi = std::min(r(i), r0);
    const double u_hi = hi == r(i) ? u(i) : u.at(hi);
    length += 0.5 * (std::sqrt(u(i - 1)) + std::sqrt(u_hi)) * (hi - r(i - 1));
  }
  return length;
}

double completeness_length(const FlowState& state, double r0) {
  return completeness_length(metric_factor(state), r0);
}

}  // namespace yamabe
