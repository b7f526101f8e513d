#pragma once

// Radially reduced Yamabe flow g(t) = U^{1/eta} h in a fixed background h
// (h = g0, or h = f g0 for a barrier factor f), stepped in the conservative
// variable W = U^{1+1/eta}:
//
//   1/(eta+1) dW/dt = -R_h U + (m-1)/eta Delta_h U.
//
// Backward Euler with damped Newton and tridiagonal solves; step size halves
// on failure and grows at most twofold after success.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "yamabe/barrier.hpp"
#include "yamabe/model_geometry.hpp"

namespace yamabe {

enum class GaugeKind { BaseMetric, BarrierTilde };

struct Gauge {
  GaugeKind kind = GaugeKind::BaseMetric;
  std::optional<BarrierFactor> factor;

  static Gauge base() { return {}; }
  static Gauge tilde(const BarrierFactor& f) { return {GaugeKind::BarrierTilde, f}; }
};

/// Time series of a reference flow's U at one radius; linear in time.
struct BoundaryTrace {
  std::vector<double> times;
  std::vector<double> values;

  void push(double t, double value);
  double operator()(double t) const;
};

struct BoundarySpec {
  enum class Kind { PoleRegularity, ZeroFlux, Dirichlet, Restriction, Inflated, BarrierLevel };

  Kind kind = Kind::PoleRegularity;
  /// U(t) at the boundary node for the Dirichlet-type kinds.
  std::function<double(double)> profile;
  /// Metric multiplier K for Inflated (U scales by K^eta).
  double multiplier = 1.0;

  static BoundarySpec pole_regularity() { return {}; }
  static BoundarySpec zero_flux() { return {Kind::ZeroFlux, {}, 1.0}; }
  static BoundarySpec dirichlet(std::function<double(double)> profile);
  static BoundarySpec constant(double value);
  /// Boundary values copied from a reference flow.
  static BoundarySpec restriction(BoundaryTrace trace);
  /// Reference values with the metric factor u multiplied by K >= 1.
  static BoundarySpec inflated(BoundaryTrace trace, double K, double eta);
  /// Pinned at the supersolution level V(r_boundary).
  static BoundarySpec barrier_level(double value);

  bool prescribes_value() const {
    return kind != Kind::PoleRegularity && kind != Kind::ZeroFlux;
  }
  double value(double t) const;
};

const char* to_string(BoundarySpec::Kind kind);

struct FlowConfig {
  double dt_initial = 1e-4;
  double dt_max = 1e-3;
  double dt_min = 1e-13;
  double newton_tol = 1e-10;
  int newton_max_iter = 30;
  double growth = 2.0;
  /// Extinction threshold for u^eta (U itself in the base gauge).
  double extinction_floor = 1e-8;

  void validate() const;
};

enum class FlowStatus { Running, Extinct };

struct FlowState {
  double t = 0.0;
  RadialField U;
  Gauge gauge;
  ModelGeometry geom;
  BoundarySpec inner_bc;
  BoundarySpec outer_bc;
  /// Step size proposed for the next step.
  double dt = 0.0;
  FlowStatus status = FlowStatus::Running;
  long steps = 0;

  const GridPtr& grid() const { return U.grid; }
};

/// Validates positivity, boundary kinds against the grid, and the gauge.
FlowState make_flow_state(const ModelGeometry& geom, RadialField U0, Gauge gauge, BoundarySpec inner,
                          BoundarySpec outer, const FlowConfig& config);

struct FlowError : std::runtime_error {
  FlowError(const std::string& what, FlowState last) : std::runtime_error(what), last_good(std::move(last)) {}
  FlowState last_good;
};

struct NewtonDivergence : FlowError {
  using FlowError::FlowError;
};

/// One accepted backward-Euler step (possibly after halvings). A state whose
/// U falls to the extinction floor comes back with status Extinct.
FlowState step(const FlowState& state, const FlowConfig& config);

/// As step(), but never beyond t_limit.
FlowState step_until(const FlowState& state, const FlowConfig& config, double t_limit);

using MonitorFn = std::function<double(const FlowState&)>;

struct Monitor {
  std::string name;
  MonitorFn fn;
};

struct MonitorSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> values;
};

struct RunOptions {
  /// Output cadence; 0 samples only the start and end.
  double output_interval = 0.0;
  bool keep_snapshots = false;
  /// Called after every accepted step.
  std::function<void(const FlowState&)> on_step;
};

struct FlowResult {
  std::vector<MonitorSeries> series;
  std::vector<FlowState> snapshots;
  FlowState final_state;
  std::optional<double> extinction_time;

  const MonitorSeries& monitor(const std::string& name) const;
};

/// Steps to t_end sampling monitors at the output cadence (starting at the
/// initial time). Stops early at extinction.
FlowResult run(const FlowState& state, const FlowConfig& config, double t_end,
               const std::vector<Monitor>& monitors = {}, const RunOptions& options = {});

/// Metric factor u with g(t) = u g0, whatever the gauge.
RadialField metric_factor(const FlowState& state);

/// max over nodes in (0, delta) of (U - V) phi, clamped below at 0.
double barrier_monitor(const FlowState& state, const Supersolution& V, const TestFunctionPhi& tf);

/// sup over nodes with r_lower <= r < delta of u(r, t) / u(r, 0).
double sup_ratio(const FlowState& state, const RadialField& u_initial, double delta, double r_lower = 0.0);

/// Trapezoid quadrature of sqrt(u) from the first node to r0.
double completeness_length(const FlowState& state, double r0);
double completeness_length(const RadialField& u, double r0);

}  // namespace yamabe
