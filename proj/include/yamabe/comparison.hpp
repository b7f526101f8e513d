#pragma once

// Comparison tools for time series with upper Dini derivative bounds, the
// Green defect of a sign-changing function against a cutoff, the annular
// cutoff around N, and the L^1-type energy comparing two flows.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "yamabe/flow_solver.hpp"
#include "yamabe/model_geometry.hpp"

namespace yamabe {

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;

  TimeSeries() = default;
  TimeSeries(std::vector<double> t, std::vector<double> v);

  std::size_t size() const { return times.size(); }
  /// Throws DomainError on unequal lengths or non-increasing times.
  void validate() const;
};

/// J0 e^{at} + (e^{at} - 1) b / a for a > 0, b >= 0, t >= 0.
double gronwall_bound(double a, double b, double J0, double t);
/// The a -> 0 limit J0 + b t.
double gronwall_bound_limit(double b, double J0, double t);

/// (v0^{1/eta} + Q t)^eta.
double power_bound(double eta, double Q, double v0, double t);

using RateFn = std::function<double(double t, double value)>;

struct DiniResult {
  bool passed = true;
  /// First sample whose backward difference quotient exceeds the rate.
  std::optional<std::size_t> first_violation;
  /// First sample above the integrated bound, when one was given.
  std::optional<std::size_t> first_bound_violation;
  /// Largest quotient - rate - slack * (1 + |rate|) seen (negative when clean).
  double worst_margin = -1e300;
};

/// Checks (v_i - v_{i-1}) / (t_i - t_{i-1}) <= rate(t_i, v_i) + slack (1 + |rate|)
/// for every i >= 1, and v_i <= bound(t_i) (1 + slack) + slack if a bound is
/// supplied.
DiniResult dini_check(const TimeSeries& series, const RateFn& rate, double slack = 1e-2,
                      const std::function<double(double)>& bound = {});

/// b^eta - a^eta and its two upper bounds (b^{eta+1} - a^{eta+1}) / a and
/// (b^{eta+1} - a^{eta+1}) / b for 0 < a <= b.
struct PowerDifference {
  double difference = 0.0;
  double bound_by_a = 0.0;
  double bound_by_b = 0.0;
};
PowerDifference power_difference(double a, double b, double eta);

/// Sequence of levels 1e-3 * 2^{-j}, j = 0..count-1.
std::vector<double> default_levels(std::size_t count = 6);

/// Integral of (phi Delta f - f Delta phi) over {f > level}, trapezoid rule in
/// the volume measure with the level crossings located by linear
/// interpolation. Laplacians are the discrete radial ones of the grid.
double green_integral(const ModelGeometry& geom, const RadialField& f, const RadialField& phi, double level);

/// The level integral extrapolated to level 0 from the last two levels of
/// the sequence (linear in the level).
double green_defect(const ModelGeometry& geom, const RadialField& f, const RadialField& phi,
                    const std::vector<double>& levels = default_levels());

/// green_defect for closed-form f and phi sampled on uniform grids of
/// nodes and 2 * nodes - 1 points on [r_lo, r_hi], combined by Richardson
/// extrapolation (second order).
double green_defect_extrapolated(const ModelGeometry& geom, const std::function<double(double)>& f,
                                 const std::function<double(double)>& phi, double r_lo, double r_hi,
                                 Eigen::Index nodes, const std::vector<double>& levels = default_levels());

/// phi = S((r - eps/2) / (eps/2)) with the quintic smoothstep S: 0 below
/// eps/2, 1 above eps.
class AnnulusTestFunction {
 public:
  AnnulusTestFunction(ModelGeometry geom, double eps);

  double eps() const { return eps_; }
  double phi(double r) const;
  double dphi(double r) const;
  double d2phi(double r) const;
  /// Delta_g0 phi = phi'' + A phi'.
  double lap(double r) const;

  /// max Delta phi over the annulus (dense sampling plus endpoints).
  double max_lap() const { return max_lap_; }
  /// Integral of (Delta phi)_+ against the volume weight.
  double positive_lap_mass() const { return positive_lap_mass_; }

  RadialField sample(const GridPtr& grid) const;

 private:
  ModelGeometry geom_;
  double eps_;
  double max_lap_ = 0.0;
  double positive_lap_mass_ = 0.0;
};

/// Throws DomainError when the annulus (eps/2, eps) leaves the chart.
AnnulusTestFunction annulus_test_function(const ModelGeometry& geom, double eps);

struct EnergyReport {
  TimeSeries J;
  double alpha = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  /// epsilon^{m-n-2}
  double epsilon_power = 0.0;
  /// Growth bound for J from J(0) with rate alpha J + beta epsilon^{m-n-2};
  /// for alpha <= 0 the linear branch J(0) + beta epsilon^{m-n-2} t.
  std::function<double(double)> bound;
  bool violated = false;
  /// Backward differences of J against the rate alpha J + beta epsilon^{m-n-2}.
  DiniResult dini;
  /// Nodewise pairs violating the power difference inequalities (expected 0).
  std::size_t inequality_failures = 0;
  std::size_t inequality_checks = 0;
};

/// Energy J(t) = integral of (u^{eta+1} - u~^{eta+1})_+ phi for the snapshots of
/// two base-gauge runs on the same grid; flowB is the reference u~. Since every
/// term is integrated against phi or Delta phi, sup u^eta, inf u~ and
/// sup(-R_g0) are taken over the support r >= eps/2 of phi.
EnergyReport uniqueness_energy(const FlowResult& flowA, const FlowResult& flowB, double eps);

}  // namespace yamabe
