#include "yamabe/comparison.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace yamabe {

TimeSeries::TimeSeries(std::vector<double> t, std::vector<double> v) : times(std::move(t)), values(std::move(v)) {
  validate();
}

void TimeSeries::validate() const {
  if (times.size() != values.size()) throw DomainError("time series: times and values differ in length");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("time series: times must increase strictly");
  }
}

double gronwall_bound(double a, double b, double J0, double t) {
  if (!(a > 0.0)) throw DomainError("gronwall_bound needs a > 0; use gronwall_bound_limit for a = 0");
  if (b < 0.0 || t < 0.0) throw DomainError("gronwall_bound needs b >= 0 and t >= 0");
  if (t == 0.0) return J0;
  const double growth = std::expm1(a * t);
  return J0 * (growth + 1.0) + growth * b / a;
}

double gronwall_bound_limit(double b, double J0, double t) {
  if (b < 0.0 || t < 0.0) throw DomainError("gronwall_bound_limit needs b >= 0 and t >= 0");
  return J0 + b * t;
}

double power_bound(double eta, double Q, double v0, double t) {
  if (!(eta > 0.0) || Q < 0.0 || v0 < 0.0 || t < 0.0) {
    throw DomainError("power_bound needs eta > 0 and Q, v0, t >= 0");
  }
  if (t == 0.0 || Q == 0.0) return v0;
  return std::pow(std::pow(v0, 1.0 / eta) + Q * t, eta);
}

DiniResult dini_check(const TimeSeries& series, const RateFn& rate, double slack,
                      const std::function<double(double)>& bound) {
  series.validate();
  DiniResult out;
  const auto& t = series.times;
  const auto& v = series.values;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (bound && !out.first_bound_violation) {
      const double b = bound(t[i]);
      if (v[i] > b * (1.0 + slack) + slack) out.first_bound_violation = i;
    }
    if (i == 0) continue;
    const double q = (v[i] - v[i - 1]) / (t[i] - t[i - 1]);
    const double r = rate(t[i], v[i]);
    const double margin = q - r - slack * (1.0 + std::abs(r));
    out.worst_margin = std::max(out.worst_margin, margin);
    if (margin > 0.0 && !out.first_violation) out.first_violation = i;
  }
  out.passed = !out.first_violation && !out.first_bound_violation;
  return out;
}

PowerDifference power_difference(double a, double b, double eta) {
  if (!(a > 0.0) || !(b >= a)) throw DomainError("power_difference needs 0 < a <= b");
  const double top = std::pow(b, eta + 1.0) - std::pow(a, eta + 1.0);
  return {std::pow(b, eta) - std::pow(a, eta), top / a, top / b};
}

std::vector<double> default_levels(std::size_t count) {
  std::vector<double> levels(count);
  for (std::size_t j = 0; j < count; ++j) levels[j] = 1e-3 * std::ldexp(1.0, -static_cast<int>(j));
  return levels;
}

double green_integral(const ModelGeometry& geom, const RadialField& f, const RadialField& phi, double level) {
  if (f.grid->nodes != phi.grid->nodes) throw DomainError("green_integral: fields on different grids");
  const RadialField lap_f = radial_laplacian(geom, f);
  const RadialField lap_phi = radial_laplacian(geom, phi);
  const Eigen::VectorXd& r = f.r();
  const Eigen::Index n = f.size();
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i) = (phi(i) * lap_f(i) - f(i) * lap_phi(i)) * geom.volume_weight(r(i));
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double a = f(i) - level;
    const double b = f(i + 1) - level;
    const double h = r(i + 1) - r(i);
    if (a > 0.0 && b > 0.0) {
      sum += 0.5 * h * (g(i) + g(i + 1));
    } else if (a > 0.0 || b > 0.0) {
      const double theta = a / (a - b);  // crossing at r(i) + theta h
      const double gc = g(i) + theta * (g(i + 1) - g(i));
      if (a > 0.0) {
        sum += 0.5 * theta * h * (g(i) + gc);
      } else {
        sum += 0.5 * (1.0 - theta) * h * (gc + g(i + 1));
      }
    }
  }
  return sum;
}

double green_defect(const ModelGeometry& geom, const RadialField& f, const RadialField& phi,
                    const std::vector<double>& levels) {
  if (levels.size() < 2) throw DomainError("green_defect needs at least two levels");
  const double m1 = levels[levels.size() - 2];
  const double m2 = levels.back();
  const double d1 = green_integral(geom, f, phi, m1);
  const double d2 = green_integral(geom, f, phi, m2);
  // Linear extrapolation to level 0.
  return d2 - m2 * (d1 - d2) / (m1 - m2);
}

double green_defect_extrapolated(const ModelGeometry& geom, const std::function<double(double)>& f,
                                 const std::function<double(double)>& phi, double r_lo, double r_hi,
                                 Eigen::Index nodes, const std::vector<double>& levels) {
  auto at = [&](Eigen::Index count) {
    auto grid = share(RadialGrid::uniform(r_lo, r_hi, count));
    return green_defect(geom, RadialField::sample(grid, f), RadialField::sample(grid, phi), levels);
  };
  const double coarse = at(nodes);
  const double fine = at(2 * nodes - 1);
  return (4.0 * fine - coarse) / 3.0;
}

namespace {

double smoothstep(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
double smoothstep_d1(double x) { return 30.0 * x * x * (1.0 - x) * (1.0 - x); }
double smoothstep_d2(double x) { return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }

}  // namespace

AnnulusTestFunction::AnnulusTestFunction(ModelGeometry geom, double eps) : geom_(std::move(geom)), eps_(eps) {
  if (!(eps > 0.0) || !(eps < geom_.domain_max())) throw DomainError("annulus (eps/2, eps) leaves the chart");
  const double lo = 0.5 * eps;
  constexpr int dense = 4000;
  max_lap_ = 0.0;
  for (int k = 0; k <= dense; ++k) max_lap_ = std::max(max_lap_, lap(lo + (eps - lo) * k / dense));

  static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                           0.9061798459386640};
  static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                           0.2369268850561891, 0.2369268850561891};
  constexpr int cells = 2000;
  const double h = (eps - lo) / cells;
  double mass = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double mid = lo + (c + 0.5) * h;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = mid + 0.5 * h * x[k];
      mass += 0.5 * h * w[k] * std::max(lap(r), 0.0) * geom_.volume_weight(r);
    }
  }
  positive_lap_mass_ = mass;
}

double AnnulusTestFunction::phi(double r) const {
  if (r <= 0.5 * eps_) return 0.0;
  if (r >= eps_) return 1.0;
  return smoothstep((r - 0.5 * eps_) / (0.5 * eps_));
}

double AnnulusTestFunction::dphi(double r) const {
  if (r <= 0.5 * eps_ || r >= eps_) return 0.0;
  return smoothstep_d1((r - 0.5 * eps_) / (0.5 * eps_)) * 2.0 / eps_;
}

double AnnulusTestFunction::d2phi(double r) const {
  if (r <= 0.5 * eps_ || r >= eps_) return 0.0;
  return smoothstep_d2((r - 0.5 * eps_) / (0.5 * eps_)) * 4.0 / (eps_ * eps_);
}

double AnnulusTestFunction::lap(double r) const {
  if (r <= 0.5 * eps_ || r >= eps_) return 0.0;
  return d2phi(r) + geom_.drift_unchecked(r) * dphi(r);
}

RadialField AnnulusTestFunction::sample(const GridPtr& grid) const {
  return RadialField::sample(grid, [this](double r) { return phi(r); });
}

AnnulusTestFunction annulus_test_function(const ModelGeometry& geom, double eps) {
  return AnnulusTestFunction(geom, eps);
}

EnergyReport uniqueness_energy(const FlowResult& flowA, const FlowResult& flowB, double eps) {
  const auto& A = flowA.snapshots;
  const auto& B = flowB.snapshots;
  if (A.empty() || A.size() != B.size()) throw DomainError("uniqueness_energy: snapshot counts differ");
  const GridPtr& grid = A.front().grid();
  for (std::size_t k = 0; k < A.size(); ++k) {
    if (A[k].gauge.kind != GaugeKind::BaseMetric || B[k].gauge.kind != GaugeKind::BaseMetric) {
      throw DomainError("uniqueness_energy: runs must be in the base gauge");
    }
    if (A[k].grid()->nodes != grid->nodes || B[k].grid()->nodes != grid->nodes) {
      throw DomainError("uniqueness_energy: grid mismatch");
    }
    if (std::abs(A[k].t - B[k].t) > 1e-12 * std::max(1.0, std::abs(A[k].t))) {
      throw DomainError("uniqueness_energy: snapshot times differ");
    }
  }
  const ModelGeometry& geom = A.front().geom;
  const AnnulusTestFunction tf(geom, eps);
  const double eta = geom.eta_value();
  const Eigen::VectorXd& r = grid->nodes;
  const Eigen::Index n = r.size();

  EnergyReport report;
  report.epsilon = eps;
  report.epsilon_power = std::pow(eps, geom.m() - geom.n() - 2);

  double sup_u_eta = 0.0;
  double inf_ref = std::numeric_limits<double>::infinity();
  double sup_minus_R = -std::numeric_limits<double>::infinity();
  std::vector<double> times, values;
  for (std::size_t k = 0; k < A.size(); ++k) {
    const RadialField u = metric_factor(A[k]);
    const RadialField v = metric_factor(B[k]);
    double J = 0.0;
    double prev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double wp = std::max(std::pow(u(i), eta + 1.0) - std::pow(v(i), eta + 1.0), 0.0);
      const double g = wp * tf.phi(r(i)) * geom.volume_weight(r(i));
      if (i > 0) J += 0.5 * (r(i) - r(i - 1)) * (g + prev);
      prev = g;
      if (r(i) >= 0.5 * eps) {
        sup_u_eta = std::max(sup_u_eta, std::pow(u(i), eta));
        inf_ref = std::min(inf_ref, v(i));
        sup_minus_R = std::max(sup_minus_R, -geom.base_scalar_curvature(r(i)));
      }
      const double a = std::min(u(i), v(i));
      const double b = std::max(u(i), v(i));
      const PowerDifference pd = power_difference(a, b, eta);
      const double tol = 1e-12 * std::max(1.0, std::abs(pd.bound_by_a));
      ++report.inequality_checks;
      if (pd.difference > pd.bound_by_a + tol || pd.difference > pd.bound_by_b + tol) ++report.inequality_failures;
    }
    times.push_back(A[k].t);
    values.push_back(J);
  }
  report.J = TimeSeries(std::move(times), std::move(values));

  const double C = (geom.m() - 1.0) / eta * tf.positive_lap_mass() / report.epsilon_power;
  report.alpha = (eta + 1.0) * sup_minus_R / inf_ref;
  report.beta = (eta + 1.0) * C * sup_u_eta;
  const double J0 = report.J.values.front();
  const double t0 = report.J.times.front();
  const double a = report.alpha;
  const double b = report.beta * report.epsilon_power;
  if (a > 0.0) {
    report.bound = [=](double t) { return gronwall_bound(a, b, J0, t - t0); };
  } else {
    report.bound = [=](double t) { return gronwall_bound_limit(b, J0, t - t0); };
  }
  for (std::size_t k = 0; k < report.J.size(); ++k) {
    const double bound = report.bound(report.J.times[k]);
    if (report.J.values[k] > bound * (1.0 + 1e-9) + 1e-300) report.violated = true;
  }
  // With sup(-R) < 0 the curvature term is merely nonpositive, so the rate
  // uses max(alpha, 0).
  const double a_plus = std::max(a, 0.0);
  report.dini = dini_check(report.J, [=](double, double J) { return a_plus * J + b; }, 1e-2);
  return report;
}

}  // namespace yamabe
