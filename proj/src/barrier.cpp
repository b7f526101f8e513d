#include "yamabe/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace yamabe {

const char* to_string(FactorKind kind) {
  return kind == FactorKind::Power ? "power" : "borderline_log";
}

BarrierFactor BarrierFactor::power(double valid_r_max) {
  if (!(valid_r_max > 0.0)) throw DomainError("power factor needs a positive validity cap");
  return BarrierFactor(FactorKind::Power, valid_r_max);
}

// Capped at e^{-2} so that -log r >= 2 stays away from the log singularity.
BarrierFactor BarrierFactor::borderline_log() { return BarrierFactor(FactorKind::BorderlineLog, std::exp(-2.0)); }

void BarrierFactor::check(double r) const {
  if (!(r > 0.0) || !(r < valid_r_max_ || (kind_ == FactorKind::Power && r <= valid_r_max_))) {
    std::ostringstream os;
    os << to_string(kind_) << " factor evaluated at r = " << r << " outside (0, " << valid_r_max_ << ")";
    throw DomainError(os.str());
  }
}

namespace {

// r A(r) with the exact FlatTube value and the small-r limit for radii that
// underflow.
double scaled_drift(const ModelGeometry& geom, double r) {
  if (geom.model() == Model::FlatTube || r < 1e-300) return geom.m() - geom.n() - 1;
  return r * radial_drift(geom, r);
}

}  // namespace

double factor_curvature_at(const ModelGeometry& geom, const BarrierFactor& factor, double r) {
  factor.check(r);
  const double m = geom.m();
  const double eta = geom.eta_value();
  const double A = radial_drift(geom, r);
  const double f = factor.value(r);
  const double df = factor.first(r);
  const double d2f = factor.second(r);
  const double bracket = (d2f + A * df) / (f * f) + (eta - 1.0) * df * df / (f * f * f);
  return geom.base_scalar_curvature(r) / f - (m - 1.0) * bracket;
}

double factor_curvature_simplified(const ModelGeometry& geom, const BarrierFactor& factor, double r) {
  factor.check(r);
  const double m = geom.m();
  const double rA = scaled_drift(geom, r);
  const double base = geom.base_scalar_curvature(r) / factor.value(r);
  if (factor.kind() == FactorKind::Power) return base - (m - 1.0) * (m - 2.0 * rA);
  const double L = -std::log(r);
  const double minus_r = (m + 4.0) / 9.0 * std::pow(L, -4.0 / 3.0) +
                         2.0 / 3.0 * (rA + 1.0 - m) * std::pow(L, -1.0 / 3.0) +
                         (m - 2.0 * rA) * std::pow(L, 2.0 / 3.0);
  return base - (m - 1.0) * minus_r;
}

double factor_curvature_log(const ModelGeometry& geom, const BarrierFactor& factor, double L) {
  if (geom.model() != Model::FlatTube) throw DomainError("factor_curvature_log is exact on the flat tube only");
  if (L < -std::log(factor.valid_r_max())) throw DomainError("factor_curvature_log: r above the validity cap");
  const double m = geom.m();
  const double rA = geom.m() - geom.n() - 1;
  // -R/(m-1) = (r^2 f)^{-1} [ r^2 f''/f + rA * r f'/f + (eta - 1)(r f'/f)^2 ]
  const double slope = factor.log_slope(L);
  const double bracket = factor.log_curvature(L) + rA * slope + (geom.eta_value() - 1.0) * slope * slope;
  return -(m - 1.0) * bracket / factor.scaled_value(L);
}

RadialField factor_curvature(const ModelGeometry& geom, const BarrierFactor& factor, const GridPtr& grid) {
  return RadialField::sample(grid, [&](double r) { return factor_curvature_at(geom, factor, r); });
}

RadialField factor_curvature_composed(const ModelGeometry& geom, const BarrierFactor& factor,
                                      const RadialField& scalar_flat_factor) {
  require_positive(scalar_flat_factor, "scalar-flat factor");
  const double eta = geom.eta_value();
  const RadialGrid& grid = *scalar_flat_factor.grid;
  const Eigen::Index n = grid.size();
  const Eigen::VectorXd b = scalar_flat_factor.values.array().pow(1.0 / eta).matrix();
  // Distance in b g0 from N, integrated from r = 0 (the grid starts a
  // half cell or r_min away from N; the first piece uses sqrt(b) at node 0).
  Eigen::VectorXd s(n);
  s(0) = grid.nodes(0) * std::sqrt(b(0));
  for (Eigen::Index i = 1; i < n; ++i) {
    s(i) = s(i - 1) + 0.5 * (std::sqrt(b(i)) + std::sqrt(b(i - 1))) * (grid.nodes(i) - grid.nodes(i - 1));
  }
  Eigen::VectorXd W(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    factor.check(s(i));
    W(i) = std::pow(factor.value(s(i)) * b(i), eta);
  }
  return conformal_scalar_curvature(geom, RadialField(scalar_flat_factor.grid, std::move(W)),
                                    geom.base_curvature_function());
}

PositivityScan positivity_radius(const ModelGeometry& geom, const BarrierFactor& factor, std::size_t samples) {
  PositivityScan scan;
  const double lo = 1e-12;
  double hi = factor.valid_r_max();
  if (geom.model() == Model::SphereTube) hi = std::min(hi, 0.999 * geom.domain_max());
  if (geom.model() == Model::FlatTube) hi = std::min(hi, geom.domain_max());
  scan.r_min_scanned = lo;
  scan.samples = samples;
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  double last_good = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    // Stay strictly inside (0, valid_r_max) for the log factor.
    const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
    double r = std::exp(log_lo + t * (log_hi - log_lo));
    if (factor.kind() == FactorKind::BorderlineLog) r = std::min(r, hi * (1.0 - 1e-12));
    const double R = factor_curvature_at(geom, factor, r);
    if (!(R > 0.0)) {
      std::ostringstream os;
      os << "curvature " << R << " <= 0 at r = " << r;
      scan.diagnostic = os.str();
      break;
    }
    last_good = r;
  }
  scan.delta = last_good;
  if (last_good == 0.0 && scan.diagnostic.empty()) scan.diagnostic = "no positive sample";
  if (last_good == 0.0) scan.diagnostic = "empty: " + scan.diagnostic;
  return scan;
}

// ---------------------------------------------------------------------------
// Cutoff and test function

CutoffProfile CutoffProfile::for_eta(double eta) { return CutoffProfile{std::max(2.0, std::ceil(2.0 * eta))}; }

namespace {

double smoothstep(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
double smoothstep_d1(double x) { return 30.0 * x * x * (1.0 - x) * (1.0 - x); }
double smoothstep_d2(double x) { return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }

}  // namespace

double CutoffProfile::chi(double s) const {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  return std::pow(1.0 - smoothstep(s - 1.0), p);
}

double CutoffProfile::dchi(double s) const {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double x = s - 1.0;
  return -p * std::pow(1.0 - smoothstep(x), p - 1.0) * smoothstep_d1(x);
}

double CutoffProfile::d2chi(double s) const {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double x = s - 1.0;
  const double q = 1.0 - smoothstep(x);
  const double d1 = smoothstep_d1(x);
  return p * (p - 1.0) * std::pow(q, p - 2.0) * d1 * d1 - p * std::pow(q, p - 1.0) * smoothstep_d2(x);
}

double rho_closed_form(const BarrierFactor& factor, double epsilon, double delta, double r) {
  if (!(r > 0.0) || r > delta) throw DomainError("rho is defined for 0 < r <= delta");
  if (factor.kind() == FactorKind::Power) return epsilon * std::log(delta / r);
  if (!(delta < 1.0)) throw DomainError("borderline rho needs delta < 1");
  return 1.5 * epsilon * (std::pow(-std::log(r), 2.0 / 3.0) - std::pow(-std::log(delta), 2.0 / 3.0));
}

TestFunctionPhi::TestFunctionPhi(ModelGeometry geom, BarrierFactor factor, double epsilon, double delta,
                                 std::optional<CutoffProfile> profile)
    : geom_(std::move(geom)),
      factor_(factor),
      epsilon_(epsilon),
      delta_(delta),
      profile_(profile.value_or(CutoffProfile::for_eta(geom_.eta_value()))) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("test function needs 0 < epsilon < 1");
  if (!(delta > 0.0) || delta > factor.valid_r_max()) throw DomainError("test function needs 0 < delta <= cap");
}

double TestFunctionPhi::effective_epsilon() const {
  return factor_.kind() == FactorKind::Power ? epsilon_ : std::sqrt(epsilon_);
}

double TestFunctionPhi::rho_from_log(double L) const {
  const double Ld = -std::log(delta_);
  if (L < Ld) throw DomainError("rho is defined for r <= delta");
  if (factor_.kind() == FactorKind::Power) return epsilon_ * (L - Ld);
  return 1.5 * epsilon_ * (std::pow(L, 2.0 / 3.0) - std::pow(Ld, 2.0 / 3.0));
}

double TestFunctionPhi::radius_at_rho(double rho) const {
  const double Ld = -std::log(delta_);
  if (factor_.kind() == FactorKind::Power) return delta_ * std::exp(-rho / epsilon_);
  const double L = std::pow(2.0 * rho / (3.0 * epsilon_) + std::pow(Ld, 2.0 / 3.0), 1.5);
  return std::exp(-L);
}

double TestFunctionPhi::drift_coefficient_from_log(double L) const {
  const double m = geom_.m();
  const double r = std::exp(-L);
  const double rA = scaled_drift(geom_, r);
  return -(0.5 * (m - 1.0) * factor_.log_slope(L) + rA) / std::sqrt(factor_.scaled_value(L));
}

double TestFunctionPhi::drift_coefficient(double r) const { return drift_coefficient_from_log(-std::log(r)); }

PhiDerivatives phi_derivatives(const TestFunctionPhi& tf, double r) {
  if (!(r > 0.0 && r < tf.delta())) throw DomainError("phi_derivatives: r outside (0, delta)");
  const double rho = tf.rho(r);
  const double eps = tf.epsilon();
  const CutoffProfile& chi = tf.profile();
  PhiDerivatives d;
  d.phi = chi.chi(rho);
  const double c1 = chi.dchi(rho);
  const double c2 = chi.d2chi(rho);
  if (c1 == 0.0 && c2 == 0.0) return d;
  d.dphi_dr = -eps * std::sqrt(tf.factor().value(r)) * c1;
  d.gradsq_tilde = eps * eps * c1 * c1;
  d.lap_tilde = eps * eps * c2 + tf.drift_coefficient(r) * eps * c1;
  return d;
}

namespace {

// Left side of the cutoff inequality and its right-side scale at a given rho.
std::pair<double, double> cutoff_terms(const TestFunctionPhi& tf, double rho) {
  const double eps = tf.epsilon();
  const CutoffProfile& chi = tf.profile();
  const double phi = chi.chi(rho);
  const double c1 = chi.dchi(rho);
  const double c2 = chi.d2chi(rho);
  const double L = -std::log(tf.radius_at_rho(rho));
  const double drift = (c1 == 0.0) ? 0.0 : tf.drift_coefficient_from_log(L);
  const double lhs = (c1 == 0.0 && c2 == 0.0)
                         ? 0.0
                         : 2.0 * eps * eps * c1 * c1 / phi - (eps * eps * c2 + drift * eps * c1);
  const double scale = tf.effective_epsilon() * std::pow(phi, 1.0 - 1.0 / tf.geometry().eta_value());
  return {lhs, scale};
}

}  // namespace

double cutoff_inequality_margin(const TestFunctionPhi& tf, double C, double r) {
  if (!(r > 0.0) || r > tf.delta()) throw DomainError("margin: r outside (0, delta]");
  const double rho = tf.rho(r);
  if (!(tf.profile().chi(rho) > 0.0)) throw DomainError("margin undefined where phi = 0");
  const auto [lhs, scale] = cutoff_terms(tf, rho);
  return lhs - C * scale;
}

double fit_cutoff_constant(const TestFunctionPhi& tf, std::size_t samples) {
  double C = 0.0;
  for (std::size_t k = 1; k < samples; ++k) {
    // rho in (1, 2); the last sample stays a hair inside the support.
    const double rho = 1.0 + static_cast<double>(k) / static_cast<double>(samples) * (1.0 - 1e-6);
    const auto [lhs, scale] = cutoff_terms(tf, rho);
    if (scale > 0.0) C = std::max(C, lhs / scale);
  }
  return C;
}

RadialField Supersolution::sample(const GridPtr& grid) const {
  return RadialField::sample(grid, [this](double r) { return (*this)(r); });
}

double barrier_constant(const RadialField& U0, const std::vector<double>& boundary_values,
                        const BarrierFactor& factor, double eta, double delta) {
  if (U0.size() == 0 || boundary_values.empty()) throw DomainError("barrier_constant: empty input");
  require_positive(U0, "initial data U0");
  double c = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < U0.size(); ++i) {
    const double r = U0.r()(i);
    if (r > delta * (1.0 + 1e-14)) continue;
    c = std::max(c, U0(i) * std::pow(factor.value(r), eta));
    any = true;
  }
  if (!any) throw DomainError("barrier_constant: no nodes in (0, delta]");
  const double fd = std::pow(factor.value(delta), eta);
  for (double b : boundary_values) c = std::max(c, b * fd);
  return c;
}

namespace {

Eigen::VectorXd background_values(const RadialField& field, const RadialField* background) {
  if (!background) return Eigen::VectorXd::Ones(field.size());
  if (background->size() != field.size()) throw DomainError("background length differs from field");
  return background->values;
}

}  // namespace

RadialField to_tilde_gauge(const RadialField& u, const BarrierFactor& factor, double eta,
                           const RadialField* background) {
  require_positive(u, "metric factor u");
  const Eigen::VectorXd b = background_values(u, background);
  Eigen::VectorXd U(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) U(i) = std::pow(u(i) / (factor.value(u.r()(i)) * b(i)), eta);
  return RadialField(u.grid, std::move(U));
}

RadialField from_tilde_gauge(const RadialField& U, const BarrierFactor& factor, double eta,
                             const RadialField* background) {
  require_positive(U, "tilde factor U");
  const Eigen::VectorXd b = background_values(U, background);
  Eigen::VectorXd u(U.size());
  for (Eigen::Index i = 0; i < U.size(); ++i) u(i) = std::pow(U(i), 1.0 / eta) * factor.value(U.r()(i)) * b(i);
  return RadialField(U.grid, std::move(u));
}

}  // namespace yamabe
