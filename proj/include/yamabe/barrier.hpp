#pragma once

// Conformal factors f with f * gbar complete towards N, the scalar curvature
// they induce, the cutoff test function phi = chi(rho) and the supersolution
// V = c f^{-eta} used to bound flows near N.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "yamabe/model_geometry.hpp"

namespace yamabe {

enum class FactorKind { Power, BorderlineLog };

const char* to_string(FactorKind kind);

/// f(r) = r^{-2} (Power) or r^{-2} (-log r)^{-2/3} (BorderlineLog) with closed
/// form derivatives. The log-scale accessors take L = -log r so they remain
/// usable far below the smallest representable r.
class BarrierFactor {
 public:
  static BarrierFactor power(double valid_r_max = 1.0);
  static BarrierFactor borderline_log();

  FactorKind kind() const { return kind_; }
  double valid_r_max() const { return valid_r_max_; }

  template <typename Scalar>
  Scalar value(Scalar r) const {
    using std::log;
    using std::pow;
    if (kind_ == FactorKind::Power) return Scalar(1) / (r * r);
    return pow(-log(r), Scalar(-2) / Scalar(3)) / (r * r);
  }

  template <typename Scalar>
  Scalar first(Scalar r) const {
    using std::log;
    using std::pow;
    if (kind_ == FactorKind::Power) return Scalar(-2) / (r * r * r);
    const Scalar L = -log(r);
    const Scalar f = value(r);
    return (Scalar(2) / 3 * pow(L, Scalar(-1) / 3) - 2 * pow(L, Scalar(2) / 3)) * r * f * f;
  }

  template <typename Scalar>
  Scalar second(Scalar r) const {
    using std::log;
    using std::pow;
    if (kind_ == FactorKind::Power) return Scalar(6) / (r * r * r * r);
    const Scalar L = -log(r);
    const Scalar f = value(r);
    return (Scalar(10) / 9 * pow(L, Scalar(-4) / 3) - Scalar(10) / 3 * pow(L, Scalar(-1) / 3) +
            6 * pow(L, Scalar(2) / 3)) *
           f * f;
  }

  /// (f')^2 written as a multiple of f^3.
  template <typename Scalar>
  Scalar first_squared(Scalar r) const {
    using std::log;
    using std::pow;
    if (kind_ == FactorKind::Power) return Scalar(4) / pow(r, 6);
    const Scalar L = -log(r);
    const Scalar f = value(r);
    return 4 * (pow(L, Scalar(-4) / 3) / 9 - Scalar(2) / 3 * pow(L, Scalar(-1) / 3) + pow(L, Scalar(2) / 3)) *
           f * f * f;
  }

  /// r f'/f as a function of L = -log r.
  double log_slope(double L) const { return kind_ == FactorKind::Power ? -2.0 : 2.0 / (3.0 * L) - 2.0; }
  /// r^2 f''/f as a function of L.
  double log_curvature(double L) const {
    return kind_ == FactorKind::Power ? 6.0 : 10.0 / (9.0 * L * L) - 10.0 / (3.0 * L) + 6.0;
  }
  /// r^2 f as a function of L.
  double scaled_value(double L) const { return kind_ == FactorKind::Power ? 1.0 : std::pow(L, -2.0 / 3.0); }

  /// Throws unless 0 < r < valid_r_max.
  void check(double r) const;

 private:
  BarrierFactor(FactorKind kind, double valid_r_max) : kind_(kind), valid_r_max_(valid_r_max) {}

  FactorKind kind_;
  double valid_r_max_;
};

/// Scalar curvature of f g0 at r, evaluated with the
/// closed-form f, f', f'' and A(r):
///   R = R_base / f - (m-1) [ f^{-2}(f'' + A f') + (eta - 1) f^{-3} (f')^2 ].
double factor_curvature_at(const ModelGeometry& geom, const BarrierFactor& factor, double r);

/// The same curvature through the collected polynomial in rA = r A(r) and
/// L = -log r:
///   Power:          R = -(m-1)(m - 2 rA)
///   BorderlineLog:  -R/(m-1) = (m+4)/9 L^{-4/3} + 2/3 (rA + 1 - m) L^{-1/3}
///                              + (m - 2 rA) L^{2/3}
/// plus R_base / f in both cases.
double factor_curvature_simplified(const ModelGeometry& geom, const BarrierFactor& factor, double r);

/// FlatTube curvature as a function of L = -log r (r A = m - n - 1 exactly).
double factor_curvature_log(const ModelGeometry& geom, const BarrierFactor& factor, double L);

/// Curvature of f g0 sampled on a grid through the closed form.
RadialField factor_curvature(const ModelGeometry& geom, const BarrierFactor& factor, const GridPtr& grid);

/// Curvature of f(s) * b * g0 where b = U_sf^{4/(m-2)} is a scalar-flat
/// background near N and s is the b g0 distance. Evaluated numerically by
/// feeding (f(s) b)^eta through conformal_scalar_curvature.
RadialField factor_curvature_composed(const ModelGeometry& geom, const BarrierFactor& factor,
                                      const RadialField& scalar_flat_factor);

struct PositivityScan {
  double delta = 0.0;
  double r_min_scanned = 0.0;
  std::size_t samples = 0;
  std::string diagnostic;
};

/// Largest scan radius delta with curvature > 0 on every scanned r <= delta.
/// Scans log-uniformly from 1e-12 up to the factor's validity cap.
PositivityScan positivity_radius(const ModelGeometry& geom, const BarrierFactor& factor,
                                 std::size_t samples = 2000);

/// Cutoff chi: 1 on s <= 1, (1 - S(s-1))^p on [1,2] with the quintic
/// smoothstep S, 0 on s >= 2.
struct CutoffProfile {
  double p = 2.0;

  static CutoffProfile for_eta(double eta);

  double chi(double s) const;
  double dchi(double s) const;
  double d2chi(double s) const;
};

struct PhiDerivatives {
  double phi = 0.0;
  double dphi_dr = 0.0;
  double gradsq_tilde = 0.0;
  double lap_tilde = 0.0;
};

/// Distance from r to the outer boundary r = delta in f g0, scaled by epsilon.
double rho_closed_form(const BarrierFactor& factor, double epsilon, double delta, double r);

/// phi = chi(rho) on (0, delta) together with its g~ derivatives.
class TestFunctionPhi {
 public:
  TestFunctionPhi(ModelGeometry geom, BarrierFactor factor, double epsilon, double delta,
                  std::optional<CutoffProfile> profile = std::nullopt);

  const ModelGeometry& geometry() const { return geom_; }
  const BarrierFactor& factor() const { return factor_; }
  const CutoffProfile& profile() const { return profile_; }
  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  /// epsilon for Power, sqrt(epsilon) in the borderline construction.
  double effective_epsilon() const;

  double rho(double r) const { return rho_closed_form(factor_, epsilon_, delta_, r); }
  double rho_from_log(double L) const;
  double phi(double r) const { return profile_.chi(rho(r)); }

  /// -[(m-1) f^{-1} d(sqrt f)/dr + A / sqrt f], the coefficient of
  /// -epsilon chi'(rho) in Delta~ phi. Equals (m-1) - r A for Power.
  double drift_coefficient(double r) const;
  double drift_coefficient_from_log(double L) const;

  /// Radius where rho takes the given value (closed-form inverse).
  double radius_at_rho(double rho) const;

 private:
  ModelGeometry geom_;
  BarrierFactor factor_;
  double epsilon_;
  double delta_;
  CutoffProfile profile_;
};

PhiDerivatives phi_derivatives(const TestFunctionPhi& tf, double r);

/// (2|grad phi|^2/phi - Delta phi) - C eps_eff phi^{1-1/eta} at r.
double cutoff_inequality_margin(const TestFunctionPhi& tf, double C, double r);

/// Smallest C making the margin nonpositive on a dense sample of the support
/// (sampled uniformly in rho over (1, 2)).
double fit_cutoff_constant(const TestFunctionPhi& tf, std::size_t samples = 4000);

/// V = c f^{-eta}.
struct Supersolution {
  double c = 1.0;
  BarrierFactor factor = BarrierFactor::power();
  double eta = 1.0;

  double operator()(double r) const { return c * std::pow(factor.value(r), -eta); }
  RadialField sample(const GridPtr& grid) const;
};

/// c = max( sup U0 f^eta over nodes r <= delta, sup_t boundary(t) f(delta)^eta ).
double barrier_constant(const RadialField& U0, const std::vector<double>& boundary_values,
                        const BarrierFactor& factor, double eta, double delta);

/// U = (u / (f b))^eta : metric factor u relative to g0 -> factor relative to
/// f b g0. b defaults to 1.
RadialField to_tilde_gauge(const RadialField& u, const BarrierFactor& factor, double eta,
                           const RadialField* background = nullptr);
/// Inverse of to_tilde_gauge.
RadialField from_tilde_gauge(const RadialField& U, const BarrierFactor& factor, double eta,
                             const RadialField* background = nullptr);

}  // namespace yamabe
