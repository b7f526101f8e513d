#pragma once

// Rotationally symmetric model geometries around a totally geodesic
// submanifold N, the graded radial mesh in the distance r from N, and the
// conformal calculus (scalar curvature of U^{4/(m-2)} g, gradient and
// Laplacian in a conformal metric) reduced to radial functions.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "yamabe/errors.hpp"
#include "yamabe/tridiagonal.hpp"

namespace yamabe {

/// Exact rational number in lowest terms with positive denominator.
class Rational {
 public:
  constexpr Rational(std::int64_t num = 0, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw DomainError("Rational: zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  constexpr double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend constexpr Rational operator+(Rational a, Rational b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend constexpr Rational operator/(Rational a, Rational b) {
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
  }
  friend constexpr bool operator==(Rational a, Rational b) = default;

  std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

 private:
  std::int64_t num_;
  std::int64_t den_;
};

enum class Model { SphereTube, FlatTube };

const char* to_string(Model model);
Model model_from_string(const std::string& name);

/// M^m carrying a totally geodesic N^n, reduced to the distance r from N.
///
/// SphereTube: unit round S^m with N a great S^n. The metric is
/// dr^2 + sin^2 r g_{S^{m-n-1}} + cos^2 r g_{S^n}; the radial chart ends at the
/// focal sphere r = pi/2 (n >= 1) or at the antipode r = pi (n = 0).
/// FlatTube: flat R^{m-n} x T^n, radial chart (0, r_max].
class ModelGeometry {
 public:
  ModelGeometry(int m, int n, Model model, double flat_r_max = 1.0);

  int m() const { return m_; }
  int n() const { return n_; }
  Model model() const { return model_; }
  /// (m-2)/4, exact.
  Rational eta() const { return eta_; }
  double eta_value() const { return eta_.value(); }
  /// Codimension of N, m - n.
  int codim() const { return m_ - n_; }
  bool borderline() const { return 2 * n_ == m_ - 2; }
  /// True when n > (m-2)/2, i.e. a complete negatively curved conformal
  /// metric exists on M \ N.
  bool complete_regime() const { return 2 * n_ > m_ - 2; }

  double domain_max() const { return r_max_; }
  /// Whether domain_max() is a coordinate pole where the manifold is smooth.
  bool has_outer_pole() const { return model_ == Model::SphereTube; }
  /// Codimension of the focal set at the outer pole (n+1), or m at the
  /// antipodal point when n = 0.
  int pole_codim() const { return n_ == 0 ? m_ : n_ + 1; }

  double base_scalar_curvature(double /*r*/) const {
    return model_ == Model::SphereTube ? static_cast<double>(m_ * (m_ - 1)) : 0.0;
  }
  std::function<double(double)> base_curvature_function() const {
    const double value = base_scalar_curvature(0.0);
    return [value](double) { return value; };
  }

  /// Radial Laplacian coefficient A(r) = Delta r (no domain checking).
  template <typename Scalar>
  Scalar drift_unchecked(Scalar r) const {
    using std::cos;
    using std::sin;
    using std::tan;
    const Scalar k = static_cast<Scalar>(m_ - n_ - 1);
    if (model_ == Model::FlatTube) return k / r;
    return k * cos(r) / sin(r) - static_cast<Scalar>(n_) * tan(r);
  }

  /// Density of the volume measure in r, up to the constant volume of the
  /// cross sections.
  double volume_weight(double r) const;

  /// Throws DomainError unless r lies in the open radial chart (the closed
  /// end r_max is admitted for FlatTube).
  void check_radius(double r) const;

 private:
  int m_;
  int n_;
  Model model_;
  Rational eta_;
  double r_max_;
};

ModelGeometry make_geometry(int m, int n, Model model, double flat_r_max = 1.0);

/// A(r) = Delta_g r, checked against the chart.
template <typename Scalar = double>
Scalar radial_drift(const ModelGeometry& geom, Scalar r) {
  geom.check_radius(static_cast<double>(r));
  return geom.drift_unchecked(r);
}

/// r A(r) - (m - n - 1); bounded by K r near N.
double distance_laplacian_defect(const ModelGeometry& geom, double r);

enum class Grading { Uniform, GeometricTowardZero };

/// Strictly increasing radial nodes.
///
/// pole_flag marks r_max as a coordinate pole of the model. inner_reflect marks
/// the grid as cell-centred about r = 0, i.e. N is a removable point or tube
/// core and the first node sits half a cell away from it.
struct RadialGrid {
  Eigen::VectorXd nodes;
  Grading grading = Grading::Uniform;
  double ratio = 1.0;
  bool pole_flag = false;
  bool inner_reflect = false;

  Eigen::Index size() const { return nodes.size(); }
  double r_min() const { return nodes(0); }
  double r_max() const { return nodes(nodes.size() - 1); }
  double spacing_before(Eigen::Index i) const { return nodes(i) - nodes(i - 1); }

  static RadialGrid uniform(double r_min, double r_max, Eigen::Index count, bool pole_flag = false);
  static RadialGrid geometric(double r_min, double r_max, Eigen::Index count, bool pole_flag = false);
  /// Uniform nodes (i + 1/2) h, last node at r_max; N sits at r = 0.
  static RadialGrid centered(double r_max, Eigen::Index count, bool pole_flag = false);
  /// The full radial chart of a geometry, centred at N, with pole handling.
  static RadialGrid full_chart(const ModelGeometry& geom, Eigen::Index count);

  /// Index of the last node with nodes(i) <= r.
  Eigen::Index locate(double r) const;
  /// Piecewise linear interpolation of nodal values.
  double interpolate(const Eigen::VectorXd& values, double r) const;

  void validate() const;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr share(RadialGrid grid) {
  grid.validate();
  return std::make_shared<const RadialGrid>(std::move(grid));
}

/// Sampled scalar on a radial grid.
struct RadialField {
  GridPtr grid;
  Eigen::VectorXd values;

  RadialField() = default;
  RadialField(GridPtr g, Eigen::VectorXd v);

  template <typename Fn>
  static RadialField sample(GridPtr g, Fn&& fn) {
    Eigen::VectorXd v(g->size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = fn(g->nodes(i));
    return RadialField(std::move(g), std::move(v));
  }

  Eigen::Index size() const { return values.size(); }
  const Eigen::VectorXd& r() const { return grid->nodes; }
  double operator()(Eigen::Index i) const { return values(i); }
  double at(double r) const { return grid->interpolate(values, r); }
};

/// How a stencil row at a grid end is closed.
struct EndRule {
  enum class Kind {
    OneSided,         // quadratic through the three end nodes
    ReflectAboutZero, // even ghost at -r_0 (inner end of a centred grid)
    Mirror,           // even ghost mirrored about the end node (zero flux)
    Pole              // Delta f = codim * f'' with f' = 0
  };
  Kind kind = Kind::OneSided;
  int codim = 1;
};

/// Three-point operator with two optional extra weights for one-sided rows
/// (row 0 touching node 2, row n-1 touching node n-3).
struct RadialStencil {
  Tridiagonal tri;
  double inner_extra = 0.0;
  double outer_extra = 0.0;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  bool tridiagonal() const { return inner_extra == 0.0 && outer_extra == 0.0; }
};

/// f'' + drift * f' on the grid with the given end closures. Interior rows are
/// the classical unequal-spacing formulas, exact on quadratics.
RadialStencil drift_stencil(const RadialGrid& grid, const Eigen::VectorXd& drift, EndRule inner,
                            EndRule outer);

/// First-derivative operator with the same end closures (zero at reflecting
/// ends and poles).
RadialStencil derivative_stencil(const RadialGrid& grid, EndRule inner, EndRule outer);

/// End closures implied by the grid flags for the geometry.
std::pair<EndRule, EndRule> natural_end_rules(const ModelGeometry& geom, const RadialGrid& grid);

/// A(r) sampled on the grid; pole nodes get 0 (unused by the pole rule).
Eigen::VectorXd sampled_drift(const ModelGeometry& geom, const RadialGrid& grid);

/// Delta_g f for a radial field.
RadialField radial_laplacian(const ModelGeometry& geom, const RadialField& field);

/// df/dr for a radial field.
RadialField radial_derivative(const ModelGeometry& geom, const RadialField& field);

/// Scalar curvature of U^{4/(m-2)} g where g has scalar curvature R_base.
RadialField conformal_scalar_curvature(const ModelGeometry& geom, const RadialField& U,
                                       const std::function<double(double)>& R_base);

struct ConformalDerivatives {
  RadialField gradsq;  ///< |grad f|^2 in u g
  RadialField lap;     ///< Laplacian of f in u g
};

/// Gradient norm and Laplacian of f in the metric u g.
ConformalDerivatives conformal_calculus(const ModelGeometry& geom, const RadialField& u,
                                        const RadialField& f);

void require_positive(const RadialField& field, const char* what);

}  // namespace yamabe
