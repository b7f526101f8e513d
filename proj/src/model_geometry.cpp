#include "yamabe/model_geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace yamabe {

const char* to_string(Model model) {
  return model == Model::SphereTube ? "sphere" : "flat";
}

Model model_from_string(const std::string& name) {
  if (name == "sphere" || name == "SphereTube") return Model::SphereTube;
  if (name == "flat" || name == "FlatTube") return Model::FlatTube;
  throw ConfigError("unknown model '" + name + "' (expected sphere or flat)");
}

ModelGeometry::ModelGeometry(int m, int n, Model model, double flat_r_max)
    : m_(m), n_(n), model_(model), eta_(m - 2, 4), r_max_(flat_r_max) {
  if (m < 3) throw DomainError("model geometry requires m >= 3, got m = " + std::to_string(m));
  if (n < 0 || n >= m) {
    throw DomainError("model geometry requires 0 <= n < m, got n = " + std::to_string(n));
  }
  if (model == Model::SphereTube) {
    r_max_ = n == 0 ? std::numbers::pi : std::numbers::pi / 2;
  } else if (!(flat_r_max > 0.0) || !std::isfinite(flat_r_max)) {
    throw DomainError("flat tube needs a positive finite r_max");
  }
}

ModelGeometry make_geometry(int m, int n, Model model, double flat_r_max) {
  return ModelGeometry(m, n, model, flat_r_max);
}

double ModelGeometry::volume_weight(double r) const {
  const int k = m_ - n_ - 1;
  if (model_ == Model::FlatTube) return std::pow(r, k);
  return std::pow(std::sin(r), k) * std::pow(std::cos(r), n_);
}

void ModelGeometry::check_radius(double r) const {
  const bool inside = model_ == Model::FlatTube ? (r > 0.0 && r <= r_max_) : (r > 0.0 && r < r_max_);
  if (!inside || !std::isfinite(r)) {
    std::ostringstream os;
    os << "radius " << r << " outside the radial chart of the " << to_string(model_) << " model (0, "
       << r_max_ << ")";
    throw DomainError(os.str());
  }
}

double distance_laplacian_defect(const ModelGeometry& geom, double r) {
  if (r > 1.0) throw DomainError("distance_laplacian_defect expects r <= 1");
  return r * radial_drift(geom, r) - (geom.m() - geom.n() - 1);
}

// ---------------------------------------------------------------------------
// Grids

RadialGrid RadialGrid::uniform(double r_min, double r_max, Eigen::Index count, bool pole_flag) {
  RadialGrid g;
  g.nodes = Eigen::VectorXd::LinSpaced(count, r_min, r_max);
  g.grading = Grading::Uniform;
  g.pole_flag = pole_flag;
  g.validate();
  return g;
}

RadialGrid RadialGrid::geometric(double r_min, double r_max, Eigen::Index count, bool pole_flag) {
  if (!(r_min > 0.0) || !(r_max > r_min) || count < 2) {
    throw DomainError("geometric grid needs 0 < r_min < r_max");
  }
  RadialGrid g;
  g.nodes = Eigen::VectorXd::LinSpaced(count, std::log(r_min), std::log(r_max)).array().exp();
  g.nodes(0) = r_min;
  g.nodes(count - 1) = r_max;
  g.grading = Grading::GeometricTowardZero;
  g.ratio = std::pow(r_max / r_min, 1.0 / static_cast<double>(count - 1));
  g.pole_flag = pole_flag;
  g.validate();
  return g;
}

RadialGrid RadialGrid::centered(double r_max, Eigen::Index count, bool pole_flag) {
  RadialGrid g;
  const double h = r_max / (static_cast<double>(count) - 0.5);
  g.nodes = (Eigen::VectorXd::LinSpaced(count, 0.0, static_cast<double>(count - 1)).array() + 0.5) * h;
  g.nodes(count - 1) = r_max;
  g.grading = Grading::Uniform;
  g.pole_flag = pole_flag;
  g.inner_reflect = true;
  g.validate();
  return g;
}

RadialGrid RadialGrid::full_chart(const ModelGeometry& geom, Eigen::Index count) {
  return centered(geom.domain_max(), count, geom.has_outer_pole());
}

Eigen::Index RadialGrid::locate(double r) const {
  const double* begin = nodes.data();
  const double* end = begin + nodes.size();
  const auto it = std::upper_bound(begin, end, r);
  if (it == begin) return 0;
  return std::min<Eigen::Index>(static_cast<Eigen::Index>(it - begin) - 1, nodes.size() - 2);
}

double RadialGrid::interpolate(const Eigen::VectorXd& values, double r) const {
  if (r < r_min() || r > r_max()) throw DomainError("interpolation radius outside the grid");
  const Eigen::Index i = locate(r);
  const double s = (r - nodes(i)) / (nodes(i + 1) - nodes(i));
  return (1.0 - s) * values(i) + s * values(i + 1);
}

void RadialGrid::validate() const {
  if (nodes.size() < 16) throw DomainError("radial grid needs at least 16 nodes");
  if (!(nodes(0) > 0.0)) throw DomainError("radial grid must start at r_min > 0");
  for (Eigen::Index i = 1; i < nodes.size(); ++i) {
    if (!(nodes(i) > nodes(i - 1))) throw DomainError("radial grid nodes must increase strictly");
  }
}

RadialField::RadialField(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw DomainError("radial field without grid");
  if (values.size() != grid->size()) throw DomainError("radial field length differs from node count");
  if (!values.allFinite()) throw DomainError("radial field has non-finite values");
}

void require_positive(const RadialField& field, const char* what) {
  if (!(field.values.minCoeff() > 0.0)) {
    throw PositivityError(std::string(what) + " must be strictly positive at every node");
  }
}

// ---------------------------------------------------------------------------
// Stencils

namespace {

struct Weights3 {
  std::array<double, 3> d1;
  std::array<double, 3> d2;
};

// Derivatives at x of the quadratic interpolating values at x0, x1, x2.
Weights3 lagrange3(double x, double x0, double x1, double x2) {
  const std::array<double, 3> xs{x0, x1, x2};
  Weights3 w{};
  for (int j = 0; j < 3; ++j) {
    const double a = xs[(j + 1) % 3];
    const double b = xs[(j + 2) % 3];
    const double denom = (xs[j] - a) * (xs[j] - b);
    w.d2[j] = 2.0 / denom;
    w.d1[j] = ((x - a) + (x - b)) / denom;
  }
  return w;
}

struct RowBuilder {
  RadialStencil& st;
  Eigen::Index n;
  void add(Eigen::Index row, Eigen::Index col, double value) {
    const Eigen::Index off = col - row;
    if (off == 0) {
      st.tri.diag(row) += value;
    } else if (off == 1) {
      st.tri.upper(row) += value;
    } else if (off == -1) {
      st.tri.lower(row) += value;
    } else if (row == 0 && col == 2) {
      st.inner_extra += value;
    } else if (row == n - 1 && col == n - 3) {
      st.outer_extra += value;
    }
  }
};

// Coefficients c2 * f'' + c1 * f' at an end row.
void close_end(RowBuilder& rb, const RadialGrid& grid, bool inner, EndRule rule, double c2, double c1) {
  const Eigen::Index n = grid.size();
  const auto& r = grid.nodes;
  const Eigen::Index e = inner ? 0 : n - 1;
  const Eigen::Index nb = inner ? 1 : n - 2;
  const Eigen::Index nb2 = inner ? 2 : n - 3;
  switch (rule.kind) {
    case EndRule::Kind::OneSided: {
      const Weights3 w = lagrange3(r(e), r(e), r(nb), r(nb2));
      rb.add(e, e, c2 * w.d2[0] + c1 * w.d1[0]);
      rb.add(e, nb, c2 * w.d2[1] + c1 * w.d1[1]);
      rb.add(e, nb2, c2 * w.d2[2] + c1 * w.d1[2]);
      break;
    }
    case EndRule::Kind::ReflectAboutZero: {
      if (!inner) throw DomainError("reflection about r = 0 applies to the inner end only");
      const Weights3 w = lagrange3(r(0), -r(0), r(0), r(1));
      rb.add(0, 0, c2 * (w.d2[0] + w.d2[1]) + c1 * (w.d1[0] + w.d1[1]));
      rb.add(0, 1, c2 * w.d2[2] + c1 * w.d1[2]);
      break;
    }
    case EndRule::Kind::Mirror: {
      const double h = std::abs(r(nb) - r(e));
      const double ghost = inner ? r(e) - h : r(e) + h;
      const Weights3 w = lagrange3(r(e), ghost, r(e), r(nb));
      rb.add(e, e, c2 * w.d2[1] + c1 * w.d1[1]);
      rb.add(e, nb, c2 * (w.d2[0] + w.d2[2]) + c1 * (w.d1[0] + w.d1[2]));
      break;
    }
    case EndRule::Kind::Pole: {
      const double h = std::abs(r(nb) - r(e));
      const double k = static_cast<double>(rule.codim) * 2.0 / (h * h);
      rb.add(e, e, -c2 * k);
      rb.add(e, nb, c2 * k);
      break;
    }
  }
}

RadialStencil build_stencil(const RadialGrid& grid, const Eigen::VectorXd* drift, double c2, EndRule inner,
                            EndRule outer) {
  const Eigen::Index n = grid.size();
  if (n < 3) throw DomainError("radial stencil needs at least 3 nodes");
  RadialStencil st{Tridiagonal(n)};
  RowBuilder rb{st, n};
  const auto& r = grid.nodes;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const Weights3 w = lagrange3(r(i), r(i - 1), r(i), r(i + 1));
    const double c1 = drift ? (*drift)(i) : 1.0;
    for (int j = 0; j < 3; ++j) rb.add(i, i - 1 + j, c2 * w.d2[j] + c1 * w.d1[j]);
  }
  close_end(rb, grid, true, inner, c2, drift ? (*drift)(0) : 1.0);
  close_end(rb, grid, false, outer, c2, drift ? (*drift)(n - 1) : 1.0);
  return st;
}

}  // namespace

Eigen::VectorXd RadialStencil::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = tri.apply(x);
  const Eigen::Index n = x.size();
  y(0) += inner_extra * x(2);
  y(n - 1) += outer_extra * x(n - 3);
  return y;
}

RadialStencil drift_stencil(const RadialGrid& grid, const Eigen::VectorXd& drift, EndRule inner,
                            EndRule outer) {
  if (drift.size() != grid.size()) throw DomainError("drift length differs from node count");
  return build_stencil(grid, &drift, 1.0, inner, outer);
}

RadialStencil derivative_stencil(const RadialGrid& grid, EndRule inner, EndRule outer) {
  // Pole and mirror rows carry no first-derivative content.
  auto demote = [](EndRule rule) {
    if (rule.kind == EndRule::Kind::Pole) rule.kind = EndRule::Kind::Mirror;
    return rule;
  };
  return build_stencil(grid, nullptr, 0.0, demote(inner), demote(outer));
}

std::pair<EndRule, EndRule> natural_end_rules(const ModelGeometry& geom, const RadialGrid& grid) {
  EndRule inner{grid.inner_reflect ? EndRule::Kind::ReflectAboutZero : EndRule::Kind::OneSided, 1};
  EndRule outer{EndRule::Kind::OneSided, 1};
  if (grid.pole_flag) {
    if (!geom.has_outer_pole() || std::abs(grid.r_max() - geom.domain_max()) > 1e-12) {
      throw DomainError("grid pole flag does not match the model's coordinate pole");
    }
    outer = EndRule{EndRule::Kind::Pole, geom.pole_codim()};
  }
  return {inner, outer};
}

Eigen::VectorXd sampled_drift(const ModelGeometry& geom, const RadialGrid& grid) {
  Eigen::VectorXd a(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double r = grid.nodes(i);
    a(i) = (grid.pole_flag && i == grid.size() - 1) ? 0.0 : radial_drift(geom, r);
  }
  return a;
}

RadialField radial_laplacian(const ModelGeometry& geom, const RadialField& field) {
  const RadialGrid& grid = *field.grid;
  if (grid.size() < 3) throw DomainError("radial_laplacian needs at least 3 nodes");
  const auto [inner, outer] = natural_end_rules(geom, grid);
  const RadialStencil st = drift_stencil(grid, sampled_drift(geom, grid), inner, outer);
  return RadialField(field.grid, st.apply(field.values));
}

RadialField radial_derivative(const ModelGeometry& geom, const RadialField& field) {
  const auto [inner, outer] = natural_end_rules(geom, *field.grid);
  const RadialStencil st = derivative_stencil(*field.grid, inner, outer);
  return RadialField(field.grid, st.apply(field.values));
}

RadialField conformal_scalar_curvature(const ModelGeometry& geom, const RadialField& U,
                                       const std::function<double(double)>& R_base) {
  require_positive(U, "conformal factor U");
  const double m = geom.m();
  const RadialField lap = radial_laplacian(geom, U);
  Eigen::VectorXd R(U.size());
  for (Eigen::Index i = 0; i < U.size(); ++i) {
    const double u = U(i);
    const double base = R_base(U.r()(i));
    R(i) = std::pow(u, -(m + 2.0) / (m - 2.0)) * (base * u - 4.0 * (m - 1.0) / (m - 2.0) * lap(i));
  }
  return RadialField(U.grid, std::move(R));
}

ConformalDerivatives conformal_calculus(const ModelGeometry& geom, const RadialField& u,
                                        const RadialField& f) {
  require_positive(u, "conformal factor u");
  if (u.grid != f.grid && u.grid->nodes != f.grid->nodes) {
    throw DomainError("conformal_calculus: fields live on different grids");
  }
  const double m = geom.m();
  const RadialField df = radial_derivative(geom, f);
  const RadialField du = radial_derivative(geom, u);
  const RadialField lap_f = radial_laplacian(geom, f);
  const Eigen::ArrayXd uu = u.values.array();
  Eigen::VectorXd gradsq = (df.values.array().square() / uu).matrix();
  Eigen::VectorXd lap =
      (lap_f.values.array() / uu + 0.5 * (m - 2.0) * du.values.array() * df.values.array() / uu.square())
          .matrix();
  return {RadialField(f.grid, std::move(gradsq)), RadialField(f.grid, std::move(lap))};
}

}  // namespace yamabe
