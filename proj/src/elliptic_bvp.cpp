#include "yamabe/elliptic_bvp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace yamabe {

namespace {

double lap_coefficient(const ModelGeometry& geom) { return 4.0 * (geom.m() - 1.0) / (geom.m() - 2.0); }

void check_positive(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0) || !std::isfinite(v(i))) {
      std::ostringstream os;
      os << what << ": non-positive value " << v(i) << " at node " << i;
      throw NonPositiveSolution(os.str());
    }
  }
}

// Integral of the volume weight over [a, b], five-point Gauss-Legendre.
double weight_integral(const ModelGeometry& geom, double a, double b) {
  static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                           0.9061798459386640};
  static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                           0.2369268850561891, 0.2369268850561891};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) sum += w[k] * geom.volume_weight(mid + half * x[k]);
  return half * sum;
}

}  // namespace

EllipticSolution scalar_flat_gauge(const ModelGeometry& geom, double eps, const EllipticOptions& options) {
  if (!(eps > 0.0) || !(eps < geom.domain_max())) throw DomainError("scalar_flat_gauge: eps outside the chart");
  auto grid = share(RadialGrid::centered(eps, options.nodes));
  const Eigen::Index n = grid->size();
  const RadialStencil st =
      drift_stencil(*grid, sampled_drift(geom, *grid), {EndRule::Kind::ReflectAboutZero, 1}, {EndRule::Kind::OneSided, 1});
  const double a = lap_coefficient(geom);

  // -a L U + R U = 0 with the last row replaced by U = 1.
  Tridiagonal A(n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    A.diag(i) = -a * st.tri.diag(i) + geom.base_scalar_curvature(grid->nodes(i));
    A.lower(i) = -a * st.tri.lower(i);
    A.upper(i) = -a * st.tri.upper(i);
  }
  A.diag(n - 1) = 1.0;
  rhs(n - 1) = 1.0;
  Eigen::VectorXd U = A.solve(rhs);
  check_positive(U, "scalar_flat_gauge");

  // Relative residual on the interior rows.
  const Eigen::VectorXd LU = st.apply(U);
  double res = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double R = geom.base_scalar_curvature(grid->nodes(i));
    const double F = -a * LU(i) + R * U(i);
    const double size = a * (std::abs(st.tri.diag(i)) * U(i)) + R * U(i);
    res = std::max(res, std::abs(F) / std::max(size, 1e-300));
  }
  if (res > options.tol) throw NoConvergence("scalar_flat_gauge: residual above tolerance");
  return {RadialField(grid, U), res, {"regular", "dirichlet", U(0), 1.0}, std::nullopt};
}

RadialField extend_scalar_flat_gauge(const EllipticSolution& gauge, const GridPtr& grid) {
  const RadialField& U = gauge.field;
  const double eps = U.grid->r_max();
  return RadialField::sample(grid, [&](double r) {
    if (r >= eps) return 1.0;
    if (r <= U.grid->r_min()) return U(0);
    return U.at(r);
  });
}

EigenResult lowest_dirichlet_eigenvalue(const ModelGeometry& geom, double eps, const EllipticOptions& options) {
  if (!(eps > 0.0) || !(eps < geom.domain_max() || (geom.model() == Model::FlatTube && eps <= geom.domain_max()))) {
    throw DomainError("lowest_dirichlet_eigenvalue: eps outside the chart");
  }
  const Eigen::Index n = options.nodes;
  const double h = eps / static_cast<double>(n);
  auto grid = share(RadialGrid::centered(eps - 0.5 * h, n));

  // Cells [i h, (i+1) h]; faces carry the weight, the face at eps sees the
  // Dirichlet value half a cell away.
  Eigen::VectorXd mass(n);
  Tridiagonal K(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) * h;
    mass(i) = weight_integral(geom, lo, lo + h);
    const double w_right = geom.volume_weight(lo + h);
    const double g = (i + 1 < n) ? w_right / h : 2.0 * w_right / h;
    K.diag(i) += g;
    if (i + 1 < n) {
      K.diag(i + 1) += g;
      K.upper(i) = -g;
      K.lower(i + 1) = -g;
    }
  }
  const Eigen::VectorXd d = mass.cwiseSqrt().cwiseInverse();
  Tridiagonal S(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    S.diag(i) = K.diag(i) * d(i) * d(i);
    if (i > 0) S.lower(i) = K.lower(i) * d(i) * d(i - 1);
    if (i + 1 < n) S.upper(i) = K.upper(i) * d(i) * d(i + 1);
  }

  Eigen::VectorXd x = mass.cwiseSqrt();
  x.normalize();
  double lambda = x.dot(S.apply(x));
  int it = 0;
  const int max_iter = std::max(options.max_iter, 2000);
  for (; it < max_iter; ++it) {
    Eigen::VectorXd y = S.solve(x);
    y.normalize();
    const double next = y.dot(S.apply(y));
    x = y;
    const bool done = std::abs(next - lambda) <= options.tol * std::abs(next);
    lambda = next;
    if (done) break;
  }
  if (it == max_iter) throw NoConvergence("lowest_dirichlet_eigenvalue: inverse iteration stalled");

  Eigen::VectorXd v = d.cwiseProduct(x);
  if (v.sum() < 0.0) v = -v;
  v /= v.maxCoeff();
  check_positive(v, "lowest_dirichlet_eigenvalue");
  const double rayleigh = v.dot(K.apply(v)) / v.dot(mass.cwiseProduct(v));
  return {lambda, RadialField(grid, v), rayleigh, it + 1};
}

double singular_profile_coefficient(const ModelGeometry& geom) {
  if (!geom.complete_regime()) {
    throw WrongRegime("no complete negatively curved conformal metric unless n > (m-2)/2");
  }
  return static_cast<double>(2 * geom.n() + 2 - geom.m()) / geom.m();
}

EllipticSolution singular_yamabe_profile(const ModelGeometry& geom, double r_min,
                                         const SingularProfileOptions& options) {
  const double k = singular_profile_coefficient(geom);
  if (!(r_min > 0.0) || !(r_min < 0.1 * geom.domain_max())) throw DomainError("singular profile: bad r_min");
  const bool pole = geom.has_outer_pole();
  auto grid = share(RadialGrid::geometric(r_min, geom.domain_max(), options.nodes, pole));
  const Eigen::Index n = grid->size();
  const double m = geom.m();
  const double eta = geom.eta_value();
  const double a = lap_coefficient(geom);
  const double p = (m + 2.0) / (m - 2.0);
  const double mm = m * (m - 1.0);

  const EndRule outer = pole ? EndRule{EndRule::Kind::Pole, geom.pole_codim()} : EndRule{EndRule::Kind::Mirror, 1};
  const RadialStencil st = drift_stencil(*grid, sampled_drift(geom, *grid), {EndRule::Kind::OneSided, 1}, outer);
  if (!st.tridiagonal() && st.outer_extra != 0.0) throw DomainError("singular profile: unexpected outer stencil");

  const double U_inner = std::pow(k / (r_min * r_min), eta);
  Eigen::ArrayXd U(n);
  for (Eigen::Index i = 0; i < n; ++i) U(i) = std::pow(k / (grid->nodes(i) * grid->nodes(i)), eta);
  Eigen::ArrayXd R(n);
  for (Eigen::Index i = 0; i < n; ++i) R(i) = geom.base_scalar_curvature(grid->nodes(i));

  auto residual = [&](const Eigen::ArrayXd& V) {
    Eigen::ArrayXd F = -a * st.apply(V.matrix()).array() + R * V + mm * V.pow(p);
    F(0) = V(0) - U_inner;
    return F;
  };
  // Row-wise scale: the magnitudes of the terms that balance.
  auto relative = [&](const Eigen::ArrayXd& V, const Eigen::ArrayXd& F) {
    const Eigen::ArrayXd size = a * st.tri.diag.array().abs() * V + R.abs() * V + mm * V.pow(p);
    Eigen::ArrayXd rel = F.abs() / size;
    rel(0) = std::abs(F(0)) / U_inner;
    return rel.maxCoeff();
  };

  Eigen::ArrayXd F = residual(U);
  double res = relative(U, F);
  int it = 0;
  for (; it < options.max_iter && res > options.tol; ++it) {
    Tridiagonal J(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      J.diag(i) = -a * st.tri.diag(i) + R(i) + mm * p * std::pow(U(i), p - 1.0);
      if (i > 0) J.lower(i) = -a * st.tri.lower(i);
      if (i + 1 < n) J.upper(i) = -a * st.tri.upper(i);
    }
    J.diag(0) = 1.0;
    J.upper(0) = 0.0;
    const Eigen::ArrayXd delta = J.solve(-F.matrix()).array();
    double lambda = 1.0;
    Eigen::ArrayXd trial;
    Eigen::ArrayXd F_trial;
    double res_trial = res;
    for (int b = 0; b < 60; ++b, lambda *= 0.5) {
      trial = U + lambda * delta;
      if (!(trial > 0.0).all()) continue;
      F_trial = residual(trial);
      res_trial = relative(trial, F_trial);
      if (std::isfinite(res_trial) && (res_trial < res || b >= 30)) break;
    }
    if (!(trial > 0.0).all() || !std::isfinite(res_trial)) break;
    U = trial;
    F = F_trial;
    res = res_trial;
  }
  if (res > options.tol) {
    std::ostringstream os;
    os << "singular profile: Newton stopped at relative residual " << res << " after " << it << " iterations";
    throw NoConvergence(os.str());
  }
  Eigen::VectorXd u = U.pow(1.0 / eta).matrix();
  check_positive(u, "singular_yamabe_profile");
  RadialField field(grid, u);
  EllipticSolution sol{field, res, {"blow_up", pole ? "pole_regularity" : "zero_flux", k / (r_min * r_min), u(n - 1)},
                       std::nullopt};
  sol.asymptote = fit_asymptote(field, 10.0 * r_min, 100.0 * r_min);
  return sol;
}

AsymptoteFit fit_asymptote(const RadialField& u, double r_lo, double r_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double r = u.r()(i);
    if (r < r_lo || r > r_hi) continue;
    const double x = std::log(r);
    const double y = std::log(u(i));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) throw DomainError("fit_asymptote: fewer than two nodes in range");
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / count;
  return {slope, std::exp(intercept), r_lo, r_hi};
}

}  // namespace yamabe
