#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "generators.hpp"
#include "yamabe/model_geometry.hpp"

using namespace yamabe;

namespace {

// Distance on the unit sphere S^m in R^{m+1} to the great S^n spanned by the
// first n+1 coordinates (to the point e_0 when n = 0).
double embedded_distance(const std::vector<double>& x, int n) {
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  const double norm = std::sqrt(norm2);
  if (n == 0) return std::acos(std::clamp(x[0] / norm, -1.0, 1.0));
  double p2 = 0.0;
  for (int i = 0; i <= n; ++i) p2 += x[i] * x[i];
  return std::acos(std::clamp(std::sqrt(p2) / norm, -1.0, 1.0));
}

// Laplace-Beltrami of F(dist) on the sphere at a point, through the Euclidean
// Laplacian of the degree-zero extension (which has no radial part).
template <typename Fn>
double sphere_laplacian_fd(Fn F, const std::vector<double>& x, int n, double h) {
  auto g = [&](const std::vector<double>& y) { return F(embedded_distance(y, n)); };
  double lap = 0.0;
  const double g0 = g(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto plus = x, minus = x;
    plus[i] += h;
    minus[i] -= h;
    lap += (g(plus) - 2.0 * g0 + g(minus)) / (h * h);
  }
  return lap;
}

// Point on S^m at distance r from the great S^n.
std::vector<double> point_at(int m, int n, double r) {
  std::vector<double> x(m + 1, 0.0);
  x[0] = std::cos(r);
  x[n + 1] = std::sin(r);
  return x;
}

}  // namespace

TEST_CASE("rational arithmetic stays reduced") {
  const Rational a(6, -8);
  CHECK(a.num() == -3);
  CHECK(a.den() == 4);
  CHECK(Rational(1, 4) + Rational(1, 4) == Rational(1, 2));
  CHECK(Rational(1, 4) / Rational(3, 4) == Rational(1, 3));
  CHECK(Rational(3, 4).str() == "3/4");
  CHECK_THROWS_AS(Rational(1, 0), DomainError);
}

TEST_CASE("geometry validates dimensions and regime") {
  CHECK_THROWS_AS(make_geometry(2, 0, Model::SphereTube), DomainError);
  CHECK_THROWS_AS(make_geometry(4, 4, Model::FlatTube), DomainError);
  const ModelGeometry g = make_geometry(6, 2, Model::FlatTube);
  CHECK(g.eta() == Rational(1));
  CHECK(g.borderline());
  CHECK_FALSE(g.complete_regime());
  CHECK(make_geometry(3, 1, Model::SphereTube).complete_regime());
  CHECK(make_geometry(3, 0, Model::SphereTube).domain_max() == doctest::Approx(std::numbers::pi));
  CHECK(make_geometry(4, 1, Model::SphereTube).domain_max() == doctest::Approx(std::numbers::pi / 2));
  CHECK_THROWS_AS(radial_drift(g, 1.5), DomainError);
  CHECK(model_from_string("sphere") == Model::SphereTube);
  CHECK_THROWS_AS(model_from_string("torus"), ConfigError);
}

TEST_CASE("drift matches the logarithmic derivative of the volume weight") {
  for (auto [m, n] : std::vector<std::pair<int, int>>{{3, 0}, {4, 1}, {5, 2}, {6, 1}}) {
    for (Model model : {Model::SphereTube, Model::FlatTube}) {
      const ModelGeometry g = make_geometry(m, n, model);
      for (double r : {0.05, 0.3, 0.7, 1.2}) {
        if (r >= g.domain_max()) continue;
        const double h = 1e-5 * r;
        const double fd = (std::log(g.volume_weight(r + h)) - std::log(g.volume_weight(r - h))) / (2 * h);
        CHECK(radial_drift(g, r) == doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("radial Laplacian agrees with the embedded sphere") {
  auto F = [](double r) { return std::cos(3.0 * r) + 0.5 * r * r; };
  auto dF = [](double r) { return -3.0 * std::sin(3.0 * r) + r; };
  auto d2F = [](double r) { return -9.0 * std::cos(3.0 * r) + 1.0; };
  for (auto [m, n] : std::vector<std::pair<int, int>>{{3, 0}, {3, 1}, {4, 1}, {5, 2}}) {
    const ModelGeometry g = make_geometry(m, n, Model::SphereTube);
    for (double r : {0.2, 0.6, 1.0}) {
      const double oracle = sphere_laplacian_fd(F, point_at(m, n, r), n, 1e-4);
      const double radial = d2F(r) + radial_drift(g, r) * dF(r);
      CHECK(radial == doctest::Approx(oracle).epsilon(1e-5));
    }
  }
}

TEST_CASE("interior stencil rows are exact on quadratics") {
  gen::Source src(11);
  for (int trial = 0; trial < 20; ++trial) {
    const double r_min = src.log_uniform(1e-6, 1e-2);
    const auto grid = RadialGrid::geometric(r_min, 1.0, src.integer(16, 80));
    const Eigen::VectorXd drift = Eigen::VectorXd::Constant(grid.size(), src.uniform(-3, 3));
    const RadialStencil st = drift_stencil(grid, drift, {}, {});
    const double a = src.uniform(-2, 2), b = src.uniform(-2, 2), c = src.uniform(-2, 2);
    const Eigen::VectorXd f = (a + b * grid.nodes.array() + c * grid.nodes.array().square()).matrix();
    const Eigen::VectorXd lf = st.apply(f);
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      const double exact = 2 * c + drift(i) * (b + 2 * c * grid.nodes(i));
      // Rounding in f is amplified by 1/h^2 on the finest cells.
      const double h = i > 0 ? grid.spacing_before(i) : grid.spacing_before(1);
      const double tol = 1e-9 + 64 * 2.2e-16 * (std::abs(a) + std::abs(b) + std::abs(c)) / (h * h);
      CHECK(std::abs(lf(i) - exact) <= tol);
    }
  }
}

TEST_CASE("radial Laplacian converges at second order") {
  const ModelGeometry g = make_geometry(4, 1, Model::SphereTube);
  auto F = [](double r) { return std::cos(r) * std::cos(r) * (1.0 + 0.3 * std::cos(2.0 * r)); };
  auto err = [&](Eigen::Index count) {
    const auto grid = share(RadialGrid::full_chart(g, count));
    const RadialField f = RadialField::sample(grid, F);
    const RadialField lap = radial_laplacian(g, f);
    double e = 0.0;
    for (Eigen::Index i = 0; i < grid->size(); ++i) {
      const double r = grid->nodes(i);
      if (r < 0.2 || r > 1.3) continue;
      const double h = 1e-4;
      const double d1 = (F(r + h) - F(r - h)) / (2 * h);
      const double d2 = (F(r + h) - 2 * F(r) + F(r - h)) / (h * h);
      e = std::max(e, std::abs(lap(i) - (d2 + radial_drift(g, r) * d1)));
    }
    return e;
  };
  const double ratio = err(100) / err(200);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("flat ball with the spherical factor has curvature m(m-1)") {
  // 4 / (1 + r^2)^2 times the flat metric is the unit round metric.
  const ModelGeometry g = make_geometry(3, 0, Model::FlatTube, 1.0);
  const double eta = g.eta_value();
  double previous = 1e300;
  for (Eigen::Index count : {100, 200, 400}) {
    const auto grid = share(RadialGrid::centered(1.0, count));
    const RadialField U =
        RadialField::sample(grid, [&](double r) { return std::pow(4.0 / std::pow(1.0 + r * r, 2), eta); });
    const RadialField R = conformal_scalar_curvature(g, U, g.base_curvature_function());
    double e = 0.0;
    for (Eigen::Index i = 0; i + 1 < R.size(); ++i) e = std::max(e, std::abs(R(i) - 6.0));
    CHECK(e < previous);
    previous = e;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("round sphere with U = 1 keeps its curvature") {
  for (int m : {3, 4, 5}) {
    const ModelGeometry g = make_geometry(m, 1, Model::SphereTube);
    const auto grid = share(RadialGrid::full_chart(g, 64));
    const RadialField U = RadialField::sample(grid, [](double) { return 1.0; });
    const RadialField R = conformal_scalar_curvature(g, U, g.base_curvature_function());
    for (Eigen::Index i = 0; i < R.size(); ++i) CHECK(R(i) == doctest::Approx(m * (m - 1.0)));
  }
}

TEST_CASE("grid construction and interpolation") {
  const auto grid = RadialGrid::geometric(1e-4, 1.0, 41);
  CHECK(grid.r_min() == doctest::Approx(1e-4));
  CHECK(grid.r_max() == doctest::Approx(1.0));
  for (Eigen::Index i = 2; i < grid.size(); ++i) {
    CHECK(grid.spacing_before(i) / grid.spacing_before(i - 1) == doctest::Approx(grid.ratio));
  }
  const Eigen::VectorXd v = grid.nodes * 2.0 + Eigen::VectorXd::Ones(grid.size());
  CHECK(grid.interpolate(v, 0.37) == doctest::Approx(1.74));
  const auto c = RadialGrid::centered(1.0, 20);
  CHECK(c.inner_reflect);
  CHECK(c.nodes(0) == doctest::Approx(0.5 * (c.nodes(1) - c.nodes(0))));
  CHECK_THROWS(share(RadialGrid::uniform(1.0, 0.5, 20)));
}

TEST_CASE("require_positive rejects a vanishing factor") {
  const auto grid = share(RadialGrid::uniform(0.1, 1.0, 19));
  CHECK_NOTHROW(require_positive(RadialField::sample(grid, [](double r) { return r; }), "u"));
  CHECK_THROWS_AS(require_positive(RadialField::sample(grid, [](double r) { return r - 0.5; }), "u"),
                  PositivityError);
}
