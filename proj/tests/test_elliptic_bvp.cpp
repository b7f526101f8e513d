#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "yamabe/elliptic_bvp.hpp"

using namespace yamabe;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
// First zero of J_0.
constexpr double kJ01 = 2.404825557695773;

}  // namespace

TEST_CASE("scalar-flat gauge around a point of the sphere is the stereographic factor") {
  // Stereographic projection: g_round = 4 cos^4(r/2) g_flat, so the flat metric
  // is U^{4/(m-2)} g_round with U proportional to cos(r/2)^{-(m-2)}.
  for (int m : {3, 4, 5}) {
    const ModelGeometry g = make_geometry(m, 0, Model::SphereTube);
    const double eps = 0.3;
    const EllipticSolution s = scalar_flat_gauge(g, eps);
    double err = 0.0;
    for (Eigen::Index i = 0; i < s.field.size(); ++i) {
      const double r = s.field.r()(i);
      err = std::max(err, std::abs(s.field(i) - std::pow(std::cos(eps / 2) / std::cos(r / 2), m - 2)));
    }
    CHECK(err < 1e-5);
    CHECK(s.field(s.field.size() - 1) == doctest::Approx(1.0));
    CHECK(s.residual_norm < 1e-10);
  }
}

TEST_CASE("scalar-flat gauge of a flat tube is trivial") {
  const EllipticSolution s = scalar_flat_gauge(make_geometry(5, 1, Model::FlatTube), 0.4);
  CHECK((s.field.values.array() - 1.0).abs().maxCoeff() < 1e-12);
  const auto grid = share(RadialGrid::uniform(0.01, 0.9, 30));
  const RadialField ext = extend_scalar_flat_gauge(s, grid);
  for (Eigen::Index i = 0; i < ext.size(); ++i) CHECK(ext(i) == doctest::Approx(1.0));
  CHECK_THROWS_AS(scalar_flat_gauge(make_geometry(3, 0, Model::SphereTube), 4.0), DomainError);
}

TEST_CASE("Dirichlet eigenvalues of flat balls") {
  struct Case {
    int m, n;
    double exact;  // times eps^2
  };
  for (const Case c : {Case{3, 0, kPi2}, Case{4, 1, kPi2}, Case{3, 1, kJ01 * kJ01}, Case{5, 2, kPi2}}) {
    for (double eps : {0.4, 0.1, 0.025}) {
      const EigenResult e = lowest_dirichlet_eigenvalue(make_geometry(c.m, c.n, Model::FlatTube), eps);
      CHECK(e.value * eps * eps == doctest::Approx(c.exact).epsilon(1e-4));
      CHECK(e.rayleigh == doctest::Approx(e.value).epsilon(1e-10));
      CHECK(e.eigenfunction.values.minCoeff() > 0.0);
      CHECK(e.eigenfunction.values.maxCoeff() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("Dirichlet eigenvalue of a geodesic ball in the 3-sphere") {
  // sin(k r) / sin r has -Delta eigenvalue k^2 - 1.
  const ModelGeometry g = make_geometry(3, 0, Model::SphereTube);
  for (double eps : {0.5, 1.0, 2.0}) {
    const double k = std::numbers::pi / eps;
    CHECK(lowest_dirichlet_eigenvalue(g, eps).value == doctest::Approx(k * k - 1.0).epsilon(1e-4));
  }
}

TEST_CASE("eigenvalue refinement is second order") {
  const ModelGeometry g = make_geometry(3, 0, Model::FlatTube);
  auto err = [&](Eigen::Index nodes) {
    EllipticOptions o;
    o.nodes = nodes;
    return std::abs(lowest_dirichlet_eigenvalue(g, 1.0, o).value - kPi2);
  };
  const double ratio = err(50) / err(100);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("singular profile coefficient and regime") {
  CHECK(singular_profile_coefficient(make_geometry(3, 1, Model::SphereTube)) == doctest::Approx(1.0 / 3.0));
  CHECK(singular_profile_coefficient(make_geometry(4, 2, Model::SphereTube)) == doctest::Approx(0.5));
  CHECK(singular_profile_coefficient(make_geometry(5, 3, Model::FlatTube)) == doctest::Approx(0.6));
  CHECK_THROWS_AS(singular_profile_coefficient(make_geometry(3, 0, Model::SphereTube)), WrongRegime);
  CHECK_THROWS_AS(singular_profile_coefficient(make_geometry(6, 2, Model::SphereTube)), WrongRegime);
}

TEST_CASE("singular profile on the sphere is k / sin^2 r") {
  // S^3 minus a great circle is conformal to H^2 x S^1.
  const ModelGeometry g = make_geometry(3, 1, Model::SphereTube);
  const double k = singular_profile_coefficient(g);
  const EllipticSolution s = singular_yamabe_profile(g, 1e-6);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.field.size(); ++i) {
    const double r = s.field.r()(i);
    if (r < 1e-4 || r > 1.4) continue;
    const double exact = k / (std::sin(r) * std::sin(r));
    worst = std::max(worst, std::abs(s.field(i) / exact - 1.0));
  }
  CHECK(worst < 2e-3);
  REQUIRE(s.asymptote.has_value());
  CHECK(s.asymptote->exponent == doctest::Approx(-2.0).epsilon(1e-3));
}

TEST_CASE("asymptote fit recovers an exact power") {
  const auto grid = share(RadialGrid::geometric(1e-6, 1.0, 100));
  const RadialField u = RadialField::sample(grid, [](double r) { return 0.7 * std::pow(r, -1.5); });
  const AsymptoteFit fit = fit_asymptote(u, 1e-5, 1e-2);
  CHECK(fit.exponent == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(fit.coefficient == doctest::Approx(0.7).epsilon(1e-10));
  CHECK_THROWS_AS(fit_asymptote(u, 2.0, 3.0), DomainError);
}
