#include <cmath>
#include <complex>
#include <vector>

#include <doctest.h>

#include "generators.hpp"
#include "yamabe/barrier.hpp"

using namespace yamabe;

namespace {

// Complex-step derivative: exact to rounding for analytic f.
double complex_step(const BarrierFactor& f, double r) {
  const double h = 1e-30;
  return f.value(std::complex<double>(r, h)).imag() / h;
}

double complex_step_second(const BarrierFactor& f, double r) {
  const double h = 1e-4 * r;
  return (complex_step(f, r + h) - complex_step(f, r - h)) / (2.0 * h);
}

// Simpson's rule in s = log r for the f g0 length between r and delta.
double length_by_quadrature(const BarrierFactor& f, double r, double delta) {
  const int n = 4000;
  const double a = std::log(r), b = std::log(delta);
  const double h = (b - a) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = a + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::sqrt(f.value(std::exp(s))) * std::exp(s);
  }
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("closed-form derivatives match complex-step differentiation") {
  for (const BarrierFactor& f : {BarrierFactor::power(), BarrierFactor::borderline_log()}) {
    for (double r : {1e-9, 1e-6, 1e-3, 0.05, 0.1}) {
      const double d1 = complex_step(f, r);
      CHECK(f.first(r) == doctest::Approx(d1).epsilon(1e-12));
      CHECK(f.first_squared(r) == doctest::Approx(d1 * d1).epsilon(1e-12));
      CHECK(f.second(r) == doctest::Approx(complex_step_second(f, r)).epsilon(1e-7));
    }
  }
}

TEST_CASE("log-scale accessors agree with the r-scale ones") {
  for (const BarrierFactor& f : {BarrierFactor::power(), BarrierFactor::borderline_log()}) {
    for (double L : {3.0, 10.0, 40.0}) {
      const double r = std::exp(-L);
      CHECK(f.log_slope(L) == doctest::Approx(r * f.first(r) / f.value(r)));
      CHECK(f.log_curvature(L) == doctest::Approx(r * r * f.second(r) / f.value(r)));
      CHECK(f.scaled_value(L) == doctest::Approx(r * r * f.value(r)));
    }
  }
}

TEST_CASE("power factor curvature is the constant (m-1)(m-2-2n)") {
  const BarrierFactor f = BarrierFactor::power();
  for (auto [m, n] : std::vector<std::pair<int, int>>{{3, 0}, {5, 1}, {6, 2}, {7, 2}, {4, 1}}) {
    const ModelGeometry g = make_geometry(m, n, Model::FlatTube);
    const double target = (m - 1.0) * (m - 2.0 - 2.0 * n);
    for (double r : {1e-8, 1e-4, 0.3, 1.0}) {
      CHECK(factor_curvature_at(g, f, r) == doctest::Approx(target).scale(m));
      CHECK(factor_curvature_simplified(g, f, r) == doctest::Approx(target).scale(m));
    }
  }
}

TEST_CASE("power factor curvature through the discrete conformal operator") {
  // Independent of the closed form: feed U = f^eta into the grid operator.
  const BarrierFactor f = BarrierFactor::power();
  const ModelGeometry g = make_geometry(5, 1, Model::FlatTube);
  const double eta = g.eta_value();
  const auto grid = share(RadialGrid::geometric(1e-3, 1.0, 800));
  const RadialField U = RadialField::sample(grid, [&](double r) { return std::pow(f.value(r), eta); });
  const RadialField R = conformal_scalar_curvature(g, U, g.base_curvature_function());
  for (Eigen::Index i = 1; i + 1 < R.size(); ++i) CHECK(R(i) == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("borderline curvature is positive and decays like L^(-1/3)") {
  const BarrierFactor f = BarrierFactor::borderline_log();
  for (auto [m, n] : std::vector<std::pair<int, int>>{{4, 1}, {6, 2}, {8, 3}}) {
    const ModelGeometry g = make_geometry(m, n, Model::FlatTube);
    for (double L = 2.0; L < 1e4; L *= 1.3) CHECK(factor_curvature_log(g, f, L) > 0.0);
    const double L = 1e9;
    CHECK(std::cbrt(L) * factor_curvature_log(g, f, L) == doctest::Approx(2.0 * n * (m - 1.0) / 3.0).epsilon(1e-3));
    for (double r : {1e-10, 1e-5, 0.1}) {
      CHECK(factor_curvature_log(g, f, -std::log(r)) == doctest::Approx(factor_curvature_at(g, f, r)).epsilon(1e-10));
    }
  }
}

TEST_CASE("positivity scan") {
  const PositivityScan ok = positivity_radius(make_geometry(5, 1, Model::FlatTube), BarrierFactor::power());
  CHECK(ok.delta == doctest::Approx(1.0));
  CHECK(ok.diagnostic.empty());
  // n > (m-2)/2: the power factor is negatively curved everywhere.
  const PositivityScan none = positivity_radius(make_geometry(3, 1, Model::FlatTube), BarrierFactor::power());
  CHECK(none.delta == 0.0);
  CHECK(none.diagnostic.rfind("empty", 0) == 0);
  const PositivityScan log_scan =
      positivity_radius(make_geometry(4, 1, Model::FlatTube), BarrierFactor::borderline_log());
  CHECK(log_scan.delta > 0.13);
}

TEST_CASE("rho is the scaled f g0 distance to delta") {
  for (const BarrierFactor& f : {BarrierFactor::power(), BarrierFactor::borderline_log()}) {
    const double delta = f.kind() == FactorKind::Power ? 0.5 : 0.1;
    const double eps = 0.2;
    for (double r : {1e-8, 1e-4, 1e-2}) {
      const double rho = rho_closed_form(f, eps, delta, r);
      CHECK(rho == doctest::Approx(eps * length_by_quadrature(f, r, delta)).epsilon(1e-9));
      const TestFunctionPhi tf(make_geometry(4, 1, Model::FlatTube), f, eps, delta);
      CHECK(tf.radius_at_rho(rho) == doctest::Approx(r).epsilon(1e-9));
      CHECK(tf.rho_from_log(-std::log(r)) == doctest::Approx(rho).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(rho_closed_form(BarrierFactor::borderline_log(), 0.2, 1.0, 0.5), DomainError);
}

TEST_CASE("phi derivatives match finite differences in the tilde metric") {
  const ModelGeometry g = make_geometry(5, 1, Model::FlatTube);
  const BarrierFactor f = BarrierFactor::power();
  const TestFunctionPhi tf(g, f, 0.2, 0.5);
  const double m = g.m();
  // Pick radii inside the transition band 1 < rho < 2.
  for (double rho : {1.2, 1.5, 1.8}) {
    const double r = tf.radius_at_rho(rho);
    const double h = 1e-5 * r;
    const double p0 = tf.phi(r), pp = tf.phi(r + h), pm = tf.phi(r - h);
    const double d1 = (pp - pm) / (2 * h);
    const double d2 = (pp - 2 * p0 + pm) / (h * h);
    const PhiDerivatives d = phi_derivatives(tf, r);
    CHECK(d.phi == doctest::Approx(p0));
    CHECK(d.dphi_dr == doctest::Approx(d1).epsilon(1e-6));
    CHECK(d.gradsq_tilde == doctest::Approx(d1 * d1 / f.value(r)).epsilon(1e-6));
    // Laplacian of f g0: f^{-1}(phi'' + A phi') + (m-2)/2 f^{-2} f' phi'.
    const double lap = (d2 + radial_drift(g, r) * d1) / f.value(r) +
                       0.5 * (m - 2.0) * f.first(r) * d1 / (f.value(r) * f.value(r));
    CHECK(d.lap_tilde == doctest::Approx(lap).epsilon(1e-4));
  }
}

TEST_CASE("fitted cutoff constant closes the inequality on the support") {
  gen::Source src(5);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = src.integer(1, 2);
    const int m = 2 * n + 3 + src.integer(0, 2);
    const ModelGeometry g = make_geometry(m, n, Model::FlatTube);
    const TestFunctionPhi tf(g, BarrierFactor::power(), src.uniform(0.05, 0.5), src.uniform(0.2, 0.9));
    const double C = fit_cutoff_constant(tf);
    CHECK(C > 0.0);
    for (int k = 0; k < 50; ++k) {
      const double r = tf.radius_at_rho(src.uniform(0.0, 1.999));
      CHECK(cutoff_inequality_margin(tf, C, r) <= 1e-6 * C);
    }
  }
}

TEST_CASE("supersolution is a constant metric factor in the tilde gauge") {
  const BarrierFactor f = BarrierFactor::power();
  const double eta = 0.75;
  const Supersolution V{2.0, f, eta};
  const auto grid = share(RadialGrid::geometric(1e-5, 0.5, 50));
  const RadialField u = from_tilde_gauge(V.sample(grid), f, eta);
  for (Eigen::Index i = 0; i < u.size(); ++i) CHECK(u(i) == doctest::Approx(std::pow(2.0, 1.0 / eta)));
}

TEST_CASE("tilde gauge round trip") {
  gen::Source src(3);
  for (int trial = 0; trial < 20; ++trial) {
    const BarrierFactor f = trial % 2 ? BarrierFactor::power() : BarrierFactor::borderline_log();
    const double eta = src.uniform(0.25, 2.0);
    const auto grid = share(RadialGrid::geometric(src.log_uniform(1e-9, 1e-3), 0.1, 40));
    const auto c = src.trig_coefficients(3, 0.3);
    const RadialField u = RadialField::sample(grid, [&](double r) { return 1.0 + gen::trig(c, r, 0.1); });
    const RadialField back = from_tilde_gauge(to_tilde_gauge(u, f, eta), f, eta);
    for (Eigen::Index i = 0; i < u.size(); ++i) CHECK(back(i) == doctest::Approx(u(i)).epsilon(1e-12));
  }
}

TEST_CASE("barrier constant takes the larger of interior and boundary data") {
  const BarrierFactor f = BarrierFactor::power();
  const auto grid = share(RadialGrid::uniform(0.1, 1.0, 19));
  const RadialField U0 = RadialField::sample(grid, [](double r) { return r; });
  // U0 f^eta = r^{1-2eta}; with eta = 1 the largest value is at r = 0.1.
  CHECK(barrier_constant(U0, {0.0}, f, 1.0, 0.5) == doctest::Approx(10.0));
  CHECK(barrier_constant(U0, {5.0}, f, 1.0, 0.5) == doctest::Approx(20.0));
  CHECK_THROWS_AS(barrier_constant(U0, {}, f, 1.0, 0.5), DomainError);
}
