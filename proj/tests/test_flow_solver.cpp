#include <cmath>
#include <vector>

#include <doctest.h>

#include "generators.hpp"
#include "yamabe/flow_solver.hpp"

using namespace yamabe;

namespace {

FlowState round_sphere(int m, Eigen::Index nodes, const FlowConfig& cfg, double u0 = 1.0) {
  const ModelGeometry g = make_geometry(m, 0, Model::SphereTube);
  const auto grid = share(RadialGrid::full_chart(g, nodes));
  const double U0 = std::pow(u0, g.eta_value());
  return make_flow_state(g, RadialField::sample(grid, [U0](double) { return U0; }), Gauge::base(),
                         BoundarySpec::pole_regularity(), BoundarySpec::pole_regularity(), cfg);
}

}  // namespace

TEST_CASE("round spheres shrink homothetically") {
  // g(t) = (1 - m(m-1) t) g_round.
  FlowConfig cfg;
  cfg.dt_initial = 1e-5;
  cfg.dt_max = 5e-5;
  for (int m : {3, 4, 5}) {
    const double t = 0.5 / (m * (m - 1.0));
    const FlowResult res = run(round_sphere(m, 64, cfg), cfg, t);
    const RadialField u = metric_factor(res.final_state);
    for (Eigen::Index i = 0; i < u.size(); ++i) CHECK(u(i) == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(res.final_state.t == doctest::Approx(t));
  }
}

TEST_CASE("extinction of the round 3-sphere is detected near 1/6") {
  FlowConfig cfg;
  cfg.dt_initial = 1e-5;
  cfg.dt_max = 1e-4;
  const FlowResult res = run(round_sphere(3, 64, cfg), cfg, 1.0);
  REQUIRE(res.extinction_time.has_value());
  CHECK(*res.extinction_time == doctest::Approx(1.0 / 6.0).epsilon(5e-3));
  CHECK(res.final_state.status == FlowStatus::Extinct);
}

TEST_CASE("scaling the initial metric rescales time") {
  // u0 = 2 on S^3 extinguishes at 2/6.
  FlowConfig cfg;
  cfg.dt_initial = 1e-5;
  cfg.dt_max = 2e-4;
  const FlowResult res = run(round_sphere(3, 48, cfg, 2.0), cfg, 1.0);
  REQUIRE(res.extinction_time.has_value());
  CHECK(*res.extinction_time == doctest::Approx(1.0 / 3.0).epsilon(5e-3));
}

TEST_CASE("ordered initial data stay ordered") {
  gen::Source src(17);
  const ModelGeometry g = make_geometry(3, 0, Model::SphereTube);
  const double eta = g.eta_value();
  const auto grid = share(RadialGrid::full_chart(g, 80));
  FlowConfig cfg;
  cfg.dt_initial = 1e-5;
  cfg.dt_max = 1e-3;
  for (int trial = 0; trial < 6; ++trial) {
    const auto ca = src.trig_coefficients(3, 0.1);
    const auto cb = src.trig_coefficients(3, 0.1);
    const double lift = src.uniform(0.01, 0.5);
    auto ua = [&](double r) { return 1.0 + gen::trig(ca, std::cos(r), 2.0); };
    auto ub = [&](double r) { return ua(r) + lift * (1.2 + gen::trig(cb, std::cos(r), 2.0)); };
    auto start = [&](auto fn) {
      return make_flow_state(g, RadialField::sample(grid, [&](double r) { return std::pow(fn(r), eta); }),
                             Gauge::base(), BoundarySpec::pole_regularity(), BoundarySpec::pole_regularity(), cfg);
    };
    const FlowState a = run(start(ua), cfg, 0.08).final_state;
    const FlowState b = run(start(ub), cfg, 0.08).final_state;
    CHECK((b.U.values - a.U.values).minCoeff() > 0.0);
  }
}

TEST_CASE("boundary traces interpolate linearly and inflate by K^eta") {
  BoundaryTrace tr;
  tr.push(0.0, 1.0);
  tr.push(1.0, 3.0);
  tr.push(1.0, 5.0);
  CHECK(tr(0.5) == doctest::Approx(3.0));
  CHECK(tr(-1.0) == doctest::Approx(1.0));
  CHECK(tr(2.0) == doctest::Approx(5.0));
  CHECK_THROWS_AS(tr.push(0.5, 1.0), DomainError);
  const BoundarySpec b = BoundarySpec::inflated(tr, 16.0, 0.25);
  CHECK(b.value(0.5) == doctest::Approx(6.0));
  CHECK_THROWS_AS(BoundarySpec::inflated(tr, 0.5, 0.25), DomainError);
  CHECK_THROWS_AS(BoundarySpec::constant(-1.0), DomainError);
  CHECK_THROWS_AS(BoundarySpec::zero_flux().value(0.0), DomainError);
}

TEST_CASE("flow states are validated") {
  const ModelGeometry g = make_geometry(3, 0, Model::SphereTube);
  FlowConfig cfg;
  const auto truncated = share(RadialGrid::geometric(1e-2, g.domain_max(), 40, true));
  const RadialField ones = RadialField::sample(truncated, [](double) { return 1.0; });
  CHECK_THROWS_AS(make_flow_state(g, ones, Gauge::base(), BoundarySpec::pole_regularity(),
                                  BoundarySpec::pole_regularity(), cfg),
                  DomainError);
  CHECK_NOTHROW(make_flow_state(g, ones, Gauge::base(), BoundarySpec::constant(1.0), BoundarySpec::pole_regularity(),
                                cfg));
  const RadialField bad = RadialField::sample(truncated, [](double r) { return r - 1.0; });
  CHECK_THROWS(make_flow_state(g, bad, Gauge::base(), BoundarySpec::constant(1.0), BoundarySpec::pole_regularity(),
                               cfg));
  FlowConfig wrong;
  wrong.dt_min = 1.0;
  CHECK_THROWS_AS(wrong.validate(), ConfigError);
}

TEST_CASE("Dirichlet data is held at the boundary node") {
  const ModelGeometry g = make_geometry(5, 1, Model::FlatTube);
  const double eta = g.eta_value();
  const auto grid = share(RadialGrid::geometric(0.05, 1.0, 60));
  FlowConfig cfg;
  cfg.dt_initial = 1e-5;
  const RadialField U0 = RadialField::sample(grid, [&](double r) { return std::pow(1.0 + r, eta); });
  const FlowState s =
      make_flow_state(g, U0, Gauge::base(), BoundarySpec::constant(std::pow(1.05, eta)),
                      BoundarySpec::dirichlet([&](double t) { return std::pow(2.0 + t, eta); }), cfg);
  const FlowState end = run(s, cfg, 0.01).final_state;
  CHECK(end.U(0) == doctest::Approx(std::pow(1.05, eta)));
  CHECK(end.U(end.U.size() - 1) == doctest::Approx(std::pow(2.01, eta)));
}

TEST_CASE("flat metric is stationary") {
  const ModelGeometry g = make_geometry(4, 1, Model::FlatTube);
  const auto grid = share(RadialGrid::geometric(0.01, 1.0, 50));
  FlowConfig cfg;
  const FlowState s = make_flow_state(g, RadialField::sample(grid, [](double) { return 1.0; }), Gauge::base(),
                                      BoundarySpec::constant(1.0), BoundarySpec::zero_flux(), cfg);
  const FlowState end = run(s, cfg, 0.1).final_state;
  CHECK((end.U.values.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("tilde and base gauges describe the same flow") {
  const ModelGeometry g = make_geometry(5, 1, Model::FlatTube);
  const BarrierFactor f = BarrierFactor::power();
  const double eta = g.eta_value();
  const auto grid = share(RadialGrid::geometric(0.02, 0.5, 120));
  FlowConfig cfg;
  cfg.dt_initial = cfg.dt_max = cfg.dt_min = 1e-4;
  auto u0 = [](double r) { return 1.0 + 0.5 * std::sin(6.0 * r) + 2.0 * r * r; };
  const RadialField u = RadialField::sample(grid, u0);
  const FlowState base = make_flow_state(
      g, RadialField(grid, u.values.array().pow(eta).matrix()), Gauge::base(),
      BoundarySpec::constant(std::pow(u0(0.02), eta)), BoundarySpec::constant(std::pow(u0(0.5), eta)), cfg);
  const FlowState tilde =
      make_flow_state(g, to_tilde_gauge(u, f, eta), Gauge::tilde(f),
                      BoundarySpec::constant(std::pow(u0(0.02) / f.value(0.02), eta)),
                      BoundarySpec::constant(std::pow(u0(0.5) / f.value(0.5), eta)), cfg);
  const RadialField ub = metric_factor(run(base, cfg, 0.01).final_state);
  const RadialField ut = metric_factor(run(tilde, cfg, 0.01).final_state);
  for (Eigen::Index i = 0; i < ub.size(); ++i) CHECK(ut(i) == doctest::Approx(ub(i)).epsilon(2e-3));
}

TEST_CASE("monitors, sup ratio and completeness length") {
  FlowConfig cfg;
  cfg.dt_initial = 1e-5;
  cfg.dt_max = 1e-3;
  RunOptions opts;
  opts.output_interval = 0.01;
  opts.keep_snapshots = true;
  long calls = 0;
  opts.on_step = [&](const FlowState&) { ++calls; };
  const FlowState s0 = round_sphere(3, 40, cfg);
  const FlowResult res =
      run(s0, cfg, 0.05, {{"u0", [](const FlowState& s) { return metric_factor(s)(0); }}}, opts);
  const MonitorSeries& m = res.monitor("u0");
  CHECK(m.times.size() == 6);
  CHECK(res.snapshots.size() == 6);
  CHECK(m.values.back() == doctest::Approx(0.7).epsilon(5e-3));
  CHECK(calls == res.final_state.steps);
  CHECK_THROWS_AS(res.monitor("missing"), DomainError);

  const RadialField u_init = metric_factor(s0);
  CHECK(sup_ratio(res.final_state, u_init, 1.0) == doctest::Approx(0.7).epsilon(5e-3));
  // Constant u = 1: length is the coordinate distance.
  CHECK(completeness_length(u_init, 2.0) == doctest::Approx(2.0 - u_init.r()(0)));
  CHECK_THROWS_AS(completeness_length(u_init, 10.0), DomainError);
}

TEST_CASE("barrier monitor vanishes below the supersolution") {
  const ModelGeometry g = make_geometry(5, 1, Model::FlatTube);
  const BarrierFactor f = BarrierFactor::power();
  const Supersolution V{1.0, f, g.eta_value()};
  const TestFunctionPhi tf(g, f, 0.2, 0.5);
  const auto grid = share(RadialGrid::geometric(1e-4, 0.5, 60));
  FlowConfig cfg;
  RadialField U = V.sample(grid);
  U.values *= 0.8;
  const FlowState s = make_flow_state(g, U, Gauge::tilde(f), BoundarySpec::barrier_level(U(0)),
                                      BoundarySpec::constant(U(U.size() - 1)), cfg);
  CHECK(barrier_monitor(s, V, tf) == 0.0);
  U.values *= 2.0;
  const FlowState above = make_flow_state(g, U, Gauge::tilde(f), BoundarySpec::barrier_level(U(0)),
                                          BoundarySpec::constant(U(U.size() - 1)), cfg);
  CHECK(barrier_monitor(above, V, tf) > 0.0);
  const FlowState base = make_flow_state(g, U, Gauge::base(), BoundarySpec::constant(1.0),
                                         BoundarySpec::constant(1.0), cfg);
  CHECK_THROWS_AS(barrier_monitor(base, V, tf), DomainError);
}
