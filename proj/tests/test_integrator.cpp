#include <doctest.h>

#include <cmath>

#include "tikflow/diagnostics.hpp"
#include "tikflow/integrator.hpp"

using namespace tikflow;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Params paper_run_params() {
  Params pm;
  pm.alpha = 3.5;
  pm.q = 0.7;
  pm.a = 1.0;
  pm.p = 1.2;
  pm.u0 = vec2(1, 1);
  pm.v0 = vec2(-1, -1);
  return pm;
}

}  // namespace

TEST_CASE("log grid: shape and endpoints") {
  auto g = log_grid(1.0, 1e4, 200);
  CHECK(g.size() == 801);
  CHECK(g.front() == 1.0);
  CHECK(g.back() == 1e4);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  // Uniform in ln t.
  const double step = std::log(g[1]) - std::log(g[0]);
  for (std::size_t i = 1; i + 1 < g.size(); ++i)
    CHECK(std::log(g[i + 1]) - std::log(g[i]) == doctest::Approx(step).epsilon(1e-9));

  auto partial = log_grid(1.0, 500.0, 200);
  CHECK(partial.size() == static_cast<std::size_t>(std::ceil(200 * std::log10(500.0))) + 1);
  CHECK(partial.back() == 500.0);
  CHECK_THROWS_AS(log_grid(0.0, 10.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(log_grid(2.0, 1.0, 100), std::invalid_argument);
}

TEST_CASE("equilibrium start stays at the minimizer") {
  Problem pr = make_degenerate_quadratic(5, 1);
  Params pm = paper_run_params();
  pm.u0 = vec2(0, 0);
  pm.v0 = vec2(0, 0);
  Trajectory traj = integrate(pr, pm, 100.0);
  for (const auto& s : traj.samples) {
    CHECK(s.x.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(s.v.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("linear damped equation matches the closed form") {
  // x'' = -(3/t) x', x(1)=0, x'(1)=1 has x(t) = (1 - t^-2)/2, x'(t) = t^-3.
  Problem pr = free_particle_problem();
  Params pm;
  pm.alpha = 3.0;
  pm.q = 1.0;
  pm.a = 0.0;
  pm.p = 1.0;
  pm.u0 = Vec::Zero(1);
  pm.v0 = Vec::Ones(1);
  Trajectory traj = integrate(pr, pm, 100.0);
  double worst_x = 0.0, worst_v = 0.0;
  for (const auto& s : traj.samples) {
    worst_x = std::max(worst_x, std::abs(s.x[0] - 0.5 * (1.0 - 1.0 / (s.t * s.t))));
    worst_v = std::max(worst_v, std::abs(s.v[0] - 1.0 / (s.t * s.t * s.t)));
  }
  CHECK(worst_x <= 1e-8);
  CHECK(worst_v <= 1e-8);
  CHECK(std::abs(traj.samples.back().x[0] - 0.49995) <= 1e-8);
}

TEST_CASE("self test passes under defaults") {
  SelfTestReport report = self_test();
  CHECK(report.pass);
  CHECK(report.entries.size() == 3);
  for (const auto& e : report.entries) {
    INFO(e.name, " value=", e.value, " threshold=", e.threshold);
    CHECK(e.pass);
  }
}

TEST_CASE("tightening rel_tol reduces the validation error monotonically") {
  std::vector<double> errors;
  for (double rt : {1e-6, 5e-7, 2.5e-7}) {
    IntegratorConfig cfg;
    cfg.rel_tol = rt;
    cfg.abs_tol = 1e-12;
    errors.push_back(linear_damped_ode_error(cfg));
  }
  CHECK(errors[1] < errors[0]);
  CHECK(errors[2] < errors[1]);
}

TEST_CASE("fixed-step order study: global error scales like h^5") {
  const std::vector<double> hs = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> errs = fixed_step_order_errors(hs);
  REQUIRE(errs.size() == 4);
  for (double e : errs) CHECK(e > 0.0);
  // Least-squares slope of ln err vs ln h.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double lx = std::log(hs[i]), ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(hs.size());
  const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
  CHECK(slope == doctest::Approx(5.0).epsilon(0.08));
}

TEST_CASE("reference run: W decreases and both errors collapse") {
  Problem pr = make_degenerate_quadratic(5, 1);
  Params pm = paper_run_params();
  Trajectory traj = integrate(pr, pm, 100.0);

  double w_prev = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.samples) {
    const double w = energy_W({s.t, s.x, s.v}, pm, pr);
    CHECK(w <= w_prev + 1e-8 * (1.0 + std::abs(w_prev)));
    w_prev = w;
  }
  const auto& first = traj.samples.front();
  const auto& last = traj.samples.back();
  CHECK(first.t == 1.0);
  CHECK(last.t == 100.0);
  CHECK(last.dist_to_xstar < 1e-2 * first.dist_to_xstar);
  CHECK(last.value_gap < 1e-6 * first.value_gap);
  for (const auto& s : traj.samples) CHECK(s.value_gap >= -1e-10);
}

TEST_CASE("determinism: identical inputs give bit-identical trajectories") {
  Problem pr = make_degenerate_quadratic(5, 1);
  Params pm = paper_run_params();
  IntegratorConfig cfg;
  cfg.abs_tol = 1e-40;
  Trajectory a = integrate(pr, pm, 100.0, cfg);
  Trajectory b = integrate(pr, pm, 100.0, cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].t == b.samples[i].t);
    CHECK(a.samples[i].x == b.samples[i].x);
    CHECK(a.samples[i].v == b.samples[i].v);
    CHECK(a.samples[i].value_gap == b.samples[i].value_gap);
  }
  CHECK(a.stats.accepted_steps == b.stats.accepted_steps);
  CHECK(a.stats.rhs_evals == b.stats.rhs_evals);
}

TEST_CASE("rhs evaluation budget aborts with a partial trajectory") {
  Problem pr = make_degenerate_quadratic(5, 1);
  Params pm = paper_run_params();
  IntegratorConfig cfg;
  cfg.max_rhs_evals = 1000;
  try {
    integrate(pr, pm, 1e4, cfg);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.reason == AbortReason::rhs_budget_exhausted);
    CHECK(e.reached_time > pm.t0);
    CHECK(e.reached_time < 1e4);
    CHECK(!e.partial.samples.empty());
    CHECK(e.partial.samples.back().t <= e.reached_time);
    CHECK(e.last_state.x.size() == 2);
  }
}

TEST_CASE("non-finite gradient aborts with the last good state") {
  Problem pr = make_degenerate_quadratic(5, 1);
  Params pm = paper_run_params();
  pm.u0 = vec2(1e307, 0);  // gradient overflows at the first evaluation
  pm.v0 = vec2(0, 0);
  try {
    integrate(pr, pm, 100.0);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.reason == AbortReason::non_finite_state);
    CHECK(e.reached_time == pm.t0);
    CHECK(e.last_state.x.allFinite());
  }
}

TEST_CASE("integrate validates its window and configuration") {
  Problem pr = make_degenerate_quadratic(5, 1);
  Params pm = paper_run_params();
  CHECK_THROWS_AS(integrate(pr, pm, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(integrate(pr, pm, pm.t0), std::invalid_argument);

  IntegratorConfig cfg;
  cfg.rel_tol = 1e-15;  // below the supported floor
  CHECK_THROWS_AS(integrate(pr, pm, 10.0, cfg), std::invalid_argument);
  cfg = {};
  cfg.abs_tol = 0.0;
  CHECK_THROWS_AS(integrate(pr, pm, 10.0, cfg), std::invalid_argument);
  cfg = {};
  cfg.sample_points_per_decade = 0;
  CHECK_THROWS_AS(integrate(pr, pm, 10.0, cfg), std::invalid_argument);
  cfg = {};
  cfg.max_rhs_evals = 0;
  CHECK_THROWS_AS(integrate(pr, pm, 10.0, cfg), std::invalid_argument);
}
