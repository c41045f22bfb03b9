#include "tikflow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace tikflow {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;

// Fifth-order weights minus the embedded fourth-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// Dense-output coefficients of the quartic interpolant.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Step-size controller constants (PI control, Hairer's choices).
constexpr double safety = 0.9;
constexpr double pi_beta = 0.04;
constexpr double error_expo = 0.2 - pi_beta * 0.75;
constexpr double shrink_cap = 5.0;  // h shrinks at most 5x per step
constexpr double grow_cap = 10.0;   // and grows at most 10x

struct StepAbort {
  AbortReason reason;
  double t;
  Vec y;
};

// Integrates y' = f(t, y) with dense-output sampling. Sink receives
// (sample_index, t_sample, y_sample) for every grid time in [t0, t_end].
template <class F, class Sink>
IntegrationStats dopri5_run(F&& f, double t0, Vec y, double t_end,
                            const IntegratorConfig& cfg,
                            const std::vector<double>& sample_times, Sink&& sink) {
  const int n = static_cast<int>(y.size());
  IntegrationStats stats;

  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  Vec ytmp(n), y1(n), yerr(n);
  Vec cont1(n), cont2(n), cont3(n), cont4(n), cont5(n);

  const double hmax = cfg.max_step > 0.0 ? cfg.max_step : (t_end - t0) / 10.0;
  const bool fixed = cfg.fixed_step > 0.0;
  double h = fixed ? cfg.fixed_step
                   : (cfg.initial_step > 0.0 ? cfg.initial_step : 1e-4 * t0);
  h = std::min({h, hmax, t_end - t0});

  double t = t0;
  std::size_t next_sample = 0;
  while (next_sample < sample_times.size() && sample_times[next_sample] <= t0) {
    sink(next_sample, t0, y);
    ++next_sample;
  }

  f(t, y, k1);
  ++stats.rhs_evals;
  if (!k1.allFinite()) throw StepAbort{AbortReason::non_finite_state, t, y};

  double facold = 1e-4;
  bool rejected_last = false;

  while (t < t_end) {
    if (stats.rhs_evals + 6 > cfg.max_rhs_evals)
      throw StepAbort{AbortReason::rhs_budget_exhausted, t, y};
    if (h < 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t))
      throw StepAbort{AbortReason::non_finite_state, t, y};

    bool last = false;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }

    ytmp = y + h * (a21 * k1);
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + h, y1, k7);
    stats.rhs_evals += 6;

    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    bool finite = y1.allFinite();
    if (finite) {
      for (int i = 0; i < n; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
        const double r = yerr[i] / sc;
        err += r * r;
      }
      err = std::sqrt(err / n);
      finite = std::isfinite(err);
    }

    if (!finite && !fixed) {
      ++stats.rejected_steps;
      rejected_last = true;
      h *= 0.5;
      continue;
    }
    if (!finite && fixed) throw StepAbort{AbortReason::non_finite_state, t, y};

    if (fixed || err <= 1.0) {
      // Accept; prepare the dense-output polynomial before advancing.
      if (next_sample < sample_times.size() && sample_times[next_sample] <= t + h) {
        cont1 = y;
        cont2 = y1 - y;
        cont3 = h * k1 - cont2;
        cont4 = cont2 - h * k7 - cont3;
        cont5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next_sample < sample_times.size() && sample_times[next_sample] <= t + h) {
          const double theta = std::min(1.0, (sample_times[next_sample] - t) / h);
          const double th1 = 1.0 - theta;
          ytmp = cont1 +
                 theta * (cont2 + th1 * (cont3 + theta * (cont4 + th1 * cont5)));
          sink(next_sample, sample_times[next_sample], ytmp);
          ++next_sample;
        }
      }
      ++stats.accepted_steps;
      t = last ? t_end : t + h;
      y.swap(y1);
      k1.swap(k7);

      if (!fixed) {
        const double fac11 = std::pow(std::max(err, 1e-30), error_expo);
        double fac = fac11 / std::pow(facold, pi_beta);
        fac = std::max(1.0 / grow_cap, std::min(shrink_cap, fac / safety));
        double hnew = h / fac;
        facold = std::max(err, 1e-4);
        if (rejected_last) hnew = std::min(hnew, h);
        rejected_last = false;
        h = std::min(hnew, hmax);
      }
    } else {
      ++stats.rejected_steps;
      rejected_last = true;
      const double fac11 = std::pow(err, error_expo);
      h = h / std::min(shrink_cap, fac11 / safety);
    }
  }

  // Emit any trailing samples equal to t_end (grid rounding).
  while (next_sample < sample_times.size()) {
    sink(next_sample, sample_times[next_sample], y);
    ++next_sample;
  }
  return stats;
}

TrajectorySample make_sample(double t, const Vec& y, const Problem& problem) {
  const int d = problem.dimension;
  TrajectorySample s;
  s.t = t;
  s.x = y.head(d);
  s.v = y.tail(d);
  s.value_gap = problem.objective(s.x) - problem.optimal_value;
  s.speed = s.v.norm();
  s.dist_to_xstar = (s.x - problem.min_norm_solution).norm();
  return s;
}

}  // namespace

IntegrationError::IntegrationError(AbortReason r, double reached, FlowState last,
                                   Trajectory partial_traj)
    : std::runtime_error(std::string("integration aborted (") +
                         (r == AbortReason::rhs_budget_exhausted ? "rhs evaluation budget exhausted"
                                                                 : "non-finite state") +
                         ") at t=" + std::to_string(reached)),
      reason(r),
      reached_time(reached),
      last_state(std::move(last)),
      partial(std::move(partial_traj)) {}

std::vector<double> log_grid(double t0, double t_end, int points_per_decade) {
  if (!(t0 > 0.0) || !(t_end > t0)) throw std::invalid_argument("log_grid wants 0 < t0 < t_end");
  if (points_per_decade < 1) throw std::invalid_argument("points_per_decade must be >= 1");
  const double decades = std::log10(t_end / t0);
  const int m = std::max(1, static_cast<int>(std::ceil(points_per_decade * decades)));
  std::vector<double> ts(m + 1);
  const double l0 = std::log(t0), l1 = std::log(t_end);
  ts[0] = t0;
  for (int i = 1; i < m; ++i) ts[i] = std::exp(l0 + (l1 - l0) * i / m);
  ts[m] = t_end;
  return ts;
}

namespace {

void validate_config(const IntegratorConfig& c) {
  if (!(c.rel_tol >= 1e-14)) throw std::invalid_argument("rel_tol must be >= 1e-14");
  if (!(c.abs_tol > 0.0)) throw std::invalid_argument("abs_tol must be positive");
  if (c.initial_step < 0.0 || c.max_step < 0.0 || c.fixed_step < 0.0)
    throw std::invalid_argument("step sizes must be nonnegative");
  if (c.max_rhs_evals <= 0) throw std::invalid_argument("max_rhs_evals must be positive");
  if (c.sample_points_per_decade < 1)
    throw std::invalid_argument("sample_points_per_decade must be >= 1");
}

}  // namespace

Trajectory integrate(const Problem& problem, const Params& params, double t_end,
                     const IntegratorConfig& config) {
  validate(params, problem);
  validate_config(config);
  if (!(t_end > params.t0)) throw std::invalid_argument("t_end must exceed t0");

  const int d = problem.dimension;
  Trajectory traj;
  traj.config = config;
  traj.params = params;
  traj.problem_id = problem.id;
  traj.t_end = t_end;

  const std::vector<double> grid =
      log_grid(params.t0, t_end, config.sample_points_per_decade);
  traj.samples.reserve(grid.size());

  Vec y0(2 * d);
  y0.head(d) = params.u0;
  y0.tail(d) = params.v0;

  const double alpha = params.alpha, q = params.q, a = params.a, p = params.p;
  auto f = [&](double t, const Vec& y, Vec& dydt) {
    const auto x = y.head(d);
    const auto v = y.tail(d);
    dydt.head(d) = v;
    dydt.tail(d) = -(alpha / std::pow(t, q)) * v - problem.gradient(x) -
                   (a / std::pow(t, p)) * x;
  };
  auto sink = [&](std::size_t, double t, const Vec& y) {
    traj.samples.push_back(make_sample(t, y, problem));
  };

  try {
    traj.stats = dopri5_run(f, params.t0, std::move(y0), t_end, config, grid, sink);
  } catch (StepAbort& ab) {
    FlowState last{ab.t, ab.y.head(d), ab.y.tail(d)};
    throw IntegrationError(ab.reason, ab.t, std::move(last), std::move(traj));
  }
  return traj;
}

Problem free_particle_problem() {
  Problem pr;
  pr.id = "free:1";
  pr.dimension = 1;
  pr.objective = [](const Vec&) { return 0.0; };
  pr.gradient = [](const Vec&) -> Vec { return Vec::Zero(1); };
  pr.hessian = [](const Vec&) -> Mat { return Mat::Zero(1, 1); };
  pr.optimal_value = 0.0;
  pr.min_norm_solution = Vec::Zero(1);
  pr.argmin_description = "every point (objective identically zero)";
  pr.project_argmin = [](const Vec& z) -> Vec { return z; };
  return pr;
}

namespace {

Params linear_damped_params() {
  Params pm;
  pm.alpha = 3.0;
  pm.q = 1.0;
  pm.a = 0.0;
  pm.p = 1.0;
  pm.t0 = 1.0;
  pm.u0 = Vec::Zero(1);
  pm.v0 = Vec::Ones(1);
  return pm;
}

double linear_damped_exact(double t) { return 0.5 * (1.0 - 1.0 / (t * t)); }

}  // namespace

double linear_damped_ode_error(const IntegratorConfig& config) {
  Problem pr = free_particle_problem();
  Trajectory traj = integrate(pr, linear_damped_params(), 100.0, config);
  double worst = 0.0;
  for (const auto& s : traj.samples)
    worst = std::max(worst, std::abs(s.x[0] - linear_damped_exact(s.t)));
  return worst;
}

std::vector<double> fixed_step_order_errors(const std::vector<double>& steps) {
  Problem pr = free_particle_problem();
  std::vector<double> errors;
  errors.reserve(steps.size());
  for (double h : steps) {
    IntegratorConfig cfg;
    cfg.fixed_step = h;
    cfg.sample_points_per_decade = 1;
    Trajectory traj = integrate(pr, linear_damped_params(), 10.0, cfg);
    errors.push_back(std::abs(traj.samples.back().x[0] - linear_damped_exact(10.0)));
  }
  return errors;
}

SelfTestReport self_test() {
  SelfTestReport report;
  IntegratorConfig defaults;

  {
    Problem pr = make_degenerate_quadratic(5.0, 1.0);
    Params pm;
    pm.u0 = Vec::Zero(2);
    pm.v0 = Vec::Zero(2);
    Trajectory traj = integrate(pr, pm, 100.0, defaults);
    double worst = 0.0;
    for (const auto& s : traj.samples)
      worst = std::max({worst, s.x.cwiseAbs().maxCoeff(), s.v.cwiseAbs().maxCoeff()});
    report.entries.push_back({"equilibrium_start", worst, defaults.abs_tol,
                              worst <= defaults.abs_tol});
  }
  {
    const double err = linear_damped_ode_error(defaults);
    report.entries.push_back({"linear_damped_ode", err, 1e-8, err <= 1e-8});
  }
  {
    Vec c(1);
    c << 2.0;
    Problem pr = make_shifted_quadratic(c);
    Params pm;
    pm.alpha = 3.0;
    pm.q = 1.0;
    pm.a = 0.0;
    pm.p = 1.0;
    pm.u0 = Vec::Zero(1);
    pm.v0 = Vec::Zero(1);
    Trajectory coarse = integrate(pr, pm, 100.0, defaults);
    IntegratorConfig tight = defaults;
    tight.rel_tol = 1e-12;
    tight.abs_tol = 1e-14;
    Trajectory fine = integrate(pr, pm, 100.0, tight);
    double worst = 0.0;
    for (std::size_t i = 0; i < coarse.samples.size(); ++i)
      worst = std::max(worst, std::abs(coarse.samples[i].x[0] - fine.samples[i].x[0]));
    const double cap = 100.0 * defaults.rel_tol;
    report.entries.push_back({"shifted_quadratic_reference", worst, cap, worst <= cap});
  }

  report.pass = true;
  for (const auto& e : report.entries) report.pass = report.pass && e.pass;
  return report;
}

}  // namespace tikflow
