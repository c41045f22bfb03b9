#ifndef TIKFLOW_INTEGRATOR_HPP
#define TIKFLOW_INTEGRATOR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tikflow/dynamics.hpp"
#include "tikflow/problem.hpp"

namespace tikflow {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 0.0;   // <= 0: defaults to 1e-4 * t0
  double max_step = 0.0;       // <= 0: defaults to (t_end - t0) / 10
  std::int64_t max_rhs_evals = 50'000'000;
  int sample_points_per_decade = 200;
  double fixed_step = 0.0;     // > 0 disables the error controller (order studies)
};

struct TrajectorySample {
  double t = 0.0;
  Vec x;
  Vec v;
  double value_gap = 0.0;      // g(x) - min g
  double speed = 0.0;          // |x'|
  double dist_to_xstar = 0.0;  // |x - x*|
};

struct IntegrationStats {
  std::int64_t accepted_steps = 0;
  std::int64_t rejected_steps = 0;
  std::int64_t rhs_evals = 0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  IntegrationStats stats;
  IntegratorConfig config;
  Params params;
  std::string problem_id;
  double t_end = 0.0;
};

enum class AbortReason { rhs_budget_exhausted, non_finite_state };

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(AbortReason r, double reached, FlowState last, Trajectory partial_traj);
  AbortReason reason;
  double reached_time;
  FlowState last_state;
  Trajectory partial;
};

// Strictly increasing sample grid, uniform in ln t, first point t0, last t_end.
std::vector<double> log_grid(double t0, double t_end, int points_per_decade);

// Dormand-Prince 5(4) with PI step-size control and quartic dense output,
// sampled on the log grid. Deterministic: identical inputs give bit-identical
// trajectories.
Trajectory integrate(const Problem& problem, const Params& params, double t_end,
                     const IntegratorConfig& config = {});

// g == 0 in one dimension; turns the flow into x'' = -(alpha/t^q) x' - (a/t^p) x.
Problem free_particle_problem();

// Max |x - closed form| over the sample grid for x'' = -(3/t) x', x(1)=0,
// x'(1)=1 integrated to t=100 (exact solution x(t) = (1 - t^-2)/2).
double linear_damped_ode_error(const IntegratorConfig& config);

// Endpoint errors of fixed-step runs on the same validation equation at t=10.
std::vector<double> fixed_step_order_errors(const std::vector<double>& steps);

struct SelfTestEntry {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct SelfTestReport {
  std::vector<SelfTestEntry> entries;
  bool pass = false;
};

// Closed-form validation problems under default tolerances.
SelfTestReport self_test();

}  // namespace tikflow

#endif
