#ifndef TIKFLOW_DIAGNOSTICS_HPP
#define TIKFLOW_DIAGNOSTICS_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tikflow/integrator.hpp"
#include "tikflow/tikhonov.hpp"

namespace tikflow {

// Parameter regimes of the guarantee table, partitioning every valid Params.
// Boundary conventions: p = (3q+1)/2 belongs to STRONG_A, p = q+1 is CRITICAL.
enum class Regime { strong_a, strong_b, critical, weak, q1_classic, outside };

enum class ConvergenceMode { strong_to_min_norm, weak_to_some_minimizer, none_claimed };

struct RegimeReport {
  Regime regime = Regime::outside;
  ConvergenceMode mode = ConvergenceMode::none_claimed;
  double value_rate_exponent = 0.0;     // guaranteed g - g* decay t^-e
  double velocity_rate_exponent = 0.0;  // guaranteed |x'| decay t^-e
  bool little_o = false;                // o(.) instead of O(.)
  std::vector<std::pair<std::string, bool>> hypotheses_checked;
};

const char* regime_name(Regime r);
const char* mode_name(ConvergenceMode m);

RegimeReport classify_regime(const Params& params);
std::string to_kv_text(const RegimeReport& report);

// Lyapunov bookkeeping: mixing coefficient b in (0, alpha), Gronwall
// coefficient K below the proof cap, decay exponent r = max(q, p - q).
struct EnergyConfig {
  double b = 0.0;
  double K = 0.0;
  double r = 0.0;
};

// Proof cap on K for a given b; throws when the machinery does not cover the
// parameters (p > 2 with q < 1, or q = 1 with alpha <= 3).
double gronwall_cap(const Params& params, double b);

// b = alpha/2 (or (alpha+1)/2 when q = 1), K = 0.9 * cap when defined else 0.
EnergyConfig default_energy_config(const Params& params);

// E(t) = t^2q (g - g*) + (a/2) t^(2q-p) |x|^2 + 1/2 |b(x - x*) + t^q x'|^2
//        + b (alpha - b - q t^(q-1)) / 2 |x - x*|^2.
double energy_E(const FlowState& state, const Params& params, const Problem& problem,
                const EnergyConfig& cfg);

// Strong-convergence variant built on the Tikhonov curve point at the same t.
double energy_E_strong(const FlowState& state, const Params& params, const Problem& problem,
                       const EnergyConfig& cfg, const TikhonovPoint& tik);

// W(t) = 1/2 |x'|^2 + g(x) + (a / 2 t^p) |x|^2, decreasing along solutions.
double energy_W(const FlowState& state, const Params& params, const Problem& problem);

struct GronwallReport {
  bool holds = false;
  double onset_t1 = 0.0;      // earliest sample with no violation afterwards
  int violations = 0;
  int checked = 0;
  double worst_margin = 0.0;  // max over samples of lhs - rhs - slack
  double worst_time = 0.0;
};

// Discrete check of E'(t) + (K/t^r) E(t) <= (a b / 2) t^(q-p) |x*|^2 via
// central differences on the log grid; fails when violations persist through
// the end of the trajectory.
GronwallReport check_gronwall(const Trajectory& traj, const Params& params,
                              const Problem& problem, const EnergyConfig& cfg);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual_rms = 0.0;
  int n_points = 0;
  int n_excluded = 0;  // samples at or below the positivity floor
};

// Least-squares line through (ln t, ln y) for samples inside the window.
// Samples with y <= 1e-300 are excluded and counted; fewer than 10 usable
// points is an error.
RateFit fit_rate(std::span<const double> t, std::span<const double> y, double t_lo,
                 double t_hi);

enum class TrajectoryQuantity { speed_squared, value_gap };

struct IntegralEstimate {
  std::vector<double> t;
  std::vector<double> cumulative;
  double total = 0.0;
  double last_decade_fraction = 0.0;
  bool plateau = false;  // last decade contributes < 5% of the total
};

// Trapezoid cumulative integral of t^exponent * quantity over the sample grid.
IntegralEstimate integral_estimate(const Trajectory& traj, double exponent,
                                   TrajectoryQuantity quantity);

struct StabilizationReport {
  double oscillation = 0.0;  // max - min of |x(t) - ref| over the final decade
  double final_value = 0.0;
  bool stabilized = false;   // oscillation < 0.05 * (1 + final_value)
};

StabilizationReport limit_stabilization(const Trajectory& traj, const Vec& reference);

struct TailDecrease {
  double tail_now = 0.0;   // t^2q (g - g*) at the final sample
  double tail_prev = 0.0;  // same quantity one decade earlier
  bool decreased = false;
};

// Normalized-gap tail comparison used for the little-o check in weak regimes.
TailDecrease weak_tail_check(const Trajectory& traj, double q);

}  // namespace tikflow

#endif
