#ifndef TIKFLOW_TIKHONOV_HPP
#define TIKFLOW_TIKHONOV_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "tikflow/problem.hpp"

namespace tikflow {

// One point of the viscosity curve x_t = argmin g(x) + (a / 2 t^p) |x|^2.
struct TikhonovPoint {
  double t = 0.0;
  Vec x;
  double residual = 0.0;  // | grad g(x_t) + (a/t^p) x_t |
  int solver_iterations = 0;
};

class TikhonovSolveError : public std::runtime_error {
 public:
  TikhonovSolveError(double t, double best_residual, int iterations);
  double t;
  double best_residual;
  int iterations;
};

// Quadratic catalog members use their closed form; everything else is solved
// by damped Newton with Armijo line search, warm-started from `warm_start`
// when given. Warm-start state must not be shared across concurrent callers.
TikhonovPoint tikhonov_point(const Problem& problem, double t, double a, double p,
                             const Vec* warm_start = nullptr);

// Sequential sweep over an increasing grid, warm-starting each solve from the
// previous curve point.
std::vector<TikhonovPoint> tikhonov_curve(const Problem& problem, double a, double p,
                                          std::span<const double> grid);

struct CurveDerivativePoint {
  double t = 0.0;
  double derivative_norm = 0.0;  // central-difference |d/dt x_t|
  double bound = 0.0;            // (p/t) |x_t|
  double slack = 0.0;            // discretization allowance
  bool ok = false;
};

struct CurveDerivativeReport {
  std::vector<CurveDerivativePoint> points;
  bool ok = false;
  double worst_margin = 0.0;  // max of derivative_norm - bound - slack
};

// Checks |d/dt x_t| <= (p/t)|x_t| by central differences on the grid, with
// slack 10 * spacing * |local second difference| to absorb discretization.
CurveDerivativeReport curve_derivative_check(const Problem& problem, double a, double p,
                                             std::span<const double> grid);

struct GapDecomposition {
  double gap = 0.0;                   // g_t(x) - g_t(x_t)
  double strong_lower_bound = 0.0;    // (a / 2 t^p) |x - x_t|^2
  double upper_bound_via_xstar = 0.0; // gap + (a / 2 t^p) |x*|^2 >= g(x) - g(x*)
};

GapDecomposition gap_decomposition(const Problem& problem, const Vec& x, double t,
                                   double a, double p);

}  // namespace tikflow

#endif
