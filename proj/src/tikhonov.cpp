#include "tikflow/tikhonov.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tikflow/newton.hpp"

namespace tikflow {

TikhonovSolveError::TikhonovSolveError(double t_, double best, int iters)
    : std::runtime_error("tikhonov solve at t=" + std::to_string(t_) +
                         " stopped with residual " + std::to_string(best)),
      t(t_),
      best_residual(best),
      iterations(iters) {}

namespace {

double regularization_weight(double t, double a, double p) { return a / std::pow(t, p); }

double curve_residual(const Problem& problem, const Vec& x, double w) {
  return (problem.gradient(x) + w * x).norm();
}

}  // namespace

TikhonovPoint tikhonov_point(const Problem& problem, double t, double a, double p,
                             const Vec* warm_start) {
  if (!(t > 0.0) || !(a > 0.0) || !(p > 0.0))
    throw std::invalid_argument("tikhonov_point wants t, a, p > 0");
  const double w = regularization_weight(t, a, p);
  const double residual_cap = 1e-10 * (1.0 + w);

  TikhonovPoint point;
  point.t = t;

  if (problem.regularized_argmin) {
    point.x = problem.regularized_argmin(w);
    point.solver_iterations = 0;
  } else {
    auto value = [&](const Vec& x) { return problem.objective(x) + 0.5 * w * x.squaredNorm(); };
    auto gradient = [&](const Vec& x) -> Vec { return problem.gradient(x) + w * x; };
    auto hessian = [&](const Vec& x) -> Mat {
      Mat H = problem.hessian(x);
      H.diagonal().array() += w;
      return H;
    };
    NewtonSettings settings;
    settings.grad_tol = 0.1 * residual_cap;
    Vec start = warm_start ? *warm_start : problem.min_norm_solution;
    NewtonOutcome out = damped_newton(value, gradient, hessian, std::move(start), settings);
    if (!out.converged) throw TikhonovSolveError(t, out.grad_norm, out.iterations);
    point.x = std::move(out.x);
    point.solver_iterations = out.iterations;
  }

  point.residual = curve_residual(problem, point.x, w);
  if (point.residual > residual_cap)
    throw TikhonovSolveError(t, point.residual, point.solver_iterations);
  if (point.x.norm() > problem.min_norm_solution.norm() + 1e-10)
    throw TikhonovSolveError(t, point.residual, point.solver_iterations);
  return point;
}

std::vector<TikhonovPoint> tikhonov_curve(const Problem& problem, double a, double p,
                                          std::span<const double> grid) {
  std::vector<TikhonovPoint> curve;
  curve.reserve(grid.size());
  const Vec* warm = nullptr;
  for (double t : grid) {
    curve.push_back(tikhonov_point(problem, t, a, p, warm));
    warm = &curve.back().x;
  }
  return curve;
}

CurveDerivativeReport curve_derivative_check(const Problem& problem, double a, double p,
                                             std::span<const double> grid) {
  if (grid.size() < 3) throw std::invalid_argument("derivative check needs >= 3 grid points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");

  const std::vector<TikhonovPoint> curve = tikhonov_curve(problem, a, p, grid);

  CurveDerivativeReport report;
  report.ok = true;
  report.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double h_minus = grid[i] - grid[i - 1];
    const double h_plus = grid[i + 1] - grid[i];
    const double spacing = 0.5 * (h_minus + h_plus);
    const Vec central = (curve[i + 1].x - curve[i - 1].x) / (h_minus + h_plus);
    // Second divided difference approximates d2/dt2 x_t / 2.
    const Vec second = ((curve[i + 1].x - curve[i].x) / h_plus -
                        (curve[i].x - curve[i - 1].x) / h_minus) /
                       (h_minus + h_plus);

    CurveDerivativePoint pt;
    pt.t = grid[i];
    pt.derivative_norm = central.norm();
    pt.bound = (p / grid[i]) * curve[i].x.norm();
    pt.slack = 10.0 * spacing * second.norm() + 1e-12 * (1.0 + curve[i].x.norm());
    pt.ok = pt.derivative_norm <= pt.bound + pt.slack;
    report.worst_margin = std::max(report.worst_margin, pt.derivative_norm - pt.bound - pt.slack);
    report.ok = report.ok && pt.ok;
    report.points.push_back(std::move(pt));
  }
  return report;
}

GapDecomposition gap_decomposition(const Problem& problem, const Vec& x, double t,
                                   double a, double p) {
  if (!x.allFinite()) throw std::invalid_argument("gap_decomposition wants a finite point");
  const double w = regularization_weight(t, a, p);
  const TikhonovPoint tik = tikhonov_point(problem, t, a, p);

  auto g_t = [&](const Vec& z) { return problem.objective(z) + 0.5 * w * z.squaredNorm(); };

  GapDecomposition out;
  out.gap = g_t(x) - g_t(tik.x);
  out.strong_lower_bound = 0.5 * w * (x - tik.x).squaredNorm();
  out.upper_bound_via_xstar = out.gap + 0.5 * w * problem.min_norm_solution.squaredNorm();
  if (out.gap < out.strong_lower_bound - 1e-10)
    throw std::logic_error("strong-convexity gap bound violated; curve solve is inconsistent");
  return out;
}

}  // namespace tikflow
