#include "tikflow/newton.hpp"

#include <cmath>
#include <limits>

namespace tikflow {

NewtonOutcome damped_newton(const std::function<double(const Vec&)>& value,
                            const std::function<Vec(const Vec&)>& gradient,
                            const std::function<Mat(const Vec&)>& hessian,
                            Vec start, const NewtonSettings& settings) {
  NewtonOutcome out;
  out.x = std::move(start);
  double f = value(out.x);
  Vec g = gradient(out.x);
  out.grad_norm = g.norm();

  for (out.iterations = 0; out.iterations < settings.max_iterations; ++out.iterations) {
    if (!std::isfinite(f) || !g.allFinite()) return out;
    if (out.grad_norm <= settings.grad_tol) {
      out.converged = true;
      return out;
    }
    Mat H = hessian(out.x);
    Eigen::LDLT<Mat> ldlt(H);
    Vec step;
    bool usable = ldlt.info() == Eigen::Success;
    if (usable) {
      step = ldlt.solve(-g);
      usable = step.allFinite() && g.dot(step) < 0.0;
    }
    if (!usable) {
      // Singular or indefinite model; fall back to steepest descent once the
      // Hessian carries no information (flat directions of an unbounded
      // objective land here and fail the line search below).
      step = -g;
    }

    const double directional = g.dot(step);
    // Absolute slack keeps the search usable once the predicted decrease
    // falls below the rounding noise of the objective.
    const double noise = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
    double stepsize = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < settings.max_backtracks; ++ls) {
      Vec trial = out.x + stepsize * step;
      double ft = value(trial);
      if (std::isfinite(ft) && ft <= f + settings.armijo_slope * stepsize * directional + noise) {
        out.x = std::move(trial);
        f = ft;
        accepted = true;
        break;
      }
      stepsize *= settings.backtrack;
    }
    if (!accepted) return out;
    if (out.x.norm() > settings.divergence_radius) return out;
    g = gradient(out.x);
    out.grad_norm = g.norm();
  }
  out.converged = out.grad_norm <= settings.grad_tol;
  return out;
}

}  // namespace tikflow
