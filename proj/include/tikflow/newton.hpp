#ifndef TIKFLOW_NEWTON_HPP
#define TIKFLOW_NEWTON_HPP

#include <Eigen/Dense>
#include <functional>

namespace tikflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct NewtonSettings {
  double grad_tol = 1e-12;
  int max_iterations = 100;
  double armijo_slope = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  double divergence_radius = 1e8;
};

struct NewtonOutcome {
  Vec x;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped Newton with Armijo backtracking for smooth convex objectives.
// Returns converged=false when the Hessian solve yields no usable descent
// direction (singular model, unbounded objective) or the iterate diverges.
NewtonOutcome damped_newton(const std::function<double(const Vec&)>& value,
                            const std::function<Vec(const Vec&)>& gradient,
                            const std::function<Mat(const Vec&)>& hessian,
                            Vec start, const NewtonSettings& settings = {});

}  // namespace tikflow

#endif
