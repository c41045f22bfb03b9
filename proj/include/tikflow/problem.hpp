#ifndef TIKFLOW_PROBLEM_HPP
#define TIKFLOW_PROBLEM_HPP

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tikflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A convex objective with exact gradient, known optimal value and known
// minimal-norm minimizer. Instances are immutable after construction and
// safe to share across threads.
struct Problem {
  std::string id;
  int dimension = 0;
  std::function<double(const Vec&)> objective;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
  double optimal_value = 0.0;
  Vec min_norm_solution;
  std::string argmin_description;
  // Nearest point of the argmin set (used by stabilization diagnostics).
  std::function<Vec(const Vec&)> project_argmin;
  // Closed-form minimizer of g(x) + (w/2)|x|^2 for quadratic members;
  // empty when the regularized subproblem needs an iterative solve.
  std::function<Vec(double)> regularized_argmin;
};

class ProblemConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// g(x,y) = (m x + n y)^2. Flat along the line m x + n y = 0; the
// minimal-norm minimizer is the origin.
Problem make_degenerate_quadratic(double m, double n);

// g(x) = |x - c|^2 with unique minimizer c.
Problem make_shifted_quadratic(const Vec& c);

// g(x) = log sum_i exp(A_i . (x - shift) + b_i). The optimal value and
// minimizer are computed once at construction by a damped Newton solve and
// frozen into the catalog entry; construction fails if the solve does not
// reach tolerance (e.g. the objective is unbounded below).
Problem make_logsumexp(const Mat& A, const Vec& b, const Vec& shift);

// Members addressable by string id: "quad:m,n", "shifted:c1,c2,...",
// "logsumexp:preset-k" (k = 1, 2).
Problem problem_from_id(const std::string& id);

std::vector<std::string> catalog_ids();

}  // namespace tikflow

#endif
