#include "tikflow/problem.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tikflow/newton.hpp"

namespace tikflow {
namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    double v = std::stod(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("bad number in list: " + item);
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("empty number list");
  return values;
}

}  // namespace

Problem make_degenerate_quadratic(double m, double n) {
  if (m == 0.0 || n == 0.0)
    throw std::invalid_argument("degenerate quadratic requires m != 0 and n != 0");
  Problem pr;
  pr.id = "quad:" + format_number(m) + "," + format_number(n);
  pr.dimension = 2;
  Vec d(2);
  d << m, n;
  // The fused multiply-add keeps the residual m*x + n*y accurate even when
  // the point sits deep on the argmin line.
  auto residual = [m, n](const Vec& x) { return std::fma(m, x[0], n * x[1]); };
  pr.objective = [residual](const Vec& x) {
    const double s = residual(x);
    return s * s;
  };
  pr.gradient = [residual, d](const Vec& x) -> Vec { return 2.0 * residual(x) * d; };
  pr.hessian = [d](const Vec&) -> Mat { return 2.0 * d * d.transpose(); };
  pr.optimal_value = 0.0;
  pr.min_norm_solution = Vec::Zero(2);
  pr.argmin_description =
      "line { (s, -(m/n) s) : s real } with m=" + format_number(m) + ", n=" + format_number(n);
  Vec u(2);
  u << n, -m;
  u.normalize();
  pr.project_argmin = [u](const Vec& z) -> Vec { return u.dot(z) * u; };
  // argmin of (m x + n y)^2 + (w/2)|x|^2 is the origin for every w > 0.
  pr.regularized_argmin = [](double) -> Vec { return Vec::Zero(2); };
  return pr;
}

Problem make_shifted_quadratic(const Vec& c) {
  if (c.size() < 1) throw std::invalid_argument("shifted quadratic needs a nonempty center");
  Problem pr;
  pr.id = "shifted:";
  for (int i = 0; i < c.size(); ++i)
    pr.id += (i ? "," : "") + format_number(c[i]);
  pr.dimension = static_cast<int>(c.size());
  pr.objective = [c](const Vec& x) { return (x - c).squaredNorm(); };
  pr.gradient = [c](const Vec& x) -> Vec { return 2.0 * (x - c); };
  const int dim = pr.dimension;
  pr.hessian = [dim](const Vec&) -> Mat { return 2.0 * Mat::Identity(dim, dim); };
  pr.optimal_value = 0.0;
  pr.min_norm_solution = c;
  pr.argmin_description = "point { c }";
  pr.project_argmin = [c](const Vec&) -> Vec { return c; };
  // Stationarity of |x-c|^2 + (w/2)|x|^2: 2(x-c) + w x = 0.
  pr.regularized_argmin = [c](double w) -> Vec { return c / (1.0 + 0.5 * w); };
  return pr;
}

Problem make_logsumexp(const Mat& A, const Vec& b, const Vec& shift) {
  if (A.rows() != b.size() || A.cols() != shift.size())
    throw std::invalid_argument("logsumexp: inconsistent dimensions");
  if (!A.allFinite() || !b.allFinite() || !shift.allFinite())
    throw std::invalid_argument("logsumexp: non-finite data");

  auto scores = [A, b, shift](const Vec& x) -> Vec { return A * (x - shift) + b; };
  auto objective = [scores](const Vec& x) {
    Vec z = scores(x);
    const double m = z.maxCoeff();
    return m + std::log((z.array() - m).exp().sum());
  };
  auto weights = [scores](const Vec& x) -> Vec {
    Vec z = scores(x);
    const double m = z.maxCoeff();
    Vec w = (z.array() - m).exp();
    return w / w.sum();
  };
  auto gradient = [A, weights](const Vec& x) -> Vec { return A.transpose() * weights(x); };
  auto hessian = [A, weights](const Vec& x) -> Mat {
    Vec w = weights(x);
    Mat AW = A.transpose() * w.asDiagonal() * A;
    Vec g = A.transpose() * w;
    return AW - g * g.transpose();
  };

  NewtonSettings settings;
  settings.grad_tol = 1e-13;
  NewtonOutcome res = damped_newton(objective, gradient, hessian, shift, settings);
  if (!res.converged)
    throw ProblemConstructionError(
        "logsumexp: minimizer solve failed (residual " + format_number(res.grad_norm) +
        " after " + std::to_string(res.iterations) + " iterations); objective may be unbounded");

  Problem pr;
  pr.dimension = static_cast<int>(A.cols());
  pr.objective = objective;
  pr.gradient = gradient;
  pr.hessian = hessian;
  pr.min_norm_solution = res.x;
  pr.optimal_value = objective(res.x);
  pr.argmin_description = "unique interior minimizer, computed by damped Newton to 1e-13";
  Vec xs = res.x;
  pr.project_argmin = [xs](const Vec&) -> Vec { return xs; };
  return pr;
}

namespace {

Problem logsumexp_preset(int k) {
  Mat A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  Vec b(4), shift(2);
  if (k == 1) {
    b.setZero();
    shift.setZero();
  } else if (k == 2) {
    b << 0.2, -0.1, 0.05, 0.15;
    shift << 0.4, -0.25;
  } else {
    throw std::invalid_argument("unknown logsumexp preset " + std::to_string(k));
  }
  Problem pr = make_logsumexp(A, b, shift);
  pr.id = "logsumexp:preset-" + std::to_string(k);
  return pr;
}

}  // namespace

Problem problem_from_id(const std::string& id) {
  const auto colon = id.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("problem id needs 'kind:spec': " + id);
  const std::string kind = id.substr(0, colon);
  const std::string spec = id.substr(colon + 1);
  if (kind == "quad") {
    auto v = parse_number_list(spec);
    if (v.size() != 2) throw std::invalid_argument("quad wants two coefficients: " + id);
    return make_degenerate_quadratic(v[0], v[1]);
  }
  if (kind == "shifted") {
    auto v = parse_number_list(spec);
    Vec c = Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
    return make_shifted_quadratic(c);
  }
  if (kind == "logsumexp") {
    if (spec.rfind("preset-", 0) != 0)
      throw std::invalid_argument("logsumexp id wants 'logsumexp:preset-k': " + id);
    return logsumexp_preset(std::stoi(spec.substr(7)));
  }
  throw std::invalid_argument("unknown problem kind: " + id);
}

std::vector<std::string> catalog_ids() {
  return {"quad:5,1", "shifted:2,0", "logsumexp:preset-1", "logsumexp:preset-2"};
}

}  // namespace tikflow
