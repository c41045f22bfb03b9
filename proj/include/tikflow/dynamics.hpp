#ifndef TIKFLOW_DYNAMICS_HPP
#define TIKFLOW_DYNAMICS_HPP

#include <stdexcept>
#include <string>

#include "tikflow/problem.hpp"

namespace tikflow {

// Coefficients and initial data of the flow
//   x'' + (alpha / t^q) x' + grad g(x) + (a / t^p) x = 0,
//   x(t0) = u0, x'(t0) = v0.
struct Params {
  double alpha = 3.5;
  double q = 0.7;
  double a = 1.0;
  double p = 1.2;
  double t0 = 1.0;
  Vec u0;
  Vec v0;
};

struct FlowState {
  double t = 0.0;
  Vec x;
  Vec v;
};

struct Derivative {
  Vec dx;
  Vec dv;
};

class NonFiniteRhs : public std::runtime_error {
 public:
  NonFiniteRhs(double t, const std::string& what_part);
  double time;
};

// First-order form of the flow: dx = v, dv = -(alpha/t^q) v - grad g(x) - (a/t^p) x.
// Throws NonFiniteRhs when the gradient (or the assembled derivative) is not finite.
Derivative rhs(const FlowState& state, const Params& params, const Problem& problem);

struct ValidatedParams {
  Params params;
  bool covered = false;     // hypotheses of some covered theorem hold
  std::string annotation;   // regime note or "outside-guarantees"
};

// Structural validation (hard errors) plus a coverage annotation. Values are
// never altered; configurations outside every theorem are accepted and only
// annotated, so exploratory simulation stays possible.
ValidatedParams validate(const Params& params);
ValidatedParams validate(const Params& params, const Problem& problem);

}  // namespace tikflow

#endif
