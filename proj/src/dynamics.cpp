#include "tikflow/dynamics.hpp"

#include <cmath>

namespace tikflow {

NonFiniteRhs::NonFiniteRhs(double t, const std::string& what_part)
    : std::runtime_error("non-finite " + what_part + " at t=" + std::to_string(t)), time(t) {}

Derivative rhs(const FlowState& state, const Params& params, const Problem& problem) {
  Derivative d;
  d.dx = state.v;
  Vec grad = problem.gradient(state.x);
  if (!grad.allFinite()) throw NonFiniteRhs(state.t, "gradient");
  const double damping = params.alpha / std::pow(state.t, params.q);
  const double tik = params.a / std::pow(state.t, params.p);
  d.dv = -damping * state.v - grad - tik * state.x;
  if (!d.dv.allFinite()) throw NonFiniteRhs(state.t, "derivative");
  return d;
}

namespace {

bool q1_remark_applies(const Params& p) { return p.q == 1.0 && p.alpha > 3.0 && p.a > 0.0; }

bool theorem_hypotheses_hold(const Params& p) {
  // 0 < q < 1, 0 < p <= 2, a > 0, and a >= q(1-q) when p = 2.
  if (!(p.q > 0.0 && p.q < 1.0)) return false;
  if (!(p.p > 0.0 && p.p <= 2.0)) return false;
  if (!(p.a > 0.0)) return false;
  if (p.p == 2.0 && p.a < p.q * (1.0 - p.q)) return false;
  return true;
}

}  // namespace

ValidatedParams validate(const Params& params) {
  if (!(params.t0 > 0.0)) throw std::invalid_argument("t0 must be positive");
  if (!(params.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(params.q > 0.0 && params.q <= 1.0)) throw std::invalid_argument("q must lie in (0,1]");
  if (!(params.p > 0.0)) throw std::invalid_argument("p must be positive");
  if (params.a < 0.0) throw std::invalid_argument("a must be nonnegative");
  if (!std::isfinite(params.alpha) || !std::isfinite(params.q) || !std::isfinite(params.a) ||
      !std::isfinite(params.p) || !std::isfinite(params.t0))
    throw std::invalid_argument("parameters must be finite");
  if (params.u0.size() != params.v0.size())
    throw std::invalid_argument("u0 and v0 dimensions differ");
  if (!params.u0.allFinite() || !params.v0.allFinite())
    throw std::invalid_argument("initial data must be finite");

  ValidatedParams out;
  out.params = params;
  if (q1_remark_applies(params)) {
    out.covered = true;
    out.annotation = "covered: q=1 with alpha>3 (classic damping remark)";
  } else if (theorem_hypotheses_hold(params)) {
    out.covered = true;
    out.annotation = "covered: 0<q<1, 0<p<=2" +
                     std::string(params.p == 2.0 ? ", a>=q(1-q)" : "") + ", a>0";
  } else {
    out.covered = false;
    out.annotation = "outside-guarantees";
  }
  return out;
}

ValidatedParams validate(const Params& params, const Problem& problem) {
  ValidatedParams out = validate(params);
  if (params.u0.size() != problem.dimension)
    throw std::invalid_argument("initial data dimension does not match the problem");
  return out;
}

}  // namespace tikflow
