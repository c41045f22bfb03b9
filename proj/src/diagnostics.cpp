#include "tikflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace tikflow {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::strong_a: return "STRONG_A";
    case Regime::strong_b: return "STRONG_B";
    case Regime::critical: return "CRITICAL";
    case Regime::weak: return "WEAK";
    case Regime::q1_classic: return "Q1_CLASSIC";
    case Regime::outside: return "OUTSIDE";
  }
  return "?";
}

const char* mode_name(ConvergenceMode m) {
  switch (m) {
    case ConvergenceMode::strong_to_min_norm: return "strong-to-min-norm";
    case ConvergenceMode::weak_to_some_minimizer: return "weak-to-some-minimizer";
    case ConvergenceMode::none_claimed: return "none-claimed";
  }
  return "?";
}

RegimeReport classify_regime(const Params& pm) {
  validate(pm);
  RegimeReport rep;
  const double q = pm.q, p = pm.p, a = pm.a, alpha = pm.alpha;

  const bool q_interior = q > 0.0 && q < 1.0;
  const bool tikhonov_on = a > 0.0;
  const bool p2_mass_ok = p != 2.0 || a >= q * (1.0 - q);
  rep.hypotheses_checked = {
      {"alpha>0", alpha > 0.0},
      {"0<q<1", q_interior},
      {"q=1", q == 1.0},
      {"a>0", tikhonov_on},
      {"0<p<=2", p > 0.0 && p <= 2.0},
      {"a>=q(1-q) when p=2", p2_mass_ok},
      {"alpha>3 when q=1", q != 1.0 || alpha > 3.0},
  };

  if (q == 1.0) {
    if (alpha > 3.0 && tikhonov_on) {
      rep.regime = Regime::q1_classic;
      rep.mode = ConvergenceMode::none_claimed;
      rep.value_rate_exponent = std::min(p, 2.0);
      rep.velocity_rate_exponent = 0.5 * std::min(p, 2.0);
    }
    return rep;  // alpha <= 3 or a = 0: outside
  }
  if (!q_interior || !tikhonov_on) return rep;

  const double strong_split = (3.0 * q + 1.0) / 2.0;  // STRONG_B | STRONG_A
  const double critical_p = q + 1.0;

  if (p < strong_split) {
    rep.regime = Regime::strong_b;
    rep.mode = ConvergenceMode::strong_to_min_norm;
    rep.value_rate_exponent = p;
    rep.velocity_rate_exponent = 0.5 * (p + 1.0 - std::max(q, p - q));
  } else if (p < critical_p) {
    rep.regime = Regime::strong_a;
    rep.mode = ConvergenceMode::strong_to_min_norm;
    rep.velocity_rate_exponent = 2.0 * q - p + 1.0;
    rep.value_rate_exponent = p <= (4.0 * q + 2.0) / 3.0 ? p : 4.0 * q - 2.0 * p + 2.0;
  } else if (p == critical_p) {
    // Pointwise estimates only; with p = q+1 < 2 the sub-case q < p/2 applies.
    rep.regime = Regime::critical;
    rep.mode = ConvergenceMode::none_claimed;
    rep.value_rate_exponent = 2.0 * q;
    rep.velocity_rate_exponent = q;
  } else if (p <= 2.0 && p2_mass_ok) {
    rep.regime = Regime::weak;
    rep.mode = ConvergenceMode::weak_to_some_minimizer;
    rep.value_rate_exponent = 2.0 * q;
    rep.velocity_rate_exponent = q;
    rep.little_o = true;
  }
  return rep;
}

std::string to_kv_text(const RegimeReport& rep) {
  char buf[128];
  std::string out;
  out += std::string("regime=") + regime_name(rep.regime) + "\n";
  out += std::string("convergence_mode=") + mode_name(rep.mode) + "\n";
  std::snprintf(buf, sizeof(buf), "value_rate_exponent=%.17g\n", rep.value_rate_exponent);
  out += buf;
  std::snprintf(buf, sizeof(buf), "velocity_rate_exponent=%.17g\n", rep.velocity_rate_exponent);
  out += buf;
  out += std::string("little_o=") + (rep.little_o ? "true" : "false") + "\n";
  for (const auto& [name, ok] : rep.hypotheses_checked)
    out += "hypothesis." + name + "=" + (ok ? "true" : "false") + "\n";
  return out;
}

double gronwall_cap(const Params& pm, double b) {
  if (pm.q == 1.0) {
    if (!(pm.alpha > 3.0) || !(b > 2.0 && b < pm.alpha - 1.0))
      throw std::domain_error("gronwall cap for q=1 needs alpha>3 and b in (2, alpha-1)");
    return std::min({b - 2.0, pm.alpha - 1.0 - b, pm.a / (pm.alpha + b - 1.0)});
  }
  if (!(b > 0.0 && b < pm.alpha))
    throw std::domain_error("gronwall cap needs b in (0, alpha)");
  if (pm.p > 2.0)
    throw std::domain_error("no gronwall cap for p>2 with q<1");
  if (pm.p == 2.0)
    return std::min({b, pm.alpha - b, (pm.a - pm.q * (1.0 - pm.q)) / (pm.alpha + b)});
  return std::min({b, pm.alpha - b, pm.a / (pm.alpha + b)});
}

EnergyConfig default_energy_config(const Params& pm) {
  EnergyConfig cfg;
  cfg.b = (pm.q == 1.0 && pm.alpha > 3.0) ? 0.5 * (pm.alpha + 1.0) : 0.5 * pm.alpha;
  cfg.r = std::max(pm.q, pm.p - pm.q);
  try {
    const double cap = gronwall_cap(pm, cfg.b);
    cfg.K = cap > 0.0 ? 0.9 * cap : 0.0;
  } catch (const std::domain_error&) {
    cfg.K = 0.0;
  }
  return cfg;
}

double energy_E(const FlowState& s, const Params& pm, const Problem& problem,
                const EnergyConfig& cfg) {
  const double t = s.t, q = pm.q;
  const Vec& xs = problem.min_norm_solution;
  const double gap = problem.objective(s.x) - problem.optimal_value;
  const Vec mix = cfg.b * (s.x - xs) + std::pow(t, q) * s.v;
  return std::pow(t, 2.0 * q) * gap +
         0.5 * pm.a * std::pow(t, 2.0 * q - pm.p) * s.x.squaredNorm() +
         0.5 * mix.squaredNorm() +
         0.5 * cfg.b * (pm.alpha - cfg.b - q * std::pow(t, q - 1.0)) *
             (s.x - xs).squaredNorm();
}

double energy_E_strong(const FlowState& s, const Params& pm, const Problem& problem,
                       const EnergyConfig& cfg, const TikhonovPoint& tik) {
  if (tik.t != s.t)
    throw std::invalid_argument("energy_E_strong wants the curve point at the sample time");
  const double t = s.t, q = pm.q;
  const double w = pm.a / std::pow(t, pm.p);
  auto g_t = [&](const Vec& z) { return problem.objective(z) + 0.5 * w * z.squaredNorm(); };
  const Vec mix = cfg.b * (s.x - tik.x) + std::pow(t, q) * s.v;
  return std::pow(t, 2.0 * q) * (g_t(s.x) - g_t(tik.x)) + 0.5 * mix.squaredNorm() +
         0.5 * cfg.b * (pm.alpha - cfg.b - q * std::pow(t, q - 1.0)) *
             (s.x - tik.x).squaredNorm();
}

double energy_W(const FlowState& s, const Params& pm, const Problem& problem) {
  return 0.5 * s.v.squaredNorm() + problem.objective(s.x) +
         0.5 * pm.a / std::pow(s.t, pm.p) * s.x.squaredNorm();
}

GronwallReport check_gronwall(const Trajectory& traj, const Params& pm,
                              const Problem& problem, const EnergyConfig& cfg) {
  if (!(cfg.K > 0.0)) throw std::invalid_argument("check_gronwall wants K > 0");
  const auto& ss = traj.samples;
  if (ss.size() < 5) throw std::invalid_argument("check_gronwall wants >= 5 samples");

  const std::size_t n = ss.size();
  std::vector<double> E(n), lnt(n);
  for (std::size_t i = 0; i < n; ++i) {
    E[i] = energy_E({ss[i].t, ss[i].x, ss[i].v}, pm, problem, cfg);
    lnt[i] = std::log(ss[i].t);
  }

  const double xstar2 = problem.min_norm_solution.squaredNorm();
  GronwallReport rep;
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  std::size_t last_violation = 0;
  bool any = false;

  // Checkable range: i-1 .. i+2 must exist for the derivative and the
  // third-difference slack.
  const std::size_t lo = 1, hi = n - 3;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double ds = 0.5 * (lnt[i + 1] - lnt[i - 1]);
    const double dEdt = (E[i + 1] - E[i - 1]) / (2.0 * ds * ss[i].t);
    // |d3E/ds3| from the plain third difference on the uniform log grid.
    double d3 = std::abs(E[i + 2] - 3.0 * E[i + 1] + 3.0 * E[i] - E[i - 1]);
    if (i >= 2) d3 = std::max(d3, std::abs(E[i + 1] - 3.0 * E[i] + 3.0 * E[i - 1] - E[i - 2]));
    d3 /= ds * ds * ds;
    const double slack = 10.0 * ds * ds * d3 / ss[i].t + 1e-8 * (1.0 + std::abs(E[i]));

    const double lhs = dEdt + cfg.K / std::pow(ss[i].t, cfg.r) * E[i];
    const double rhs = 0.5 * pm.a * cfg.b * std::pow(ss[i].t, pm.q - pm.p) * xstar2;
    const double margin = lhs - rhs - slack;
    ++rep.checked;
    if (margin > rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_time = ss[i].t;
    }
    if (margin > 0.0) {
      ++rep.violations;
      last_violation = i;
      any = true;
    }
  }

  if (!any) {
    rep.holds = true;
    rep.onset_t1 = ss[lo].t;
  } else if (last_violation < hi) {
    rep.holds = true;
    rep.onset_t1 = ss[last_violation + 1].t;
  } else {
    rep.holds = false;  // violated through the end of the trajectory
    rep.onset_t1 = traj.t_end;
  }
  return rep;
}

RateFit fit_rate(std::span<const double> t, std::span<const double> y, double t_lo,
                 double t_hi) {
  if (!(t_lo < t_hi)) throw std::invalid_argument("fit_rate wants t_lo < t_hi");
  if (t.size() != y.size()) throw std::invalid_argument("fit_rate wants matching series");
  constexpr double floor = 1e-300;

  RateFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  std::vector<double> ls, lv;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(y[i] > floor)) {
      ++fit.n_excluded;
      continue;
    }
    ls.push_back(std::log(t[i]));
    lv.push_back(std::log(y[i]));
  }
  fit.n_points = static_cast<int>(ls.size());
  if (fit.n_points < 10)
    throw std::invalid_argument("fit_rate has fewer than 10 usable points in the window");

  double sm = 0.0, ym = 0.0;
  for (int i = 0; i < fit.n_points; ++i) {
    sm += ls[i];
    ym += lv[i];
  }
  sm /= fit.n_points;
  ym /= fit.n_points;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < fit.n_points; ++i) {
    sxx += (ls[i] - sm) * (ls[i] - sm);
    sxy += (ls[i] - sm) * (lv[i] - ym);
  }
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * sm;
  double rss = 0.0;
  for (int i = 0; i < fit.n_points; ++i) {
    const double r = lv[i] - (fit.intercept + fit.slope * ls[i]);
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / fit.n_points);
  return fit;
}

IntegralEstimate integral_estimate(const Trajectory& traj, double exponent,
                                   TrajectoryQuantity quantity) {
  const auto& ss = traj.samples;
  IntegralEstimate est;
  est.t.reserve(ss.size());
  est.cumulative.reserve(ss.size());
  auto value = [&](const TrajectorySample& s) {
    const double q = quantity == TrajectoryQuantity::speed_squared ? s.speed * s.speed
                                                                   : s.value_gap;
    return std::pow(s.t, exponent) * q;
  };
  double cum = 0.0;
  double prev_t = 0.0, prev_v = 0.0;
  for (std::size_t i = 0; i < ss.size(); ++i) {
    const double v = value(ss[i]);
    if (i > 0) cum += 0.5 * (v + prev_v) * (ss[i].t - prev_t);
    prev_t = ss[i].t;
    prev_v = v;
    est.t.push_back(ss[i].t);
    est.cumulative.push_back(cum);
  }
  est.total = cum;
  if (!ss.empty()) {
    const double cutoff = traj.t_end / 10.0;
    double cum_at_cutoff = 0.0;
    for (std::size_t i = 0; i < ss.size(); ++i)
      if (ss[i].t <= cutoff) cum_at_cutoff = est.cumulative[i];
    est.last_decade_fraction = est.total > 0.0 ? (est.total - cum_at_cutoff) / est.total : 0.0;
    est.plateau = est.last_decade_fraction < 0.05;
  }
  return est;
}

StabilizationReport limit_stabilization(const Trajectory& traj, const Vec& reference) {
  StabilizationReport rep;
  const double cutoff = traj.t_end / 10.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& s : traj.samples) {
    if (s.t < cutoff) continue;
    const double d = (s.x - reference).norm();
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    rep.final_value = d;
  }
  rep.oscillation = hi - lo;
  rep.stabilized = rep.oscillation < 0.05 * (1.0 + rep.final_value);
  return rep;
}

TailDecrease weak_tail_check(const Trajectory& traj, double q) {
  const auto& ss = traj.samples;
  if (ss.size() < 2) throw std::invalid_argument("weak_tail_check wants samples");
  const double t_prev_target = traj.t_end / 10.0;
  std::size_t prev = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ss.size(); ++i) {
    const double d = std::abs(ss[i].t - t_prev_target);
    if (d < best) {
      best = d;
      prev = i;
    }
  }
  TailDecrease out;
  out.tail_now = std::pow(ss.back().t, 2.0 * q) * ss.back().value_gap;
  out.tail_prev = std::pow(ss[prev].t, 2.0 * q) * ss[prev].value_gap;
  out.decreased = out.tail_now < out.tail_prev;
  return out;
}

}  // namespace tikflow
