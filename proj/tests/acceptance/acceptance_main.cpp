// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tikflow/experiments.hpp"

using namespace tikflow;
using Clock = std::chrono::steady_clock;

namespace {

struct CriterionResult {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<CriterionResult> g_results;

void record(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  g_results.push_back({id, name, pass, detail, seconds});
}

std::string fmt(double v) {
  char b[48];
  std::snprintf(b, sizeof(b), "%.6g", v);
  return b;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Every trajectory produced by the suite is kept for the W-descent criterion.
struct CheckedRun {
  std::string label;
  Problem problem;
  Params params;
  Trajectory traj;
};
std::vector<CheckedRun> g_runs;

const Trajectory& checked_integrate(const std::string& label, const Problem& problem,
                                    const Params& params, double t_end,
                                    const IntegratorConfig& cfg) {
  g_runs.push_back({label, problem, params, integrate(problem, params, t_end, cfg)});
  return g_runs.back().traj;
}

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Params flow_params(double alpha, double q, double a, double p) {
  Params pm;
  pm.alpha = alpha;
  pm.q = q;
  pm.a = a;
  pm.p = p;
  pm.u0 = vec2(1, 1);
  pm.v0 = vec2(-1, -1);
  return pm;
}

const TrajectorySample& sample_nearest(const Trajectory& traj, double t) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < traj.samples.size(); ++i)
    if (std::abs(traj.samples[i].t - t) < std::abs(traj.samples[best].t - t)) best = i;
  return traj.samples[best];
}

// ---------------------------------------------------------------------------

void criterion_1_integrator_validation() {
  const auto start = Clock::now();
  Problem pr = free_particle_problem();
  Params pm;
  pm.alpha = 3.0;
  pm.q = 1.0;
  pm.a = 0.0;
  pm.p = 1.0;
  pm.u0 = Vec::Zero(1);
  pm.v0 = Vec::Ones(1);
  const Trajectory& traj = checked_integrate("linear-damped", pr, pm, 100.0, {});
  const double err_end = std::abs(traj.samples.back().x[0] - 0.49995);

  const std::vector<double> hs = {0.1, 0.05, 0.025, 0.0125};
  const std::vector<double> errs = fixed_step_order_errors(hs);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double lx = std::log(hs[i]), ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(hs.size());
  const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);

  const double secs = elapsed(start);
  const bool pass = err_end <= 1e-8 && std::abs(slope - 5.0) <= 0.4 && secs < 5.0;
  record(1, "integrator validation", pass,
         "closed-form error " + fmt(err_end) + " (<=1e-8), order slope " + fmt(slope) +
             " (5 +/- 0.4)",
         secs);
}

void criterion_3_4_figures() {
  for (FigurePreset preset : {FigurePreset::fig1, FigurePreset::fig2}) {
    const bool is1 = preset == FigurePreset::fig1;
    const auto start = Clock::now();
    OutputOptions out;
    out.directory = is1 ? "acceptance_artifacts/fig1" : "acceptance_artifacts/fig2";
    out.csv = true;
    out.svg = true;
    FigureVerdict verdict = figures(preset, out);
    const double secs = elapsed(start);

    std::string detail;
    for (const auto& f : verdict.findings)
      detail += std::string(f.pass ? "[ok] " : "[violated] ") + f.name + ": " + f.detail + "  ";
    const ExperimentConfig cfg = figure_config(preset);
    for (const auto& r : verdict.artifacts.results)
      if (r.ok)
        g_runs.push_back({(is1 ? "fig1 " : "fig2 ") + r.label,
                          problem_from_id(cfg.problem_id), r.params, r.trajectory});
    record(is1 ? 3 : 4, is1 ? "figure-1 reproduction" : "figure-2 reproduction",
           verdict.pass && secs < 30.0, detail, secs);
  }
}

void criterion_5_6_strong_grid() {
  const auto start = Clock::now();
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-40;  // keeps collapsed modes resolved relative to themselves

  const std::vector<std::pair<double, double>> grid = {
      {0.5, 1.0}, {0.6, 1.5}, {0.7, 1.4}, {0.3, 0.5}};
  bool rates_pass = true;
  std::string rates_detail;
  bool strong_pass = true;
  std::string strong_detail;

  for (const auto& [q, p] : grid) {
    for (const std::string id : {"quad:5,1", "shifted:2,0"}) {
      Problem pr = problem_from_id(id);
      Params pm = flow_params(3.5, q, 1.0, p);
      const RegimeReport regime = classify_regime(pm);
      char label[64];
      std::snprintf(label, sizeof(label), "strong q=%g p=%g %s", q, p, id.c_str());
      const Trajectory& traj = checked_integrate(label, pr, pm, 1e4, cfg);

      std::vector<double> ts, gaps, speeds;
      for (const auto& s : traj.samples) {
        ts.push_back(s.t);
        gaps.push_back(s.value_gap);
        speeds.push_back(s.speed);
      }
      const RateFit fg = fit_rate(ts, gaps, 1e2, 1e4);
      const RateFit fv = fit_rate(ts, speeds, 1e2, 1e4);
      const bool ok_gap = fg.slope <= -regime.value_rate_exponent + 0.15;
      const bool ok_speed = fv.slope <= -regime.velocity_rate_exponent + 0.15;
      rates_pass = rates_pass && ok_gap && ok_speed;
      rates_detail += std::string(label) + " gap " + fmt(fg.slope) + "<=" +
                      fmt(-regime.value_rate_exponent + 0.15) + (ok_gap ? " ok" : " VIOLATED") +
                      ", speed " + fmt(fv.slope) + "<=" +
                      fmt(-regime.velocity_rate_exponent + 0.15) +
                      (ok_speed ? " ok; " : " VIOLATED; ");

      if (id == "quad:5,1") {
        const double d_end = traj.samples.back().dist_to_xstar;
        const double d_10 = sample_nearest(traj, 10.0).dist_to_xstar;
        const bool ok = d_end < 1e-2 && d_end < 0.1 * d_10;
        strong_pass = strong_pass && ok;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "(q=%g,p=%g) |x(1e4)|=%s vs |x(10)|=%s%s; ", q, p,
                      fmt(d_end).c_str(), fmt(d_10).c_str(), ok ? "" : " VIOLATED");
        strong_detail += buf;
      }
    }
  }
  const double secs = elapsed(start);
  record(5, "rate soundness on the strong grid", rates_pass && secs < 120.0, rates_detail,
         secs);
  record(6, "strong convergence to the minimal-norm solution", strong_pass, strong_detail,
         secs);
}

void criterion_7_weak_regime() {
  const auto start = Clock::now();
  Problem pr = problem_from_id("shifted:2,0");
  bool pass = true;
  std::string detail;
  for (const auto& [q, p] : std::vector<std::pair<double, double>>{{0.4, 1.6}, {0.3, 2.0}}) {
    Params pm = flow_params(3.5, q, 1.0, p);
    char label[48];
    std::snprintf(label, sizeof(label), "weak q=%g p=%g", q, p);
    const Trajectory& traj = checked_integrate(label, pr, pm, 1e4, {});

    const IntegralEstimate est = integral_estimate(traj, q, TrajectoryQuantity::speed_squared);
    const TailDecrease tail = weak_tail_check(traj, q);
    const Vec reference = pr.project_argmin(traj.samples.back().x);
    const StabilizationReport stab = limit_stabilization(traj, reference);

    const bool ok = est.plateau && tail.decreased && stab.stabilized;
    pass = pass && ok;
    detail += std::string(label) + ": plateau tail-fraction " + fmt(est.last_decade_fraction) +
              ", normalized gap " + fmt(tail.tail_prev) + " -> " + fmt(tail.tail_now) +
              ", osc " + fmt(stab.oscillation) + (ok ? " ok; " : " VIOLATED; ");
  }
  const double secs = elapsed(start);
  record(7, "weak-regime integral, little-o and stabilization checks", pass && secs < 60.0,
         detail, secs);
}

void criterion_8_gronwall() {
  const auto start = Clock::now();
  Problem pr = problem_from_id("shifted:2,0");
  Params pm = flow_params(3.5, 0.7, 1.0, 1.2);
  IntegratorConfig cfg;
  cfg.abs_tol = 1e-40;
  const Trajectory& traj = checked_integrate("gronwall", pr, pm, 1e4, cfg);

  EnergyConfig good = default_energy_config(pm);  // b = alpha/2, K = 0.9 * cap
  const GronwallReport ok_rep = check_gronwall(traj, pm, pr, good);

  EnergyConfig bad = good;
  bad.K = 10.0 * gronwall_cap(pm, good.b);
  const GronwallReport bad_rep = check_gronwall(traj, pm, pr, bad);

  const bool pass = ok_rep.holds && !bad_rep.holds;
  record(8, "gronwall inequality with falsifiability", pass,
         "K=0.9cap holds from t1=" + fmt(ok_rep.onset_t1) + " (worst margin " +
             fmt(ok_rep.worst_margin) + "); K=10cap flagged=" +
             (bad_rep.holds ? "no" : "yes") + " (" + std::to_string(bad_rep.violations) +
             " violations, worst at t=" + fmt(bad_rep.worst_time) + ")",
         elapsed(start));
}

void criterion_9_tikhonov_suite() {
  const auto start = Clock::now();
  bool pass = true;
  std::string detail;

  // Closed form of the shifted-quadratic curve point.
  Problem shifted = problem_from_id("shifted:2,0");
  const TikhonovPoint pt = tikhonov_point(shifted, 10.0, 1.0, 2.0);
  const double closed_err = std::abs(pt.x[0] - 1.9900497512437811) + std::abs(pt.x[1]);
  pass = pass && closed_err <= 1e-9;
  detail += "closed-form error " + fmt(closed_err) + "; ";

  const auto grid = log_grid(1.0, 1e3, 50);
  for (const auto& id : catalog_ids()) {
    Problem pr = problem_from_id(id);
    const auto curve = tikhonov_curve(pr, 1.0, 1.2, grid);
    double worst_res = 0.0, worst_excess = -1.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double w = 1.0 / std::pow(grid[i], 1.2);
      worst_res = std::max(worst_res, curve[i].residual / (1e-10 * (1.0 + w)));
      worst_excess =
          std::max(worst_excess, curve[i].x.norm() - pr.min_norm_solution.norm());
    }
    const CurveDerivativeReport deriv = curve_derivative_check(pr, 1.0, 1.2, grid);
    const TikhonovPoint tail = tikhonov_point(pr, 1e6, 1.0, 1.2);
    const double tail_dist = (tail.x - pr.min_norm_solution).norm();
    const bool ok = worst_res <= 1.0 && worst_excess <= 1e-10 && deriv.ok &&
                    tail_dist < 1e-6;
    pass = pass && ok;
    detail += id + ": residual-ratio " + fmt(worst_res) + ", norm-excess " +
              fmt(worst_excess) + ", derivative-bound " + (deriv.ok ? "ok" : "VIOLATED") +
              ", |x_t - x*| at 1e6 = " + fmt(tail_dist) + (ok ? "; " : " VIOLATED; ");
  }
  record(9, "tikhonov curve suite", pass, detail, elapsed(start));
}

void criterion_10_classifier() {
  const auto start = Clock::now();
  bool pass = true;
  std::string detail;

  auto expect = [&](double alpha, double q, double a, double p, Regime want,
                    double e_val, double e_vel) {
    const RegimeReport r = classify_regime(flow_params(alpha, q, a, p));
    const bool ok = r.regime == want &&
                    std::abs(r.value_rate_exponent - e_val) < 1e-12 &&
                    std::abs(r.velocity_rate_exponent - e_vel) < 1e-12;
    if (!ok)
      detail += std::string("example(q=") + fmt(q) + ",p=" + fmt(p) + ") got " +
                regime_name(r.regime) + " VIOLATED; ";
    pass = pass && ok;
  };
  expect(3.5, 0.5, 1.0, 1.0, Regime::strong_b, 1.0, 0.75);
  expect(3.5, 0.7, 1.0, 1.9, Regime::weak, 1.4, 0.7);
  expect(3.5, 0.7, 1.0, 1.7, Regime::critical, 1.4, 0.7);
  expect(3.5, 0.5, 0.2, 2.0, Regime::outside, 0.0, 0.0);
  expect(3.5, 0.6, 1.0, 1.5, Regime::strong_a, 1.4, 0.7);

  // Boundary conventions.
  const double q = 0.7;
  pass = pass && classify_regime(flow_params(3.5, q, 1.0, q + 1.0)).regime == Regime::critical;
  pass = pass &&
         classify_regime(flow_params(3.5, q, 1.0, (3.0 * q + 1.0) / 2.0)).regime ==
             Regime::strong_a;

  // Random partition: exactly one independent membership predicate fires and
  // it matches the classifier.
  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> uq(0.01, 1.0), up(0.01, 2.5), ua(0.0, 2.0),
      ual(0.1, 5.0), coin(0.0, 1.0);
  int mismatches = 0;
  for (int k = 0; k < 10000; ++k) {
    Params pm = flow_params(ual(rng), coin(rng) < 0.15 ? 1.0 : uq(rng), ua(rng), up(rng));
    if (coin(rng) < 0.05) pm.p = pm.q + 1.0;
    if (coin(rng) < 0.05) pm.p = (3.0 * pm.q + 1.0) / 2.0;
    if (coin(rng) < 0.05) pm.p = 2.0;
    const double qq = pm.q, pp = pm.p, aa = pm.a;
    const bool interior = qq > 0.0 && qq < 1.0 && aa > 0.0;
    const bool m_sb = interior && pp < (3.0 * qq + 1.0) / 2.0;
    const bool m_sa = interior && pp >= (3.0 * qq + 1.0) / 2.0 && pp < qq + 1.0;
    const bool m_cr = interior && pp == qq + 1.0;
    const bool m_wk = interior && pp > qq + 1.0 && pp <= 2.0 &&
                      (pp < 2.0 || aa >= qq * (1.0 - qq));
    const bool m_q1 = qq == 1.0 && pm.alpha > 3.0 && aa > 0.0;
    const int fired = int(m_sb) + int(m_sa) + int(m_cr) + int(m_wk) + int(m_q1);
    const Regime got = classify_regime(pm).regime;
    const Regime want = m_sb   ? Regime::strong_b
                        : m_sa ? Regime::strong_a
                        : m_cr ? Regime::critical
                        : m_wk ? Regime::weak
                        : m_q1 ? Regime::q1_classic
                               : Regime::outside;
    if (fired > 1 || got != want) ++mismatches;
  }
  pass = pass && mismatches == 0;
  detail += "worked examples + boundaries ok, partition mismatches " +
            std::to_string(mismatches) + "/10000";
  record(10, "regime classifier partition", pass, detail, elapsed(start));
}

void criterion_2_w_descent() {
  const auto start = Clock::now();
  bool pass = true;
  double worst = 0.0;
  std::string worst_label;
  for (const auto& run : g_runs) {
    double w_prev = std::numeric_limits<double>::infinity();
    for (const auto& s : run.traj.samples) {
      const double w = energy_W({s.t, s.x, s.v}, run.params, run.problem);
      const double excess = w - w_prev - 1e-8 * (1.0 + std::abs(w_prev));
      if (excess > 0.0) {
        pass = false;
        if (excess > worst) {
          worst = excess;
          worst_label = run.label;
        }
      }
      w_prev = w;
    }
  }
  record(2, "W-descent along every acceptance trajectory", pass,
         std::to_string(g_runs.size()) + " trajectories checked" +
             (pass ? "" : "; worst excess " + fmt(worst) + " in " + worst_label),
         elapsed(start));
}

}  // namespace

int main() {
  criterion_1_integrator_validation();
  criterion_3_4_figures();
  criterion_5_6_strong_grid();
  criterion_7_weak_regime();
  criterion_8_gronwall();
  criterion_9_tikhonov_suite();
  criterion_10_classifier();
  criterion_2_w_descent();  // needs every trajectory from the runs above

  std::sort(g_results.begin(), g_results.end(),
            [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
  int failures = 0;
  for (const auto& r : g_results) {
    std::printf("[%s] criterion %d: %s (%.1fs) - %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.detail.c_str());
    if (!r.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failures,
              g_results.size());
  return failures == 0 ? 0 : 1;
}
