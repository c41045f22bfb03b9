#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tikflow/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIntegration = 2;
constexpr int kExitAssertion = 3;

struct CommonFlags {
  std::string config_file;
  std::string problem;
  double alpha = 0, q = 0, a = 0, p = 0, t0 = 0, t_end = 0;
  double rel_tol = 0, abs_tol = 0;
  std::string x0, v0, out, format, sweep;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "flat key=value config file");
  cmd->add_option("--problem", f.problem, "problem id (quad:m,n | shifted:c,... | logsumexp:preset-k)");
  cmd->add_option("--alpha", f.alpha, "damping magnitude");
  cmd->add_option("--q", f.q, "damping decay exponent");
  cmd->add_option("--a", f.a, "Tikhonov magnitude");
  cmd->add_option("--p", f.p, "Tikhonov decay exponent");
  cmd->add_option("--t0", f.t0, "start time");
  cmd->add_option("--t-end", f.t_end, "end time");
  cmd->add_option("--x0", f.x0, "initial position, comma-separated");
  cmd->add_option("--v0", f.v0, "initial velocity, comma-separated");
  cmd->add_option("--rel-tol", f.rel_tol, "integrator relative tolerance");
  cmd->add_option("--abs-tol", f.abs_tol, "integrator absolute tolerance");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--format", f.format, "outputs: csv[,svg]");
  cmd->add_option("--sweep", f.sweep, "sweep axis, e.g. q=0.3,0.5,0.7");
}

// File values first, then explicitly passed flags on top.
tikflow::ExperimentConfig build_config(const CLI::App* cmd, const CommonFlags& f) {
  tikflow::ExperimentConfig cfg = tikflow::default_experiment_config();
  if (!f.config_file.empty())
    tikflow::apply_key_values(cfg, tikflow::read_config_file(f.config_file));

  std::map<std::string, std::string> kv;
  auto passed = [&](const std::string& flag) { return cmd->count(flag) > 0; };
  auto num = [](double v) {
    char b[40];
    std::snprintf(b, sizeof(b), "%.17g", v);
    return std::string(b);
  };
  if (passed("--problem")) kv["problem"] = f.problem;
  if (passed("--alpha")) kv["alpha"] = num(f.alpha);
  if (passed("--q")) kv["q"] = num(f.q);
  if (passed("--a")) kv["a"] = num(f.a);
  if (passed("--p")) kv["p"] = num(f.p);
  if (passed("--t0")) kv["t0"] = num(f.t0);
  if (passed("--t-end")) kv["t_end"] = num(f.t_end);
  if (passed("--x0")) kv["x0"] = f.x0;
  if (passed("--v0")) kv["v0"] = f.v0;
  if (passed("--rel-tol")) kv["rel_tol"] = num(f.rel_tol);
  if (passed("--abs-tol")) kv["abs_tol"] = num(f.abs_tol);
  if (passed("--out")) kv["out"] = f.out;
  if (passed("--format")) kv["format"] = f.format;
  if (passed("--sweep")) kv["sweep"] = f.sweep;
  tikflow::apply_key_values(cfg, kv);
  return cfg;
}

int do_run(const tikflow::ExperimentConfig& cfg) {
  tikflow::RunArtifacts artifacts = tikflow::run(cfg);
  for (const auto& res : artifacts.results) {
    if (res.ok) {
      const auto& last = res.trajectory.samples.back();
      std::printf("%-10s t=%g  value_gap=%.6e  dist_to_xstar=%.6e  speed=%.6e\n",
                  res.label.c_str(), last.t, last.value_gap, last.dist_to_xstar, last.speed);
    } else {
      std::printf("%-10s FAILED: %s\n", res.label.c_str(), res.error.c_str());
    }
  }
  for (const auto& f : artifacts.files) std::printf("wrote %s\n", f.string().c_str());
  return artifacts.failures == 0 ? kExitOk : kExitIntegration;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inertial gradient flow with vanishing damping and Tikhonov regularization"};
  app.require_subcommand(1);

  CommonFlags sim_flags, sweep_flags, cls_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "integrate one configuration");
  add_common(simulate, sim_flags);
  CLI::App* sweep = app.add_subcommand("sweep", "integrate a parameter sweep");
  add_common(sweep, sweep_flags);
  CLI::App* classify = app.add_subcommand("classify", "print the guarantee regime");
  add_common(classify, cls_flags);

  std::string preset = "fig1";
  std::string fig_out = "figures";
  std::string fig_format = "csv,svg";
  CLI::App* figures = app.add_subcommand("figures", "reproduce the reference figure presets");
  figures->add_option("--preset", preset, "fig1 | fig2");
  figures->add_option("--out", fig_out, "output directory");
  figures->add_option("--format", fig_format, "outputs: csv[,svg]");

  CLI::App* selftest = app.add_subcommand("selftest", "integrator validation problems");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      tikflow::ExperimentConfig cfg = build_config(simulate, sim_flags);
      cfg.sweep.reset();
      return do_run(cfg);
    }
    if (sweep->parsed()) {
      tikflow::ExperimentConfig cfg = build_config(sweep, sweep_flags);
      if (!cfg.sweep) throw tikflow::ConfigError("sweep subcommand wants --sweep name=v1,v2,...");
      return do_run(cfg);
    }
    if (classify->parsed()) {
      tikflow::ExperimentConfig cfg = build_config(classify, cls_flags);
      std::cout << tikflow::to_kv_text(tikflow::classify_regime(cfg.params));
      return kExitOk;
    }
    if (figures->parsed()) {
      tikflow::FigurePreset fp;
      if (preset == "fig1")
        fp = tikflow::FigurePreset::fig1;
      else if (preset == "fig2")
        fp = tikflow::FigurePreset::fig2;
      else
        throw tikflow::ConfigError("unknown preset: " + preset);
      tikflow::OutputOptions out;
      out.directory = fig_out;
      out.csv = fig_format.find("csv") != std::string::npos;
      out.svg = fig_format.find("svg") != std::string::npos;
      tikflow::FigureVerdict verdict = tikflow::figures(fp, out);
      for (const auto& f : verdict.findings)
        std::printf("[%s] %s  (%s)\n", f.pass ? "PASS" : "FAIL", f.name.c_str(),
                    f.detail.c_str());
      if (verdict.artifacts.failures > 0) return kExitIntegration;
      return verdict.pass ? kExitOk : kExitAssertion;
    }
    if (selftest->parsed()) {
      tikflow::SelfTestReport report = tikflow::self_test();
      for (const auto& e : report.entries)
        std::printf("[%s] %-28s value=%.3e threshold=%.3e\n", e.pass ? "PASS" : "FAIL",
                    e.name.c_str(), e.value, e.threshold);
      return report.pass ? kExitOk : kExitAssertion;
    }
  } catch (const tikflow::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const tikflow::IntegrationError& e) {
    std::fprintf(stderr, "integration error: %s\n", e.what());
    return kExitIntegration;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIntegration;
  }
  return kExitConfig;
}
