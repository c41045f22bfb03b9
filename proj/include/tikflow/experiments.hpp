#ifndef TIKFLOW_EXPERIMENTS_HPP
#define TIKFLOW_EXPERIMENTS_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tikflow/diagnostics.hpp"

namespace tikflow {

struct OutputOptions {
  std::filesystem::path directory = ".";
  bool csv = true;
  bool svg = false;
};

struct SweepSpec {
  std::string axis;  // one of q, p, a, alpha
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string problem_id = "quad:5,1";
  Params params;
  double t_end = 100.0;
  IntegratorConfig integrator;
  std::optional<SweepSpec> sweep;
  OutputOptions output;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Defaults mirror the reference experiment: quad:5,1 with x(1) = (1,1),
// x'(1) = (-1,-1) on [1, 100].
ExperimentConfig default_experiment_config();

// Flat key=value file, one key per line, '#' comments.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// Applies file values onto a config; unknown keys or malformed values raise
// ConfigError. Command-line flags are applied afterwards and win.
void apply_key_values(ExperimentConfig& config,
                      const std::map<std::string, std::string>& kv);

std::string format_double(double v);  // 17 significant digits

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const Problem& problem);

struct RunResult {
  std::string label;
  Params params;
  bool ok = false;
  std::string error;
  Trajectory trajectory;
  RegimeReport regime;
};

struct RunArtifacts {
  std::vector<RunResult> results;
  int failures = 0;
  std::vector<std::filesystem::path> files;
};

// Executes the run (or every sweep value, isolated workers, single-threaded
// file collection). Integration failures are recorded per value and do not
// abort the remaining values.
RunArtifacts run(const ExperimentConfig& config);

enum class FigurePreset { fig1, fig2 };

// Sweep configuration reproducing the reference figures: fig1 varies the
// damping exponent q over {0.3, 0.5, 0.7, 0.9, 0.99}; fig2 fixes q = 0.7 and
// varies p over {0.5, 1.0, 1.4, 1.7, 1.9}.
ExperimentConfig figure_config(FigurePreset preset);

struct FigureFinding {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct FigureVerdict {
  bool pass = false;
  std::vector<FigureFinding> findings;
  RunArtifacts artifacts;
};

FigureVerdict figures(FigurePreset preset, const OutputOptions& output);

}  // namespace tikflow

#endif
