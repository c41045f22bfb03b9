#include "tikflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

namespace tikflow {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + value);
  }
}

std::vector<double> parse_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError("empty value list for '" + key + "'");
  return out;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = v[i];
  return out;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == '/' || c == ':' || c == ' ') c = '_';
  return out;
}

}  // namespace

ExperimentConfig default_experiment_config() {
  ExperimentConfig cfg;
  Vec u0(2), v0(2);
  u0 << 1.0, 1.0;
  v0 << -1.0, -1.0;
  cfg.params.u0 = u0;
  cfg.params.v0 = v0;
  return cfg;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply_key_values(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "problem") {
      cfg.problem_id = value;
    } else if (key == "alpha") {
      cfg.params.alpha = parse_double(key, value);
    } else if (key == "q") {
      cfg.params.q = parse_double(key, value);
    } else if (key == "a") {
      cfg.params.a = parse_double(key, value);
    } else if (key == "p") {
      cfg.params.p = parse_double(key, value);
    } else if (key == "t0") {
      cfg.params.t0 = parse_double(key, value);
    } else if (key == "t_end") {
      cfg.t_end = parse_double(key, value);
    } else if (key == "x0") {
      cfg.params.u0 = to_vec(parse_doubles(key, value));
    } else if (key == "v0") {
      cfg.params.v0 = to_vec(parse_doubles(key, value));
    } else if (key == "rel_tol") {
      cfg.integrator.rel_tol = parse_double(key, value);
    } else if (key == "abs_tol") {
      cfg.integrator.abs_tol = parse_double(key, value);
    } else if (key == "out") {
      cfg.output.directory = value;
    } else if (key == "format") {
      cfg.output.csv = false;
      cfg.output.svg = false;
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item == "csv")
          cfg.output.csv = true;
        else if (item == "svg")
          cfg.output.svg = true;
        else
          throw ConfigError("unknown format: " + item);
      }
    } else if (key == "sweep") {
      const auto eq = value.find('=');
      if (eq == std::string::npos) throw ConfigError("sweep wants name=v1,v2,...");
      SweepSpec sweep;
      sweep.axis = trim(value.substr(0, eq));
      if (sweep.axis != "q" && sweep.axis != "p" && sweep.axis != "a" && sweep.axis != "alpha")
        throw ConfigError("sweep axis must be one of q, p, a, alpha: " + sweep.axis);
      sweep.values = parse_doubles(key, value.substr(eq + 1));
      cfg.sweep = std::move(sweep);
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const Problem& problem) {
  const int d = problem.dimension;
  os << "t";
  for (int i = 1; i <= d; ++i) os << ",x_" << i;
  for (int i = 1; i <= d; ++i) os << ",v_" << i;
  os << ",value_gap,speed,dist_to_xstar,energy_E,energy_W\n";
  const EnergyConfig ecfg = default_energy_config(traj.params);
  for (const auto& s : traj.samples) {
    os << format_double(s.t);
    for (int i = 0; i < d; ++i) os << ',' << format_double(s.x[i]);
    for (int i = 0; i < d; ++i) os << ',' << format_double(s.v[i]);
    const FlowState state{s.t, s.x, s.v};
    os << ',' << format_double(s.value_gap) << ',' << format_double(s.speed) << ','
       << format_double(s.dist_to_xstar) << ','
       << format_double(energy_E(state, traj.params, problem, ecfg)) << ','
       << format_double(energy_W(state, traj.params, problem)) << '\n';
  }
}

namespace {

void set_axis(Params& pm, const std::string& axis, double value) {
  if (axis == "q")
    pm.q = value;
  else if (axis == "p")
    pm.p = value;
  else if (axis == "a")
    pm.a = value;
  else if (axis == "alpha")
    pm.alpha = value;
  else
    throw ConfigError("sweep axis must be one of q, p, a, alpha: " + axis);
}

RunResult run_one(const ExperimentConfig& cfg, const std::string& label, const Params& pm) {
  RunResult res;
  res.label = label;
  res.params = pm;
  res.regime = classify_regime(pm);
  try {
    const Problem problem = problem_from_id(cfg.problem_id);
    res.trajectory = integrate(problem, pm, cfg.t_end, cfg.integrator);
    res.ok = true;
  } catch (const IntegrationError& e) {
    res.error = e.what();
  }
  return res;
}

std::string run_report_text(const RunResult& res, const ExperimentConfig& cfg) {
  std::string out;
  out += "label=" + res.label + "\n";
  out += "problem=" + cfg.problem_id + "\n";
  out += "ok=" + std::string(res.ok ? "true" : "false") + "\n";
  if (!res.ok) {
    out += "error=" + res.error + "\n";
    return out;
  }
  const auto& last = res.trajectory.samples.back();
  out += "t_end=" + format_double(last.t) + "\n";
  out += "final_value_gap=" + format_double(last.value_gap) + "\n";
  out += "final_speed=" + format_double(last.speed) + "\n";
  out += "final_dist_to_xstar=" + format_double(last.dist_to_xstar) + "\n";
  out += "accepted_steps=" + std::to_string(res.trajectory.stats.accepted_steps) + "\n";
  out += "rejected_steps=" + std::to_string(res.trajectory.stats.rejected_steps) + "\n";
  out += "rhs_evals=" + std::to_string(res.trajectory.stats.rhs_evals) + "\n";

  // Rate fits over the trailing window (up to the final two decades).
  const double t_hi = cfg.t_end;
  const double t_lo = std::max(res.params.t0, t_hi / 100.0);
  std::vector<double> ts, gaps, speeds;
  for (const auto& s : res.trajectory.samples) {
    ts.push_back(s.t);
    gaps.push_back(s.value_gap);
    speeds.push_back(s.speed);
  }
  try {
    const RateFit f = fit_rate(ts, gaps, t_lo, t_hi);
    out += "fit.value_gap.slope=" + format_double(f.slope) + "\n";
    out += "fit.value_gap.n_points=" + std::to_string(f.n_points) + "\n";
  } catch (const std::exception& e) {
    out += std::string("fit.value_gap.error=") + e.what() + "\n";
  }
  try {
    const RateFit f = fit_rate(ts, speeds, t_lo, t_hi);
    out += "fit.speed.slope=" + format_double(f.slope) + "\n";
    out += "fit.speed.n_points=" + std::to_string(f.n_points) + "\n";
  } catch (const std::exception& e) {
    out += std::string("fit.speed.error=") + e.what() + "\n";
  }
  out += to_kv_text(res.regime);
  return out;
}

struct Series {
  std::string name;
  std::vector<double> t;
  std::vector<double> y;
};

void write_svg_log_plot(std::ostream& os, const std::string& title,
                        const std::string& y_label, const std::vector<Series>& series) {
  constexpr int width = 900, height = 560;
  constexpr double ml = 70, mr = 180, mt = 40, mb = 50;
  constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!(s.y[i] > 0.0)) continue;
      const double lx = std::log10(s.t[i]), ly = std::log10(s.y[i]);
      if (first) {
        x_lo = x_hi = lx;
        y_lo = y_hi = ly;
        first = false;
      } else {
        x_lo = std::min(x_lo, lx);
        x_hi = std::max(x_hi, lx);
        y_lo = std::min(y_lo, ly);
        y_hi = std::max(y_hi, ly);
      }
    }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1;
  auto sx = [&](double lx) { return ml + (lx - x_lo) / (x_hi - x_lo) * (width - ml - mr); };
  auto sy = [&](double ly) { return height - mb - (ly - y_lo) / (y_hi - y_lo) * (height - mt - mb); };
  auto num = [](double v) {
    char b[32];
    std::snprintf(b, sizeof(b), "%.6g", v);
    return std::string(b);
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << title << "</text>\n";

  for (int e = static_cast<int>(std::ceil(y_lo)); e <= static_cast<int>(std::floor(y_hi)); ++e) {
    const double y = sy(e);
    os << "<line x1=\"" << num(ml) << "\" y1=\"" << num(y) << "\" x2=\"" << num(width - mr)
       << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n"
       << "<text x=\"" << num(ml - 8) << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(x_lo)); e <= static_cast<int>(std::floor(x_hi)); ++e) {
    const double x = sx(e);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(x)
       << "\" y2=\"" << num(height - mb) << "\" stroke=\"#eeeeee\"/>\n"
       << "<text x=\"" << num(x) << "\" y=\"" << num(height - mb + 16)
       << "\" text-anchor=\"middle\" font-size=\"11\">1e" << e << "</text>\n";
  }
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">t</text>\n"
     << "<text x=\"18\" y=\"" << height / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 "
     << height / 2 << ")\">" << y_label << "</text>\n";

  int ci = 0;
  for (const auto& s : series) {
    const char* color = palette[ci % 8];
    os << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" d=\"";
    bool pen_down = false;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!(s.y[i] > 0.0)) {
        pen_down = false;
        continue;
      }
      os << (pen_down ? 'L' : 'M') << num(sx(std::log10(s.t[i]))) << ' '
         << num(sy(std::log10(s.y[i])));
      pen_down = true;
    }
    os << "\"/>\n";
    const double ly = mt + 16 + 18 * ci;
    os << "<line x1=\"" << width - mr + 10 << "\" y1=\"" << num(ly - 4) << "\" x2=\""
       << width - mr + 34 << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << width - mr + 40 << "\" y=\"" << num(ly)
       << "\" font-size=\"12\">" << s.name << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
}

}  // namespace

RunArtifacts run(const ExperimentConfig& cfg) {
  validate(cfg.params, problem_from_id(cfg.problem_id));
  if (cfg.sweep) {
    if (cfg.sweep->values.empty()) throw ConfigError("sweep value list is empty");
    Params probe = cfg.params;
    for (double v : cfg.sweep->values) {
      set_axis(probe, cfg.sweep->axis, v);
      validate(probe);
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(cfg.output.directory, ec);
  if (ec) throw ConfigError("cannot create output directory: " + cfg.output.directory.string());

  std::vector<std::pair<std::string, Params>> jobs;
  if (cfg.sweep) {
    for (double v : cfg.sweep->values) {
      Params pm = cfg.params;
      set_axis(pm, cfg.sweep->axis, v);
      char label[64];
      std::snprintf(label, sizeof(label), "%s=%g", cfg.sweep->axis.c_str(), v);
      jobs.emplace_back(label, pm);
    }
  } else {
    jobs.emplace_back("run", cfg.params);
  }

  // Isolated workers per sweep value; results collected and written in order
  // by this thread only.
  std::vector<std::future<RunResult>> futures;
  futures.reserve(jobs.size());
  for (const auto& [label, pm] : jobs)
    futures.push_back(std::async(std::launch::async,
                                 [&cfg, label = label, pm = pm] { return run_one(cfg, label, pm); }));

  RunArtifacts artifacts;
  const Problem problem = problem_from_id(cfg.problem_id);
  for (auto& f : futures) artifacts.results.push_back(f.get());

  for (const auto& res : artifacts.results) {
    if (!res.ok) {
      ++artifacts.failures;
      continue;
    }
    if (cfg.output.csv) {
      const auto path = cfg.output.directory / ("trajectory_" + sanitize(res.label) + ".csv");
      std::ofstream os(path);
      write_trajectory_csv(os, res.trajectory, problem);
      artifacts.files.push_back(path);
    }
    const auto report_path = cfg.output.directory / ("report_" + sanitize(res.label) + ".txt");
    std::ofstream ros(report_path);
    ros << run_report_text(res, cfg);
    artifacts.files.push_back(report_path);
  }

  if (cfg.sweep && cfg.output.csv) {
    const auto path = cfg.output.directory / "sweep.csv";
    std::ofstream os(path);
    os << cfg.sweep->axis << ",t,value_gap,speed,dist_to_xstar\n";
    for (std::size_t j = 0; j < artifacts.results.size(); ++j) {
      const auto& res = artifacts.results[j];
      if (!res.ok) continue;
      const std::string value = format_double(cfg.sweep->values[j]);
      for (const auto& s : res.trajectory.samples)
        os << value << ',' << format_double(s.t) << ',' << format_double(s.value_gap) << ','
           << format_double(s.speed) << ',' << format_double(s.dist_to_xstar) << '\n';
    }
    artifacts.files.push_back(path);
  }

  if (cfg.output.svg) {
    std::vector<Series> dist_series, gap_series;
    for (const auto& res : artifacts.results) {
      if (!res.ok) continue;
      Series sd{res.label, {}, {}}, sg{res.label, {}, {}};
      for (const auto& s : res.trajectory.samples) {
        sd.t.push_back(s.t);
        sd.y.push_back(s.dist_to_xstar);
        sg.t.push_back(s.t);
        sg.y.push_back(s.value_gap);
      }
      dist_series.push_back(std::move(sd));
      gap_series.push_back(std::move(sg));
    }
    const auto dist_path = cfg.output.directory / "iterate_error.svg";
    const auto gap_path = cfg.output.directory / "value_error.svg";
    {
      std::ofstream os(dist_path);
      write_svg_log_plot(os, cfg.problem_id + ": |x(t) - x*|", "|x(t) - x*|", dist_series);
    }
    {
      std::ofstream os(gap_path);
      write_svg_log_plot(os, cfg.problem_id + ": g(x(t)) - min g", "g(x(t)) - min g", gap_series);
    }
    artifacts.files.push_back(dist_path);
    artifacts.files.push_back(gap_path);
  }
  return artifacts;
}

ExperimentConfig figure_config(FigurePreset preset) {
  ExperimentConfig cfg = default_experiment_config();
  cfg.t_end = 100.0;
  cfg.params.alpha = 3.5;
  cfg.params.a = 1.0;
  // Tiny absolute tolerance keeps collapsed oscillation modes resolved
  // relative to their own scale, so late-time error orderings are real
  // rather than integration-noise artifacts.
  cfg.integrator.abs_tol = 1e-40;
  if (preset == FigurePreset::fig1) {
    cfg.params.p = 1.2;
    cfg.sweep = SweepSpec{"q", {0.3, 0.5, 0.7, 0.9, 0.99}};
  } else {
    cfg.params.q = 0.7;
    cfg.sweep = SweepSpec{"p", {0.5, 1.0, 1.4, 1.7, 1.9}};
  }
  return cfg;
}

FigureVerdict figures(FigurePreset preset, const OutputOptions& output) {
  ExperimentConfig cfg = figure_config(preset);
  cfg.output = output;
  FigureVerdict verdict;
  verdict.artifacts = run(cfg);
  const auto& results = verdict.artifacts.results;
  if (verdict.artifacts.failures > 0) {
    verdict.pass = false;
    verdict.findings.push_back({"all-sweep-values-integrated", false,
                                std::to_string(verdict.artifacts.failures) + " failures"});
    return verdict;
  }

  auto final_dist = [](const RunResult& r) { return r.trajectory.samples.back().dist_to_xstar; };
  auto final_gap = [](const RunResult& r) {
    return std::max(r.trajectory.samples.back().value_gap, 1e-320);
  };

  if (preset == FigurePreset::fig1) {
    const RunResult* best_it = &results[0];
    const RunResult* best_val = &results[0];
    std::string detail_it, detail_val;
    for (const auto& r : results) {
      if (final_dist(r) < final_dist(*best_it)) best_it = &r;
      if (final_gap(r) < final_gap(*best_val)) best_val = &r;
      detail_it += r.label + ":" + format_double(final_dist(r)) + " ";
      detail_val += r.label + ":" + format_double(final_gap(r)) + " ";
    }
    verdict.findings.push_back({"iterate-error-winner-q=0.99", best_it->label == "q=0.99",
                                "winner " + best_it->label + "; " + detail_it});
    verdict.findings.push_back({"value-error-winner-q=0.3", best_val->label == "q=0.3",
                                "winner " + best_val->label + "; " + detail_val});
  } else {
    double it_lo = std::numeric_limits<double>::infinity(), it_hi = 0.0;
    double val_lo = std::numeric_limits<double>::infinity(), val_hi = 0.0;
    for (const auto& r : results) {
      it_lo = std::min(it_lo, final_dist(r));
      it_hi = std::max(it_hi, final_dist(r));
      val_lo = std::min(val_lo, final_gap(r));
      val_hi = std::max(val_hi, final_gap(r));
    }
    const double it_spread = it_hi / it_lo;
    const double val_spread = val_hi / val_lo;
    verdict.findings.push_back(
        {"value-error-spread-below-iterate-error-spread", val_spread < it_spread,
         "value spread " + format_double(val_spread) + " vs iterate spread " +
             format_double(it_spread)});
  }
  verdict.pass = true;
  for (const auto& f : verdict.findings) verdict.pass = verdict.pass && f.pass;
  return verdict;
}

}  // namespace tikflow
