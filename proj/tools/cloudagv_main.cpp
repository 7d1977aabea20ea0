// Command-line front end: run, sweep, stability-map, plot, reference.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cloudagv/config.hpp"
#include "cloudagv/csv.hpp"
#include "cloudagv/plot.hpp"
#include "cloudagv/sim.hpp"

namespace fs = std::filesystem;
using namespace cloudagv;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kMissingFile = 2,
  kConfigError = 3,
  kDiverged = 4,
  kIoError = 5,
};

struct Overrides {
  std::optional<double> kx, ky, ktheta, ts, seed;
  std::optional<std::string> nu_max;
  std::optional<std::string> out_dir;
  std::optional<std::string> plots;

  void add_to(CLI::App* app) {
    app->add_option("--kx", kx, "Override Kx (1/s)");
    app->add_option("--ky", ky, "Override Ky");
    app->add_option("--ktheta", ktheta, "Override Ktheta");
    app->add_option("--ts", ts, "Override the sampling time Ts (s)");
    app->add_option("--seed", seed, "Override the outage RNG seed");
    app->add_option("--nu-max", nu_max, "Velocity limit in m/s, or 'none'");
    app->add_option("--out-dir", out_dir, "Output directory");
    app->add_option("--plots", plots, "on|off")->check(CLI::IsMember({"on", "off"}));
  }

  // Applies overrides in place and returns their provenance lines.
  std::string apply(ExperimentConfig& cfg) const {
    std::ostringstream log;
    auto num = [&](const char* name, const std::optional<double>& v) {
      if (!v) return;
      apply_parameter(cfg.sim, name, *v);
      log << "override " << name << " = " << *v << '\n';
    };
    num("kx", kx);
    num("ky", ky);
    num("ktheta", ktheta);
    num("ts", ts);
    num("seed", seed);
    if (nu_max) {
      if (*nu_max == "none" || *nu_max == "unlimited") {
        cfg.sim.nu_max.reset();
      } else {
        double v = 0.0;
        try {
          v = std::stod(*nu_max);
        } catch (const std::exception&) {
          throw ConfigError("--nu-max: expected a number or 'none'");
        }
        if (!(v > 0.0)) throw ConfigError("--nu-max must be positive");
        cfg.sim.nu_max = v;
      }
      log << "override nu_max = " << *nu_max << '\n';
    }
    if (out_dir) {
      cfg.output.dir = *out_dir;
      log << "override out_dir = " << *out_dir << '\n';
    }
    if (plots) {
      cfg.output.plots = *plots == "on";
      log << "override plots = " << *plots << '\n';
    }
    try {
      cfg.sim.validate();
      (void)cfg.sim.track.n_timesteps();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return log.str();
  }
};

std::string provenance(std::string_view command, const ExperimentConfig& cfg,
                       const std::string& overrides) {
  std::ostringstream s;
  s << "cloudagv " << command << '\n' << overrides << "resolved config:\n" << dump_config(cfg);
  std::string text = s.str();
  while (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

template <class Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  writer(out);
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(std::stod(p));
    if (parts.size() < 2 || parts.size() > 3) {
      throw ConfigError(std::string(flag) + ": expected start:stop[:step]");
    }
    const double step = parts.size() == 3 ? parts[2] : 1.0;
    if (!(step > 0.0)) throw ConfigError(std::string(flag) + ": step must be positive");
    const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / step + 1e-9));
    for (long i = 0; i <= count; ++i) out.push_back(parts[0] + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) {
      if (p.find_first_not_of(" \t") == std::string::npos) continue;
      out.push_back(std::stod(p));
    }
  }
  if (out.empty()) throw ConfigError(std::string(flag) + ": empty range");
  return out;
}

std::string value_tag(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

int report_exception(const std::exception& e) {
  std::cerr << "error: " << e.what() << '\n';
  if (dynamic_cast<const ConfigFileError*>(&e)) return kMissingFile;
  if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kConfigError;
  return kIoError;
}

int write_run_outputs(const ExperimentConfig& cfg, const RunResult& result, const fs::path& dir,
                      const std::string& prov) {
  fs::create_directories(dir);
  write_with(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, result.trace, prov); });
  write_with(dir / "metrics.txt", [&](std::ostream& os) { write_metrics(os, result, prov); });
  write_file(dir / "config.yaml", dump_config(cfg));
  if (cfg.output.plots && !result.trace.empty()) {
    const std::vector<plot::LabeledTrace> traces{
        {cfg.name, CsvTable::read_file(dir / "trace.csv")}};
    plot::render_trace_plots(traces, dir, prov);
  }
  if (result.status == RunStatus::diverged) {
    std::cerr << "error: " << result.diagnostic << '\n';
    return kDiverged;
  }
  return kOk;
}

int cmd_run(const std::string& config_path, const Overrides& ov) {
  ExperimentConfig cfg = load_config_file(config_path);
  const std::string log = ov.apply(cfg);
  const RunResult result = run(cfg.sim);
  const int code = write_run_outputs(cfg, result, cfg.output.dir, provenance("run", cfg, log));
  std::cout << "wrote " << (fs::path(cfg.output.dir) / "trace.csv").string() << " ("
            << result.trace.size() << " steps, damping "
            << to_string(result.metrics.lateral.damping_class) << ")\n";
  return code;
}

int cmd_sweep(const std::string& config_path, const Overrides& ov, const std::string& param,
              const std::string& values_text, unsigned jobs) {
  ExperimentConfig cfg = load_config_file(config_path);
  const std::string log = ov.apply(cfg);
  const auto params = sweep_parameters();
  if (std::find(params.begin(), params.end(), param) == params.end()) {
    throw ConfigError("--param: unknown parameter '" + param + "'");
  }
  std::vector<double> values;
  for (double v : parse_list(values_text, "--values")) {
    if (std::find(values.begin(), values.end(), v) != values.end()) {
      std::cerr << "warning: duplicate value " << v << " ignored\n";
      continue;
    }
    values.push_back(v);
  }

  const auto points = sweep(cfg.sim, param, values, jobs);
  const fs::path dir = cfg.output.dir;
  const std::string prov = provenance("sweep --param " + param + " --values " + values_text, cfg, log);
  fs::create_directories(dir);
  write_with(dir / "sweep.csv",
             [&](std::ostream& os) { write_sweep_table(os, param, points, prov); });

  int code = kOk;
  std::vector<plot::LabeledTrace> traces;
  for (const auto& p : points) {
    if (!p.result) {
      std::cerr << "warning: " << param << "=" << p.value << " failed: " << p.error << '\n';
      code = std::max<int>(code, kConfigError);
      continue;
    }
    ExperimentConfig point_cfg = cfg;
    apply_parameter(point_cfg.sim, param, p.value);
    point_cfg.output.plots = false;
    const fs::path sub = dir / (param + "_" + value_tag(p.value));
    const std::string point_prov =
        provenance("sweep point " + param + " = " + value_tag(p.value), point_cfg, log);
    const int rc = write_run_outputs(point_cfg, *p.result, sub, point_prov);
    if (rc != kOk) code = std::max(code, rc);
    if (cfg.output.plots && !p.result->trace.empty()) {
      traces.push_back({param + " = " + value_tag(p.value), CsvTable::read_file(sub / "trace.csv")});
    }
  }
  if (!traces.empty()) plot::render_trace_plots(traces, dir, prov);
  std::cout << "wrote " << (dir / "sweep.csv").string() << " (" << points.size() << " runs)\n";
  return code;
}

int cmd_stability_map(const std::string& config_path, const Overrides& ov,
                      const std::string& n_ul_text, const std::string& kx_text, unsigned jobs) {
  ExperimentConfig cfg = load_config_file(config_path);
  const std::string log = ov.apply(cfg);
  const auto kx = parse_list(kx_text, "--kx-range");
  std::vector<std::size_t> n_ul;
  for (double v : parse_list(n_ul_text, "--n-ul-range")) {
    if (!(v >= 0.0) || v != std::floor(v)) {
      throw ConfigError("--n-ul-range: values must be non-negative integers");
    }
    n_ul.push_back(static_cast<std::size_t>(v));
  }
  const StabilityMap map = stability_map(cfg.sim, kx, n_ul, jobs);
  const fs::path dir = cfg.output.dir;
  const std::string prov =
      provenance("stability-map --n-ul-range " + n_ul_text + " --kx-range " + kx_text, cfg, log);
  fs::create_directories(dir);
  write_with(dir / "stability_map.csv",
             [&](std::ostream& os) { write_stability_map(os, map, prov); });
  if (cfg.output.plots) {
    std::vector<double> ys(map.kx_values.begin(), map.kx_values.end());
    std::vector<double> xs(map.n_ul_values.begin(), map.n_ul_values.end());
    std::vector<double> values;
    for (const auto& c : map.cells) values.push_back(c.worst_max_eig);
    write_file(dir / "stability_map.svg",
               plot::render_heatmap({"Worst-case max |lambda| over the run", "n_ul (samples)",
                                     "Kx (1/s)", "max |lambda|", 1.0, prov},
                                    xs, ys, values));
  }
  std::size_t unstable = 0;
  for (const auto& c : map.cells) unstable += c.worst_class == StabilityClass::unstable;
  std::cout << "wrote " << (dir / "stability_map.csv").string() << " (" << map.cells.size()
            << " cells, " << unstable << " unstable)\n";
  return kOk;
}

int cmd_plot(const std::vector<std::string>& traces_in, std::vector<std::string> labels,
             const std::string& out_dir) {
  std::vector<plot::LabeledTrace> traces;
  for (std::size_t i = 0; i < traces_in.size(); ++i) {
    if (!fs::exists(traces_in[i])) {
      std::cerr << "error: cannot read '" << traces_in[i] << "'\n";
      return kMissingFile;
    }
    const std::string label = i < labels.size() ? labels[i] : fs::path(traces_in[i]).parent_path().filename().string();
    traces.push_back({label.empty() ? traces_in[i] : label, CsvTable::read_file(traces_in[i])});
  }
  for (const auto& p : plot::render_trace_plots(traces, out_dir)) std::cout << "wrote " << p.string() << '\n';
  return kOk;
}

int cmd_reference(const std::string& config_path, const Overrides& ov, const std::string& out) {
  ExperimentConfig cfg = load_config_file(config_path);
  (void)ov.apply(cfg);
  const ReferenceTrajectory traj = generate_track(cfg.sim.track);
  write_with(out, [&](std::ostream& os) { write_reference_csv(os, traj); });
  std::cout << "wrote " << out << " (" << traj.points.size() << " points)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cloudagv: cloud-controlled AGV tracking simulator and stability analyzer"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  auto* run_cmd = app.add_subcommand("run", "Run one closed-loop simulation");
  run_cmd->add_option("--config", config_path, "Experiment config (YAML)")->required();
  overrides.add_to(run_cmd);

  std::string param;
  std::string values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter over a list of values");
  sweep_cmd->add_option("--config", config_path, "Experiment config (YAML)")->required();
  sweep_cmd->add_option("--param", param, "Parameter name (kx, ky, ktheta, ts, nu_max, ...)")
      ->required();
  sweep_cmd->add_option("--values", values, "Comma list or start:stop[:step]")->required();
  sweep_cmd->add_option("--jobs", jobs, "Worker threads");
  overrides.add_to(sweep_cmd);

  std::string n_ul_range;
  std::string kx_range;
  auto* map_cmd =
      app.add_subcommand("stability-map", "Eigenvalue stability over an n_ul x Kx grid");
  map_cmd->add_option("--config", config_path, "Experiment config (YAML)")->required();
  map_cmd->add_option("--n-ul-range", n_ul_range, "e.g. 0:200:10")->required();
  map_cmd->add_option("--kx-range", kx_range, "e.g. 5,25,250")->required();
  map_cmd->add_option("--jobs", jobs, "Worker threads");
  overrides.add_to(map_cmd);

  std::vector<std::string> trace_files;
  std::vector<std::string> labels;
  std::string plot_dir = ".";
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG plots from trace CSV files");
  plot_cmd->add_option("--trace", trace_files, "Trace CSV (repeatable)")->required();
  plot_cmd->add_option("--label", labels, "Legend label per trace");
  plot_cmd->add_option("--out-dir", plot_dir, "Output directory");

  std::string ref_out = "reference.csv";
  auto* ref_cmd = app.add_subcommand("reference", "Export the reference trajectory as CSV");
  ref_cmd->add_option("--config", config_path, "Experiment config (YAML)")->required();
  ref_cmd->add_option("--out", ref_out, "Output CSV path");
  overrides.add_to(ref_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, overrides);
    if (*sweep_cmd) return cmd_sweep(config_path, overrides, param, values, jobs);
    if (*map_cmd) return cmd_stability_map(config_path, overrides, n_ul_range, kx_range, jobs);
    if (*plot_cmd) return cmd_plot(trace_files, labels, plot_dir);
    if (*ref_cmd) return cmd_reference(config_path, overrides, ref_out);
  } catch (const std::exception& e) {
    return report_exception(e);
  }
  return kUsage;
}
