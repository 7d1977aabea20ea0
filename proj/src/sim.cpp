#include "cloudagv/sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace cloudagv {

namespace {

void write_comment(std::ostream& os, std::string_view comment) {
  if (comment.empty()) return;
  std::istringstream lines{std::string(comment)};
  for (std::string line; std::getline(lines, line);) os << "# " << line << '\n';
}

// Runs task(i) for i in [0, n) over at most `jobs` threads.
template <class Task>
void parallel_for(std::size_t n, unsigned jobs, Task&& task) {
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(n, std::max(1u, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
}

}  // namespace

std::string_view to_string(DampingClass c) noexcept {
  switch (c) {
    case DampingClass::monotone:
      return "monotone";
    case DampingClass::single_overshoot:
      return "single-overshoot";
    case DampingClass::oscillatory:
      return "oscillatory";
  }
  return "unknown";
}

void SimConfig::validate() const {
  (void)track.n_timesteps();
  if (!gains.valid()) throw std::invalid_argument("config: gains must all be positive");
  if (nu_max && !(*nu_max > 0.0)) throw std::invalid_argument("config: nu_max must be positive");
  if (!(stability_tol >= 0.0)) {
    throw std::invalid_argument("config: stability tolerance must be non-negative");
  }
  if (!std::isfinite(initial_offset.x) || !std::isfinite(initial_offset.y) ||
      !std::isfinite(initial_offset.theta)) {
    throw std::invalid_argument("config: initial offset must be finite");
  }
  outage.validate();
}

double default_band(double initial_abs, double fraction, double floor) noexcept {
  return std::max(fraction * initial_abs, floor);
}

SignalMetrics compute_signal_metrics(std::span<const double> signal, double band) {
  SignalMetrics m;
  m.band = band;
  std::size_t last_outside = 0;
  bool any_outside = false;
  int last_sign = 0;
  for (std::size_t k = 0; k < signal.size(); ++k) {
    const double v = signal[k];
    if (!(std::abs(v) <= band)) {
      last_outside = k;
      any_outside = true;
    }
    if (std::abs(v) >= band) {
      const int sign = v > 0.0 ? 1 : -1;
      if (last_sign != 0 && sign != last_sign) ++m.overshoot_count;
      last_sign = sign;
    }
  }
  m.settling_time_steps = any_outside ? last_outside + 1 : 0;
  m.settled = !any_outside || last_outside + 1 < signal.size();
  m.damping_class = m.overshoot_count == 0   ? DampingClass::monotone
                    : m.overshoot_count == 1 ? DampingClass::single_overshoot
                                             : DampingClass::oscillatory;
  return m;
}

double lateral_deviation(const Pose& x_r, const Pose& x_c) noexcept {
  const double dx = x_r.x - x_c.x;
  const double dy = x_r.y - x_c.y;
  return -std::sin(x_r.theta) * dx + std::cos(x_r.theta) * dy;
}

RunMetrics compute_metrics(std::span<const TraceRecord> trace, const MetricOptions& options) {
  if (trace.empty()) throw std::invalid_argument("compute_metrics: empty trace");
  RunMetrics m;
  std::vector<double> lateral;
  std::vector<double> nu_dev;
  lateral.reserve(trace.size());
  nu_dev.reserve(trace.size());
  std::size_t unstable = 0;
  std::size_t marginal = 0;
  for (const auto& r : trace) {
    lateral.push_back(lateral_deviation(r.x_r, r.x_c));
    nu_dev.push_back(r.u.nu - r.nu_r);
    m.peak_abs_nu = std::max(m.peak_abs_nu, std::abs(r.u.nu));
    m.max_abs_y_e = std::max(m.max_abs_y_e, std::abs(r.err.y_e));
    if (r.saturated) ++m.saturated_steps;
    if (r.stability) {
      ++m.stability_steps;
      m.worst_max_eig = std::max(m.worst_max_eig, r.stability->max_magnitude);
      if (r.stability->classification == StabilityClass::unstable) ++unstable;
      if (r.stability->classification == StabilityClass::marginal) ++marginal;
    }
  }
  m.lateral = compute_signal_metrics(
      lateral, default_band(std::abs(lateral.front()), options.band_fraction, options.band_floor));
  m.nu_tracking = compute_signal_metrics(
      nu_dev, default_band(std::abs(trace.front().nu_r), options.nu_band_fraction,
                           options.nu_band_floor));
  const auto& last = trace.back();
  m.final_error_norm = std::hypot(last.x_r.x - last.x_c.x, last.x_r.y - last.x_c.y);
  if (m.stability_steps > 0) {
    m.unstable_step_fraction =
        static_cast<double>(unstable) / static_cast<double>(m.stability_steps);
    m.marginal_step_fraction =
        static_cast<double>(marginal) / static_cast<double>(m.stability_steps);
  }
  return m;
}

RunResult run(const SimConfig& config, const RunOptions& options) {
  config.validate();
  return run(config, generate_track(config.track), options);
}

RunResult run(const SimConfig& config, const ReferenceTrajectory& reference,
              const RunOptions& options) {
  config.validate();
  const std::size_t n = reference.n_timesteps();
  if (n == 0) throw std::invalid_argument("run: empty reference trajectory");
  const double ts = config.ts();
  if (std::abs(reference.ts - ts) > 1e-15 * ts) {
    throw std::invalid_argument("run: reference sampled with a different Ts");
  }

  RunResult result;
  result.trace.reserve(n);

  const ReferencePoint& start = reference.points.front();
  Pose x_c{start.pose.x + config.initial_offset.x, start.pose.y + config.initial_offset.y,
           normalize_angle(start.pose.theta + config.initial_offset.theta)};

  OutageProcess channel(config.outage);
  UplinkBuffer buffer = make_uplink_buffer(x_c);

  try {
    for (std::size_t k = 0; k < n; ++k) {
      const ReferencePoint& ref_now = reference.points[k];

      // (1) uplink: the initial state is always delivered.
      std::size_t n_ul = 0;
      Pose seen = x_c;
      if (!options.bypass_channel) {
        const bool lost = k > 0 && channel.is_outage(k);
        buffer = uplink_step(buffer, x_c, k, lost);
        n_ul = buffer.n_ul;
        seen = buffer.last_received;
      }
      const std::size_t k_stale = k - n_ul;

      // (2) error against the current reference with the state the cloud holds.
      const ErrorVec err = options.bypass_channel ? compute_error(ref_now.pose, x_c)
                                                  : compute_error_stale(ref_now.pose, seen);

      // (3) control law and saturation.
      const ReferencePoint& ref_vel =
          config.reference_velocity_index == ReferenceVelocityIndex::stale
              ? reference.points[k_stale]
              : ref_now;
      const ControlInput raw = control_law(err, ref_vel, config.gains);
      const ControlInput u = saturate(raw, config.nu_max);

      TraceRecord rec;
      rec.k = k;
      rec.t = static_cast<double>(k) * ts;
      rec.x_r = ref_now.pose;
      rec.nu_r = ref_now.nu_r;
      rec.x_c = x_c;
      rec.err = err;
      rec.u = u;
      rec.saturated = raw.nu != u.nu;
      rec.n_ul = n_ul;

      // (4) stability of the linearized step, analyst's view of theta_c(k).
      if (config.stability_analysis) {
        const Matrix3 a = control_matrix_A(x_c.theta, seen.theta,
                                           reference.points[k_stale].nu_r, config.gains, ts);
        StabilityReport report = check_stability_step(a, config.stability_tol);
        report.k = k;
        report.n_ul = n_ul;
        rec.stability = report;
      }
      result.trace.push_back(rec);

      // (5) plant, downlink perfect: u acts during this same slot.
      x_c = step_euler(x_c, u, ts);
    }
  } catch (const DivergenceError& e) {
    result.status = RunStatus::diverged;
    std::ostringstream msg;
    msg << "diverged at step " << result.trace.size() << ": " << e.what();
    result.diagnostic = msg.str();
  }

  if (!result.trace.empty()) result.metrics = compute_metrics(result.trace);
  return result;
}

namespace {

constexpr std::array<std::string_view, 10> kSweepParameters{
    "kx", "ky", "ktheta", "ts", "total_time", "nu_max", "seed", "offset_x", "offset_y",
    "offset_theta"};

}  // namespace

std::span<const std::string_view> sweep_parameters() noexcept { return kSweepParameters; }

void apply_parameter(SimConfig& config, std::string_view name, double value) {
  if (name == "kx") {
    config.gains.kx = value;
  } else if (name == "ky") {
    config.gains.ky = value;
  } else if (name == "ktheta") {
    config.gains.ktheta = value;
  } else if (name == "ts") {
    config.track.ts = value;
  } else if (name == "total_time") {
    config.track.total_time = value;
  } else if (name == "nu_max") {
    if (value > 0.0) {
      config.nu_max = value;
    } else {
      config.nu_max.reset();  // 0 or negative: unlimited
    }
  } else if (name == "seed") {
    if (!(value >= 0.0) || value != std::floor(value)) {
      throw std::invalid_argument("seed must be a non-negative integer");
    }
    config.outage.seed = static_cast<std::uint64_t>(value);
  } else if (name == "offset_x") {
    config.initial_offset.x = value;
  } else if (name == "offset_y") {
    config.initial_offset.y = value;
  } else if (name == "offset_theta") {
    config.initial_offset.theta = value;
  } else {
    throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
  }
}

std::vector<SweepPoint> sweep(const SimConfig& base, std::string_view parameter,
                              std::span<const double> values, unsigned jobs) {
  std::vector<SweepPoint> points(values.size());
  parallel_for(values.size(), jobs, [&](std::size_t i) {
    SweepPoint& p = points[i];
    p.value = values[i];
    try {
      SimConfig cfg = base;
      apply_parameter(cfg, parameter, values[i]);
      p.result = run(cfg);
    } catch (const std::exception& e) {
      p.error = e.what();
    }
  });
  return points;
}

StabilityMapCell evaluate_lag(std::span<const TraceRecord> trace,
                              const ReferenceTrajectory& reference, const Gains& g, double ts,
                              std::size_t n_ul, double tol) {
  StabilityMapCell cell;
  cell.kx = g.kx;
  cell.n_ul = n_ul;
  std::size_t unstable = 0;
  std::size_t marginal = 0;
  for (std::size_t k = n_ul; k < trace.size(); ++k) {
    const std::size_t ks = k - n_ul;
    const Matrix3 a = control_matrix_A(trace[k].x_c.theta, trace[ks].x_c.theta,
                                       reference.points[ks].nu_r, g, ts);
    const StabilityReport r = check_stability_step(a, tol);
    ++cell.steps_evaluated;
    cell.worst_max_eig = std::max(cell.worst_max_eig, r.max_magnitude);
    if (r.classification == StabilityClass::unstable) ++unstable;
    if (r.classification == StabilityClass::marginal) ++marginal;
  }
  if (cell.steps_evaluated > 0) {
    const double total = static_cast<double>(cell.steps_evaluated);
    cell.unstable_fraction = static_cast<double>(unstable) / total;
    cell.marginal_fraction = static_cast<double>(marginal) / total;
  }
  cell.worst_class = unstable > 0   ? StabilityClass::unstable
                     : marginal > 0 ? StabilityClass::marginal
                                    : StabilityClass::stable;
  return cell;
}

StabilityMap stability_map(const SimConfig& base, std::span<const double> kx_values,
                           std::span<const std::size_t> n_ul_values, unsigned jobs) {
  if (kx_values.empty() || n_ul_values.empty()) {
    throw std::invalid_argument("stability_map: empty kx or n_ul range");
  }
  StabilityMap map;
  map.kx_values.assign(kx_values.begin(), kx_values.end());
  map.n_ul_values.assign(n_ul_values.begin(), n_ul_values.end());
  map.cells.resize(kx_values.size() * n_ul_values.size());

  SimConfig nominal = base;
  nominal.outage = OutageModel{};
  nominal.stability_analysis = false;
  nominal.validate();
  const ReferenceTrajectory reference = generate_track(nominal.track);

  std::vector<RunResult> runs(kx_values.size());
  parallel_for(kx_values.size(), jobs, [&](std::size_t i) {
    SimConfig cfg = nominal;
    cfg.gains.kx = kx_values[i];
    runs[i] = run(cfg, reference);
  });

  parallel_for(map.cells.size(), jobs, [&](std::size_t idx) {
    const std::size_t i = idx / n_ul_values.size();
    const std::size_t j = idx % n_ul_values.size();
    Gains g = nominal.gains;
    g.kx = kx_values[i];
    StabilityMapCell cell =
        evaluate_lag(runs[i].trace, reference, g, nominal.ts(), n_ul_values[j],
                     nominal.stability_tol);
    cell.nominal_run_diverged = runs[i].status == RunStatus::diverged;
    map.cells[idx] = cell;
  });
  return map;
}

namespace {

constexpr std::array<std::string_view, 23> kTraceColumns{
    "k",           "t",           "x_r",         "y_r",         "theta_r",     "x_c",
    "y_c",         "theta_c",     "x_e",         "y_e",         "theta_e",     "nu",
    "omega",       "saturated",   "n_ul",        "lambda1_re",  "lambda1_im",  "lambda2_re",
    "lambda2_im",  "lambda3_re",  "lambda3_im",  "max_eig_mag", "stability_class"};

}  // namespace

std::span<const std::string_view> trace_columns() noexcept { return kTraceColumns; }

void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace,
                     std::string_view comment) {
  write_comment(os, comment);
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
    os << (i ? "," : "") << kTraceColumns[i];
  }
  os << '\n';
  os << std::setprecision(17);
  for (const auto& r : trace) {
    os << r.k << ',' << r.t << ',' << r.x_r.x << ',' << r.x_r.y << ',' << r.x_r.theta << ','
       << r.x_c.x << ',' << r.x_c.y << ',' << r.x_c.theta << ',' << r.err.x_e << ','
       << r.err.y_e << ',' << r.err.theta_e << ',' << r.u.nu << ',' << r.u.omega << ','
       << (r.saturated ? 1 : 0) << ',' << r.n_ul;
    if (r.stability) {
      for (const auto& l : r.stability->eigenvalues) os << ',' << l.real() << ',' << l.imag();
      os << ',' << r.stability->max_magnitude << ',' << to_string(r.stability->classification);
    } else {
      os << ",nan,nan,nan,nan,nan,nan,nan,none";
    }
    os << '\n';
  }
}

void write_metrics(std::ostream& os, const RunResult& result, std::string_view comment) {
  write_comment(os, comment);
  const RunMetrics& m = result.metrics;
  os << std::setprecision(10);
  os << "status = " << (result.status == RunStatus::ok ? "ok" : "diverged") << '\n';
  if (!result.diagnostic.empty()) os << "diagnostic = " << result.diagnostic << '\n';
  os << "steps = " << result.trace.size() << '\n';
  os << "settled = " << (m.lateral.settled ? "true" : "false") << '\n';
  os << "settling_time_steps = " << m.lateral.settling_time_steps << '\n';
  os << "settling_band_m = " << m.lateral.band << '\n';
  os << "overshoot_count = " << m.lateral.overshoot_count << '\n';
  os << "damping_class = " << to_string(m.lateral.damping_class) << '\n';
  os << "nu_settling_time_steps = " << m.nu_tracking.settling_time_steps << '\n';
  os << "nu_overshoot_count = " << m.nu_tracking.overshoot_count << '\n';
  os << "nu_damping_class = " << to_string(m.nu_tracking.damping_class) << '\n';
  os << "peak_abs_nu = " << m.peak_abs_nu << '\n';
  os << "saturated_steps = " << m.saturated_steps << '\n';
  os << "max_abs_y_e = " << m.max_abs_y_e << '\n';
  os << "final_error_norm = " << m.final_error_norm << '\n';
  os << "stability_steps = " << m.stability_steps << '\n';
  os << "unstable_step_fraction = " << m.unstable_step_fraction << '\n';
  os << "marginal_step_fraction = " << m.marginal_step_fraction << '\n';
  os << "worst_max_eig = " << m.worst_max_eig << '\n';
}

void write_sweep_table(std::ostream& os, std::string_view parameter,
                       std::span<const SweepPoint> points, std::string_view comment) {
  write_comment(os, comment);
  os << parameter
     << ",status,settled,settling_time_steps,overshoot_count,damping_class,nu_overshoot_count,"
        "nu_damping_class,peak_abs_nu,max_abs_y_e,final_error_norm,unstable_step_fraction,"
        "worst_max_eig,error\n";
  os << std::setprecision(10);
  for (const auto& p : points) {
    os << p.value << ',';
    if (!p.result) {
      os << "error,,,,,,,,,,,,\"" << p.error << "\"\n";
      continue;
    }
    const RunMetrics& m = p.result->metrics;
    os << (p.result->status == RunStatus::ok ? "ok" : "diverged") << ','
       << (m.lateral.settled ? "true" : "false") << ',' << m.lateral.settling_time_steps << ','
       << m.lateral.overshoot_count << ',' << to_string(m.lateral.damping_class) << ','
       << m.nu_tracking.overshoot_count << ',' << to_string(m.nu_tracking.damping_class) << ','
       << m.peak_abs_nu << ',' << m.max_abs_y_e << ',' << m.final_error_norm << ','
       << m.unstable_step_fraction << ',' << m.worst_max_eig << ",\n";
  }
}

void write_stability_map(std::ostream& os, const StabilityMap& map, std::string_view comment) {
  write_comment(os, comment);
  os << "kx,n_ul,steps_evaluated,worst_max_eig,unstable_fraction,marginal_fraction,worst_class,"
        "nominal_diverged\n";
  os << std::setprecision(12);
  for (const auto& c : map.cells) {
    os << c.kx << ',' << c.n_ul << ',' << c.steps_evaluated << ',' << c.worst_max_eig << ','
       << c.unstable_fraction << ',' << c.marginal_fraction << ',' << to_string(c.worst_class)
       << ',' << (c.nominal_run_diverged ? 1 : 0) << '\n';
  }
}

}  // namespace cloudagv
