#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cloudagv/channel.hpp"
#include "cloudagv/controller.hpp"
#include "cloudagv/reference.hpp"
#include "cloudagv/stability.hpp"

namespace cloudagv {

/// Which reference sample feeds nu_r / omega_r into the control law while the
/// cloud works from a stale plant state.
enum class ReferenceVelocityIndex { stale, current };

struct SimConfig {
  TrackSpec track;
  Gains gains;
  Pose initial_offset;  ///< world-frame displacement: X_c(0) = X_r(0) + offset
  std::optional<double> nu_max;
  OutageModel outage;
  bool stability_analysis = true;
  double stability_tol = kDefaultMarginTol;
  ReferenceVelocityIndex reference_velocity_index = ReferenceVelocityIndex::stale;

  [[nodiscard]] double ts() const noexcept { return track.ts; }
  /// Throws std::invalid_argument.
  void validate() const;
};

struct TraceRecord {
  std::size_t k = 0;
  double t = 0.0;
  Pose x_r;
  double nu_r = 0.0;  ///< reference speed at k
  Pose x_c;
  ErrorVec err;  ///< error the controller acted on (stale during outages)
  ControlInput u;
  bool saturated = false;
  std::size_t n_ul = 0;
  std::optional<StabilityReport> stability;
};

enum class DampingClass { monotone, single_overshoot, oscillatory };

[[nodiscard]] std::string_view to_string(DampingClass c) noexcept;

/// Settling / overshoot summary of one scalar error signal.
struct SignalMetrics {
  bool settled = true;
  std::size_t settling_time_steps = 0;  ///< equals the signal length when not settled
  int overshoot_count = 0;
  DampingClass damping_class = DampingClass::monotone;
  double band = 0.0;  ///< the tolerance band delta that was used
};

struct MetricOptions {
  double band_fraction = 0.01;  ///< delta = fraction of the initial |error| ...
  double band_floor = 0.01;     ///< ... but never below this (m)
  double nu_band_fraction = 0.01;
  double nu_band_floor = 0.01;  ///< m/s
};

/// Settling time: smallest k_s with |e(k)| <= band for all k >= k_s.
/// Overshoots: sign changes of e among samples with |e| >= band.
[[nodiscard]] SignalMetrics compute_signal_metrics(std::span<const double> signal, double band);

[[nodiscard]] double default_band(double initial_abs, double fraction, double floor) noexcept;

struct RunMetrics {
  /// Monitored error: lateral deviation from the path, i.e. the offset
  /// X_r - X_c projected on the reference normal (on a straight x-axis
  /// segment it is y_r - y_c).
  SignalMetrics lateral;
  /// nu - nu_r: how the commanded speed approaches the reference speed.
  SignalMetrics nu_tracking;
  double peak_abs_nu = 0.0;
  double max_abs_y_e = 0.0;  ///< body-frame lateral error seen by the controller
  double final_error_norm = 0.0;
  std::size_t stability_steps = 0;
  double unstable_step_fraction = 0.0;
  double marginal_step_fraction = 0.0;
  double worst_max_eig = 0.0;
  std::size_t saturated_steps = 0;
};

enum class RunStatus { ok, diverged };

struct RunResult {
  std::vector<TraceRecord> trace;
  RunMetrics metrics;
  RunStatus status = RunStatus::ok;
  std::string diagnostic;
};

struct RunOptions {
  /// Skip the uplink entirely: the controller always sees the true state.
  bool bypass_channel = false;
};

/// Lateral deviation of X_c from the reference point, in the reference frame.
[[nodiscard]] double lateral_deviation(const Pose& x_r, const Pose& x_c) noexcept;

/// Closed loop over N steps. Per step: uplink delivery decision, stale error,
/// control law, saturation, stability report, plant step. A divergence stops
/// the run and returns the partial trace with status diverged.
[[nodiscard]] RunResult run(const SimConfig& config, const RunOptions& options = {});
[[nodiscard]] RunResult run(const SimConfig& config, const ReferenceTrajectory& reference,
                            const RunOptions& options = {});

[[nodiscard]] RunMetrics compute_metrics(std::span<const TraceRecord> trace,
                                         const MetricOptions& options = {});

/// Parameter names accepted by sweeps and CLI overrides:
/// kx, ky, ktheta, ts, total_time, nu_max, seed, offset_x, offset_y, offset_theta.
void apply_parameter(SimConfig& config, std::string_view name, double value);
[[nodiscard]] std::span<const std::string_view> sweep_parameters() noexcept;

struct SweepPoint {
  double value = 0.0;
  std::optional<RunResult> result;
  std::string error;  ///< set when the run could not be configured
};

/// One independent run per value, all with the base seed. Results follow the
/// input order. Runs fan out over up to `jobs` threads.
[[nodiscard]] std::vector<SweepPoint> sweep(const SimConfig& base, std::string_view parameter,
                                            std::span<const double> values, unsigned jobs = 1);

struct StabilityMapCell {
  double kx = 0.0;
  std::size_t n_ul = 0;
  std::size_t steps_evaluated = 0;
  double worst_max_eig = 0.0;
  double unstable_fraction = 0.0;
  double marginal_fraction = 0.0;
  StabilityClass worst_class = StabilityClass::stable;
  bool nominal_run_diverged = false;
};

struct StabilityMap {
  std::vector<double> kx_values;
  std::vector<std::size_t> n_ul_values;
  std::vector<StabilityMapCell> cells;  ///< row-major: kx outer, n_ul inner

  [[nodiscard]] const StabilityMapCell& at(std::size_t kx_index, std::size_t n_ul_index) const {
    return cells.at(kx_index * n_ul_values.size() + n_ul_index);
  }
};

/// For each Kx one nominal run over a perfect uplink; each cell then applies
/// the step criterion to A(k) built with a stale lag of n_ul samples
/// (theta_c(k - n_ul), nu_r(k - n_ul)) for every k >= n_ul.
[[nodiscard]] StabilityMap stability_map(const SimConfig& base, std::span<const double> kx_values,
                                         std::span<const std::size_t> n_ul_values,
                                         unsigned jobs = 1);

/// Evaluates one map cell on an existing trace.
[[nodiscard]] StabilityMapCell evaluate_lag(std::span<const TraceRecord> trace,
                                            const ReferenceTrajectory& reference, const Gains& g,
                                            double ts, std::size_t n_ul,
                                            double tol = kDefaultMarginTol);

/// Column list of the trace CSV, in order.
[[nodiscard]] std::span<const std::string_view> trace_columns() noexcept;

/// Writes `comment` lines prefixed with "# ", then the header row, then one row per record.
void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace,
                     std::string_view comment = {});
void write_metrics(std::ostream& os, const RunResult& result, std::string_view comment = {});
void write_sweep_table(std::ostream& os, std::string_view parameter,
                       std::span<const SweepPoint> points, std::string_view comment = {});
void write_stability_map(std::ostream& os, const StabilityMap& map, std::string_view comment = {});

}  // namespace cloudagv
