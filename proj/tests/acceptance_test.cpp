// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cloudagv/sim.hpp"

namespace {

using namespace cloudagv;
using cplx = std::complex<double>;

constexpr double kTs = 0.005;

// Regression value: first stale lag at which the circle map turns unstable.
constexpr std::size_t kOutageThresholdNul = 138;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += " [failed: " + what + "]";
    }
  }
  void note(const std::string& s) { detail += " " + s; }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

SimConfig scurve(double kx, std::optional<double> nu_max) {
  SimConfig c;
  c.track.family = track::SCurve{};
  c.track.total_time = 100.0;
  c.track.ts = kTs;
  c.track.speed = speed::Constant{1.0};
  c.gains = {kx, 64.0, 16.0};
  c.initial_offset = {0.0, -5.0, 0.0};
  c.nu_max = nu_max;
  return c;
}

SimConfig small_circle() {
  SimConfig c;
  c.track.family = track::Circle{0.5, true};
  c.track.total_time = 10.0;
  c.track.ts = kTs;
  c.track.speed = speed::Constant{1.0};
  c.gains = {25.0, 64.0, 16.0};
  return c;
}

std::array<cplx, 3> eigen_oracle(const Matrix3& a) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = a[i][j];
  const Eigen::Vector3cd ev = Eigen::EigenSolver<Eigen::Matrix3d>(m, false).eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

double matched_distance(const std::array<cplx, 3>& a, const std::array<cplx, 3>& b) {
  std::array<int, 3> perm{0, 1, 2};
  double best = INFINITY;
  do {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

bool traces_identical(const RunResult& a, const RunResult& b) {
  if (a.trace.size() != b.trace.size()) return false;
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    const auto& p = a.trace[i];
    const auto& q = b.trace[i];
    if (!(p.x_c == q.x_c && p.err == q.err && p.u == q.u && p.n_ul == q.n_ul &&
          p.saturated == q.saturated))
      return false;
  }
  return true;
}

double max_error(const RunResult& r) {
  double m = 0.0;
  for (const auto& rec : r.trace) m = std::max(m, std::hypot(rec.err.x_e, rec.err.y_e, rec.err.theta_e));
  return m;
}

Outcome kx_sweep_unlimited() {
  Outcome o;
  const auto m5 = run(scurve(5.0, std::nullopt)).metrics.lateral;
  const auto m25 = run(scurve(25.0, std::nullopt)).metrics.lateral;
  const auto m250 = run(scurve(250.0, std::nullopt)).metrics.lateral;
  o.note("settling(5,25,250)=" + std::to_string(m5.settling_time_steps) + "," +
         std::to_string(m25.settling_time_steps) + "," + std::to_string(m250.settling_time_steps) +
         " overshoots(250)=" + std::to_string(m250.overshoot_count));
  o.require(m5.settled && m25.settled && m250.settled, "all settle");
  o.require(m5.damping_class == DampingClass::monotone, "kx=5 monotone");
  o.require(m25.damping_class == DampingClass::monotone, "kx=25 monotone");
  o.require(m25.settling_time_steps < m5.settling_time_steps, "kx=25 settles faster than kx=5");
  o.require(m5.settling_time_steps >= std::max(m25.settling_time_steps, m250.settling_time_steps),
            "kx=5 slowest");
  o.require(m250.damping_class == DampingClass::oscillatory && m250.overshoot_count >= 1,
            "kx=250 oscillatory");
  return o;
}

Outcome peak_velocity() {
  Outcome o;
  const auto r = run(scurve(5.0, std::nullopt));
  double peak = 0.0;
  for (std::size_t k = 0; k < 20 && k < r.trace.size(); ++k) peak = std::max(peak, std::abs(r.trace[k].u.nu));
  o.note(fmt("peak|nu|=%.3f m/s", peak));
  o.require(std::abs(peak - 25.0) <= 0.15 * 25.0, "within 25 +/- 15%");
  return o;
}

Outcome limited_velocity() {
  Outcome o;
  std::vector<RunMetrics> m;
  for (double kx : {5.0, 25.0, 250.0}) {
    const auto r = run(scurve(kx, 6.0));
    o.require(r.status == RunStatus::ok, "run ok");
    bool bounded = true;
    for (const auto& rec : r.trace) bounded = bounded && std::abs(rec.u.nu) <= 6.0;
    o.require(bounded, "|nu| <= 6 for kx=" + std::to_string(int(kx)));
    m.push_back(r.metrics);
  }
  const double s25 = double(m[1].lateral.settling_time_steps);
  const double s250 = double(m[2].lateral.settling_time_steps);
  o.note("settling(25,250)=" + std::to_string(int(s25)) + "," + std::to_string(int(s250)) +
         " nu_overshoots(5,250)=" + std::to_string(m[0].nu_tracking.overshoot_count) + "," +
         std::to_string(m[2].nu_tracking.overshoot_count));
  o.require(m[1].lateral.settled && m[2].lateral.settled, "kx=25,250 settle");
  o.require(std::abs(s25 - s250) <= 0.2 * std::min(s25, s250), "settling within 20%");
  o.require(m[0].nu_tracking.damping_class == DampingClass::monotone, "kx=5 nu monotone");
  o.require(m[2].nu_tracking.overshoot_count >= 1, "kx=250 nu oscillates");
  return o;
}

Outcome time_constant() {
  Outcome o;
  for (double kx : {5.0, 25.0}) {
    SimConfig c;
    c.track.family = track::Line{100.0};
    c.track.total_time = 100.0;
    c.track.ts = kTs;
    c.track.speed = speed::Constant{1.0};
    c.gains.kx = kx;
    c.initial_offset = {-0.1, 0.0, 0.0};
    const auto r = run(c);
    const std::size_t m = 20;
    const double ratio = std::pow(r.trace[m].err.x_e / r.trace[0].err.x_e, 1.0 / double(m));
    const double expected = 1.0 - kTs * kx;
    o.note("kx=" + std::to_string(int(kx)) + fmt(" ratio=%.6f", ratio) + fmt(" expected=%.6f", expected));
    o.require(std::abs(ratio - expected) <= 0.05 * expected, "decay ratio within 5%");
  }
  return o;
}

Outcome stability_mechanics() {
  Outcome o;
  const SimConfig c = small_circle();
  const auto ref = generate_track(c.track);
  const auto r = run(c, ref);
  bool all_stable = r.status == RunStatus::ok;
  double worst = 0.0;
  for (const auto& rec : r.trace) {
    all_stable = all_stable && rec.stability && rec.stability->classification == StabilityClass::stable;
    if (rec.stability) worst = std::max(worst, rec.stability->max_magnitude);
  }
  o.note(fmt("nominal max|lambda|=%.6f", worst));
  o.require(all_stable, "every nominal step stable");

  Gains big = c.gains;
  big.kx = 2.2 / kTs;
  const auto cell = evaluate_lag(r.trace, ref, big, kTs, 0);
  o.note(fmt("Ts*Kx=2.2 max|lambda|=%.4f", cell.worst_max_eig));
  o.require(cell.worst_max_eig > 1.0 && cell.worst_class == StabilityClass::unstable,
            "Ts*Kx > 2 unstable");
  return o;
}

Outcome outage_degradation() {
  Outcome o;
  const SimConfig c = small_circle();
  std::vector<std::size_t> lags;
  for (std::size_t n = 0; n <= 200; ++n) lags.push_back(n);
  const std::vector<double> kx{c.gains.kx};
  const auto map = stability_map(c, kx, lags, 4);
  // omega_r * n * Ts stays below pi here, so the heading mismatch grows with n
  bool monotone = true;
  std::optional<std::size_t> first_unstable;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const auto& cell = map.at(0, i);
    if (i > 0) monotone = monotone && cell.worst_max_eig + 1e-9 >= map.at(0, i - 1).worst_max_eig;
    if (!first_unstable && cell.worst_class == StabilityClass::unstable) first_unstable = lags[i];
  }
  o.require(map.at(0, 0).worst_class != StabilityClass::unstable, "n_ul=0 not unstable");
  o.require(monotone, "worst max|lambda| non-decreasing");
  o.require(first_unstable.has_value(), "an unstable cell exists");
  if (first_unstable) {
    o.note("threshold n_ul=" + std::to_string(*first_unstable) +
           fmt(" (mismatch %.3f rad)", 2.0 * double(*first_unstable) * kTs));
    o.require(*first_unstable == kOutageThresholdNul, "threshold matches regression value");
  }
  return o;
}

Outcome numerical_cross_checks() {
  Outcome o;
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  double worst_eig = 0.0;
  for (int n = 0; n < 1000; ++n) {
    Matrix3 a{};
    for (auto& row : a)
      for (double& v : row) v = u(gen);
    worst_eig = std::max(worst_eig, matched_distance(eigenvalues_3x3(a).values, eigen_oracle(a)));
  }
  o.note(fmt("eig dev=%.2e", worst_eig));
  o.require(worst_eig <= 1e-7, "eigenvalues vs oracle <= 1e-7");

  const double h = 1e-6;
  double worst_fd = 0.0;
  for (int n = 0; n < 200; ++n) {
    const Gains g{5.0 + 100.0 * std::abs(u(gen)), 1.0 + 100.0 * std::abs(u(gen)), 1.0 + 30.0 * std::abs(u(gen))};
    const ReferencePoint ref{{0, 0, 0}, 2.0 * u(gen), 2.0 * u(gen)};
    const Matrix3 a = linearize_continuous(ref, g);
    for (int j = 0; j < 3; ++j) {
      ErrorVec p{}, m{};
      (j == 0 ? p.x_e : j == 1 ? p.y_e : p.theta_e) = h;
      (j == 0 ? m.x_e : j == 1 ? m.y_e : m.theta_e) = -h;
      const ErrorVec fp = continuous_error_dynamics(p, ref, g);
      const ErrorVec fm = continuous_error_dynamics(m, ref, g);
      const double col[3] = {(fp.x_e - fm.x_e) / (2 * h), (fp.y_e - fm.y_e) / (2 * h),
                             (fp.theta_e - fm.theta_e) / (2 * h)};
      for (int i = 0; i < 3; ++i)
        worst_fd = std::max(worst_fd, std::abs(col[i] - a[i][j]) / std::max(1.0, std::abs(a[i][j])));
    }
  }
  o.note(fmt("fd dev=%.2e", worst_fd));
  o.require(worst_fd <= 1e-6, "jacobian vs finite differences <= 1e-6 relative");

  // Step-matrix spectrum against the Euler map of the continuous linearization,
  // on the small circle (omega_r = 2 rad/s) with no outage.
  const Gains g{25.0, 64.0, 16.0};
  const ReferencePoint ref{{0, 0, 0.4}, 1.0, 2.0};
  auto discrepancy = [&](double ts) {
    const auto disc = eigenvalues_3x3(control_matrix_A(0.4, 0.4, ref.nu_r, g, ts)).values;
    auto cont = eigen_oracle(linearize_continuous(ref, g));
    for (auto& z : cont) z = 1.0 + ts * z;
    return matched_distance(disc, cont);
  };
  const double d1 = discrepancy(0.01);
  const double d2 = discrepancy(0.005);
  const double d3 = discrepancy(0.0025);
  o.note(fmt("eig consistency ratios=%.3f", d1 / d2) + fmt(",%.3f", d2 / d3));
  o.require(d1 / d2 >= 1.7 && d1 / d2 <= 2.3 && d2 / d3 >= 1.7 && d2 / d3 <= 2.3,
            "consistency improves linearly");

  // Euler global error against the fine-step oracle.
  const Pose start{0.5, -0.2, 0.3};
  const ControlInput uin{1.0, 1.0};
  auto global_error = [&](double ts) {
    Pose p = start;
    Pose q = start;
    const auto steps = static_cast<int>(std::lround(2.0 / ts));
    for (int i = 0; i < steps; ++i) {
      p = step_euler(p, uin, ts);
      q = step_fine_oracle(q, uin, ts, 2000);
    }
    return std::hypot(p.x - q.x, p.y - q.y);
  };
  const double euler_ratio = global_error(0.02) / global_error(0.01);
  o.note(fmt("euler ratio=%.3f", euler_ratio));
  o.require(euler_ratio >= 1.7 && euler_ratio <= 2.3, "euler halving ratio in [1.7, 2.3]");
  return o;
}

Outcome closed_loop_sanity() {
  Outcome o;
  SimConfig c = scurve(25.0, std::nullopt);
  c.initial_offset = {};
  const auto ref1 = generate_track(c.track);
  const double e1 = max_error(run(c, ref1));
  // C = max curvature * speed^2 * T: the accumulated one-step realizability residual.
  const double bound = ref1.max_curvature * 1.0 * c.track.total_time * c.ts();
  c.track.ts = kTs / 2;
  const double e2 = max_error(run(c));
  o.note(fmt("max|eps| Ts=%.2e", e1) + fmt(" Ts/2=%.2e", e2) + fmt(" ratio=%.3f", e1 / e2));
  o.require(e1 <= bound, "bounded by C*Ts");
  o.require(e1 / e2 >= 1.7 && e1 / e2 <= 2.3, "shrinks about 2x when Ts is halved");

  const SimConfig s = scurve(25.0, 6.0);
  o.require(traces_identical(run(s), run(s, RunOptions{true})), "perfect channel equals bypass");

  SimConfig b = scurve(25.0, 6.0);
  b.outage = {outage::GilbertElliott{0.01, 0.2, 0.0, 1.0}, 2024};
  o.require(traces_identical(run(b), run(b)), "fixed seed bit-identical");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {1, "kx sweep, unlimited velocity", kx_sweep_unlimited},
      {2, "peak velocity with kx=5", peak_velocity},
      {3, "limited velocity", limited_velocity},
      {4, "time constant 1/kx", time_constant},
      {5, "step stability criterion", stability_mechanics},
      {6, "outage degradation map", outage_degradation},
      {7, "numerical cross-checks", numerical_cross_checks},
      {8, "closed-loop sanity", closed_loop_sanity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string(" exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %d %s:%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
