#include "cloudagv/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cloudagv::plot {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr std::size_t kMaxPoints = 4000;

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string comment_block(std::string_view comment) {
  if (comment.empty()) return {};
  std::string text(comment);
  // "--" is not allowed inside XML comments.
  for (std::size_t pos = text.find("--"); pos != std::string::npos; pos = text.find("--"))
    text.replace(pos, 2, "- -");
  return "<!--\n" + text + "\n-->\n";
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = std::max(1e-3, std::abs(hi) * 0.05);
      lo -= pad;
      hi += pad;
    }
  }
};

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double nice = norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

struct Frame {
  Range xr;
  Range yr;
  double x0 = kLeft;
  double y0 = kTop;
  double w = kWidth - kLeft - kRight;
  double h = kHeight - kTop - kBottom;

  [[nodiscard]] double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
  [[nodiscard]] double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }

  void equalize() {
    const double sx = (xr.hi - xr.lo) / w;
    const double sy = (yr.hi - yr.lo) / h;
    if (sx > sy) {
      const double mid = 0.5 * (yr.lo + yr.hi);
      const double half = 0.5 * sx * h;
      yr = {mid - half, mid + half};
    } else {
      const double mid = 0.5 * (xr.lo + xr.hi);
      const double half = 0.5 * sy * w;
      xr = {mid - half, mid + half};
    }
  }
};

void axes(std::ostringstream& svg, const Frame& f, const std::string& title,
          const std::string& xl, const std::string& yl) {
  svg << "<rect x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\"" << fmt(f.w)
      << "\" height=\"" << fmt(f.h) << "\" fill=\"none\" stroke=\"#000\"/>\n";
  const double xs = nice_step(f.xr.hi - f.xr.lo, 6);
  for (double v = std::ceil(f.xr.lo / xs) * xs; v <= f.xr.hi + 1e-9 * xs; v += xs) {
    const double x = f.px(v);
    svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(f.y0 + f.h) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(f.y0 + f.h + 5) << "\" stroke=\"#000\"/>\n"
        << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(f.y0 + f.h + 20)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << tick_label(v) << "</text>\n";
  }
  const double ys = nice_step(f.yr.hi - f.yr.lo, 6);
  for (double v = std::ceil(f.yr.lo / ys) * ys; v <= f.yr.hi + 1e-9 * ys; v += ys) {
    const double y = f.py(v);
    svg << "<line x1=\"" << fmt(f.x0 - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(f.x0)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"#000\"/>\n"
        << "<text x=\"" << fmt(f.x0 - 8) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-size=\"12\">" << tick_label(v) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(f.x0 + f.w / 2) << "\" y=\"" << fmt(kTop - 15)
      << "\" text-anchor=\"middle\" font-size=\"16\">" << escape(title) << "</text>\n";
  svg << "<text x=\"" << fmt(f.x0 + f.w / 2) << "\" y=\"" << fmt(kHeight - 15)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(xl) << "</text>\n";
  svg << "<text transform=\"translate(20," << fmt(f.y0 + f.h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" << escape(yl)
      << "</text>\n";
}

std::string header(std::string_view comment) {
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" << comment_block(comment)
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  return s.str();
}

}  // namespace

std::string render_line_plot(const PlotSpec& spec, std::span<const Series> series) {
  Frame f;
  for (const auto& s : series) {
    for (double v : s.x) f.xr.add(v);
    for (double v : s.y) f.yr.add(v);
  }
  f.xr.finish();
  f.yr.finish();
  if (spec.equal_aspect) f.equalize();

  std::ostringstream svg;
  svg << header(spec.comment);
  axes(svg, f, spec.title, spec.x_label, spec.y_label);

  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    const char* color = kPalette[i % kPalette.size()];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (n == 1) {
      svg << "<circle cx=\"" << fmt(f.px(s.x[0])) << "\" cy=\"" << fmt(f.py(s.y[0]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    } else if (n > 1) {
      const std::size_t stride = (n + kMaxPoints - 1) / kMaxPoints;
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t j = 0; j < n; j += stride) {
        if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j])) continue;
        svg << fmt(f.px(s.x[j])) << ',' << fmt(f.py(s.y[j])) << ' ';
      }
      if ((n - 1) % stride != 0) svg << fmt(f.px(s.x[n - 1])) << ',' << fmt(f.py(s.y[n - 1]));
      svg << "\"/>\n";
    }
    const double ly = kTop + 20.0 + 18.0 * static_cast<double>(i);
    const double lx = kWidth - kRight + 12.0;
    svg << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 20)
        << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << fmt(lx + 26) << "\" y=\"" << fmt(ly + 4) << "\" font-size=\"12\">"
        << escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_heatmap(const HeatmapSpec& spec, std::span<const double> x_values,
                           std::span<const double> y_values, std::span<const double> values) {
  if (x_values.empty() || y_values.empty() || values.size() != x_values.size() * y_values.size()) {
    throw std::invalid_argument("render_heatmap: grid shape mismatch");
  }
  Range vr;
  for (double v : values) vr.add(v);
  vr.finish();

  Frame f;
  f.xr = {-0.5, static_cast<double>(x_values.size()) - 0.5};
  f.yr = {-0.5, static_cast<double>(y_values.size()) - 0.5};
  const double cw = f.w / static_cast<double>(x_values.size());
  const double ch = f.h / static_cast<double>(y_values.size());

  std::ostringstream svg;
  svg << header(spec.comment);
  auto color = [&](double v) {
    const double t = std::isfinite(v) ? (v - vr.lo) / (vr.hi - vr.lo) : 1.0;
    const int r = static_cast<int>(std::lround(255.0 * t));
    const int b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x40%02x", r, b);
    return std::string(buf);
  };
  for (std::size_t iy = 0; iy < y_values.size(); ++iy) {
    for (std::size_t ix = 0; ix < x_values.size(); ++ix) {
      const double v = values[iy * x_values.size() + ix];
      const double x = f.px(static_cast<double>(ix)) - cw / 2;
      const double y = f.py(static_cast<double>(iy)) - ch / 2;
      svg << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(cw)
          << "\" height=\"" << fmt(ch) << "\" fill=\"" << color(v) << "\"";
      if (v > spec.contour) svg << " stroke=\"#000\" stroke-width=\"1\"";
      svg << "/>\n";
    }
  }
  svg << "<rect x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\"" << fmt(f.w)
      << "\" height=\"" << fmt(f.h) << "\" fill=\"none\" stroke=\"#000\"/>\n";
  const std::size_t xstride = std::max<std::size_t>(1, x_values.size() / 10);
  for (std::size_t ix = 0; ix < x_values.size(); ix += xstride) {
    svg << "<text x=\"" << fmt(f.px(static_cast<double>(ix))) << "\" y=\""
        << fmt(f.y0 + f.h + 18) << "\" text-anchor=\"middle\" font-size=\"11\">"
        << tick_label(x_values[ix]) << "</text>\n";
  }
  const std::size_t ystride = std::max<std::size_t>(1, y_values.size() / 10);
  for (std::size_t iy = 0; iy < y_values.size(); iy += ystride) {
    svg << "<text x=\"" << fmt(f.x0 - 8) << "\" y=\"" << fmt(f.py(static_cast<double>(iy)) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(y_values[iy]) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(f.x0 + f.w / 2) << "\" y=\"" << fmt(kTop - 15)
      << "\" text-anchor=\"middle\" font-size=\"16\">" << escape(spec.title) << "</text>\n";
  svg << "<text x=\"" << fmt(f.x0 + f.w / 2) << "\" y=\"" << fmt(kHeight - 15)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(spec.x_label) << "</text>\n";
  svg << "<text transform=\"translate(20," << fmt(f.y0 + f.h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" << escape(spec.y_label)
      << "</text>\n";
  // colour bar
  const double bx = kWidth - kRight + 20.0;
  for (int i = 0; i < 20; ++i) {
    const double t = 1.0 - static_cast<double>(i) / 19.0;
    svg << "<rect x=\"" << fmt(bx) << "\" y=\"" << fmt(f.y0 + f.h * i / 20.0)
        << "\" width=\"18\" height=\"" << fmt(f.h / 20.0 + 0.5) << "\" fill=\""
        << color(vr.lo + t * (vr.hi - vr.lo)) << "\"/>\n";
  }
  svg << "<text x=\"" << fmt(bx + 24) << "\" y=\"" << fmt(f.y0 + 10) << "\" font-size=\"11\">"
      << tick_label(vr.hi) << "</text>\n"
      << "<text x=\"" << fmt(bx + 24) << "\" y=\"" << fmt(f.y0 + f.h) << "\" font-size=\"11\">"
      << tick_label(vr.lo) << "</text>\n"
      << "<text x=\"" << fmt(bx) << "\" y=\"" << fmt(f.y0 + f.h + 18) << "\" font-size=\"11\">"
      << escape(spec.value_label) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::filesystem::path> render_trace_plots(std::span<const LabeledTrace> traces,
                                                      const std::filesystem::path& out_dir,
                                                      std::string_view comment) {
  static constexpr std::array<std::string_view, 7> kNeeded{"k",   "x_r", "y_r", "theta_r",
                                                           "x_c", "y_c", "nu"};
  if (traces.empty()) throw CsvError("plot: no traces given");
  for (const auto& t : traces) {
    t.table.require_columns(kNeeded);
    if (t.table.rows() == 0) throw CsvError("plot: trace '" + t.label + "' is empty");
  }

  std::vector<Series> tracks;
  std::vector<Series> lateral;
  std::vector<Series> nus;
  {
    const auto& ref = traces.front().table;
    const auto xr = ref.column("x_r");
    const auto yr = ref.column("y_r");
    tracks.push_back({"reference", {xr.begin(), xr.end()}, {yr.begin(), yr.end()}});
  }
  for (const auto& t : traces) {
    const auto k = t.table.column("k");
    const auto xr = t.table.column("x_r");
    const auto yr = t.table.column("y_r");
    const auto thr = t.table.column("theta_r");
    const auto xc = t.table.column("x_c");
    const auto yc = t.table.column("y_c");
    const auto nu = t.table.column("nu");
    tracks.push_back({t.label, {xc.begin(), xc.end()}, {yc.begin(), yc.end()}});
    Series lat{t.label, {k.begin(), k.end()}, {}};
    lat.y.reserve(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
      lat.y.push_back(-std::sin(thr[i]) * (xr[i] - xc[i]) + std::cos(thr[i]) * (yr[i] - yc[i]));
    }
    lateral.push_back(std::move(lat));
    nus.push_back({t.label, {k.begin(), k.end()}, {nu.begin(), nu.end()}});
  }

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](std::string_view name, const std::string& svg) {
    const auto path = out_dir / name;
    std::ofstream out(path);
    if (!out) throw CsvError("plot: cannot write '" + path.string() + "'");
    out << svg;
    written.push_back(path);
  };
  write(kTrackPlot, render_line_plot({"AGV tracks", "x (m)", "y (m)", true, std::string(comment)},
                                     tracks));
  write(kLateralPlot,
        render_line_plot({"Lateral error", "time step k", "lateral error (m)", false,
                          std::string(comment)},
                         lateral));
  write(kNuPlot, render_line_plot({"Translational velocity", "time step k", "nu (m/s)", false,
                                   std::string(comment)},
                                  nus));
  return written;
}

}  // namespace cloudagv::plot
