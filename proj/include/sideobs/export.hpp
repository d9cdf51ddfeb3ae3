#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>

#include "sideobs/error.hpp"
#include "sideobs/harness.hpp"

namespace sideobs {

namespace detail {

// Shortest representation that round-trips.
inline void append_number(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error(Errc::NumericalFailure, "cannot format number");
  out.append(buf, end);
}

inline void append_fixed(std::string& out, double v, int digits = 2) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  out.append(buf, static_cast<std::size_t>(n));
}

inline void require_curves(std::span<const AggregateCurve> curves) {
  if (curves.empty()) throw Error(Errc::EmptyInput, "no curves to export");
  for (const auto& c : curves) {
    if (c.points.empty()) throw Error(Errc::EmptyInput, "curve '" + c.policy + "' has no points");
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw Error(Errc::IoError, "write to " + path.string() + " failed");
}

}  // namespace detail

// policy,t,mean,ci_lo,ci_hi with LF line endings.
inline std::string render_csv(std::span<const AggregateCurve> curves) {
  detail::require_curves(curves);
  std::string out = "policy,t,mean,ci_lo,ci_hi\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out += c.policy;
      out += ',';
      out += std::to_string(p.t);
      out += ',';
      detail::append_number(out, p.mean);
      out += ',';
      detail::append_number(out, p.ci_lo);
      out += ',';
      detail::append_number(out, p.ci_hi);
      out += '\n';
    }
  }
  return out;
}

// One cumulative regret trace per line, comma separated, prefixed by the policy and trial.
inline std::string render_traces_csv(std::span<const std::string> policies,
                                     std::span<const std::vector<RegretTrace>> traces) {
  std::string out = "policy,trial,t,regret\n";
  for (std::size_t p = 0; p < traces.size(); ++p) {
    for (std::size_t trial = 0; trial < traces[p].size(); ++trial) {
      const auto& cum = traces[p][trial].cumulative;
      for (std::size_t t = 0; t < cum.size(); ++t) {
        out += policies[p];
        out += ',';
        out += std::to_string(trial);
        out += ',';
        out += std::to_string(t + 1);
        out += ',';
        detail::append_number(out, cum[t]);
        out += '\n';
      }
    }
  }
  return out;
}

inline void write_csv(std::span<const AggregateCurve> curves, const std::filesystem::path& path) {
  detail::write_text(path, render_csv(curves));
}

// Line chart of mean regret with shaded confidence bands. Coordinates use
// fixed precision so identical curves give identical bytes.
inline std::string render_svg(std::span<const AggregateCurve> curves, std::string_view title = "") {
  detail::require_curves(curves);
  constexpr double width = 720, height = 480;
  constexpr double left = 70, right = 170, top = 40, bottom = 50;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  double t_max = 0, y_max = 0;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      t_max = std::max(t_max, static_cast<double>(p.t));
      y_max = std::max({y_max, p.mean, p.ci_hi});
    }
  }
  if (t_max <= 0) t_max = 1;
  if (!(y_max > 0)) y_max = 1;
  const double y_top = y_max * 1.05;
  auto px = [&](double t) { return left + plot_w * t / t_max; };
  auto py = [&](double y) { return top + plot_h * (1.0 - std::max(0.0, y) / y_top); };
  auto point = [&](std::string& out, double t, double y) {
    detail::append_fixed(out, px(t));
    out += ',';
    detail::append_fixed(out, py(y));
    out += ' ';
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" viewBox=\"0 0 720 480\">\n";
  s += "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
  if (!title.empty()) {
    s += "<text x=\"";
    detail::append_fixed(s, left + plot_w / 2);
    s += "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">";
    s += title;
    s += "</text>\n";
  }

  // Axes and ticks.
  s += "<g stroke=\"#333\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<line x1=\"70.00\" y1=\"430.00\" x2=\"550.00\" y2=\"430.00\"/>\n";
  s += "<line x1=\"70.00\" y1=\"40.00\" x2=\"70.00\" y2=\"430.00\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double t = t_max * k / 5.0;
    const double y = y_top * k / 5.0;
    s += "<line x1=\"";
    detail::append_fixed(s, px(t));
    s += "\" y1=\"430.00\" x2=\"";
    detail::append_fixed(s, px(t));
    s += "\" y2=\"435.00\"/><text stroke=\"none\" x=\"";
    detail::append_fixed(s, px(t));
    s += "\" y=\"448\" text-anchor=\"middle\">";
    detail::append_fixed(s, t, 0);
    s += "</text>\n<line x1=\"65.00\" y1=\"";
    detail::append_fixed(s, py(y));
    s += "\" x2=\"70.00\" y2=\"";
    detail::append_fixed(s, py(y));
    s += "\"/><text stroke=\"none\" x=\"62\" y=\"";
    detail::append_fixed(s, py(y) + 4);
    s += "\" text-anchor=\"end\">";
    detail::append_fixed(s, y, 1);
    s += "</text>\n";
  }
  s += "</g>\n";
  s += "<text x=\"310\" y=\"472\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t</text>\n";
  s += "<text x=\"18\" y=\"235\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
       "transform=\"rotate(-90 18 235)\">cumulative regret</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const char* color = palette[i % std::size(palette)];
    s += "<polygon fill=\"";
    s += color;
    s += "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (const auto& p : c.points) point(s, static_cast<double>(p.t), p.ci_hi);
    for (auto it = c.points.rbegin(); it != c.points.rend(); ++it) {
      point(s, static_cast<double>(it->t), it->ci_lo);
    }
    s.back() = '"';
    s += "/>\n<polyline fill=\"none\" stroke-width=\"1.6\" stroke=\"";
    s += color;
    s += "\" points=\"";
    for (const auto& p : c.points) point(s, static_cast<double>(p.t), p.mean);
    s.back() = '"';
    s += "/>\n";

    const double ly = top + 10 + 20.0 * static_cast<double>(i);
    s += "<line x1=\"565.00\" y1=\"";
    detail::append_fixed(s, ly);
    s += "\" x2=\"590.00\" y2=\"";
    detail::append_fixed(s, ly);
    s += "\" stroke-width=\"2\" stroke=\"";
    s += color;
    s += "\"/><text x=\"596\" y=\"";
    detail::append_fixed(s, ly + 4);
    s += "\" font-family=\"sans-serif\" font-size=\"12\">";
    s += c.policy;
    s += "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

inline void write_svg(std::span<const AggregateCurve> curves, const std::filesystem::path& path,
                      std::string_view title = "") {
  detail::write_text(path, render_svg(curves, title));
}

}  // namespace sideobs
