#include "histopheno/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "histopheno/csv.hpp"

namespace histopheno {

std::string km_curve_csv(const stats::KMCurve& curve) {
  std::ostringstream out;
  out << "t,S,ci_low,ci_high,at_risk\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out << format_double(curve.times[i]) << ',' << format_double(curve.survival[i]) << ','
        << format_double(curve.ci_low[i]) << ',' << format_double(curve.ci_high[i]) << ','
        << curve.at_risk[i] << '\n';
  }
  return out.str();
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 24.0;
constexpr double kTop = 56.0;
constexpr double kBottom = 56.0;

const char* kPalette[6] = {"#1f6fb4", "#d1452c", "#2f8f4e", "#8355a5", "#b08500", "#3d3d3d"};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

std::string km_curves_svg(const std::vector<std::pair<std::string, stats::KMCurve>>& curves,
                          const std::string& title, const std::string& annotation) {
  double t_max = 1.0;
  for (const auto& [label, curve] : curves) {
    if (!curve.times.empty()) t_max = std::max(t_max, curve.times.back());
    if (!curve.censor_times.empty()) t_max = std::max(t_max, curve.censor_times.back());
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto sx = [&](double t) { return kLeft + t / t_max * plot_w; };
  const auto sy = [&](double s) { return kTop + (1.0 - s) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
         "font-weight=\"bold\">"
      << title << "</text>\n";
  if (!annotation.empty()) {
    svg << "<text x=\"" << kLeft
        << "\" y=\"42\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#444\">" << annotation
        << "</text>\n";
  }

  // Axes and ticks.
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << sy(0) << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << sy(0) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << sy(0) << "\" x2=\"" << kLeft << "\" y2=\""
      << sy(1) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double s = i * 0.25;
    svg << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << sy(s) << "\" x2=\"" << kLeft
        << "\" y2=\"" << sy(s) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy(s) + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(s)
        << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double t = t_max * i / 5.0;
    svg << "<line x1=\"" << sx(t) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(t) << "\" y2=\""
        << sy(0) + 4 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << sx(t) << "\" y=\"" << sy(0) + 18
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
        << fmt(std::round(t * 100.0) / 100.0) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">time"
         "</text>\n";
  svg << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">survival</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& curve = curves[c].second;
    const char* color = kPalette[c % 6];
    std::ostringstream path;
    path << "M " << fmt(sx(0)) << " " << fmt(sy(1));
    double s_prev = 1.0;
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
      path << " H " << fmt(sx(curve.times[i]));
      path << " V " << fmt(sy(curve.survival[i]));
      s_prev = curve.survival[i];
    }
    double t_end = curve.times.empty() ? 0.0 : curve.times.back();
    if (!curve.censor_times.empty()) t_end = std::max(t_end, curve.censor_times.back());
    path << " H " << fmt(sx(t_end));
    svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\"/>\n";

    // Censor ticks at the survival level in force at each censoring time.
    for (const double ct : curve.censor_times) {
      double s = 1.0;
      for (std::size_t i = 0; i < curve.times.size() && curve.times[i] <= ct; ++i) {
        s = curve.survival[i];
      }
      svg << "<line x1=\"" << fmt(sx(ct)) << "\" y1=\"" << fmt(sy(s) - 5) << "\" x2=\""
          << fmt(sx(ct)) << "\" y2=\"" << fmt(sy(s) + 5) << "\" stroke=\"" << color
          << "\" stroke-width=\"1.2\"/>\n";
    }
    svg << "<rect x=\"" << kLeft + plot_w - 150 << "\" y=\"" << kTop + 16 * c << "\" "
        << "width=\"12\" height=\"4\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w - 132 << "\" y=\"" << kTop + 16 * c + 6
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << curves[c].first << " (n="
        << curve.n << ")</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace histopheno
