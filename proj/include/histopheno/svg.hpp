#pragma once

#include <string>
#include <utility>
#include <vector>

#include "histopheno/stats.hpp"

namespace histopheno {

// Renders labeled Kaplan-Meier step curves (with censor ticks) into a
// standalone SVG document. `annotation` is printed under the title,
// typically the log-rank p-value.
std::string km_curves_svg(const std::vector<std::pair<std::string, stats::KMCurve>>& curves,
                          const std::string& title, const std::string& annotation);

// Kaplan-Meier CSV export: t,S,ci_low,ci_high,at_risk.
std::string km_curve_csv(const stats::KMCurve& curve);

}  // namespace histopheno
