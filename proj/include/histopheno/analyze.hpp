#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histopheno/cohort.hpp"
#include "histopheno/stats.hpp"

namespace histopheno {

struct AnalyzeOptions {
  int bootstrap_replicates = 100;
  std::uint64_t seed = 0;
};

// One stratified survival figure: either an optimal-cutoff split of a
// continuous feature (Altman-corrected) or the levels of a categorical one.
struct KMExport {
  std::string feature;
  std::string safe_name;  // filesystem-safe
  bool categorical = false;
  double cutoff = 0.0;
  double p_min = 1.0;
  stats::AltmanResult adjusted;
  stats::LogrankResult categorical_test;
  std::vector<std::pair<std::string, stats::KMCurve>> curves;
};

struct AnalysisResult {
  std::string report_json;
  std::vector<KMExport> km;
};

// Runs the full battery on a cohort: Mann-Whitney associations with the
// 5-year metastasis status, univariate and clinically adjusted logistic and
// Cox models with interquartile effect factors, bootstrap-corrected Cox AUC,
// and Kaplan-Meier stratification per feature. Complete-case analysis
// throughout; every section records how many rows it used.
AnalysisResult analyze_cohort(const CohortTable& cohort, const AnalyzeOptions& options);

}  // namespace histopheno
