#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "histopheno/common.hpp"

namespace histopheno {

// Clinical covariates; well-differentiated is merged into MD at load time.
enum class Differentiation : int { MD = 0, PD = 1 };
enum class HistologicalType : int { Adenocarcinoma = 0, Mucinous = 1 };
enum class TStage : int { pT3 = 0, pT4 = 1 };

// Per-patient analysis table: slide features, clinical covariates, 5-year
// metastasis status, and DMFS follow-up. Missing numeric features are NaN;
// missing categorical/outcome entries are nullopt.
struct CohortTable {
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> features;  // [row][feature]
  std::vector<std::optional<Differentiation>> differentiation;
  std::vector<std::optional<HistologicalType>> histological_type;
  std::vector<std::optional<TStage>> t_stage;
  std::vector<std::optional<int>> metastasis_5yr;
  std::vector<std::optional<double>> dmfs_years;
  std::vector<std::optional<int>> event;

  std::size_t size() const { return ids.size(); }
};

// Single pre-joined cohort CSV: column `slide_id`, the recognized clinical
// columns (differentiation, histological_type, t_stage, metastasis_5yr,
// dmfs_years, event -- each optional), and any number of numeric feature
// columns. Empty fields are missing values.
CohortTable load_cohort(const std::filesystem::path& path);

// Feature table + clinical table joined on slide_id (inner join; clinical
// rows without features are an error).
CohortTable load_cohort_joined(const std::filesystem::path& features_path,
                               const std::filesystem::path& clinical_path);

std::string cohort_csv(const CohortTable& table);

}  // namespace histopheno
