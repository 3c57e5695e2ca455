#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "histopheno/cellmap.hpp"
#include "histopheno/cohort.hpp"
#include "histopheno/common.hpp"

namespace histopheno::synth {

// Rectangular region [x0,x1) x [y0,y1) in micrometres with a tissue category
// and homogeneous Poisson cell intensities per class (cells per mm^2,
// ordered M, I, S, N).
struct RegionSpec {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  TissueCategory category = TissueCategory::Tumor;
  std::array<double, 4> intensity{};
};

struct SlideSpec {
  std::string slide_id;
  double width = 0.0;   // micrometres
  double height = 0.0;
  std::vector<RegionSpec> regions;
  double tile_size = 200.0;
  std::uint64_t seed = 0;
};

struct GeneratedSlide {
  CellMap cells;
  TissueLabelGrid labels;
};

// Poisson-samples each class within each region; tile labels take the
// category of the region covering the majority of the tile (background when
// uncovered). Deterministic given seed.
GeneratedSlide generate_slide(const SlideSpec& spec);

struct FeatureGenSpec {
  enum class Kind { Normal, Bernoulli };
  std::string name;
  Kind kind = Kind::Normal;
  double mean = 0.0;  // Normal: mean/sd; Bernoulli: probability in `mean`
  double sd = 1.0;
};

struct CohortSpec {
  int n = 0;
  std::vector<FeatureGenSpec> features;
  double logistic_intercept = 0.0;
  std::vector<double> logistic_coef;  // per feature
  std::vector<double> cox_coef;       // per feature, log hazard-ratio scale
  double baseline_hazard = 0.2;       // exponential baseline, events per year
  double censoring_rate = 0.0;        // target fraction censored, in [0, 1)
  bool with_clinical = false;
  double clinical_missing_rate = 0.0;
  std::uint64_t seed = 0;
};

// Binary 5-year metastasis from the logistic model; DMFS times from an
// exponential proportional-hazards model with independent uniform censoring
// calibrated to the target rate. Deterministic given seed.
CohortTable generate_cohort(const CohortSpec& spec);

// Standard test fixture: six vertical strips with distinct cell-class mixes
// (and tissue categories), so the tile population carries six well-separated
// connection-frequency phenotypes. Strip widths vary with the seed to give
// slides different compositions.
SlideSpec six_region_slide_spec(const std::string& slide_id, std::uint64_t seed);

// Clinical covariates and outcomes only (no feature columns); pairs with
// slide ids so the table joins against computed slide features.
CohortTable generate_clinical(const std::vector<std::string>& ids, std::uint64_t seed);

}  // namespace histopheno::synth
