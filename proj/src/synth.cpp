#include "histopheno/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "histopheno/rng.hpp"

namespace histopheno::synth {

namespace {

void validate_slide_spec(const SlideSpec& spec) {
  if (spec.slide_id.empty()) throw ValidationError("generate_slide: empty slide_id");
  if (spec.width <= 0.0 || spec.height <= 0.0) {
    throw ValidationError("generate_slide: extent must be positive");
  }
  if (spec.tile_size <= 0.0) throw ValidationError("generate_slide: tile_size must be positive");
  for (const RegionSpec& r : spec.regions) {
    if (r.x0 < 0.0 || r.y0 < 0.0 || r.x1 > spec.width || r.y1 > spec.height ||
        r.x0 >= r.x1 || r.y0 >= r.y1) {
      throw ValidationError("generate_slide: region outside extent or empty");
    }
    for (const double lambda : r.intensity) {
      if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw ValidationError("generate_slide: negative cell intensity");
      }
    }
  }
}

}  // namespace

GeneratedSlide generate_slide(const SlideSpec& spec) {
  validate_slide_spec(spec);
  Rng rng(spec.seed);

  GeneratedSlide slide;
  slide.cells.slide_id = spec.slide_id;
  slide.cells.width = spec.width;
  slide.cells.height = spec.height;
  for (const RegionSpec& region : spec.regions) {
    const double area_mm2 = (region.x1 - region.x0) * (region.y1 - region.y0) / 1e6;
    for (int cls = 0; cls < 4; ++cls) {
      const long count = rng.poisson(region.intensity[static_cast<std::size_t>(cls)] * area_mm2);
      for (long c = 0; c < count; ++c) {
        CellRecord cell;
        cell.x = rng.uniform(region.x0, region.x1);
        cell.y = rng.uniform(region.y0, region.y1);
        cell.cls = static_cast<CellClass>(cls);
        slide.cells.cells.push_back(cell);
      }
    }
  }

  slide.labels.slide_id = spec.slide_id;
  slide.labels.tile_size = spec.tile_size;
  const auto rows = static_cast<std::int64_t>(std::ceil(spec.height / spec.tile_size));
  const auto cols = static_cast<std::int64_t>(std::ceil(spec.width / spec.tile_size));
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      const double tx0 = static_cast<double>(c) * spec.tile_size;
      const double ty0 = static_cast<double>(r) * spec.tile_size;
      const double tx1 = std::min(spec.width, tx0 + spec.tile_size);
      const double ty1 = std::min(spec.height, ty0 + spec.tile_size);
      TissueCategory label = TissueCategory::Background;
      double best_overlap = 0.0;
      for (const RegionSpec& region : spec.regions) {
        const double ox = std::max(0.0, std::min(region.x1, tx1) - std::max(region.x0, tx0));
        const double oy = std::max(0.0, std::min(region.y1, ty1) - std::max(region.y0, ty0));
        const double overlap = ox * oy;
        if (overlap > best_overlap) {  // ties keep the earlier region
          best_overlap = overlap;
          label = region.category;
        }
      }
      slide.labels.labels[{r, c}] = label;
    }
  }
  return slide;
}

CohortTable generate_cohort(const CohortSpec& spec) {
  if (spec.n < 2) throw ValidationError("generate_cohort: need at least 2 patients");
  if (spec.censoring_rate < 0.0 || spec.censoring_rate >= 1.0) {
    throw ValidationError("generate_cohort: censoring rate must lie in [0, 1)");
  }
  if (spec.features.empty()) throw ValidationError("generate_cohort: no feature generators");
  if (spec.logistic_coef.size() != spec.features.size() ||
      spec.cox_coef.size() != spec.features.size()) {
    throw ValidationError("generate_cohort: coefficient vectors must match features");
  }
  if (spec.baseline_hazard <= 0.0) {
    throw ValidationError("generate_cohort: baseline hazard must be positive");
  }
  for (const FeatureGenSpec& f : spec.features) {
    if (f.kind == FeatureGenSpec::Kind::Bernoulli && (f.mean < 0.0 || f.mean > 1.0)) {
      throw ValidationError("generate_cohort: Bernoulli probability outside [0, 1]");
    }
  }

  Rng rng(spec.seed);
  const std::size_t n = static_cast<std::size_t>(spec.n);
  const std::size_t p = spec.features.size();

  CohortTable table;
  for (const FeatureGenSpec& f : spec.features) table.feature_names.push_back(f.name);

  std::vector<double> latent_times(n);
  std::vector<double> censor_u(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream id;
    id << "P" << std::setw(4) << std::setfill('0') << (i + 1);
    table.ids.push_back(id.str());

    std::vector<double> x(p);
    for (std::size_t j = 0; j < p; ++j) {
      const FeatureGenSpec& f = spec.features[j];
      x[j] = f.kind == FeatureGenSpec::Kind::Normal
                 ? rng.normal(f.mean, f.sd)
                 : (rng.next_double() < f.mean ? 1.0 : 0.0);
    }

    if (spec.with_clinical) {
      const bool pd = rng.next_double() < 0.25;
      const bool mucinous = rng.next_double() < 0.12;
      const bool pt4 = rng.next_double() < 0.2;
      const bool diff_missing = rng.next_double() < spec.clinical_missing_rate;
      const bool hist_missing = rng.next_double() < spec.clinical_missing_rate;
      table.differentiation.push_back(
          diff_missing ? std::optional<Differentiation>{}
                       : std::optional<Differentiation>{pd ? Differentiation::PD
                                                           : Differentiation::MD});
      table.histological_type.push_back(
          hist_missing ? std::optional<HistologicalType>{}
                       : std::optional<HistologicalType>{mucinous
                                                             ? HistologicalType::Mucinous
                                                             : HistologicalType::Adenocarcinoma});
      table.t_stage.push_back(pt4 ? TStage::pT4 : TStage::pT3);
    } else {
      table.differentiation.emplace_back();
      table.histological_type.emplace_back();
      table.t_stage.emplace_back();
    }

    double logit = spec.logistic_intercept;
    double log_hazard = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      logit += spec.logistic_coef[j] * x[j];
      log_hazard += spec.cox_coef[j] * x[j];
    }
    const double prob = 1.0 / (1.0 + std::exp(-logit));
    table.metastasis_5yr.push_back(rng.next_double() < prob ? 1 : 0);

    const double rate = spec.baseline_hazard * std::exp(log_hazard);
    latent_times[i] = rng.exponential(rate);
    censor_u[i] = rng.next_double();
    table.features.push_back(std::move(x));
  }

  if (spec.censoring_rate == 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      table.dmfs_years.push_back(latent_times[i]);
      table.event.push_back(1);
    }
    return table;
  }

  // Uniform(0, tau) censoring; calibrate tau so the expected censored
  // fraction matches the target: E[censored] = mean(min(T_i, tau) / tau).
  const auto expected_censored = [&](double tau) {
    double sum = 0.0;
    for (const double t : latent_times) sum += std::min(t, tau) / tau;
    return sum / static_cast<double>(n);
  };
  double lo = 1e-9;
  double hi = 1.0;
  while (expected_censored(hi) > spec.censoring_rate && hi < 1e12) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_censored(mid) > spec.censoring_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double tau = 0.5 * (lo + hi);
  for (std::size_t i = 0; i < n; ++i) {
    const double censor_time = censor_u[i] * tau;
    if (latent_times[i] <= censor_time) {
      table.dmfs_years.push_back(latent_times[i]);
      table.event.push_back(1);
    } else {
      table.dmfs_years.push_back(censor_time);
      table.event.push_back(0);
    }
  }
  return table;
}

}  // namespace histopheno::synth
