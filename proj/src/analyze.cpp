#include "histopheno/analyze.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include <json.hpp>

#include "histopheno/rng.hpp"

namespace histopheno {

namespace {

using nlohmann::json;

// An analysis covariate: a numeric slide feature or a 0/1 clinical encoding.
struct Covariate {
  std::string name;
  std::vector<double> values;  // NaN = missing
  bool categorical = false;
};

std::vector<Covariate> build_covariates(const CohortTable& cohort) {
  std::vector<Covariate> cov;
  for (std::size_t f = 0; f < cohort.feature_names.size(); ++f) {
    Covariate c;
    c.name = cohort.feature_names[f];
    c.values.reserve(cohort.size());
    for (std::size_t r = 0; r < cohort.size(); ++r) c.values.push_back(cohort.features[r][f]);
    cov.push_back(std::move(c));
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto add_clinical = [&](const std::string& name, auto&& get) {
    Covariate c;
    c.name = name;
    c.categorical = true;
    bool any = false;
    for (std::size_t r = 0; r < cohort.size(); ++r) {
      const auto v = get(r);
      if (v) any = true;
      c.values.push_back(v ? *v : nan);
    }
    if (any) cov.push_back(std::move(c));
  };
  add_clinical("clin_differentiation_pd", [&](std::size_t r) -> std::optional<double> {
    if (!cohort.differentiation[r]) return std::nullopt;
    return *cohort.differentiation[r] == Differentiation::PD ? 1.0 : 0.0;
  });
  add_clinical("clin_histology_mucinous", [&](std::size_t r) -> std::optional<double> {
    if (!cohort.histological_type[r]) return std::nullopt;
    return *cohort.histological_type[r] == HistologicalType::Mucinous ? 1.0 : 0.0;
  });
  add_clinical("clin_t_stage_pt4", [&](std::size_t r) -> std::optional<double> {
    if (!cohort.t_stage[r]) return std::nullopt;
    return *cohort.t_stage[r] == TStage::pT4 ? 1.0 : 0.0;
  });
  return cov;
}

std::string safe_file_name(const std::string& name) {
  std::string out;
  for (const char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else {
      out.push_back('_');
    }
  }
  return out;
}

bool is_clinical(const Covariate& c) { return c.name.rfind("clin_", 0) == 0; }

double covariate_delta(const Covariate& c, const std::vector<double>& used_values) {
  if (c.categorical) return 1.0;
  return stats::interquartile_delta(used_values);
}

json effect_json(const stats::EffectEstimate& e) {
  json j;
  j["beta"] = e.beta;
  j["se"] = e.se;
  j["delta"] = e.delta;
  j["factor"] = e.factor;
  j["ci_low"] = e.ci_low;
  j["ci_high"] = e.ci_high;
  return j;
}

}  // namespace

AnalysisResult analyze_cohort(const CohortTable& cohort, const AnalyzeOptions& options) {
  if (cohort.size() == 0) throw ValidationError("analyze_cohort: empty cohort");
  const std::vector<Covariate> covariates = build_covariates(cohort);
  if (covariates.empty()) throw ValidationError("analyze_cohort: no covariates to analyze");

  const std::size_t n = cohort.size();
  json report;
  report["library_version"] = std::string(kVersion);
  report["n_patients"] = n;
  report["complete_case"] = true;  // missing rows are dropped per analysis
  report["bootstrap_replicates"] = options.bootstrap_replicates;
  report["seed"] = options.seed;
  {
    json names = json::array();
    for (const Covariate& c : covariates) names.push_back(c.name);
    report["features"] = names;
  }

  const std::vector<const Covariate*> clinical = [&] {
    std::vector<const Covariate*> out;
    for (const Covariate& c : covariates) {
      if (is_clinical(c)) out.push_back(&c);
    }
    return out;
  }();

  // --- association with the 5-year metastasis status ----------------------
  json association = json::array();
  for (const Covariate& c : covariates) {
    json entry;
    entry["feature"] = c.name;
    std::vector<double> with, without;
    std::size_t dropped = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (!cohort.metastasis_5yr[r] || std::isnan(c.values[r])) {
        ++dropped;
        continue;
      }
      (*cohort.metastasis_5yr[r] == 1 ? with : without).push_back(c.values[r]);
    }
    entry["n_used"] = with.size() + without.size();
    entry["n_dropped"] = dropped;
    try {
      const auto mw = stats::mann_whitney(with, without);
      entry["p"] = mw.p;
      entry["r2"] = mw.r2;
      entry["exact"] = mw.exact;
    } catch (const Error& e) {
      entry["error"] = e.what();
    }
    association.push_back(entry);
  }
  report["association"] = association;

  // --- logistic regression -------------------------------------------------
  const auto logistic_rows = [&](const std::vector<const Covariate*>& cols) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < n; ++r) {
      if (!cohort.metastasis_5yr[r]) continue;
      bool ok = true;
      for (const Covariate* c : cols) {
        if (std::isnan(c->values[r])) {
          ok = false;
          break;
        }
      }
      if (ok) rows.push_back(r);
    }
    return rows;
  };

  const auto fit_logistic = [&](const std::vector<const Covariate*>& cols,
                                const std::vector<std::size_t>& rows)
      -> std::pair<stats::LogisticFit, std::vector<double>> {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
    std::vector<int> y;
    y.reserve(rows.size());
    std::vector<double> deltas;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      std::vector<double> used;
      used.reserve(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            cols[j]->values[rows[i]];
        used.push_back(cols[j]->values[rows[i]]);
      }
      deltas.push_back(covariate_delta(*cols[j], used));
    }
    for (const std::size_t r : rows) y.push_back(*cohort.metastasis_5yr[r]);
    return {stats::logistic_fit(X, y, deltas), deltas};
  };

  json logistic_uni = json::array();
  json logistic_multi = json::array();
  for (const Covariate& c : covariates) {
    {
      json entry;
      entry["feature"] = c.name;
      const auto rows = logistic_rows({&c});
      entry["n_used"] = rows.size();
      entry["n_dropped"] = n - rows.size();
      try {
        const auto [fit, deltas] = fit_logistic({&c}, rows);
        entry["odds_ratio"] = effect_json(fit.effects[0]);
        entry["lr_p"] = fit.lr_p[0];
        entry["auc"] = fit.auc;
      } catch (const Error& e) {
        entry["error"] = e.what();
      }
      logistic_uni.push_back(entry);
    }
    if (!clinical.empty() && !is_clinical(c)) {
      json entry;
      entry["feature"] = c.name;
      std::vector<const Covariate*> cols{&c};
      json adjusted = json::array();
      for (const Covariate* cl : clinical) {
        cols.push_back(cl);
        adjusted.push_back(cl->name);
      }
      entry["adjusted_for"] = adjusted;
      const auto rows = logistic_rows(cols);
      entry["n_used"] = rows.size();
      entry["n_dropped"] = n - rows.size();
      try {
        const auto [fit, deltas] = fit_logistic(cols, rows);
        entry["odds_ratio"] = effect_json(fit.effects[0]);
        entry["lr_p"] = fit.lr_p[0];
        entry["model_auc"] = fit.auc;
      } catch (const Error& e) {
        entry["error"] = e.what();
      }
      logistic_multi.push_back(entry);
    }
  }
  report["logistic_univariate"] = logistic_uni;
  report["logistic_multivariate"] = logistic_multi;

  // --- Cox proportional hazards -------------------------------------------
  const auto survival_rows = [&](const std::vector<const Covariate*>& cols) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < n; ++r) {
      if (!cohort.dmfs_years[r] || !cohort.event[r]) continue;
      bool ok = true;
      for (const Covariate* c : cols) {
        if (std::isnan(c->values[r])) {
          ok = false;
          break;
        }
      }
      if (ok) rows.push_back(r);
    }
    return rows;
  };

  const auto fit_cox = [&](const std::vector<const Covariate*>& cols,
                           const std::vector<std::size_t>& rows, json& entry) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
    std::vector<double> times;
    std::vector<int> events;
    std::vector<double> deltas;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      std::vector<double> used;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            cols[j]->values[rows[i]];
        used.push_back(cols[j]->values[rows[i]]);
      }
      deltas.push_back(covariate_delta(*cols[j], used));
    }
    for (const std::size_t r : rows) {
      times.push_back(*cohort.dmfs_years[r]);
      events.push_back(*cohort.event[r]);
    }
    const stats::CoxFit fit = stats::cox_fit(X, times, events, deltas);
    entry["hazard_ratio"] = effect_json(fit.effects[0]);
    entry["n_events"] = fit.n_events;

    // Bootstrap-corrected AUC of the linear predictor against the event
    // indicator.
    const auto boot_fit = [&](const std::vector<int>& sample) {
      Eigen::MatrixXd Xs(static_cast<Eigen::Index>(sample.size()), X.cols());
      std::vector<double> ts(sample.size());
      std::vector<int> es(sample.size());
      for (std::size_t i = 0; i < sample.size(); ++i) {
        Xs.row(static_cast<Eigen::Index>(i)) = X.row(sample[i]);
        ts[i] = times[static_cast<std::size_t>(sample[i])];
        es[i] = events[static_cast<std::size_t>(sample[i])];
      }
      const stats::CoxFit sub = stats::cox_fit(Xs, ts, es, deltas);
      const Eigen::VectorXd beta = sub.beta;
      return [beta, &X](int row) { return X.row(row).dot(beta); };
    };
    const auto boot = stats::bootstrap_auc(static_cast<int>(rows.size()), events, boot_fit,
                                           options.bootstrap_replicates,
                                           Rng::derived(options.seed, 0xb007).next_u64());
    entry["auc_apparent"] = boot.apparent;
    entry["auc_corrected"] = boot.corrected;
    entry["bootstrap_failed"] = boot.replicates_failed;
    return fit;
  };

  json cox_uni = json::array();
  json cox_multi = json::array();
  for (const Covariate& c : covariates) {
    {
      json entry;
      entry["feature"] = c.name;
      const auto rows = survival_rows({&c});
      entry["n_used"] = rows.size();
      entry["n_dropped"] = n - rows.size();
      try {
        const stats::CoxFit fit = fit_cox({&c}, rows, entry);
        entry["score_p"] = fit.score_p;
        entry["score_stat"] = fit.score_stat;
      } catch (const Error& e) {
        entry["error"] = e.what();
      }
      cox_uni.push_back(entry);
    }
    if (!clinical.empty() && !is_clinical(c)) {
      json entry;
      entry["feature"] = c.name;
      std::vector<const Covariate*> cols{&c};
      json adjusted = json::array();
      for (const Covariate* cl : clinical) {
        cols.push_back(cl);
        adjusted.push_back(cl->name);
      }
      entry["adjusted_for"] = adjusted;
      const auto rows = survival_rows(cols);
      entry["n_used"] = rows.size();
      entry["n_dropped"] = n - rows.size();
      try {
        const stats::CoxFit fit = fit_cox(cols, rows, entry);
        entry["wald_p"] = fit.wald_p[0];
      } catch (const Error& e) {
        entry["error"] = e.what();
      }
      cox_multi.push_back(entry);
    }
  }
  report["cox_univariate"] = cox_uni;
  report["cox_multivariate"] = cox_multi;

  // --- Kaplan-Meier stratification ------------------------------------------
  AnalysisResult result;
  json km_section = json::array();
  for (const Covariate& c : covariates) {
    json entry;
    entry["feature"] = c.name;
    const auto rows = survival_rows({&c});
    entry["n_used"] = rows.size();
    std::vector<double> values, times;
    std::vector<int> events;
    for (const std::size_t r : rows) {
      values.push_back(c.values[r]);
      times.push_back(*cohort.dmfs_years[r]);
      events.push_back(*cohort.event[r]);
    }
    KMExport km;
    km.feature = c.name;
    km.safe_name = safe_file_name(c.name);
    try {
      if (c.categorical) {
        km.categorical = true;
        std::vector<int> groups;
        for (const double v : values) groups.push_back(v != 0.0 ? 1 : 0);
        km.categorical_test = stats::logrank(groups, times, events);
        std::vector<double> t0, t1;
        std::vector<int> e0, e1;
        for (std::size_t i = 0; i < groups.size(); ++i) {
          (groups[i] == 0 ? t0 : t1).push_back(times[i]);
          (groups[i] == 0 ? e0 : e1).push_back(events[i]);
        }
        km.curves.emplace_back(c.name + "=0", stats::kaplan_meier(t0, e0));
        km.curves.emplace_back(c.name + "=1", stats::kaplan_meier(t1, e1));
        entry["kind"] = "categorical";
        entry["p"] = km.categorical_test.p;
        entry["chi2"] = km.categorical_test.chi2;
      } else {
        const stats::CutoffResult cut = stats::optimal_cutoff_stratify(values, times, events);
        km.cutoff = cut.cutoff;
        km.p_min = cut.p_min;
        km.adjusted = cut.adjusted;
        km.curves.emplace_back("low", cut.low);
        km.curves.emplace_back("high", cut.high);
        entry["kind"] = "cutoff";
        entry["cutoff"] = cut.cutoff;
        entry["p_min"] = cut.p_min;
        entry["p_adj"] = cut.adjusted.p_adj;
        entry["altman_in_domain"] = cut.adjusted.in_domain;
        entry["n_low"] = cut.n_low;
        entry["n_high"] = cut.n_high;
      }
      result.km.push_back(std::move(km));
    } catch (const Error& e) {
      entry["error"] = e.what();
    }
    km_section.push_back(entry);
  }
  report["km_stratification"] = km_section;

  result.report_json = report.dump(2) + "\n";
  return result;
}

}  // namespace histopheno
