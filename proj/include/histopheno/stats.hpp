#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "histopheno/common.hpp"

namespace histopheno::stats {

// --- distributions -------------------------------------------------------

double normal_cdf(double z);
// Upper tail P(chi2_df > x).
double chisq_sf(double x, int df);

// Order-statistic position (n-1)*q (0-based) with linear interpolation.
double quantile(std::vector<double> values, double q);
double interquartile_delta(const std::vector<double>& values);

// --- rank tests ----------------------------------------------------------

struct MannWhitneyResult {
  double u = 0.0;       // U statistic of the first sample, ties count 1/2
  double p = 1.0;       // two-sided
  double r2 = 0.0;      // squared rank-biserial-style effect size (Z/sqrt(n))^2
  bool exact = false;   // exact enumeration used (n1+n2 <= 10)
};

MannWhitneyResult mann_whitney(const std::vector<double>& xs, const std::vector<double>& ys);

// Tie-aware Spearman correlation (Pearson on mid-ranks). Throws on constant
// input.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

// Mann-Whitney formulation: P(score+ > score-) + P(equal)/2.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// --- regression ----------------------------------------------------------

// Multiplicative effect of a `delta` change in one covariate (odds ratio or
// hazard ratio factor) with a Wald 95% interval.
struct EffectEstimate {
  double beta = 0.0;
  double se = 0.0;
  double delta = 1.0;
  double factor = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
};

struct LogisticFit {
  Eigen::VectorXd beta;        // intercept first, then one entry per covariate
  Eigen::MatrixXd covariance;
  double loglik = 0.0;
  int iterations = 0;
  std::vector<double> lr_p;    // likelihood-ratio p per covariate (drop-one)
  std::vector<EffectEstimate> effects;
  std::vector<double> fitted;  // in-sample probabilities
  double auc = 0.5;            // in-sample
};

// Newton-Raphson MLE; converges when max|gradient| < 1e-8 (100 iteration
// cap, step halving). Throws NumericError on separation (|beta| > 15) or a
// collinear design.
LogisticFit logistic_fit(const Eigen::MatrixXd& X, const std::vector<int>& y,
                         const std::vector<double>& feature_deltas);

// Log-likelihood and gradient at an arbitrary beta (intercept first), for
// verification independent of the optimizer.
double logistic_loglik(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       const Eigen::VectorXd& beta);
Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                  const Eigen::VectorXd& beta);

struct CoxFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;
  double loglik = 0.0;
  int iterations = 0;
  int n_events = 0;
  double score_stat = 0.0;     // Rao score test at beta = 0, df = #covariates
  double score_p = 1.0;
  std::vector<double> wald_p;  // per covariate
  std::vector<EffectEstimate> effects;
};

// Cox proportional hazards via Breslow partial likelihood, Newton-Raphson
// with step halving (tolerance 1e-8, 100 iterations). Throws NumericError on
// monotone likelihood (|beta| > 15) or zero events.
CoxFit cox_fit(const Eigen::MatrixXd& X, const std::vector<double>& times,
               const std::vector<int>& events, const std::vector<double>& feature_deltas);

double cox_loglik(const Eigen::MatrixXd& X, const std::vector<double>& times,
                  const std::vector<int>& events, const Eigen::VectorXd& beta);
Eigen::VectorXd cox_gradient(const Eigen::MatrixXd& X, const std::vector<double>& times,
                             const std::vector<int>& events, const Eigen::VectorXd& beta);

// --- survival curves -----------------------------------------------------

struct KMCurve {
  std::vector<double> times;     // distinct event times, ascending
  std::vector<double> survival;  // S(t) just after each event time
  std::vector<int> at_risk;
  std::vector<int> events;
  std::vector<double> ci_low;    // Greenwood 95% interval on the log scale
  std::vector<double> ci_high;
  std::vector<double> censor_times;
  int n = 0;
};

KMCurve kaplan_meier(const std::vector<double>& times, const std::vector<int>& events);

struct LogrankResult {
  double chi2 = 0.0;
  double p = 1.0;
  int df = 1;
};

// Observed-vs-expected test with the hypergeometric covariance, df = g-1.
LogrankResult logrank(const std::vector<int>& groups, const std::vector<double>& times,
                      const std::vector<int>& events);

// --- cutoff selection ----------------------------------------------------

struct AltmanResult {
  double p_adj = 1.0;
  bool in_domain = true;  // the approximation is valid for p_min < 0.1
};

// Corrects the minimum p-value of an optimized continuous cutoff:
// p_adj = -1.63 p (1 + 2.35 ln p), clamped into [p, 1]. Out-of-domain inputs
// (p >= 0.1) are returned with the flag cleared rather than rejected.
AltmanResult altman_adjust(double p_min);

struct CutoffResult {
  double cutoff = 0.0;
  double p_min = 1.0;
  AltmanResult adjusted;
  KMCurve low;
  KMCurve high;
  int n_low = 0;
  int n_high = 0;
};

// Scans midpoints between consecutive distinct feature values that leave at
// least 10% of cases on each side, picks the cutoff minimizing the two-group
// log-rank p (ties to the cutoff nearest the median), and applies the Altman
// correction.
CutoffResult optimal_cutoff_stratify(const std::vector<double>& values,
                                     const std::vector<double>& times,
                                     const std::vector<int>& events);

// --- bootstrap validation ------------------------------------------------

struct BootstrapAucResult {
  double apparent = 0.5;
  double corrected = 0.5;
  int replicates_used = 0;
  int replicates_failed = 0;
};

// fit(sample_rows) trains on the given rows (with repeats) and returns a
// scorer over original row indices.
using BootstrapFit =
    std::function<std::function<double(int)>(const std::vector<int>& sample_rows)>;

// Harrell optimism correction: corrected = apparent - mean_b(AUC on the
// bootstrap sample - AUC of the bootstrap model on the original data).
// Failed replicate fits are skipped and counted; more than 50% failures is
// an estimation error. Deterministic given seed; replicates use derived,
// order-independent streams.
BootstrapAucResult bootstrap_auc(int n, const std::vector<int>& labels, const BootstrapFit& fit,
                                 int B, std::uint64_t seed);

}  // namespace histopheno::stats
