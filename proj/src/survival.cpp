#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "histopheno/stats.hpp"

namespace histopheno::stats {

namespace {

constexpr double kSeparationBound = 15.0;
constexpr double kGradientTol = 1e-8;
constexpr int kMaxNewton = 100;

void validate_survival(const std::vector<double>& times, const std::vector<int>& events) {
  if (times.empty()) throw ValidationError("survival data: empty sample");
  if (times.size() != events.size()) {
    throw ValidationError("survival data: times and events must be aligned");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0) {
      throw ValidationError("survival data: negative or non-finite time");
    }
    if (events[i] != 0 && events[i] != 1) {
      throw ValidationError("survival data: event indicator must be 0/1");
    }
  }
}

struct CoxDerivatives {
  double loglik = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;  // observed information (positive semidefinite)
};

// One pass over risk sets, descending in time, with Breslow handling of ties.
CoxDerivatives cox_derivatives(const Eigen::MatrixXd& X, const std::vector<double>& times,
                               const std::vector<int>& events, const Eigen::VectorXd& beta) {
  const auto n = static_cast<std::size_t>(X.rows());
  const Eigen::Index p = X.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (times[a] != times[b]) return times[a] > times[b];
    return a < b;
  });

  CoxDerivatives d;
  d.grad = Eigen::VectorXd::Zero(p);
  d.hess = Eigen::MatrixXd::Zero(p, p);
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);

  std::size_t i = 0;
  while (i < n) {
    const double t = times[order[i]];
    std::size_t j = i;
    double n_events = 0.0;
    double eta_events = 0.0;
    Eigen::VectorXd x_events = Eigen::VectorXd::Zero(p);
    while (j < n && times[order[j]] == t) {
      const auto row = static_cast<Eigen::Index>(order[j]);
      const double eta = X.row(row).dot(beta);
      const double w = std::exp(eta);
      if (!std::isfinite(w)) {
        throw NumericError("cox_fit: risk weight overflow, coefficients diverging");
      }
      s0 += w;
      s1 += w * X.row(row).transpose();
      s2 += w * (X.row(row).transpose() * X.row(row));
      if (events[order[j]] == 1) {
        n_events += 1.0;
        eta_events += eta;
        x_events += X.row(row).transpose();
      }
      ++j;
    }
    if (n_events > 0.0) {
      const Eigen::VectorXd mu = s1 / s0;
      d.loglik += eta_events - n_events * std::log(s0);
      d.grad += x_events - n_events * mu;
      d.hess += n_events * (s2 / s0 - mu * mu.transpose());
    }
    i = j;
  }
  return d;
}

}  // namespace

double cox_loglik(const Eigen::MatrixXd& X, const std::vector<double>& times,
                  const std::vector<int>& events, const Eigen::VectorXd& beta) {
  return cox_derivatives(X, times, events, beta).loglik;
}

Eigen::VectorXd cox_gradient(const Eigen::MatrixXd& X, const std::vector<double>& times,
                             const std::vector<int>& events, const Eigen::VectorXd& beta) {
  return cox_derivatives(X, times, events, beta).grad;
}

CoxFit cox_fit(const Eigen::MatrixXd& X, const std::vector<double>& times,
               const std::vector<int>& events, const std::vector<double>& feature_deltas) {
  validate_survival(times, events);
  if (static_cast<std::size_t>(X.rows()) != times.size()) {
    throw ValidationError("cox_fit: design matrix rows do not match survival data");
  }
  const Eigen::Index p = X.cols();
  if (p < 1) throw ValidationError("cox_fit: need at least one covariate");
  if (feature_deltas.size() != static_cast<std::size_t>(p)) {
    throw ValidationError("cox_fit: feature_deltas length does not match covariates");
  }
  int n_events = 0;
  for (const int e : events) n_events += e;
  if (n_events == 0) throw NumericError("cox_fit: no events observed");
  for (Eigen::Index j = 0; j < p; ++j) {
    bool constant = true;
    for (Eigen::Index i = 1; i < X.rows(); ++i) {
      if (X(i, j) != X(0, j)) {
        constant = false;
        break;
      }
    }
    if (constant) throw ValidationError("cox_fit: constant covariate");
  }

  CoxFit fit;
  fit.n_events = n_events;

  // Rao score test at beta = 0.
  {
    const CoxDerivatives d0 =
        cox_derivatives(X, times, events, Eigen::VectorXd::Zero(p));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(d0.hess);
    if (ldlt.info() != Eigen::Success) {
      throw NumericError("cox_fit: singular information matrix at beta = 0");
    }
    fit.score_stat = d0.grad.dot(ldlt.solve(d0.grad));
    fit.score_p = chisq_sf(fit.score_stat, static_cast<int>(p));
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  CoxDerivatives d = cox_derivatives(X, times, events, beta);
  for (int iter = 0; iter < kMaxNewton; ++iter) {
    fit.iterations = iter;
    if (d.grad.cwiseAbs().maxCoeff() < kGradientTol) break;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(d.hess);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw NumericError("cox_fit: singular information matrix");
    }
    const Eigen::VectorXd step = ldlt.solve(d.grad);
    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    CoxDerivatives cand = cox_derivatives(X, times, events, candidate);
    int halvings = 0;
    while ((!std::isfinite(cand.loglik) || cand.loglik < d.loglik - 1e-12) && halvings < 40) {
      scale *= 0.5;
      candidate = beta + scale * step;
      cand = cox_derivatives(X, times, events, candidate);
      ++halvings;
    }
    beta = candidate;
    d = std::move(cand);
    if (beta.cwiseAbs().maxCoeff() > kSeparationBound) {
      throw NumericError("cox_fit: monotone partial likelihood (diverging coefficient)");
    }
  }

  fit.beta = beta;
  fit.loglik = d.loglik;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(d.hess);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericError("cox_fit: singular information matrix at optimum");
  }
  fit.covariance = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  for (Eigen::Index j = 0; j < p; ++j) {
    const double se = std::sqrt(fit.covariance(j, j));
    const double z = se > 0.0 ? std::fabs(beta[j]) / se : 0.0;
    fit.wald_p.push_back(std::min(1.0, 2.0 * (1.0 - normal_cdf(z))));
    EffectEstimate e;
    e.beta = beta[j];
    e.se = se;
    e.delta = feature_deltas[static_cast<std::size_t>(j)];
    e.factor = std::exp(beta[j] * e.delta);
    const double lo = (beta[j] - 1.96 * se) * e.delta;
    const double hi = (beta[j] + 1.96 * se) * e.delta;
    e.ci_low = std::exp(std::min(lo, hi));
    e.ci_high = std::exp(std::max(lo, hi));
    fit.effects.push_back(e);
  }
  return fit;
}

KMCurve kaplan_meier(const std::vector<double>& times, const std::vector<int>& events) {
  validate_survival(times, events);
  const std::size_t n = times.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  KMCurve curve;
  curve.n = static_cast<int>(n);
  double survival = 1.0;
  double greenwood = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const double t = times[order[i]];
    std::size_t j = i;
    int d = 0;
    while (j < n && times[order[j]] == t) {
      if (events[order[j]] == 1) ++d;
      ++j;
    }
    const int at_risk = static_cast<int>(n - i);
    if (d > 0) {
      curve.times.push_back(t);
      curve.at_risk.push_back(at_risk);
      curve.events.push_back(d);
      survival *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      curve.survival.push_back(survival);
      if (at_risk == d) {
        // Curve reaches zero; the log-scale interval collapses with it.
        curve.ci_low.push_back(0.0);
        curve.ci_high.push_back(0.0);
      } else {
        greenwood += static_cast<double>(d) /
                     (static_cast<double>(at_risk) * static_cast<double>(at_risk - d));
        const double half_width = 1.96 * std::sqrt(greenwood);
        curve.ci_low.push_back(std::max(0.0, survival * std::exp(-half_width)));
        curve.ci_high.push_back(std::min(1.0, survival * std::exp(half_width)));
      }
    }
    i = j;
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (events[r] == 0) curve.censor_times.push_back(times[r]);
  }
  std::sort(curve.censor_times.begin(), curve.censor_times.end());
  return curve;
}

LogrankResult logrank(const std::vector<int>& groups, const std::vector<double>& times,
                      const std::vector<int>& events) {
  validate_survival(times, events);
  if (groups.size() != times.size()) {
    throw ValidationError("logrank: group labels must align with survival data");
  }
  std::vector<int> labels(groups);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const int g = static_cast<int>(labels.size());
  if (g < 2) throw ValidationError("logrank: need at least 2 groups");
  std::vector<int> gidx(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    gidx[i] = static_cast<int>(std::lower_bound(labels.begin(), labels.end(), groups[i]) -
                               labels.begin());
  }

  std::set<double> event_times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (events[i] == 1) event_times.insert(times[i]);
  }

  Eigen::VectorXd observed = Eigen::VectorXd::Zero(g);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(g);
  Eigen::MatrixXd covariance = Eigen::MatrixXd::Zero(g - 1, g - 1);
  for (const double t : event_times) {
    std::vector<double> at_risk(g, 0.0);
    std::vector<double> deaths(g, 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] >= t) at_risk[gidx[i]] += 1.0;
      if (times[i] == t && events[i] == 1) deaths[gidx[i]] += 1.0;
    }
    const double n_j = std::accumulate(at_risk.begin(), at_risk.end(), 0.0);
    const double d_j = std::accumulate(deaths.begin(), deaths.end(), 0.0);
    for (int a = 0; a < g; ++a) {
      observed[a] += deaths[a];
      expected[a] += d_j * at_risk[a] / n_j;
    }
    if (n_j > 1.0) {
      const double f = d_j * (n_j - d_j) / (n_j - 1.0);
      for (int a = 0; a < g - 1; ++a) {
        for (int b = 0; b < g - 1; ++b) {
          const double same = (a == b) ? at_risk[a] / n_j : 0.0;
          covariance(a, b) += f * (same - at_risk[a] * at_risk[b] / (n_j * n_j));
        }
      }
    }
  }

  LogrankResult result;
  result.df = g - 1;
  const Eigen::VectorXd diff = (observed - expected).head(g - 1);
  if (event_times.empty() || diff.cwiseAbs().maxCoeff() < 1e-12) {
    result.chi2 = 0.0;
    result.p = 1.0;
    return result;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(covariance);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericError("logrank: degenerate covariance matrix");
  }
  result.chi2 = diff.dot(ldlt.solve(diff));
  result.p = chisq_sf(result.chi2, result.df);
  return result;
}

AltmanResult altman_adjust(double p_min) {
  if (!(p_min > 0.0) || p_min > 1.0) {
    throw ValidationError("altman_adjust: p must lie in (0, 1]");
  }
  AltmanResult result;
  result.in_domain = p_min < 0.1;
  const double raw = -1.63 * p_min * (1.0 + 2.35 * std::log(p_min));
  result.p_adj = std::min(1.0, std::max(p_min, raw));
  return result;
}

CutoffResult optimal_cutoff_stratify(const std::vector<double>& values,
                                     const std::vector<double>& times,
                                     const std::vector<int>& events) {
  validate_survival(times, events);
  if (values.size() != times.size()) {
    throw ValidationError("optimal_cutoff_stratify: feature must align with survival data");
  }
  const std::size_t n = values.size();
  if (n < 10) {
    throw ValidationError("optimal_cutoff_stratify: need at least 10 observations");
  }
  for (const double v : values) {
    if (!std::isfinite(v)) {
      throw ValidationError("optimal_cutoff_stratify: non-finite feature value");
    }
  }

  std::vector<double> distinct(values);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  struct Candidate {
    double cutoff;
    double upper;  // first distinct value above the cutoff
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    std::size_t low_n = 0;
    for (const double v : values) {
      if (v <= distinct[i]) ++low_n;
    }
    const std::size_t high_n = n - low_n;
    if (10 * low_n < n || 10 * high_n < n) continue;  // >= 10% of cases per side
    double cutoff = (distinct[i] + distinct[i + 1]) / 2.0;
    if (cutoff >= distinct[i + 1]) cutoff = distinct[i];  // adjacent representables
    candidates.push_back({cutoff, distinct[i + 1]});
  }
  if (candidates.empty()) {
    throw ValidationError("optimal_cutoff_stratify: no admissible cutoff");
  }

  const double median = quantile(values, 0.5);
  bool have_best = false;
  double best_p = 1.0;
  double best_cutoff = 0.0;
  for (const Candidate& cand : candidates) {
    std::vector<int> grp(n);
    for (std::size_t i = 0; i < n; ++i) grp[i] = values[i] < cand.upper ? 0 : 1;
    const LogrankResult lr = logrank(grp, times, events);
    const bool better =
        !have_best || lr.p < best_p ||
        (lr.p == best_p &&
         (std::fabs(cand.cutoff - median) < std::fabs(best_cutoff - median) ||
          (std::fabs(cand.cutoff - median) == std::fabs(best_cutoff - median) &&
           cand.cutoff < best_cutoff)));
    if (better) {
      have_best = true;
      best_p = lr.p;
      best_cutoff = cand.cutoff;
    }
  }

  CutoffResult result;
  result.cutoff = best_cutoff;
  result.p_min = best_p;
  result.adjusted = altman_adjust(best_p);
  std::vector<double> t_low, t_high;
  std::vector<int> e_low, e_high;
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] <= best_cutoff) {
      t_low.push_back(times[i]);
      e_low.push_back(events[i]);
    } else {
      t_high.push_back(times[i]);
      e_high.push_back(events[i]);
    }
  }
  result.n_low = static_cast<int>(t_low.size());
  result.n_high = static_cast<int>(t_high.size());
  result.low = kaplan_meier(t_low, e_low);
  result.high = kaplan_meier(t_high, e_high);
  return result;
}

}  // namespace histopheno::stats
