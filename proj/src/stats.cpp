#include "histopheno/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "histopheno/rng.hpp"

namespace histopheno::stats {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730950488); }

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 1000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ValidationError("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

// Mid-ranks (1-based) with ties averaged.
std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double u_statistic_from_ranks(const std::vector<double>& ranks, std::size_t n1) {
  double r1 = 0.0;
  for (std::size_t i = 0; i < n1; ++i) r1 += ranks[i];
  return r1 - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
}

}  // namespace

double chisq_sf(double x, int df) {
  if (df < 1) throw ValidationError("chisq_sf: df must be positive");
  if (!(x > 0.0)) return 1.0;
  if (df == 1) return std::erfc(std::sqrt(x / 2.0));
  if (df == 2) return std::exp(-x / 2.0);
  return gamma_q(static_cast<double>(df) / 2.0, x / 2.0);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile: empty sample");
  if (q < 0.0 || q > 1.0) throw ValidationError("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double interquartile_delta(const std::vector<double>& values) {
  return quantile(values, 0.75) - quantile(values, 0.25);
}

MannWhitneyResult mann_whitney(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.empty() || ys.empty()) throw ValidationError("mann_whitney: empty sample");
  const std::size_t n1 = xs.size();
  const std::size_t n2 = ys.size();
  const std::size_t n = n1 + n2;

  std::vector<double> combined(xs);
  combined.insert(combined.end(), ys.begin(), ys.end());
  const std::vector<double> ranks = midranks(combined);
  MannWhitneyResult result;
  result.u = u_statistic_from_ranks(ranks, n1);

  // Tie-corrected normal approximation; also provides the effect size.
  double tie_sum = 0.0;
  {
    std::vector<double> sorted(combined);
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_sum += t * t * t - t;
      i = j + 1;
    }
  }
  const double mean_u = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
  const double nf = static_cast<double>(n);
  double var_u = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                 ((nf + 1.0) - tie_sum / (nf * (nf - 1.0)));
  double z = 0.0;
  if (var_u > 0.0) z = (result.u - mean_u) / std::sqrt(var_u);
  result.p = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::fabs(z))));
  const double r = z / std::sqrt(nf);
  result.r2 = r * r;

  if (n <= 10) {
    result.exact = true;
    std::vector<double> sorted(combined);
    std::sort(sorted.begin(), sorted.end());
    std::vector<bool> mask(n, false);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(n1), true);
    std::sort(mask.begin(), mask.end(), std::greater<bool>());
    const std::vector<double> sorted_ranks = midranks(sorted);
    long total = 0;
    long count_le = 0;
    long count_ge = 0;
    do {
      double r1 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask[i]) r1 += sorted_ranks[i];
      }
      const double u = r1 - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
      ++total;
      if (u <= result.u + 1e-9) ++count_le;
      if (u >= result.u - 1e-9) ++count_ge;
    } while (std::prev_permutation(mask.begin(), mask.end()));
    const double tail = static_cast<double>(std::min(count_le, count_ge));
    result.p = std::min(1.0, 2.0 * tail / static_cast<double>(total));
  }
  return result;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ValidationError("spearman: length mismatch");
  if (xs.size() < 2) throw ValidationError("spearman: need at least 2 observations");
  const std::vector<double> rx = midranks(xs);
  const std::vector<double> ry = midranks(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ValidationError("spearman: correlation undefined for constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw ValidationError("roc_auc: scores and labels must be non-empty and aligned");
  }
  double n_pos = 0.0, n_neg = 0.0;
  for (const int label : labels) {
    if (label == 1) {
      n_pos += 1.0;
    } else if (label == 0) {
      n_neg += 1.0;
    } else {
      throw ValidationError("roc_auc: labels must be 0 or 1");
    }
  }
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw ValidationError("roc_auc: both classes must be present");
  }
  const std::vector<double> ranks = midranks(scores);
  double rank_pos = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) rank_pos += ranks[i];
  }
  return (rank_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

// --- logistic regression ---------------------------------------------------

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd a(X.rows(), X.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(X.cols()) = X;
  return a;
}

double log1pexp(double eta) {
  if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

struct LogisticCore {
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;
  double loglik = 0.0;
  int iterations = 0;
};

double loglik_aug(const Eigen::MatrixXd& A, const std::vector<int>& y,
                  const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = A * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    ll += static_cast<double>(y[static_cast<std::size_t>(i)]) * eta[i] - log1pexp(eta[i]);
  }
  return ll;
}

constexpr double kSeparationBound = 15.0;
constexpr double kGradientTol = 1e-8;
constexpr int kMaxNewton = 100;

LogisticCore logistic_core(const Eigen::MatrixXd& A, const std::vector<int>& y) {
  const Eigen::Index p = A.cols();
  LogisticCore core;
  core.beta = Eigen::VectorXd::Zero(p);
  double ll = loglik_aug(A, y, core.beta);
  for (int iter = 0; iter < kMaxNewton; ++iter) {
    core.iterations = iter;
    const Eigen::VectorXd eta = A * core.beta;
    Eigen::VectorXd prob(eta.size());
    Eigen::VectorXd w(eta.size());
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double pi = 1.0 / (1.0 + std::exp(-eta[i]));
      prob[i] = pi;
      w[i] = pi * (1.0 - pi);
      resid[i] = static_cast<double>(y[static_cast<std::size_t>(i)]) - pi;
    }
    const Eigen::VectorXd grad = A.transpose() * resid;
    if (grad.cwiseAbs().maxCoeff() < kGradientTol) break;
    const Eigen::MatrixXd hess = A.transpose() * w.asDiagonal() * A;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw NumericError("logistic_fit: singular information matrix");
    }
    const Eigen::VectorXd step = ldlt.solve(grad);
    double scale = 1.0;
    Eigen::VectorXd candidate = core.beta + step;
    double cand_ll = loglik_aug(A, y, candidate);
    int halvings = 0;
    while ((!std::isfinite(cand_ll) || cand_ll < ll - 1e-12) && halvings < 40) {
      scale *= 0.5;
      candidate = core.beta + scale * step;
      cand_ll = loglik_aug(A, y, candidate);
      ++halvings;
    }
    core.beta = candidate;
    ll = cand_ll;
    if (core.beta.cwiseAbs().maxCoeff() > kSeparationBound) {
      throw NumericError("logistic_fit: complete separation detected (diverging coefficient)");
    }
  }
  core.loglik = ll;
  // Covariance from the information matrix at the optimum.
  const Eigen::VectorXd eta = A * core.beta;
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double pi = 1.0 / (1.0 + std::exp(-eta[i]));
    w[i] = pi * (1.0 - pi);
  }
  const Eigen::MatrixXd hess = A.transpose() * w.asDiagonal() * A;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericError("logistic_fit: singular information matrix at optimum");
  }
  core.covariance = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  return core;
}

void validate_design(const Eigen::MatrixXd& X, std::size_t n_rows, std::size_t p_expected) {
  if (static_cast<std::size_t>(X.rows()) != n_rows) {
    throw ValidationError("design matrix rows do not match outcome length");
  }
  if (X.cols() < 1) throw ValidationError("design matrix needs at least one covariate");
  if (p_expected != static_cast<std::size_t>(X.cols())) {
    throw ValidationError("feature_deltas length does not match covariate count");
  }
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double first = X(0, j);
    bool constant = true;
    for (Eigen::Index i = 1; i < X.rows(); ++i) {
      if (X(i, j) != first) {
        constant = false;
        break;
      }
    }
    if (constant) throw ValidationError("design matrix contains a constant covariate");
  }
}

EffectEstimate make_effect(double beta, double se, double delta) {
  EffectEstimate e;
  e.beta = beta;
  e.se = se;
  e.delta = delta;
  e.factor = std::exp(beta * delta);
  const double lo = (beta - 1.96 * se) * delta;
  const double hi = (beta + 1.96 * se) * delta;
  e.ci_low = std::exp(std::min(lo, hi));
  e.ci_high = std::exp(std::max(lo, hi));
  return e;
}

}  // namespace

double logistic_loglik(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       const Eigen::VectorXd& beta) {
  return loglik_aug(with_intercept(X), y, beta);
}

Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                  const Eigen::VectorXd& beta) {
  const Eigen::MatrixXd A = with_intercept(X);
  const Eigen::VectorXd eta = A * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    resid[i] = static_cast<double>(y[static_cast<std::size_t>(i)]) -
               1.0 / (1.0 + std::exp(-eta[i]));
  }
  return A.transpose() * resid;
}

LogisticFit logistic_fit(const Eigen::MatrixXd& X, const std::vector<int>& y,
                         const std::vector<double>& feature_deltas) {
  validate_design(X, y.size(), feature_deltas.size());
  for (const int v : y) {
    if (v != 0 && v != 1) throw ValidationError("logistic_fit: outcome must be 0/1");
  }
  if (X.rows() <= X.cols() + 1) {
    throw ValidationError("logistic_fit: need more observations than parameters");
  }

  const Eigen::MatrixXd A = with_intercept(X);
  {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < A.cols()) {
      throw NumericError("logistic_fit: collinear covariates");
    }
  }
  const LogisticCore core = logistic_core(A, y);

  LogisticFit fit;
  fit.beta = core.beta;
  fit.covariance = core.covariance;
  fit.loglik = core.loglik;
  fit.iterations = core.iterations;

  const Eigen::VectorXd eta = A * core.beta;
  fit.fitted.resize(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    fit.fitted[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-eta[i]));
  }
  fit.auc = roc_auc(fit.fitted, y);

  const Eigen::Index p = X.cols();
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.effects.push_back(make_effect(core.beta[j + 1],
                                      std::sqrt(core.covariance(j + 1, j + 1)),
                                      feature_deltas[static_cast<std::size_t>(j)]));
    // Drop-one deviance test.
    Eigen::MatrixXd reduced(X.rows(), p - 1);
    Eigen::Index col = 0;
    for (Eigen::Index c = 0; c < p; ++c) {
      if (c == j) continue;
      reduced.col(col++) = X.col(c);
    }
    const LogisticCore base = logistic_core(with_intercept(reduced), y);
    const double lr = std::max(0.0, 2.0 * (core.loglik - base.loglik));
    fit.lr_p.push_back(chisq_sf(lr, 1));
  }
  return fit;
}

// --- bootstrap -------------------------------------------------------------

BootstrapAucResult bootstrap_auc(int n, const std::vector<int>& labels, const BootstrapFit& fit,
                                 int B, std::uint64_t seed) {
  if (n <= 0 || labels.size() != static_cast<std::size_t>(n)) {
    throw ValidationError("bootstrap_auc: labels must match n");
  }
  if (B < 0) throw ValidationError("bootstrap_auc: B must be non-negative");

  std::vector<int> all_rows(static_cast<std::size_t>(n));
  std::iota(all_rows.begin(), all_rows.end(), 0);
  const auto apparent_scorer = fit(all_rows);
  std::vector<double> apparent_scores(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) apparent_scores[static_cast<std::size_t>(i)] = apparent_scorer(i);

  BootstrapAucResult result;
  result.apparent = roc_auc(apparent_scores, labels);
  result.corrected = result.apparent;
  if (B == 0) return result;

  double optimism_sum = 0.0;
  for (int b = 0; b < B; ++b) {
    Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(b));
    std::vector<int> sample(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      sample[static_cast<std::size_t>(i)] =
          static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    }
    try {
      const auto scorer = fit(sample);
      std::vector<double> boot_scores(sample.size());
      std::vector<int> boot_labels(sample.size());
      for (std::size_t i = 0; i < sample.size(); ++i) {
        boot_scores[i] = scorer(sample[i]);
        boot_labels[i] = labels[static_cast<std::size_t>(sample[i])];
      }
      const double auc_boot = roc_auc(boot_scores, boot_labels);
      std::vector<double> orig_scores(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) orig_scores[static_cast<std::size_t>(i)] = scorer(i);
      const double auc_orig = roc_auc(orig_scores, labels);
      optimism_sum += auc_boot - auc_orig;
      ++result.replicates_used;
    } catch (const Error&) {
      ++result.replicates_failed;
    }
  }
  if (result.replicates_failed * 2 > B) {
    throw NumericError("bootstrap_auc: more than half of the replicates failed to fit");
  }
  if (result.replicates_used > 0) {
    result.corrected =
        result.apparent - optimism_sum / static_cast<double>(result.replicates_used);
  }
  return result;
}

}  // namespace histopheno::stats
