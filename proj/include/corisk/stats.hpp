// Statistical primitives: penalized IRLS logistic regression, exact binomial
// upper-tail test, odds ratios, Wilson intervals, rank AUC, correlations.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "corisk/error.hpp"

namespace corisk {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Acklam's rational approximation refined with one Newton step on erfc.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::Input, "normal_quantile: p must lie in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01,  -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double plow = 0.02425;
  double q, x;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

inline double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  double e = std::exp(eta);
  return e / (1.0 + e);
}

inline double softplus(double eta) {
  if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

// ---------------------------------------------------------------------------
// Logistic regression via iteratively reweighted least squares.
// Labels are {-1,+1}; the intercept is always added and never penalized.

struct LogisticOptions {
  double ridge = 1e-8;
  int max_iter = 100;
  double tol = 1e-8;
  double separation_coef_limit = 10.0;
  double separation_ridge = 1e-4;
};

struct LogisticModel {
  std::vector<std::string> feature_names;  // excludes the intercept
  Eigen::VectorXd beta;                    // [intercept, coefficients...]
  Eigen::VectorXd std_errors;              // same layout as beta
  bool converged = false;
  bool separation_detected = false;
  int n_iterations = 0;
  double ridge_used = 0.0;
  std::vector<double> iteration_deviance;  // -2 log-likelihood after each iteration
  std::vector<std::string> warnings;

  double margin(const Eigen::VectorXd& x) const {
    double eta = beta[0];
    for (int j = 0; j < x.size(); ++j) eta += beta[j + 1] * x[j];
    return eta;
  }
  double predict(const Eigen::VectorXd& x) const { return sigmoid(margin(x)); }

  double wald_p(int feature_idx) const {
    double se = std_errors[feature_idx + 1];
    if (!(se > 0.0) || !std::isfinite(se)) return 1.0;
    double z = std::fabs(beta[feature_idx + 1]) / se;
    return 2.0 * (1.0 - normal_cdf(z));
  }
};

namespace detail {

inline void check_labels(const std::vector<int>& y) {
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw Error(ErrorKind::Input, "labels must be -1 or +1");
  }
  if (!pos || !neg) throw Error(ErrorKind::Degenerate, "labels are single-class");
}

inline double logistic_loglik(const Eigen::MatrixXd& Xi, const std::vector<int>& y,
                              const Eigen::VectorXd& beta, double ridge) {
  double ll = 0.0;
  for (int i = 0; i < Xi.rows(); ++i) {
    double eta = Xi.row(i).dot(beta);
    double y01 = (y[i] == 1) ? 1.0 : 0.0;
    ll += y01 * eta - softplus(eta);
  }
  for (int j = 1; j < beta.size(); ++j) ll -= 0.5 * ridge * beta[j] * beta[j];
  return ll;
}

inline LogisticModel irls_fit(const Eigen::MatrixXd& X, const std::vector<int>& y,
                              const LogisticOptions& opt, double ridge) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  Eigen::MatrixXd Xi(n, p + 1);
  Xi.col(0).setOnes();
  if (p > 0) Xi.rightCols(p) = X;

  LogisticModel model;
  model.ridge_used = ridge;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  double ll = logistic_loglik(Xi, y, beta, ridge);
  double prev_dev = std::numeric_limits<double>::infinity();

  Eigen::VectorXd eta(n), prob(n), w(n);
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    eta = Xi * beta;
    for (int i = 0; i < n; ++i) {
      prob[i] = sigmoid(eta[i]);
      w[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-12);
    }
    Eigen::VectorXd resid(n);
    for (int i = 0; i < n; ++i) resid[i] = ((y[i] == 1) ? 1.0 : 0.0) - prob[i];
    Eigen::VectorXd grad = Xi.transpose() * resid;
    for (int j = 1; j <= p; ++j) grad[j] -= ridge * beta[j];

    if (grad.lpNorm<Eigen::Infinity>() < opt.tol) {
      model.converged = true;
      break;
    }

    Eigen::MatrixXd H = Xi.transpose() * w.asDiagonal() * Xi;
    for (int j = 1; j <= p; ++j) H(j, j) += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success) {
      model.separation_detected = true;
      break;
    }
    Eigen::VectorXd step = ldlt.solve(grad);

    // Halve the step until the penalized log-likelihood does not decrease.
    double scale = 1.0;
    double ll_new = logistic_loglik(Xi, y, beta + step, ridge);
    int halvings = 0;
    while (ll_new < ll - 1e-12 && halvings < 40) {
      scale *= 0.5;
      ll_new = logistic_loglik(Xi, y, beta + scale * step, ridge);
      ++halvings;
    }
    beta += scale * step;
    ll = ll_new;
    model.n_iterations = iter + 1;

    double dev = 0.0;
    for (int i = 0; i < n; ++i) {
      double e = Xi.row(i).dot(beta);
      double y01 = (y[i] == 1) ? 1.0 : 0.0;
      dev += y01 * e - softplus(e);
    }
    dev *= -2.0;
    model.iteration_deviance.push_back(dev);

    if (beta.lpNorm<Eigen::Infinity>() > opt.separation_coef_limit && iter >= 2) break;

    // Deviance-change criterion: the gradient norm alone is unreachable at
    // large n once the iterate sits on the optimum's floating point floor.
    if (std::fabs(prev_dev - dev) / (std::fabs(dev) + 0.1) < opt.tol) {
      model.converged = true;
      break;
    }
    prev_dev = dev;
  }

  model.beta = beta;
  if (beta.lpNorm<Eigen::Infinity>() > opt.separation_coef_limit) model.separation_detected = true;

  eta = Xi * beta;
  for (int i = 0; i < n; ++i) {
    prob[i] = sigmoid(eta[i]);
    w[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-12);
  }
  Eigen::MatrixXd H = Xi.transpose() * w.asDiagonal() * Xi;
  for (int j = 1; j <= p; ++j) H(j, j) += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  model.std_errors = Eigen::VectorXd::Constant(p + 1, std::numeric_limits<double>::quiet_NaN());
  if (ldlt.info() == Eigen::Success) {
    Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
    for (int j = 0; j <= p; ++j) model.std_errors[j] = std::sqrt(std::max(cov(j, j), 0.0));
  }
  return model;
}

}  // namespace detail

inline LogisticModel fit_logistic(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                  const LogisticOptions& opt = LogisticOptions(),
                                  const std::vector<std::string>& feature_names = {}) {
  if (static_cast<int>(y.size()) != X.rows()) throw Error(ErrorKind::Input, "fit_logistic: X rows != labels");
  if (X.rows() == 0) throw Error(ErrorKind::Size, "fit_logistic: empty dataset");
  detail::check_labels(y);

  double ridge = std::max(opt.ridge, 1e-8);
  LogisticModel model = detail::irls_fit(X, y, opt, ridge);
  if (model.separation_detected) {
    double raised = std::max(ridge, opt.separation_ridge);
    LogisticModel refit = detail::irls_fit(X, y, opt, raised);
    refit.separation_detected = true;
    refit.converged = false;
    refit.warnings.push_back("quasi-separation detected; ridge raised to " + std::to_string(raised));
    model = std::move(refit);
  }
  model.feature_names = feature_names;
  if (model.feature_names.empty() && X.cols() > 0) {
    for (int j = 0; j < X.cols(); ++j) model.feature_names.push_back("x" + std::to_string(j));
  }
  return model;
}

// Max relative error between the analytic unpenalized log-likelihood gradient
// and a central finite difference at the supplied coefficient point.
inline double gradient_check(const Eigen::MatrixXd& X, const std::vector<int>& y,
                             const Eigen::VectorXd& beta_with_intercept) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (beta_with_intercept.size() != p + 1)
    throw Error(ErrorKind::Input, "gradient_check: beta must have p+1 entries");
  detail::check_labels(y);
  Eigen::MatrixXd Xi(n, p + 1);
  Xi.col(0).setOnes();
  if (p > 0) Xi.rightCols(p) = X;

  Eigen::VectorXd analytic = Eigen::VectorXd::Zero(p + 1);
  for (int i = 0; i < n; ++i) {
    double eta = Xi.row(i).dot(beta_with_intercept);
    double y01 = (y[i] == 1) ? 1.0 : 0.0;
    analytic += (y01 - sigmoid(eta)) * Xi.row(i).transpose();
  }

  double worst = 0.0;
  for (int j = 0; j <= p; ++j) {
    double h = 1e-5 * std::max(1.0, std::fabs(beta_with_intercept[j]));
    Eigen::VectorXd bp = beta_with_intercept, bm = beta_with_intercept;
    bp[j] += h;
    bm[j] -= h;
    double fd = (detail::logistic_loglik(Xi, y, bp, 0.0) - detail::logistic_loglik(Xi, y, bm, 0.0)) / (2.0 * h);
    double rel = std::fabs(fd - analytic[j]) / std::max({1.0, std::fabs(fd), std::fabs(analytic[j])});
    worst = std::max(worst, rel);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Exact upper-tail binomial test: P(X >= k) for X ~ Binomial(n, p0).

struct BinomialTest {
  std::int64_t k = 0;
  std::int64_t n = 0;
  double theta0 = 0.0;
  double p_value = 1.0;
};

inline double binomial_upper_tail(std::int64_t k, std::int64_t n, double p0) {
  if (n < 1) throw Error(ErrorKind::Input, "binomial test: n must be >= 1");
  if (k < 0 || k > n) throw Error(ErrorKind::Input, "binomial test: k out of range");
  if (!(p0 > 0.0 && p0 < 1.0)) throw Error(ErrorKind::Input, "binomial test: p0 must lie in (0,1)");
  if (k == 0) return 1.0;
  // First term in log space, then the pmf ratio recurrence
  // pmf(i+1) = pmf(i) * (n-i)/(i+1) * p/q, accumulated in extended precision.
  const long double p = static_cast<long double>(p0);
  const long double q = 1.0L - p;
  long double lpmf = lgammal(static_cast<long double>(n) + 1.0L) -
                     lgammal(static_cast<long double>(k) + 1.0L) -
                     lgammal(static_cast<long double>(n - k) + 1.0L) +
                     static_cast<long double>(k) * logl(p) +
                     static_cast<long double>(n - k) * log1pl(-p);
  long double term = expl(lpmf);
  long double sum = term;
  for (std::int64_t i = k; i < n; ++i) {
    term *= (static_cast<long double>(n - i) / static_cast<long double>(i + 1)) * (p / q);
    sum += term;
  }
  return std::min(1.0, static_cast<double>(sum));
}

inline BinomialTest binomial_test_exact(std::int64_t k, std::int64_t n, double p0) {
  BinomialTest t;
  t.k = k;
  t.n = n;
  t.theta0 = p0;
  t.p_value = binomial_upper_tail(k, n, p0);
  return t;
}

// ---------------------------------------------------------------------------
// Odds ratio for a 2x2 table [[a, b], [c, d]] with log-normal interval.

struct OddsRatio {
  double value = 0.0;
  double low = 0.0;
  double high = 0.0;
  bool corrected = false;  // Haldane-Anscombe 0.5 added to every cell
};

inline OddsRatio odds_ratio(double a, double b, double c, double d, double level = 0.95) {
  if (a < 0 || b < 0 || c < 0 || d < 0) throw Error(ErrorKind::Input, "odds_ratio: negative cell");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::Input, "odds_ratio: level must lie in (0,1)");
  if (a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0)
    throw Error(ErrorKind::Degenerate, "odds_ratio: zero margin, association undefined");
  OddsRatio r;
  if (a == 0 || b == 0 || c == 0 || d == 0) {
    r.corrected = true;
    a += 0.5;
    b += 0.5;
    c += 0.5;
    d += 0.5;
  }
  r.value = (a * d) / (b * c);
  double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  double se = std::sqrt(1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d);
  r.low = std::exp(std::log(r.value) - z * se);
  r.high = std::exp(std::log(r.value) + z * se);
  return r;
}

// ---------------------------------------------------------------------------
// Wilson score interval for a binomial proportion.

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

inline Interval wilson_interval(std::int64_t k, std::int64_t n, double level = 0.95) {
  if (n < 1) throw Error(ErrorKind::Input, "wilson_interval: n must be >= 1");
  if (k < 0 || k > n) throw Error(ErrorKind::Input, "wilson_interval: k out of range");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::Input, "wilson_interval: level must lie in (0,1)");
  double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  double phat = static_cast<double>(k) / n;
  double z2n = z * z / n;
  double denom = 1.0 + z2n;
  double center = phat + z2n / 2.0;
  double half = z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n));
  Interval iv;
  iv.low = std::max(0.0, (center - half) / denom);
  iv.high = std::min(1.0, (center + half) / denom);
  return iv;
}

// ---------------------------------------------------------------------------
// Rank AUC with average ranks on ties (equivalent to pair counting with half
// credit for tied pairs).

inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::Input, "auc: size mismatch");
  const int n = static_cast<int>(scores.size());
  std::int64_t n_pos = 0, n_neg = 0;
  for (int v : labels) {
    if (v == 1) ++n_pos;
    else if (v == -1) ++n_neg;
    else throw Error(ErrorKind::Input, "auc: labels must be -1 or +1");
  }
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorKind::Degenerate, "auc: labels are single-class");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return scores[i] < scores[j]; });

  double rank_sum_pos = 0.0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = (static_cast<double>(i + 1) + j) / 2.0;  // ranks are 1-based
    for (int t = i; t < j; ++t)
      if (labels[order[t]] == 1) rank_sum_pos += avg_rank;
    i = j;
  }
  return (rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// ---------------------------------------------------------------------------
// Pearson correlation matrix over columns; constant columns are flagged and
// their off-diagonal correlations reported as zero.

struct CorrMatrix {
  Eigen::MatrixXd r;
  std::vector<char> degenerate;
};

inline CorrMatrix pearson_corr_matrix(const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n < 2) throw Error(ErrorKind::Size, "pearson_corr_matrix: need at least 2 rows");
  CorrMatrix out;
  out.r = Eigen::MatrixXd::Identity(p, p);
  out.degenerate.assign(p, 0);

  Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  Eigen::VectorXd ss(p);
  for (int j = 0; j < p; ++j) {
    ss[j] = centered.col(j).squaredNorm();
    if (ss[j] == 0.0) out.degenerate[j] = 1;
  }
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      double v = 0.0;
      if (!out.degenerate[a] && !out.degenerate[b]) {
        v = centered.col(a).dot(centered.col(b)) / std::sqrt(ss[a] * ss[b]);
        v = std::clamp(v, -1.0, 1.0);
      }
      out.r(a, b) = v;
      out.r(b, a) = v;
    }
  }
  return out;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::Input, "pearson: bad sizes");
  const int n = static_cast<int>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace corisk
