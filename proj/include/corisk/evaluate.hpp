// Evaluation battery: confusion metrics with both F1 conventions, score
// distribution summaries, event-count grouping, the false-negative subgroup
// audit, and direct age standardization.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "corisk/data.hpp"
#include "corisk/error.hpp"
#include "corisk/stats.hpp"

namespace corisk {

// ---------------------------------------------------------------------------
// Confusion metrics. Predictions and labels are {-1,+1}. With zero positive
// labels the positive-side rates are NaN and the degenerate flag is set.

struct BinaryMetrics {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double sens = 0.0;
  double spec = 0.0;
  double fnr = 0.0;               // FN / (FN + TP)
  double precision = 0.0;
  double f1_sens_spec = 0.0;      // harmonic mean of sensitivity and specificity
  double f1_standard = 0.0;       // 2TP / (2TP + FP + FN)
  bool degenerate = false;
  std::vector<std::string> warnings;
};

inline BinaryMetrics evaluate_binary(const std::vector<int>& predictions,
                                     const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) throw Error(ErrorKind::Input, "evaluate_binary: size mismatch");
  if (predictions.empty()) throw Error(ErrorKind::Input, "evaluate_binary: empty input");
  BinaryMetrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if ((predictions[i] != 1 && predictions[i] != -1) || (labels[i] != 1 && labels[i] != -1))
      throw Error(ErrorKind::Input, "evaluate_binary: values must be -1 or +1");
    if (labels[i] == 1) (predictions[i] == 1 ? m.tp : m.fn)++;
    else (predictions[i] == 1 ? m.fp : m.tn)++;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (m.tp + m.fn == 0) {
    m.degenerate = true;
    m.warnings.push_back("no positive labels; sensitivity, FNR and F1 are undefined");
    m.sens = m.fnr = m.f1_sens_spec = m.f1_standard = nan;
  } else {
    m.sens = static_cast<double>(m.tp) / (m.tp + m.fn);
    m.fnr = static_cast<double>(m.fn) / (m.fn + m.tp);
  }
  if (m.tn + m.fp == 0) {
    m.degenerate = true;
    m.warnings.push_back("no negative labels; specificity is undefined");
    m.spec = nan;
  } else {
    m.spec = static_cast<double>(m.tn) / (m.tn + m.fp);
  }
  m.precision = (m.tp + m.fp > 0) ? static_cast<double>(m.tp) / (m.tp + m.fp) : nan;
  if (!m.degenerate) {
    m.f1_sens_spec = (m.sens + m.spec > 0.0) ? 2.0 * m.sens * m.spec / (m.sens + m.spec) : 0.0;
    m.f1_standard = (2 * m.tp + m.fp + m.fn > 0)
                        ? 2.0 * static_cast<double>(m.tp) / (2 * m.tp + m.fp + m.fn)
                        : 0.0;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Distribution summary. Both variance conventions are reported: `variance` is
// the sample (n-1) convention with the single-value case defined as 0, and
// `variance_population` divides by n.

struct DistributionStats {
  std::int64_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double variance = 0.0;
  double variance_population = 0.0;
};

namespace detail {

// Linear-interpolation quantile on sorted values (the R type-7 convention).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::Input, "quantile: empty input");
  if (sorted.size() == 1) return sorted[0];
  double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

inline DistributionStats distribution_stats(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorKind::Input, "distribution_stats: empty input");
  DistributionStats s;
  s.n = static_cast<std::int64_t>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.variance_population = ss / s.n;
  s.variance = s.n > 1 ? ss / (s.n - 1) : 0.0;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  s.median = detail::quantile_sorted(sorted, 0.5);
  return s;
}

// ---------------------------------------------------------------------------
// Score summaries grouped by the number of observed positive outcomes.

struct EventCountRow {
  int n_events = 0;
  std::int64_t count = 0;
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

inline std::vector<EventCountRow> by_event_count(const std::vector<double>& scores,
                                                 const std::vector<int>& event_counts) {
  if (scores.size() != event_counts.size()) throw Error(ErrorKind::Input, "by_event_count: size mismatch");
  if (scores.empty()) throw Error(ErrorKind::Input, "by_event_count: empty input");
  int max_events = 0;
  for (int e : event_counts) {
    if (e < 0) throw Error(ErrorKind::Input, "by_event_count: negative event count");
    max_events = std::max(max_events, e);
  }
  std::vector<EventCountRow> rows;
  for (int e = 0; e <= max_events; ++e) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (event_counts[i] == e) vals.push_back(scores[i]);
    if (vals.empty()) continue;
    std::sort(vals.begin(), vals.end());
    EventCountRow row;
    row.n_events = e;
    row.count = static_cast<std::int64_t>(vals.size());
    double sum = 0.0;
    for (double v : vals) sum += v;
    row.mean = sum / vals.size();
    row.q1 = detail::quantile_sorted(vals, 0.25);
    row.median = detail::quantile_sorted(vals, 0.5);
    row.q3 = detail::quantile_sorted(vals, 0.75);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// False-negative subgroup audit. For each stratum (a binary determinant), the
// share of the outcome's false negatives falling in the stratum is compared
// with the stratum's population prevalence; the stratum is flagged when its
// FN-share interval lies entirely above the prevalence interval.

struct FnAuditRow {
  std::string stratum;
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;  // confusion cells inside the stratum
  std::int64_t fn_total = 0;                    // false negatives over the whole view
  double fn_share = 0.0;
  Interval fn_ci;
  std::int64_t stratum_count = 0;
  std::int64_t population = 0;
  double prevalence = 0.0;
  Interval prev_ci;
  bool flagged = false;
};

struct FnAudit {
  std::vector<FnAuditRow> rows;
  std::vector<std::string> warnings;
};

inline FnAudit fn_audit(const Cohort& view, const std::string& outcome,
                        const std::vector<int>& predictions,
                        const std::vector<std::string>& strata, double level = 0.95) {
  if (static_cast<int>(predictions.size()) != view.n())
    throw Error(ErrorKind::Input, "fn_audit: predictions size != cohort size");
  FnAudit audit;
  int ko = view.outcome_index(outcome);
  std::int64_t fn_total = 0;
  for (int i = 0; i < view.n(); ++i)
    if (view.subjects[i].y[ko] == 1 && predictions[i] == -1) ++fn_total;
  if (fn_total == 0) {
    audit.warnings.push_back("no false negatives in the evaluated view; audit is empty");
    return audit;
  }
  for (const auto& name : strata) {
    const Variable& v = view.variable(name);
    if (v.kind != VarKind::Binary) {
      audit.warnings.push_back("stratum '" + name + "' is not binary, skipped");
      continue;
    }
    FnAuditRow row;
    row.stratum = name;
    row.fn_total = fn_total;
    row.population = view.n();
    int col = v.columns[0];
    for (int i = 0; i < view.n(); ++i) {
      if (view.subjects[i].x[col] != 1.0) continue;
      ++row.stratum_count;
      bool event = view.subjects[i].y[ko] == 1;
      bool predicted = predictions[i] == 1;
      if (event && predicted) ++row.tp;
      else if (event) ++row.fn;
      else if (predicted) ++row.fp;
      else ++row.tn;
    }
    row.fn_share = static_cast<double>(row.fn) / fn_total;
    row.fn_ci = wilson_interval(row.fn, fn_total, level);
    row.prevalence = static_cast<double>(row.stratum_count) / view.n();
    row.prev_ci = wilson_interval(row.stratum_count, view.n(), level);
    row.flagged = row.fn_ci.low > row.prev_ci.high;
    audit.rows.push_back(row);
  }
  return audit;
}

// ---------------------------------------------------------------------------
// Direct age standardization: per sex, the weighted mean of per-age-class
// mean scores under a reference age distribution (default: the whole view's
// age distribution). Empty cells are skipped and the remaining weights
// renormalized, with a warning.

struct StandardizedMeans {
  std::vector<std::pair<int, double>> by_sex;  // sex value -> standardized mean
  std::vector<std::string> warnings;
};

inline StandardizedMeans standardize_by_age(const Cohort& view, const std::vector<double>& scores,
                                            const std::vector<double>& reference_weights = {}) {
  if (static_cast<int>(scores.size()) != view.n())
    throw Error(ErrorKind::Input, "standardize_by_age: scores size != cohort size");
  if (view.age_class_labels.empty())
    throw Error(ErrorKind::Input, "standardize_by_age: cohort has no age classes");
  const int n_classes = static_cast<int>(view.age_class_labels.size());

  std::vector<double> weights = reference_weights;
  if (weights.empty()) {
    weights.assign(n_classes, 0.0);
    for (const auto& rec : view.subjects) weights[rec.age_class] += 1.0;
    for (double& w : weights) w /= view.n();
  }
  if (static_cast<int>(weights.size()) != n_classes)
    throw Error(ErrorKind::Input, "standardize_by_age: weight vector length != age classes");

  StandardizedMeans out;
  for (int sex : {0, 1}) {
    std::vector<double> cell_sum(n_classes, 0.0);
    std::vector<std::int64_t> cell_n(n_classes, 0);
    bool any = false;
    for (int i = 0; i < view.n(); ++i) {
      if (view.subjects[i].sex != sex) continue;
      cell_sum[view.subjects[i].age_class] += scores[i];
      cell_n[view.subjects[i].age_class] += 1;
      any = true;
    }
    if (!any) {
      out.warnings.push_back("no subjects with sex=" + std::to_string(sex) + "; skipped");
      continue;
    }
    double total_w = 0.0, acc = 0.0;
    for (int cls = 0; cls < n_classes; ++cls) {
      if (cell_n[cls] == 0) {
        if (weights[cls] > 0.0)
          out.warnings.push_back("empty cell sex=" + std::to_string(sex) + " age class '" +
                                 view.age_class_labels[cls] + "'; weight renormalized");
        continue;
      }
      acc += weights[cls] * (cell_sum[cls] / cell_n[cls]);
      total_w += weights[cls];
    }
    if (total_w <= 0.0) {
      out.warnings.push_back("no usable cells for sex=" + std::to_string(sex));
      continue;
    }
    out.by_sex.emplace_back(sex, acc / total_w);
  }
  return out;
}

}  // namespace corisk
