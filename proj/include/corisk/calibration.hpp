// Per-outcome calibration: prevalence-targeted undersampling, grid cutoff
// selection, k-group averaging of cutoff / sensitivity / specificity, and the
// likelihood weights derived from them.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "corisk/data.hpp"
#include "corisk/error.hpp"
#include "corisk/rng.hpp"
#include "corisk/stats.hpp"

namespace corisk {

// ---------------------------------------------------------------------------
// Undersampling: keep every positive, sample negatives without replacement so
// positives make up `positive_fraction` of the result.

struct UndersamplePlan {
  double positive_fraction = 0.2;
  std::uint64_t seed = 0;
};

inline Cohort undersample(const Cohort& c, const std::string& outcome, const UndersamplePlan& plan) {
  if (!(plan.positive_fraction > 0.0 && plan.positive_fraction < 1.0))
    throw Error(ErrorKind::Input, "undersample: positive_fraction must lie in (0,1)");
  int k = c.outcome_index(outcome);
  std::vector<int> pos, neg;
  for (int i = 0; i < c.n(); ++i) (c.subjects[i].y[k] == 1 ? pos : neg).push_back(i);
  if (pos.empty()) throw Error(ErrorKind::Degenerate, "undersample: no positives for outcome " + outcome);
  auto needed = static_cast<std::size_t>(
      std::lround(pos.size() * (1.0 - plan.positive_fraction) / plan.positive_fraction));
  if (neg.size() < needed)
    throw Error(ErrorKind::Size, "undersample: need " + std::to_string(needed) + " negatives, have " +
                                     std::to_string(neg.size()));
  std::mt19937_64 rng = make_stream(plan.seed, "undersample:" + outcome);
  std::vector<int> pick = sample_without_replacement(static_cast<int>(neg.size()),
                                                     static_cast<int>(needed), rng);
  std::vector<int> rows = pos;
  for (int t : pick) rows.push_back(neg[t]);
  std::sort(rows.begin(), rows.end());
  return subset(c, rows);
}

// ---------------------------------------------------------------------------
// Cutoff selection on the interior grid t/(grid_size+1), t = 1..grid_size.
// Classification is positive when probability >= cutoff; the smallest grid
// value attaining the maximal sensitivity + specificity wins ties.

struct CutoffChoice {
  double cutoff = 0.5;
  double sens = 0.0;
  double spec = 0.0;
};

inline CutoffChoice select_cutoff(const std::vector<double>& probs, const std::vector<int>& labels,
                                  int grid_size = 500) {
  if (probs.size() != labels.size()) throw Error(ErrorKind::Input, "select_cutoff: size mismatch");
  if (grid_size < 1) throw Error(ErrorKind::Input, "select_cutoff: grid_size must be >= 1");
  std::int64_t n_pos = 0, n_neg = 0;
  for (int v : labels) {
    if (v == 1) ++n_pos;
    else if (v == -1) ++n_neg;
    else throw Error(ErrorKind::Input, "select_cutoff: labels must be -1 or +1");
  }
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorKind::Degenerate, "select_cutoff: labels are single-class");

  CutoffChoice best;
  double best_sum = -1.0;
  for (int t = 1; t <= grid_size; ++t) {
    double cut = static_cast<double>(t) / (grid_size + 1);
    std::int64_t tp = 0, tn = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] >= cut) {
        if (labels[i] == 1) ++tp;
      } else {
        if (labels[i] == -1) ++tn;
      }
    }
    double sens = static_cast<double>(tp) / n_pos;
    double spec = static_cast<double>(tn) / n_neg;
    if (sens + spec > best_sum + 1e-15) {
      best_sum = sens + spec;
      best.cutoff = cut;
      best.sens = sens;
      best.spec = spec;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Calibrated per-classifier parameters and the likelihood weights
//   alpha = sens * spec / ((1 - sens) * (1 - spec))
//   gamma = sens * (1 - sens) / (spec * (1 - spec))

inline std::pair<double, double> calibration_weights(double sens, double spec) {
  if (!(sens > 0.0 && sens < 1.0 && spec > 0.0 && spec < 1.0))
    throw Error(ErrorKind::Input, "calibration_weights: sens and spec must lie in (0,1)");
  double alpha = sens * spec / ((1.0 - sens) * (1.0 - spec));
  double gamma = sens * (1.0 - sens) / (spec * (1.0 - spec));
  return {alpha, gamma};
}

struct CalibrationParams {
  std::string outcome;
  double cutoff = 0.5;
  double sens = 0.0;
  double spec = 0.0;
  double auc_cv = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  int groups_used = 0;
  int groups_skipped = 0;
  std::vector<std::string> warnings;

  void validate() const {
    if (!(cutoff > 0.0 && cutoff < 1.0))
      throw Error(ErrorKind::Input, "calibration params: cutoff must lie in (0,1)");
    auto [a, g] = calibration_weights(sens, spec);
    if (std::fabs(a - alpha) > 1e-12 * std::max(1.0, std::fabs(alpha)) ||
        std::fabs(g - gamma) > 1e-12 * std::max(1.0, std::fabs(gamma)))
      throw Error(ErrorKind::Input, "calibration params: alpha/gamma inconsistent with sens/spec");
  }
};

struct CalibrationOptions {
  int k_groups = 10;
  int grid_size = 500;
  std::uint64_t seed = 0;
  bool honest_refit = false;           // refit the model per group on its complement
  double refit_positive_fraction = 0.2;
  LogisticOptions logistic;
};

// The estimation cohort is partitioned into k groups; the supplied model (fit
// upstream on the undersampled estimation set) scores each group. A group
// missing either class is skipped with a warning; more than k/2 skips is an
// error. The outcome cutoff is the mean of per-group cutoffs, and the final
// sens / spec / AUC are means of per-group values at that fixed cutoff,
// clipped to [1e-6, 1 - 1e-6].
inline CalibrationParams calibrate_outcome(const Cohort& estimation, const std::string& outcome,
                                           const LogisticModel& model,
                                           const std::vector<int>& column_indices,
                                           const CalibrationOptions& opts = CalibrationOptions()) {
  if (opts.k_groups < 2) throw Error(ErrorKind::Input, "calibrate: k_groups must be >= 2");
  int ko = estimation.outcome_index(outcome);
  std::vector<std::vector<int>> groups =
      partition_groups(estimation.n(), opts.k_groups, stream_seed(opts.seed, "calibrate:" + outcome));

  CalibrationParams out;
  out.outcome = outcome;

  // Per-group probabilities under either the shared model or an honest refit.
  std::vector<std::vector<double>> group_probs(groups.size());
  std::vector<std::vector<int>> group_labels(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const LogisticModel* scorer = &model;
    LogisticModel refit;
    if (opts.honest_refit) {
      std::vector<char> in_group(estimation.n(), 0);
      for (int i : groups[g]) in_group[i] = 1;
      std::vector<int> rest;
      for (int i = 0; i < estimation.n(); ++i)
        if (!in_group[i]) rest.push_back(i);
      Cohort complement = subset(estimation, rest);
      UndersamplePlan plan{opts.refit_positive_fraction,
                           stream_seed(opts.seed, "calibrate-refit:" + outcome + ":" + std::to_string(g))};
      Cohort balanced = undersample(complement, outcome, plan);
      Eigen::MatrixXd X(balanced.n(), column_indices.size());
      for (int i = 0; i < balanced.n(); ++i)
        X.row(i) = subject_features(balanced, balanced.subjects[i], column_indices).transpose();
      refit = fit_logistic(X, balanced.outcome_labels(outcome), opts.logistic);
      scorer = &refit;
    }
    for (int i : groups[g]) {
      group_probs[g].push_back(
          scorer->predict(subject_features(estimation, estimation.subjects[i], column_indices)));
      group_labels[g].push_back(estimation.subjects[i].y[ko]);
    }
  }

  std::vector<int> usable;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    bool pos = false, neg = false;
    for (int v : group_labels[g]) (v == 1 ? pos : neg) = true;
    if (pos && neg) {
      usable.push_back(static_cast<int>(g));
    } else {
      ++out.groups_skipped;
      out.warnings.push_back("calibration group " + std::to_string(g) + " skipped: single-class labels");
    }
  }
  if (out.groups_skipped > opts.k_groups / 2)
    throw Error(ErrorKind::Calibration, "calibrate: " + std::to_string(out.groups_skipped) + " of " +
                                            std::to_string(opts.k_groups) + " groups unusable");
  out.groups_used = static_cast<int>(usable.size());

  double cut_sum = 0.0;
  for (int g : usable)
    cut_sum += select_cutoff(group_probs[g], group_labels[g], opts.grid_size).cutoff;
  out.cutoff = cut_sum / usable.size();

  double sens_sum = 0.0, spec_sum = 0.0, auc_sum = 0.0;
  for (int g : usable) {
    std::int64_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < group_probs[g].size(); ++i) {
      bool predicted = group_probs[g][i] >= out.cutoff;
      if (group_labels[g][i] == 1) (predicted ? tp : fn)++;
      else (predicted ? fp : tn)++;
    }
    sens_sum += static_cast<double>(tp) / (tp + fn);
    spec_sum += static_cast<double>(tn) / (tn + fp);
    auc_sum += auc(group_probs[g], group_labels[g]);
  }
  out.sens = sens_sum / usable.size();
  out.spec = spec_sum / usable.size();
  out.auc_cv = auc_sum / usable.size();

  auto clip = [&out](double v, const char* what) {
    double c = std::clamp(v, 1e-6, 1.0 - 1e-6);
    if (c != v) out.warnings.push_back(std::string(what) + " clipped to keep weights finite");
    return c;
  };
  out.sens = clip(out.sens, "sensitivity");
  out.spec = clip(out.spec, "specificity");
  auto [alpha, gamma] = calibration_weights(out.sens, out.spec);
  out.alpha = alpha;
  out.gamma = gamma;
  return out;
}

}  // namespace corisk
