// Determinant selection for one outcome, in four phases: configured a-priori
// exclusions, low-prevalence filter, univariate protective screen, and the
// split-count importance test; followed by the effect-reversal probe and the
// multivariate significance finalization.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "corisk/boosting.hpp"
#include "corisk/calibration.hpp"
#include "corisk/data.hpp"
#include "corisk/error.hpp"
#include "corisk/stats.hpp"

namespace corisk {

struct SelectionConfig {
  std::vector<std::string> apriori_exclude;
  std::vector<std::string> forced_keep;  // survive every phase except the final significance rule
  double prevalence_threshold = 0.01;    // strict <, binary determinants only
  double protective_level = 0.95;
  double importance_alpha = 0.05;
  double significance_level = 0.05;
  QMode q_mode = QMode::Colsample;
  BoostConfig boost;
  bool tune = false;
  TuneGrid tune_grid;
  int tune_folds = 5;
  UndersamplePlan undersample_plan;
  LogisticOptions logistic;
};

struct FilterResult {
  std::vector<std::string> kept;
  std::vector<std::string> removed;
  std::vector<std::string> flagged;  // kept despite a degenerate table
};

namespace detail {

inline bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace detail

// Binary determinants with prevalence strictly below the threshold are
// removed; count and categorical determinants (and forced keeps) are exempt.
inline FilterResult prevalence_filter(const Cohort& basis, const std::vector<std::string>& candidates,
                                      double threshold, const std::vector<std::string>& forced_keep = {}) {
  if (!(threshold >= 0.0 && threshold < 1.0))
    throw Error(ErrorKind::Input, "prevalence_filter: threshold must lie in [0,1)");
  FilterResult r;
  for (const auto& name : candidates) {
    const Variable& v = basis.variable(name);
    bool removable = v.kind == VarKind::Binary && !v.is_sex && !detail::contains(forced_keep, name);
    if (removable && basis.column_mean(v.columns[0]) < threshold) r.removed.push_back(name);
    else r.kept.push_back(name);
  }
  return r;
}

// Univariate protective screen: a binary (or dichotomized count) determinant
// whose odds-ratio interval lies entirely below 1 is removed. Categorical
// determinants and forced keeps pass through; a degenerate table keeps the
// determinant with a flag.
inline FilterResult protective_filter(const Cohort& view, const std::string& outcome,
                                      const std::vector<std::string>& candidates, double level = 0.95,
                                      const std::vector<std::string>& forced_keep = {}) {
  FilterResult r;
  int ko = view.outcome_index(outcome);
  for (const auto& name : candidates) {
    const Variable& v = view.variable(name);
    if (v.kind == VarKind::Categorical || v.is_sex || detail::contains(forced_keep, name)) {
      r.kept.push_back(name);
      continue;
    }
    int col = v.columns[0];
    double a = 0, b = 0, c2 = 0, d = 0;
    for (const auto& rec : view.subjects) {
      bool exposed = rec.x[col] > 0.0;
      bool event = rec.y[ko] == 1;
      if (exposed && event) ++a;
      else if (exposed) ++b;
      else if (event) ++c2;
      else ++d;
    }
    try {
      OddsRatio orr = odds_ratio(a, b, c2, d, level);
      if (orr.high < 1.0) r.removed.push_back(name);
      else r.kept.push_back(name);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate) throw;
      r.kept.push_back(name);
      r.flagged.push_back(name);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Effect-reversal probe: fit the determinant alone, then add the remaining
// selected determinants one at a time in descending |Pearson correlation|
// with the probed determinant (ties keep declaration order), stopping at the
// first coefficient sign flip.

struct ProbeResult {
  std::string determinant;
  bool reversed = false;
  bool inconclusive = false;
  int univariate_sign = 0;
  std::vector<std::string> sequence;  // covariates added, in order
  std::string flipped_at;
};

namespace detail {

inline LogisticModel fit_vars(const Cohort& c, const std::string& outcome,
                              const std::vector<std::string>& vars, const LogisticOptions& opt) {
  DesignMatrix d = design_matrix(c, vars);
  return fit_logistic(d.X, c.outcome_labels(outcome), opt, d.column_names);
}

inline int first_column_offset(const Cohort& c, const std::vector<std::string>& vars,
                               const std::string& target) {
  int off = 0;
  for (const auto& name : vars) {
    if (name == target) return off;
    off += static_cast<int>(c.variable(name).columns.size());
  }
  throw Error(ErrorKind::Input, "variable not in list: " + target);
}

}  // namespace detail

inline ProbeResult reversal_probe(const Cohort& estimation, const std::string& outcome,
                                  const std::string& determinant,
                                  const std::vector<std::string>& covariates,
                                  const LogisticOptions& opt = LogisticOptions()) {
  ProbeResult pr;
  pr.determinant = determinant;
  const Variable& dvar = estimation.variable(determinant);
  if (dvar.kind == VarKind::Categorical) {
    pr.inconclusive = true;
    return pr;
  }
  try {
    LogisticModel uni = detail::fit_vars(estimation, outcome, {determinant}, opt);
    double c0 = uni.beta[1];
    pr.univariate_sign = c0 > 0.0 ? 1 : (c0 < 0.0 ? -1 : 0);
    if (pr.univariate_sign == 0) {
      pr.inconclusive = true;
      return pr;
    }

    // Order covariates by descending |corr| with the probed determinant
    // (stable sort keeps declaration order on ties).
    std::vector<double> dcol = estimation.column_values(dvar.columns[0]);
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& name : covariates) {
      if (name == determinant) continue;
      double best = 0.0;
      for (int col : estimation.variable(name).columns)
        best = std::max(best, std::fabs(pearson(dcol, estimation.column_values(col))));
      ranked.emplace_back(best, name);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });

    std::vector<std::string> vars = {determinant};
    for (const auto& [corr, name] : ranked) {
      vars.push_back(name);
      pr.sequence.push_back(name);
      LogisticModel m = detail::fit_vars(estimation, outcome, vars, opt);
      int off = detail::first_column_offset(estimation, vars, determinant);
      double coef = m.beta[off + 1];
      int sign = coef > 0.0 ? 1 : (coef < 0.0 ? -1 : 0);
      if (sign != 0 && sign != pr.univariate_sign) {
        pr.reversed = true;
        pr.flipped_at = name;
        return pr;
      }
    }
  } catch (const Error&) {
    pr.inconclusive = true;  // fit failure keeps the determinant, flagged
  }
  return pr;
}

// ---------------------------------------------------------------------------
// Full per-outcome selection

struct SelectionTrace {
  std::string outcome;
  std::vector<std::string> candidates;
  std::vector<std::string> removed_apriori;
  std::vector<std::string> removed_low_prevalence;
  std::vector<std::string> removed_protective;
  ImportanceReport importance;
  std::vector<std::string> importance_selected;
  std::vector<std::string> removed_importance;
  std::vector<ProbeResult> probes;
  std::vector<std::string> removed_reversal;
  std::vector<std::string> removed_insignificant;
  std::vector<std::string> final_determinants;
  std::vector<std::string> warnings;
  bool tuned = false;
  BoostConfig boost_used;
};

struct SelectionResult {
  SelectionTrace trace;
  LogisticModel model;            // refit on the final determinant set
  std::vector<std::string> final_variables;
  std::vector<int> final_columns;  // encoded column indices for scoring
  Cohort balanced;                 // undersampled estimation set used for fits
};

inline SelectionResult run_selection(const Cohort& train_view, const std::string& outcome,
                                     const SelectionConfig& config,
                                     const Cohort* prevalence_basis = nullptr) {
  const Cohort& basis = prevalence_basis ? *prevalence_basis : train_view;
  SelectionResult res;
  SelectionTrace& tr = res.trace;
  tr.outcome = outcome;

  for (const auto& v : train_view.variables) tr.candidates.push_back(v.name);

  std::vector<std::string> pool;
  for (const auto& name : tr.candidates) {
    if (detail::contains(config.apriori_exclude, name)) tr.removed_apriori.push_back(name);
    else pool.push_back(name);
  }

  FilterResult prev = prevalence_filter(basis, pool, config.prevalence_threshold, config.forced_keep);
  tr.removed_low_prevalence = prev.removed;
  pool = prev.kept;

  FilterResult prot =
      protective_filter(train_view, outcome, pool, config.protective_level, config.forced_keep);
  tr.removed_protective = prot.removed;
  for (const auto& name : prot.flagged)
    tr.warnings.push_back("protective screen: degenerate table for '" + name + "', kept with flag");
  pool = prot.kept;
  if (pool.empty())
    throw Error(ErrorKind::Pipeline, "selection: no candidates left before the importance phase");

  // Importance phase on the boosted split counts over the pooled columns.
  DesignMatrix dm = design_matrix(train_view, pool);
  std::vector<int> labels = train_view.outcome_labels(outcome);
  BoostConfig boost_cfg = config.boost;
  if (config.tune) {
    TuneResult tuned = tune_hyperparams(dm.X, labels, config.boost, config.tune_grid, config.tune_folds,
                                        stream_seed(config.boost.seed, "tune:" + outcome));
    boost_cfg = tuned.best;
    boost_cfg.seed = config.boost.seed;
    tr.tuned = true;
  }
  tr.boost_used = boost_cfg;
  BoostModel boosted = fit_boosting(dm.X, labels, boost_cfg, dm.column_names);
  tr.importance = importance_test(boosted, config.importance_alpha, config.q_mode);

  std::map<std::string, bool> var_selected;
  for (const auto& name : pool) var_selected[name] = false;
  for (std::size_t j = 0; j < tr.importance.rows.size(); ++j) {
    if (!tr.importance.rows[j].selected) continue;
    var_selected[train_view.columns[dm.column_indices[j]].variable] = true;
  }
  std::vector<std::string> selected;
  for (const auto& name : pool) {
    if (var_selected[name] || detail::contains(config.forced_keep, name)) {
      selected.push_back(name);
      tr.importance_selected.push_back(name);
    } else {
      tr.removed_importance.push_back(name);
    }
  }
  if (selected.empty())
    throw Error(ErrorKind::Pipeline,
                "selection: importance test selected no determinants; relax importance_alpha");

  // Multivariate analysis on the undersampled estimation set.
  res.balanced = undersample(train_view, outcome, config.undersample_plan);
  LogisticModel multi = detail::fit_vars(res.balanced, outcome, selected, config.logistic);

  // Reversal screen: probe determinants whose multivariate sign differs from
  // their univariate sign (single-column determinants only).
  std::vector<std::string> keep_after_reversal;
  for (const auto& name : selected) {
    const Variable& v = res.balanced.variable(name);
    if (v.kind == VarKind::Categorical) {
      keep_after_reversal.push_back(name);
      continue;
    }
    int off = detail::first_column_offset(res.balanced, selected, name);
    double coef = multi.beta[off + 1];
    int msign = coef > 0.0 ? 1 : (coef < 0.0 ? -1 : 0);

    LogisticModel uni = detail::fit_vars(res.balanced, outcome, {name}, config.logistic);
    double u = uni.beta[1];
    int usign = u > 0.0 ? 1 : (u < 0.0 ? -1 : 0);
    if (msign == 0 || usign == 0 || msign == usign) {
      keep_after_reversal.push_back(name);
      continue;
    }
    ProbeResult pr = reversal_probe(res.balanced, outcome, name, selected, config.logistic);
    tr.probes.push_back(pr);
    if (pr.reversed) {
      tr.removed_reversal.push_back(name);
    } else {
      keep_after_reversal.push_back(name);
      if (pr.inconclusive)
        tr.warnings.push_back("reversal probe inconclusive for '" + name + "', kept with flag");
    }
  }
  if (keep_after_reversal.empty())
    throw Error(ErrorKind::Pipeline, "selection: every determinant reversed; relax selection thresholds");

  // Finalize on multivariate Wald significance. A categorical determinant
  // stays when any non-reference level is significant.
  LogisticModel refit = detail::fit_vars(res.balanced, outcome, keep_after_reversal, config.logistic);
  std::vector<std::string> final_vars;
  int off = 0;
  for (const auto& name : keep_after_reversal) {
    const Variable& v = res.balanced.variable(name);
    int ncols = static_cast<int>(v.columns.size());
    bool significant = false;
    for (int j = 0; j < ncols; ++j)
      significant = significant || refit.wald_p(off + j) < config.significance_level;
    if (significant) final_vars.push_back(name);
    else tr.removed_insignificant.push_back(name);
    off += ncols;
  }
  if (final_vars.empty())
    throw Error(ErrorKind::Pipeline,
                "selection: final determinant set is empty; relax significance_level or importance_alpha");

  tr.final_determinants = final_vars;
  res.final_variables = final_vars;
  res.model = detail::fit_vars(res.balanced, outcome, final_vars, config.logistic);
  DesignMatrix fd = design_matrix(train_view, final_vars);
  res.final_columns = fd.column_indices;
  return res;
}

}  // namespace corisk
