// End-to-end orchestration: per-outcome exclusion, split, determinant
// selection, calibration, then combined scoring and evaluation of the held-out
// set. Also the frozen-parameter scoring path used on new cohorts.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "corisk/aggregate.hpp"
#include "corisk/artifacts.hpp"
#include "corisk/calibration.hpp"
#include "corisk/data.hpp"
#include "corisk/error.hpp"
#include "corisk/evaluate.hpp"
#include "corisk/rng.hpp"
#include "corisk/selection.hpp"
#include "corisk/stats.hpp"

namespace corisk {

// --------------------------------------------------------------------------
// Scoring a cohort under a frozen bundle. Model features are resolved by
// encoded column name, so the cohort only needs matching columns, not a
// matching layout.

struct ScoredCohort {
  std::vector<std::string> ids;
  std::vector<std::string> outcomes;
  std::vector<std::vector<double>> probs;  // [outcome][subject]
  std::vector<std::vector<int>> votes;     // [outcome][subject], -1/+1 at the calibrated cutoff
  std::vector<double> raw;                 // continuous combined indicator
  std::vector<int> combined;               // combined binary vote
};

inline std::vector<int> columns_for_features(const Cohort& c,
                                             const std::vector<std::string>& feature_names) {
  std::map<std::string, int> index;
  for (std::size_t j = 0; j < c.columns.size(); ++j) index[c.columns[j].name] = static_cast<int>(j);
  std::vector<int> cols;
  cols.reserve(feature_names.size());
  for (const auto& name : feature_names) {
    auto it = index.find(name);
    if (it == index.end())
      throw Error(ErrorKind::Schema, "scoring: cohort lacks encoded column '" + name + "'");
    cols.push_back(it->second);
  }
  return cols;
}

inline ScoredCohort score_cohort(const Cohort& view, const FrozenBundle& bundle) {
  if (bundle.outcomes.empty()) throw Error(ErrorKind::Input, "scoring: empty parameter bundle");
  ScoredCohort sc;
  sc.ids.reserve(view.n());
  for (const auto& rec : view.subjects) sc.ids.push_back(rec.id);

  std::vector<CalibrationParams> params;
  for (const auto& o : bundle.outcomes) {
    sc.outcomes.push_back(o.outcome);
    params.push_back(o.params);
  }

  sc.probs.assign(bundle.outcomes.size(), std::vector<double>(view.n()));
  sc.votes.assign(bundle.outcomes.size(), std::vector<int>(view.n()));
  for (std::size_t k = 0; k < bundle.outcomes.size(); ++k) {
    const FrozenOutcome& o = bundle.outcomes[k];
    std::vector<int> cols = columns_for_features(view, o.model.feature_names);
    for (int i = 0; i < view.n(); ++i) {
      double p = o.model.predict(subject_features(view, view.subjects[i], cols));
      sc.probs[k][i] = p;
      sc.votes[k][i] = p >= o.params.cutoff ? 1 : -1;
    }
  }

  sc.raw.resize(view.n());
  sc.combined.resize(view.n());
  std::vector<double> pvec(bundle.outcomes.size());
  std::vector<int> vvec(bundle.outcomes.size());
  for (int i = 0; i < view.n(); ++i) {
    for (std::size_t k = 0; k < bundle.outcomes.size(); ++k) {
      pvec[k] = sc.probs[k][i];
      vvec[k] = sc.votes[k][i];
    }
    sc.raw[i] = combine_continuous(pvec, params);
    sc.combined[i] = combine_binary(vvec, params);
  }
  return sc;
}

// --------------------------------------------------------------------------
// Full pipeline.

struct PipelineConfig {
  std::uint64_t seed = 0;
  double train_fraction = 0.75;
  std::string stratify_outcome;            // empty = simple random split
  std::vector<std::string> outcomes;       // empty = every declared outcome
  SelectionConfig selection;
  CalibrationOptions calibration;
  std::vector<std::string> audit_strata;   // empty = every binary determinant
};

struct OutcomeResult {
  std::string outcome;
  SelectionTrace trace;
  LogisticModel model;
  CalibrationParams params;
  std::vector<std::string> final_variables;
  int n_train = 0;
  int n_test = 0;
  double auc_test = 0.0;   // per-outcome classifier probability on its held-out view
  double auc_super = 0.0;  // combined normalized indicator on the master held-out view
  BinaryMetrics metrics;   // on the outcome's held-out view at the calibrated cutoff
  FnAudit audit;
};

struct PipelineResult {
  std::vector<OutcomeResult> per_outcome;
  FrozenBundle frozen;

  // Combined indicator on the master held-out view (split of the full cohort).
  std::vector<std::string> test_ids;
  std::vector<double> raw;
  std::vector<double> normalized;
  double norm_min = 0.0;
  double norm_max = 0.0;
  std::vector<std::vector<int>> votes;  // [outcome][subject]
  std::vector<int> combined;

  DistributionStats score_stats;             // of the normalized indicator
  std::vector<EventCountRow> event_table;    // over fully observable held-out subjects
  StandardizedMeans standardized;
  std::vector<std::string> warnings;
};

// Each outcome gets its own exclusion-filtered view which is then split with
// the shared seed; outcomes without exclusions therefore share one identical
// master split. The combined indicator is scored on the master held-out view,
// while per-outcome metrics use each outcome's own held-out view.
inline PipelineResult run_pipeline(const Cohort& cohort, const PipelineConfig& cfg) {
  PipelineResult out;
  std::vector<std::string> outcomes = cfg.outcomes.empty() ? cohort.outcome_names : cfg.outcomes;
  if (outcomes.empty()) throw Error(ErrorKind::Input, "pipeline: cohort declares no outcomes");
  for (const auto& o : outcomes) cohort.outcome_index(o);  // validate names early

  SplitPlan plan{cfg.train_fraction, cfg.seed, cfg.stratify_outcome};

  for (const auto& outcome : outcomes) {
    Cohort view = apply_exclusion(cohort, outcome);
    Split split = split_cohort(view, plan);

    SelectionConfig sel = cfg.selection;
    sel.boost.seed = stream_seed(cfg.seed, "select:" + outcome);
    sel.undersample_plan.seed = cfg.seed;
    SelectionResult selres = run_selection(split.train, outcome, sel, &cohort);

    CalibrationOptions copt = cfg.calibration;
    copt.seed = cfg.seed;
    copt.logistic = cfg.selection.logistic;
    CalibrationParams params =
        calibrate_outcome(selres.balanced, outcome, selres.model, selres.final_columns, copt);

    OutcomeResult res;
    res.outcome = outcome;
    res.trace = std::move(selres.trace);
    res.model = selres.model;
    res.params = params;
    res.final_variables = selres.final_variables;
    res.n_train = split.train.n();
    res.n_test = split.test.n();

    std::vector<double> probs(split.test.n());
    std::vector<int> labels = split.test.outcome_labels(outcome);
    std::vector<int> preds(split.test.n());
    for (int i = 0; i < split.test.n(); ++i) {
      probs[i] = res.model.predict(
          subject_features(split.test, split.test.subjects[i], selres.final_columns));
      preds[i] = probs[i] >= params.cutoff ? 1 : -1;
    }
    res.auc_test = auc(probs, labels);
    res.metrics = evaluate_binary(preds, labels);

    std::vector<std::string> strata = cfg.audit_strata;
    if (strata.empty())
      for (const auto& v : cohort.variables)
        if (v.kind == VarKind::Binary && !v.is_sex) strata.push_back(v.name);
    res.audit = fn_audit(split.test, outcome, preds, strata);

    out.frozen.outcomes.push_back(FrozenOutcome{outcome, res.model, params});
    out.per_outcome.push_back(std::move(res));
  }

  // Combined indicator on the master held-out view.
  Split master = split_cohort(cohort, plan);
  ScoredCohort scored = score_cohort(master.test, out.frozen);
  out.test_ids = std::move(scored.ids);
  out.raw = std::move(scored.raw);
  out.votes = std::move(scored.votes);
  out.combined = std::move(scored.combined);

  Normalization norm = normalize_minmax(out.raw);
  out.normalized = std::move(norm.values);
  out.norm_min = norm.min_used;
  out.norm_max = norm.max_used;

  out.score_stats = distribution_stats(out.normalized);

  // Combined-indicator discrimination per outcome, over master held-out
  // subjects observable for that outcome.
  for (auto& res : out.per_outcome) {
    const std::string* det = cohort.exclusion_for(res.outcome);
    int ko = cohort.outcome_index(res.outcome);
    int col = det ? cohort.variable(*det).columns[0] : -1;
    std::vector<double> s;
    std::vector<int> l;
    for (int i = 0; i < master.test.n(); ++i) {
      const SubjectRecord& rec = master.test.subjects[i];
      if (col >= 0 && rec.x[col] == 1.0) continue;
      s.push_back(out.normalized[i]);
      l.push_back(rec.y[ko]);
    }
    res.auc_super = auc(s, l);
  }

  // Event-count table over held-out subjects observable for every outcome.
  std::vector<double> obs_scores;
  std::vector<int> obs_events;
  for (int i = 0; i < master.test.n(); ++i) {
    const SubjectRecord& rec = master.test.subjects[i];
    bool excluded = false;
    for (const auto& o : outcomes) {
      const std::string* det = cohort.exclusion_for(o);
      if (det && rec.x[cohort.variable(*det).columns[0]] == 1.0) { excluded = true; break; }
    }
    if (excluded) continue;
    int events = 0;
    for (const auto& o : outcomes)
      if (rec.y[cohort.outcome_index(o)] == 1) ++events;
    obs_scores.push_back(out.normalized[i]);
    obs_events.push_back(events);
  }
  if (!obs_scores.empty()) out.event_table = by_event_count(obs_scores, obs_events);
  else out.warnings.push_back("no held-out subject is observable for every outcome; event table empty");

  out.standardized = standardize_by_age(master.test, out.normalized);
  return out;
}

}  // namespace corisk
