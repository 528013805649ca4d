// JSON round-trips for fitted models, calibration parameters, normalization
// constants and evaluation reports. These are the on-disk formats the CLI
// writes and the frozen-parameter scoring path reads back.
#pragma once

#include <string>
#include <vector>

#include "corisk/boosting.hpp"
#include "corisk/calibration.hpp"
#include "corisk/error.hpp"
#include "corisk/evaluate.hpp"
#include "corisk/selection.hpp"
#include "corisk/stats.hpp"
#include "vendor/json.hpp"

namespace corisk {

// --------------------------------------------------------------------------
// Logistic models.

namespace detail {

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

// Runs a JSON reader, rethrowing library exceptions as Parse errors so every
// loader reports malformed documents the same way.
template <typename Fn>
auto read_json(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string(what) + ": " + e.what());
  }
}

}  // namespace detail

inline nlohmann::json logistic_to_json(const LogisticModel& m) {
  nlohmann::json j;
  j["feature_names"] = m.feature_names;
  j["beta"] = detail::to_std(m.beta);
  j["std_errors"] = detail::to_std(m.std_errors);
  j["converged"] = m.converged;
  j["separation_detected"] = m.separation_detected;
  j["n_iterations"] = m.n_iterations;
  j["ridge_used"] = m.ridge_used;
  j["warnings"] = m.warnings;
  return j;
}

inline LogisticModel logistic_from_json(const nlohmann::json& j) {
  return detail::read_json("model", [&] {
    LogisticModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.beta = detail::to_eigen(j.at("beta").get<std::vector<double>>());
    m.std_errors = detail::to_eigen(j.value("std_errors", std::vector<double>{}));
    m.converged = j.value("converged", true);
    m.separation_detected = j.value("separation_detected", false);
    m.n_iterations = j.value("n_iterations", 0);
    m.ridge_used = j.value("ridge_used", 0.0);
    m.warnings = j.value("warnings", std::vector<std::string>{});
    if (m.beta.size() != static_cast<Eigen::Index>(m.feature_names.size()) + 1)
      throw Error(ErrorKind::Parse, "model: beta length must be feature count + 1");
    return m;
  });
}

// --------------------------------------------------------------------------
// Calibration parameters.

inline nlohmann::json calibration_to_json(const CalibrationParams& p) {
  nlohmann::json j;
  j["outcome"] = p.outcome;
  j["cutoff"] = p.cutoff;
  j["sens"] = p.sens;
  j["spec"] = p.spec;
  j["auc_cv"] = p.auc_cv;
  j["alpha"] = p.alpha;
  j["gamma"] = p.gamma;
  j["groups_used"] = p.groups_used;
  j["groups_skipped"] = p.groups_skipped;
  j["warnings"] = p.warnings;
  return j;
}

inline CalibrationParams calibration_from_json(const nlohmann::json& j) {
  return detail::read_json("calibration params", [&] {
    CalibrationParams p;
    p.outcome = j.at("outcome").get<std::string>();
    p.cutoff = j.at("cutoff").get<double>();
    p.sens = j.at("sens").get<double>();
    p.spec = j.at("spec").get<double>();
    p.auc_cv = j.value("auc_cv", 0.0);
    p.alpha = j.at("alpha").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.groups_used = j.value("groups_used", 0);
    p.groups_skipped = j.value("groups_skipped", 0);
    p.warnings = j.value("warnings", std::vector<std::string>{});
    p.validate();
    return p;
  });
}

// --------------------------------------------------------------------------
// The frozen-parameter bundle: per-outcome model plus calibration weights.
// This is everything needed to score a new cohort.

struct FrozenOutcome {
  std::string outcome;
  LogisticModel model;
  CalibrationParams params;
};

struct FrozenBundle {
  std::vector<FrozenOutcome> outcomes;
};

inline nlohmann::json frozen_to_json(const FrozenBundle& b) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& o : b.outcomes) {
    nlohmann::json j = calibration_to_json(o.params);
    j["model"] = logistic_to_json(o.model);
    arr.push_back(j);
  }
  return nlohmann::json{{"version", "0.1.0"}, {"outcomes", arr}};
}

inline FrozenBundle frozen_from_json(const nlohmann::json& j) {
  return detail::read_json("params", [&] {
    FrozenBundle b;
    for (const auto& e : j.at("outcomes")) {
      FrozenOutcome o;
      o.params = calibration_from_json(e);
      o.model = logistic_from_json(e.at("model"));
      o.outcome = o.params.outcome;
      b.outcomes.push_back(std::move(o));
    }
    if (b.outcomes.empty()) throw Error(ErrorKind::Parse, "params: no outcomes");
    return b;
  });
}

// --------------------------------------------------------------------------
// Normalization constants.

inline nlohmann::json normalization_to_json(double min_used, double max_used) {
  return nlohmann::json{{"min", min_used}, {"max", max_used}};
}

inline std::pair<double, double> normalization_from_json(const nlohmann::json& j) {
  return detail::read_json("normalization", [&]() -> std::pair<double, double> {
    double lo = j.at("min").get<double>();
    double hi = j.at("max").get<double>();
    if (!(hi > lo)) throw Error(ErrorKind::Parse, "normalization: max must exceed min");
    return {lo, hi};
  });
}

// --------------------------------------------------------------------------
// Selection traces and importance tables.

inline nlohmann::json importance_to_json(const ImportanceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& f : r.rows)
    rows.push_back({{"feature", f.feature},
                    {"count", f.count},
                    {"theta_hat", f.theta_hat},
                    {"p_value", f.p_value},
                    {"selected", f.selected}});
  return nlohmann::json{{"rows", rows},
                        {"n_total_splits", r.n_total_splits},
                        {"q_effective", r.q_effective},
                        {"theta0", r.theta0},
                        {"alpha", r.alpha}};
}

inline nlohmann::json probe_to_json(const ProbeResult& p) {
  return nlohmann::json{{"determinant", p.determinant},
                        {"reversed", p.reversed},
                        {"inconclusive", p.inconclusive},
                        {"univariate_sign", p.univariate_sign},
                        {"sequence", p.sequence},
                        {"flipped_at", p.flipped_at}};
}

inline nlohmann::json trace_to_json(const SelectionTrace& t) {
  nlohmann::json j;
  j["outcome"] = t.outcome;
  j["candidates"] = t.candidates;
  j["removed_apriori"] = t.removed_apriori;
  j["removed_low_prevalence"] = t.removed_low_prevalence;
  j["removed_protective"] = t.removed_protective;
  j["importance"] = importance_to_json(t.importance);
  j["importance_selected"] = t.importance_selected;
  j["removed_importance"] = t.removed_importance;
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : t.probes) probes.push_back(probe_to_json(p));
  j["probes"] = probes;
  j["removed_reversal"] = t.removed_reversal;
  j["removed_insignificant"] = t.removed_insignificant;
  j["final_determinants"] = t.final_determinants;
  j["warnings"] = t.warnings;
  j["tuned"] = t.tuned;
  return j;
}

// --------------------------------------------------------------------------
// Evaluation report pieces.

inline nlohmann::json metrics_to_json(const BinaryMetrics& m) {
  nlohmann::json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  j["sens"] = m.sens;
  j["spec"] = m.spec;
  j["fnr"] = m.fnr;
  j["precision"] = m.precision;
  j["f1_sens_spec"] = m.f1_sens_spec;
  j["f1_standard"] = m.f1_standard;
  j["degenerate"] = m.degenerate;
  if (!m.warnings.empty()) j["warnings"] = m.warnings;
  return j;
}

inline nlohmann::json distribution_to_json(const DistributionStats& s) {
  return nlohmann::json{{"n", s.n},
                        {"mean", s.mean},
                        {"median", s.median},
                        {"variance", s.variance},
                        {"variance_population", s.variance_population}};
}

inline nlohmann::json event_table_to_json(const std::vector<EventCountRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"n_events", r.n_events},
                   {"count", r.count},
                   {"mean", r.mean},
                   {"q1", r.q1},
                   {"median", r.median},
                   {"q3", r.q3}});
  return arr;
}

inline nlohmann::json fn_audit_to_json(const FnAudit& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : a.rows)
    rows.push_back({{"stratum", r.stratum},
                    {"tp", r.tp},
                    {"fp", r.fp},
                    {"tn", r.tn},
                    {"fn", r.fn},
                    {"fn_total", r.fn_total},
                    {"fn_share", r.fn_share},
                    {"fn_share_ci", {r.fn_ci.low, r.fn_ci.high}},
                    {"stratum_count", r.stratum_count},
                    {"population", r.population},
                    {"prevalence", r.prevalence},
                    {"prevalence_ci", {r.prev_ci.low, r.prev_ci.high}},
                    {"flagged", r.flagged}});
  return nlohmann::json{{"rows", rows}, {"warnings", a.warnings}};
}

inline nlohmann::json standardized_to_json(const StandardizedMeans& s) {
  nlohmann::json by_sex = nlohmann::json::array();
  for (const auto& [sex, value] : s.by_sex) by_sex.push_back({{"sex", sex}, {"mean", value}});
  return nlohmann::json{{"by_sex", by_sex}, {"warnings", s.warnings}};
}

}  // namespace corisk
