// Subcommand front-end: generate, select, train, calibrate, score, evaluate,
// pipeline. All randomness flows from a single --seed; artifacts are written
// atomically and each gets a manifest sidecar recording inputs and hashes.
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "corisk/corisk.hpp"
#include "vendor/CLI11.hpp"

using namespace corisk;

namespace {

// ---------------------------------------------------------------------------
// Shared option bags.

struct DataOpts {
  std::string data_path;
  std::string schema_path;
};

struct SplitOpts {
  double train_fraction = 0.75;
  std::string stratify;
};

struct SelectOpts {
  std::vector<std::string> outcomes;
  bool all_outcomes = false;
  std::string boost_config;
  std::string q_mode = "colsample";
  double importance_alpha = 0.05;
  double significance_level = 0.05;
  double prevalence_threshold = 0.01;
  std::vector<std::string> forced_keep;
  std::vector<std::string> apriori_exclude;
  bool tune = false;
};

struct Invocation {
  std::string command;
  std::vector<std::string> arguments;
  std::uint64_t seed = 0;
};

RunManifest make_manifest(const Invocation& inv) {
  RunManifest m;
  m.command = inv.command;
  m.arguments = inv.arguments;
  m.seed = inv.seed;
  m.created = utc_timestamp();
  return m;
}

void emit(RunManifest m, const std::vector<std::string>& inputs,
          const std::vector<std::pair<std::string, std::string>>& outputs) {
  for (const auto& p : inputs) m.inputs.push_back(stamp_file(p));
  for (const auto& [path, content] : outputs) {
    atomic_write_text(path, content);
    m.outputs.push_back(FileStamp{path, hash_bytes(content)});
  }
  for (const auto& [path, content] : outputs) {
    (void)content;
    write_manifest(manifest_path_for(path), m);
  }
}

std::string strip_csv_ext(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
    return path.substr(0, path.size() - 4);
  return path;
}

std::string schema_sidecar_path(const std::string& csv_path) {
  return strip_csv_ext(csv_path) + ".schema.toml";
}

Cohort load_data(const DataOpts& d) {
  Schema sc = schema_from_config(parse_config_file(d.schema_path));
  return load_cohort(read_csv_file(d.data_path), sc);
}

BoostConfig boost_config_from_file(const std::string& path) {
  ConfigNode root = parse_config_file(path);
  const ConfigNode* t = root.table("boost");
  const ConfigNode& b = t ? *t : root;
  BoostConfig cfg;
  cfg.n_rounds = static_cast<int>(b.get_int("n_rounds", cfg.n_rounds));
  cfg.eta = b.get_number("eta", cfg.eta);
  cfg.max_depth = static_cast<int>(b.get_int("max_depth", cfg.max_depth));
  cfg.subsample = b.get_number("subsample", cfg.subsample);
  cfg.colsample_bytree = b.get_number("colsample_bytree", cfg.colsample_bytree);
  cfg.lambda = b.get_number("lambda", cfg.lambda);
  cfg.min_child_weight = b.get_number("min_child_weight", cfg.min_child_weight);
  cfg.validate();
  return cfg;
}

QMode parse_q_mode(const std::string& s) {
  if (s == "colsample") return QMode::Colsample;
  if (s == "total") return QMode::Total;
  throw Error(ErrorKind::Input, "--q-mode must be 'colsample' or 'total'");
}

SelectionConfig make_selection_config(const SelectOpts& o, std::uint64_t seed) {
  SelectionConfig cfg;
  cfg.apriori_exclude = o.apriori_exclude;
  cfg.forced_keep = o.forced_keep;
  cfg.prevalence_threshold = o.prevalence_threshold;
  cfg.importance_alpha = o.importance_alpha;
  cfg.significance_level = o.significance_level;
  cfg.q_mode = parse_q_mode(o.q_mode);
  if (!o.boost_config.empty()) cfg.boost = boost_config_from_file(o.boost_config);
  cfg.boost.seed = seed;
  cfg.tune = o.tune;
  cfg.undersample_plan.seed = seed;
  return cfg;
}

std::vector<std::string> chosen_outcomes(const Cohort& c, const SelectOpts& o) {
  if (o.all_outcomes || o.outcomes.empty()) return c.outcome_names;
  for (const auto& name : o.outcomes) c.outcome_index(name);
  return o.outcomes;
}

std::string importance_csv(const ImportanceReport& r) {
  CsvTable t;
  t.header = {"feature", "count", "theta_hat", "p_value", "selected"};
  for (const auto& f : r.rows)
    t.rows.push_back({f.feature, format_number(static_cast<double>(f.count)),
                      format_number(f.theta_hat), format_number(f.p_value),
                      f.selected ? "1" : "0"});
  return write_csv_string(t);
}

std::string scores_csv(const ScoredCohort& sc, const std::vector<double>& normalized,
                       const std::vector<int>& combined) {
  CsvTable t;
  t.header = {"id", "raw", "normalized"};
  for (const auto& o : sc.outcomes) t.header.push_back("binary_" + o);
  t.header.push_back("combined");
  for (std::size_t i = 0; i < sc.ids.size(); ++i) {
    std::vector<std::string> row = {sc.ids[i], format_number(sc.raw[i]),
                                    format_number(normalized[i])};
    for (std::size_t k = 0; k < sc.outcomes.size(); ++k)
      row.push_back(sc.votes[k][i] == 1 ? "1" : "-1");
    row.push_back(combined[i] == 1 ? "1" : "-1");
    t.rows.push_back(row);
  }
  return write_csv_string(t);
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// Reconstructs the balanced estimation set a frozen model was fit on: the
// outcome's exclusion view, the shared-seed split, then undersampling.
Cohort balanced_estimation_set(const Cohort& cohort, const std::string& outcome,
                               const SplitOpts& split, std::uint64_t seed) {
  Cohort view = apply_exclusion(cohort, outcome);
  SplitPlan plan{split.train_fraction, seed, split.stratify};
  Split s = split_cohort(view, plan);
  UndersamplePlan up;
  up.seed = seed;
  return undersample(s.train, outcome, up);
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
  std::string spec_path;
  std::string out_csv;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int run_generate(const GenerateOpts& o, const Invocation& inv) {
  GeneratorSpec spec = generator_spec_from_config(parse_config_file(o.spec_path));
  if (o.seed_given) spec.seed = o.seed;
  Cohort c = generate(spec);

  std::string schema_path = schema_sidecar_path(o.out_csv);
  RunManifest m = make_manifest(inv);
  m.seed = spec.seed;
  emit(m, {o.spec_path},
       {{o.out_csv, write_csv_string(save_cohort(c))},
        {schema_path, schema_to_config_string(schema_for_cohort(c))}});

  std::printf("generated %d subjects, %zu determinants, %zu outcomes -> %s\n", c.n(),
              c.variables.size(), c.outcome_names.size(), o.out_csv.c_str());
  for (const auto& name : c.outcome_names) {
    std::vector<int> y = c.outcome_labels(name);
    int pos = 0;
    for (int v : y) pos += v == 1;
    std::printf("  outcome %s: prevalence %.4f\n", name.c_str(),
                static_cast<double>(pos) / c.n());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// select

struct SelectCmdOpts {
  DataOpts data;
  SplitOpts split;
  SelectOpts sel;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

int run_select(const SelectCmdOpts& o, const Invocation& inv) {
  Cohort cohort = load_data(o.data);
  std::vector<std::string> outcomes = chosen_outcomes(cohort, o.sel);

  nlohmann::json sel_json = nlohmann::json::array();
  std::vector<std::pair<std::string, std::string>> outputs;
  for (const auto& outcome : outcomes) {
    Cohort view = apply_exclusion(cohort, outcome);
    SplitPlan plan{o.split.train_fraction, o.seed, o.split.stratify};
    Split split = split_cohort(view, plan);

    SelectionConfig cfg = make_selection_config(o.sel, o.seed);
    cfg.boost.seed = stream_seed(o.seed, "select:" + outcome);
    SelectionResult res = run_selection(split.train, outcome, cfg, &cohort);

    outputs.emplace_back(o.out_dir + "/importance_" + outcome + ".csv",
                         importance_csv(res.trace.importance));
    outputs.emplace_back(o.out_dir + "/trace_" + outcome + ".json",
                         json_text(trace_to_json(res.trace)));
    sel_json.push_back({{"outcome", outcome}, {"determinants", res.final_variables}});
    std::printf("outcome %s: %zu determinants selected\n", outcome.c_str(),
                res.final_variables.size());
  }
  outputs.emplace_back(o.out_dir + "/selection.json",
                       json_text(nlohmann::json{{"outcomes", sel_json}}));

  std::vector<std::string> inputs = {o.data.data_path, o.data.schema_path};
  if (!o.sel.boost_config.empty()) inputs.push_back(o.sel.boost_config);
  emit(make_manifest(inv), inputs, outputs);
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  DataOpts data;
  SplitOpts split;
  std::string selection_path;
  std::uint64_t seed = 0;
  std::string out_path = "models.json";
};

int run_train(const TrainOpts& o, const Invocation& inv) {
  Cohort cohort = load_data(o.data);
  nlohmann::json sel = nlohmann::json::parse(read_text_file(o.selection_path));

  nlohmann::json models = nlohmann::json::array();
  for (const auto& entry : sel.at("outcomes")) {
    std::string outcome = entry.at("outcome").get<std::string>();
    auto determinants = entry.at("determinants").get<std::vector<std::string>>();
    cohort.outcome_index(outcome);

    Cohort balanced = balanced_estimation_set(cohort, outcome, o.split, o.seed);
    DesignMatrix d = design_matrix(balanced, determinants);
    LogisticModel model =
        fit_logistic(d.X, balanced.outcome_labels(outcome), LogisticOptions(), d.column_names);
    models.push_back({{"outcome", outcome},
                      {"determinants", determinants},
                      {"model", logistic_to_json(model)}});
    std::printf("outcome %s: model fit on %d balanced subjects (%zu features)\n",
                outcome.c_str(), balanced.n(), d.column_names.size());
  }

  emit(make_manifest(inv), {o.data.data_path, o.data.schema_path, o.selection_path},
       {{o.out_path, json_text(nlohmann::json{{"outcomes", models}})}});
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOpts {
  DataOpts data;
  SplitOpts split;
  std::string models_path;
  std::uint64_t seed = 0;
  bool honest_refit = false;
  int k_groups = 10;
  std::string out_path = "params.json";
};

int run_calibrate(const CalibrateOpts& o, const Invocation& inv) {
  Cohort cohort = load_data(o.data);
  nlohmann::json models = nlohmann::json::parse(read_text_file(o.models_path));

  FrozenBundle bundle;
  for (const auto& entry : models.at("outcomes")) {
    std::string outcome = entry.at("outcome").get<std::string>();
    LogisticModel model = logistic_from_json(entry.at("model"));
    cohort.outcome_index(outcome);

    Cohort balanced = balanced_estimation_set(cohort, outcome, o.split, o.seed);
    CalibrationOptions copt;
    copt.k_groups = o.k_groups;
    copt.seed = o.seed;
    copt.honest_refit = o.honest_refit;
    CalibrationParams params = calibrate_outcome(
        balanced, outcome, model, columns_for_features(balanced, model.feature_names), copt);
    std::printf("outcome %s: c=%.4f sens=%.4f spec=%.4f alpha=%.4f gamma=%.4f\n",
                outcome.c_str(), params.cutoff, params.sens, params.spec, params.alpha,
                params.gamma);
    bundle.outcomes.push_back(FrozenOutcome{outcome, model, params});
  }

  emit(make_manifest(inv), {o.data.data_path, o.data.schema_path, o.models_path},
       {{o.out_path, json_text(frozen_to_json(bundle))}});
  return 0;
}

// ---------------------------------------------------------------------------
// score

struct ScoreOpts {
  std::string in_csv;
  std::string schema_path;
  std::string params_path;
  std::string norm_path;  // optional: frozen normalization constants
  std::string out_csv = "scores.csv";
};

int run_score(const ScoreOpts& o, const Invocation& inv) {
  Schema sc = schema_from_config(parse_config_file(o.schema_path));
  Cohort cohort = load_cohort(read_csv_file(o.in_csv), sc);
  FrozenBundle bundle = frozen_from_json(nlohmann::json::parse(read_text_file(o.params_path)));

  ScoredCohort scored = score_cohort(cohort, bundle);
  Normalization norm;
  std::vector<std::string> inputs = {o.in_csv, o.schema_path, o.params_path};
  std::vector<std::pair<std::string, std::string>> outputs;
  if (o.norm_path.empty()) {
    norm = normalize_minmax(scored.raw);
    outputs.emplace_back(strip_csv_ext(o.out_csv) + ".norm.json",
                         json_text(normalization_to_json(norm.min_used, norm.max_used)));
  } else {
    auto [lo, hi] = normalization_from_json(nlohmann::json::parse(read_text_file(o.norm_path)));
    norm = apply_normalization(scored.raw, lo, hi);
    inputs.push_back(o.norm_path);
    if (norm.n_clamped_low + norm.n_clamped_high > 0)
      std::printf("note: %lld scores clamped to [0,1] under the frozen normalization\n",
                  static_cast<long long>(norm.n_clamped_low + norm.n_clamped_high));
  }
  outputs.emplace_back(o.out_csv, scores_csv(scored, norm.values, scored.combined));

  emit(make_manifest(inv), inputs, outputs);
  std::printf("scored %d subjects over %zu outcomes -> %s\n", cohort.n(),
              bundle.outcomes.size(), o.out_csv.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOpts {
  std::string scores_csv;
  std::string cohort_csv;
  std::string schema_path;
  std::string out_path = "report.json";
  std::string plot_dir;  // optional histogram / violin data
};

int run_evaluate(const EvaluateOpts& o, const Invocation& inv) {
  Schema sc = schema_from_config(parse_config_file(o.schema_path));
  Cohort cohort = load_cohort(read_csv_file(o.cohort_csv), sc);
  CsvTable scores = read_csv_file(o.scores_csv);

  auto col = [&](const std::string& name) {
    for (std::size_t j = 0; j < scores.header.size(); ++j)
      if (scores.header[j] == name) return static_cast<int>(j);
    throw Error(ErrorKind::Schema, "scores file lacks column '" + name + "'");
  };
  int id_col = col("id");
  int norm_col = col("normalized");

  std::vector<std::string> outcomes;
  std::vector<int> vote_cols;
  for (const auto& name : cohort.outcome_names) {
    for (std::size_t j = 0; j < scores.header.size(); ++j)
      if (scores.header[j] == "binary_" + name) {
        outcomes.push_back(name);
        vote_cols.push_back(static_cast<int>(j));
      }
  }
  if (outcomes.empty())
    throw Error(ErrorKind::Schema, "scores file has no binary_<outcome> column matching the cohort");

  std::map<std::string, int> row_of;
  for (int i = 0; i < cohort.n(); ++i) row_of[cohort.subjects[i].id] = i;
  std::vector<int> rows;
  std::vector<double> normalized;
  std::vector<std::vector<int>> votes(outcomes.size());
  for (std::size_t ri = 0; ri < scores.rows.size(); ++ri) {
    const auto& r = scores.rows[ri];
    int line_no = static_cast<int>(ri) + 2;
    auto it = row_of.find(r[id_col]);
    if (it == row_of.end())
      throw Error(ErrorKind::Input, "scores row has unknown subject id '" + r[id_col] + "'");
    rows.push_back(it->second);
    normalized.push_back(parse_double_field(r[norm_col], "normalized", line_no));
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      double v = parse_double_field(r[vote_cols[k]], scores.header[vote_cols[k]], line_no);
      if (v != 1.0 && v != -1.0)
        throw Error(ErrorKind::Input, "vote values must be -1 or 1");
      votes[k].push_back(static_cast<int>(v));
    }
  }
  Cohort view = subset(cohort, rows);

  std::vector<std::string> strata;
  for (const auto& v : cohort.variables)
    if (v.kind == VarKind::Binary && !v.is_sex) strata.push_back(v.name);

  nlohmann::json outcome_reports = nlohmann::json::array();
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const std::string& outcome = outcomes[k];
    const std::string* det = cohort.exclusion_for(outcome);
    int ko = cohort.outcome_index(outcome);
    int ex_col = det ? cohort.variable(*det).columns[0] : -1;

    std::vector<int> incl;
    for (int i = 0; i < view.n(); ++i)
      if (ex_col < 0 || view.subjects[i].x[ex_col] == 0.0) incl.push_back(i);
    if (incl.empty()) throw Error(ErrorKind::Input, "no evaluable subjects for outcome " + outcome);

    std::vector<double> s;
    std::vector<int> l, p;
    for (int i : incl) {
      s.push_back(normalized[i]);
      l.push_back(view.subjects[i].y[ko]);
      p.push_back(votes[k][i]);
    }
    Cohort oview = subset(view, incl);
    BinaryMetrics metrics = evaluate_binary(p, l);
    FnAudit audit = fn_audit(oview, outcome, p, strata);
    outcome_reports.push_back({{"outcome", outcome},
                               {"n", static_cast<std::int64_t>(incl.size())},
                               {"auc_indicator", auc(s, l)},
                               {"metrics", metrics_to_json(metrics)},
                               {"fn_audit", fn_audit_to_json(audit)}});
  }

  std::vector<double> obs_scores;
  std::vector<int> obs_events;
  for (int i = 0; i < view.n(); ++i) {
    const SubjectRecord& rec = view.subjects[i];
    bool excluded = false;
    for (const auto& name : outcomes) {
      const std::string* det = cohort.exclusion_for(name);
      if (det && rec.x[cohort.variable(*det).columns[0]] == 1.0) { excluded = true; break; }
    }
    if (excluded) continue;
    int events = 0;
    for (const auto& name : outcomes)
      if (rec.y[cohort.outcome_index(name)] == 1) ++events;
    obs_scores.push_back(normalized[i]);
    obs_events.push_back(events);
  }

  nlohmann::json report;
  report["n_scored"] = static_cast<std::int64_t>(rows.size());
  report["outcomes"] = outcome_reports;
  report["indicator"] = {
      {"distribution", distribution_to_json(distribution_stats(normalized))},
      {"event_table",
       obs_scores.empty() ? nlohmann::json::array() : event_table_to_json(by_event_count(obs_scores, obs_events))},
      {"standardized", standardized_to_json(standardize_by_age(view, normalized))}};

  std::vector<std::pair<std::string, std::string>> outputs = {{o.out_path, json_text(report)}};
  if (!o.plot_dir.empty()) {
    CsvTable hist;
    hist.header = {"bin_low", "bin_high", "count"};
    const int n_bins = 50;
    std::vector<std::int64_t> counts(n_bins, 0);
    for (double v : normalized) {
      int b = std::min(n_bins - 1, std::max(0, static_cast<int>(v * n_bins)));
      counts[b]++;
    }
    for (int b = 0; b < n_bins; ++b)
      hist.rows.push_back({format_number(static_cast<double>(b) / n_bins),
                           format_number(static_cast<double>(b + 1) / n_bins),
                           format_number(static_cast<double>(counts[b]))});
    CsvTable violin;
    violin.header = {"n_events", "score"};
    for (std::size_t i = 0; i < obs_scores.size(); ++i)
      violin.rows.push_back({format_number(static_cast<double>(obs_events[i])),
                             format_number(obs_scores[i])});
    outputs.emplace_back(o.plot_dir + "/histogram.csv", write_csv_string(hist));
    outputs.emplace_back(o.plot_dir + "/violin.csv", write_csv_string(violin));
  }
  emit(make_manifest(inv), {o.scores_csv, o.cohort_csv, o.schema_path}, outputs);
  std::printf("evaluated %zu scored subjects over %zu outcomes -> %s\n", rows.size(),
              outcomes.size(), o.out_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineOpts {
  std::string spec_path;  // generator mode
  DataOpts data;          // ingestion mode
  SplitOpts split;
  SelectOpts sel;
  std::uint64_t seed = 0;
  bool honest_refit = false;
  int k_groups = 10;
  std::string out_dir = ".";
};

nlohmann::json pipeline_report(const PipelineResult& r) {
  nlohmann::json outcome_reports = nlohmann::json::array();
  for (const auto& o : r.per_outcome) {
    outcome_reports.push_back({{"outcome", o.outcome},
                               {"n_train", o.n_train},
                               {"n_test", o.n_test},
                               {"final_determinants", o.final_variables},
                               {"auc_classifier", o.auc_test},
                               {"auc_indicator", o.auc_super},
                               {"calibration", calibration_to_json(o.params)},
                               {"metrics", metrics_to_json(o.metrics)},
                               {"fn_audit", fn_audit_to_json(o.audit)}});
  }
  nlohmann::json report;
  report["outcomes"] = outcome_reports;
  report["indicator"] = {{"distribution", distribution_to_json(r.score_stats)},
                         {"normalization", normalization_to_json(r.norm_min, r.norm_max)},
                         {"event_table", event_table_to_json(r.event_table)},
                         {"standardized", standardized_to_json(r.standardized)}};
  report["warnings"] = r.warnings;
  return report;
}

int run_pipeline_cmd(const PipelineOpts& o, const Invocation& inv) {
  bool generated = !o.spec_path.empty();
  if (generated == !o.data.data_path.empty())
    throw Error(ErrorKind::Input, "pipeline needs exactly one of --spec or --data/--schema");

  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, std::string>> outputs;
  Cohort cohort;
  if (generated) {
    GeneratorSpec spec = generator_spec_from_config(parse_config_file(o.spec_path));
    spec.seed = o.seed;
    cohort = generate(spec);
    inputs.push_back(o.spec_path);
    outputs.emplace_back(o.out_dir + "/cohort.csv", write_csv_string(save_cohort(cohort)));
    outputs.emplace_back(o.out_dir + "/cohort.schema.toml",
                         schema_to_config_string(schema_for_cohort(cohort)));
  } else {
    if (o.data.schema_path.empty())
      throw Error(ErrorKind::Input, "pipeline --data requires --schema");
    cohort = load_data(o.data);
    inputs.push_back(o.data.data_path);
    inputs.push_back(o.data.schema_path);
  }
  if (!o.sel.boost_config.empty()) inputs.push_back(o.sel.boost_config);

  PipelineConfig cfg;
  cfg.seed = o.seed;
  cfg.train_fraction = o.split.train_fraction;
  cfg.stratify_outcome = o.split.stratify;
  cfg.outcomes = o.sel.all_outcomes ? std::vector<std::string>{} : o.sel.outcomes;
  cfg.selection = make_selection_config(o.sel, o.seed);
  cfg.calibration.k_groups = o.k_groups;
  cfg.calibration.honest_refit = o.honest_refit;

  PipelineResult result = run_pipeline(cohort, cfg);

  for (const auto& res : result.per_outcome) {
    outputs.emplace_back(o.out_dir + "/importance_" + res.outcome + ".csv",
                         importance_csv(res.trace.importance));
    outputs.emplace_back(o.out_dir + "/trace_" + res.outcome + ".json",
                         json_text(trace_to_json(res.trace)));
  }
  outputs.emplace_back(o.out_dir + "/params.json", json_text(frozen_to_json(result.frozen)));
  outputs.emplace_back(o.out_dir + "/norm.json",
                       json_text(normalization_to_json(result.norm_min, result.norm_max)));

  ScoredCohort sc;
  sc.ids = result.test_ids;
  sc.outcomes.clear();
  for (const auto& res : result.per_outcome) sc.outcomes.push_back(res.outcome);
  sc.raw = result.raw;
  sc.votes = result.votes;
  outputs.emplace_back(o.out_dir + "/scores.csv",
                       scores_csv(sc, result.normalized, result.combined));
  outputs.emplace_back(o.out_dir + "/report.json", json_text(pipeline_report(result)));

  emit(make_manifest(inv), inputs, outputs);

  for (const auto& res : result.per_outcome)
    std::printf("outcome %s: n_train=%d n_test=%d determinants=%zu auc=%.4f indicator_auc=%.4f\n",
                res.outcome.c_str(), res.n_train, res.n_test, res.final_variables.size(),
                res.auc_test, res.auc_super);
  std::printf("indicator: mean=%.4f median=%.4f -> %s/scores.csv\n", result.score_stats.mean,
              result.score_stats.median, o.out_dir.c_str());
  return 0;
}

void add_split_flags(CLI::App* cmd, SplitOpts& s) {
  cmd->add_option("--train-fraction", s.train_fraction, "training fraction of the split");
  cmd->add_option("--stratify", s.stratify, "outcome to stratify the split on");
}

void add_selection_flags(CLI::App* cmd, SelectOpts& s, bool with_outcomes) {
  if (with_outcomes) {
    cmd->add_option("--outcome,--outcomes", s.outcomes, "outcome(s) to process");
    cmd->add_flag("--all-outcomes", s.all_outcomes, "process every declared outcome");
  }
  cmd->add_option("--boost-config", s.boost_config, "TOML file with boosting settings");
  cmd->add_option("--q-mode", s.q_mode, "importance null: 'colsample' or 'total'");
  cmd->add_option("--importance-alpha", s.importance_alpha, "importance test level");
  cmd->add_option("--significance-level", s.significance_level, "final Wald significance level");
  cmd->add_option("--prevalence-threshold", s.prevalence_threshold, "low-prevalence cutoff");
  cmd->add_option("--forced-keep", s.forced_keep, "determinants exempt from screening");
  cmd->add_option("--apriori-exclude", s.apriori_exclude, "determinants removed up front");
  cmd->add_flag("--tune", s.tune, "grid-search boosting hyperparameters");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"composite multi-outcome risk indicator toolkit"};
  app.require_subcommand(1);

  Invocation inv;
  for (int i = 1; i < argc; ++i) inv.arguments.push_back(argv[i]);

  GenerateOpts gen;
  CLI::App* c_gen = app.add_subcommand("generate", "synthesize a cohort from a generator spec");
  c_gen->add_option("--spec", gen.spec_path, "generator spec (TOML)")->required();
  c_gen->add_option("--out", gen.out_csv, "output cohort CSV")->required();
  CLI::Option* gen_seed = c_gen->add_option("--seed", gen.seed, "override the spec seed");

  SelectCmdOpts sel;
  CLI::App* c_sel = app.add_subcommand("select", "run determinant selection per outcome");
  c_sel->add_option("--data", sel.data.data_path, "cohort CSV")->required();
  c_sel->add_option("--schema", sel.data.schema_path, "schema TOML")->required();
  c_sel->add_option("--seed", sel.seed, "master seed");
  c_sel->add_option("--out", sel.out_dir, "output directory");
  add_split_flags(c_sel, sel.split);
  add_selection_flags(c_sel, sel.sel, true);

  TrainOpts train;
  CLI::App* c_train = app.add_subcommand("train", "fit per-outcome models on selected determinants");
  c_train->add_option("--data", train.data.data_path, "cohort CSV")->required();
  c_train->add_option("--schema", train.data.schema_path, "schema TOML")->required();
  c_train->add_option("--selection", train.selection_path, "selection.json from 'select'")->required();
  c_train->add_option("--seed", train.seed, "master seed");
  c_train->add_option("--out", train.out_path, "output models JSON");
  add_split_flags(c_train, train.split);

  CalibrateOpts cal;
  CLI::App* c_cal = app.add_subcommand("calibrate", "estimate cutoffs and aggregation weights");
  c_cal->add_option("--data", cal.data.data_path, "cohort CSV")->required();
  c_cal->add_option("--schema", cal.data.schema_path, "schema TOML")->required();
  c_cal->add_option("--models", cal.models_path, "models.json from 'train'")->required();
  c_cal->add_option("--seed", cal.seed, "master seed");
  c_cal->add_flag("--honest-refit", cal.honest_refit, "refit the model per estimation group");
  c_cal->add_option("--k-groups", cal.k_groups, "number of estimation groups");
  c_cal->add_option("--out", cal.out_path, "output params JSON");
  add_split_flags(c_cal, cal.split);

  ScoreOpts score;
  CLI::App* c_score = app.add_subcommand("score", "score a cohort under frozen parameters");
  c_score->add_option("--in", score.in_csv, "cohort CSV to score")->required();
  c_score->add_option("--schema", score.schema_path, "schema TOML")->required();
  c_score->add_option("--params", score.params_path, "frozen params JSON")->required();
  c_score->add_option("--norm", score.norm_path, "frozen normalization JSON (clamped scoring)");
  c_score->add_option("--out", score.out_csv, "output scores CSV");

  EvaluateOpts eval;
  CLI::App* c_eval = app.add_subcommand("evaluate", "evaluation battery over scored subjects");
  c_eval->add_option("--scores", eval.scores_csv, "scores CSV")->required();
  c_eval->add_option("--cohort", eval.cohort_csv, "cohort CSV with outcome labels")->required();
  c_eval->add_option("--schema", eval.schema_path, "schema TOML")->required();
  c_eval->add_option("--out", eval.out_path, "output report JSON");
  c_eval->add_option("--plot-data", eval.plot_dir, "directory for histogram/violin CSVs");

  PipelineOpts pipe;
  CLI::App* c_pipe = app.add_subcommand("pipeline", "end-to-end: data, selection, calibration, scores");
  c_pipe->add_option("--spec", pipe.spec_path, "generator spec (generates the cohort)");
  c_pipe->add_option("--data", pipe.data.data_path, "cohort CSV (alternative to --spec)");
  c_pipe->add_option("--schema", pipe.data.schema_path, "schema TOML (with --data)");
  c_pipe->add_option("--seed", pipe.seed, "master seed");
  c_pipe->add_flag("--honest-refit", pipe.honest_refit, "refit calibration models per group");
  c_pipe->add_option("--k-groups", pipe.k_groups, "calibration estimation groups");
  c_pipe->add_option("--out", pipe.out_dir, "output directory");
  add_split_flags(c_pipe, pipe.split);
  add_selection_flags(c_pipe, pipe.sel, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "corisk: %s\n", e.what());
    return 2;
  }

  const char* stage = "";
  try {
    if (c_gen->parsed()) {
      stage = "generate";
      inv.command = stage;
      gen.seed_given = gen_seed->count() > 0;
      inv.seed = gen.seed;
      return run_generate(gen, inv);
    }
    if (c_sel->parsed()) {
      stage = "select";
      inv.command = stage;
      inv.seed = sel.seed;
      return run_select(sel, inv);
    }
    if (c_train->parsed()) {
      stage = "train";
      inv.command = stage;
      inv.seed = train.seed;
      return run_train(train, inv);
    }
    if (c_cal->parsed()) {
      stage = "calibrate";
      inv.command = stage;
      inv.seed = cal.seed;
      return run_calibrate(cal, inv);
    }
    if (c_score->parsed()) {
      stage = "score";
      inv.command = stage;
      return run_score(score, inv);
    }
    if (c_eval->parsed()) {
      stage = "evaluate";
      inv.command = stage;
      return run_evaluate(eval, inv);
    }
    stage = "pipeline";
    inv.command = stage;
    inv.seed = pipe.seed;
    return run_pipeline_cmd(pipe, inv);
  } catch (const Error& e) {
    std::fprintf(stderr, "corisk %s: %s error: %s\n", stage, error_kind_name(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "corisk %s: %s\n", stage, e.what());
    return 1;
  }
}
