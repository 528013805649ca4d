#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "corisk/artifacts.hpp"
#include "corisk/manifest.hpp"
#include "corisk/pipeline.hpp"
#include "corisk/synth.hpp"
#include "support.hpp"

using Catch::Approx;
using namespace corisk;
using namespace testsupport;

namespace {

GeneratorSpec two_outcome_spec() {
  GeneratorSpec spec;
  spec.n_subjects = 4000;
  spec.n_signal = 2;
  spec.n_noise = 4;
  spec.latent_strength = 1.0;
  spec.signal_base_logit = {-1.2, -1.0};
  spec.signal_loading = {1.0, 1.0};
  spec.seed = 909;

  // Columns: 5 age dummies, sex, signal_01, signal_02, noise_01..noise_04.
  OutcomeSpec death;
  death.name = "death";
  death.intercept = -2.6;
  death.coefficients.assign(12, 0.0);
  death.coefficients[6] = 1.6;
  death.coefficients[7] = 0.5;
  OutcomeSpec hosp;
  hosp.name = "hosp";
  hosp.intercept = -2.2;
  hosp.coefficients.assign(12, 0.0);
  hosp.coefficients[6] = 0.4;
  hosp.coefficients[7] = 1.5;
  spec.outcomes = {death, hosp};
  spec.exclusions = {{"hosp", "signal_01"}};
  return spec;
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.seed = 4242;
  // Short budget, no column sampling: with a dozen candidate columns the
  // planted split shares must clear theta0 before the effects are absorbed.
  cfg.selection.boost.n_rounds = 150;
  cfg.selection.boost.colsample_bytree = 1.0;
  cfg.selection.boost.seed = 0;  // overwritten per outcome inside the pipeline
  cfg.calibration.k_groups = 5;
  return cfg;
}

}  // namespace

TEST_CASE("pipeline produces a frozen bundle that reproduces its own scores") {
  Cohort cohort = generate(two_outcome_spec());
  PipelineConfig cfg = small_config();
  PipelineResult result = run_pipeline(cohort, cfg);

  SECTION("structure and ranges") {
    REQUIRE(result.per_outcome.size() == 2);
    CHECK(result.per_outcome[0].outcome == "death");
    CHECK(result.per_outcome[1].outcome == "hosp");
    REQUIRE(result.frozen.outcomes.size() == 2);

    const std::size_t n_test = result.test_ids.size();
    CHECK(n_test == result.raw.size());
    CHECK(n_test == result.normalized.size());
    CHECK(n_test == result.combined.size());
    REQUIRE(result.votes.size() == 2);
    CHECK(result.votes[0].size() == n_test);
    CHECK(result.norm_max > result.norm_min);
    double lo = 1.0, hi = 0.0;
    for (double v : result.normalized) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(lo == Approx(0.0).margin(1e-15));
    CHECK(hi == Approx(1.0).margin(1e-15));
    CHECK(result.score_stats.n == static_cast<std::int64_t>(n_test));

    for (const auto& res : result.per_outcome) {
      CHECK_NOTHROW(res.params.validate());
      CHECK_FALSE(res.final_variables.empty());
      CHECK(res.auc_test > 0.55);
      CHECK(res.auc_super > 0.52);
      CHECK(res.metrics.tp + res.metrics.fp + res.metrics.tn + res.metrics.fn == res.n_test);
    }
  }

  SECTION("the exclusion shrinks only the excluded outcome's views") {
    const OutcomeResult& death = result.per_outcome[0];
    const OutcomeResult& hosp = result.per_outcome[1];
    CHECK(death.n_train + death.n_test == cohort.n());
    Cohort hosp_view = apply_exclusion(cohort, "hosp");
    CHECK(hosp.n_train + hosp.n_test == hosp_view.n());
    CHECK(hosp_view.n() < cohort.n());
    CHECK(hosp.n_test < death.n_test);
  }

  SECTION("the frozen bundle rescores the master held-out view identically") {
    SplitPlan plan{cfg.train_fraction, cfg.seed, cfg.stratify_outcome};
    Split master = split_cohort(cohort, plan);
    ScoredCohort rescored = score_cohort(master.test, result.frozen);
    REQUIRE(rescored.raw.size() == result.raw.size());
    CHECK(rescored.ids == result.test_ids);
    CHECK(rescored.raw == result.raw);
    CHECK(rescored.combined == result.combined);
  }

  SECTION("repeated runs are identical") {
    PipelineResult again = run_pipeline(cohort, cfg);
    CHECK(again.raw == result.raw);
    CHECK(again.test_ids == result.test_ids);
    for (std::size_t k = 0; k < result.per_outcome.size(); ++k) {
      CHECK(again.per_outcome[k].trace.final_determinants ==
            result.per_outcome[k].trace.final_determinants);
      CHECK(again.per_outcome[k].params.cutoff == result.per_outcome[k].params.cutoff);
    }
  }

  SECTION("the event table covers exactly the fully observable held-out subjects") {
    SplitPlan plan{cfg.train_fraction, cfg.seed, cfg.stratify_outcome};
    Split master = split_cohort(cohort, plan);
    int excl_col = cohort.variable("signal_01").columns[0];
    std::int64_t observable = 0;
    for (const auto& rec : master.test.subjects)
      if (rec.x[excl_col] != 1.0) ++observable;
    std::int64_t covered = 0;
    for (const auto& row : result.event_table) covered += row.count;
    CHECK(covered == observable);
    REQUIRE_FALSE(result.event_table.empty());
    CHECK(result.event_table[0].n_events == 0);
  }

  SECTION("scoring a cohort without the needed columns fails by name") {
    Cohort foreign = build_cohort({"unrelated"}, {{1.0}, {0.0}}, {"death"}, {{1}, {-1}});
    try {
      score_cohort(foreign, result.frozen);
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Schema);
      CHECK(std::string(e.what()).find("lacks encoded column") != std::string::npos);
    }
  }

  SECTION("unknown outcome names are rejected early") {
    PipelineConfig bad = cfg;
    bad.outcomes = {"death", "nonexistent"};
    CHECK_THROWS_AS(run_pipeline(cohort, bad), Error);
  }
}

TEST_CASE("column resolution maps feature names to encoded indices") {
  Cohort c = build_cohort({"alpha", "beta", "gamma"}, {{0, 1, 0}}, {"death"}, {{-1}});
  std::vector<int> cols = columns_for_features(c, {"gamma", "alpha"});
  REQUIRE(cols.size() == 2);
  CHECK(cols[0] == 2);
  CHECK(cols[1] == 0);
  CHECK_THROWS_AS(columns_for_features(c, {"delta"}), Error);
}

TEST_CASE("run manifests round-trip through disk") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "corisk_manifest_test";
  fs::create_directories(dir);
  fs::path payload = dir / "payload.txt";
  {
    FILE* f = std::fopen(payload.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fputs("payload bytes\n", f);
    std::fclose(f);
  }

  RunManifest m;
  m.command = "score";
  m.arguments = {"--in", "cohort.csv"};
  m.seed = 99;
  m.created = utc_timestamp();
  m.inputs.push_back(stamp_file(payload.string()));
  m.outputs.push_back(FileStamp{"scores.csv", "deadbeefdeadbeef"});

  std::string mpath = manifest_path_for((dir / "scores.csv").string());
  CHECK(mpath == (dir / "scores.csv.manifest.json").string());
  write_manifest(mpath, m);
  RunManifest back = read_manifest(mpath);
  CHECK(back.version == m.version);
  CHECK(back.command == "score");
  CHECK(back.arguments == m.arguments);
  CHECK(back.seed == 99);
  CHECK(back.created == m.created);
  REQUIRE(back.inputs.size() == 1);
  CHECK(back.inputs[0].path == payload.string());
  CHECK(back.inputs[0].hash == m.inputs[0].hash);
  REQUIRE(back.outputs.size() == 1);
  CHECK(back.outputs[0].hash == "deadbeefdeadbeef");

  SECTION("file stamps are stable") {
    FileStamp a = stamp_file(payload.string());
    FileStamp b = stamp_file(payload.string());
    CHECK(a.hash == b.hash);
    CHECK(a.hash.size() == 16);
  }
  fs::remove_all(dir);
}

TEST_CASE("frozen bundles and normalization constants round-trip as JSON") {
  Cohort est = build_cohort({"flag", "extra"},
                            {{1, 0}, {1, 1}, {0, 1}, {0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 0},
                             {1, 0}, {0, 0}, {1, 1}, {0, 1}},
                            {"death"},
                            {{1}, {1}, {-1}, {-1}, {1}, {-1}, {1}, {-1}, {1}, {-1}, {-1}, {1}});
  DesignMatrix dm = design_matrix(est, {"flag", "extra"});
  LogisticModel model = fit_logistic(dm.X, est.outcome_labels("death"), LogisticOptions(),
                                     dm.column_names);

  CalibrationParams params;
  params.outcome = "death";
  params.cutoff = 0.4;
  params.sens = 0.8;
  params.spec = 0.7;
  auto [alpha, gamma] = calibration_weights(params.sens, params.spec);
  params.alpha = alpha;
  params.gamma = gamma;
  params.auc_cv = 0.77;

  FrozenBundle bundle;
  bundle.outcomes.push_back(FrozenOutcome{"death", model, params});
  nlohmann::json j = frozen_to_json(bundle);
  FrozenBundle back = frozen_from_json(j);
  REQUIRE(back.outcomes.size() == 1);
  CHECK(back.outcomes[0].outcome == "death");
  CHECK(back.outcomes[0].model.feature_names == model.feature_names);
  CHECK(back.outcomes[0].model.beta == model.beta);
  CHECK(back.outcomes[0].params.cutoff == Approx(0.4));
  CHECK(back.outcomes[0].params.alpha == Approx(alpha));

  SECTION("an empty bundle document is rejected") {
    CHECK_THROWS_AS(frozen_from_json(nlohmann::json::object()), Error);
  }

  SECTION("normalization constants") {
    nlohmann::json nj = normalization_to_json(-3.5, 2.25);
    auto [lo, hi] = normalization_from_json(nj);
    CHECK(lo == Approx(-3.5));
    CHECK(hi == Approx(2.25));
    nlohmann::json badj = normalization_to_json(-3.5, 2.25);
    badj["max"] = -9.0;
    CHECK_THROWS_AS(normalization_from_json(badj), Error);
  }

  SECTION("tampered calibration blocks fail validation on load") {
    nlohmann::json cj = calibration_to_json(params);
    cj["alpha"] = 1.0;
    CHECK_THROWS_AS(calibration_from_json(cj), Error);
  }
}
