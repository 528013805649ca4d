#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "corisk/selection.hpp"
#include "support.hpp"

using Catch::Approx;
using namespace corisk;
using namespace testsupport;

namespace {

// Adds a count variable and a sex marker on top of the plain binary builder.
Cohort mixed_kind_cohort(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> x;
  std::vector<std::vector<int>> y;
  for (int i = 0; i < n; ++i) {
    x.push_back({static_cast<double>(bern(rng, 0.005)), static_cast<double>(bern(rng, 0.3)),
                 static_cast<double>(bern(rng, 0.005)),
                 static_cast<double>(std::poisson_distribution<int>(0.002)(rng)),
                 static_cast<double>(bern(rng, 0.5))});
    y.push_back({bern(rng, 0.2) ? 1 : -1});
  }
  Cohort c = build_cohort({"rare", "common", "rare_forced", "admissions", "sex"}, x, {"death"}, y);
  c.variables[3].kind = VarKind::Count;
  c.columns[3].kind = VarKind::Count;
  c.variables[4].is_sex = true;
  return c;
}

// Planted selection cohort: one informative determinant plus independent noise.
Cohort planted_cohort(int n, int n_noise, double signal_strength, std::uint64_t seed,
                      bool null_labels = false) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> names{"signal"};
  for (int j = 0; j < n_noise; ++j) names.push_back("noise_" + std::to_string(j));
  std::vector<std::vector<double>> x;
  std::vector<std::vector<int>> y;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row{static_cast<double>(bern(rng, 0.35))};
    for (int j = 0; j < n_noise; ++j) row.push_back(static_cast<double>(bern(rng, 0.3)));
    double logit = -2.6 + (null_labels ? 0.0 : signal_strength) * row[0];
    double p = 1.0 / (1.0 + std::exp(-logit));
    y.push_back({bern(rng, p) ? 1 : -1});
    x.push_back(std::move(row));
  }
  return build_cohort(names, x, {"death"}, y);
}

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_CASE("prevalence filter removes only rare plain binary determinants") {
  Cohort c = mixed_kind_cohort(2000, 5);
  std::vector<std::string> cand{"rare", "common", "rare_forced", "admissions", "sex"};
  FilterResult r = prevalence_filter(c, cand, 0.01, {"rare_forced"});

  CHECK(has(r.removed, "rare"));
  CHECK(has(r.kept, "common"));
  CHECK(has(r.kept, "rare_forced"));   // forced keeps are exempt
  CHECK(has(r.kept, "admissions"));    // count variables are exempt
  CHECK(has(r.kept, "sex"));           // the sex marker is exempt
  CHECK(r.kept.size() + r.removed.size() == cand.size());

  SECTION("the threshold comparison is strict") {
    std::vector<std::vector<double>> x;
    std::vector<std::vector<int>> y;
    for (int i = 0; i < 200; ++i) {
      x.push_back({i < 2 ? 1.0 : 0.0, i < 1 ? 1.0 : 0.0});
      y.push_back({-1});
    }
    Cohort edge = build_cohort({"at_threshold", "below"}, x, {"death"}, y);
    FilterResult er = prevalence_filter(edge, {"at_threshold", "below"}, 0.01);
    CHECK(has(er.kept, "at_threshold"));  // prevalence exactly 0.01 stays
    CHECK(has(er.removed, "below"));
  }

  SECTION("threshold range is validated") {
    CHECK_THROWS_AS(prevalence_filter(c, cand, 1.0), Error);
    CHECK_THROWS_AS(prevalence_filter(c, cand, -0.1), Error);
  }
}

TEST_CASE("protective screen drops determinants whose odds interval sits below one") {
  // 90 events then 110 non-events; exposures drawn to pin each 2x2 table.
  const int n = 200, n_events = 90;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<int>> y;
  for (int i = 0; i < n; ++i) {
    bool event = i < n_events;
    int idx_in_class = event ? i : i - n_events;
    double protective = event ? (idx_in_class < 10) : (idx_in_class < 90);
    double neutral = event ? (idx_in_class < 45) : (idx_in_class < 55);
    double risky = event ? (idx_in_class < 60) : (idx_in_class < 30);
    x.push_back({protective, neutral, risky, 0.0});
    y.push_back({event ? 1 : -1});
  }
  Cohort c = build_cohort({"protective", "neutral", "risky", "absent"}, x, {"death"}, y);

  std::vector<std::string> cand{"protective", "neutral", "risky", "absent"};
  FilterResult r = protective_filter(c, "death", cand, 0.95);
  CHECK(has(r.removed, "protective"));
  CHECK(has(r.kept, "neutral"));
  CHECK(has(r.kept, "risky"));
  CHECK(has(r.kept, "absent"));
  CHECK(has(r.flagged, "absent"));  // empty exposure margin keeps it with a flag
  CHECK(r.flagged.size() == 1);

  SECTION("forced keeps pass the screen") {
    FilterResult f = protective_filter(c, "death", cand, 0.95, {"protective"});
    CHECK(has(f.kept, "protective"));
    CHECK(f.removed.empty());
  }
}

TEST_CASE("reversal probe exposes confounded sign flips") {
  // b tracks a closely; the outcome rewards a and mildly penalizes b, so the
  // univariate view of b borrows a's positive effect.
  const int n = 2500;
  std::mt19937_64 rng(77);
  std::vector<std::vector<double>> x;
  std::vector<std::vector<int>> y;
  for (int i = 0; i < n; ++i) {
    int a = bern(rng, 0.5);
    int b = bern(rng, 0.9) ? a : 1 - a;
    int z = bern(rng, 0.4);
    double logit = -0.5 + 2.5 * a - 1.0 * b + 0.4 * z;
    double p = 1.0 / (1.0 + std::exp(-logit));
    x.push_back({static_cast<double>(a), static_cast<double>(b), static_cast<double>(z)});
    y.push_back({bern(rng, p) ? 1 : -1});
  }
  Cohort c = build_cohort({"a", "b", "z"}, x, {"death"}, y);

  SECTION("the confounded determinant flips when its partner joins") {
    ProbeResult pr = reversal_probe(c, "death", "b", {"a", "b", "z"});
    CHECK(pr.univariate_sign == 1);
    CHECK(pr.reversed);
    CHECK(pr.flipped_at == "a");
    REQUIRE(pr.sequence.size() == 1);  // stops at the flip
    CHECK(pr.sequence[0] == "a");
    CHECK_FALSE(pr.inconclusive);
  }

  SECTION("a direct effect survives the probe") {
    ProbeResult pr = reversal_probe(c, "death", "a", {"a", "b", "z"});
    CHECK(pr.univariate_sign == 1);
    CHECK_FALSE(pr.reversed);
    CHECK(pr.sequence.size() == 2);
    CHECK(pr.sequence[0] == "b");  // |corr(a,b)| beats |corr(a,z)|
  }

  SECTION("tied correlations keep the covariate order given") {
    // A 4-cycle design makes d, c1, c2 pairwise exactly uncorrelated, so both
    // covariates tie at |corr| = 0.
    std::vector<std::vector<double>> xd;
    std::vector<std::vector<int>> yd;
    std::mt19937_64 r2(13);
    for (int i = 0; i < 400; ++i) {
      int phase = i % 4;
      double d = phase >= 2 ? 1.0 : 0.0;
      double c1v = phase % 2 ? 1.0 : 0.0;
      double c2v = (phase == 0 || phase == 3) ? 1.0 : 0.0;
      xd.push_back({d, c1v, c2v});
      yd.push_back({bern(r2, d > 0.5 ? 0.75 : 0.3) ? 1 : -1});
    }
    Cohort dup = build_cohort({"d", "c1", "c2"}, xd, {"death"}, yd);
    ProbeResult fwd = reversal_probe(dup, "death", "d", {"c1", "c2"});
    REQUIRE(fwd.sequence.size() == 2);
    CHECK(fwd.sequence[0] == "c1");
    CHECK(fwd.sequence[1] == "c2");
    ProbeResult rev = reversal_probe(dup, "death", "d", {"c2", "c1"});
    REQUIRE(rev.sequence.size() == 2);
    CHECK(rev.sequence[0] == "c2");
    CHECK(rev.sequence[1] == "c1");
  }
}

TEST_CASE("full selection finds the planted determinant") {
  Cohort train = planted_cohort(1500, 5, 1.6, 101);

  SelectionConfig cfg;
  // Short budget, no column sampling: the planted split share has to defeat
  // theta0 = 1/7 before the boosted fit absorbs the effect entirely.
  cfg.boost.n_rounds = 60;
  cfg.boost.colsample_bytree = 1.0;
  cfg.boost.seed = 31;
  cfg.undersample_plan.positive_fraction = 0.2;
  cfg.undersample_plan.seed = 31;

  SelectionResult res = run_selection(train, "death", cfg);
  CHECK(has(res.trace.final_determinants, "signal"));
  CHECK(res.trace.outcome == "death");
  CHECK(res.trace.candidates.size() == 6);
  CHECK_FALSE(res.trace.tuned);
  CHECK(res.trace.boost_used.n_rounds == 60);
  CHECK(res.final_variables == res.trace.final_determinants);
  CHECK(res.final_columns.size() == res.final_variables.size());
  CHECK(res.model.feature_names.size() == res.final_variables.size());

  // Every candidate lands in exactly one bucket.
  std::set<std::string> seen;
  std::size_t total = 0;
  for (const auto* bucket :
       {&res.trace.removed_apriori, &res.trace.removed_low_prevalence,
        &res.trace.removed_protective, &res.trace.removed_importance, &res.trace.removed_reversal,
        &res.trace.removed_insignificant, &res.trace.final_determinants}) {
    total += bucket->size();
    for (const auto& name : *bucket) seen.insert(name);
  }
  CHECK(total == res.trace.candidates.size());
  CHECK(seen.size() == res.trace.candidates.size());

  // The balanced estimation set honors the undersampling fraction.
  int pos = 0;
  for (const auto& s : res.balanced.subjects) pos += s.y[0] == 1;
  CHECK(pos * 5 == res.balanced.n());

  SECTION("selection is deterministic") {
    SelectionResult again = run_selection(train, "death", cfg);
    CHECK(again.trace.final_determinants == res.trace.final_determinants);
    CHECK(again.model.beta == res.model.beta);
  }

  SECTION("a forced keep bypasses the importance test") {
    SelectionConfig forced = cfg;
    forced.forced_keep = {"noise_2"};
    SelectionResult fr = run_selection(train, "death", forced);
    CHECK(has(fr.trace.importance_selected, "noise_2"));
    CHECK_FALSE(has(fr.trace.removed_importance, "noise_2"));
  }

  SECTION("an a-priori exclusion never reaches later phases") {
    SelectionConfig excl = cfg;
    excl.apriori_exclude = {"noise_1"};
    SelectionResult er = run_selection(train, "death", excl);
    CHECK(has(er.trace.removed_apriori, "noise_1"));
    CHECK_FALSE(has(er.trace.final_determinants, "noise_1"));
    CHECK_FALSE(has(er.trace.importance_selected, "noise_1"));
  }

  SECTION("the prevalence basis governs the rarity filter") {
    // Same layout, but the determinant is common in the training view and
    // rare in the full-cohort basis.
    Cohort basis = planted_cohort(1500, 5, 1.6, 202);
    for (auto& s : basis.subjects) s.x[2] = 0.0;  // noise_1 prevalence 0 in the basis
    SelectionResult br = run_selection(train, "death", cfg, &basis);
    CHECK(has(br.trace.removed_low_prevalence, "noise_1"));
  }
}

TEST_CASE("selection failure modes raise stage errors") {
  SECTION("pure-noise labels select nothing at a tight level") {
    Cohort noise = planted_cohort(900, 5, 0.0, 303, true);
    SelectionConfig cfg;
    cfg.boost.n_rounds = 120;
    cfg.boost.seed = 7;
    cfg.importance_alpha = 1e-6;
    try {
      run_selection(noise, "death", cfg);
      FAIL("expected a pipeline error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Pipeline);
      CHECK(std::string(e.what()).find("relax importance_alpha") != std::string::npos);
    }
  }

  SECTION("excluding every candidate empties the pool") {
    Cohort train = planted_cohort(600, 2, 1.6, 404);
    SelectionConfig cfg;
    cfg.apriori_exclude = {"signal", "noise_0", "noise_1"};
    try {
      run_selection(train, "death", cfg);
      FAIL("expected a pipeline error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Pipeline);
      CHECK(std::string(e.what()).find("no candidates") != std::string::npos);
    }
  }
}
