#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "corisk/calibration.hpp"
#include "corisk/rng.hpp"
#include "corisk/stats.hpp"
#include "support.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using namespace corisk;
using namespace testsupport;

namespace {

// n subjects, first n_pos positive; determinant d follows the label with the
// given agreement probability.
Cohort informative_cohort(int n, int n_pos, double agreement, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> x;
  std::vector<std::vector<int>> y;
  for (int i = 0; i < n; ++i) {
    int label = i < n_pos ? 1 : -1;
    int d = bern(rng, agreement) ? (label == 1 ? 1 : 0) : (label == 1 ? 0 : 1);
    x.push_back({static_cast<double>(d), static_cast<double>(bern(rng, 0.4))});
    y.push_back({label});
  }
  return build_cohort({"flag", "noise"}, x, {"death"}, y);
}

LogisticModel fit_on(const Cohort& c, const std::vector<int>& cols) {
  Eigen::MatrixXd X(c.n(), static_cast<Eigen::Index>(cols.size()));
  for (int i = 0; i < c.n(); ++i)
    X.row(i) = subject_features(c, c.subjects[i], cols).transpose();
  return fit_logistic(X, c.outcome_labels("death"));
}

}  // namespace

TEST_CASE("undersampling keeps every positive at the target fraction") {
  Cohort c = informative_cohort(1000, 100, 0.8, 21);
  UndersamplePlan plan;
  plan.positive_fraction = 0.2;
  plan.seed = 9;

  Cohort balanced = undersample(c, "death", plan);
  REQUIRE(balanced.n() == 500);
  int pos = 0;
  for (const auto& s : balanced.subjects) pos += s.y[0] == 1;
  CHECK(pos == 100);

  std::set<std::string> kept;
  for (const auto& s : balanced.subjects) kept.insert(s.id);
  for (int i = 0; i < 100; ++i) CHECK(kept.count(c.subjects[i].id) == 1);

  SECTION("same seed reproduces the same subset") {
    Cohort again = undersample(c, "death", plan);
    REQUIRE(again.n() == balanced.n());
    for (int i = 0; i < balanced.n(); ++i) CHECK(again.subjects[i].id == balanced.subjects[i].id);
  }

  SECTION("a different seed samples different negatives") {
    UndersamplePlan other = plan;
    other.seed = 10;
    Cohort alt = undersample(c, "death", other);
    bool same = true;
    for (int i = 0; i < balanced.n() && same; ++i)
      same = alt.subjects[i].id == balanced.subjects[i].id;
    CHECK_FALSE(same);
  }

  SECTION("too few negatives reports both counts") {
    Cohort small = informative_cohort(400, 100, 0.8, 22);
    REQUIRE_THROWS_MATCHES(undersample(small, "death", plan), Error,
                           Catch::Matchers::MessageMatches(ContainsSubstring("need 400") &&
                                                           ContainsSubstring("have 300")));
    try {
      undersample(small, "death", plan);
      FAIL("expected a size error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Size);
    }
  }

  SECTION("invalid fraction and missing positives are rejected") {
    UndersamplePlan bad = plan;
    bad.positive_fraction = 1.0;
    CHECK_THROWS_AS(undersample(c, "death", bad), Error);
    Cohort negatives_only = informative_cohort(50, 0, 0.8, 23);
    CHECK_THROWS_AS(undersample(negatives_only, "death", plan), Error);
  }
}

TEST_CASE("cutoff selection maximizes sensitivity plus specificity on the interior grid") {
  SECTION("separable fixture picks the smallest perfect grid point") {
    std::vector<double> probs{0.1, 0.2, 0.6, 0.9};
    std::vector<int> labels{-1, -1, 1, 1};
    CutoffChoice pick = select_cutoff(probs, labels, 9);
    CHECK(pick.cutoff == Approx(0.3));
    CHECK(pick.sens == Approx(1.0));
    CHECK(pick.spec == Approx(1.0));
  }

  SECTION("agrees with the brute-force oracle on tied discrete scores") {
    std::mt19937_64 rng(404);
    for (int rep = 0; rep < 50; ++rep) {
      int n = 40;
      std::vector<double> probs;
      std::vector<int> labels;
      int n_pos = 0;
      for (int i = 0; i < n; ++i) {
        probs.push_back(std::uniform_int_distribution<int>(1, 19)(rng) / 20.0);
        int lab = bern(rng, 0.4) ? 1 : -1;
        n_pos += lab == 1;
        labels.push_back(lab);
      }
      if (n_pos == 0 || n_pos == n) continue;
      for (int grid : {37, 500}) {
        auto [cut, obj] = oracle_best_cutoff(probs, labels, grid);
        CutoffChoice pick = select_cutoff(probs, labels, grid);
        CHECK(pick.cutoff == Approx(cut).margin(1e-12));
        CHECK(pick.sens + pick.spec == Approx(obj).margin(1e-12));
      }
    }
  }

  SECTION("invalid inputs are rejected") {
    CHECK_THROWS_AS(select_cutoff({0.5}, {1, -1}), Error);
    CHECK_THROWS_AS(select_cutoff({0.5, 0.6}, {1, 0}), Error);
    CHECK_THROWS_AS(select_cutoff({0.5, 0.6}, {1, 1}), Error);
    CHECK_THROWS_AS(select_cutoff({0.5, 0.6}, {1, -1}, 0), Error);
  }
}

TEST_CASE("likelihood weights match the published operating points") {
  struct Row {
    double sens, spec, alpha, gamma;
  };
  const std::vector<Row> rows{
      {0.793, 0.800, 15.324, 1.026}, {0.755, 0.765, 10.032, 1.029},
      {0.801, 0.676, 8.398, 0.728},  {0.581, 0.699, 3.220, 1.157},
      {0.677, 0.734, 5.784, 1.120},  {0.789, 0.736, 10.425, 0.857},
  };
  for (const Row& r : rows) {
    auto [alpha, gamma] = calibration_weights(r.sens, r.spec);
    CHECK(alpha == Approx(r.alpha).margin(1e-3));
    CHECK(gamma == Approx(r.gamma).margin(1e-3));
  }

  SECTION("equal sensitivity and specificity give a unit gamma") {
    auto [alpha, gamma] = calibration_weights(0.8, 0.8);
    CHECK(alpha == Approx(16.0));
    CHECK(gamma == Approx(1.0));
  }

  SECTION("boundary rates are rejected") {
    CHECK_THROWS_AS(calibration_weights(0.0, 0.5), Error);
    CHECK_THROWS_AS(calibration_weights(0.5, 1.0), Error);
    CHECK_THROWS_AS(calibration_weights(-0.1, 0.5), Error);
  }
}

TEST_CASE("calibration params validate their own arithmetic") {
  CalibrationParams p;
  p.outcome = "death";
  p.cutoff = 0.31;
  p.sens = 0.793;
  p.spec = 0.800;
  auto [alpha, gamma] = calibration_weights(p.sens, p.spec);
  p.alpha = alpha;
  p.gamma = gamma;
  CHECK_NOTHROW(p.validate());

  SECTION("tampered weights fail") {
    CalibrationParams bad = p;
    bad.alpha += 0.01;
    CHECK_THROWS_AS(bad.validate(), Error);
  }
  SECTION("out-of-range cutoff fails") {
    CalibrationParams bad = p;
    bad.cutoff = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}

TEST_CASE("group-averaged calibration on an informative determinant") {
  Cohort est = informative_cohort(600, 170, 0.85, 31);
  LogisticModel model = fit_on(est, {0, 1});

  CalibrationOptions opts;
  opts.k_groups = 5;
  opts.seed = 11;
  CalibrationParams params = calibrate_outcome(est, "death", model, {0, 1}, opts);

  CHECK(params.outcome == "death");
  CHECK(params.groups_used + params.groups_skipped == 5);
  CHECK(params.groups_used >= 4);
  CHECK(params.cutoff > 0.0);
  CHECK(params.cutoff < 1.0);
  CHECK(params.sens > 0.5);
  CHECK(params.spec > 0.5);
  CHECK(params.auc_cv > 0.6);
  CHECK(params.alpha > 1.0);
  CHECK_NOTHROW(params.validate());

  SECTION("repeated runs are identical") {
    CalibrationParams again = calibrate_outcome(est, "death", model, {0, 1}, opts);
    CHECK(again.cutoff == params.cutoff);
    CHECK(again.sens == params.sens);
    CHECK(again.spec == params.spec);
    CHECK(again.auc_cv == params.auc_cv);
    CHECK(again.alpha == params.alpha);
    CHECK(again.gamma == params.gamma);
  }

  SECTION("fewer than two groups is rejected") {
    CalibrationOptions bad = opts;
    bad.k_groups = 1;
    CHECK_THROWS_AS(calibrate_outcome(est, "death", model, {0, 1}, bad), Error);
  }
}

TEST_CASE("perfectly separating scores are clipped with a warning") {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<int>> y;
  for (int i = 0; i < 100; ++i) {
    int label = i < 30 ? 1 : -1;
    x.push_back({label == 1 ? 1.0 : 0.0});
    y.push_back({label});
  }
  Cohort est = build_cohort({"flag"}, x, {"death"}, y);
  LogisticModel model = fit_on(est, {0});
  REQUIRE(model.separation_detected);

  CalibrationOptions opts;
  opts.k_groups = 4;
  opts.seed = 3;
  CalibrationParams params = calibrate_outcome(est, "death", model, {0}, opts);
  CHECK(params.sens == Approx(1.0 - 1e-6));
  CHECK(params.spec == Approx(1.0 - 1e-6));
  bool clipped = false;
  for (const auto& w : params.warnings) clipped = clipped || w.find("clipped") != std::string::npos;
  CHECK(clipped);
  CHECK_NOTHROW(params.validate());
  CHECK(params.alpha > 1e10);
}

TEST_CASE("single-class groups are skipped with a warning") {
  const int n = 40, k = 4;
  const std::uint64_t seed = 7;
  // Reproduce the partition the calibrator will draw, then keep one group
  // free of positives.
  auto groups = partition_groups(n, k, stream_seed(seed, "calibrate:death"));
  REQUIRE(groups.size() == static_cast<std::size_t>(k));
  std::vector<int> label(n, -1);
  for (std::size_t g = 1; g < groups.size(); ++g)
    for (int j = 0; j < 3; ++j) label[groups[g][static_cast<std::size_t>(j)]] = 1;

  std::vector<std::vector<double>> x;
  std::vector<std::vector<int>> y;
  for (int i = 0; i < n; ++i) {
    x.push_back({label[i] == 1 ? 1.0 : 0.0});
    y.push_back({label[i]});
  }
  Cohort est = build_cohort({"flag"}, x, {"death"}, y);
  LogisticModel model = fit_on(est, {0});

  CalibrationOptions opts;
  opts.k_groups = k;
  opts.seed = seed;
  CalibrationParams params = calibrate_outcome(est, "death", model, {0}, opts);
  CHECK(params.groups_skipped == 1);
  CHECK(params.groups_used == 3);
  bool noted = false;
  for (const auto& w : params.warnings)
    noted = noted || (w.find("group 0") != std::string::npos &&
                      w.find("single-class") != std::string::npos);
  CHECK(noted);

  SECTION("mostly unusable groups abort calibration") {
    std::vector<std::vector<double>> x2;
    std::vector<std::vector<int>> y2;
    for (int i = 0; i < 12; ++i) {
      int lab = i < 2 ? 1 : -1;
      x2.push_back({lab == 1 ? 1.0 : 0.0});
      y2.push_back({lab});
    }
    Cohort tiny = build_cohort({"flag"}, x2, {"death"}, y2);
    LogisticModel m2 = fit_on(tiny, {0});
    CalibrationOptions o2;
    o2.k_groups = 6;
    o2.seed = 1;
    try {
      calibrate_outcome(tiny, "death", m2, {0}, o2);
      FAIL("expected a calibration error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Calibration);
    }
  }
}

TEST_CASE("honest refit recalibrates each group on its complement") {
  Cohort est = informative_cohort(600, 60, 0.85, 41);
  LogisticModel model = fit_on(est, {0, 1});

  CalibrationOptions opts;
  opts.k_groups = 3;
  opts.seed = 17;
  opts.honest_refit = true;
  opts.refit_positive_fraction = 0.2;
  CalibrationParams params = calibrate_outcome(est, "death", model, {0, 1}, opts);
  CHECK(params.groups_used == 3);
  CHECK(params.auc_cv > 0.6);
  CHECK_NOTHROW(params.validate());

  CalibrationParams again = calibrate_outcome(est, "death", model, {0, 1}, opts);
  CHECK(again.cutoff == params.cutoff);
  CHECK(again.auc_cv == params.auc_cv);
}
