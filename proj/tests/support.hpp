// Shared test support: independent oracle implementations (written against
// the definitions, not the library code paths) and small cohort builders.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "corisk/data.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// Oracle: AUC by O(n^2) pair counting, ties counted half.

inline double oracle_auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != -1) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// ---------------------------------------------------------------------------
// Oracle: upper-tail binomial probability by long-double log-space summation.

inline double oracle_binom_upper(std::int64_t k, std::int64_t n, double p0) {
  if (k <= 0) return 1.0;
  long double p = static_cast<long double>(p0);
  long double acc = 0.0L;
  for (std::int64_t i = k; i <= n; ++i) {
    long double lg = lgammal(static_cast<long double>(n) + 1.0L) -
                     lgammal(static_cast<long double>(i) + 1.0L) -
                     lgammal(static_cast<long double>(n - i) + 1.0L) +
                     static_cast<long double>(i) * logl(p) +
                     static_cast<long double>(n - i) * log1pl(-p);
    acc += expl(lg);
  }
  if (acc > 1.0L) acc = 1.0L;
  return static_cast<double>(acc);
}

// ---------------------------------------------------------------------------
// Oracle: combined vote by explicit two-component likelihood maximization.
// L(+1) multiplies sens or (1 - sens) per classifier; L(-1) multiplies
// (1 - spec) or spec. Ties break toward +1.

inline int oracle_likelihood_vote(const std::vector<int>& votes, const std::vector<double>& sens,
                                  const std::vector<double>& spec) {
  long double l_pos = 1.0L, l_neg = 1.0L;
  for (std::size_t j = 0; j < votes.size(); ++j) {
    if (votes[j] == 1) {
      l_pos *= sens[j];
      l_neg *= 1.0L - spec[j];
    } else {
      l_pos *= 1.0L - sens[j];
      l_neg *= spec[j];
    }
  }
  return l_pos >= l_neg ? 1 : -1;
}

// ---------------------------------------------------------------------------
// Oracle: best interior-grid cutoff by brute force, maximizing sens + spec,
// smallest cutoff on ties.

inline std::pair<double, double> oracle_best_cutoff(const std::vector<double>& probs,
                                                    const std::vector<int>& labels,
                                                    int grid_size) {
  double best_cut = 0.0, best_obj = -1.0;
  for (int t = 1; t <= grid_size; ++t) {
    double cut = static_cast<double>(t) / (grid_size + 1);
    std::int64_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      bool pred = probs[i] >= cut;
      if (labels[i] == 1) (pred ? tp : fn)++;
      else (pred ? fp : tn)++;
    }
    double sens = static_cast<double>(tp) / (tp + fn);
    double spec = static_cast<double>(tn) / (tn + fp);
    if (sens + spec > best_obj + 1e-15) {
      best_obj = sens + spec;
      best_cut = cut;
    }
  }
  return {best_cut, best_obj};
}

// ---------------------------------------------------------------------------
// Cohort builder: binary determinants only, one age class, all subjects the
// given sex, labels as {-1,+1} vectors.

inline corisk::Cohort build_cohort(const std::vector<std::string>& determinants,
                                   const std::vector<std::vector<double>>& x_rows,
                                   const std::vector<std::string>& outcomes,
                                   const std::vector<std::vector<int>>& y_rows) {
  corisk::Cohort c;
  c.age_class_labels = {"[65+]"};
  c.outcome_names = outcomes;
  for (std::size_t j = 0; j < determinants.size(); ++j) {
    corisk::Variable v;
    v.name = determinants[j];
    v.kind = corisk::VarKind::Binary;
    v.columns = {static_cast<int>(j)};
    c.variables.push_back(v);
    corisk::ColumnInfo col;
    col.name = determinants[j];
    col.variable = determinants[j];
    col.kind = corisk::VarKind::Binary;
    c.columns.push_back(col);
  }
  char buf[16];
  for (std::size_t i = 0; i < x_rows.size(); ++i) {
    corisk::SubjectRecord rec;
    std::snprintf(buf, sizeof(buf), "s%06zu", i);
    rec.id = buf;
    rec.x = x_rows[i];
    rec.y = y_rows[i];
    c.subjects.push_back(rec);
  }
  return c;
}

// Bernoulli draw helper for fixture construction.
inline int bern(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p ? 1 : 0;
}

}  // namespace testsupport
