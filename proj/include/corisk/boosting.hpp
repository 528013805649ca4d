// Depth-limited second-order gradient tree boosting over binned features,
// with split-count feature importance and its exact binomial selection test.
//
// Determinism: one mt19937_64 stream seeded from (seed, "boost"); each round
// draws the row subsample first, then the column subsample. Split search
// scans features in ascending index and bins in ascending order, keeping the
// first strictly-better gain, so ties resolve toward the lower feature index
// and lower threshold.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "corisk/error.hpp"
#include "corisk/rng.hpp"
#include "corisk/stats.hpp"

namespace corisk {

struct BoostConfig {
  int n_rounds = 2000;
  double eta = 0.1;
  int max_depth = 2;
  double subsample = 0.8;
  double colsample_bytree = 0.6;
  double lambda = 1.0;
  double min_child_weight = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_rounds < 1) throw Error(ErrorKind::Input, "boost: n_rounds must be >= 1");
    if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::Input, "boost: eta must lie in (0,1]");
    if (max_depth < 1) throw Error(ErrorKind::Input, "boost: max_depth must be >= 1");
    if (!(subsample > 0.0 && subsample <= 1.0))
      throw Error(ErrorKind::Input, "boost: subsample must lie in (0,1]");
    if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0))
      throw Error(ErrorKind::Input, "boost: colsample_bytree must lie in (0,1]");
    if (lambda < 0.0) throw Error(ErrorKind::Input, "boost: lambda must be >= 0");
    if (min_child_weight < 0.0) throw Error(ErrorKind::Input, "boost: min_child_weight must be >= 0");
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double leaf_value = 0.0;
  int left = -1;
  int right = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;
};

struct BoostModel {
  BoostConfig config;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;
  std::vector<std::int64_t> split_counts;  // per feature, over all trees
  std::int64_t n_total_splits = 0;
  std::vector<double> train_deviance;      // -2 log-likelihood after each round
  int n_features = 0;

  double predict_margin(const Eigen::VectorXd& x) const {
    double m = 0.0;
    for (const auto& tree : trees) {
      int at = 0;
      while (tree.nodes[at].feature >= 0)
        at = (x[tree.nodes[at].feature] <= tree.nodes[at].threshold) ? tree.nodes[at].left
                                                                     : tree.nodes[at].right;
      m += tree.nodes[at].leaf_value;
    }
    return m;
  }
  double predict(const Eigen::VectorXd& x) const { return sigmoid(predict_margin(x)); }
};

namespace detail {

struct BinnedFeature {
  std::vector<double> upper;  // max raw value per bin, ascending
};

struct BinnedData {
  int n = 0, p = 0, max_bins = 0;
  std::vector<std::uint16_t> bin;  // row-major n x p
  std::vector<BinnedFeature> features;
};

inline BinnedData bin_features(const Eigen::MatrixXd& X, int max_bins = 256) {
  BinnedData b;
  b.n = static_cast<int>(X.rows());
  b.p = static_cast<int>(X.cols());
  b.bin.assign(static_cast<std::size_t>(b.n) * b.p, 0);
  b.features.resize(b.p);
  for (int j = 0; j < b.p; ++j) {
    std::vector<double> vals(b.n);
    for (int i = 0; i < b.n; ++i) vals[i] = X(i, j);
    std::vector<double> uniq = vals;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<double>& upper = b.features[j].upper;
    if (static_cast<int>(uniq.size()) <= max_bins) {
      upper = uniq;
    } else {
      // Quantile cuts over the sorted raw values.
      std::vector<double> sorted = vals;
      std::sort(sorted.begin(), sorted.end());
      for (int t = 1; t <= max_bins; ++t) {
        std::size_t at = std::min<std::size_t>(sorted.size() - 1,
                                               static_cast<std::size_t>(static_cast<double>(t) * sorted.size() / max_bins) - 1);
        upper.push_back(sorted[at]);
      }
      upper.erase(std::unique(upper.begin(), upper.end()), upper.end());
      upper.back() = sorted.back();
    }
    for (int i = 0; i < b.n; ++i) {
      auto it = std::lower_bound(upper.begin(), upper.end(), vals[i]);
      b.bin[static_cast<std::size_t>(i) * b.p + j] =
          static_cast<std::uint16_t>(it == upper.end() ? upper.size() - 1 : it - upper.begin());
    }
    b.max_bins = std::max(b.max_bins, static_cast<int>(upper.size()));
  }
  return b;
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  int bin = -1;
  double gain = 0.0;
};

}  // namespace detail

inline BoostModel fit_boosting(const Eigen::MatrixXd& X, const std::vector<int>& y,
                               const BoostConfig& config,
                               const std::vector<std::string>& feature_names = {}) {
  config.validate();
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n < 2) throw Error(ErrorKind::Size, "boost: need at least 2 rows");
  if (p < 1) throw Error(ErrorKind::Input, "boost: need at least 1 feature");
  if (static_cast<int>(y.size()) != n) throw Error(ErrorKind::Input, "boost: X rows != labels");
  for (int v : y)
    if (v != 1 && v != -1) throw Error(ErrorKind::Input, "boost: labels must be -1 or +1");

  detail::BinnedData binned = detail::bin_features(X);
  std::mt19937_64 rng = make_stream(config.seed, "boost");

  BoostModel model;
  model.config = config;
  model.n_features = p;
  model.split_counts.assign(p, 0);
  model.feature_names = feature_names;
  if (model.feature_names.empty())
    for (int j = 0; j < p; ++j) model.feature_names.push_back("x" + std::to_string(j));

  std::vector<double> margin(n, 0.0), grad(n, 0.0), hess(n, 0.0);
  const int n_sample = std::max(1, static_cast<int>(std::lround(config.subsample * n)));
  const int n_cols = std::clamp(static_cast<int>(std::lround(config.colsample_bytree * p)), 1, p);
  const double lambda = config.lambda;

  std::vector<double> hist_g(static_cast<std::size_t>(p) * binned.max_bins);
  std::vector<double> hist_h(static_cast<std::size_t>(p) * binned.max_bins);

  for (int round = 0; round < config.n_rounds; ++round) {
    std::vector<int> rows = sample_without_replacement(n, n_sample, rng);
    std::sort(rows.begin(), rows.end());
    std::vector<int> cols = sample_without_replacement(p, n_cols, rng);
    std::sort(cols.begin(), cols.end());

    for (int i : rows) {
      double pr = sigmoid(margin[i]);
      grad[i] = pr - ((y[i] == 1) ? 1.0 : 0.0);
      hess[i] = std::max(pr * (1.0 - pr), 1e-16);
    }

    Tree tree;
    // Recursive splitter on the sampled rows; depth 1 is the root.
    std::function<int(std::vector<int>&, int)> build = [&](std::vector<int>& node_rows, int depth) -> int {
      double G = 0.0, H = 0.0;
      for (int i : node_rows) {
        G += grad[i];
        H += hess[i];
      }
      auto make_leaf = [&]() {
        TreeNode leaf;
        leaf.leaf_value = -config.eta * G / (H + lambda);
        tree.nodes.push_back(leaf);
        return static_cast<int>(tree.nodes.size()) - 1;
      };
      if (depth > config.max_depth || node_rows.size() < 2) return make_leaf();

      for (int f : cols) {
        int nb = static_cast<int>(binned.features[f].upper.size());
        std::fill_n(hist_g.begin() + static_cast<std::size_t>(f) * binned.max_bins, nb, 0.0);
        std::fill_n(hist_h.begin() + static_cast<std::size_t>(f) * binned.max_bins, nb, 0.0);
      }
      for (int i : node_rows) {
        const std::uint16_t* row_bins = &binned.bin[static_cast<std::size_t>(i) * p];
        for (int f : cols) {
          std::size_t at = static_cast<std::size_t>(f) * binned.max_bins + row_bins[f];
          hist_g[at] += grad[i];
          hist_h[at] += hess[i];
        }
      }

      detail::SplitChoice best;
      double parent_score = G * G / (H + lambda);
      for (int f : cols) {
        int nb = static_cast<int>(binned.features[f].upper.size());
        if (nb < 2) continue;
        double GL = 0.0, HL = 0.0;
        const double* hg = &hist_g[static_cast<std::size_t>(f) * binned.max_bins];
        const double* hh = &hist_h[static_cast<std::size_t>(f) * binned.max_bins];
        for (int bnd = 0; bnd < nb - 1; ++bnd) {
          GL += hg[bnd];
          HL += hh[bnd];
          double HR = H - HL;
          if (HL < config.min_child_weight || HR < config.min_child_weight) continue;
          double GR = G - GL;
          double gain = 0.5 * (GL * GL / (HL + lambda) + GR * GR / (HR + lambda) - parent_score);
          if (gain > best.gain && gain > 0.0) {
            best.found = true;
            best.feature = f;
            best.bin = bnd;
            best.gain = gain;
          }
        }
      }
      if (!best.found) return make_leaf();

      std::vector<int> left_rows, right_rows;
      for (int i : node_rows) {
        if (binned.bin[static_cast<std::size_t>(i) * p + best.feature] <= best.bin)
          left_rows.push_back(i);
        else
          right_rows.push_back(i);
      }
      int self = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes[self].feature = best.feature;
      tree.nodes[self].threshold = binned.features[best.feature].upper[best.bin];
      ++model.split_counts[best.feature];
      int l = build(left_rows, depth + 1);
      int r = build(right_rows, depth + 1);
      tree.nodes[self].left = l;
      tree.nodes[self].right = r;
      return self;
    };
    build(rows, 1);
    model.trees.push_back(tree);

    // Update margins for every training row and record the full-sample loss.
    double dev = 0.0;
    for (int i = 0; i < n; ++i) {
      int at = 0;
      const std::uint16_t* row_bins = &binned.bin[static_cast<std::size_t>(i) * p];
      while (tree.nodes[at].feature >= 0) {
        const TreeNode& nd = tree.nodes[at];
        double v = binned.features[nd.feature].upper[row_bins[nd.feature]];
        at = (v <= nd.threshold) ? nd.left : nd.right;
      }
      margin[i] += tree.nodes[at].leaf_value;
      double y01 = (y[i] == 1) ? 1.0 : 0.0;
      dev += y01 * margin[i] - softplus(margin[i]);
    }
    model.train_deviance.push_back(-2.0 * dev);
  }

  model.n_total_splits = std::accumulate(model.split_counts.begin(), model.split_counts.end(),
                                         static_cast<std::int64_t>(0));
  return model;
}

// ---------------------------------------------------------------------------
// Split-count importance with an exact upper-tail binomial test against the
// uniform-pick null theta0 = 1/q.

enum class QMode {
  Colsample,  // q = round(colsample_bytree * feature count), floored at 2
  Total       // q = feature count
};

struct FeatureImportance {
  std::string feature;
  std::int64_t count = 0;
  double theta_hat = 0.0;
  double p_value = 1.0;
  bool selected = false;
};

struct ImportanceReport {
  std::vector<FeatureImportance> rows;
  std::int64_t n_total_splits = 0;
  std::int64_t q_effective = 0;
  double theta0 = 0.0;
  double alpha = 0.05;
};

inline std::int64_t q_effective_for(const BoostConfig& config, int n_features, QMode mode) {
  if (mode == QMode::Total) return n_features;
  return std::max<std::int64_t>(2, std::llround(config.colsample_bytree * n_features));
}

inline ImportanceReport importance_test(const BoostModel& model, double alpha = 0.05,
                                        QMode mode = QMode::Colsample) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Input, "importance_test: bad alpha");
  if (model.n_total_splits == 0)
    throw Error(ErrorKind::Degenerate, "importance_test: boosted model contains no splits");
  ImportanceReport rep;
  rep.alpha = alpha;
  rep.n_total_splits = model.n_total_splits;
  rep.q_effective = q_effective_for(model.config, model.n_features, mode);
  rep.theta0 = 1.0 / static_cast<double>(rep.q_effective);
  for (int j = 0; j < model.n_features; ++j) {
    FeatureImportance fi;
    fi.feature = model.feature_names[j];
    fi.count = model.split_counts[j];
    fi.theta_hat = static_cast<double>(fi.count) / static_cast<double>(rep.n_total_splits);
    fi.p_value = binomial_upper_tail(fi.count, rep.n_total_splits, rep.theta0);
    fi.selected = fi.p_value < alpha;
    rep.rows.push_back(std::move(fi));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Grid search over boosting hyperparameters by k-fold cross-validated AUC.
// The grid is enumerated row-major over (eta, max_depth, subsample,
// colsample_bytree) in declared order; ties prefer smaller max_depth, then
// smaller eta, then earlier declaration.

struct TuneGrid {
  std::vector<double> eta = {0.1};
  std::vector<int> max_depth = {2};
  std::vector<double> subsample = {0.8};
  std::vector<double> colsample_bytree = {0.6};
};

struct TuneEntry {
  BoostConfig config;
  double mean_auc = 0.0;
};

struct TuneResult {
  BoostConfig best;
  std::vector<TuneEntry> table;
};

inline TuneResult tune_hyperparams(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                   const BoostConfig& base, const TuneGrid& grid, int k_folds,
                                   std::uint64_t seed) {
  if (k_folds < 2) throw Error(ErrorKind::Input, "tune: k_folds must be >= 2");
  const int n = static_cast<int>(X.rows());
  std::vector<std::vector<int>> folds = partition_groups(n, k_folds, seed);

  TuneResult result;
  double best_auc = -1.0;
  int entry_idx = 0;
  for (double eta : grid.eta)
    for (int depth : grid.max_depth)
      for (double sub : grid.subsample)
        for (double col : grid.colsample_bytree) {
          BoostConfig cfg = base;
          cfg.eta = eta;
          cfg.max_depth = depth;
          cfg.subsample = sub;
          cfg.colsample_bytree = col;
          double auc_sum = 0.0;
          int usable = 0;
          for (int f = 0; f < k_folds; ++f) {
            std::vector<char> in_fold(n, 0);
            for (int i : folds[f]) in_fold[i] = 1;
            std::vector<int> tr;
            for (int i = 0; i < n; ++i)
              if (!in_fold[i]) tr.push_back(i);
            Eigen::MatrixXd Xtr(tr.size(), X.cols());
            std::vector<int> ytr(tr.size());
            for (std::size_t i = 0; i < tr.size(); ++i) {
              Xtr.row(i) = X.row(tr[i]);
              ytr[i] = y[tr[i]];
            }
            BoostConfig fold_cfg = cfg;
            fold_cfg.seed = stream_seed(seed, "tune:" + std::to_string(entry_idx) + ":" + std::to_string(f));
            BoostModel m = fit_boosting(Xtr, ytr, fold_cfg);
            std::vector<double> scores;
            std::vector<int> labels;
            for (int i : folds[f]) {
              scores.push_back(m.predict_margin(X.row(i)));
              labels.push_back(y[i]);
            }
            bool pos = false, neg = false;
            for (int v : labels) (v == 1 ? pos : neg) = true;
            if (!pos || !neg) continue;  // fold unusable for AUC
            auc_sum += auc(scores, labels);
            ++usable;
          }
          if (usable == 0) throw Error(ErrorKind::Degenerate, "tune: no fold had both classes");
          TuneEntry entry;
          entry.config = cfg;
          entry.mean_auc = auc_sum / usable;
          result.table.push_back(entry);
          bool better = entry.mean_auc > best_auc + 1e-12;
          bool tie = std::fabs(entry.mean_auc - best_auc) <= 1e-12;
          if (better ||
              (tie && (cfg.max_depth < result.best.max_depth ||
                       (cfg.max_depth == result.best.max_depth && cfg.eta < result.best.eta)))) {
            best_auc = entry.mean_auc;
            result.best = cfg;
          }
          ++entry_idx;
        }
  return result;
}

}  // namespace corisk
