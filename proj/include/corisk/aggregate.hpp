// Super-classifier aggregation: log-weighted voting across the per-outcome
// classifiers, its continuous relaxation, and min-max normalization.
//
// Sign convention: an exact zero combined score maps to +1; inside the
// binarized continuous rule sign(f - c) is the true sign (zero contributes
// nothing).
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "corisk/calibration.hpp"
#include "corisk/error.hpp"

namespace corisk {

namespace detail {

inline void check_params(const std::vector<CalibrationParams>& params) {
  if (params.empty()) throw Error(ErrorKind::Input, "aggregation: empty parameter set");
  for (const auto& p : params) {
    if (!(p.alpha > 0.0) || !std::isfinite(p.alpha) || !(p.gamma > 0.0) || !std::isfinite(p.gamma))
      throw Error(ErrorKind::Input, "aggregation: alpha and gamma must be positive and finite");
    if (!(p.cutoff > 0.0 && p.cutoff < 1.0))
      throw Error(ErrorKind::Input, "aggregation: cutoff must lie in (0,1)");
  }
}

}  // namespace detail

// Binary combine: sign(sum_j vote_j * log(alpha_j) + log(gamma_j)), zero -> +1.
inline int combine_binary(const std::vector<int>& votes, const std::vector<CalibrationParams>& params) {
  detail::check_params(params);
  if (votes.size() != params.size()) throw Error(ErrorKind::Input, "combine_binary: size mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < votes.size(); ++j) {
    if (votes[j] != 1 && votes[j] != -1)
      throw Error(ErrorKind::Input, "combine_binary: votes must be -1 or +1");
    s += votes[j] * std::log(params[j].alpha) + std::log(params[j].gamma);
  }
  return s >= 0.0 ? 1 : -1;
}

// Continuous combine: sum_j (f_j - c_j) * log(alpha_j) + log(gamma_j).
inline double combine_continuous(const std::vector<double>& probs,
                                 const std::vector<CalibrationParams>& params) {
  detail::check_params(params);
  if (probs.size() != params.size()) throw Error(ErrorKind::Input, "combine_continuous: size mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (!(probs[j] >= 0.0 && probs[j] <= 1.0))
      throw Error(ErrorKind::Input, "combine_continuous: probabilities must lie in [0,1]");
    s += (probs[j] - params[j].cutoff) * std::log(params[j].alpha) + std::log(params[j].gamma);
  }
  return s;
}

// Sign-form combine on thresholded probabilities:
// sign(sum_j sign(f_j - c_j) * log(alpha_j) + log(gamma_j)), zero -> +1.
inline int binarize_continuous(const std::vector<double>& probs,
                               const std::vector<CalibrationParams>& params) {
  detail::check_params(params);
  if (probs.size() != params.size()) throw Error(ErrorKind::Input, "binarize_continuous: size mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (!(probs[j] >= 0.0 && probs[j] <= 1.0))
      throw Error(ErrorKind::Input, "binarize_continuous: probabilities must lie in [0,1]");
    double d = probs[j] - params[j].cutoff;
    double sgn = (d > 0.0) ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    s += sgn * std::log(params[j].alpha) + std::log(params[j].gamma);
  }
  return s >= 0.0 ? 1 : -1;
}

// ---------------------------------------------------------------------------
// Min-max normalization

struct Normalization {
  std::vector<double> values;
  double min_used = 0.0;
  double max_used = 0.0;
  std::int64_t n_clamped_low = 0;
  std::int64_t n_clamped_high = 0;
};

inline Normalization normalize_minmax(const std::vector<double>& raw) {
  if (raw.empty()) throw Error(ErrorKind::Input, "normalize_minmax: empty input");
  auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  if (*lo == *hi) throw Error(ErrorKind::Degenerate, "normalize_minmax: all scores equal, range is zero");
  Normalization out;
  out.min_used = *lo;
  out.max_used = *hi;
  out.values.reserve(raw.size());
  for (double v : raw) out.values.push_back((v - out.min_used) / (out.max_used - out.min_used));
  return out;
}

// Reuse stored constants on a new set; out-of-range scores clamp to [0,1].
inline Normalization apply_normalization(const std::vector<double>& raw, double min_used,
                                         double max_used) {
  if (!(max_used > min_used))
    throw Error(ErrorKind::Input, "apply_normalization: max must exceed min");
  Normalization out;
  out.min_used = min_used;
  out.max_used = max_used;
  out.values.reserve(raw.size());
  for (double v : raw) {
    double z = (v - min_used) / (max_used - min_used);
    if (z < 0.0) {
      z = 0.0;
      ++out.n_clamped_low;
    } else if (z > 1.0) {
      z = 1.0;
      ++out.n_clamped_high;
    }
    out.values.push_back(z);
  }
  return out;
}

}  // namespace corisk
