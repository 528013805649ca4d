// Synthetic cohort generator.
//
// Construction: a latent severity L_i = latent_strength * z_i + age_effect
// (z_i standard normal) drives the signal determinants through per-column
// logistic models; noise determinants are independent Bernoulli columns whose
// probabilities are drawn once per column from [noise_p_min, noise_p_max];
// outcomes are Bernoulli through declared logistic models over the encoded
// determinant row. With aggregate_pair set, three extra binary determinants
// are planted: sub_a, sub_b and agg_ab = sub_a OR sub_b.
//
// Canonical draw order under one mt19937_64 stream seeded from (seed,
// "generate"): first the noise column probabilities, then per subject in
// order: age class, sex, latent normal (Box-Muller, second value discarded),
// signal uniforms, pair uniforms, noise uniforms, outcome uniforms.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "corisk/config.hpp"
#include "corisk/data.hpp"
#include "corisk/error.hpp"
#include "corisk/rng.hpp"
#include "corisk/stats.hpp"

namespace corisk {

struct OutcomeSpec {
  std::string name;
  double intercept = 0.0;
  std::vector<double> coefficients;  // over encoded determinant columns
};

struct GeneratorSpec {
  int n_subjects = 0;
  int n_signal = 0;
  int n_noise = 0;
  double latent_strength = 1.0;
  std::vector<double> age_class_probs = {0.25, 0.22, 0.20, 0.15, 0.10, 0.08};
  std::vector<double> age_effect = {0.0, 0.3, 0.6, 0.9, 1.2, 1.5};
  double sex_prob = 0.5;
  std::vector<double> signal_base_logit;  // per signal determinant
  std::vector<double> signal_loading;     // per signal determinant
  bool aggregate_pair = false;
  double pair_base_logit = -1.5;
  double pair_loading = 1.0;
  double noise_p_min = 0.005;
  double noise_p_max = 0.5;
  std::vector<OutcomeSpec> outcomes;
  std::vector<std::pair<std::string, std::string>> exclusions;
  std::uint64_t seed = 0;

  static std::vector<std::string> default_age_labels() {
    return {"[65-69]", "[70-74]", "[75-79]", "[80-84]", "[85-89]", "[90+]"};
  }

  int n_age_classes() const { return static_cast<int>(age_class_probs.size()); }

  int n_encoded_columns() const {
    return (n_age_classes() - 1) + 1 + n_signal + (aggregate_pair ? 3 : 0) + n_noise;
  }

  void validate() const {
    if (n_subjects < 1) throw Error(ErrorKind::Input, "generator: n_subjects must be >= 1");
    if (n_signal < 0 || n_noise < 0) throw Error(ErrorKind::Input, "generator: negative determinant count");
    if (latent_strength < 0.0) throw Error(ErrorKind::Input, "generator: latent_strength must be >= 0");
    if (age_class_probs.size() < 2) throw Error(ErrorKind::Input, "generator: need at least 2 age classes");
    double sum = 0.0;
    for (double p : age_class_probs) {
      if (p < 0.0) throw Error(ErrorKind::Input, "generator: negative age class probability");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      throw Error(ErrorKind::Input, "generator: age class probabilities must sum to 1");
    if (age_effect.size() != age_class_probs.size())
      throw Error(ErrorKind::Input, "generator: age_effect length must match age classes");
    if (!(sex_prob >= 0.0 && sex_prob <= 1.0)) throw Error(ErrorKind::Input, "generator: bad sex_prob");
    if (!signal_base_logit.empty() && static_cast<int>(signal_base_logit.size()) != n_signal)
      throw Error(ErrorKind::Input, "generator: signal_base_logit length must equal n_signal");
    if (!signal_loading.empty() && static_cast<int>(signal_loading.size()) != n_signal)
      throw Error(ErrorKind::Input, "generator: signal_loading length must equal n_signal");
    if (!(noise_p_min > 0.0 && noise_p_min <= noise_p_max && noise_p_max < 1.0))
      throw Error(ErrorKind::Input, "generator: noise probability range must satisfy 0 < min <= max < 1");
    if (outcomes.empty()) throw Error(ErrorKind::Input, "generator: at least one outcome required");
    for (const auto& o : outcomes) {
      if (o.name.empty()) throw Error(ErrorKind::Input, "generator: outcome without a name");
      if (static_cast<int>(o.coefficients.size()) != n_encoded_columns())
        throw Error(ErrorKind::Input, "generator: outcome '" + o.name + "' coefficient length " +
                                          std::to_string(o.coefficients.size()) + " != encoded column count " +
                                          std::to_string(n_encoded_columns()));
    }
  }
};

namespace detail {

inline std::string padded_name(const std::string& stem, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%02d", stem.c_str(), i + 1);
  return buf;
}

}  // namespace detail

inline std::vector<std::string> generator_determinant_names(const GeneratorSpec& spec) {
  std::vector<std::string> names;
  for (int j = 0; j < spec.n_signal; ++j) names.push_back(detail::padded_name("signal_", j));
  if (spec.aggregate_pair) {
    names.push_back("sub_a");
    names.push_back("sub_b");
    names.push_back("agg_ab");
  }
  for (int j = 0; j < spec.n_noise; ++j) names.push_back(detail::padded_name("noise_", j));
  return names;
}

inline Cohort generate(const GeneratorSpec& spec) {
  spec.validate();
  std::mt19937_64 rng = make_stream(spec.seed, "generate");
  auto unif = [&rng]() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
  auto normal = [&]() {
    // Box-Muller; one fresh pair per call, second value discarded.
    double u1 = std::max(unif(), 1e-300), u2 = unif();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };

  const int n_classes = spec.n_age_classes();
  std::vector<std::string> age_labels = spec.n_age_classes() == 6
                                            ? GeneratorSpec::default_age_labels()
                                            : [&] {
                                                std::vector<std::string> v;
                                                for (int i = 0; i < n_classes; ++i)
                                                  v.push_back("class_" + std::to_string(i));
                                                return v;
                                              }();

  std::vector<double> noise_p(spec.n_noise);
  for (int j = 0; j < spec.n_noise; ++j)
    noise_p[j] = spec.noise_p_min + (spec.noise_p_max - spec.noise_p_min) * unif();

  Cohort c;
  c.age_class_labels = age_labels;
  for (const auto& o : spec.outcomes) c.outcome_names.push_back(o.name);
  c.exclusions = spec.exclusions;

  auto add_column = [&](const std::string& name, const std::string& var, VarKind kind,
                        const std::string& level) {
    c.columns.push_back(ColumnInfo{name, var, kind, level});
    return static_cast<int>(c.columns.size()) - 1;
  };
  {
    Variable v;
    v.name = "age_class";
    v.kind = VarKind::Categorical;
    v.levels = age_labels;
    v.reference = age_labels.front();
    v.is_age = true;
    for (int i = 1; i < n_classes; ++i)
      v.columns.push_back(add_column("age_class=" + age_labels[i], v.name, VarKind::Categorical, age_labels[i]));
    c.variables.push_back(std::move(v));
  }
  {
    Variable v;
    v.name = "sex";
    v.kind = VarKind::Binary;
    v.is_sex = true;
    v.columns.push_back(add_column("sex", "sex", VarKind::Binary, ""));
    c.variables.push_back(std::move(v));
  }
  for (const auto& name : generator_determinant_names(spec)) {
    Variable v;
    v.name = name;
    v.kind = VarKind::Binary;
    v.columns.push_back(add_column(name, name, VarKind::Binary, ""));
    c.variables.push_back(std::move(v));
  }
  for (const auto& e : spec.exclusions) {
    c.outcome_index(e.first);
    if (!c.has_variable(e.second))
      throw Error(ErrorKind::Input, "generator: exclusion names unknown determinant '" + e.second + "'");
  }

  std::vector<double> cum(n_classes);
  double acc = 0.0;
  for (int i = 0; i < n_classes; ++i) {
    acc += spec.age_class_probs[i];
    cum[i] = acc;
  }

  const int p_enc = spec.n_encoded_columns();
  c.subjects.reserve(spec.n_subjects);
  for (int i = 0; i < spec.n_subjects; ++i) {
    SubjectRecord rec;
    char idbuf[24];
    std::snprintf(idbuf, sizeof(idbuf), "s%06d", i + 1);
    rec.id = idbuf;
    rec.x.assign(p_enc, 0.0);

    double ua = unif();
    rec.age_class = n_classes - 1;
    for (int cls = 0; cls < n_classes; ++cls)
      if (ua < cum[cls]) {
        rec.age_class = cls;
        break;
      }
    rec.sex = unif() < spec.sex_prob ? 1 : 0;
    double latent = spec.latent_strength * normal() + spec.age_effect[rec.age_class];

    int col = 0;
    for (int cls = 1; cls < n_classes; ++cls, ++col) rec.x[col] = (rec.age_class == cls) ? 1.0 : 0.0;
    rec.x[col++] = rec.sex;
    for (int j = 0; j < spec.n_signal; ++j, ++col) {
      double base = spec.signal_base_logit.empty() ? -1.5 : spec.signal_base_logit[j];
      double load = spec.signal_loading.empty() ? 1.0 : spec.signal_loading[j];
      rec.x[col] = unif() < sigmoid(base + load * latent) ? 1.0 : 0.0;
    }
    if (spec.aggregate_pair) {
      double pa = sigmoid(spec.pair_base_logit + spec.pair_loading * latent);
      double pb = sigmoid(spec.pair_base_logit);
      double a = unif() < pa ? 1.0 : 0.0;
      double b = unif() < pb ? 1.0 : 0.0;
      rec.x[col++] = a;
      rec.x[col++] = b;
      rec.x[col++] = (a == 1.0 || b == 1.0) ? 1.0 : 0.0;
    }
    for (int j = 0; j < spec.n_noise; ++j, ++col) rec.x[col] = unif() < noise_p[j] ? 1.0 : 0.0;

    rec.y.reserve(spec.outcomes.size());
    for (const auto& o : spec.outcomes) {
      double eta = o.intercept;
      for (int jc = 0; jc < p_enc; ++jc) eta += o.coefficients[jc] * rec.x[jc];
      rec.y.push_back(unif() < sigmoid(eta) ? 1 : -1);
    }
    c.subjects.push_back(std::move(rec));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Config loading. [generator] holds the cohort-level knobs; each [[outcome]]
// declares either a full `coefficients` array over the encoded columns or the
// compact fields age_slope / sex_coef / signal_coefs / sub_a_coef / sub_b_coef
// / agg_coef / noise_coef, which are expanded in encoded-column order.

inline GeneratorSpec generator_spec_from_config(const ConfigNode& root) {
  const ConfigNode* g = root.table("generator");
  if (!g) throw Error(ErrorKind::Schema, "generator config: missing [generator] table");
  GeneratorSpec spec;
  spec.n_subjects = static_cast<int>(g->get_int("n_subjects"));
  spec.n_signal = static_cast<int>(g->get_int("n_signal", 0));
  spec.n_noise = static_cast<int>(g->get_int("n_noise", 0));
  spec.latent_strength = g->get_number("latent_strength", 1.0);
  if (g->has("age_class_probs")) spec.age_class_probs = g->get_number_array("age_class_probs");
  if (g->has("age_effect")) spec.age_effect = g->get_number_array("age_effect");
  spec.sex_prob = g->get_number("sex_prob", 0.5);
  if (g->has("signal_base_logit")) spec.signal_base_logit = g->get_number_array("signal_base_logit");
  if (g->has("signal_loading")) spec.signal_loading = g->get_number_array("signal_loading");
  spec.aggregate_pair = g->get_bool("aggregate_pair", false);
  spec.pair_base_logit = g->get_number("pair_base_logit", -1.5);
  spec.pair_loading = g->get_number("pair_loading", 1.0);
  spec.noise_p_min = g->get_number("noise_p_min", 0.005);
  spec.noise_p_max = g->get_number("noise_p_max", 0.5);
  spec.seed = static_cast<std::uint64_t>(g->get_int("seed", 0));

  const int n_classes = spec.n_age_classes();
  const int n_dummies = n_classes - 1;
  for (const ConfigNode* o : root.table_array("outcome")) {
    OutcomeSpec os;
    os.name = o->get_string("name");
    os.intercept = o->get_number("intercept", 0.0);
    if (o->has("coefficients")) {
      os.coefficients = o->get_number_array("coefficients");
    } else {
      os.coefficients.assign(spec.n_encoded_columns(), 0.0);
      int col = 0;
      double age_slope = o->get_number("age_slope", 0.0);
      for (int i = 0; i < n_dummies; ++i, ++col) os.coefficients[col] = age_slope * (i + 1);
      os.coefficients[col++] = o->get_number("sex_coef", 0.0);
      if (o->has("signal_coefs")) {
        std::vector<double> sc = o->get_number_array("signal_coefs");
        if (static_cast<int>(sc.size()) != spec.n_signal)
          throw Error(ErrorKind::Schema, "outcome '" + os.name + "': signal_coefs length != n_signal");
        for (int j = 0; j < spec.n_signal; ++j) os.coefficients[col + j] = sc[j];
      } else {
        double v = o->get_number("signal_coef", 0.0);
        for (int j = 0; j < spec.n_signal; ++j) os.coefficients[col + j] = v;
      }
      col += spec.n_signal;
      if (spec.aggregate_pair) {
        os.coefficients[col++] = o->get_number("sub_a_coef", 0.0);
        os.coefficients[col++] = o->get_number("sub_b_coef", 0.0);
        os.coefficients[col++] = o->get_number("agg_coef", 0.0);
      }
      double nv = o->get_number("noise_coef", 0.0);
      for (int j = 0; j < spec.n_noise; ++j) os.coefficients[col + j] = nv;
    }
    spec.outcomes.push_back(std::move(os));
  }
  if (const ConfigNode* ex = root.table("exclusions")) {
    for (const auto& e : ex->entries) {
      if (e.second.kind != ConfigNode::Kind::String)
        throw Error(ErrorKind::Schema, "exclusions entries must map outcome to a determinant name");
      spec.exclusions.emplace_back(e.first, e.second.str);
    }
  }
  spec.validate();
  return spec;
}

}  // namespace corisk
