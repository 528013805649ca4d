// Cohort data model: schema-driven CSV ingestion, dummy encoding, seeded
// splits and group partitions.
//
// Encoded design-column order is fixed and documented:
//   1. age-class dummies (reference = first class) when age is declared,
//   2. the sex column when declared,
//   3. declared binary determinants, then count determinants, then
//      categorical determinants (non-reference levels in declared order).
// Outcome labels are {-1,+1} internally; files may carry {0,1} or {-1,+1}.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "corisk/config.hpp"
#include "corisk/csv.hpp"
#include "corisk/error.hpp"
#include "corisk/rng.hpp"

namespace corisk {

enum class VarKind { Binary, Count, Categorical };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Binary;
  std::vector<std::string> levels;  // categorical only
  std::string reference;            // categorical only
  std::vector<int> columns;         // encoded column indices
  bool is_age = false;
  bool is_sex = false;

  bool operator==(const Variable&) const = default;
};

struct ColumnInfo {
  std::string name;      // encoded name, e.g. "diabetes" or "age_class=[70-74]"
  std::string variable;  // owning variable
  VarKind kind = VarKind::Binary;
  std::string level;     // dummy level when the variable is categorical

  bool operator==(const ColumnInfo&) const = default;
};

struct SubjectRecord {
  std::string id;
  int age_class = 0;
  int sex = 0;
  std::vector<double> x;  // encoded determinant row
  std::vector<int> y;     // one {-1,+1} label per outcome

  bool operator==(const SubjectRecord&) const = default;
};

struct Cohort {
  std::vector<std::string> age_class_labels;
  std::vector<std::string> outcome_names;
  std::vector<ColumnInfo> columns;
  std::vector<Variable> variables;
  std::vector<SubjectRecord> subjects;
  std::vector<std::pair<std::string, std::string>> exclusions;  // outcome -> binary determinant

  bool operator==(const Cohort&) const = default;

  int n() const { return static_cast<int>(subjects.size()); }
  int n_columns() const { return static_cast<int>(columns.size()); }

  int outcome_index(const std::string& name) const {
    for (std::size_t k = 0; k < outcome_names.size(); ++k)
      if (outcome_names[k] == name) return static_cast<int>(k);
    throw Error(ErrorKind::Input, "unknown outcome: " + name);
  }

  const Variable& variable(const std::string& name) const {
    for (const auto& v : variables)
      if (v.name == name) return v;
    throw Error(ErrorKind::Input, "unknown determinant: " + name);
  }

  bool has_variable(const std::string& name) const {
    for (const auto& v : variables)
      if (v.name == name) return true;
    return false;
  }

  std::vector<int> outcome_labels(const std::string& name) const {
    int k = outcome_index(name);
    std::vector<int> y(subjects.size());
    for (std::size_t i = 0; i < subjects.size(); ++i) y[i] = subjects[i].y[k];
    return y;
  }

  std::vector<double> column_values(int col) const {
    std::vector<double> v(subjects.size());
    for (std::size_t i = 0; i < subjects.size(); ++i) v[i] = subjects[i].x[col];
    return v;
  }

  double column_mean(int col) const {
    if (subjects.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : subjects) s += r.x[col];
    return s / subjects.size();
  }

  const std::string* exclusion_for(const std::string& outcome) const {
    for (const auto& e : exclusions)
      if (e.first == outcome) return &e.second;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Schema

struct CategoricalDecl {
  std::string name;
  std::vector<std::string> levels;
  std::string reference;
};

struct Schema {
  std::string id_column;
  std::string age_column;        // numeric ages, class assignment via edges
  std::vector<double> age_class_edges;
  std::string age_class_column;  // pre-assigned class labels
  std::vector<std::string> age_class_labels;
  std::string sex_column;
  std::vector<std::string> sex_levels;  // optional two labels mapping to 0/1
  std::vector<std::string> binary_determinants;
  std::vector<std::string> count_determinants;
  std::vector<CategoricalDecl> categoricals;
  std::vector<std::string> outcome_columns;
  std::vector<std::pair<std::string, std::string>> exclusions;
  bool include_age_determinant = true;
  bool include_sex_determinant = true;
};

inline std::vector<std::string> age_labels_from_edges(const std::vector<double>& edges) {
  if (edges.size() < 2) throw Error(ErrorKind::Schema, "age_class_edges needs at least 2 entries");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    std::ostringstream ss;
    ss << "[" << format_number(edges[i]) << "-" << format_number(edges[i + 1] - 1) << "]";
    labels.push_back(ss.str());
  }
  std::ostringstream ss;
  ss << "[" << format_number(edges.back()) << "+]";
  labels.push_back(ss.str());
  return labels;
}

inline int age_class_from_edges(double age, const std::vector<double>& edges) {
  if (age < edges.front())
    throw Error(ErrorKind::Input, "age " + format_number(age) + " below first age class");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    if (age < edges[i + 1]) return static_cast<int>(i);
  return static_cast<int>(edges.size() - 1);
}

inline Schema schema_from_config(const ConfigNode& root) {
  const ConfigNode* s = root.table("schema");
  if (!s) throw Error(ErrorKind::Schema, "schema config: missing [schema] table");
  Schema sc;
  sc.id_column = s->get_string("id_column", "");
  sc.age_column = s->get_string("age_column", "");
  sc.age_class_column = s->get_string("age_class_column", "");
  if (s->has("age_class_edges")) sc.age_class_edges = s->get_number_array("age_class_edges");
  if (s->has("age_class_labels")) sc.age_class_labels = s->get_string_array("age_class_labels");
  sc.sex_column = s->get_string("sex_column", "");
  if (s->has("sex_levels")) sc.sex_levels = s->get_string_array("sex_levels");
  sc.binary_determinants = s->get_string_array("binary_determinants", {});
  sc.count_determinants = s->get_string_array("count_determinants", {});
  sc.outcome_columns = s->get_string_array("outcome_columns", {});
  sc.include_age_determinant = s->get_bool("include_age_determinant", true);
  sc.include_sex_determinant = s->get_bool("include_sex_determinant", true);

  if (const ConfigNode* cats = root.table("categorical")) {
    for (const auto& e : cats->entries) {
      CategoricalDecl decl;
      decl.name = e.first;
      decl.levels = e.second.get_string_array("levels");
      if (decl.levels.size() < 2)
        throw Error(ErrorKind::Schema, "categorical '" + decl.name + "' needs at least 2 levels");
      decl.reference = e.second.get_string("reference", decl.levels.front());
      bool found = false;
      for (const auto& lv : decl.levels) found = found || lv == decl.reference;
      if (!found)
        throw Error(ErrorKind::Schema, "categorical '" + decl.name + "': reference level not in levels");
      sc.categoricals.push_back(std::move(decl));
    }
  }
  if (const ConfigNode* ex = root.table("exclusions")) {
    for (const auto& e : ex->entries) {
      if (e.second.kind != ConfigNode::Kind::String)
        throw Error(ErrorKind::Schema, "exclusions entries must map outcome to a determinant name");
      sc.exclusions.emplace_back(e.first, e.second.str);
    }
  }
  if (sc.outcome_columns.empty()) throw Error(ErrorKind::Schema, "schema declares no outcome columns");
  if (!sc.age_column.empty() && sc.age_class_edges.empty())
    throw Error(ErrorKind::Schema, "age_column requires age_class_edges");
  if (!sc.age_class_column.empty() && sc.age_class_labels.empty())
    throw Error(ErrorKind::Schema, "age_class_column requires age_class_labels");
  if (!sc.sex_levels.empty() && sc.sex_levels.size() != 2)
    throw Error(ErrorKind::Schema, "sex_levels must list exactly 2 labels");
  return sc;
}

inline std::string schema_to_config_string(const Schema& sc) {
  std::ostringstream out;
  auto str_array = [](const std::vector<std::string>& v) {
    std::ostringstream ss;
    ss << "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) ss << ", ";
      ss << '"' << v[i] << '"';
    }
    ss << "]";
    return ss.str();
  };
  out << "[schema]\n";
  if (!sc.id_column.empty()) out << "id_column = \"" << sc.id_column << "\"\n";
  if (!sc.age_column.empty()) {
    out << "age_column = \"" << sc.age_column << "\"\n";
    out << "age_class_edges = [";
    for (std::size_t i = 0; i < sc.age_class_edges.size(); ++i) {
      if (i) out << ", ";
      out << format_number(sc.age_class_edges[i]);
    }
    out << "]\n";
  }
  if (!sc.age_class_column.empty()) {
    out << "age_class_column = \"" << sc.age_class_column << "\"\n";
    out << "age_class_labels = " << str_array(sc.age_class_labels) << "\n";
  }
  if (!sc.sex_column.empty()) out << "sex_column = \"" << sc.sex_column << "\"\n";
  if (!sc.sex_levels.empty()) out << "sex_levels = " << str_array(sc.sex_levels) << "\n";
  out << "binary_determinants = " << str_array(sc.binary_determinants) << "\n";
  out << "count_determinants = " << str_array(sc.count_determinants) << "\n";
  out << "outcome_columns = " << str_array(sc.outcome_columns) << "\n";
  out << "include_age_determinant = " << (sc.include_age_determinant ? "true" : "false") << "\n";
  out << "include_sex_determinant = " << (sc.include_sex_determinant ? "true" : "false") << "\n";
  for (const auto& cat : sc.categoricals) {
    out << "\n[categorical." << cat.name << "]\n";
    out << "levels = " << str_array(cat.levels) << "\n";
    out << "reference = \"" << cat.reference << "\"\n";
  }
  if (!sc.exclusions.empty()) {
    out << "\n[exclusions]\n";
    for (const auto& e : sc.exclusions) out << e.first << " = \"" << e.second << "\"\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Loading

namespace detail {

inline int require_column(const CsvTable& t, const std::string& name) {
  int j = t.column_index(name);
  if (j < 0) throw Error(ErrorKind::Schema, "cohort file is missing declared column '" + name + "'");
  return j;
}

inline int parse_label(const std::string& s, const std::string& col, int line_no) {
  double v = parse_double_field(s, col, line_no);
  if (v == 0.0 || v == -1.0) return -1;
  if (v == 1.0) return 1;
  throw Error(ErrorKind::Parse, "csv line " + std::to_string(line_no) + ": outcome '" + col +
                                    "' must be 0/1 or -1/+1, got '" + s + "'");
}

}  // namespace detail

inline Cohort load_cohort(const CsvTable& t, const Schema& sc) {
  Cohort c;
  c.outcome_names = sc.outcome_columns;
  for (const auto& e : sc.exclusions) c.exclusions.push_back(e);

  bool has_age = !sc.age_column.empty() || !sc.age_class_column.empty();
  if (has_age) {
    c.age_class_labels =
        sc.age_class_column.empty() ? age_labels_from_edges(sc.age_class_edges) : sc.age_class_labels;
  }

  // Build the variable/column layout in the documented order.
  auto add_column = [&](const std::string& name, const std::string& var, VarKind kind,
                        const std::string& level) {
    c.columns.push_back(ColumnInfo{name, var, kind, level});
    return static_cast<int>(c.columns.size()) - 1;
  };
  if (has_age && sc.include_age_determinant) {
    Variable v;
    v.name = "age_class";
    v.kind = VarKind::Categorical;
    v.levels = c.age_class_labels;
    v.reference = c.age_class_labels.front();
    v.is_age = true;
    for (std::size_t i = 1; i < c.age_class_labels.size(); ++i)
      v.columns.push_back(
          add_column("age_class=" + c.age_class_labels[i], v.name, VarKind::Categorical, c.age_class_labels[i]));
    c.variables.push_back(std::move(v));
  }
  if (!sc.sex_column.empty() && sc.include_sex_determinant) {
    Variable v;
    v.name = sc.sex_column;
    v.kind = VarKind::Binary;
    v.is_sex = true;
    v.columns.push_back(add_column(sc.sex_column, v.name, VarKind::Binary, ""));
    c.variables.push_back(std::move(v));
  }
  for (const auto& name : sc.binary_determinants) {
    Variable v;
    v.name = name;
    v.kind = VarKind::Binary;
    v.columns.push_back(add_column(name, name, VarKind::Binary, ""));
    c.variables.push_back(std::move(v));
  }
  for (const auto& name : sc.count_determinants) {
    Variable v;
    v.name = name;
    v.kind = VarKind::Count;
    v.columns.push_back(add_column(name, name, VarKind::Count, ""));
    c.variables.push_back(std::move(v));
  }
  for (const auto& cat : sc.categoricals) {
    Variable v;
    v.name = cat.name;
    v.kind = VarKind::Categorical;
    v.levels = cat.levels;
    v.reference = cat.reference;
    for (const auto& lv : cat.levels) {
      if (lv == cat.reference) continue;
      v.columns.push_back(add_column(cat.name + "=" + lv, cat.name, VarKind::Categorical, lv));
    }
    c.variables.push_back(std::move(v));
  }

  // Resolve source columns.
  int id_idx = sc.id_column.empty() ? -1 : detail::require_column(t, sc.id_column);
  int age_idx = -1;
  if (!sc.age_column.empty()) age_idx = detail::require_column(t, sc.age_column);
  if (!sc.age_class_column.empty()) age_idx = detail::require_column(t, sc.age_class_column);
  int sex_idx = sc.sex_column.empty() ? -1 : detail::require_column(t, sc.sex_column);
  std::vector<int> bin_idx, cnt_idx, out_idx;
  for (const auto& name : sc.binary_determinants) bin_idx.push_back(detail::require_column(t, name));
  for (const auto& name : sc.count_determinants) cnt_idx.push_back(detail::require_column(t, name));
  std::vector<int> cat_idx;
  for (const auto& cat : sc.categoricals) cat_idx.push_back(detail::require_column(t, cat.name));
  for (const auto& name : sc.outcome_columns) out_idx.push_back(detail::require_column(t, name));
  for (const auto& e : sc.exclusions) {
    bool known = false;
    for (const auto& name : sc.binary_determinants) known = known || name == e.second;
    if (!known)
      throw Error(ErrorKind::Schema, "exclusion for outcome '" + e.first +
                                         "' names unknown binary determinant '" + e.second + "'");
    c.outcome_index(e.first);  // validates outcome name
  }

  c.subjects.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    int line_no = static_cast<int>(r) + 2;
    SubjectRecord rec;
    rec.id = id_idx >= 0 ? row[id_idx] : std::to_string(r + 1);
    rec.x.resize(c.columns.size(), 0.0);

    if (age_idx >= 0) {
      if (!sc.age_class_column.empty()) {
        const std::string& lab = row[age_idx];
        int cls = -1;
        for (std::size_t i = 0; i < c.age_class_labels.size(); ++i)
          if (c.age_class_labels[i] == lab) cls = static_cast<int>(i);
        if (cls < 0)
          throw Error(ErrorKind::Parse,
                      "csv line " + std::to_string(line_no) + ": unknown age class '" + lab + "'");
        rec.age_class = cls;
      } else {
        double age = parse_double_field(row[age_idx], sc.age_column, line_no);
        rec.age_class = age_class_from_edges(age, sc.age_class_edges);
      }
    }
    if (sex_idx >= 0) {
      const std::string& s = row[sex_idx];
      if (!sc.sex_levels.empty()) {
        if (s == sc.sex_levels[0]) rec.sex = 0;
        else if (s == sc.sex_levels[1]) rec.sex = 1;
        else
          throw Error(ErrorKind::Parse,
                      "csv line " + std::to_string(line_no) + ": unknown sex level '" + s + "'");
      } else {
        double v = parse_double_field(s, sc.sex_column, line_no);
        if (v != 0.0 && v != 1.0)
          throw Error(ErrorKind::Parse, "csv line " + std::to_string(line_no) + ": sex must be 0/1");
        rec.sex = static_cast<int>(v);
      }
    }

    int col = 0;
    if (has_age && sc.include_age_determinant) {
      for (std::size_t i = 1; i < c.age_class_labels.size(); ++i, ++col)
        rec.x[col] = (rec.age_class == static_cast<int>(i)) ? 1.0 : 0.0;
    }
    if (sex_idx >= 0 && sc.include_sex_determinant) rec.x[col++] = rec.sex;
    for (std::size_t j = 0; j < bin_idx.size(); ++j, ++col) {
      double v = parse_double_field(row[bin_idx[j]], sc.binary_determinants[j], line_no);
      if (v != 0.0 && v != 1.0)
        throw Error(ErrorKind::Parse, "csv line " + std::to_string(line_no) + ": binary determinant '" +
                                          sc.binary_determinants[j] + "' must be 0/1");
      rec.x[col] = v;
    }
    for (std::size_t j = 0; j < cnt_idx.size(); ++j, ++col)
      rec.x[col] = parse_double_field(row[cnt_idx[j]], sc.count_determinants[j], line_no);
    for (std::size_t j = 0; j < sc.categoricals.size(); ++j) {
      const auto& cat = sc.categoricals[j];
      const std::string& value = row[cat_idx[j]];
      bool known = value == cat.reference;
      for (const auto& lv : cat.levels) {
        if (lv == cat.reference) continue;
        rec.x[col] = (value == lv) ? 1.0 : 0.0;
        known = known || value == lv;
        ++col;
      }
      if (!known)
        throw Error(ErrorKind::Parse, "csv line " + std::to_string(line_no) + ": unknown level '" + value +
                                          "' for categorical '" + cat.name + "'");
    }

    rec.y.reserve(out_idx.size());
    for (std::size_t k = 0; k < out_idx.size(); ++k)
      rec.y.push_back(detail::parse_label(row[out_idx[k]], sc.outcome_columns[k], line_no));
    c.subjects.push_back(std::move(rec));
  }
  return c;
}

inline Cohort load_cohort_file(const std::string& csv_path, const Schema& sc) {
  return load_cohort(read_csv_file(csv_path), sc);
}

// ---------------------------------------------------------------------------
// Saving. Raw source columns are reconstructed from the encoding (a dummy
// group with all zeros maps back to the reference level), so save + load with
// the matching schema reproduces the cohort exactly.

inline Schema schema_for_cohort(const Cohort& c) {
  Schema sc;
  sc.id_column = "id";
  if (!c.age_class_labels.empty()) {
    sc.age_class_column = "age";
    sc.age_class_labels = c.age_class_labels;
  }
  for (const auto& v : c.variables) {
    if (v.is_age) continue;
    if (v.is_sex) {
      sc.sex_column = v.name;
      continue;
    }
    if (v.kind == VarKind::Binary) sc.binary_determinants.push_back(v.name);
    else if (v.kind == VarKind::Count) sc.count_determinants.push_back(v.name);
    else sc.categoricals.push_back(CategoricalDecl{v.name, v.levels, v.reference});
  }
  sc.outcome_columns = c.outcome_names;
  sc.exclusions = c.exclusions;
  bool has_age_var = false, has_sex_var = false;
  for (const auto& v : c.variables) {
    has_age_var = has_age_var || v.is_age;
    has_sex_var = has_sex_var || v.is_sex;
  }
  sc.include_age_determinant = has_age_var;
  sc.include_sex_determinant = has_sex_var;
  if (c.age_class_labels.empty()) sc.age_class_column.clear();
  if (!has_sex_var) sc.sex_column.clear();
  return sc;
}

inline CsvTable save_cohort(const Cohort& c) {
  CsvTable t;
  bool has_age = !c.age_class_labels.empty();
  bool has_sex = false;
  std::string sex_name;
  for (const auto& v : c.variables)
    if (v.is_sex) {
      has_sex = true;
      sex_name = v.name;
    }

  t.header.push_back("id");
  if (has_age) t.header.push_back("age");
  if (has_sex) t.header.push_back(sex_name);
  for (const auto& v : c.variables) {
    if (v.is_age || v.is_sex) continue;
    t.header.push_back(v.name);
  }
  for (const auto& o : c.outcome_names) t.header.push_back(o);

  for (const auto& rec : c.subjects) {
    std::vector<std::string> row;
    row.push_back(rec.id);
    if (has_age) row.push_back(c.age_class_labels[rec.age_class]);
    if (has_sex) row.push_back(std::to_string(rec.sex));
    for (const auto& v : c.variables) {
      if (v.is_age || v.is_sex) continue;
      if (v.kind == VarKind::Categorical) {
        std::string level = v.reference;
        for (std::size_t j = 0; j < v.columns.size(); ++j)
          if (rec.x[v.columns[j]] == 1.0) level = c.columns[v.columns[j]].level;
        row.push_back(level);
      } else {
        row.push_back(format_number(rec.x[v.columns[0]]));
      }
    }
    for (std::size_t k = 0; k < c.outcome_names.size(); ++k)
      row.push_back(rec.y[k] == 1 ? "1" : "0");
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void save_cohort_file(const Cohort& c, const std::string& path) {
  write_csv_file(path, save_cohort(c));
}

// ---------------------------------------------------------------------------
// Views and splits

inline Cohort subset(const Cohort& c, const std::vector<int>& rows) {
  Cohort out;
  out.age_class_labels = c.age_class_labels;
  out.outcome_names = c.outcome_names;
  out.columns = c.columns;
  out.variables = c.variables;
  out.exclusions = c.exclusions;
  out.subjects.reserve(rows.size());
  for (int i : rows) out.subjects.push_back(c.subjects[i]);
  return out;
}

struct SplitPlan {
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
  std::string stratify_outcome;  // empty = simple random split
};

struct Split {
  Cohort train;
  Cohort test;
};

inline Split split_cohort(const Cohort& c, const SplitPlan& plan) {
  if (c.n() < 2) throw Error(ErrorKind::Size, "split_cohort: need at least 2 subjects");
  if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0))
    throw Error(ErrorKind::Input, "split_cohort: train_fraction must lie in (0,1)");
  std::mt19937_64 rng = make_stream(plan.seed, "split");

  std::vector<int> train_rows, test_rows;
  if (plan.stratify_outcome.empty()) {
    std::vector<int> idx = shuffled_indices(c.n(), rng);
    auto n_train = static_cast<std::size_t>(std::lround(plan.train_fraction * c.n()));
    train_rows.assign(idx.begin(), idx.begin() + n_train);
    test_rows.assign(idx.begin() + n_train, idx.end());
  } else {
    int k = c.outcome_index(plan.stratify_outcome);
    std::vector<int> pos, neg;
    for (int i = 0; i < c.n(); ++i) (c.subjects[i].y[k] == 1 ? pos : neg).push_back(i);
    for (std::vector<int>* cls : {&pos, &neg}) {
      std::shuffle(cls->begin(), cls->end(), rng);
      auto n_train = static_cast<std::size_t>(std::lround(plan.train_fraction * cls->size()));
      train_rows.insert(train_rows.end(), cls->begin(), cls->begin() + n_train);
      test_rows.insert(test_rows.end(), cls->begin() + n_train, cls->end());
    }
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return Split{subset(c, train_rows), subset(c, test_rows)};
}

// Subjects carrying the outcome's exclusion determinant are dropped; outcomes
// without a declared exclusion pass through unchanged.
inline Cohort apply_exclusion(const Cohort& c, const std::string& outcome) {
  const std::string* det = c.exclusion_for(outcome);
  if (!det) return c;
  const Variable& v = c.variable(*det);
  if (v.kind != VarKind::Binary)
    throw Error(ErrorKind::Schema, "exclusion determinant '" + *det + "' is not binary");
  int col = v.columns[0];
  std::vector<int> keep;
  for (int i = 0; i < c.n(); ++i)
    if (c.subjects[i].x[col] == 0.0) keep.push_back(i);
  return subset(c, keep);
}

// ---------------------------------------------------------------------------
// Design matrices

struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<std::string> column_names;
  std::vector<int> column_indices;  // into Cohort::columns
};

inline DesignMatrix design_matrix(const Cohort& c, const std::vector<std::string>& variable_names) {
  DesignMatrix d;
  for (const auto& name : variable_names) {
    const Variable& v = c.variable(name);
    for (int col : v.columns) {
      d.column_indices.push_back(col);
      d.column_names.push_back(c.columns[col].name);
    }
  }
  d.X.resize(c.n(), static_cast<int>(d.column_indices.size()));
  for (int i = 0; i < c.n(); ++i)
    for (std::size_t j = 0; j < d.column_indices.size(); ++j)
      d.X(i, j) = c.subjects[i].x[d.column_indices[j]];
  return d;
}

inline Eigen::VectorXd subject_features(const Cohort& c, const SubjectRecord& rec,
                                        const std::vector<int>& column_indices) {
  Eigen::VectorXd x(column_indices.size());
  for (std::size_t j = 0; j < column_indices.size(); ++j) x[j] = rec.x[column_indices[j]];
  return x;
}

}  // namespace corisk
