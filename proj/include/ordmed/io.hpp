#pragma once

// CSV ingestion with column roles and transforms, the pooled two-group
// design, and result records (JSON plus an aligned text table).

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordmed/error.hpp"
#include "ordmed/model.hpp"

namespace ordmed {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------- CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  }
};

/// Comma-separated, double-quoted fields with "" escapes; CRLF tolerated.
inline CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, any = false;
  long line = 1;
  auto end_field = [&] {
    record.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    if (t.header.empty()) {
      t.header = std::move(record);
    } else if (!(record.size() == 1 && record[0].empty())) {
      require(record.size() == t.header.size(), ErrorCategory::kData,
              "line " + std::to_string(line) + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                  std::to_string(record.size()));
      t.rows.push_back(std::move(record));
    }
    record.clear();
    any = false;
  };
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        require(field.empty(), ErrorCategory::kData, "line " + std::to_string(line) + ": stray quote");
        quoted = true;
        break;
      case ',': end_field(); break;
      case '\r': break;
      case '\n':
        end_record();
        ++line;
        break;
      default: field.push_back(c);
    }
  }
  require(!quoted, ErrorCategory::kData, "unterminated quoted field");
  if (any) end_record();
  require(!t.header.empty(), ErrorCategory::kData, "CSV has no header row");
  if (t.header.size() == 1 && t.header[0].empty()) fail(ErrorCategory::kData, "CSV has no header row");
  if (!t.header.empty() && t.header[0].size() >= 3 && t.header[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
    t.header[0].erase(0, 3);
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open '" + path + "'");
  return parse_csv(in);
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Writes y followed by the covariates (and weights when present).
inline void write_dataset_csv(std::ostream& out, const OrderedDataset& d) {
  out << "y";
  for (const auto& n : d.column_names()) out << ',' << csv_quote(n);
  if (d.has_weights()) out << ",weight";
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << d.outcome(i);
    for (Eigen::Index k = 0; k < d.covariates().cols(); ++k)
      out << ',' << format_double(d.covariates()(static_cast<Eigen::Index>(i), k));
    if (d.has_weights()) out << ',' << format_double(d.weight(i));
    out << '\n';
  }
}

// ---------------------------------------------------------------- config

enum class Transform { kStandardize, kSquare, kDummy, kInteract };

inline Transform parse_transform(const std::string& s) {
  if (s == "standardize") return Transform::kStandardize;
  if (s == "square") return Transform::kSquare;
  if (s == "dummy") return Transform::kDummy;
  if (s == "interact") return Transform::kInteract;
  fail(ErrorCategory::kUsage, "unknown transform '" + s + "' (standardize, square, dummy, interact)");
}

inline const char* to_string(Transform t) {
  switch (t) {
    case Transform::kStandardize: return "standardize";
    case Transform::kSquare: return "square";
    case Transform::kDummy: return "dummy";
    case Transform::kInteract: return "interact";
  }
  return "?";
}

struct CovariateConfig {
  std::string column;
  std::string as;  // output name; defaults to the column
  std::vector<Transform> transforms;

  std::string output_name() const { return as.empty() ? column : as; }
  bool has(Transform t) const { return std::find(transforms.begin(), transforms.end(), t) != transforms.end(); }
};

struct ColumnConfig {
  std::string outcome = "y";
  /// Ordered labels mapped to 1..J. Empty means the outcome is already 1..J.
  std::vector<std::string> categories;
  std::optional<int> j_max;
  /// The first entry is the scale-normalized covariate.
  std::vector<CovariateConfig> covariates;
  std::optional<std::string> group;
  bool group_main_effect = true;
  std::optional<std::string> weight;
  /// Output column names entering the skedastic index.
  std::vector<std::string> sked;

  void validate() const {
    require(!outcome.empty(), ErrorCategory::kUsage, "config: outcome column missing");
    require(!covariates.empty(), ErrorCategory::kUsage, "config: at least one covariate is required");
    std::vector<std::string> seen = categories;
    std::sort(seen.begin(), seen.end());
    require(std::adjacent_find(seen.begin(), seen.end()) == seen.end(), ErrorCategory::kData,
            "config: outcome labels must be distinct (the map must be a bijection onto 1..J)");
    require(categories.empty() || categories.size() >= 2, ErrorCategory::kData,
            "config: at least two outcome categories are required");
    if (j_max) require(*j_max >= 2, ErrorCategory::kData, "config: j_max must be at least 2");
    if (!categories.empty() && j_max)
      require(static_cast<std::size_t>(*j_max) == categories.size(), ErrorCategory::kData,
              "config: j_max disagrees with the number of categories");
    for (const auto& c : covariates) {
      require(!c.column.empty(), ErrorCategory::kUsage, "config: covariate without a column name");
      if (c.has(Transform::kDummy))
        require(c.transforms.size() == 1 || (c.transforms.size() == 2 && c.has(Transform::kInteract)),
                ErrorCategory::kUsage, "config: dummy encoding combines only with interact");
      if (c.has(Transform::kInteract)) require(group.has_value(), ErrorCategory::kUsage, "config: interact needs a group column");
    }
  }
};

inline Json to_json(const ColumnConfig& c) {
  Json j;
  j["outcome"] = c.outcome;
  if (!c.categories.empty()) j["categories"] = c.categories;
  if (c.j_max) j["j_max"] = *c.j_max;
  Json cov = Json::array();
  for (const auto& v : c.covariates) {
    Json e;
    e["column"] = v.column;
    if (!v.as.empty()) e["as"] = v.as;
    Json tr = Json::array();
    for (auto t : v.transforms) tr.push_back(to_string(t));
    e["transforms"] = tr;
    cov.push_back(e);
  }
  j["covariates"] = cov;
  if (c.group) {
    j["group"] = *c.group;
    j["group_main_effect"] = c.group_main_effect;
  }
  if (c.weight) j["weight"] = *c.weight;
  if (!c.sked.empty()) j["sked"] = c.sked;
  return j;
}

inline ColumnConfig column_config_from_json(const Json& j) {
  static const std::vector<std::string> known{"outcome", "categories", "j_max", "covariates", "group",
                                              "group_main_effect", "weight", "sked"};
  require(j.is_object(), ErrorCategory::kUsage, "config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    require(std::find(known.begin(), known.end(), it.key()) != known.end(), ErrorCategory::kUsage,
            "config: unknown key '" + it.key() + "'");
  ColumnConfig c;
  try {
    c.outcome = j.value("outcome", std::string("y"));
    if (j.contains("categories")) c.categories = j.at("categories").get<std::vector<std::string>>();
    if (j.contains("j_max")) c.j_max = j.at("j_max").get<int>();
    require(j.contains("covariates") && j.at("covariates").is_array(), ErrorCategory::kUsage,
            "config: 'covariates' must be an array");
    for (const auto& e : j.at("covariates")) {
      CovariateConfig v;
      if (e.is_string()) {
        v.column = e.get<std::string>();
      } else {
        v.column = e.at("column").get<std::string>();
        v.as = e.value("as", std::string());
        for (const auto& t : e.value("transforms", std::vector<std::string>{})) v.transforms.push_back(parse_transform(t));
      }
      c.covariates.push_back(v);
    }
    if (j.contains("group")) c.group = j.at("group").get<std::string>();
    c.group_main_effect = j.value("group_main_effect", true);
    if (j.contains("weight")) c.weight = j.at("weight").get<std::string>();
    if (j.contains("sked")) c.sked = j.at("sked").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::kUsage, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ColumnConfig read_column_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::kUsage, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return column_config_from_json(j);
}

/// Default roles for a bare CSV: outcome "y", every other column a covariate
/// in file order, "weight" as weights.
inline ColumnConfig default_config(const CsvTable& t) {
  ColumnConfig c;
  for (const auto& h : t.header) {
    if (h == "y") continue;
    if (h == "weight") {
      c.weight = h;
      continue;
    }
    c.covariates.push_back({h, {}, {}});
  }
  return c;
}

// ---------------------------------------------------------------- loading

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> rows
  /// Per standardized column: (mean, sd) over the analysis sample.
  std::map<std::string, std::pair<double, double>> standardization;
};

inline Json to_json(const LoadReport& r) {
  Json j;
  j["rows_read"] = r.rows_read;
  j["rows_kept"] = r.rows_kept;
  Json d = Json::object();
  for (const auto& [k, v] : r.dropped) d[k] = v;
  j["dropped"] = d;
  Json s = Json::object();
  for (const auto& [k, v] : r.standardization) s[k] = {{"mean", v.first}, {"sd", v.second}};
  j["standardization"] = s;
  return j;
}

struct LoadedData {
  OrderedDataset data;
  LoadReport report;
  std::vector<std::string> category_labels;
  std::vector<std::size_t> sked_columns;  // indices into data columns
  std::optional<PooledLayout> layout;     // set when a group column is configured
};

namespace io_detail {

inline bool is_missing(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "." || s == "null";
}

inline std::optional<double> parse_number(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && s[b] == ' ') ++b;
  while (e > b && s[e - 1] == ' ') --e;
  if (b == e) return std::nullopt;
  double v = 0.0;
  const char* first = s.data() + b;
  if (*first == '+') ++first;
  auto r = std::from_chars(first, s.data() + e, v);
  if (r.ec != std::errc() || r.ptr != s.data() + e || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace io_detail

/// Pooled design [X, D, D*X_shared] from a base dataset containing D.
inline std::pair<OrderedDataset, PooledLayout> build_pooled(const OrderedDataset& data, const PooledSpec& spec) {
  const std::size_t K = data.num_columns();
  require(spec.group_dummy_column < K, ErrorCategory::kUsage, "group column out of range");
  const auto& X = data.covariates();
  const auto dcol = static_cast<Eigen::Index>(spec.group_dummy_column);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    require(X(i, dcol) == 0.0 || X(i, dcol) == 1.0, ErrorCategory::kData,
            "group column '" + data.column_names()[spec.group_dummy_column] + "' is not binary");
  require(spec.group_dummy_column != 0, ErrorCategory::kData,
          "the scale-normalized covariate cannot be the group dummy");

  PooledLayout layout;
  layout.group_main_effect = spec.group_main_effect;
  for (std::size_t c = 0; c < K; ++c)
    if (c != spec.group_dummy_column) layout.base_source.push_back(c);
  layout.base_columns = layout.base_source.size();
  for (std::size_t pos = 0; pos < layout.base_source.size(); ++pos) {
    const std::size_t src = layout.base_source[pos];
    const bool shared = spec.shared_columns.empty() ||
                        std::find(spec.shared_columns.begin(), spec.shared_columns.end(), src) != spec.shared_columns.end();
    const bool restricted =
        std::find(spec.restricted_columns.begin(), spec.restricted_columns.end(), src) != spec.restricted_columns.end();
    if (shared && !restricted) layout.interacted.push_back(pos);
  }
  for (auto c : spec.shared_columns) require(c < K && c != spec.group_dummy_column, ErrorCategory::kUsage, "bad shared column");
  for (auto c : spec.restricted_columns) require(c < K, ErrorCategory::kUsage, "bad restricted column");

  const auto n = X.rows();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(layout.pooled_columns()));
  std::vector<std::string> names;
  for (auto src : layout.base_source) names.push_back(data.column_names()[src]);
  const std::string dname = data.column_names()[spec.group_dummy_column];
  if (layout.group_main_effect) names.push_back(dname);
  for (auto pos : layout.interacted) names.push_back(dname + ":" + data.column_names()[layout.base_source[pos]]);
  Eigen::RowVectorXd base(static_cast<Eigen::Index>(layout.base_columns));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < layout.base_columns; ++p)
      base(static_cast<Eigen::Index>(p)) = X(i, static_cast<Eigen::Index>(layout.base_source[p]));
    out.row(i) = layout.pooled_row(base, X(i, dcol));
  }
  return {OrderedDataset(data.outcomes(), std::move(out), std::move(names), data.j_max(), data.weights()), layout};
}

inline LoadedData load_table(const CsvTable& t, const ColumnConfig& cfg) {
  cfg.validate();
  using io_detail::is_missing;
  using io_detail::parse_number;
  auto col = [&](const std::string& name) {
    auto c = t.column(name);
    require(c.has_value(), ErrorCategory::kData, "unknown column '" + name + "'");
    return *c;
  };
  const std::size_t yc = col(cfg.outcome);
  std::vector<std::size_t> cc;
  for (const auto& v : cfg.covariates) cc.push_back(col(v.column));
  const std::optional<std::size_t> wc = cfg.weight ? std::optional(col(*cfg.weight)) : std::nullopt;
  const std::optional<std::size_t> gc = cfg.group ? std::optional(col(*cfg.group)) : std::nullopt;

  LoadReport rep;
  rep.rows_read = t.rows.size();
  std::vector<int> y;
  std::vector<double> w;
  std::vector<double> gval;
  std::vector<std::size_t> kept;
  int max_y = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    std::string reason;
    int yi = 0;
    const std::string& ys = row[yc];
    if (is_missing(ys)) {
      reason = "missing";
    } else if (!cfg.categories.empty()) {
      auto it = std::find(cfg.categories.begin(), cfg.categories.end(), ys);
      if (it == cfg.categories.end()) reason = "unknown outcome label";
      else yi = static_cast<int>(it - cfg.categories.begin()) + 1;
    } else {
      auto v = parse_number(ys);
      if (!v) reason = "non-numeric";
      else if (*v != std::floor(*v) || *v < 1) reason = "outcome not a positive integer";
      else yi = static_cast<int>(*v);
    }
    for (std::size_t k = 0; reason.empty() && k < cc.size(); ++k) {
      const std::string& s = row[cc[k]];
      if (is_missing(s)) reason = "missing";
      else if (!cfg.covariates[k].has(Transform::kDummy) && !parse_number(s)) reason = "non-numeric";
    }
    double wi = 1.0, gi = 0.0;
    if (reason.empty() && wc) {
      auto v = parse_number(row[*wc]);
      if (is_missing(row[*wc])) reason = "missing";
      else if (!v) reason = "non-numeric";
      else if (*v < 0) reason = "negative weight";
      else wi = *v;
    }
    if (reason.empty() && gc) {
      auto v = parse_number(row[*gc]);
      if (is_missing(row[*gc])) reason = "missing";
      else if (!v) reason = "non-numeric";
      else if (*v != 0.0 && *v != 1.0) fail(ErrorCategory::kData, "group column '" + *cfg.group + "' is not binary");
      else gi = *v;
    }
    if (!reason.empty()) {
      ++rep.dropped[reason];
      continue;
    }
    kept.push_back(r);
    y.push_back(yi);
    w.push_back(wi);
    gval.push_back(gi);
    max_y = std::max(max_y, yi);
  }
  rep.rows_kept = kept.size();
  require(!kept.empty(), ErrorCategory::kData, "no usable rows after dropping missing or invalid values");
  int J = cfg.categories.empty() ? (cfg.j_max ? *cfg.j_max : max_y) : static_cast<int>(cfg.categories.size());
  require(max_y <= J, ErrorCategory::kData, "outcome exceeds j_max");
  require(J >= 2, ErrorCategory::kData, "outcome takes fewer than two categories");

  // Build columns in declared order; statistics use the analysis sample.
  const std::size_t n = kept.size();
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  std::vector<bool> interact;
  for (std::size_t k = 0; k < cfg.covariates.size(); ++k) {
    const auto& cv = cfg.covariates[k];
    if (cv.has(Transform::kDummy)) {
      std::vector<std::string> raw(n);
      for (std::size_t i = 0; i < n; ++i) raw[i] = t.rows[kept[i]][cc[k]];
      std::vector<std::string> levels = raw;
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      const bool numeric = std::all_of(levels.begin(), levels.end(), [](const std::string& s) { return parse_number(s).has_value(); });
      if (numeric)
        std::sort(levels.begin(), levels.end(),
                  [](const std::string& a, const std::string& b) { return *parse_number(a) < *parse_number(b); });
      require(levels.size() >= 2, ErrorCategory::kData, "dummy column '" + cv.column + "' has a single level");
      for (std::size_t l = 1; l < levels.size(); ++l) {  // first level is the reference
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = raw[i] == levels[l] ? 1.0 : 0.0;
        cols.push_back(std::move(d));
        names.push_back(cv.output_name() + "=" + levels[l]);
        interact.push_back(cv.has(Transform::kInteract));
      }
      continue;
    }
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = *parse_number(t.rows[kept[i]][cc[k]]);
    for (auto tr : cv.transforms) {
      if (tr == Transform::kSquare) {
        for (double& x : v) x *= x;
      } else if (tr == Transform::kStandardize) {
        require(n >= 2, ErrorCategory::kData, "cannot standardize '" + cv.output_name() + "' with one row");
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(n);
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        require(sd > 1e-12 * std::max(1.0, std::abs(m)), ErrorCategory::kData,
                "cannot standardize '" + cv.output_name() + "': zero variance");
        for (double& x : v) x = (x - m) / sd;
        rep.standardization[cv.output_name()] = {m, sd};
      }
    }
    cols.push_back(std::move(v));
    names.push_back(cv.output_name());
    interact.push_back(cv.has(Transform::kInteract));
  }
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorCategory::kData,
          "duplicate output column names; use 'as' to rename");

  std::optional<std::size_t> group_col;
  if (gc) {
    require(std::find(names.begin(), names.end(), *cfg.group) == names.end(), ErrorCategory::kData,
            "group column '" + *cfg.group + "' must not also be a covariate");
    group_col = cols.size();
    cols.push_back(gval);
    names.push_back(*cfg.group);
    interact.push_back(false);
  }

  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = cols[k][i];
  std::optional<std::vector<double>> weights;
  if (wc) weights = w;
  OrderedDataset base(y, std::move(X), names, J, weights);

  LoadedData out{base, rep, cfg.categories, {}, std::nullopt};
  if (out.category_labels.empty())
    for (int j = 1; j <= J; ++j) out.category_labels.push_back(std::to_string(j));
  if (gc) {
    // Interactions only for covariates marked "interact"; none means D alone.
    PooledSpec ps;
    ps.group_dummy_column = *group_col;
    ps.group_main_effect = cfg.group_main_effect;
    for (std::size_t k = 0; k < *group_col; ++k) {
      if (interact[k]) ps.shared_columns.push_back(k);
      else ps.restricted_columns.push_back(k);
    }
    auto [pooled, layout] = build_pooled(base, ps);
    out.data = std::move(pooled);
    out.layout = layout;
  }
  for (const auto& s : cfg.sked) {
    auto c = out.data.column_index(s);
    require(c.has_value(), ErrorCategory::kData, "skedastic column '" + s + "' is not in the design");
    out.sked_columns.push_back(*c);
  }
  return out;
}

inline LoadedData load_csv(const std::string& path, const ColumnConfig& cfg) { return load_table(read_csv(path), cfg); }

// ---------------------------------------------------------------- results

struct CoefficientRow {
  std::string name;
  double raw = 0.0;
  std::optional<double> scaled;
  std::optional<double> std_error;
  bool fixed = false;  // normalized, not estimated

  bool operator==(const CoefficientRow&) const = default;
};

struct ResultRecord {
  std::string estimator;  // lad | probit | logit
  std::vector<CoefficientRow> coefficients;
  std::vector<CoefficientRow> skedastic;
  std::vector<CoefficientRow> thresholds;
  std::optional<double> objective;  // weighted absolute deviation
  std::optional<double> loglik;
  std::optional<std::string> reference;
  Json certificate = Json::object();
  Json config = Json::object();
  Json data = Json::object();
  std::string timestamp;

  bool operator==(const ResultRecord&) const = default;
};

namespace io_detail {

inline Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline std::optional<double> opt_double(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline Json rows_to_json(const std::vector<CoefficientRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows)
    a.push_back({{"name", r.name}, {"raw", r.raw}, {"scaled", opt(r.scaled)}, {"std_error", opt(r.std_error)},
                 {"fixed", r.fixed}});
  return a;
}

inline std::vector<CoefficientRow> rows_from_json(const Json& a) {
  std::vector<CoefficientRow> out;
  for (const auto& e : a)
    out.push_back({e.at("name").get<std::string>(), e.at("raw").get<double>(), opt_double(e, "scaled"),
                   opt_double(e, "std_error"), e.value("fixed", false)});
  return out;
}

}  // namespace io_detail

inline Json to_json(const ResultRecord& r) {
  using namespace io_detail;
  Json j;
  j["format"] = "ordmed-result";
  j["version"] = 1;
  j["estimator"] = r.estimator;
  j["coefficients"] = rows_to_json(r.coefficients);
  j["skedastic"] = rows_to_json(r.skedastic);
  j["thresholds"] = rows_to_json(r.thresholds);
  j["objective"] = opt(r.objective);
  j["loglik"] = opt(r.loglik);
  j["reference"] = r.reference ? Json(*r.reference) : Json(nullptr);
  j["certificate"] = r.certificate;
  j["config"] = r.config;
  j["data"] = r.data;
  j["timestamp"] = r.timestamp;
  return j;
}

inline ResultRecord result_from_json(const Json& j) {
  using namespace io_detail;
  try {
    require(j.value("format", std::string()) == "ordmed-result", ErrorCategory::kData, "not an ordmed result record");
    ResultRecord r;
    r.estimator = j.at("estimator").get<std::string>();
    r.coefficients = rows_from_json(j.at("coefficients"));
    r.skedastic = rows_from_json(j.at("skedastic"));
    r.thresholds = rows_from_json(j.at("thresholds"));
    r.objective = opt_double(j, "objective");
    r.loglik = opt_double(j, "loglik");
    if (!j.at("reference").is_null()) r.reference = j.at("reference").get<std::string>();
    r.certificate = j.at("certificate");
    r.config = j.at("config");
    r.data = j.at("data");
    r.timestamp = j.at("timestamp").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::kData, std::string("malformed result record: ") + e.what());
  }
}

inline std::string serialize(const ResultRecord& r) { return to_json(r).dump(2) + "\n"; }

inline ResultRecord parse_result(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::kData, std::string("result record is not valid JSON: ") + e.what());
  }
  return result_from_json(j);
}

/// Fixed-width table: name, raw, scaled (when a reference is set), s.e.
inline std::string format_table(const ResultRecord& r) {
  std::ostringstream out;
  std::size_t w = 12;
  for (const auto* block : {&r.coefficients, &r.skedastic, &r.thresholds})
    for (const auto& row : *block) w = std::max(w, row.name.size() + 2);
  const bool scaled = r.reference.has_value();
  bool se = false;
  for (const auto* block : {&r.coefficients, &r.skedastic, &r.thresholds})
    for (const auto& row : *block) se = se || row.std_error.has_value();
  auto num = [](std::optional<double> v) {
    std::ostringstream s;
    if (v) s << std::fixed << std::setprecision(3) << *v;
    else s << "";
    return s.str();
  };
  auto line = [&](const CoefficientRow& row) {
    out << std::left << std::setw(static_cast<int>(w)) << row.name << std::right << std::setw(12) << num(row.raw);
    if (scaled) out << std::setw(12) << num(row.scaled);
    if (se) out << std::setw(12) << (row.std_error ? "(" + num(row.std_error) + ")" : std::string(row.fixed ? "fixed" : ""));
    out << '\n';
  };
  out << "estimator: " << r.estimator << '\n';
  out << std::left << std::setw(static_cast<int>(w)) << "" << std::right << std::setw(12) << "raw";
  if (scaled) out << std::setw(12) << "scaled";
  if (se) out << std::setw(12) << "s.e.";
  out << '\n';
  for (const auto& row : r.coefficients) line(row);
  if (!r.skedastic.empty()) {
    out << "skedastic\n";
    for (const auto& row : r.skedastic) line(row);
  }
  out << "thresholds\n";
  for (const auto& row : r.thresholds) line(row);
  if (r.objective) out << "objective " << format_double(*r.objective) << '\n';
  if (r.loglik) out << "log-likelihood " << std::setprecision(10) << *r.loglik << '\n';
  if (r.certificate.contains("status")) out << "status " << r.certificate.at("status").get<std::string>() << '\n';
  return out.str();
}

}  // namespace ordmed
