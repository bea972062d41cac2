#pragma once

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ordmed/error.hpp"

namespace ordmed {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { kLe, kGe, kEq };
enum class ObjSense { kMinimize, kMaximize };

/// Linear program over bounded columns and sparse rows:
///
///   min/max  c'x + offset   s.t.  a_r'x (<=|=|>=) rhs_r,  lo <= x <= hi.
struct LinearProgram {
  struct Row {
    std::vector<int> index;
    std::vector<double> value;
    RowSense sense = RowSense::kLe;
    double rhs = 0.0;
    std::string name;
  };

  ObjSense sense = ObjSense::kMinimize;
  std::vector<double> objective;
  double objective_offset = 0.0;
  std::vector<double> col_lo, col_hi;
  std::vector<std::string> col_names;
  std::vector<Row> rows;

  int num_cols() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  int add_variable(double lo, double hi, double cost, std::string name = {}) {
    objective.push_back(cost);
    col_lo.push_back(lo);
    col_hi.push_back(hi);
    col_names.push_back(name.empty() ? "x" + std::to_string(objective.size() - 1) : std::move(name));
    return num_cols() - 1;
  }

  int add_row(const std::vector<std::pair<int, double>>& terms, RowSense s, double rhs, std::string name = {}) {
    Row r;
    r.sense = s;
    r.rhs = rhs;
    r.name = name.empty() ? "r" + std::to_string(rows.size()) : std::move(name);
    r.index.reserve(terms.size());
    r.value.reserve(terms.size());
    for (auto [j, a] : terms) {
      if (a == 0.0) continue;
      r.index.push_back(j);
      r.value.push_back(a);
    }
    rows.push_back(std::move(r));
    return num_rows() - 1;
  }

  void validate() const {
    const auto n = objective.size();
    require(col_lo.size() == n && col_hi.size() == n, ErrorCategory::kData, "LP bound vectors have wrong length");
    for (std::size_t j = 0; j < n; ++j) {
      require(!std::isnan(objective[j]) && !std::isnan(col_lo[j]) && !std::isnan(col_hi[j]),
              ErrorCategory::kData, "LP column contains NaN");
      require(col_lo[j] <= col_hi[j], ErrorCategory::kData, "LP column has lo > hi");
      require(col_lo[j] < kInf && col_hi[j] > -kInf, ErrorCategory::kData, "LP column bound points the wrong way");
    }
    for (const auto& r : rows) {
      require(r.index.size() == r.value.size(), ErrorCategory::kData, "LP row index/value mismatch");
      require(std::isfinite(r.rhs), ErrorCategory::kData, "LP row rhs must be finite");
      for (std::size_t k = 0; k < r.index.size(); ++k) {
        require(r.index[k] >= 0 && static_cast<std::size_t>(r.index[k]) < n, ErrorCategory::kData,
                "LP row references an unknown column");
        require(std::isfinite(r.value[k]), ErrorCategory::kData, "LP row coefficient is not finite");
      }
    }
  }

  double row_activity(std::size_t r, const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < rows[r].index.size(); ++k)
      s += rows[r].value[k] * x[static_cast<std::size_t>(rows[r].index[k])];
    return s;
  }

  double evaluate(const std::vector<double>& x) const {
    double s = objective_offset;
    for (std::size_t j = 0; j < objective.size(); ++j) s += objective[j] * x[j];
    return s;
  }

  /// Largest bound or row violation of x.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < objective.size(); ++j) {
      worst = std::max(worst, col_lo[j] - x[j]);
      worst = std::max(worst, x[j] - col_hi[j]);
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double a = row_activity(r, x);
      if (rows[r].sense != RowSense::kGe) worst = std::max(worst, a - rows[r].rhs);
      if (rows[r].sense != RowSense::kLe) worst = std::max(worst, rows[r].rhs - a);
    }
    return worst;
  }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration-limit";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;               // primal values (structural columns)
  double objective = 0.0;              // in the LP's own sense, offset included
  std::vector<double> duals;           // row multipliers y with c - A'y = reduced costs
  std::vector<double> reduced_costs;   // per structural column
  long iterations = 0;
};

/// Writes the LP in free-format MPS. Maximization is written as the
/// equivalent minimization of the negated objective (OBJSENSE is not part of
/// the original fixed format); the objective offset becomes an RHS entry on
/// the objective row, negated as MPS requires. Columns flagged in `integer`
/// are wrapped in INTORG/INTEND markers.
inline void write_mps(std::ostream& out, const LinearProgram& lp, const std::string& name = "ORDMED",
                      const std::vector<bool>* integer = nullptr) {
  const double sign = lp.sense == ObjSense::kMaximize ? -1.0 : 1.0;
  out << std::setprecision(17);
  out << "NAME          " << name << "\n";
  out << "ROWS\n N  OBJ\n";
  for (const auto& r : lp.rows) {
    const char* t = r.sense == RowSense::kLe ? "L" : r.sense == RowSense::kGe ? "G" : "E";
    out << " " << t << "  " << r.name << "\n";
  }
  // Column-major view of the row storage.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(static_cast<std::size_t>(lp.num_cols()));
  for (std::size_t i = 0; i < lp.rows.size(); ++i)
    for (std::size_t k = 0; k < lp.rows[i].index.size(); ++k)
      cols[static_cast<std::size_t>(lp.rows[i].index[k])].push_back({i, lp.rows[i].value[k]});
  out << "COLUMNS\n";
  bool in_int = false;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const bool is_int = integer && (*integer)[j];
    if (is_int != in_int) {
      out << "    MARKER  'MARKER'  " << (is_int ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = is_int;
    }
    if (lp.objective[j] != 0.0)
      out << "    " << lp.col_names[j] << "  OBJ  " << sign * lp.objective[j] << "\n";
    for (auto [i, a] : cols[j]) out << "    " << lp.col_names[j] << "  " << lp.rows[i].name << "  " << a << "\n";
    if (lp.objective[j] == 0.0 && cols[j].empty()) out << "    " << lp.col_names[j] << "  OBJ  0\n";
  }
  if (in_int) out << "    MARKER  'MARKER'  'INTEND'\n";
  out << "RHS\n";
  if (lp.objective_offset != 0.0) out << "    RHS  OBJ  " << -sign * lp.objective_offset << "\n";
  for (const auto& r : lp.rows)
    if (r.rhs != 0.0) out << "    RHS  " << r.name << "  " << r.rhs << "\n";
  out << "BOUNDS\n";
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const double lo = lp.col_lo[j], hi = lp.col_hi[j];
    const auto& nm = lp.col_names[j];
    if (lo == hi) {
      out << " FX BND  " << nm << "  " << lo << "\n";
      continue;
    }
    if (lo == -kInf && hi == kInf) {
      out << " FR BND  " << nm << "\n";
      continue;
    }
    if (lo == -kInf) out << " MI BND  " << nm << "\n";
    else if (lo != 0.0) out << " LO BND  " << nm << "  " << lo << "\n";
    if (hi != kInf) out << " UP BND  " << nm << "  " << hi << "\n";
  }
  out << "ENDATA\n";
}

}  // namespace ordmed
