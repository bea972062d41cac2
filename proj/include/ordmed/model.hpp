#pragma once

// Core domain types for threshold-crossing ordered-response models:
//
//   Y = j  iff  gamma_{j-1} < H <= gamma_j,   H = X'theta + U,
//
// with gamma_0 = -inf and gamma_J = +inf. Cells are closed above, so an index
// exactly equal to gamma_j falls in category j.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ordmed/error.hpp"

namespace ordmed {

/// n observations of an ordered outcome in {1..J} with covariates X.
///
/// Column 0 of the covariate matrix is the scale-normalized covariate X1
/// whose coefficient is fixed to +/-1; the remaining P columns carry free
/// slopes. The design never contains an intercept: that role is played by the
/// thresholds.
class OrderedDataset {
 public:
  OrderedDataset(std::vector<int> outcomes, Eigen::MatrixXd covariates,
                 std::vector<std::string> column_names, int j_max,
                 std::optional<std::vector<double>> weights = std::nullopt)
      : outcomes_(std::move(outcomes)),
        x_(std::move(covariates)),
        names_(std::move(column_names)),
        j_max_(j_max),
        weights_(std::move(weights)) {
    validate();
  }

  std::size_t size() const { return outcomes_.size(); }
  int j_max() const { return j_max_; }
  /// Number of free slopes P (columns after X1).
  std::size_t num_free() const { return static_cast<std::size_t>(x_.cols()) - 1; }
  std::size_t num_columns() const { return static_cast<std::size_t>(x_.cols()); }

  const std::vector<int>& outcomes() const { return outcomes_; }
  int outcome(std::size_t i) const { return outcomes_[i]; }
  const Eigen::MatrixXd& covariates() const { return x_; }
  const std::vector<std::string>& column_names() const { return names_; }

  bool has_weights() const { return weights_.has_value(); }
  const std::optional<std::vector<double>>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_ ? (*weights_)[i] : 1.0; }

  bool unit_weights() const {
    if (!weights_) return true;
    return std::all_of(weights_->begin(), weights_->end(),
                       [](double w) { return w == 1.0; });
  }
  bool integral_weights() const {
    if (!weights_) return true;
    return std::all_of(weights_->begin(), weights_->end(),
                       [](double w) { return w == std::floor(w); });
  }

  /// Index of the column with the given name, if present.
  std::optional<std::size_t> column_index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

 private:
  void validate() const {
    require(j_max_ >= 2, ErrorCategory::kData, "J must be at least 2");
    require(x_.cols() >= 1, ErrorCategory::kData, "dataset needs at least one covariate");
    require(static_cast<std::size_t>(x_.rows()) == outcomes_.size(), ErrorCategory::kData,
            "covariate rows do not match outcome count");
    require(names_.size() == static_cast<std::size_t>(x_.cols()), ErrorCategory::kData,
            "column_names length does not match covariate columns");
    for (int y : outcomes_)
      require(y >= 1 && y <= j_max_, ErrorCategory::kData,
              "outcome " + std::to_string(y) + " outside 1.." + std::to_string(j_max_));
    require(x_.allFinite(), ErrorCategory::kData, "covariates contain non-finite values");
    if (weights_) {
      require(weights_->size() == outcomes_.size(), ErrorCategory::kData,
              "weights length does not match outcome count");
      bool any_positive = false;
      for (double w : *weights_) {
        require(std::isfinite(w) && w >= 0.0, ErrorCategory::kData, "weights must be finite and >= 0");
        any_positive = any_positive || w > 0.0;
      }
      require(any_positive, ErrorCategory::kData, "weights are all zero");
    }
    // A constant nonzero column acts as an intercept, which the thresholds
    // already absorb. All-zero columns (e.g. an empty interaction block) are
    // allowed; they carry no information but do not break identification of
    // the other coefficients.
    if (x_.rows() >= 2) {
      for (Eigen::Index c = 0; c < x_.cols(); ++c) {
        const double lo = x_.col(c).minCoeff();
        const double hi = x_.col(c).maxCoeff();
        if (lo != hi) continue;
        require(c != 0, ErrorCategory::kData, "first covariate '" + names_[0] + "' is constant");
        require(lo == 0.0, ErrorCategory::kData,
                "covariate '" + names_[static_cast<std::size_t>(c)] +
                    "' is constant (the design must not contain an intercept)");
      }
    }
  }

  std::vector<int> outcomes_;
  Eigen::MatrixXd x_;
  std::vector<std::string> names_;
  int j_max_;
  std::optional<std::vector<double>> weights_;
};

/// theta = (first_coef, beta) with first_coef fixed at +1 or -1.
struct ThetaSplit {
  double first_coef = 1.0;
  Eigen::VectorXd beta;

  ThetaSplit() = default;
  explicit ThetaSplit(Eigen::VectorXd b, double first = 1.0) : first_coef(first), beta(std::move(b)) {
    require(first_coef == 1.0 || first_coef == -1.0, ErrorCategory::kData,
            "first coefficient must be +1 or -1");
  }

  /// x'theta for a full covariate row (X1 first).
  double index(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    require(x.size() == beta.size() + 1, ErrorCategory::kData, "covariate/parameter dimension mismatch");
    return first_coef * x(0) + x.tail(beta.size()).dot(beta);
  }
};

/// Strictly increasing interior thresholds gamma_1 < ... < gamma_{J-1}.
class Thresholds {
 public:
  Thresholds() = default;
  explicit Thresholds(std::vector<double> gamma) : gamma_(std::move(gamma)) {
    require(!gamma_.empty(), ErrorCategory::kData, "need at least one threshold");
    for (std::size_t j = 0; j < gamma_.size(); ++j) {
      require(std::isfinite(gamma_[j]), ErrorCategory::kData, "thresholds must be finite");
      if (j > 0)
        require(gamma_[j - 1] < gamma_[j], ErrorCategory::kData, "thresholds must be strictly increasing");
    }
  }

  int j_max() const { return static_cast<int>(gamma_.size()) + 1; }
  std::size_t size() const { return gamma_.size(); }
  double operator[](std::size_t j) const { return gamma_[j]; }
  const std::vector<double>& values() const { return gamma_; }

 private:
  std::vector<double> gamma_;
};

/// Category of a latent index value: sum_j j * 1[gamma_{j-1} < v <= gamma_j].
inline int category_of_index(double v, const Thresholds& gamma) {
  const auto& g = gamma.values();
  // Number of thresholds strictly below v.
  return 1 + static_cast<int>(std::lower_bound(g.begin(), g.end(), v) - g.begin());
}

inline int predict_category(const Eigen::Ref<const Eigen::RowVectorXd>& x, const ThetaSplit& theta,
                            const Thresholds& gamma) {
  return category_of_index(theta.index(x), gamma);
}

/// Objective coefficient |y-j| - |y-j-1|: +1 when j <= y-1, -1 when j >= y.
inline int lad_coefficient(int y, int j) { return j <= y - 1 ? 1 : -1; }

/// |y - category(v)| written as |y-J| + sum_j (|y-j|-|y-j-1|) 1[v <= gamma_j].
inline int lad_deviation_decomposed(int y, double v, const Thresholds& gamma) {
  const int J = gamma.j_max();
  int total = std::abs(y - J);
  for (int j = 1; j <= J - 1; ++j)
    if (v <= gamma[static_cast<std::size_t>(j - 1)]) total += lad_coefficient(y, j);
  return total;
}

inline Eigen::VectorXd latent_index(const OrderedDataset& data, const ThetaSplit& theta) {
  require(static_cast<std::size_t>(theta.beta.size()) == data.num_free(), ErrorCategory::kData,
          "beta length does not match the number of free covariates");
  const auto& x = data.covariates();
  return theta.first_coef * x.col(0) + x.rightCols(static_cast<Eigen::Index>(data.num_free())) * theta.beta;
}

/// Weighted sum of |Y_i - predicted category_i|.
inline double lad_objective(const OrderedDataset& data, const ThetaSplit& theta, const Thresholds& gamma) {
  require(gamma.j_max() == data.j_max(), ErrorCategory::kData, "threshold count does not match J-1");
  const Eigen::VectorXd v = latent_index(data, theta);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    total += data.weight(i) * std::abs(data.outcome(i) - category_of_index(v(static_cast<Eigen::Index>(i)), gamma));
  return total;
}

inline double lad_objective(const OrderedDataset& data, const Eigen::VectorXd& beta, const Thresholds& gamma) {
  return lad_objective(data, ThetaSplit(beta), gamma);
}

/// Box parameter space for (beta, gamma).
struct ParamBox {
  Eigen::VectorXd beta_lo, beta_hi;
  std::vector<double> gamma_lo, gamma_hi;

  ParamBox() = default;
  ParamBox(Eigen::VectorXd blo, Eigen::VectorXd bhi, std::vector<double> glo, std::vector<double> ghi)
      : beta_lo(std::move(blo)), beta_hi(std::move(bhi)), gamma_lo(std::move(glo)), gamma_hi(std::move(ghi)) {
    validate();
  }

  std::size_t num_free() const { return static_cast<std::size_t>(beta_lo.size()); }
  std::size_t num_thresholds() const { return gamma_lo.size(); }

  void validate() const {
    require(beta_lo.size() == beta_hi.size(), ErrorCategory::kData, "beta bounds length mismatch");
    require(gamma_lo.size() == gamma_hi.size() && !gamma_lo.empty(), ErrorCategory::kData,
            "gamma bounds length mismatch");
    for (Eigen::Index p = 0; p < beta_lo.size(); ++p)
      require(std::isfinite(beta_lo(p)) && std::isfinite(beta_hi(p)) && beta_lo(p) <= beta_hi(p),
              ErrorCategory::kData, "beta box must be finite with lo <= hi");
    for (std::size_t j = 0; j < gamma_lo.size(); ++j)
      require(std::isfinite(gamma_lo[j]) && std::isfinite(gamma_hi[j]) && gamma_lo[j] <= gamma_hi[j],
              ErrorCategory::kData, "gamma box must be finite with lo <= hi");
  }

  bool contains(const Eigen::VectorXd& b, std::span<const double> c, double tol = 0.0) const {
    for (Eigen::Index p = 0; p < b.size(); ++p)
      if (b(p) < beta_lo(p) - tol || b(p) > beta_hi(p) + tol) return false;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[j] < gamma_lo[j] - tol || c[j] > gamma_hi[j] + tol) return false;
    return true;
  }

  /// beta in [-bound, bound]^P; gamma wide enough that any index value in the
  /// box can fall on either side of every threshold.
  static ParamBox symmetric(const OrderedDataset& data, double bound) {
    require(std::isfinite(bound) && bound >= 0.0, ErrorCategory::kData, "box bound must be finite and >= 0");
    const auto P = static_cast<Eigen::Index>(data.num_free());
    const auto& x = data.covariates();
    double reach = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      reach = std::max(reach, std::abs(x(i, 0)) + bound * x.row(i).tail(P).cwiseAbs().sum());
    const double g = reach + 1.0;
    const auto J1 = static_cast<std::size_t>(data.j_max() - 1);
    return ParamBox(Eigen::VectorXd::Constant(P, -bound), Eigen::VectorXd::Constant(P, bound),
                    std::vector<double>(J1, -g), std::vector<double>(J1, g));
  }
};

/// Pooled two-group model H = X'pi_A + D * X'pi_B + U.
struct PooledSpec {
  std::size_t group_dummy_column = 0;
  /// Base columns that receive a D interaction. Empty means every non-D column.
  std::vector<std::size_t> shared_columns;
  /// Base columns whose coefficient is restricted equal across groups; their
  /// interaction is omitted.
  std::vector<std::size_t> restricted_columns;
  /// Emit D itself (the interaction with the implicit constant).
  bool group_main_effect = true;
};

/// Column map of a pooled design produced from a base design.
struct PooledLayout {
  std::size_t base_columns = 0;            // base columns kept (D removed)
  std::vector<std::size_t> base_source;    // original column index for each kept base column
  bool group_main_effect = true;           // pooled column base_columns is D
  std::vector<std::size_t> interacted;     // positions (within kept base) interacted with D

  std::size_t pooled_columns() const {
    return base_columns + (group_main_effect ? 1 : 0) + interacted.size();
  }

  /// Pooled design row for a base row (in kept-column order) and group value.
  Eigen::RowVectorXd pooled_row(const Eigen::Ref<const Eigen::RowVectorXd>& base, double d) const {
    require(static_cast<std::size_t>(base.size()) == base_columns, ErrorCategory::kData,
            "base row has wrong length for pooled layout");
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(pooled_columns()));
    row.head(base.size()) = base;
    auto k = static_cast<Eigen::Index>(base_columns);
    if (group_main_effect) row(k++) = d;
    for (std::size_t pos : interacted) row(k++) = d * base(static_cast<Eigen::Index>(pos));
    return row;
  }
};

}  // namespace ordmed
