#pragma once

// Scale-free comparisons of ordinal outcomes: medians, first-order stochastic
// dominance, and the constructions that reverse a mean ranking when dominance
// fails.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ordmed/error.hpp"
#include "ordmed/het_ordered.hpp"
#include "ordmed/linear_program.hpp"
#include "ordmed/model.hpp"
#include "ordmed/simplex.hpp"

namespace ordmed {

inline constexpr double kDistributionTol = 1e-12;

/// Probabilities over categories 1..J.
struct OrdinalDistribution {
  std::vector<double> probs;
  double sample_size = 0.0;  // zero when supplied rather than estimated

  OrdinalDistribution() = default;
  explicit OrdinalDistribution(std::vector<double> p, double n = 0.0) : probs(std::move(p)), sample_size(n) {
    validate();
  }

  static OrdinalDistribution from_outcomes(const std::vector<int>& y, int J,
                                           const std::vector<double>* weights = nullptr) {
    require(J >= 1, ErrorCategory::kData, "J must be positive");
    std::vector<double> p(static_cast<std::size_t>(J), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      require(y[i] >= 1 && y[i] <= J, ErrorCategory::kData, "outcome outside 1..J");
      const double w = weights ? (*weights)[i] : 1.0;
      p[static_cast<std::size_t>(y[i] - 1)] += w;
      total += w;
    }
    require(total > 0.0, ErrorCategory::kData, "empty sample");
    for (double& v : p) v /= total;
    return OrdinalDistribution(std::move(p), total);
  }

  int j_max() const { return static_cast<int>(probs.size()); }

  void validate() const {
    require(!probs.empty(), ErrorCategory::kData, "distribution needs at least one category");
    double s = 0.0;
    for (double v : probs) {
      require(v >= 0.0 && std::isfinite(v), ErrorCategory::kData, "probabilities must be non-negative");
      s += v;
    }
    require(std::abs(s - 1.0) <= kDistributionTol * static_cast<double>(probs.size()), ErrorCategory::kData,
            "probabilities must sum to 1");
  }

  std::vector<double> cdf() const {
    std::vector<double> F(probs.size());
    double c = 0.0;
    for (std::size_t j = 0; j < probs.size(); ++j) F[j] = c += probs[j];
    return F;
  }

  double mean(const std::vector<double>& labels) const {
    require(labels.size() == probs.size(), ErrorCategory::kData, "one label per category");
    double m = 0.0;
    for (std::size_t j = 0; j < probs.size(); ++j) m += labels[j] * probs[j];
    return m;
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t j = 0; j < probs.size(); ++j) m += static_cast<double>(j + 1) * probs[j];
    return m;
  }
};

/// Smallest category whose CDF reaches one half.
inline int median_category(const OrdinalDistribution& d) {
  d.validate();
  const auto F = d.cdf();
  for (std::size_t j = 0; j < F.size(); ++j)
    if (F[j] >= 0.5 - kDistributionTol) return static_cast<int>(j) + 1;
  return d.j_max();
}

/// inf{z : share of the sample <= z is at least 1/2}; no interpolation.
inline double sample_median(std::vector<double> v) {
  require(!v.empty(), ErrorCategory::kData, "median of an empty sample");
  const std::size_t k = (v.size() + 1) / 2 - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

inline int compare_observed_medians(const OrdinalDistribution& a, const OrdinalDistribution& b) {
  require(a.j_max() == b.j_max(), ErrorCategory::kData, "distributions have different numbers of categories");
  return sign_of(median_category(a) - median_category(b));
}

enum class Dominance { kFirstDominates, kSecondDominates, kNeither, kEqual };

inline const char* to_string(Dominance d) {
  switch (d) {
    case Dominance::kFirstDominates: return "a_dominates";
    case Dominance::kSecondDominates: return "b_dominates";
    case Dominance::kNeither: return "neither";
    case Dominance::kEqual: return "equal";
  }
  return "unknown";
}

/// a dominates b when F_a <= F_b everywhere.
inline Dominance fosd_discrete(const OrdinalDistribution& a, const OrdinalDistribution& b) {
  require(a.j_max() == b.j_max(), ErrorCategory::kData, "distributions have different numbers of categories");
  const auto Fa = a.cdf(), Fb = b.cdf();
  bool a_below = false, b_below = false;
  for (std::size_t j = 0; j < Fa.size(); ++j) {
    if (Fa[j] < Fb[j] - kDistributionTol) a_below = true;
    if (Fb[j] < Fa[j] - kDistributionTol) b_below = true;
  }
  if (a_below && b_below) return Dominance::kNeither;
  if (a_below) return Dominance::kFirstDominates;
  if (b_below) return Dominance::kSecondDominates;
  return Dominance::kEqual;
}

/// Two latent normal groups H_g ~ N(mu_g, var_g).
struct LatentGaussianPair {
  double mu1 = 0.0, var1 = 1.0, mu2 = 0.0, var2 = 1.0;

  void validate() const {
    require(var1 > 0.0 && var2 > 0.0, ErrorCategory::kData, "variances must be positive");
    require(std::isfinite(mu1) && std::isfinite(mu2), ErrorCategory::kData, "means must be finite");
  }
};

enum class GaussianDominance { kDominates1, kDominates2, kEqual, kNone };

inline const char* to_string(GaussianDominance d) {
  switch (d) {
    case GaussianDominance::kDominates1: return "dominates_1";
    case GaussianDominance::kDominates2: return "dominates_2";
    case GaussianDominance::kEqual: return "equal";
    case GaussianDominance::kNone: return "none";
  }
  return "unknown";
}

/// Normal laws are FOSD-ordered only when the variances agree.
inline GaussianDominance fosd_gaussian(const LatentGaussianPair& p, double tol_var = 1e-12) {
  p.validate();
  const bool same_var = std::abs(p.var1 - p.var2) < tol_var;
  if (!same_var) return GaussianDominance::kNone;
  if (p.mu1 == p.mu2) return GaussianDominance::kEqual;
  return p.mu1 > p.mu2 ? GaussianDominance::kDominates1 : GaussianDominance::kDominates2;
}

/// tau(h) = -exp(-k h) (sign -1) or exp(k h) (sign +1).
struct ExponentialTransform {
  int sign = -1;
  double k = 0.0;

  double operator()(double h) const { return sign < 0 ? -std::exp(-k * h) : std::exp(k * h); }

  /// E[tau(H)] for H ~ N(mu, var).
  double expectation(double mu, double var) const {
    return sign < 0 ? -std::exp(-k * mu + 0.5 * k * k * var) : std::exp(k * mu + 0.5 * k * k * var);
  }
};

struct ExponentialReversal {
  double k_star = 0.0;
  double k_witness = 0.0;
  ExponentialTransform witness;       // transform at k_witness
  int original_ranking = 0;           // sign(mu1 - mu2)
  int transformed_ranking = 0;        // sign(E tau(H1) - E tau(H2)) at the witness
  double transformed_mean1 = 0.0, transformed_mean2 = 0.0;
};

/// Increasing exponential transform that flips the ranking of the means.
inline ExponentialReversal exponential_reversal(const LatentGaussianPair& p, double tol_var = 1e-12) {
  p.validate();
  require(std::abs(p.var1 - p.var2) >= tol_var, ErrorCategory::kData,
          "equal variances: the groups are FOSD-ordered and no increasing transform reverses the means");
  require(p.mu1 != p.mu2, ErrorCategory::kData, "equal means: there is no ranking to reverse");
  const double dmu = p.mu1 - p.mu2, dvar = p.var1 - p.var2;
  ExponentialReversal r;
  const double k = 2.0 * dmu / dvar;
  r.witness.sign = k > 0.0 ? -1 : 1;
  r.k_star = std::abs(k);
  r.k_witness = 2.0 * r.k_star;
  r.witness.k = r.k_witness;
  r.original_ranking = sign_of(dmu);
  r.transformed_mean1 = r.witness.expectation(p.mu1, p.var1);
  r.transformed_mean2 = r.witness.expectation(p.mu2, p.var2);
  // Compare on the log scale; both expectations share the transform's sign.
  const double l1 = r.witness.sign * p.mu1 * r.k_witness + 0.5 * r.k_witness * r.k_witness * p.var1;
  const double l2 = r.witness.sign * p.mu2 * r.k_witness + 0.5 * r.k_witness * r.k_witness * p.var2;
  r.transformed_ranking = r.witness.sign > 0 ? sign_of(l1 - l2) : sign_of(l2 - l1);
  return r;
}

struct RelabelResult {
  bool reversed = false;
  std::vector<double> labels;       // increasing, t_1 = 1, t_J = J
  double original_mean_diff = 0.0;  // under labels 1..J
  double achieved_mean_diff = 0.0;
};

/// Searches increasing labels 1 = t_1 < ... < t_J = J (consecutive gaps at
/// least `gap`) for one that flips the sign of mean(a) - mean(b).
inline RelabelResult relabel_reversal(const OrdinalDistribution& a, const OrdinalDistribution& b,
                                      double gap = 1e-3, double tol = 1e-9) {
  require(a.j_max() == b.j_max(), ErrorCategory::kData, "distributions have different numbers of categories");
  a.validate();
  b.validate();
  const int J = a.j_max();
  require(gap >= 0.0, ErrorCategory::kUsage, "gap must be non-negative");
  require(J < 2 || gap * (J - 1) <= (J - 1) + 1e-15, ErrorCategory::kUsage,
          "gap too large for the normalized label span");
  RelabelResult out;
  out.original_mean_diff = a.mean() - b.mean();
  out.labels.resize(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) out.labels[static_cast<std::size_t>(j)] = j + 1;
  out.achieved_mean_diff = out.original_mean_diff;
  const int s0 = std::abs(out.original_mean_diff) > tol ? sign_of(out.original_mean_diff) : 0;
  if (s0 == 0 || J < 3) return out;

  LinearProgram lp;
  lp.sense = s0 > 0 ? ObjSense::kMinimize : ObjSense::kMaximize;
  for (int j = 0; j < J; ++j) {
    const double fixed = j == 0 ? 1.0 : (j == J - 1 ? J : kInf);
    const double dp = a.probs[static_cast<std::size_t>(j)] - b.probs[static_cast<std::size_t>(j)];
    if (std::isfinite(fixed)) lp.add_variable(fixed, fixed, dp, "t" + std::to_string(j + 1));
    else lp.add_variable(1.0, J, dp, "t" + std::to_string(j + 1));
  }
  for (int j = 0; j + 1 < J; ++j) lp.add_row({{j + 1, 1.0}, {j, -1.0}}, RowSense::kGe, gap, "gap" + std::to_string(j + 1));
  const auto sol = solve_lp(lp);
  require(sol.status == LpStatus::kOptimal, ErrorCategory::kSolver,
          std::string("relabeling LP ended with status ") + to_string(sol.status));
  if (sign_of(sol.objective) == -s0 && std::abs(sol.objective) > tol) {
    out.reversed = true;
    out.labels = sol.x;
    out.achieved_mean_diff = a.mean(out.labels) - b.mean(out.labels);
  }
  return out;
}

/// Med(H | x, D = 1) - Med(H | x, D = 0) for a fitted pooled index.
inline double lambda_value(const std::function<double(const Eigen::RowVectorXd&)>& index, const PooledLayout& layout,
                           const Eigen::Ref<const Eigen::RowVectorXd>& base_row) {
  return index(layout.pooled_row(base_row, 1.0)) - index(layout.pooled_row(base_row, 0.0));
}

inline int lambda_sign(const std::function<double(const Eigen::RowVectorXd&)>& index, const PooledLayout& layout,
                       const Eigen::Ref<const Eigen::RowVectorXd>& base_row) {
  return sign_of(lambda_value(index, layout, base_row));
}

inline int lambda_sign(const ThetaSplit& theta, const PooledLayout& layout,
                       const Eigen::Ref<const Eigen::RowVectorXd>& base_row) {
  return lambda_sign([&](const Eigen::RowVectorXd& r) { return theta.index(r); }, layout, base_row);
}

inline int lambda_sign(const HetOrderedFit& fit, const PooledLayout& layout,
                       const Eigen::Ref<const Eigen::RowVectorXd>& base_row) {
  return lambda_sign([&](const Eigen::RowVectorXd& r) { return median_latent(fit, r); }, layout, base_row);
}

}  // namespace ordmed
