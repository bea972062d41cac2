#pragma once

// Synthetic ordered-response data: H = x'theta + exp(z'alpha) U, with Y
// assigned by the thresholds. Every observation draws from its own
// counter-keyed stream, so output never depends on evaluation order.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ordmed/error.hpp"
#include "ordmed/model.hpp"

namespace ordmed {

struct CovariateLaw {
  enum class Kind { kUniform, kNormal, kDiscrete };
  Kind kind = Kind::kNormal;
  double a = 0.0, b = 1.0;      // uniform bounds or normal (mean, sd)
  std::vector<double> values;   // discrete support
  std::vector<double> probs;    // discrete probabilities

  static CovariateLaw uniform(double lo, double hi) { return {Kind::kUniform, lo, hi, {}, {}}; }
  static CovariateLaw normal(double mean, double sd) { return {Kind::kNormal, mean, sd, {}, {}}; }
  static CovariateLaw discrete(std::vector<double> v, std::vector<double> p) {
    return {Kind::kDiscrete, 0.0, 0.0, std::move(v), std::move(p)};
  }
  static CovariateLaw bernoulli(double p) { return discrete({0.0, 1.0}, {1.0 - p, p}); }
};

enum class ErrorLaw {
  kNone,        // U = 0
  kNormal,
  kLogistic,
  kAsymmetric,  // E - log 2, E ~ Exponential(1): median 0, mean 1 - log 2
};

inline const char* to_string(ErrorLaw e) {
  switch (e) {
    case ErrorLaw::kNone: return "none";
    case ErrorLaw::kNormal: return "normal";
    case ErrorLaw::kLogistic: return "logistic";
    case ErrorLaw::kAsymmetric: return "asymmetric";
  }
  return "unknown";
}

struct DgpSpec {
  std::size_t n = 100;
  std::vector<CovariateLaw> covariates;
  /// Product columns appended after the base covariates, named "a:b".
  std::vector<std::pair<std::size_t, std::size_t>> products;
  std::vector<std::string> names;  // base names; defaults x1, x2, ...
  Eigen::VectorXd theta;           // over base + product columns
  std::vector<double> gamma;
  ErrorLaw error = ErrorLaw::kNormal;
  std::vector<std::size_t> sked_columns;
  Eigen::VectorXd alpha;
  std::uint64_t seed = 0;

  std::size_t num_columns() const { return covariates.size() + products.size(); }
  int j_max() const { return static_cast<int>(gamma.size()) + 1; }

  void validate() const {
    require(!covariates.empty(), ErrorCategory::kUsage, "simulation needs at least one covariate");
    require(!gamma.empty(), ErrorCategory::kUsage, "simulation needs at least one threshold");
    for (std::size_t j = 1; j < gamma.size(); ++j)
      require(gamma[j - 1] < gamma[j], ErrorCategory::kUsage, "true thresholds must be strictly increasing");
    require(static_cast<std::size_t>(theta.size()) == num_columns(), ErrorCategory::kUsage,
            "theta length must equal the number of generated columns");
    require(names.empty() || names.size() == covariates.size(), ErrorCategory::kUsage,
            "one name per base covariate");
    require(sked_columns.size() == static_cast<std::size_t>(alpha.size()), ErrorCategory::kUsage,
            "alpha length must equal the number of skedastic columns");
    for (auto c : sked_columns)
      require(c < num_columns(), ErrorCategory::kUsage, "skedastic column out of range");
    for (auto [a, b] : products)
      require(a < covariates.size() && b < covariates.size(), ErrorCategory::kUsage,
              "product column refers to an unknown covariate");
    for (const auto& law : covariates) {
      if (law.kind == CovariateLaw::Kind::kUniform)
        require(law.a < law.b, ErrorCategory::kUsage, "uniform law needs lo < hi");
      if (law.kind == CovariateLaw::Kind::kNormal)
        require(law.b > 0.0, ErrorCategory::kUsage, "normal law needs sd > 0");
      if (law.kind == CovariateLaw::Kind::kDiscrete) {
        require(!law.values.empty() && law.values.size() == law.probs.size(), ErrorCategory::kUsage,
                "discrete law needs matching values and probabilities");
        double s = 0.0;
        for (double p : law.probs) {
          require(p >= 0.0, ErrorCategory::kUsage, "discrete probabilities must be non-negative");
          s += p;
        }
        require(std::abs(s - 1.0) < 1e-9, ErrorCategory::kUsage, "discrete probabilities must sum to 1");
      }
    }
  }
};

struct SimulatedData {
  OrderedDataset data;
  Eigen::VectorXd latent;
  Eigen::VectorXd errors;  // U before skedastic scaling
};

namespace sim_detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform on (0, 1) keyed by (seed, observation, draw). Stream s owns draws
// 2s and 2s + 1.
inline double uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t k) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ i) ^ k);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double normal(std::uint64_t seed, std::uint64_t i, std::uint64_t k) {
  const double u1 = uniform(seed, i, 2 * k), u2 = uniform(seed, i, 2 * k + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace sim_detail

inline SimulatedData generate(const DgpSpec& spec) {
  spec.validate();
  using namespace sim_detail;
  const std::size_t K0 = spec.covariates.size(), K = spec.num_columns();
  const auto n = static_cast<Eigen::Index>(spec.n);
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(K));
  Eigen::VectorXd H(n), U(n);
  std::vector<int> y(spec.n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::uint64_t>(i);
    for (std::size_t c = 0; c < K0; ++c) {
      const auto& law = spec.covariates[c];
      const auto cc = static_cast<Eigen::Index>(c);
      switch (law.kind) {
        case CovariateLaw::Kind::kUniform:
          X(i, cc) = law.a + (law.b - law.a) * uniform(spec.seed, ii, 2 * c);
          break;
        case CovariateLaw::Kind::kNormal:
          X(i, cc) = law.a + law.b * normal(spec.seed, ii, c);
          break;
        case CovariateLaw::Kind::kDiscrete: {
          const double u = uniform(spec.seed, ii, 2 * c);
          double cum = 0.0;
          X(i, cc) = law.values.back();
          for (std::size_t v = 0; v < law.values.size(); ++v) {
            cum += law.probs[v];
            if (u < cum) {
              X(i, cc) = law.values[v];
              break;
            }
          }
          break;
        }
      }
    }
    for (std::size_t p = 0; p < spec.products.size(); ++p)
      X(i, static_cast<Eigen::Index>(K0 + p)) =
          X(i, static_cast<Eigen::Index>(spec.products[p].first)) * X(i, static_cast<Eigen::Index>(spec.products[p].second));

    const std::uint64_t ek = K0 + 1;
    double u = 0.0;
    switch (spec.error) {
      case ErrorLaw::kNone: break;
      case ErrorLaw::kNormal: u = normal(spec.seed, ii, ek); break;
      case ErrorLaw::kLogistic: {
        const double v = uniform(spec.seed, ii, 2 * ek);
        u = std::log(v / (1.0 - v));
        break;
      }
      case ErrorLaw::kAsymmetric:
        u = -std::log1p(-uniform(spec.seed, ii, 2 * ek)) - std::numbers::ln2;
        break;
    }
    double zs = 0.0;
    for (std::size_t s = 0; s < spec.sked_columns.size(); ++s)
      zs += X(i, static_cast<Eigen::Index>(spec.sked_columns[s])) * spec.alpha(static_cast<Eigen::Index>(s));
    U(i) = u;
    H(i) = X.row(i).dot(spec.theta) + std::exp(zs) * u;
    int j = 1;
    while (j <= static_cast<int>(spec.gamma.size()) && H(i) > spec.gamma[static_cast<std::size_t>(j - 1)]) ++j;
    y[static_cast<std::size_t>(i)] = j;
  }

  std::vector<std::string> names = spec.names;
  if (names.empty())
    for (std::size_t c = 0; c < K0; ++c) names.push_back("x" + std::to_string(c + 1));
  for (auto [a, b] : spec.products) names.push_back(names[a] + ":" + names[b]);
  return SimulatedData{OrderedDataset(std::move(y), std::move(X), std::move(names), spec.j_max()), std::move(H),
                       std::move(U)};
}

}  // namespace ordmed
