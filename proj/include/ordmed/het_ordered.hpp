#pragma once

// Heteroskedastic ordered probit / logit by maximum likelihood.
//
//   H = x'theta + exp(z'alpha) U,   U ~ F (standard normal or logistic)
//   P(Y = j | x, z) = F((g_j - x'theta) / s) - F((g_{j-1} - x'theta) / s)
//
// No intercept in either index: the thresholds absorb the location and the
// skedastic baseline is fixed at one.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ordmed/distributions.hpp"
#include "ordmed/model.hpp"

namespace ordmed {

struct HetOrderedSpec {
  Link link = Link::kNormal;
  /// Indices into the dataset covariates; empty means every column.
  std::vector<std::size_t> mean_columns;
  std::vector<std::size_t> sked_columns;
};

struct HetParams {
  Eigen::VectorXd theta;
  Eigen::VectorXd alpha;
  std::vector<double> gamma;
};

struct HetOptions {
  int max_iterations = 1000;
  double tol_grad = 1e-6;
  bool standard_errors = true;
};

struct HetOrderedFit {
  Link link = Link::kNormal;
  std::vector<std::string> mean_names, sked_names;
  std::vector<std::size_t> mean_columns, sked_columns;
  HetParams params;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_inf_norm = 0.0;
  std::string message;
  /// Observed-information standard errors in (theta, alpha, gamma) order;
  /// empty when the information matrix is not positive definite.
  Eigen::VectorXd std_errors;
};

struct ScaledCoefficients {
  std::string reference;
  std::vector<std::string> names;
  Eigen::VectorXd theta;
  std::vector<double> gamma;
};

inline constexpr double kProbabilityFloor = 1e-300;

namespace detail {

class HetLikelihood {
 public:
  HetLikelihood(const HetOrderedSpec& spec, const OrderedDataset& data)
      : f_{spec.link}, data_(data), J1_(static_cast<std::size_t>(data.j_max() - 1)) {
    mean_ = spec.mean_columns;
    if (mean_.empty())
      for (std::size_t c = 0; c < data.num_columns(); ++c) mean_.push_back(c);
    sked_ = spec.sked_columns;
    for (std::size_t c : mean_)
      require(c < data.num_columns(), ErrorCategory::kUsage, "mean column index out of range");
    for (std::size_t c : sked_)
      require(c < data.num_columns(), ErrorCategory::kUsage, "skedastic column index out of range");
    const auto n = static_cast<Eigen::Index>(data.size());
    X_.resize(n, static_cast<Eigen::Index>(mean_.size()));
    Z_.resize(n, static_cast<Eigen::Index>(sked_.size()));
    for (std::size_t k = 0; k < mean_.size(); ++k) X_.col(static_cast<Eigen::Index>(k)) = data.covariates().col(static_cast<Eigen::Index>(mean_[k]));
    for (std::size_t k = 0; k < sked_.size(); ++k) Z_.col(static_cast<Eigen::Index>(k)) = data.covariates().col(static_cast<Eigen::Index>(sked_[k]));
  }

  std::size_t K() const { return mean_.size(); }
  std::size_t S() const { return sked_.size(); }
  std::size_t J1() const { return J1_; }
  std::size_t dim() const { return K() + S() + J1_; }
  const std::vector<std::size_t>& mean_columns() const { return mean_; }
  const std::vector<std::size_t>& sked_columns() const { return sked_; }

  HetParams unpack(const Eigen::VectorXd& v) const {
    HetParams p;
    p.theta = v.head(static_cast<Eigen::Index>(K()));
    p.alpha = v.segment(static_cast<Eigen::Index>(K()), static_cast<Eigen::Index>(S()));
    p.gamma.resize(J1_);
    for (std::size_t j = 0; j < J1_; ++j) p.gamma[j] = v(static_cast<Eigen::Index>(K() + S() + j));
    return p;
  }

  Eigen::VectorXd pack(const HetParams& p) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim()));
    v << p.theta, p.alpha, Eigen::Map<const Eigen::VectorXd>(p.gamma.data(), static_cast<Eigen::Index>(J1_));
    return v;
  }

  void check(const HetParams& p) const {
    require(static_cast<std::size_t>(p.theta.size()) == K() && static_cast<std::size_t>(p.alpha.size()) == S() &&
                p.gamma.size() == J1_,
            ErrorCategory::kData, "parameter dimensions do not match the specification");
    for (std::size_t j = 0; j + 1 < J1_; ++j)
      require(p.gamma[j] < p.gamma[j + 1], ErrorCategory::kData, "thresholds must be strictly increasing");
  }

  /// Log-likelihood in the natural parameterization; gradient when asked.
  double value(const HetParams& p, Eigen::VectorXd* grad = nullptr) const {
    check(p);
    const Eigen::VectorXd xb = X_ * p.theta;
    const Eigen::VectorXd zs = Z_ * p.alpha;
    if (grad) grad->setZero(static_cast<Eigen::Index>(dim()));
    double total = 0.0;
    const auto n = static_cast<Eigen::Index>(data_.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = data_.weight(static_cast<std::size_t>(i));
      if (w == 0.0) continue;
      const int y = data_.outcome(static_cast<std::size_t>(i));
      const double sig = std::exp(zs(i));
      const double hi = y <= static_cast<int>(J1_) ? p.gamma[static_cast<std::size_t>(y - 1)] : kPosInf;
      const double lo = y >= 2 ? p.gamma[static_cast<std::size_t>(y - 2)] : -kPosInf;
      const double a = (hi - xb(i)) / sig, a0 = (lo - xb(i)) / sig;
      const double pr = std::max(f_.interval(a0, a), kProbabilityFloor);
      total += w * std::log(pr);
      if (!grad) continue;
      const double fa = f_.pdf(a), fa0 = f_.pdf(a0);
      const double faa = std::isinf(a) ? 0.0 : fa * a, faa0 = std::isinf(a0) ? 0.0 : fa0 * a0;
      const double scale = w / pr;
      auto& g = *grad;
      g.head(static_cast<Eigen::Index>(K())) += (scale * (fa0 - fa) / sig) * X_.row(i).transpose();
      if (S() > 0) g.segment(static_cast<Eigen::Index>(K()), static_cast<Eigen::Index>(S())) += (scale * (faa0 - faa)) * Z_.row(i).transpose();
      const auto base = static_cast<Eigen::Index>(K() + S());
      if (y <= static_cast<int>(J1_)) g(base + y - 1) += scale * fa / sig;
      if (y >= 2) g(base + y - 2) -= scale * fa0 / sig;
    }
    return total;
  }

  // Unconstrained coordinates: gamma_1 then log increments.
  Eigen::VectorXd to_free(const HetParams& p) const {
    Eigen::VectorXd u = pack(p);
    const std::size_t b = K() + S();
    for (std::size_t j = 1; j < J1_; ++j) u(static_cast<Eigen::Index>(b + j)) = std::log(p.gamma[j] - p.gamma[j - 1]);
    return u;
  }

  HetParams from_free(const Eigen::VectorXd& u) const {
    HetParams p = unpack(u);
    const std::size_t b = K() + S();
    for (std::size_t j = 1; j < J1_; ++j) p.gamma[j] = p.gamma[j - 1] + std::exp(u(static_cast<Eigen::Index>(b + j)));
    return p;
  }

  double free_value(const Eigen::VectorXd& u, Eigen::VectorXd* grad) const {
    const HetParams p = from_free(u);
    for (std::size_t j = 0; j + 1 < J1_; ++j)
      if (!(p.gamma[j] < p.gamma[j + 1]) || !std::isfinite(p.gamma[j + 1])) return -kPosInf;
    Eigen::VectorXd g;
    const double v = value(p, grad ? &g : nullptr);
    if (grad) {
      *grad = g;
      const std::size_t b = K() + S();
      // d gamma_k / d u_m = exp(u_m) for 2 <= m <= k, and 1 for m = 1.
      double tail = 0.0;
      for (std::size_t j = J1_; j-- > 0;) {
        tail += g(static_cast<Eigen::Index>(b + j));
        (*grad)(static_cast<Eigen::Index>(b + j)) = j == 0 ? tail : tail * std::exp(u(static_cast<Eigen::Index>(b + j)));
      }
    }
    return v;
  }

 private:
  static constexpr double kPosInf = std::numeric_limits<double>::infinity();
  LinkFunctions f_;
  const OrderedDataset& data_;
  std::size_t J1_;
  std::vector<std::size_t> mean_, sked_;
  Eigen::MatrixXd X_, Z_;
};

// Central differences of an analytic gradient.
template <class Grad>
Eigen::MatrixXd fd_hessian(const Eigen::VectorXd& at, Grad grad) {
  const auto d = at.size();
  Eigen::MatrixXd H(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(at(k)));
    Eigen::VectorXd up = at, dn = at;
    up(k) += h;
    dn(k) -= h;
    H.col(k) = (grad(up) - grad(dn)) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace detail

inline double loglik(const HetOrderedSpec& spec, const HetParams& params, const OrderedDataset& data) {
  return detail::HetLikelihood(spec, data).value(params);
}

inline Eigen::VectorXd loglik_gradient(const HetOrderedSpec& spec, const HetParams& params,
                                       const OrderedDataset& data) {
  Eigen::VectorXd g;
  detail::HetLikelihood(spec, data).value(params, &g);
  return g;
}

inline HetOrderedFit fit_het_ordered(const HetOrderedSpec& spec, const OrderedDataset& data,
                                     const HetOptions& opt = {}) {
  const detail::HetLikelihood L(spec, data);
  const LinkFunctions normal{Link::kNormal};
  const int J = data.j_max();

  // Start: theta = 0, alpha = 0, thresholds at standard-normal quantiles of
  // the weighted cumulative frequencies.
  std::vector<double> freq(static_cast<std::size_t>(J), 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    freq[static_cast<std::size_t>(data.outcome(i) - 1)] += data.weight(i);
    wsum += data.weight(i);
  }
  for (int j = 0; j < J; ++j)
    require(freq[static_cast<std::size_t>(j)] > 0.0, ErrorCategory::kNumeric,
            "category " + std::to_string(j + 1) +
                " is empty: the likelihood is maximized at the boundary (thresholds not identified)");
  HetParams start;
  start.theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L.K()));
  start.alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L.S()));
  double cum = 0.0;
  for (int j = 0; j + 1 < J; ++j) {
    cum += freq[static_cast<std::size_t>(j)];
    start.gamma.push_back(normal.quantile(cum / wsum));
  }

  auto neg = [&](const Eigen::VectorXd& u, Eigen::VectorXd* g) {
    const double v = L.free_value(u, g);
    if (g) *g = -*g;
    return -v;
  };

  Eigen::VectorXd u = L.to_free(start);
  Eigen::VectorXd g;
  double f = neg(u, &g);
  const auto d = u.size();
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(d, d);
  HetOrderedFit fit;
  int it = 0;
  bool first = true;
  int stalls = 0;
  // BFGS with Armijo backtracking; hands over to Newton once the objective
  // stops moving at rounding level.
  for (; it < opt.max_iterations && g.lpNorm<Eigen::Infinity>() >= opt.tol_grad; ++it) {
    Eigen::VectorXd dir = -Hinv * g;
    if (dir.dot(g) >= 0.0) {
      Hinv.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    Eigen::VectorXd un, gn;
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      un = u + step * dir;
      fn = neg(un, &gn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * step * g.dot(dir)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    stalls = f - fn <= 1e-14 * std::max(1.0, std::abs(f)) ? stalls + 1 : 0;
    const Eigen::VectorXd s = un - u, yv = gn - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (first) {
        Hinv *= sy / yv.squaredNorm();
        first = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
      Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
    }
    u = un;
    f = fn;
    g = gn;
    if (stalls >= 3) break;
  }

  // Newton polish for the last digits of the gradient.
  auto free_grad = [&](const Eigen::VectorXd& at) {
    Eigen::VectorXd gg;
    neg(at, &gg);
    return gg;
  };
  for (int k = 0; k < 20 && g.lpNorm<Eigen::Infinity>() >= opt.tol_grad; ++k, ++it) {
    const Eigen::MatrixXd H = detail::fd_hessian(u, free_grad);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd dir = -g;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) dir = ldlt.solve(-g);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
      Eigen::VectorXd un = u + step * dir, gn;
      const double fn = neg(un, &gn);
      if (std::isfinite(fn) && (fn <= f || gn.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>())) {
        u = un;
        f = fn;
        g = gn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  fit.link = spec.link;
  fit.mean_columns = L.mean_columns();
  fit.sked_columns = L.sked_columns();
  for (std::size_t c : fit.mean_columns) fit.mean_names.push_back(data.column_names()[c]);
  for (std::size_t c : fit.sked_columns) fit.sked_names.push_back(data.column_names()[c]);
  fit.params = L.from_free(u);
  fit.loglik = -f;
  fit.iterations = it;
  fit.grad_inf_norm = g.lpNorm<Eigen::Infinity>();
  fit.converged = fit.grad_inf_norm < opt.tol_grad;
  if (!fit.converged)
    fit.message = "gradient inf-norm " + std::to_string(fit.grad_inf_norm) + " after " + std::to_string(it) +
                  " iterations (possible separation or boundary solution)";

  // A flat likelihood (separation, parameters drifting to infinity) also has
  // a vanishing gradient; the information matrix tells the two apart.
  const Eigen::VectorXd at = L.pack(fit.params);
  auto nat_grad = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd gg;
    L.value(L.unpack(v), &gg);
    return gg;
  };
  Eigen::MatrixXd info;
  try {
    info = -detail::fd_hessian(at, nat_grad);
  } catch (const Error&) {
    info.resize(0, 0);
  }
  bool regular = info.size() > 0;
  if (regular) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info, Eigen::EigenvaluesOnly);
    regular = eig.eigenvalues().minCoeff() > 1e-8 * std::max(1.0, eig.eigenvalues().maxCoeff());
  }
  if (fit.converged && !regular) {
    fit.converged = false;
    fit.message = "information matrix is singular at the optimum (possible separation or unidentified parameters)";
  }
  if (opt.standard_errors && regular) {
    const Eigen::MatrixXd cov = info.llt().solve(Eigen::MatrixXd::Identity(at.size(), at.size()));
    fit.std_errors = cov.diagonal().cwiseSqrt();
  }
  return fit;
}

/// Divides every mean coefficient and threshold by the named coefficient.
inline ScaledCoefficients scale_by_reference(const std::vector<std::string>& names, const Eigen::VectorXd& theta,
                                             const std::vector<double>& gamma, const std::string& reference) {
  require(names.size() == static_cast<std::size_t>(theta.size()), ErrorCategory::kData,
          "coefficient names and values differ in length");
  const auto it = std::find(names.begin(), names.end(), reference);
  require(it != names.end(), ErrorCategory::kUsage, "reference coefficient '" + reference + "' not found");
  const double r = theta(it - names.begin());
  require(std::abs(r) >= 1e-12, ErrorCategory::kNumeric, "reference coefficient '" + reference + "' is zero");
  ScaledCoefficients out;
  out.reference = reference;
  out.names = names;
  out.theta = theta / r;
  for (double g : gamma) out.gamma.push_back(g / r);
  return out;
}

inline ScaledCoefficients scale_by_reference(const HetOrderedFit& fit, const std::string& reference) {
  return scale_by_reference(fit.mean_names, fit.params.theta, fit.params.gamma, reference);
}

/// Median (and, for the symmetric links, mean) of H given a full covariate row.
inline double median_latent(const HetOrderedFit& fit, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  double m = 0.0;
  for (std::size_t k = 0; k < fit.mean_columns.size(); ++k) {
    require(static_cast<Eigen::Index>(fit.mean_columns[k]) < x.size(), ErrorCategory::kData,
            "covariate row too short for the fitted model");
    m += x(static_cast<Eigen::Index>(fit.mean_columns[k])) * fit.params.theta(static_cast<Eigen::Index>(k));
  }
  return m;
}

}  // namespace ordmed
