#pragma once

// Exhaustive LAD minimizer for tiny instances (P <= 2, n <= 50), used to
// cross-check the MILP.
//
// Slopes: besides a regular grid, one interior point of every cell of the
// arrangement of pairwise tie lines (x_i - x_k)'b = s(X1_k - X1_i) clipped to
// the box. Orderings on lower-dimensional faces are coarsenings of an
// adjacent cell's ordering, so cells suffice. Thresholds: every
// non-decreasing assignment of cut positions between distinct index values,
// subject to the same delta band and gap the MILP uses.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ordmed/lad.hpp"
#include "ordmed/model.hpp"

namespace ordmed {

struct BruteForceOptions {
  int grid_resolution = 21;
  double delta = 1e-6;
  double epsilon_gap = 1e-6;
  double first_coef = 1.0;
};

namespace oracle_detail {

struct Line {
  Eigen::Vector2d a;
  double r;
};

class ThresholdEnumerator {
 public:
  ThresholdEnumerator(const OrderedDataset& data, const ParamBox& box, const BruteForceOptions& opt)
      : data_(data), box_(box), opt_(opt), J1_(box.num_thresholds()) {}

  // Best (cost, thresholds) for a fixed index vector.
  double run(const Eigen::VectorXd& v, double incumbent, std::vector<double>& c_out) {
    const std::size_t n = data_.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return v(static_cast<Eigen::Index>(a)) < v(static_cast<Eigen::Index>(b));
    });
    u_.clear();
    S_.assign(J1_, std::vector<double>(1, 0.0));
    base_ = 0.0;
    const int J = data_.j_max();
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t i = idx[r];
      const double vi = v(static_cast<Eigen::Index>(i));
      if (u_.empty() || vi != u_.back()) {
        u_.push_back(vi);
        for (auto& s : S_) s.push_back(s.back());
      }
      const int y = data_.outcome(i);
      const double w = data_.weight(i);
      base_ += w * std::abs(y - J);
      // Moving observation i to the lower side of threshold j changes its
      // deviation by |y - j| - |y - (j + 1)|.
      for (std::size_t j = 0; j < J1_; ++j) {
        const int jj = static_cast<int>(j) + 1;
        S_[j].back() += w * (std::abs(y - jj) - std::abs(y - jj - 1));
      }
    }
    rest_.assign(J1_ + 1, 0.0);
    for (std::size_t j = J1_; j-- > 0;) rest_[j] = rest_[j + 1] + *std::min_element(S_[j].begin(), S_[j].end());
    best_ = incumbent - base_;
    found_ = false;
    cur_.assign(J1_, 0.0);
    recurse(0, 0, -kInf, 0.0);
    if (!found_) return kInf;
    c_out = best_c_;
    return base_ + best_;
  }

 private:
  void recurse(std::size_t j, std::size_t kmin, double cprev, double acc) {
    if (j == J1_) {
      if (acc < best_) {
        best_ = acc;
        best_c_ = cur_;
        found_ = true;
      }
      return;
    }
    if (acc + rest_[j] >= best_) return;
    const std::size_t K = u_.size();
    for (std::size_t k = kmin; k <= K; ++k) {
      double lo = box_.gamma_lo[j];
      if (k > 0) lo = std::max(lo, u_[k - 1]);
      if (j > 0) lo = std::max(lo, cprev + opt_.epsilon_gap);
      double hi = box_.gamma_hi[j];
      if (k < K) hi = std::min(hi, u_[k] - opt_.delta);
      if (lo > hi) continue;
      cur_[j] = lo;
      recurse(j + 1, k, lo, acc + S_[j][k]);
    }
  }

  const OrderedDataset& data_;
  const ParamBox& box_;
  BruteForceOptions opt_;
  std::size_t J1_;
  std::vector<double> u_;
  std::vector<std::vector<double>> S_;
  std::vector<double> rest_, cur_, best_c_;
  double base_ = 0.0, best_ = 0.0;
  bool found_ = false;
};

inline std::vector<Eigen::VectorXd> slope_candidates_1d(const OrderedDataset& data, const ParamBox& box, double s) {
  const auto& x = data.covariates();
  const double lo = box.beta_lo(0), hi = box.beta_hi(0);
  std::vector<double> t{lo, hi};
  const auto n = x.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double a = x(i, 1) - x(k, 1);
      if (a == 0.0) continue;
      const double r = s * (x(k, 0) - x(i, 0)) / a;
      if (r > lo && r < hi) t.push_back(r);
    }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::vector<Eigen::VectorXd> out;
  for (std::size_t q = 0; q < t.size(); ++q) {
    out.push_back(Eigen::VectorXd::Constant(1, t[q]));
    if (q + 1 < t.size()) out.push_back(Eigen::VectorXd::Constant(1, 0.5 * (t[q] + t[q + 1])));
  }
  return out;
}

inline std::vector<Eigen::VectorXd> slope_candidates_2d(const OrderedDataset& data, const ParamBox& box, double s) {
  const auto& x = data.covariates();
  const auto n = x.rows();
  const Eigen::Vector2d lo(box.beta_lo(0), box.beta_lo(1)), hi(box.beta_hi(0), box.beta_hi(1));
  std::vector<Line> lines;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const Eigen::Vector2d a(x(i, 1) - x(k, 1), x(i, 2) - x(k, 2));
      if (a.squaredNorm() == 0.0) continue;
      lines.push_back({a, s * (x(k, 0) - x(i, 0))});
    }
  const std::size_t num_tie_lines = lines.size();
  lines.push_back({Eigen::Vector2d(1, 0), lo(0)});
  lines.push_back({Eigen::Vector2d(1, 0), hi(0)});
  lines.push_back({Eigen::Vector2d(0, 1), lo(1)});
  lines.push_back({Eigen::Vector2d(0, 1), hi(1)});

  auto inside = [&](const Eigen::Vector2d& p) {
    return p(0) >= lo(0) && p(0) <= hi(0) && p(1) >= lo(1) && p(1) <= hi(1);
  };
  const double span = (hi - lo).norm();
  std::vector<Eigen::VectorXd> out;
  out.push_back(lo);
  out.push_back(hi);
  out.push_back(Eigen::Vector2d(lo(0), hi(1)));
  out.push_back(Eigen::Vector2d(hi(0), lo(1)));
  if (span == 0.0) return out;

  std::vector<double> ts;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const Eigen::Vector2d a = lines[l].a;
    const double an = a.norm();
    const Eigen::Vector2d dir(-a(1) / an, a(0) / an);
    const Eigen::Vector2d nrm = a / an;
    const Eigen::Vector2d p0 = nrm * (lines[l].r / an);
    // Portion of the line inside the box.
    double tlo = -kInf, thi = kInf;
    bool empty = false;
    for (int d = 0; d < 2; ++d) {
      if (dir(d) == 0.0) {
        if (p0(d) < lo(d) || p0(d) > hi(d)) empty = true;
        continue;
      }
      const double t1 = (lo(d) - p0(d)) / dir(d), t2 = (hi(d) - p0(d)) / dir(d);
      tlo = std::max(tlo, std::min(t1, t2));
      thi = std::min(thi, std::max(t1, t2));
    }
    if (empty || !(tlo <= thi)) continue;
    ts.assign({tlo, thi});
    for (std::size_t o = 0; o < lines.size(); ++o) {
      if (o == l) continue;
      const double den = lines[o].a.dot(dir);
      if (den == 0.0) continue;
      const double t = (lines[o].r - lines[o].a.dot(p0)) / den;
      if (t > tlo && t < thi) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (std::size_t q = 0; q + 1 < ts.size(); ++q) {
      const Eigen::Vector2d m = p0 + 0.5 * (ts[q] + ts[q + 1]) * dir;
      // Half the distance to the nearest other line keeps the offset point
      // inside the cell adjacent to this edge.
      double dmin = span;
      for (std::size_t o = 0; o < lines.size(); ++o) {
        if (o == l) continue;
        const double dist = std::abs(lines[o].a.dot(m) - lines[o].r) / lines[o].a.norm();
        if (dist > 1e-12 * std::max(1.0, span)) dmin = std::min(dmin, dist);
      }
      const double eps = 0.5 * dmin;
      for (double sg : {-1.0, 1.0}) {
        const Eigen::Vector2d p = m + sg * eps * nrm;
        if (inside(p)) out.push_back(p);
      }
      if (l < num_tie_lines && inside(m)) out.push_back(m);
    }
  }
  return out;
}

}  // namespace oracle_detail

inline LadEstimate brute_force_lad(const OrderedDataset& data, const ParamBox& box,
                                   const BruteForceOptions& opt = {}) {
  check_box(data, box);
  const std::size_t P = data.num_free();
  require(P <= 2 && data.size() <= 50, ErrorCategory::kUsage,
          "brute-force oracle is limited to P <= 2 and n <= 50");
  require(opt.grid_resolution >= 2, ErrorCategory::kUsage, "grid resolution must be at least 2");
  require(opt.first_coef == 1.0 || opt.first_coef == -1.0, ErrorCategory::kUsage,
          "first coefficient must be +1 or -1");

  std::vector<Eigen::VectorXd> cands;
  if (P == 0) {
    cands.push_back(Eigen::VectorXd(0));
  } else {
    const int g = opt.grid_resolution;
    std::vector<int> ix(P, 0);
    while (true) {
      Eigen::VectorXd b(static_cast<Eigen::Index>(P));
      for (std::size_t p = 0; p < P; ++p) {
        const auto pp = static_cast<Eigen::Index>(p);
        b(pp) = box.beta_lo(pp) + (box.beta_hi(pp) - box.beta_lo(pp)) * ix[p] / (g - 1);
      }
      cands.push_back(b);
      std::size_t p = 0;
      while (p < P && ++ix[p] == g) ix[p++] = 0;
      if (p == P) break;
    }
    auto extra = P == 1 ? oracle_detail::slope_candidates_1d(data, box, opt.first_coef)
                        : oracle_detail::slope_candidates_2d(data, box, opt.first_coef);
    cands.insert(cands.end(), extra.begin(), extra.end());
  }

  oracle_detail::ThresholdEnumerator thr(data, box, opt);
  const auto& x = data.covariates();
  double best = kInf;
  Eigen::VectorXd best_b;
  std::vector<double> best_c, c;
  for (const auto& b : cands) {
    Eigen::VectorXd v = opt.first_coef * x.col(0);
    if (P > 0) v += x.rightCols(static_cast<Eigen::Index>(P)) * b;
    const double cost = thr.run(v, best, c);
    if (cost < best) {
      best = cost;
      best_b = b;
      best_c = c;
    }
    if (best == 0.0) break;
  }
  require(best < kInf, ErrorCategory::kData, "no admissible thresholds inside the box");

  LadEstimate est;
  est.theta = ThetaSplit(best_b, opt.first_coef);
  est.gamma_hat = Thresholds(best_c);
  est.objective = best;
  est.certificate.status = MilpStatus::kOptimal;
  est.certificate.objective = best;
  est.certificate.bound = best;
  est.certificate.nodes = static_cast<long>(cands.size());
  return est;
}

}  // namespace ordmed
