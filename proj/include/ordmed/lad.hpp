#pragma once

// LAD estimation of the ordered-response threshold model as a MILP.
//
// Column layout: b (P continuous), c (J-1 continuous), then d(i, j) row-major
// (n x (J-1) binaries) with d(i, j) = 1 exactly when the index of observation i
// lies at or below threshold j.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ordmed/milp.hpp"
#include "ordmed/model.hpp"

namespace ordmed {

struct LadMilpEncoding {
  std::size_t n = 0;
  std::size_t num_free = 0;        // P
  std::size_t num_thresholds = 0;  // J - 1
  double delta = 1e-6;
  double epsilon_gap = 1e-6;
  double first_coef = 1.0;
  Eigen::MatrixXd big_m;

  int b_col(std::size_t p) const { return static_cast<int>(p); }
  int c_col(std::size_t j) const { return static_cast<int>(num_free + j); }
  int d_col(std::size_t i, std::size_t j) const {
    return static_cast<int>(num_free + num_thresholds + i * num_thresholds + j);
  }
  std::size_t num_cols() const { return num_free + num_thresholds + n * num_thresholds; }
};

struct LadBuildOptions {
  double delta = 1e-6;
  double epsilon_gap = 1e-6;
  double first_coef = 1.0;
  /// d(i, j) <= d(i, j+1). Implied by the other rows; kept because they
  /// tighten the relaxation.
  bool monotonicity_rows = true;
};

struct LadMilp {
  MilpProblem problem;
  LadMilpEncoding encoding;
};

struct LadOptions {
  LadBuildOptions build;
  MilpLimits limits;
  /// Profile coordinate search before branch-and-bound plus a threshold refit
  /// at every node.
  bool heuristics = true;
  int starts = 4;
  std::uint64_t seed = 0;
  int max_line_candidates = 2000;
  /// Wall-clock budget for the pre-solve coordinate search.
  double heuristic_seconds = 5.0;
  /// Report the max-min-slack point of the optimal pattern's region.
  bool center = true;
};

struct LadEstimate {
  ThetaSplit theta;
  Thresholds gamma_hat;
  double objective = 0.0;
  MilpSolution certificate;
  /// True when (theta, gamma_hat) is the centered representative.
  bool centered = false;
  double center_slack = 0.0;

  const Eigen::VectorXd& beta_hat() const { return theta.beta; }
};

inline void check_box(const OrderedDataset& data, const ParamBox& box) {
  box.validate();
  require(box.num_free() == data.num_free(), ErrorCategory::kData,
          "box has " + std::to_string(box.num_free()) + " slope bounds but the data has " +
              std::to_string(data.num_free()) + " free covariates");
  require(box.num_thresholds() == static_cast<std::size_t>(data.j_max() - 1), ErrorCategory::kData,
          "box threshold count does not match J-1");
  for (std::size_t j = 0; j + 1 < box.num_thresholds(); ++j)
    require(box.gamma_lo[j] < box.gamma_hi[j + 1], ErrorCategory::kData,
            "threshold box admits no strictly increasing thresholds");
}

/// Largest |c_j - s*X1_i - x_i'b| over the box, by corner analysis.
inline Eigen::MatrixXd compute_big_m(const OrderedDataset& data, const ParamBox& box, double first_coef = 1.0) {
  check_box(data, box);
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto P = static_cast<Eigen::Index>(data.num_free());
  const auto J1 = static_cast<Eigen::Index>(box.num_thresholds());
  const auto& x = data.covariates();
  Eigen::MatrixXd m(n, J1);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Range of x_i'b over the box.
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index p = 0; p < P; ++p) {
      const double a = x(i, p + 1);
      const double u = a * box.beta_lo(p), w = a * box.beta_hi(p);
      lo += std::min(u, w);
      hi += std::max(u, w);
    }
    const double s1 = first_coef * x(i, 0);
    for (Eigen::Index j = 0; j < J1; ++j) {
      const double top = box.gamma_hi[static_cast<std::size_t>(j)] - s1 - lo;
      const double bot = box.gamma_lo[static_cast<std::size_t>(j)] - s1 - hi;
      m(i, j) = std::max({std::abs(top), std::abs(bot), 0.0});
    }
  }
  return m;
}

inline LadMilp build_lad_milp(const OrderedDataset& data, const ParamBox& box, const LadBuildOptions& opt = {}) {
  require(opt.delta > 0.0 && std::isfinite(opt.delta), ErrorCategory::kUsage, "delta must be positive");
  require(opt.epsilon_gap > 0.0 && std::isfinite(opt.epsilon_gap), ErrorCategory::kUsage,
          "epsilon_gap must be positive");
  require(opt.first_coef == 1.0 || opt.first_coef == -1.0, ErrorCategory::kUsage,
          "first coefficient must be +1 or -1");
  check_box(data, box);

  LadMilp out;
  LadMilpEncoding& enc = out.encoding;
  enc.n = data.size();
  enc.num_free = data.num_free();
  enc.num_thresholds = static_cast<std::size_t>(data.j_max() - 1);
  enc.delta = opt.delta;
  enc.epsilon_gap = opt.epsilon_gap;
  enc.first_coef = opt.first_coef;
  enc.big_m = compute_big_m(data, box, opt.first_coef);

  LinearProgram& lp = out.problem.lp;
  const auto& names = data.column_names();
  const auto& x = data.covariates();
  const int J = data.j_max();
  for (std::size_t p = 0; p < enc.num_free; ++p)
    lp.add_variable(box.beta_lo(static_cast<Eigen::Index>(p)), box.beta_hi(static_cast<Eigen::Index>(p)), 0.0,
                    "b_" + names[p + 1]);
  for (std::size_t j = 0; j < enc.num_thresholds; ++j)
    lp.add_variable(box.gamma_lo[j], box.gamma_hi[j], 0.0, "c_" + std::to_string(j + 1));
  for (std::size_t i = 0; i < enc.n; ++i) {
    const int y = data.outcome(i);
    lp.objective_offset += data.weight(i) * std::abs(y - J);
    for (std::size_t j = 0; j < enc.num_thresholds; ++j)
      lp.add_variable(0.0, 1.0, data.weight(i) * lad_coefficient(y, static_cast<int>(j) + 1),
                      "d_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  }

  const double delta = opt.delta;
  std::vector<std::pair<int, double>> terms;
  for (std::size_t i = 0; i < enc.n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double s1 = opt.first_coef * x(ii, 0);
    for (std::size_t j = 0; j < enc.num_thresholds; ++j) {
      const double M = enc.big_m(ii, static_cast<Eigen::Index>(j));
      const std::string tag = std::to_string(i + 1) + "_" + std::to_string(j + 1);
      // c_j - x'b - M d >= s*X1 - M
      terms.clear();
      terms.push_back({enc.c_col(j), 1.0});
      for (std::size_t p = 0; p < enc.num_free; ++p)
        terms.push_back({enc.b_col(p), -x(ii, static_cast<Eigen::Index>(p) + 1)});
      terms.push_back({enc.d_col(i, j), -M});
      lp.add_row(terms, RowSense::kGe, s1 - M, "lo_" + tag);
      // c_j - x'b - (M + 2 delta) d <= s*X1 - delta
      terms.back().second = -(M + 2.0 * delta);
      lp.add_row(terms, RowSense::kLe, s1 - delta, "up_" + tag);
    }
  }
  for (std::size_t j = 0; j + 1 < enc.num_thresholds; ++j)
    lp.add_row({{enc.c_col(j + 1), 1.0}, {enc.c_col(j), -1.0}}, RowSense::kGe, opt.epsilon_gap,
               "gap_" + std::to_string(j + 1));
  if (opt.monotonicity_rows)
    for (std::size_t i = 0; i < enc.n; ++i)
      for (std::size_t j = 0; j + 1 < enc.num_thresholds; ++j)
        lp.add_row({{enc.d_col(i, j), 1.0}, {enc.d_col(i, j + 1), -1.0}}, RowSense::kLe, 0.0,
                   "mono_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));

  out.problem.binary.assign(enc.num_cols(), false);
  for (std::size_t k = enc.num_free + enc.num_thresholds; k < enc.num_cols(); ++k) out.problem.binary[k] = true;
  out.problem.integral_objective = data.integral_weights();
  out.problem.known_bound = 0.0;
  return out;
}

/// Assembles the MILP point induced by (b, c).
inline std::vector<double> lad_point(const OrderedDataset& data, const LadMilpEncoding& enc,
                                     const Eigen::VectorXd& b, const std::vector<double>& c) {
  std::vector<double> x(enc.num_cols(), 0.0);
  for (std::size_t p = 0; p < enc.num_free; ++p) x[p] = b(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < enc.num_thresholds; ++j) x[enc.num_free + j] = c[j];
  const Eigen::VectorXd v = latent_index(data, ThetaSplit(b, enc.first_coef));
  for (std::size_t i = 0; i < enc.n; ++i)
    for (std::size_t j = 0; j < enc.num_thresholds; ++j)
      x[static_cast<std::size_t>(enc.d_col(i, j))] = v(static_cast<Eigen::Index>(i)) <= c[j] ? 1.0 : 0.0;
  return x;
}

namespace detail {

struct ProfileFit {
  double cost = kInf;
  std::vector<double> c;
};

// Best thresholds for a fixed slope vector. Index values closer than the
// separation needed by the delta band and the threshold gaps are kept in one
// group, so any grouping-respecting cut is encodable.
class LadProfile {
 public:
  LadProfile(const OrderedDataset& data, const ParamBox& box, const LadMilpEncoding& enc)
      : data_(data), box_(box), enc_(enc) {
    const int J = data.j_max();
    base_ = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) base_ += data.weight(i) * std::abs(data.outcome(i) - J);
    sep_ = 2.5 * enc.delta + static_cast<double>(J) * enc.epsilon_gap;
  }

  ProfileFit evaluate(const Eigen::VectorXd& b) const {
    const Eigen::VectorXd v = latent_index(data_, ThetaSplit(b, enc_.first_coef));
    const std::size_t n = data_.size();
    const std::size_t J1 = enc_.num_thresholds;
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t c) {
      const double va = v(static_cast<Eigen::Index>(a)), vc = v(static_cast<Eigen::Index>(c));
      return va != vc ? va < vc : a < c;
    });
    // Groups and per-threshold prefix sums of signed weights.
    bottom_.clear();
    top_.clear();
    prefix_.assign(J1, std::vector<double>(1, 0.0));
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t i = order_[r];
      const double vi = v(static_cast<Eigen::Index>(i));
      if (top_.empty() || vi - top_.back() >= sep_) {
        bottom_.push_back(vi);
        top_.push_back(vi);
        for (auto& pf : prefix_) pf.push_back(pf.back());
      }
      top_.back() = vi;
      const int y = data_.outcome(i);
      for (std::size_t j = 0; j < J1; ++j)
        prefix_[j].back() += data_.weight(i) * lad_coefficient(y, static_cast<int>(j) + 1);
    }
    const std::size_t K = top_.size();
    auto lower = [&](std::size_t k) { return k == 0 ? -kInf : top_[k - 1]; };
    auto upper = [&](std::size_t k) { return k == K ? kInf : bottom_[k] - 1.5 * enc_.delta; };

    // f[j][k]: best cost of thresholds 0..j with threshold j at position k.
    f_.assign(J1, std::vector<double>(K + 1, kInf));
    arg_.assign(J1, std::vector<std::size_t>(K + 1, 0));
    for (std::size_t j = 0; j < J1; ++j) {
      double run = kInf;
      std::size_t run_arg = 0;
      for (std::size_t k = 0; k <= K; ++k) {
        if (j > 0 && f_[j - 1][k] < run) {
          run = f_[j - 1][k];
          run_arg = k;
        }
        const bool ok = std::max(lower(k), box_.gamma_lo[j]) <= std::min(upper(k), box_.gamma_hi[j]);
        if (!ok) continue;
        const double prev = j == 0 ? 0.0 : run;
        if (prev == kInf) continue;
        f_[j][k] = prev + prefix_[j][k];
        arg_[j][k] = run_arg;
      }
    }
    ProfileFit out;
    std::size_t kbest = 0;
    double best = kInf;
    for (std::size_t k = 0; k <= K; ++k)
      if (f_[J1 - 1][k] < best) {
        best = f_[J1 - 1][k];
        kbest = k;
      }
    if (best == kInf) return out;
    std::vector<std::size_t> pos(J1);
    pos[J1 - 1] = kbest;
    for (std::size_t j = J1 - 1; j > 0; --j) pos[j - 1] = arg_[j][pos[j]];
    out.c.resize(J1);
    for (std::size_t j = 0; j < J1; ++j) {
      double cj = std::max(lower(pos[j]), box_.gamma_lo[j]);
      if (j > 0) cj = std::max(cj, out.c[j - 1] + enc_.epsilon_gap);
      if (cj > std::min(upper(pos[j]), box_.gamma_hi[j])) return ProfileFit{};
      out.c[j] = cj;
    }
    out.cost = base_ + best;
    return out;
  }

 private:
  const OrderedDataset& data_;
  const ParamBox& box_;
  const LadMilpEncoding& enc_;
  double base_ = 0.0, sep_ = 0.0;
  mutable std::vector<std::size_t> order_;
  mutable std::vector<double> bottom_, top_;
  mutable std::vector<std::vector<double>> prefix_, f_;
  mutable std::vector<std::vector<std::size_t>> arg_;
};

// Slope values along coordinate p where two indices swap order, reduced to
// at most `cap` cell midpoints inside the box.
inline std::vector<double> line_candidates(const OrderedDataset& data, const ParamBox& box,
                                           const LadMilpEncoding& enc, const Eigen::VectorXd& b,
                                           std::size_t p, std::size_t cap, std::mt19937_64& rng) {
  const auto& x = data.covariates();
  const Eigen::VectorXd v = latent_index(data, ThetaSplit(b, enc.first_coef));
  const auto P = static_cast<Eigen::Index>(p) + 1;
  const double lo = box.beta_lo(static_cast<Eigen::Index>(p)), hi = box.beta_hi(static_cast<Eigen::Index>(p));
  const double bp = b(static_cast<Eigen::Index>(p));
  std::vector<double> brk;
  auto add_pair = [&](Eigen::Index i, Eigen::Index k) {
    const double dx = x(i, P) - x(k, P);
    if (dx == 0.0) return;
    const double t = bp + (v(k) - v(i)) / dx;
    if (t > lo && t < hi) brk.push_back(t);
  };
  const auto n = static_cast<Eigen::Index>(data.size());
  const long pairs = static_cast<long>(n) * (n - 1) / 2;
  if (pairs <= 500'000) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = i + 1; k < n; ++k) add_pair(i, k);
  } else {
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    for (std::size_t s = 0; s < 8 * cap; ++s) {
      const Eigen::Index i = pick(rng), k = pick(rng);
      if (i != k) add_pair(i, k);
    }
  }
  brk.push_back(lo);
  brk.push_back(hi);
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
  std::vector<double> mids;
  mids.reserve(brk.size() + 2);
  for (std::size_t k = 0; k + 1 < brk.size(); ++k) mids.push_back(0.5 * (brk[k] + brk[k + 1]));
  mids.push_back(lo);
  mids.push_back(hi);
  if (mids.size() > cap) {
    std::vector<double> thin;
    thin.reserve(cap);
    const double stride = static_cast<double>(mids.size()) / static_cast<double>(cap);
    for (std::size_t s = 0; s < cap; ++s) thin.push_back(mids[static_cast<std::size_t>(s * stride)]);
    mids.swap(thin);
  }
  return mids;
}

struct SearchResult {
  double cost = kInf;
  Eigen::VectorXd b;
  std::vector<double> c;
};

using Deadline = std::chrono::steady_clock::time_point;

inline SearchResult coordinate_search(const OrderedDataset& data, const ParamBox& box, const LadMilpEncoding& enc,
                                      const LadProfile& profile, Eigen::VectorXd b, std::size_t cap,
                                      std::mt19937_64& rng, Deadline deadline) {
  SearchResult best;
  ProfileFit f = profile.evaluate(b);
  best.cost = f.cost;
  best.b = b;
  best.c = f.c;
  const std::size_t P = data.num_free();
  for (int sweep = 0; sweep < 50 && P > 0; ++sweep) {
    bool improved = false;
    for (std::size_t p = 0; p < P; ++p) {
      const auto cands = line_candidates(data, box, enc, best.b, p, cap, rng);
      Eigen::VectorXd trial = best.b;
      for (double t : cands) {
        if (std::chrono::steady_clock::now() >= deadline) return best;
        trial(static_cast<Eigen::Index>(p)) = t;
        ProfileFit g = profile.evaluate(trial);
        if (g.cost < best.cost - 1e-9) {
          best.cost = g.cost;
          best.b = trial;
          best.c = std::move(g.c);
          improved = true;
        }
      }
      if (best.cost == 0.0) return best;
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace detail

/// Max-min-slack representative of the (b, c) region that reproduces the
/// d-pattern of `x`. Returns nullopt when that region has no interior.
/// Rows are generated lazily from the tightest ones, so large samples only
/// ever see a small LP.
inline std::optional<std::pair<Eigen::VectorXd, std::vector<double>>> lad_center(const OrderedDataset& data,
                                                                                 const ParamBox& box,
                                                                                 const LadMilpEncoding& enc,
                                                                                 const std::vector<double>& x,
                                                                                 double* slack = nullptr) {
  const auto& cov = data.covariates();
  const std::size_t P = enc.num_free, J1 = enc.num_thresholds, total = enc.n * J1;
  std::vector<char> below(total);
  for (std::size_t i = 0; i < enc.n; ++i)
    for (std::size_t j = 0; j < J1; ++j) below[i * J1 + j] = x[static_cast<std::size_t>(enc.d_col(i, j))] > 0.5;

  // Margin of row (i, j) at (b, c): c - v when below, v - c - delta above.
  auto margins = [&](const std::vector<double>& pt) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(P));
    for (std::size_t p = 0; p < P; ++p) b(static_cast<Eigen::Index>(p)) = pt[p];
    const Eigen::VectorXd v = latent_index(data, ThetaSplit(b, enc.first_coef));
    std::vector<double> m(total);
    for (std::size_t i = 0; i < enc.n; ++i)
      for (std::size_t j = 0; j < J1; ++j) {
        const double d = pt[P + j] - v(static_cast<Eigen::Index>(i));
        m[i * J1 + j] = below[i * J1 + j] ? d : -d - enc.delta;
      }
    return m;
  };
  const std::size_t batch = std::min<std::size_t>(total, 20 * (P + J1 + 1));
  std::vector<char> active(total, 0);
  auto activate_smallest = [&](const std::vector<double>& m, double above) {
    std::vector<std::size_t> cand;
    for (std::size_t r = 0; r < total; ++r)
      if (!active[r] && m[r] < above) cand.push_back(r);
    const std::size_t k = std::min(batch, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(k), cand.end(),
                      [&](std::size_t a, std::size_t b) { return m[a] != m[b] ? m[a] < m[b] : a < b; });
    for (std::size_t q = 0; q < k; ++q) active[cand[q]] = 1;
    return k;
  };
  activate_smallest(margins(x), kInf);

  for (int round = 0; round < 100; ++round) {
    LinearProgram lp;
    lp.sense = ObjSense::kMaximize;
    for (std::size_t p = 0; p < P; ++p)
      lp.add_variable(box.beta_lo(static_cast<Eigen::Index>(p)), box.beta_hi(static_cast<Eigen::Index>(p)), 0.0);
    for (std::size_t j = 0; j < J1; ++j) lp.add_variable(box.gamma_lo[j], box.gamma_hi[j], 0.0);
    const int s = lp.add_variable(-1.0, 1e6, 1.0, "slack");
    std::vector<std::pair<int, double>> terms;
    for (std::size_t r = 0; r < total; ++r) {
      if (!active[r]) continue;
      const std::size_t i = r / J1, j = r % J1;
      const auto ii = static_cast<Eigen::Index>(i);
      const double s1 = enc.first_coef * cov(ii, 0);
      const double sg = below[r] ? 1.0 : -1.0;
      terms.clear();
      terms.push_back({static_cast<int>(P + j), sg});
      for (std::size_t p = 0; p < P; ++p)
        terms.push_back({static_cast<int>(p), -sg * cov(ii, static_cast<Eigen::Index>(p) + 1)});
      terms.push_back({s, -1.0});
      lp.add_row(terms, RowSense::kGe, below[r] ? s1 : -s1 + enc.delta);
    }
    for (std::size_t j = 0; j + 1 < J1; ++j)
      lp.add_row({{static_cast<int>(P + j + 1), 1.0}, {static_cast<int>(P + j), -1.0}, {s, -1.0}}, RowSense::kGe,
                 enc.epsilon_gap);
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal) return std::nullopt;
    const double sv = sol.x[static_cast<std::size_t>(s)];
    if (sv <= 0.0) return std::nullopt;
    const std::vector<double> m = margins(sol.x);
    if (activate_smallest(m, sv - 1e-12 * std::max(1.0, sv)) > 0) continue;
    if (slack) *slack = sv;
    Eigen::VectorXd b(static_cast<Eigen::Index>(P));
    for (std::size_t p = 0; p < P; ++p) b(static_cast<Eigen::Index>(p)) = sol.x[p];
    std::vector<double> c(sol.x.begin() + static_cast<long>(P), sol.x.begin() + static_cast<long>(P + J1));
    return std::make_pair(b, c);
  }
  return std::nullopt;
}

inline LadEstimate fit_lad(const OrderedDataset& data, const ParamBox& box, const LadOptions& opt = {}) {
  LadMilp milp = build_lad_milp(data, box, opt.build);
  const LadMilpEncoding& enc = milp.encoding;
  const std::size_t P = enc.num_free;

  if (opt.heuristics) {
    const detail::LadProfile profile(data, box, enc);
    std::mt19937_64 rng(opt.seed);
    // Each candidate costs a sort of the sample; keep a sweep affordable.
    const auto cap = static_cast<std::size_t>(
        std::max<long>(8, std::min<long>(opt.max_line_candidates, 2'000'000L / static_cast<long>(data.size() + 1))));
    std::vector<Eigen::VectorXd> starts;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));
    starts.push_back(zero.cwiseMax(box.beta_lo).cwiseMin(box.beta_hi));
    starts.push_back(0.5 * (box.beta_lo + box.beta_hi));
    for (int k = 2; k < opt.starts; ++k) {
      Eigen::VectorXd b(static_cast<Eigen::Index>(P));
      for (std::size_t p = 0; p < P; ++p) {
        std::uniform_real_distribution<double> u(box.beta_lo(static_cast<Eigen::Index>(p)),
                                                 box.beta_hi(static_cast<Eigen::Index>(p)));
        b(static_cast<Eigen::Index>(p)) = u(rng);
      }
      starts.push_back(b);
    }
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(std::max(opt.heuristic_seconds, 0.0)));
    detail::SearchResult best;
    for (std::size_t k = 0; k < starts.size() && (k == 0 || P > 0); ++k) {
      if (k > 0 && std::chrono::steady_clock::now() >= deadline) break;
      detail::SearchResult r = detail::coordinate_search(data, box, enc, profile, starts[k], cap, rng, deadline);
      if (r.cost < best.cost) best = std::move(r);
      if (best.cost == 0.0) break;
    }
    if (best.cost < kInf) milp.problem.warm_starts.push_back(lad_point(data, enc, best.b, best.c));

    milp.problem.incumbent_hook = [&, profile](std::span<const double> relax) -> std::optional<std::vector<double>> {
      if (relax.empty()) return std::nullopt;
      Eigen::VectorXd b(static_cast<Eigen::Index>(P));
      for (std::size_t p = 0; p < P; ++p) b(static_cast<Eigen::Index>(p)) = relax[p];
      b = b.cwiseMax(box.beta_lo).cwiseMin(box.beta_hi);
      detail::ProfileFit f = profile.evaluate(b);
      if (f.cost == kInf) return std::nullopt;
      return lad_point(data, enc, b, f.c);
    };
  }

  LadEstimate est;
  est.certificate = solve_milp(milp.problem, opt.limits);
  const MilpSolution& sol = est.certificate;
  require(sol.status != MilpStatus::kInfeasible, ErrorCategory::kSolver,
          "LAD MILP is infeasible over the given box");
  require(sol.has_incumbent(), ErrorCategory::kSolver, "solver limits reached before any feasible point was found");

  Eigen::VectorXd b(static_cast<Eigen::Index>(P));
  for (std::size_t p = 0; p < P; ++p) b(static_cast<Eigen::Index>(p)) = sol.x[p];
  std::vector<double> c(sol.x.begin() + static_cast<long>(P),
                        sol.x.begin() + static_cast<long>(P + enc.num_thresholds));
  for (std::size_t j = 1; j < c.size(); ++j) c[j] = std::max(c[j], c[j - 1] + enc.epsilon_gap);
  est.theta = ThetaSplit(b, enc.first_coef);
  est.gamma_hat = Thresholds(c);
  est.objective = sol.objective;

  if (opt.center) {
    double slack = 0.0;
    if (auto rep = lad_center(data, box, enc, sol.x, &slack)) {
      const ThetaSplit th(rep->first, enc.first_coef);
      const Thresholds g(rep->second);
      if (std::abs(lad_objective(data, th, g) - sol.objective) <= 1e-9 * std::max(1.0, sol.objective)) {
        est.theta = th;
        est.gamma_hat = g;
        est.centered = true;
        est.center_slack = slack;
      }
    }
  }
  return est;
}

}  // namespace ordmed
