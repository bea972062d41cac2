#pragma once

// Bounded-variable revised simplex (primal phase 1/2 and dual) with a dense
// "kernel" basis inverse.
//
// Every row r gets a logical s_r = a_r'x with bounds taken from the row sense,
// so the system is A x - s = 0 over N = n + m bounded columns. A basis holds m
// columns: k structural columns S and m - k logicals. The logicals cover their
// own rows, so only the k x k block K = A[R', S] (R' = rows whose logical is
// nonbasic) needs an inverse. K^{-1} is kept explicitly and updated in O(k^2)
// per pivot by bordering formulas; it is rebuilt from scratch periodically.
//
// Pricing is Dantzig with lowest-index tie breaking and a Harris two-pass
// ratio test; after `stall_limit` pivots without objective progress the solver
// switches to Bland's rule until progress resumes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ordmed/linear_program.hpp"

namespace ordmed {

struct SimplexOptions {
  double tol_feas = 1e-9;
  double tol_dual = 1e-9;
  double tol_pivot = 1e-9;
  int stall_limit = 50;
  long max_iterations = 0;  // 0 selects a size-based default
  int refactor_interval = 64;
};

class SimplexSolver {
 public:
  enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

  /// Column statuses for all n structurals followed by the m logicals.
  struct Basis {
    std::vector<VarStatus> status;
  };

  explicit SimplexSolver(const LinearProgram& lp, SimplexOptions opts = {})
      : opts_(opts), n_(lp.num_cols()), m_(lp.num_rows()), N_(n_ + m_) {
    lp.validate();
    maximize_ = lp.sense == ObjSense::kMaximize;
    offset_ = lp.objective_offset;
    cost_.assign(static_cast<std::size_t>(N_), 0.0);
    lo_.resize(static_cast<std::size_t>(N_));
    hi_.resize(static_cast<std::size_t>(N_));
    for (int j = 0; j < n_; ++j) {
      cost_[j] = maximize_ ? -lp.objective[j] : lp.objective[j];
      lo_[j] = lp.col_lo[j];
      hi_[j] = lp.col_hi[j];
    }
    for (int r = 0; r < m_; ++r) {
      const auto& row = lp.rows[r];
      lo_[n_ + r] = row.sense == RowSense::kLe ? -kInf : row.rhs;
      hi_[n_ + r] = row.sense == RowSense::kGe ? kInf : row.rhs;
    }
    root_lo_ = lo_;
    root_hi_ = hi_;

    // CSR straight from the rows, CSC by transposition.
    rbeg_.assign(static_cast<std::size_t>(m_) + 1, 0);
    for (int r = 0; r < m_; ++r) rbeg_[r + 1] = rbeg_[r] + static_cast<int>(lp.rows[r].index.size());
    rcol_.resize(static_cast<std::size_t>(rbeg_[m_]));
    rval_.resize(static_cast<std::size_t>(rbeg_[m_]));
    std::vector<int> ccount(static_cast<std::size_t>(n_) + 1, 0);
    for (int r = 0; r < m_; ++r)
      for (std::size_t k = 0; k < lp.rows[r].index.size(); ++k) {
        rcol_[rbeg_[r] + k] = lp.rows[r].index[k];
        rval_[rbeg_[r] + k] = lp.rows[r].value[k];
        ++ccount[lp.rows[r].index[k] + 1];
      }
    cbeg_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (int j = 0; j < n_; ++j) cbeg_[j + 1] = cbeg_[j] + ccount[j + 1];
    crow_.resize(rcol_.size());
    cval_.resize(rcol_.size());
    std::vector<int> fill(cbeg_.begin(), cbeg_.end() - 1);
    for (int r = 0; r < m_; ++r)
      for (int k = rbeg_[r]; k < rbeg_[r + 1]; ++k) {
        const int j = rcol_[k];
        crow_[fill[j]] = r;
        cval_[fill[j]] = rval_[k];
        ++fill[j];
      }

    max_iter_ = opts_.max_iterations > 0 ? opts_.max_iterations : 50000L + 50L * (N_ + m_);
    x_.assign(static_cast<std::size_t>(N_), 0.0);
    status_.assign(static_cast<std::size_t>(N_), VarStatus::kAtLower);
    slack_basis();
  }

  int num_cols() const { return n_; }
  int num_rows() const { return m_; }
  long total_iterations() const { return total_iter_; }

  /// Cold solve from the all-logical basis.
  LpSolution solve() {
    slack_basis();
    return run(/*try_dual=*/false);
  }

  /// Re-optimizes from the current basis, typically after bound changes.
  /// Uses the dual simplex when the basis is dual feasible, otherwise falls
  /// back to the primal phases.
  LpSolution resolve() { return run(/*try_dual=*/true); }

  void set_bounds(int j, double lo, double hi) {
    lo_[j] = lo;
    hi_[j] = hi;
    if (status_[j] != VarStatus::kBasic) place_nonbasic(j);
  }

  void restore_bounds() {
    lo_ = root_lo_;
    hi_ = root_hi_;
    for (int j = 0; j < N_; ++j)
      if (status_[j] != VarStatus::kBasic) place_nonbasic(j);
  }

  double lower(int j) const { return lo_[j]; }
  double upper(int j) const { return hi_[j]; }

  Basis basis() const { return Basis{status_}; }

  void load_basis(const Basis& b) {
    if (static_cast<int>(b.status.size()) != N_) {
      slack_basis();
      return;
    }
    status_ = b.status;
    int basic_struct = 0, basic_logical = 0;
    for (int j = 0; j < N_; ++j) {
      if (status_[j] == VarStatus::kBasic) {
        (j < n_ ? basic_struct : basic_logical) += 1;
      } else {
        place_nonbasic(j);
      }
    }
    if (basic_struct + basic_logical != m_) {
      slack_basis();
      return;
    }
    rebuild_index_sets();
    if (!refactor()) slack_basis();
  }

 private:
  enum class Outcome { kOptimal, kInfeasible, kUnbounded, kIterationLimit, kTrouble };

  // Kernel-space column: entries for structural basics (in S order) and, for
  // rows covered by a basic logical, the logical's entry (row indexed).
  struct KernelColumn {
    Eigen::VectorXd s;
    std::vector<double> l;
  };

  static constexpr int kNone = -1;

  // ---- basis bookkeeping ---------------------------------------------------

  void slack_basis() {
    for (int j = 0; j < n_; ++j) {
      status_[j] = VarStatus::kAtLower;
      place_nonbasic(j);
    }
    for (int r = 0; r < m_; ++r) status_[n_ + r] = VarStatus::kBasic;
    rebuild_index_sets();
    Kinv_.resize(0, 0);
    updates_ = 0;
  }

  // Puts a nonbasic column on a finite bound consistent with its status.
  void place_nonbasic(int j) {
    auto& st = status_[j];
    const double lo = lo_[j], hi = hi_[j];
    if (st == VarStatus::kAtUpper && hi == kInf) st = VarStatus::kAtLower;
    if (st == VarStatus::kAtLower && lo == -kInf) st = hi < kInf ? VarStatus::kAtUpper : VarStatus::kFree;
    if (st == VarStatus::kFree && (lo > -kInf || hi < kInf)) st = lo > -kInf ? VarStatus::kAtLower : VarStatus::kAtUpper;
    switch (st) {
      case VarStatus::kAtLower: x_[j] = lo; break;
      case VarStatus::kAtUpper: x_[j] = hi; break;
      case VarStatus::kFree: x_[j] = 0.0; break;
      case VarStatus::kBasic: break;
    }
  }

  void rebuild_index_sets() {
    S_.clear();
    R_.clear();
    posS_.assign(static_cast<std::size_t>(n_), kNone);
    posR_.assign(static_cast<std::size_t>(m_), kNone);
    for (int j = 0; j < n_; ++j)
      if (status_[j] == VarStatus::kBasic) {
        posS_[j] = static_cast<int>(S_.size());
        S_.push_back(j);
      }
    for (int r = 0; r < m_; ++r)
      if (status_[n_ + r] != VarStatus::kBasic) {
        posR_[r] = static_cast<int>(R_.size());
        R_.push_back(r);
      }
  }

  bool refactor() {
    const auto k = static_cast<Eigen::Index>(S_.size());
    updates_ = 0;
    if (static_cast<std::size_t>(k) != R_.size()) return false;
    if (k == 0) {
      Kinv_.resize(0, 0);
      return true;
    }
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index q = 0; q < k; ++q) {
      const int s = S_[static_cast<std::size_t>(q)];
      for (int t = cbeg_[s]; t < cbeg_[s + 1]; ++t) {
        const int p = posR_[crow_[t]];
        if (p != kNone) K(p, q) = cval_[t];
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) return false;
    Kinv_ = lu.inverse();
    return true;
  }

  // ---- linear algebra in kernel form -----------------------------------------

  // Solves B z = rhs for a dense row-space rhs.
  KernelColumn ftran_dense(const std::vector<double>& rhs) const {
    const auto k = static_cast<Eigen::Index>(S_.size());
    KernelColumn out;
    Eigen::VectorXd aR(k);
    for (Eigen::Index i = 0; i < k; ++i) aR(i) = rhs[R_[static_cast<std::size_t>(i)]];
    out.s = k > 0 ? Eigen::VectorXd(Kinv_ * aR) : Eigen::VectorXd();
    out.l.assign(static_cast<std::size_t>(m_), 0.0);
    spread_structural(out.s, out.l);
    for (int r = 0; r < m_; ++r)
      if (posR_[r] == kNone) out.l[r] -= rhs[r];
    return out;
  }

  // l[r] += (A[r,S] zs) for all rows r.
  void spread_structural(const Eigen::VectorXd& zs, std::vector<double>& l) const {
    for (std::size_t q = 0; q < S_.size(); ++q) {
      const double z = zs(static_cast<Eigen::Index>(q));
      if (z == 0.0) continue;
      const int s = S_[q];
      for (int t = cbeg_[s]; t < cbeg_[s + 1]; ++t) l[crow_[t]] += cval_[t] * z;
    }
  }

  // Solves B z = column j of [A | -I].
  KernelColumn ftran_column(int j) const {
    const auto k = static_cast<Eigen::Index>(S_.size());
    KernelColumn out;
    out.s = Eigen::VectorXd::Zero(k);
    out.l.assign(static_cast<std::size_t>(m_), 0.0);
    if (j < n_) {
      for (int t = cbeg_[j]; t < cbeg_[j + 1]; ++t) {
        const int p = posR_[crow_[t]];
        if (p != kNone) out.s += Kinv_.col(p) * cval_[t];
      }
      spread_structural(out.s, out.l);
      for (int t = cbeg_[j]; t < cbeg_[j + 1]; ++t)
        if (posR_[crow_[t]] == kNone) out.l[crow_[t]] -= cval_[t];
    } else {
      const int p = posR_[j - n_];
      if (p != kNone) out.s = -Kinv_.col(p);
      spread_structural(out.s, out.l);
      if (p == kNone) out.l[j - n_] += 1.0;
    }
    return out;
  }

  // Solves B'y = c_B with c_B given per basic column through `cb`.
  template <class CostFn>
  std::vector<double> btran(CostFn cb) const {
    std::vector<double> y(static_cast<std::size_t>(m_), 0.0);
    for (int r = 0; r < m_; ++r)
      if (posR_[r] == kNone) y[r] = -cb(n_ + r);
    const auto k = static_cast<Eigen::Index>(S_.size());
    if (k == 0) return y;
    Eigen::VectorXd g(k);
    for (Eigen::Index q = 0; q < k; ++q) {
      const int s = S_[static_cast<std::size_t>(q)];
      double v = cb(s);
      for (int t = cbeg_[s]; t < cbeg_[s + 1]; ++t)
        if (posR_[crow_[t]] == kNone) v -= cval_[t] * y[crow_[t]];
      g(q) = v;
    }
    const Eigen::VectorXd yR = Kinv_.transpose() * g;
    for (Eigen::Index i = 0; i < k; ++i) y[R_[static_cast<std::size_t>(i)]] = yR(i);
    return y;
  }

  // a_j' y for column j of [A | -I].
  double column_dot(int j, const std::vector<double>& y) const {
    if (j >= n_) return -y[j - n_];
    double s = 0.0;
    for (int t = cbeg_[j]; t < cbeg_[j + 1]; ++t) s += cval_[t] * y[crow_[t]];
    return s;
  }

  void compute_primal() {
    std::vector<double> rhs(static_cast<std::size_t>(m_), 0.0);
    for (int j = 0; j < n_; ++j) {
      if (status_[j] == VarStatus::kBasic || x_[j] == 0.0) continue;
      for (int t = cbeg_[j]; t < cbeg_[j + 1]; ++t) rhs[crow_[t]] -= cval_[t] * x_[j];
    }
    for (int r = 0; r < m_; ++r)
      if (status_[n_ + r] != VarStatus::kBasic) rhs[r] += x_[n_ + r];
    const KernelColumn z = ftran_dense(rhs);
    for (std::size_t q = 0; q < S_.size(); ++q) x_[S_[q]] = z.s(static_cast<Eigen::Index>(q));
    for (int r = 0; r < m_; ++r)
      if (posR_[r] == kNone) x_[n_ + r] = z.l[r];
  }

  // Value of basic column var in a kernel column.
  double entry(const KernelColumn& c, int var) const {
    if (var < n_) return c.s(posS_[var]);
    return c.l[var - n_];
  }

  // ---- kernel inverse updates ------------------------------------------------

  void swap_out_last_row_col(int q, int p) {
    // Moves S position q and R' position p to the end of their lists.
    const auto k = static_cast<Eigen::Index>(S_.size());
    const auto last = k - 1;
    if (q != last) {
      Kinv_.row(q).swap(Kinv_.row(last));
      std::swap(S_[static_cast<std::size_t>(q)], S_[static_cast<std::size_t>(last)]);
      posS_[S_[static_cast<std::size_t>(q)]] = q;
      posS_[S_[static_cast<std::size_t>(last)]] = static_cast<int>(last);
    }
    if (p != last) {
      Kinv_.col(p).swap(Kinv_.col(last));
      std::swap(R_[static_cast<std::size_t>(p)], R_[static_cast<std::size_t>(last)]);
      posR_[R_[static_cast<std::size_t>(p)]] = p;
      posR_[R_[static_cast<std::size_t>(last)]] = static_cast<int>(last);
    }
  }

  // Row vector A[r, S] in S order.
  Eigen::RowVectorXd row_over_S(int r) const {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(S_.size()));
    for (int t = rbeg_[r]; t < rbeg_[r + 1]; ++t) {
      const int q = posS_[rcol_[t]];
      if (q != kNone) v(q) = rval_[t];
    }
    return v;
  }

  // Column A[R', s] in R' order.
  Eigen::VectorXd col_over_R(int s) const {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(R_.size()));
    for (int t = cbeg_[s]; t < cbeg_[s + 1]; ++t) {
      const int p = posR_[crow_[t]];
      if (p != kNone) u(p) = cval_[t];
    }
    return u;
  }

  double coeff(int r, int s) const {
    for (int t = cbeg_[s]; t < cbeg_[s + 1]; ++t)
      if (crow_[t] == r) return cval_[t];
    return 0.0;
  }

  // Basis change: column `enter` becomes basic, `leave` becomes nonbasic.
  // Returns false if the kernel update hit a tiny pivot (caller refactors).
  bool update_kernel(int enter, int leave) {
    const bool e_struct = enter < n_;
    const bool l_struct = leave < n_;
    bool ok = true;
    if (e_struct && l_struct) {
      const int q = posS_[leave];
      const Eigen::VectorXd w = Kinv_ * col_over_R(enter);
      const double piv = w(q);
      if (std::abs(piv) < 1e-13) ok = false;
      Eigen::VectorXd wq = w;
      wq(q) -= 1.0;
      const Eigen::RowVectorXd rowq = Kinv_.row(q);
      Kinv_.noalias() -= (wq / piv) * rowq;
      S_[static_cast<std::size_t>(q)] = enter;
      posS_[leave] = kNone;
      posS_[enter] = q;
    } else if (!e_struct && !l_struct) {
      const int r_old = enter - n_;  // joins L
      const int r_new = leave - n_;  // joins R'
      const int p = posR_[r_old];
      const Eigen::VectorXd colp = Kinv_.col(p);
      const Eigen::RowVectorXd v = row_over_S(r_new);
      const double denom = v.dot(colp);
      if (std::abs(denom) < 1e-13) ok = false;
      Eigen::RowVectorXd h = v * Kinv_;
      h(p) -= 1.0;
      Kinv_.noalias() -= (colp / denom) * h;
      R_[static_cast<std::size_t>(p)] = r_new;
      posR_[r_old] = kNone;
      posR_[r_new] = p;
    } else if (e_struct && !l_struct) {
      const int r_new = leave - n_;
      const auto k = static_cast<Eigen::Index>(S_.size());
      const Eigen::VectorXd w = k > 0 ? Eigen::VectorXd(Kinv_ * col_over_R(enter)) : Eigen::VectorXd();
      const Eigen::RowVectorXd v = row_over_S(r_new);
      const Eigen::RowVectorXd h = k > 0 ? Eigen::RowVectorXd(v * Kinv_) : Eigen::RowVectorXd();
      const double sigma = coeff(r_new, enter) - (k > 0 ? v.dot(w) : 0.0);
      if (std::abs(sigma) < 1e-13) ok = false;
      Eigen::MatrixXd next(k + 1, k + 1);
      if (k > 0) {
        next.topLeftCorner(k, k) = Kinv_ + (w / sigma) * h;
        next.topRightCorner(k, 1) = -w / sigma;
        next.bottomLeftCorner(1, k) = -h / sigma;
      }
      next(k, k) = 1.0 / sigma;
      Kinv_.swap(next);
      posS_[enter] = static_cast<int>(k);
      S_.push_back(enter);
      posR_[r_new] = static_cast<int>(k);
      R_.push_back(r_new);
    } else {
      const int r_old = enter - n_;
      swap_out_last_row_col(posS_[leave], posR_[r_old]);
      const auto k = static_cast<Eigen::Index>(S_.size());
      const auto last = k - 1;
      const double z = Kinv_(last, last);
      if (std::abs(z) < 1e-13) ok = false;
      Eigen::MatrixXd next = Kinv_.topLeftCorner(last, last) -
                             (Kinv_.topRightCorner(last, 1) / z) * Kinv_.bottomLeftCorner(1, last);
      Kinv_.swap(next);
      posS_[leave] = kNone;
      S_.pop_back();
      posR_[r_old] = kNone;
      R_.pop_back();
    }
    ++updates_;
    return ok;
  }

  void pivot(int enter, int leave) {
    status_[enter] = VarStatus::kBasic;
    const bool ok = update_kernel(enter, leave);
    if (!ok || updates_ >= opts_.refactor_interval) {
      if (!refactor()) {
        // Numerically singular: restart from the logical basis.
        slack_basis();
      }
      compute_primal();
    }
  }

  // ---- helpers ------------------------------------------------------------

  double infeasibility(int j) const {
    const double tol = opts_.tol_feas * std::max(1.0, std::abs(x_[j]));
    if (x_[j] < lo_[j] - tol) return lo_[j] - x_[j];
    if (x_[j] > hi_[j] + tol) return x_[j] - hi_[j];
    return 0.0;
  }

  template <class Fn>
  void for_each_basic(Fn fn) const {
    for (int s : S_) fn(s);
    for (int r = 0; r < m_; ++r)
      if (posR_[r] == kNone) fn(n_ + r);
  }

  double objective_value() const {
    double v = 0.0;
    for (int j = 0; j < N_; ++j) v += cost_[j] * x_[j];
    return v;
  }

  double total_infeasibility() const {
    double t = 0.0;
    for_each_basic([&](int j) { t += infeasibility(j); });
    return t;
  }

  // ---- primal simplex ------------------------------------------------------

  Outcome primal(bool phase1) {
    int stall = 0;
    bool bland = false;
    double last = kInf;
    while (true) {
      if (iter_ >= max_iter_) return Outcome::kIterationLimit;
      double obj;
      if (phase1) {
        obj = total_infeasibility();
        if (obj == 0.0) return Outcome::kOptimal;
      } else {
        obj = objective_value();
      }
      if (obj < last - 1e-12 * (1.0 + std::abs(obj))) {
        stall = 0;
        bland = false;
      } else if (++stall > opts_.stall_limit) {
        bland = true;
      }
      last = std::min(last, obj);

      auto basic_cost = [&](int j) -> double {
        if (!phase1) return cost_[j];
        const double tol = opts_.tol_feas * std::max(1.0, std::abs(x_[j]));
        if (x_[j] < lo_[j] - tol) return -1.0;
        if (x_[j] > hi_[j] + tol) return 1.0;
        return 0.0;
      };
      const std::vector<double> y = btran(basic_cost);

      int enter = kNone;
      double best = 0.0;
      int dir = 0;
      for (int j = 0; j < N_; ++j) {
        const VarStatus st = status_[j];
        if (st == VarStatus::kBasic || lo_[j] == hi_[j]) continue;
        const double d = (phase1 ? 0.0 : cost_[j]) - column_dot(j, y);
        int dj = 0;
        if (st == VarStatus::kAtLower && d < -opts_.tol_dual) dj = 1;
        else if (st == VarStatus::kAtUpper && d > opts_.tol_dual) dj = -1;
        else if (st == VarStatus::kFree && std::abs(d) > opts_.tol_dual) dj = d < 0 ? 1 : -1;
        if (dj == 0) continue;
        if (bland) {
          enter = j;
          dir = dj;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          dir = dj;
        }
      }
      if (enter == kNone) return phase1 ? Outcome::kInfeasible : Outcome::kOptimal;

      const KernelColumn alpha = ftran_column(enter);
      // Ratio test. Basic j moves at rate -dir * alpha_j.
      double t_relax = kInf;
      if (lo_[enter] > -kInf && hi_[enter] < kInf) t_relax = hi_[enter] - lo_[enter];
      struct Cand {
        int var;
        double limit;
        double mag;
        bool to_upper;
      };
      std::vector<Cand> cands;
      for_each_basic([&](int j) {
        const double a = entry(alpha, j);
        if (std::abs(a) <= opts_.tol_pivot) return;
        const double rate = -dir * a;
        const double tol = opts_.tol_feas * std::max(1.0, std::abs(x_[j]));
        const bool below = phase1 && x_[j] < lo_[j] - tol;
        const bool above = phase1 && x_[j] > hi_[j] + tol;
        double limit = kInf, relaxed = kInf;
        bool to_upper = false;
        if (below) {
          if (rate > 0) {
            limit = (lo_[j] - x_[j]) / rate;
            relaxed = (lo_[j] - x_[j] + tol) / rate;
          }
        } else if (above) {
          if (rate < 0) {
            limit = (x_[j] - hi_[j]) / -rate;
            relaxed = (x_[j] - hi_[j] + tol) / -rate;
            to_upper = true;
          }
        } else if (rate < 0) {
          if (lo_[j] > -kInf) {
            limit = (x_[j] - lo_[j]) / -rate;
            relaxed = (x_[j] - lo_[j] + tol) / -rate;
          }
        } else if (hi_[j] < kInf) {
          limit = (hi_[j] - x_[j]) / rate;
          relaxed = (hi_[j] - x_[j] + tol) / rate;
          to_upper = true;
        }
        if (limit == kInf) return;
        cands.push_back({j, std::max(0.0, limit), std::abs(a), to_upper});
        t_relax = std::min(t_relax, relaxed);
      });
      const double flip = (lo_[enter] > -kInf && hi_[enter] < kInf) ? hi_[enter] - lo_[enter] : kInf;
      if (t_relax == kInf) {
        if (phase1) return Outcome::kTrouble;
        return Outcome::kUnbounded;
      }
      const Cand* chosen = nullptr;
      if (bland) {
        for (const auto& c : cands)
          if (!chosen || c.limit < chosen->limit || (c.limit == chosen->limit && c.var < chosen->var)) chosen = &c;
        if (chosen && flip <= chosen->limit) chosen = nullptr;
      } else if (flip > t_relax || cands.empty()) {
        for (const auto& c : cands)
          if (c.limit <= t_relax && (!chosen || c.mag > chosen->mag)) chosen = &c;
      }
      ++iter_;
      ++total_iter_;
      const double step = chosen ? chosen->limit : flip;
      if (!chosen && flip == kInf) return phase1 ? Outcome::kTrouble : Outcome::kUnbounded;
      // Apply the step.
      for_each_basic([&](int j) {
        const double a = entry(alpha, j);
        if (a != 0.0) x_[j] -= dir * a * step;
      });
      x_[enter] += dir * step;
      if (!chosen) {
        status_[enter] = dir > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
        x_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
        continue;
      }
      const int leave = chosen->var;
      status_[leave] = chosen->to_upper ? VarStatus::kAtUpper : VarStatus::kAtLower;
      x_[leave] = chosen->to_upper ? hi_[leave] : lo_[leave];
      pivot(enter, leave);
    }
  }

  // ---- dual simplex --------------------------------------------------------

  std::vector<double> reduced_costs(const std::vector<double>& y) const {
    std::vector<double> d(static_cast<std::size_t>(N_), 0.0);
    for (int j = 0; j < N_; ++j)
      if (status_[j] != VarStatus::kBasic) d[j] = cost_[j] - column_dot(j, y);
    return d;
  }

  bool dual_feasible(const std::vector<double>& d) const {
    const double tol = 1e-7;
    for (int j = 0; j < N_; ++j) {
      const VarStatus st = status_[j];
      if (st == VarStatus::kBasic || lo_[j] == hi_[j]) continue;
      if (st == VarStatus::kAtLower && d[j] < -tol) return false;
      if (st == VarStatus::kAtUpper && d[j] > tol) return false;
      if (st == VarStatus::kFree && std::abs(d[j]) > tol) return false;
    }
    return true;
  }

  Outcome dual() {
    int stall = 0;
    bool bland = false;
    double last = -kInf;
    while (true) {
      if (iter_ >= max_iter_) return Outcome::kIterationLimit;
      // Leaving row: largest primal infeasibility.
      int leave = kNone;
      double worst = 0.0;
      for_each_basic([&](int j) {
        const double inf = infeasibility(j);
        if (inf <= 0.0) return;
        if (bland) {
          if (leave == kNone || j < leave) leave = j;
        } else if (inf > worst || (inf == worst && j < leave)) {
          worst = inf;
          leave = j;
        }
      });
      if (leave == kNone) return Outcome::kOptimal;

      const double obj = objective_value();
      if (obj > last + 1e-12 * (1.0 + std::abs(obj))) {
        stall = 0;
        bland = false;
      } else if (++stall > opts_.stall_limit) {
        bland = true;
      }
      last = std::max(last, obj);

      const bool raise = x_[leave] < lo_[leave];
      const double target = raise ? lo_[leave] : hi_[leave];
      const std::vector<double> rho = btran([&](int j) { return j == leave ? 1.0 : 0.0; });
      const std::vector<double> y = btran([&](int j) { return cost_[j]; });

      int enter = kNone;
      double t_relax = kInf;
      struct Cand {
        int var;
        double ratio;
        double mag;
      };
      std::vector<Cand> cands;
      for (int j = 0; j < N_; ++j) {
        const VarStatus st = status_[j];
        if (st == VarStatus::kBasic || lo_[j] == hi_[j]) continue;
        const double a = column_dot(j, rho);
        if (std::abs(a) <= opts_.tol_pivot) continue;
        bool ok = false;
        if (st == VarStatus::kFree) ok = true;
        else if (st == VarStatus::kAtLower) ok = raise ? a < 0 : a > 0;
        else ok = raise ? a > 0 : a < 0;
        if (!ok) continue;
        const double d = cost_[j] - column_dot(j, y);
        double dd = std::abs(d);
        if (st == VarStatus::kAtLower) dd = std::max(d, 0.0);
        else if (st == VarStatus::kAtUpper) dd = std::max(-d, 0.0);
        const double ratio = dd / std::abs(a);
        cands.push_back({j, ratio, std::abs(a)});
        t_relax = std::min(t_relax, (dd + opts_.tol_dual) / std::abs(a));
      }
      if (cands.empty()) return Outcome::kInfeasible;
      const Cand* chosen = nullptr;
      for (const auto& c : cands) {
        if (bland) {
          if (!chosen || c.ratio < chosen->ratio || (c.ratio == chosen->ratio && c.var < chosen->var)) chosen = &c;
        } else if (c.ratio <= t_relax && (!chosen || c.mag > chosen->mag)) {
          chosen = &c;
        }
      }
      enter = chosen->var;

      const KernelColumn alpha = ftran_column(enter);
      const double apq = entry(alpha, leave);
      if (std::abs(apq) <= opts_.tol_pivot) {
        if (!refactor()) slack_basis();
        compute_primal();
        return Outcome::kTrouble;
      }
      ++iter_;
      ++total_iter_;
      const double dx = (x_[leave] - target) / apq;
      for_each_basic([&](int j) {
        const double a = entry(alpha, j);
        if (a != 0.0) x_[j] -= a * dx;
      });
      x_[enter] += dx;
      x_[leave] = target;
      status_[leave] = raise ? VarStatus::kAtLower : VarStatus::kAtUpper;
      pivot(enter, leave);
    }
  }

  // ---- driver --------------------------------------------------------------

  LpSolution run(bool try_dual) {
    iter_ = 0;
    if (S_.size() != R_.size() || (S_.size() > 0 && Kinv_.rows() != static_cast<Eigen::Index>(S_.size()))) {
      if (!refactor()) slack_basis();
    }
    for (int j = 0; j < N_; ++j)
      if (status_[j] != VarStatus::kBasic) place_nonbasic(j);
    compute_primal();

    // Trivially infeasible empty rows.
    for (int r = 0; r < m_; ++r)
      if (rbeg_[r] == rbeg_[r + 1] && (lo_[n_ + r] > opts_.tol_feas || hi_[n_ + r] < -opts_.tol_feas))
        return finish(Outcome::kInfeasible);
    for (int j = 0; j < N_; ++j)
      if (lo_[j] > hi_[j]) return finish(Outcome::kInfeasible);

    Outcome out = Outcome::kTrouble;
    for (int attempt = 0; attempt < 4; ++attempt) {
      bool dual_done = false;
      if (try_dual && attempt == 0) {
        const std::vector<double> y = btran([&](int j) { return cost_[j]; });
        if (dual_feasible(reduced_costs(y))) {
          out = dual();
          if (out == Outcome::kInfeasible || out == Outcome::kIterationLimit) return finish(out);
          dual_done = out == Outcome::kOptimal;
        }
      }
      if (!dual_done) {
        out = primal(/*phase1=*/true);
        if (out == Outcome::kInfeasible || out == Outcome::kIterationLimit) {
          if (out == Outcome::kInfeasible && attempt == 0) {
            // Confirm from a fresh factorization before declaring infeasibility.
            if (!refactor()) slack_basis();
            compute_primal();
            out = primal(true);
          }
          if (out == Outcome::kInfeasible || out == Outcome::kIterationLimit) return finish(out);
        }
        if (out == Outcome::kTrouble) {
          slack_basis();
          compute_primal();
          continue;
        }
      }
      out = primal(/*phase1=*/false);
      if (out == Outcome::kUnbounded || out == Outcome::kIterationLimit) return finish(out);
      if (out == Outcome::kTrouble) continue;
      // Clean-up pass on a fresh factorization.
      if (!refactor()) {
        slack_basis();
        compute_primal();
        continue;
      }
      compute_primal();
      if (total_infeasibility() == 0.0) {
        const std::vector<double> y = btran([&](int j) { return cost_[j]; });
        if (dual_feasible(reduced_costs(y))) return finish(Outcome::kOptimal);
      }
      try_dual = false;
    }
    return finish(out == Outcome::kOptimal ? Outcome::kOptimal : Outcome::kIterationLimit);
  }

  LpSolution finish(Outcome out) {
    LpSolution sol;
    sol.iterations = iter_;
    switch (out) {
      case Outcome::kOptimal: sol.status = LpStatus::kOptimal; break;
      case Outcome::kInfeasible: sol.status = LpStatus::kInfeasible; break;
      case Outcome::kUnbounded: sol.status = LpStatus::kUnbounded; break;
      default: sol.status = LpStatus::kIterationLimit; break;
    }
    sol.x.assign(x_.begin(), x_.begin() + n_);
    const double sign = maximize_ ? -1.0 : 1.0;
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
    sol.objective = sign * obj + offset_;
    if (sol.status == LpStatus::kOptimal) {
      const std::vector<double> y = btran([&](int j) { return cost_[j]; });
      sol.duals.resize(static_cast<std::size_t>(m_));
      for (int r = 0; r < m_; ++r) sol.duals[r] = sign * y[r];
      sol.reduced_costs.resize(static_cast<std::size_t>(n_));
      for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = sign * (cost_[j] - column_dot(j, y));
    }
    return sol;
  }

  SimplexOptions opts_;
  int n_, m_, N_;
  bool maximize_ = false;
  double offset_ = 0.0;
  std::vector<double> cost_, lo_, hi_, root_lo_, root_hi_;
  std::vector<int> cbeg_, crow_, rbeg_, rcol_;
  std::vector<double> cval_, rval_;
  std::vector<VarStatus> status_;
  std::vector<double> x_;
  std::vector<int> S_, R_, posS_, posR_;
  Eigen::MatrixXd Kinv_;
  int updates_ = 0;
  long iter_ = 0, total_iter_ = 0, max_iter_ = 0;
};

/// Solves an LP from scratch. Infeasibility and unboundedness are reported
/// through the status, never thrown.
inline LpSolution solve_lp(const LinearProgram& lp, double tol_feas = 1e-9) {
  SimplexOptions opts;
  opts.tol_feas = tol_feas;
  SimplexSolver solver(lp, opts);
  return solver.solve();
}

}  // namespace ordmed
