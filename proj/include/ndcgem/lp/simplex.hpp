#pragma once

// Bounded-variable revised simplex over a sparse LU-factorized basis with
// product-form updates.
//
// Cold solves run composite phase 1 (infeasibility minimization) followed by
// phase 2.  Warm restarts after bound changes run the dual simplex from a
// supplied basis snapshot, then a primal cleanup pass.  Pivoting is
// deterministic: Dantzig pricing over rotating sections with index
// tie-breaks, switching to Bland's rule after a stall.  Row duals follow the
// d(objective)/d(rhs) convention.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <vector>

#include "ndcgem/common.hpp"
#include "ndcgem/lp/model.hpp"

namespace ndcgem::lp {

struct SimplexOptions {
  double tol_primal = 1e-7;
  double tol_dual = 1e-7;
  double tol_pivot = 1e-9;
  long max_iterations = -1;  // -1: scaled with model size
  int refactor_every = 64;
  int stall_limit = 500;
};

struct Basis {
  std::vector<int> head;           // basic column at each row position
  std::vector<signed char> state;  // per column, see Simplex::State
  bool empty() const { return head.empty(); }
};

class Simplex {
 public:
  enum State : signed char { BASIC = 0, NB_LO = 1, NB_UP = 2, NB_FREE = 3, NB_FIXED = 4 };

  Simplex(const LinearModel& model, SimplexOptions opt = {})
      : opt_(opt), n_(model.n_vars()), m_(model.n_rows()), N_(n_ + m_) {
    build(model);
    if (opt_.max_iterations < 0)
      opt_.max_iterations = 20000 + 50L * (N_ + m_);
  }

  // Cold solve from the all-logical basis.
  LpSolution solve() {
    init_logical_basis();
    factorize();
    compute_basic_values();
    LpSolution out;
    if (!phase1(&out)) return extract(out);
    const bool done = phase2(&out);
    if (!done) return extract(out);
    out.status = LpStatus::optimal;
    return extract(out);
  }

  // Warm solve: dual simplex from a snapshot taken on a model with identical
  // shape and costs (bounds may differ).  Falls back to SolverError on a
  // numerically unusable basis; callers should then cold-solve.
  LpSolution solve_warm(const Basis& basis) {
    if (static_cast<int>(basis.head.size()) != m_ ||
        static_cast<int>(basis.state.size()) != N_)
      throw SolverError("warm basis has wrong shape");
    head_ = basis.head;
    state_ = basis.state;
    for (int j = 0; j < N_; ++j) {
      if (state_[j] == BASIC) continue;
      state_[j] = nonbasic_state(j, state_[j]);
      xval_[j] = nonbasic_value(j, state_[j]);
    }
    factorize();
    compute_basic_values();
    LpSolution out;
    if (!dual_phase(&out)) return extract(out);
    if (!phase2(&out)) return extract(out);
    out.status = LpStatus::optimal;
    return extract(out);
  }

  Basis basis() const { return Basis{head_, state_}; }

  // Adjust a structural variable's bounds between solves (branch and bound,
  // integer fixing).  Takes effect on the next solve()/solve_warm().
  void set_var_bounds(int j, double lb, double ub) {
    if (j < 0 || j >= n_) throw SolverError("set_var_bounds: bad index");
    if (lb > ub) throw SolverError("set_var_bounds: lb > ub");
    lb_[j] = lb;
    ub_[j] = ub;
  }

 private:
  // --- model in computational form: min c x  s.t.  A x - s = 0, lb <= (x,s) <= ub
  SimplexOptions opt_;
  int n_, m_, N_;
  std::vector<double> lb_, ub_, cost_;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;

  // --- basis state
  std::vector<int> head_;
  std::vector<signed char> state_;
  std::vector<double> xval_;

  // --- LU factors: pivot order s -> (row R[s], position P[s], value d[s])
  struct Entry {
    int idx;
    double val;
  };
  std::vector<int> lu_row_, lu_pos_;
  std::vector<double> lu_diag_;
  std::vector<std::vector<Entry>> lcol_, urow_;
  struct Eta {
    int pos;
    double pivot;
    std::vector<Entry> terms;  // entries over positions, excluding pos
  };
  std::vector<Eta> etas_;

  long iterations_ = 0;
  int price_section_ = 0;
  bool bland_ = false;
  int stall_ = 0;
  double last_progress_ = kInf;

  void build(const LinearModel& model) {
    lb_.resize(N_);
    ub_.resize(N_);
    cost_.assign(N_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = model.vars[j].lb;
      ub_[j] = model.vars[j].ub;
      cost_[j] = model.vars[j].cost;
    }
    for (int i = 0; i < m_; ++i) {
      const auto& row = model.rows[i];
      switch (row.sense) {
        case Sense::le: lb_[n_ + i] = -kInf; ub_[n_ + i] = row.rhs; break;
        case Sense::ge: lb_[n_ + i] = row.rhs; ub_[n_ + i] = kInf; break;
        case Sense::eq: lb_[n_ + i] = row.rhs; ub_[n_ + i] = row.rhs; break;
      }
    }
    // CSC of [A | -I], duplicate terms summed.
    std::vector<std::vector<Entry>> cols(N_);
    {
      std::vector<double> acc(m_, 0.0);
      std::vector<int> touched;
      std::vector<std::vector<std::pair<int, double>>> by_col(n_);
      for (int i = 0; i < m_; ++i)
        for (const auto& [v, coef] : model.rows[i].terms)
          by_col[v].emplace_back(i, coef);
      for (int j = 0; j < n_; ++j) {
        touched.clear();
        for (const auto& [i, coef] : by_col[j]) {
          if (acc[i] == 0.0) touched.push_back(i);
          acc[i] += coef;
        }
        std::sort(touched.begin(), touched.end());
        for (int i : touched) {
          if (acc[i] != 0.0) cols[j].push_back({i, acc[i]});
          acc[i] = 0.0;
        }
      }
    }
    for (int i = 0; i < m_; ++i) cols[n_ + i].push_back({i, -1.0});
    col_start_.assign(N_ + 1, 0);
    for (int j = 0; j < N_; ++j)
      col_start_[j + 1] = col_start_[j] + static_cast<int>(cols[j].size());
    col_row_.resize(col_start_[N_]);
    col_val_.resize(col_start_[N_]);
    for (int j = 0; j < N_; ++j) {
      int k = col_start_[j];
      for (const auto& e : cols[j]) {
        col_row_[k] = e.idx;
        col_val_[k] = e.val;
        ++k;
      }
    }
    xval_.assign(N_, 0.0);
  }

  signed char nonbasic_state(int j, signed char prev) const {
    if (lb_[j] == ub_[j]) return NB_FIXED;
    if (lb_[j] == -kInf && ub_[j] == kInf) return NB_FREE;
    if (prev == NB_LO && lb_[j] > -kInf) return NB_LO;
    if (prev == NB_UP && ub_[j] < kInf) return NB_UP;
    return lb_[j] > -kInf ? NB_LO : NB_UP;
  }

  double nonbasic_value(int j, signed char st) const {
    switch (st) {
      case NB_LO: case NB_FIXED: return lb_[j];
      case NB_UP: return ub_[j];
      default: return 0.0;
    }
  }

  void init_logical_basis() {
    head_.resize(m_);
    state_.assign(N_, NB_LO);
    for (int i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      state_[n_ + i] = BASIC;
    }
    for (int j = 0; j < n_; ++j) {
      state_[j] = nonbasic_state(j, NB_LO);
      xval_[j] = nonbasic_value(j, state_[j]);
    }
  }

  // --- factorization -------------------------------------------------------

  void factorize() {
    etas_.clear();
    lu_row_.assign(m_, -1);
    lu_pos_.assign(m_, -1);
    lu_diag_.assign(m_, 0.0);
    lcol_.assign(m_, {});
    urow_.assign(m_, {});
    if (m_ == 0) return;

    std::vector<std::vector<Entry>> acol(m_);
    std::vector<std::vector<int>> rowlist(m_);
    std::vector<int> colcnt(m_, 0), rowcnt(m_, 0);
    std::vector<char> row_active(m_, 1), col_active(m_, 1);
    for (int p = 0; p < m_; ++p) {
      const int j = head_[p];
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        acol[p].push_back({col_row_[k], col_val_[k]});
        rowlist[col_row_[k]].push_back(p);
        ++rowcnt[col_row_[k]];
      }
      colcnt[p] = static_cast<int>(acol[p].size());
    }

    // Bucket columns by nnz; buckets may hold stale entries.
    const int max_bucket = m_ + 1;
    std::vector<std::vector<int>> bucket(std::min(max_bucket, 1 + m_));
    auto bucket_of = [&](int cnt) { return std::min(cnt, static_cast<int>(bucket.size()) - 1); };
    for (int p = 0; p < m_; ++p) {
      if (colcnt[p] == 0) throw SolverError("singular basis: empty column");
      bucket[bucket_of(colcnt[p])].push_back(p);
    }

    std::vector<double> wsp(m_, 0.0);
    std::vector<char> mark(m_, 0), col_seen(m_, 0);

    for (int s = 0; s < m_; ++s) {
      // Pivot selection: a few candidates from the sparsest buckets, best
      // Markowitz count subject to a relative stability threshold.
      int best_pos = -1, best_row = -1;
      double best_val = 0.0;
      long best_mk = -1;
      int seen = 0;
      for (size_t b = 1; b < bucket.size() && best_mk != 0 && seen < 8; ++b) {
        auto& bk = bucket[b];
        // Pop stale entries off the tail, then scan live ones in place.
        while (!bk.empty()) {
          const int p = bk.back();
          if (col_active[p] && bucket_of(colcnt[p]) == static_cast<int>(b)) break;
          bk.pop_back();
          if (col_active[p] && colcnt[p] > 0) bucket[bucket_of(colcnt[p])].push_back(p);
        }
        for (auto it = bk.rbegin(); it != bk.rend() && seen < 8 && best_mk != 0; ++it) {
          const int p = *it;
          if (!col_active[p] || bucket_of(colcnt[p]) != static_cast<int>(b)) continue;
          double cmax = 0.0;
          for (const auto& e : acol[p]) cmax = std::max(cmax, std::abs(e.val));
          if (cmax <= 0.0) throw SolverError("singular basis");
          for (const auto& e : acol[p]) {
            if (std::abs(e.val) < 0.01 * cmax) continue;
            const long mk = static_cast<long>(rowcnt[e.idx] - 1) * (colcnt[p] - 1);
            if (best_mk < 0 || mk < best_mk ||
                (mk == best_mk && std::abs(e.val) > std::abs(best_val))) {
              best_mk = mk;
              best_pos = p;
              best_row = e.idx;
              best_val = e.val;
            }
          }
          ++seen;
        }
      }
      if (best_pos < 0) throw SolverError("singular basis: no pivot");

      const int pr = best_row, pc = best_pos;
      const double pv = best_val;
      lu_row_[s] = pr;
      lu_pos_[s] = pc;
      lu_diag_[s] = pv;

      auto& lcol = lcol_[s];
      for (const auto& e : acol[pc])
        if (e.idx != pr) lcol.push_back({e.idx, e.val / pv});
      auto& urow = urow_[s];
      for (int c : rowlist[pr]) {
        // rowlist accumulates stale and duplicate references; validate here.
        if (!col_active[c] || c == pc || col_seen[c]) continue;
        col_seen[c] = 1;
        double v = 0.0;
        bool found = false;
        for (const auto& e : acol[c])
          if (e.idx == pr) {
            v = e.val;
            found = true;
            break;
          }
        if (found && v != 0.0) urow.push_back({c, v});
      }
      for (const auto& ue : urow) col_seen[ue.idx] = 0;
      for (int c : rowlist[pr]) col_seen[c] = 0;

      row_active[pr] = 0;
      col_active[pc] = 0;
      for (const auto& e : acol[pc]) --rowcnt[e.idx];

      // col_c -= u_c * L(:,s) for every column in the pivot row.
      for (const auto& ue : urow) {
        const int c = ue.idx;
        const double uc = ue.val;
        auto& col = acol[c];
        for (auto& e : col) {
          wsp[e.idx] = e.val;
          mark[e.idx] = 1;
        }
        for (const auto& le : lcol) {
          const double delta = uc * le.val;
          if (!mark[le.idx]) {
            wsp[le.idx] = -delta;
            mark[le.idx] = 1;
            col.push_back({le.idx, 0.0});
            rowlist[le.idx].push_back(c);
            ++rowcnt[le.idx];
          } else {
            const double nv = wsp[le.idx] - delta;
            wsp[le.idx] =
                (std::abs(nv) < 1e-14 * (std::abs(wsp[le.idx]) + std::abs(delta))) ? 0.0 : nv;
          }
        }
        size_t k = 0;
        for (size_t i = 0; i < col.size(); ++i) {
          const int r = col[i].idx;
          if (!mark[r]) continue;
          mark[r] = 0;
          if (r == pr || !row_active[r] || wsp[r] == 0.0) {
            if (row_active[r] || r == pr) --rowcnt[r];
            continue;
          }
          col[k++] = {r, wsp[r]};
        }
        col.resize(k);
        colcnt[c] = static_cast<int>(k);
        if (colcnt[c] == 0) throw SolverError("singular basis during elimination");
        bucket[bucket_of(colcnt[c])].push_back(c);
      }
      acol[pc].clear();
    }
  }

  // Solve B w = a for dense a over rows; result over positions.
  void ftran_dense(std::vector<double>* a, std::vector<double>* out) const {
    auto& w = *a;
    for (int s = 0; s < m_; ++s) {
      const double t = w[lu_row_[s]];
      if (t != 0.0)
        for (const auto& e : lcol_[s]) w[e.idx] -= e.val * t;
    }
    auto& x = *out;
    x.assign(m_, 0.0);
    for (int s = m_ - 1; s >= 0; --s) {
      double t = w[lu_row_[s]];
      for (const auto& e : urow_[s]) t -= e.val * x[e.idx];
      x[lu_pos_[s]] = t / lu_diag_[s];
    }
    for (const auto& eta : etas_) {
      const double xp = x[eta.pos] / eta.pivot;
      x[eta.pos] = xp;
      if (xp != 0.0)
        for (const auto& e : eta.terms) x[e.idx] -= e.val * xp;
    }
  }

  void ftran_col(int j, std::vector<double>* scratch, std::vector<double>* out) const {
    scratch->assign(m_, 0.0);
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
      (*scratch)[col_row_[k]] = col_val_[k];
    ftran_dense(scratch, out);
  }

  // Solve B^T y = c for dense c over positions; result over rows.
  void btran(std::vector<double> c, std::vector<double>* out) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double cp = c[it->pos];
      for (const auto& e : it->terms) cp -= e.val * c[e.idx];
      c[it->pos] = cp / it->pivot;
    }
    auto& z = *out;
    z.assign(m_, 0.0);
    for (int s = 0; s < m_; ++s) {
      const double t = c[lu_pos_[s]] / lu_diag_[s];
      z[lu_row_[s]] = t;
      if (t != 0.0)
        for (const auto& e : urow_[s]) c[e.idx] -= e.val * t;
    }
    for (int s = m_ - 1; s >= 0; --s) {
      double acc = z[lu_row_[s]];
      bool any = false;
      for (const auto& e : lcol_[s]) {
        acc -= e.val * z[e.idx];
        any = true;
      }
      if (any) z[lu_row_[s]] = acc;
    }
  }

  void compute_basic_values() {
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < N_; ++j) {
      if (state_[j] == BASIC || xval_[j] == 0.0) continue;
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
        rhs[col_row_[k]] -= col_val_[k] * xval_[j];
    }
    std::vector<double> xb;
    ftran_dense(&rhs, &xb);
    for (int p = 0; p < m_; ++p) xval_[head_[p]] = xb[p];
  }

  // --- iteration helpers ----------------------------------------------------

  double col_dot(int j, const std::vector<double>& y) const {
    double d = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
      d += col_val_[k] * y[col_row_[k]];
    return d;
  }

  double infeasibility() const {
    double s = 0.0;
    for (int p = 0; p < m_; ++p) {
      const int j = head_[p];
      if (xval_[j] < lb_[j]) s += lb_[j] - xval_[j];
      if (xval_[j] > ub_[j]) s += xval_[j] - ub_[j];
    }
    return s;
  }

  void track_progress(double value) {
    if (value < last_progress_ - 1e-9 * (1.0 + std::abs(last_progress_))) {
      last_progress_ = value;
      stall_ = 0;
      bland_ = false;
    } else if (++stall_ > opt_.stall_limit) {
      bland_ = true;
    }
  }

  bool eligible(int j, double d) const {
    switch (state_[j]) {
      case NB_LO: return d < -opt_.tol_dual;
      case NB_UP: return d > opt_.tol_dual;
      case NB_FREE: return std::abs(d) > opt_.tol_dual;
      default: return false;
    }
  }

  // Entering column by partial Dantzig pricing (Bland: first eligible).
  int price(const std::vector<double>& y, bool phase1_costs, double* d_out) {
    const int section = std::max(1000, N_ / 32);
    const int nsec = (N_ + section - 1) / section;
    int best = -1;
    double best_d = 0.0;
    for (int pass = 0; pass < nsec; ++pass) {
      const int sec = bland_ ? pass : (price_section_ + pass) % nsec;
      const int from = sec * section;
      const int to = std::min(N_, from + section);
      for (int j = from; j < to; ++j) {
        if (state_[j] == BASIC || state_[j] == NB_FIXED) continue;
        const double cj = phase1_costs ? 0.0 : cost_[j];
        const double d = cj - col_dot(j, y);
        if (!eligible(j, d)) continue;
        if (bland_) {
          *d_out = d;
          return j;  // smallest index overall: sections scanned in order
        }
        if (std::abs(d) > std::abs(best_d) + 1e-15) {
          best = j;
          best_d = d;
        }
      }
      if (best >= 0 && !bland_) {
        price_section_ = sec;
        *d_out = best_d;
        return best;
      }
    }
    *d_out = best_d;
    return best;
  }

  std::vector<double> phase_costs_basic(bool phase1) const {
    std::vector<double> cb(m_, 0.0);
    for (int p = 0; p < m_; ++p) {
      const int j = head_[p];
      if (phase1) {
        if (xval_[j] < lb_[j] - opt_.tol_primal) cb[p] = -1.0;
        else if (xval_[j] > ub_[j] + opt_.tol_primal) cb[p] = 1.0;
      } else {
        cb[p] = cost_[j];
      }
    }
    return cb;
  }

  struct Ratio {
    double step = kInf;
    int block_pos = -1;   // -1: entering variable's own bound
    double target = 0.0;  // bound value the blocking basic lands on
  };

  Ratio ratio_test(int j, int dir, const std::vector<double>& w) const {
    Ratio r;
    if (state_[j] != NB_FREE && lb_[j] > -kInf && ub_[j] < kInf)
      r.step = ub_[j] - lb_[j];
    double best_piv = 0.0;
    for (int p = 0; p < m_; ++p) {
      if (std::abs(w[p]) <= opt_.tol_pivot) continue;
      const double delta = -w[p] * dir;  // basic value rate per unit step
      const int k = head_[p];
      double target, room;
      if (delta > 0.0) {
        // A basic already above its upper bound and moving further up has a
        // constant phase-1 gradient: it is not a breakpoint.
        if (xval_[k] > ub_[k] + opt_.tol_primal) continue;
        target = (xval_[k] < lb_[k] - opt_.tol_primal) ? lb_[k] : ub_[k];
        if (target == kInf) continue;
        room = (target - xval_[k]) / delta;
      } else {
        if (xval_[k] < lb_[k] - opt_.tol_primal) continue;
        target = (xval_[k] > ub_[k] + opt_.tol_primal) ? ub_[k] : lb_[k];
        if (target == -kInf) continue;
        room = (target - xval_[k]) / delta;
      }
      room = std::max(room, 0.0);
      const bool better =
          room < r.step - 1e-12 ||
          (room < r.step + 1e-12 && r.block_pos >= 0 &&
           (bland_ ? head_[p] < head_[r.block_pos] : std::abs(w[p]) > best_piv));
      if (better) {
        r.step = std::min(room, r.step);
        r.block_pos = p;
        r.target = target;
        best_piv = std::abs(w[p]);
      }
    }
    return r;
  }

  void apply_step(int j, int dir, double step, const std::vector<double>& w) {
    if (step != 0.0) {
      xval_[j] += dir * step;
      for (int p = 0; p < m_; ++p)
        if (w[p] != 0.0) xval_[head_[p]] -= w[p] * dir * step;
    }
  }

  void pivot(int j, const Ratio& r, const std::vector<double>& w) {
    const int p = r.block_pos;
    const int leaving = head_[p];
    xval_[leaving] = r.target;  // snap exactly
    state_[leaving] = (lb_[leaving] == ub_[leaving]) ? NB_FIXED
                      : (r.target == lb_[leaving] ? NB_LO : NB_UP);
    head_[p] = j;
    state_[j] = BASIC;
    Eta eta;
    eta.pos = p;
    eta.pivot = w[p];
    for (int q = 0; q < m_; ++q)
      if (q != p && w[q] != 0.0) eta.terms.push_back({q, w[q]});
    etas_.push_back(std::move(eta));
    if (static_cast<int>(etas_.size()) >= opt_.refactor_every) {
      factorize();
      compute_basic_values();
    }
  }

  void bump_iteration(LpSolution* out) {
    if (++iterations_ > opt_.max_iterations)
      throw SolverError("simplex iteration limit exceeded (" +
                        std::to_string(opt_.max_iterations) + ")");
    out->iterations = iterations_;
  }

  // Returns false and sets status on infeasibility.
  bool phase1(LpSolution* out) {
    std::vector<double> y, w, scratch;
    bland_ = false;
    stall_ = 0;
    last_progress_ = kInf;
    for (;;) {
      const double infeas = infeasibility();
      if (infeas <= opt_.tol_primal) return true;
      bump_iteration(out);
      track_progress(infeas);
      btran(phase_costs_basic(true), &y);
      double d = 0.0;
      const int j = price(y, true, &d);
      if (j < 0) {
        out->status = LpStatus::infeasible;
        return false;
      }
      const int dir = d < 0.0 ? +1 : -1;
      ftran_col(j, &scratch, &w);
      const Ratio r = ratio_test(j, dir, w);
      if (r.step == kInf)
        throw SolverError("phase 1: unblocked improving ray");
      apply_step(j, dir, r.step, w);
      if (r.block_pos < 0) {
        state_[j] = (state_[j] == NB_LO) ? NB_UP : NB_LO;
        xval_[j] = nonbasic_value(j, state_[j]);
      } else {
        pivot(j, r, w);
      }
    }
  }

  bool phase2(LpSolution* out) {
    std::vector<double> y, w, scratch;
    bland_ = false;
    stall_ = 0;
    last_progress_ = kInf;
    for (;;) {
      bump_iteration(out);
      track_progress(current_objective());
      btran(phase_costs_basic(false), &y);
      double d = 0.0;
      const int j = price(y, false, &d);
      if (j < 0) return true;
      const int dir = d < 0.0 ? +1 : -1;
      ftran_col(j, &scratch, &w);
      const Ratio r = ratio_test(j, dir, w);
      if (r.step == kInf) {
        out->status = LpStatus::unbounded;
        return false;
      }
      apply_step(j, dir, r.step, w);
      if (r.block_pos < 0) {
        state_[j] = (state_[j] == NB_LO) ? NB_UP : NB_LO;
        xval_[j] = nonbasic_value(j, state_[j]);
      } else {
        pivot(j, r, w);
      }
    }
  }

  // Dual simplex until primal feasible.  Returns false on infeasible.
  bool dual_phase(LpSolution* out) {
    std::vector<double> y, r, w, scratch, unit;
    for (;;) {
      int pstar = -1;
      double worst = opt_.tol_primal;
      for (int p = 0; p < m_; ++p) {
        const int k = head_[p];
        const double v = std::max(lb_[k] - xval_[k], xval_[k] - ub_[k]);
        if (v > worst) {
          worst = v;
          pstar = p;
        }
      }
      if (pstar < 0) return true;
      bump_iteration(out);

      const int leaving = head_[pstar];
      const bool below = xval_[leaving] < lb_[leaving];
      // r = B^{-T} e_p: dotting with columns gives the pivot row of B^{-1}N.
      unit.assign(m_, 0.0);
      unit[pstar] = 1.0;
      btran(unit, &r);
      btran(phase_costs_basic(false), &y);

      int enter = -1, enter_dir = 0;
      double best_ratio = kInf;
      for (int j = 0; j < N_; ++j) {
        if (state_[j] == BASIC || state_[j] == NB_FIXED) continue;
        const double alpha = col_dot(j, r);
        if (std::abs(alpha) <= opt_.tol_pivot) continue;
        int dir;
        if (state_[j] == NB_LO) dir = +1;
        else if (state_[j] == NB_UP) dir = -1;
        else dir = (below ? (alpha < 0 ? +1 : -1) : (alpha < 0 ? -1 : +1));
        const double rate = -alpha * dir;  // movement of x_B[pstar] per unit step
        if (below ? rate <= opt_.tol_pivot : rate >= -opt_.tol_pivot) continue;
        const double d = cost_[j] - col_dot(j, y);
        const double ratio = std::abs(d) / std::abs(alpha);
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && (enter < 0 || j < enter))) {
          best_ratio = ratio;
          enter = j;
          enter_dir = dir;
        }
      }
      if (enter < 0) {
        out->status = LpStatus::infeasible;
        return false;
      }

      ftran_col(enter, &scratch, &w);
      if (std::abs(w[pstar]) <= opt_.tol_pivot)
        throw SolverError("dual simplex: vanishing pivot");
      const double target = below ? lb_[leaving] : ub_[leaving];
      const double step = (target - xval_[leaving]) / (-w[pstar] * enter_dir);
      apply_step(enter, enter_dir, std::max(step, 0.0), w);
      Ratio rr;
      rr.block_pos = pstar;
      rr.target = target;
      pivot(enter, rr, w);
    }
  }

  double current_objective() const {
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += cost_[j] * xval_[j];
    return obj;
  }

  LpSolution extract(LpSolution out) {
    out.x.assign(xval_.begin(), xval_.begin() + n_);
    out.objective = current_objective();
    std::vector<double> y;
    btran(phase_costs_basic(false), &y);
    out.duals = y;
    out.reduced_cost.resize(n_);
    for (int j = 0; j < n_; ++j)
      out.reduced_cost[j] = (state_[j] == BASIC) ? 0.0 : cost_[j] - col_dot(j, y);
    out.row_activity.assign(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (xval_[j] == 0.0) continue;
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
        out.row_activity[col_row_[k]] += col_val_[k] * xval_[j];
    }
    out.iterations = iterations_;
    return out;
  }
};

inline LpSolution solve_lp(const LinearModel& model, SimplexOptions opt = {}) {
  Simplex s(model, opt);
  return s.solve();
}

}  // namespace ndcgem::lp
