#include <algorithm>
#include <cmath>

#include "pbsim/milp.hpp"

namespace pbsim {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-7;

// Tableau over columns [structural | slack | artificial]. Row i reads
// a_i x - s_i + sigma_i art_i = 0 with the slack carrying the row range.
class Tableau {
 public:
  Tableau(const MilpModel& model, const std::vector<double>& lb_override,
          const std::vector<double>& ub_override)
      : m_(model.rows().size()), n_(model.variables().size()), cols_(n_ + 2 * m_) {
    lb_.resize(cols_);
    ub_.resize(cols_);
    val_.assign(cols_, 0.0);
    const auto& vars = model.variables();
    for (std::size_t j = 0; j < n_; ++j) {
      lb_[j] = lb_override.empty() ? vars[j].lb : lb_override[j];
      ub_[j] = ub_override.empty() ? vars[j].ub : ub_override[j];
      val_[j] = std::isfinite(lb_[j]) ? lb_[j] : (std::isfinite(ub_[j]) ? ub_[j] : 0.0);
    }
    t_.assign(m_ * cols_, 0.0);
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const Row& row = model.rows()[i];
      double activity = 0.0;
      for (const auto& [j, a] : row.terms) {
        at(i, static_cast<std::size_t>(j)) += a;
        activity += a * val_[static_cast<std::size_t>(j)];
      }
      const std::size_t s = n_ + i;
      lb_[s] = row.lo;
      ub_[s] = row.hi;
      at(i, s) = -1.0;
      double sv = std::clamp(activity, row.lo, row.hi);
      if (!std::isfinite(sv)) sv = 0.0;
      if (std::isfinite(row.lo) && (!std::isfinite(row.hi) || activity <= 0.5 * (row.lo + row.hi))) {
        sv = row.lo;
      } else if (std::isfinite(row.hi)) {
        sv = row.hi;
      }
      val_[s] = sv;
      const double residual = activity - sv;
      const double sigma = residual > 0.0 ? -1.0 : 1.0;
      const std::size_t a = n_ + m_ + i;
      lb_[a] = 0.0;
      ub_[a] = kInf;
      at(i, a) = sigma;
      val_[a] = std::abs(residual);
      basis_[i] = a;
      // Scale the row so the basic artificial has a unit coefficient.
      for (std::size_t j = 0; j < cols_; ++j) at(i, j) *= sigma;
    }
    max_iter_ = 50 * (m_ + cols_) + 1000;
    bland_after_ = 10 * (m_ + cols_);
  }

  // Minimizes cost . val. Returns kOptimal, kUnbounded or kIterationLimit.
  LpStatus run(const std::vector<double>& cost) {
    std::vector<double> d(cols_);
    std::vector<char> is_basic(cols_, 0);
    for (const std::size_t b : basis_) is_basic[b] = 1;
    while (true) {
      if (iterations_ >= max_iter_) return LpStatus::kIterationLimit;
      const bool bland = iterations_ >= bland_after_;
      for (std::size_t j = 0; j < cols_; ++j) d[j] = cost[j];
      for (std::size_t i = 0; i < m_; ++i) {
        const double cb = cost[basis_[i]];
        if (cb == 0.0) continue;
        const double* row = &t_[i * cols_];
        for (std::size_t j = 0; j < cols_; ++j) d[j] -= cb * row[j];
      }

      std::size_t enter = cols_;
      int dir = 0;
      double best = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (is_basic[j] || lb_[j] == ub_[j]) continue;
        int cand_dir = 0;
        const bool at_lb = std::isfinite(lb_[j]) && val_[j] <= lb_[j] + kFeasTol;
        const bool at_ub = std::isfinite(ub_[j]) && val_[j] >= ub_[j] - kFeasTol;
        if (at_lb && d[j] < -kCostTol) {
          cand_dir = 1;
        } else if (at_ub && d[j] > kCostTol) {
          cand_dir = -1;
        } else if (!at_lb && !at_ub && std::abs(d[j]) > kCostTol) {
          cand_dir = d[j] < 0.0 ? 1 : -1;
        }
        if (cand_dir == 0) continue;
        if (bland) {
          enter = j;
          dir = cand_dir;
          break;
        }
        if (std::abs(d[j]) > best) {
          best = std::abs(d[j]);
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter == cols_) return LpStatus::kOptimal;

      // Ratio test, including the entering column's own bound flip.
      double theta = ub_[enter] - lb_[enter];
      std::size_t leave = m_;
      double leave_g = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double g = at(i, enter) * dir;
        if (std::abs(g) <= kPivotTol) continue;
        const std::size_t b = basis_[i];
        double lim;
        if (g > 0.0) {
          if (!std::isfinite(lb_[b])) continue;
          lim = (val_[b] - lb_[b]) / g;
        } else {
          if (!std::isfinite(ub_[b])) continue;
          lim = (ub_[b] - val_[b]) / -g;
        }
        lim = std::max(lim, 0.0);
        const bool tie = leave < m_ && std::abs(lim - theta) <= 1e-12;
        bool take = lim < theta - 1e-12;
        if (tie) take = bland ? b < basis_[leave] : std::abs(g) > std::abs(leave_g);
        if (take) {
          theta = lim;
          leave = i;
          leave_g = g;
        }
      }
      if (!std::isfinite(theta)) return LpStatus::kUnbounded;

      val_[enter] += dir * theta;
      for (std::size_t i = 0; i < m_; ++i) val_[basis_[i]] -= at(i, enter) * dir * theta;
      if (leave < m_) {
        const std::size_t out = basis_[leave];
        val_[out] = leave_g > 0.0 ? lb_[out] : ub_[out];
        pivot(leave, enter);
        is_basic[out] = 0;
        is_basic[enter] = 1;
      }
      ++iterations_;
    }
  }

  // Pivots zero-valued artificials out of the basis where possible, then
  // pins every artificial to zero.
  void retire_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_ + m_) continue;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (std::abs(at(i, j)) > kPivotTol && !is_basic(j)) {
          const std::size_t out = basis_[i];
          pivot(i, j);
          val_[out] = 0.0;
          break;
        }
      }
    }
    for (std::size_t a = n_ + m_; a < cols_; ++a) {
      lb_[a] = 0.0;
      ub_[a] = 0.0;
    }
  }

  double artificial(std::size_t row) const { return val_[n_ + m_ + row]; }
  double value(std::size_t j) const { return val_[j]; }
  std::size_t rows() const { return m_; }
  std::size_t structurals() const { return n_; }
  std::size_t columns() const { return cols_; }
  std::size_t iterations() const { return iterations_; }

 private:
  double& at(std::size_t i, std::size_t j) { return t_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * cols_ + j]; }

  bool is_basic(std::size_t j) const {
    return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
  }

  void pivot(std::size_t r, std::size_t c) {
    double* prow = &t_[r * cols_];
    const double inv = 1.0 / prow[c];
    for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
    prow[c] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &t_[i * cols_];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * prow[j];
      row[c] = 0.0;
    }
    basis_[r] = c;
  }

  std::size_t m_, n_, cols_;
  std::vector<double> t_;
  std::vector<double> lb_, ub_, val_;
  std::vector<std::size_t> basis_;
  std::size_t iterations_ = 0;
  std::size_t max_iter_ = 0;
  std::size_t bland_after_ = 0;
};

}  // namespace

LpResult solve_lp(const MilpModel& model, const std::vector<double>& lb,
                  const std::vector<double>& ub) {
  LpResult result;
  const std::size_t n = model.variables().size();
  for (std::size_t j = 0; j < n; ++j) {
    const double l = lb.empty() ? model.variables()[j].lb : lb[j];
    const double u = ub.empty() ? model.variables()[j].ub : ub[j];
    if (l > u) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
  }
  Tableau tab(model, lb, ub);
  const std::size_t m = tab.rows();

  std::vector<double> cost(tab.columns(), 0.0);
  for (std::size_t a = n + m; a < tab.columns(); ++a) cost[a] = 1.0;
  LpStatus st = tab.run(cost);
  if (st == LpStatus::kIterationLimit) {
    result.status = st;
    result.iterations = tab.iterations();
    return result;
  }
  double infeasibility = 0.0;
  for (std::size_t i = 0; i < m; ++i) infeasibility += tab.artificial(i);
  if (infeasibility > kFeasTol) {
    result.status = LpStatus::kInfeasible;
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.artificial(i) > kFeasTol * 0.1) result.infeasible_rows.push_back(static_cast<int>(i));
    }
    result.iterations = tab.iterations();
    return result;
  }

  tab.retire_artificials();
  std::fill(cost.begin(), cost.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = -model.variables()[j].obj;
  st = tab.run(cost);
  result.status = st;
  result.iterations = tab.iterations();
  result.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) result.x[j] = tab.value(j);
  result.objective = model.objective(result.x);
  return result;
}

}  // namespace pbsim
