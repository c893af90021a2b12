#include "pbsim/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pbsim {
namespace {

constexpr double kMinLength = 1e-13;
constexpr double kSlopeTol = 1e-13;

std::size_t segment_of(const std::vector<double>& xs, double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  return std::min(i, xs.size() - 2);
}

}  // namespace

ConcavePwl ConcavePwl::point(double x, double y) {
  ConcavePwl f;
  f.assign_point(x, y);
  return f;
}

void ConcavePwl::assign_point(double x, double y) {
  xs_.assign(1, x);
  ys_.assign(1, y);
  slopes_.clear();
}

ConcavePwl ConcavePwl::linear(double x0, double x1, double y0, double slope) {
  ConcavePwl f = point(x0, y0);
  f.push_segment(x1 - x0, slope);
  return f;
}

ConcavePwl ConcavePwl::two_piece(double x0, double xm, double x1, double ym, double left_slope,
                                 double right_slope) {
  if (left_slope < right_slope - kSlopeTol) throw std::logic_error("two_piece: not concave");
  ConcavePwl f = point(x0, ym - left_slope * (xm - x0));
  f.push_segment(xm - x0, left_slope);
  f.push_segment(x1 - xm, right_slope);
  return f;
}

void ConcavePwl::push_segment(double length, double slope) {
  if (length <= kMinLength) return;
  if (!slopes_.empty() && std::abs(slopes_.back() - slope) <= kSlopeTol) {
    xs_.back() += length;
    ys_.back() += slopes_.back() * length;
    return;
  }
  xs_.push_back(xs_.back() + length);
  ys_.push_back(ys_.back() + slope * length);
  slopes_.push_back(slope);
}

double ConcavePwl::operator()(double x) const {
  if (empty() || x < lo() - kDomainTol || x > hi() + kDomainTol) return kNegInf;
  if (xs_.size() == 1) return ys_[0];
  x = std::clamp(x, lo(), hi());
  const std::size_t i = segment_of(xs_, x);
  return ys_[i] + slopes_[i] * (x - xs_[i]);
}

ConcavePwl ConcavePwl::reflect() const {
  ConcavePwl h;
  const std::size_t n = xs_.size();
  h.xs_.resize(n);
  h.ys_.resize(n);
  h.slopes_.resize(slopes_.size());
  for (std::size_t i = 0; i < n; ++i) {
    h.xs_[i] = -xs_[n - 1 - i];
    h.ys_[i] = ys_[n - 1 - i];
  }
  for (std::size_t i = 0; i < slopes_.size(); ++i) h.slopes_[i] = -slopes_[slopes_.size() - 1 - i];
  return h;
}

ConcavePwl ConcavePwl::restrict_to(double a, double b) const {
  ConcavePwl r;
  restrict_into(a, b, r);
  return r;
}

void ConcavePwl::restrict_into(double a, double b, ConcavePwl& out) const {
  out.xs_.clear();
  out.ys_.clear();
  out.slopes_.clear();
  if (empty()) return;
  a = std::max(a, lo());
  b = std::min(b, hi());
  if (a > b) {
    if (a - b > kDomainTol) return;
    const double m = std::clamp(0.5 * (a + b), lo(), hi());
    out.assign_point(m, (*this)(m));
    return;
  }
  out.assign_point(a, (*this)(a));
  if (xs_.size() == 1) return;
  std::size_t i = segment_of(xs_, a);
  double x = a;
  while (x < b && i < slopes_.size()) {
    const double seg_end = std::min(xs_[i + 1], b);
    if (seg_end > x) {
      out.push_segment(seg_end - x, slopes_[i]);
      x = seg_end;
    }
    ++i;
  }
}

ConcavePwl ConcavePwl::plus_scaled(const ConcavePwl& g, double w) const {
  if (empty() || g.empty()) return {};
  double a = std::max(lo(), g.lo());
  double b = std::min(hi(), g.hi());
  if (a > b) {
    if (a - b > kDomainTol) return {};
    a = b = 0.5 * (a + b);
  }
  ConcavePwl r = point(a, (*this)(a) + w * g(a));
  std::size_t i = 0, j = 0;
  double x = a;
  while (x < b) {
    while (i + 1 < xs_.size() && xs_[i + 1] <= x) ++i;
    while (j + 1 < g.xs_.size() && g.xs_[j + 1] <= x) ++j;
    double next = b;
    if (i + 1 < xs_.size()) next = std::min(next, xs_[i + 1]);
    if (j + 1 < g.xs_.size()) next = std::min(next, g.xs_[j + 1]);
    const double sf = slopes_.empty() ? 0.0 : slopes_[std::min(i, slopes_.size() - 1)];
    const double sg = g.slopes_.empty() ? 0.0 : g.slopes_[std::min(j, g.slopes_.size() - 1)];
    r.push_segment(next - x, sf + w * sg);
    x = next;
  }
  return r;
}

ConcavePwl sup_convolve(const ConcavePwl& f, const ConcavePwl& g) {
  if (f.empty() || g.empty()) return {};
  ConcavePwl r = ConcavePwl::point(f.lo() + g.lo(), f.ys_[0] + g.ys_[0]);
  r.xs_.reserve(f.xs_.size() + g.xs_.size());
  r.ys_.reserve(f.xs_.size() + g.xs_.size());
  r.slopes_.reserve(f.slopes_.size() + g.slopes_.size());
  std::size_t i = 0, j = 0;
  while (i < f.slopes_.size() || j < g.slopes_.size()) {
    const bool take_f =
        j == g.slopes_.size() || (i < f.slopes_.size() && f.slopes_[i] >= g.slopes_[j]);
    if (take_f) {
      r.push_segment(f.xs_[i + 1] - f.xs_[i], f.slopes_[i]);
      ++i;
    } else {
      r.push_segment(g.xs_[j + 1] - g.xs_[j], g.slopes_[j]);
      ++j;
    }
  }
  return r;
}

void sup_convolve_reflected(const ConcavePwl& f, const ConcavePwl& g, ConcavePwl& out) {
  out.xs_.clear();
  out.ys_.clear();
  out.slopes_.clear();
  if (f.empty() || g.empty()) return;
  out.assign_point(f.lo() - g.hi(), f.ys_[0] + g.ys_.back());
  const std::size_t m = g.slopes_.size();
  std::size_t i = 0, j = 0;
  while (i < f.slopes_.size() || j < m) {
    const bool take_f = j == m || (i < f.slopes_.size() && f.slopes_[i] >= -g.slopes_[m - 1 - j]);
    if (take_f) {
      out.push_segment(f.xs_[i + 1] - f.xs_[i], f.slopes_[i]);
      ++i;
    } else {
      out.push_segment(g.xs_[m - j] - g.xs_[m - 1 - j], -g.slopes_[m - 1 - j]);
      ++j;
    }
  }
}

bool best_step(const ConcavePwl& r, const ConcavePwl& v, double c, StepChoice& out,
               double tie_tol) {
  if (r.empty() || v.empty()) return false;
  double a = std::max(r.lo(), v.lo() - c);
  double b = std::min(r.hi(), v.hi() - c);
  if (a > b) {
    if (a - b > ConcavePwl::kDomainTol) return false;
    a = b = 0.5 * (a + b);
  }

  // The objective is concave, so its maximum sits on a breakpoint of either
  // term or on an end of the feasible interval. Values of v at its own
  // breakpoints are read directly.
  thread_local std::vector<double> cand, val;
  cand.clear();
  val.clear();
  auto add = [&](double x) {
    cand.push_back(x);
    val.push_back(r(x) + v(c + x));
  };
  add(a);
  if (b != a) add(b);
  if (a < 0.0 && 0.0 < b) add(0.0);
  for (const double x : r.xs()) {
    if (x > a && x < b) add(x);
  }
  const std::vector<double>& vx = v.xs();
  const std::vector<double>& vy = v.ys();
  for (auto it = std::upper_bound(vx.begin(), vx.end(), a + c); it != vx.end(); ++it) {
    const double x = *it - c;
    if (x >= b) break;
    if (x <= a) continue;
    cand.push_back(x);
    val.push_back(r(x) + vy[static_cast<std::size_t>(it - vx.begin())]);
  }

  double best = kNegInf;
  for (const double y : val) best = std::max(best, y);
  if (best == kNegInf) return false;
  out.value = kNegInf;
  for (std::size_t k = 0; k < cand.size(); ++k) {
    if (val[k] < best - tie_tol) continue;
    const bool better = out.value == kNegInf || std::abs(cand[k]) < std::abs(out.d) ||
                        (std::abs(cand[k]) == std::abs(out.d) && cand[k] < out.d);
    if (better) {
      out.d = cand[k];
      out.value = val[k];
    }
  }
  return true;
}

std::vector<ConcavePwl> chain_values(const std::vector<ConcavePwl>& rewards,
                                     const std::vector<double>& c_lo,
                                     const std::vector<double>& c_hi) {
  std::vector<ConcavePwl> v;
  chain_values_into(rewards, c_lo, c_hi, v);
  return v;
}

void chain_values_into(const std::vector<ConcavePwl>& rewards, const std::vector<double>& c_lo,
                       const std::vector<double>& c_hi, std::vector<ConcavePwl>& v) {
  const std::size_t n = rewards.size();
  v.resize(n);
  if (n == 0) return;
  thread_local ConcavePwl scratch;
  scratch.assign_point(c_lo[n - 1], 0.0);
  scratch.push_segment(std::max(c_lo[n - 1], c_hi[n - 1]) - c_lo[n - 1], 0.0);
  scratch.restrict_into(c_lo[n - 1], c_hi[n - 1], v[n - 1]);
  for (std::size_t k = n - 1; k > 0; --k) {
    sup_convolve_reflected(v[k], rewards[k], scratch);
    scratch.restrict_into(c_lo[k - 1], c_hi[k - 1], v[k - 1]);
  }
}

ChainResult solve_chain(const std::vector<ConcavePwl>& rewards, const std::vector<double>& c_lo,
                        const std::vector<double>& c_hi) {
  ChainResult res;
  const std::size_t n = rewards.size();
  res.d.assign(n, 0.0);

  double reach_lo = 0.0, reach_hi = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    reach_lo = std::max(reach_lo + rewards[k].lo(), c_lo[k]);
    reach_hi = std::min(reach_hi + rewards[k].hi(), c_hi[k]);
    if (reach_lo > reach_hi + ConcavePwl::kDomainTol) {
      res.failing_step = k;
      return res;
    }
    reach_hi = std::max(reach_hi, reach_lo);
  }

  const std::vector<ConcavePwl> v = chain_values(rewards, c_lo, c_hi);
  for (std::size_t k = 0; k < n; ++k) {
    if (v[k].empty()) {
      res.failing_step = k + 1 < n ? k + 1 : k;
      for (std::size_t j = k + 1; j < n; ++j) {
        if (!v[j].empty()) break;
        res.failing_step = j + 1 < n ? j + 1 : j;
      }
      return res;
    }
  }
  double c = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    StepChoice choice;
    if (!best_step(rewards[k], v[k], c, choice)) {
      res.failing_step = k;
      return res;
    }
    res.d[k] = choice.d;
    res.value += rewards[k](choice.d);
    c += choice.d;
  }
  res.feasible = true;
  return res;
}

}  // namespace pbsim
