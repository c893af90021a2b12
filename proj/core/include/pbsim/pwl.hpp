#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace pbsim {

// Concave piecewise-linear function on a closed interval, -inf outside.
// Breakpoints xs ascending; slopes[i] is the slope on [xs[i], xs[i+1]] and is
// stored explicitly so repeated convolutions do not accumulate cancellation.
// A default-constructed function has an empty domain.
class ConcavePwl {
 public:
  static constexpr double kDomainTol = 1e-9;

  ConcavePwl() = default;

  static ConcavePwl point(double x, double y);
  // y0 at x0, constant slope up to x1.
  static ConcavePwl linear(double x0, double x1, double y0, double slope);
  // Two pieces meeting at (xm, ym). Throws if the result is not concave.
  static ConcavePwl two_piece(double x0, double xm, double x1, double ym, double left_slope,
                              double right_slope);

  bool empty() const noexcept { return xs_.empty(); }
  double lo() const noexcept { return xs_.front(); }
  double hi() const noexcept { return xs_.back(); }
  std::size_t breakpoints() const noexcept { return xs_.size(); }
  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& ys() const noexcept { return ys_; }
  const std::vector<double>& slopes() const noexcept { return slopes_; }

  // -inf outside [lo - kDomainTol, hi + kDomainTol]; clamped inside that band.
  double operator()(double x) const;

  // h(z) = f(-z).
  ConcavePwl reflect() const;

  // Restriction to [a, b]. Intervals inverted by at most kDomainTol collapse
  // to a point; wider inversions or disjoint domains give an empty function.
  ConcavePwl restrict_to(double a, double b) const;

  // this + w * g on the common domain.
  ConcavePwl plus_scaled(const ConcavePwl& g, double w) const;

  // (f box g)(z) = max_{x + y = z} f(x) + g(y).
  friend ConcavePwl sup_convolve(const ConcavePwl& f, const ConcavePwl& g);

  // In-place forms that reuse the storage of `out`. `out` must not alias an input.
  void restrict_into(double a, double b, ConcavePwl& out) const;
  // out = f box h with h(z) = g(-z).
  friend void sup_convolve_reflected(const ConcavePwl& f, const ConcavePwl& g, ConcavePwl& out);

  // Builders: start at (x, y), then append segments left to right.
  void assign_point(double x, double y);
  void push_segment(double length, double slope);

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> slopes_;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Best step in a chain recursion: maximize r(d) + v(c + d). Among maximizers
// (values within `tie_tol`) returns the one with the smallest |d|.
// Returns false when the feasible set is empty.
struct StepChoice {
  double d = 0.0;
  double value = kNegInf;
};
bool best_step(const ConcavePwl& r, const ConcavePwl& v, double c, StepChoice& out,
               double tie_tol = 1e-10);

// One-dimensional storage chain: maximize sum_k r[k](d_k) subject to
// C_k = C_{k-1} + d_k in [c_lo[k], c_hi[k]], C_{-1} = 0.
//
// chain_values returns V[k](c), the best reward of steps k+1.. given C_k = c,
// restricted to the states from which the chain can still be completed.
std::vector<ConcavePwl> chain_values(const std::vector<ConcavePwl>& rewards,
                                     const std::vector<double>& c_lo,
                                     const std::vector<double>& c_hi);
void chain_values_into(const std::vector<ConcavePwl>& rewards, const std::vector<double>& c_lo,
                       const std::vector<double>& c_hi, std::vector<ConcavePwl>& v);

struct ChainResult {
  bool feasible = false;
  std::vector<double> d;
  double value = 0.0;
  // First step whose box cannot be met when infeasible.
  std::size_t failing_step = 0;
};
ChainResult solve_chain(const std::vector<ConcavePwl>& rewards, const std::vector<double>& c_lo,
                        const std::vector<double>& c_hi);

}  // namespace pbsim
