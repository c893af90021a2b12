#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "pbsim/optimizer.hpp"
#include "pbsim/pwl.hpp"

namespace pbsim {
namespace {

constexpr std::int8_t kFree = -1;
constexpr std::int8_t kSurplusSide = 0;
constexpr std::int8_t kShortageSide = 1;
constexpr double kSignTol = 1e-9;

struct Prepared {
  std::size_t steps = 0;
  std::size_t scenarios = 0;
  std::vector<double> lo, hi;      // deviation range per step
  std::vector<double> c_lo, c_hi;  // cumulative box
  std::vector<std::vector<double>> a, b;  // surplus/shortage slopes, €/kWh, penalty included
  std::vector<double> pi;
};

Prepared prepare(const RtProblem& p) {
  Prepared q;
  q.steps = p.steps();
  q.scenarios = p.scenarios();
  q.pi = p.probabilities;
  q.lo.resize(q.steps);
  q.hi.resize(q.steps);
  for (std::size_t k = 0; k < q.steps; ++k) {
    q.lo[k] = std::min(0.0, p.dev_lo(k));
    q.hi[k] = std::max(0.0, p.dev_hi(k));
  }
  p.cumulative_box(q.c_lo, q.c_hi);
  q.a.assign(q.scenarios, std::vector<double>(q.steps));
  q.b.assign(q.scenarios, std::vector<double>(q.steps));
  for (std::size_t s = 0; s < q.scenarios; ++s) {
    for (std::size_t k = 0; k < q.steps; ++k) {
      q.a[s][k] = p.prices[s][k].surplus / kKwhPerMwh - p.penalty;
      q.b[s][k] = p.prices[s][k].shortage / kKwhPerMwh + p.penalty;
    }
  }
  return q;
}

bool has_both_sides(const Prepared& q, std::size_t k) {
  return q.lo[k] < -kSignTol && q.hi[k] > kSignTol;
}

// Step reward of one scenario, written into `out`. With a free side and a
// non-concave price pair the reward is relaxed to the chord between the two
// range ends.
void step_reward(const Prepared& q, std::size_t s, std::size_t k, std::int8_t side, bool& chord,
                 ConcavePwl& out) {
  chord = false;
  const double lo = q.lo[k], hi = q.hi[k], a = q.a[s][k], b = q.b[s][k];
  if (side == kSurplusSide || lo >= -kSignTol) {
    out.assign_point(0.0, 0.0);
    out.push_segment(hi, a);
  } else if (side == kShortageSide || hi <= kSignTol) {
    out.assign_point(lo, b * lo);
    out.push_segment(-lo, b);
  } else if (a <= b) {
    out.assign_point(lo, b * lo);
    out.push_segment(-lo, b);
    out.push_segment(hi, a);
  } else {
    chord = true;
    out.assign_point(lo, b * lo);
    out.push_segment(hi - lo, (a * hi - b * lo) / (hi - lo));
  }
}

struct Evaluation {
  bool feasible = false;
  double value = kNegInf;
  double x = 0.0;
  std::vector<std::vector<double>> dev;  // [scenario][step]
  std::size_t branch = 0;                // step to branch on; 0 when integral
  double branch_up = 0.0;                // weighted shortage share at the branch step
};

class Evaluator {
 public:
  explicit Evaluator(const Prepared& q) : q_(q) {
    rewards_.assign(q.scenarios, std::vector<ConcavePwl>(q.steps));
    chord_.assign(q.scenarios, std::vector<char>(q.steps, 0));
    values_.resize(q.scenarios);
  }

  Evaluation run(const std::vector<std::int8_t>& side) {
    Evaluation ev;
    const std::size_t n = q_.steps;
    for (std::size_t s = 0; s < q_.scenarios; ++s) {
      for (std::size_t k = 1; k < n; ++k) {
        bool chord = false;
        step_reward(q_, s, k, side[k], chord, rewards_[s][k]);
        chord_[s][k] = chord;
      }
      rewards_[s][0].assign_point(0.0, 0.0);
      chain_values_into(rewards_[s], q_.c_lo, q_.c_hi, values_[s]);
      if (values_[s][0].empty()) return ev;
    }

    ConcavePwl w = values_[0][0];
    w = w.plus_scaled(w, q_.pi[0] - 1.0);
    for (std::size_t s = 1; s < q_.scenarios; ++s) w = w.plus_scaled(values_[s][0], q_.pi[s]);
    if (w.empty()) return ev;

    // First step: exact over both sides, prices are the actual ones.
    double a0 = 0.0, b0 = 0.0;
    for (std::size_t s = 0; s < q_.scenarios; ++s) {
      a0 += q_.pi[s] * q_.a[s][0];
      b0 += q_.pi[s] * q_.b[s][0];
    }
    StepChoice best;
    bool any = false;
    for (const ConcavePwl& piece : {ConcavePwl::linear(0.0, q_.hi[0], 0.0, a0),
                                    ConcavePwl::linear(q_.lo[0], 0.0, b0 * q_.lo[0], b0)}) {
      StepChoice c;
      if (!best_step(piece, w, 0.0, c)) continue;
      const bool better = !any || c.value > best.value + 1e-10 ||
                          (c.value >= best.value - 1e-10 && std::abs(c.d) < std::abs(best.d));
      if (better) best = c;
      any = true;
    }
    if (!any) return ev;

    ev.feasible = true;
    ev.value = best.value;
    ev.x = best.d;
    ev.dev.assign(q_.scenarios, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < q_.scenarios; ++s) {
      double c = ev.x;
      ev.dev[s][0] = ev.x;
      for (std::size_t k = 1; k < n; ++k) {
        StepChoice choice;
        if (!best_step(rewards_[s][k], values_[s][k], c, choice)) {
          ev.feasible = false;
          return ev;
        }
        ev.dev[s][k] = choice.d;
        c += choice.d;
      }
    }

    // Most fractional shared side, earliest step on ties.
    double best_frac = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      if (side[k] != kFree || !has_both_sides(q_, k)) continue;
      double weight = 0.0, shortage = 0.0;
      bool mixed = false;
      int seen = -1;
      for (std::size_t s = 0; s < q_.scenarios; ++s) {
        const double d = ev.dev[s][k];
        double u;
        if (chord_[s][k]) {
          u = (q_.hi[k] - d) / (q_.hi[k] - q_.lo[k]);
        } else if (d < -kSignTol) {
          u = 1.0;
        } else if (d > kSignTol) {
          u = 0.0;
        } else {
          continue;
        }
        const int sign = u >= 1.0 - 1e-9 ? 1 : (u <= 1e-9 ? 0 : 2);
        if (sign == 2 || (seen >= 0 && sign != seen)) mixed = true;
        seen = sign;
        weight += q_.pi[s];
        shortage += q_.pi[s] * u;
      }
      if (!mixed) continue;
      const double ubar = shortage / weight;
      const double frac = std::max(std::min(ubar, 1.0 - ubar), 1e-12);
      if (frac > best_frac) {
        best_frac = frac;
        ev.branch = k;
        ev.branch_up = ubar;
      }
    }
    return ev;
  }

 private:
  const Prepared& q_;
  std::vector<std::vector<ConcavePwl>> rewards_;
  std::vector<std::vector<char>> chord_;
  std::vector<std::vector<ConcavePwl>> values_;
};

struct OpenNode {
  double bound;
  std::size_t id;
  std::vector<std::int8_t> side;
};

struct OpenOrder {
  bool operator()(const OpenNode& x, const OpenNode& y) const {
    if (x.bound != y.bound) return x.bound < y.bound;
    return x.id > y.id;
  }
};

}  // namespace

RtSolution solve_rt_structured(const RtProblem& problem, const RtSolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (problem.steps() == 0 || problem.scenarios() == 0) {
    throw SolverError("empty real-time problem");
  }
  const Prepared q = prepare(problem);
  Evaluator evaluator(q);
  const std::size_t n = q.steps;

  RtSolution sol;
  // Staying on schedule is always feasible and worth zero.
  sol.dev.assign(q.scenarios, std::vector<double>(n, 0.0));
  sol.objective = 0.0;
  double incumbent = 0.0;

  auto accept = [&](const Evaluation& ev) {
    if (ev.feasible && ev.branch == 0 && ev.value > incumbent) {
      incumbent = ev.value;
      sol.dev = ev.dev;
      sol.dev0 = ev.x;
    }
  };
  auto tol = [&] { return options.gap_tol * std::max(1.0, std::abs(incumbent)); };

  std::vector<std::int8_t> root_side(n, kFree);
  const Evaluation root = evaluator.run(root_side);
  sol.nodes = 1;
  if (!root.feasible) throw SolverError("real-time relaxation infeasible");
  accept(root);

  // Rounding dive: fix every mixed step to its majority side until the
  // relaxation agrees across scenarios.
  if (root.branch != 0) {
    std::vector<std::int8_t> side = root_side;
    Evaluation ev = root;
    for (std::size_t iter = 0; iter < n && ev.feasible && ev.branch != 0; ++iter) {
      side[ev.branch] = ev.branch_up >= 0.5 ? kShortageSide : kSurplusSide;
      ev = evaluator.run(side);
      ++sol.nodes;
    }
    accept(ev);
  }

  std::priority_queue<OpenNode, std::vector<OpenNode>, OpenOrder> open;
  std::size_t next_id = 0;
  auto branch = [&](const Evaluation& ev, const std::vector<std::int8_t>& side) {
    for (const std::int8_t s : {kSurplusSide, kShortageSide}) {
      OpenNode child{ev.value, next_id++, side};
      child.side[ev.branch] = s;
      open.push(std::move(child));
    }
  };
  if (root.branch != 0 && root.value > incumbent + tol()) branch(root, root_side);

  bool limit_hit = false;
  while (!open.empty()) {
    if (open.top().bound <= incumbent + tol()) break;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (sol.nodes >= options.node_limit || elapsed > options.time_limit_s) {
      limit_hit = true;
      break;
    }
    OpenNode node = open.top();
    open.pop();
    const Evaluation ev = evaluator.run(node.side);
    ++sol.nodes;
    if (!ev.feasible || ev.value <= incumbent + tol()) continue;
    if (ev.branch == 0) {
      accept(ev);
      continue;
    }
    branch(ev, node.side);
  }

  sol.bound = incumbent;
  if (!open.empty()) sol.bound = std::max(incumbent, open.top().bound);
  if (root.branch == 0) sol.bound = root.value;
  sol.optimal = !limit_hit || sol.bound <= incumbent + tol();

  sol.side.assign(n, kSurplusSide);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t s = 0; s < q.scenarios; ++s) {
      if (sol.dev[s][k] < -kSignTol) sol.side[k] = kShortageSide;
    }
  }
  sol.objective = incumbent;
  for (std::size_t s = 0; s < q.scenarios; ++s) {
    for (std::size_t k = 0; k < n; ++k) {
      const double d = sol.dev[s][k];
      sol.expected_cash += q.pi[s] * problem.prices[s][k].at(d) * d / kKwhPerMwh;
    }
  }
  return sol;
}

}  // namespace pbsim
