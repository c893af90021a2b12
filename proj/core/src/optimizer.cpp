#include "pbsim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pbsim/pwl.hpp"

namespace pbsim {
namespace {

constexpr double kForcedWidth = 1e-9;

double window_start_energy(const VirtualBattery& vb, const std::vector<double>& energy,
                           std::size_t begin) {
  return begin == 0 ? vb.e_init : energy[begin - 1];
}

}  // namespace

std::vector<double> vb_trajectory(const VirtualBattery& vb, const std::vector<double>& energy) {
  std::vector<double> e(vb.horizon());
  double prev = vb.e_init;
  for (std::size_t t = 0; t < e.size(); ++t) {
    prev = prev + vb.e_arr[t] - vb.e_dep[t] + vb.eta * energy[t];
    e[t] = prev;
  }
  return e;
}

EProgram solve_da_stage(const VirtualBattery& vb, const PriceScenarioSet& da_set, double retail) {
  const std::size_t n = vb.horizon();
  if (da_set.size() == 0) throw ValidationError("day-ahead scenario set is empty");
  if (da_set.columns() != n) {
    throw ValidationError("day-ahead scenarios cover " + std::to_string(da_set.columns()) +
                          " isps, virtual battery " + std::to_string(n));
  }
  std::vector<double> mean(n, 0.0);
  for (std::size_t s = 0; s < da_set.size(); ++s) {
    for (std::size_t t = 0; t < n; ++t) mean[t] += da_set.probabilities[s] * da_set.prices[s][t];
  }

  EProgram prog;
  prog.e_da.assign(n, 0.0);
  for (const Window& w : active_windows(vb)) {
    const std::size_t len = w.size();
    std::vector<ConcavePwl> rewards(len);
    std::vector<double> lo(len), hi(len);
    double base = w.begin == 0 ? vb.e_init : 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t t = w.begin + k;
      rewards[k] = ConcavePwl::linear(0.0, vb.e_max(t), 0.0, (retail - mean[t]) / kKwhPerMwh);
      base += vb.e_arr[t] - vb.e_dep[t];
      lo[k] = (vb.e_lower[t] - base) / vb.eta;
      hi[k] = (vb.e_upper[t] - base) / vb.eta;
    }
    const ChainResult res = solve_chain(rewards, lo, hi);
    if (!res.feasible) {
      throw SolverError("day-ahead stage infeasible: envelope unreachable at isp " +
                        std::to_string(w.begin + res.failing_step));
    }
    for (std::size_t k = 0; k < len; ++k) prog.e_da[w.begin + k] = std::max(0.0, res.d[k]);
  }
  for (std::size_t t = 0; t < n; ++t) {
    prog.objective_value += prog.e_da[t] * (retail - mean[t]) / kKwhPerMwh;
  }
  return prog;
}

void RtProblem::cumulative_box(std::vector<double>& lo, std::vector<double>& hi) const {
  const std::size_t n = steps();
  lo.resize(n);
  hi.resize(n);
  double planned = e_start;
  for (std::size_t k = 0; k < n; ++k) {
    planned += net_arrivals[k] + eta * e_da[k];
    lo[k] = (planned - e_upper[k]) / eta;
    hi[k] = (planned - e_lower[k]) / eta;
  }
}

RtProblem build_rt_problem(const VirtualBattery& vb, const EProgram& eprog, std::size_t t0,
                           std::size_t end, double e_start, const MechanismSchedule& schedule,
                           const MarketSeries& market, const PriceScenarioSet& fan, double retail,
                           const SettlementOptions& options) {
  if (t0 >= end || end > vb.horizon()) {
    throw ValidationError("real-time start isp " + std::to_string(t0) + " outside horizon");
  }
  if (fan.down_prices.size() != fan.size() || fan.t0 != t0 || fan.columns() < end - t0) {
    throw ValidationError("price fan does not match the real-time horizon at isp " +
                          std::to_string(t0));
  }
  RtProblem p;
  p.t0 = t0;
  p.e_start = e_start;
  p.eta = vb.eta;
  p.probabilities = fan.probabilities;
  const std::size_t n = end - t0;
  p.e_da.resize(n);
  p.e_max.resize(n);
  p.net_arrivals.resize(n);
  p.e_lower.resize(n);
  p.e_upper.resize(n);
  p.mechanisms.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = t0 + k;
    p.e_da[k] = eprog.e_da[t];
    p.e_max[k] = vb.e_max(t);
    p.net_arrivals[k] = vb.e_arr[t] - vb.e_dep[t];
    p.e_lower[k] = vb.e_lower[t];
    p.e_upper[k] = vb.e_upper[t];
    p.mechanisms[k] = schedule.seen_at(t0, t);
    p.da_margin += p.e_da[k] * (retail - market.lambda_da(t)) / kKwhPerMwh;
  }
  p.prices.assign(fan.size(), std::vector<BranchPrices>(n));
  for (std::size_t s = 0; s < fan.size(); ++s) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t t = t0 + k;
      p.prices[s][k] = branch_prices(p.mechanisms[k], market.reg_state(t), fan.prices[s][k],
                                     fan.down_prices[s][k], market.lambda_da(t), options);
    }
  }
  return p;
}

MilpModel build_rt_model(const RtProblem& p) {
  MilpModel m;
  const std::size_t n = p.steps();
  const std::size_t ns = p.scenarios();
  std::vector<int> u(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = p.t0 + k;
    u[k] = m.add_variable("u_t" + std::to_string(t), 0.0, 1.0, 0.0, true,
                          {VarKind::kBinary, t, -1});
  }
  int shared_up = -1, shared_dn = -1;
  for (std::size_t s = 0; s < ns; ++s) {
    int prev_e = -1;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t t = p.t0 + k;
      const std::string tag = "_s" + std::to_string(s) + "_t" + std::to_string(t);
      int up, dn;
      if (k == 0 && s > 0) {
        up = shared_up;
        dn = shared_dn;
      } else {
        double w_up = 0.0, w_dn = 0.0;
        if (k == 0) {
          for (std::size_t q = 0; q < ns; ++q) {
            w_up += p.probabilities[q] * (p.prices[q][0].surplus / kKwhPerMwh - p.penalty);
            w_dn += p.probabilities[q] * (p.prices[q][0].shortage / kKwhPerMwh + p.penalty);
          }
        } else {
          w_up = p.probabilities[s] * (p.prices[s][k].surplus / kKwhPerMwh - p.penalty);
          w_dn = p.probabilities[s] * (p.prices[s][k].shortage / kKwhPerMwh + p.penalty);
        }
        const std::string vt = k == 0 ? "_t" + std::to_string(t) : tag;
        const int scen = k == 0 ? -1 : static_cast<int>(s);
        up = m.add_variable("up" + vt, 0.0, std::max(0.0, p.dev_hi(k)), w_up, false,
                            {VarKind::kSurplus, t, scen});
        dn = m.add_variable("dn" + vt, std::min(0.0, p.dev_lo(k)), 0.0, w_dn, false,
                            {VarKind::kShortage, t, scen});
        const double big_m = p.e_max[k];
        m.add_row("rt" + vt, {{up, 1.0}, {dn, 1.0}}, p.e_da[k] - p.e_max[k], p.e_da[k]);
        m.add_row("xu" + vt, {{up, 1.0}, {u[k], big_m}}, -kInf, big_m);
        m.add_row("xd" + vt, {{dn, 1.0}, {u[k], big_m}}, 0.0, kInf);
        if (k == 0) {
          shared_up = up;
          shared_dn = dn;
        }
      }
      const int e = m.add_variable("E" + tag, p.e_lower[k], p.e_upper[k], 0.0, false,
                                   {VarKind::kEnergy, t, static_cast<int>(s)});
      const double rhs = p.net_arrivals[k] + p.eta * p.e_da[k] + (k == 0 ? p.e_start : 0.0);
      std::vector<std::pair<int, double>> terms = {{e, 1.0}, {up, p.eta}, {dn, p.eta}};
      if (prev_e >= 0) terms.emplace_back(prev_e, -1.0);
      m.add_row("bal" + tag, std::move(terms), rhs, rhs);
      prev_e = e;
    }
  }
  return m;
}

MilpModel build_rt_model(const VirtualBattery& vb, const EProgram& eprog, std::size_t t0,
                         std::size_t end, double e_start, const MechanismSchedule& schedule,
                         const MarketSeries& market, const PriceScenarioSet& fan, double retail,
                         const SettlementOptions& options) {
  return build_rt_model(
      build_rt_problem(vb, eprog, t0, end, e_start, schedule, market, fan, retail, options));
}

double rt_objective(const RtProblem& p, const std::vector<std::vector<double>>& dev,
                    bool with_penalty) {
  constexpr double tol = 1e-9;
  const std::size_t n = p.steps();
  if (dev.size() != p.scenarios()) return kNegInf;
  std::vector<double> lo, hi;
  p.cumulative_box(lo, hi);
  for (std::size_t k = 0; k < n; ++k) {
    bool pos = false, neg = false;
    for (const auto& row : dev) {
      if (row[k] > tol) pos = true;
      if (row[k] < -tol) neg = true;
      if (k == 0 && row[0] != dev[0][0]) return kNegInf;
    }
    if (pos && neg) return kNegInf;
  }
  double z = 0.0;
  for (std::size_t s = 0; s < dev.size(); ++s) {
    if (dev[s].size() != n) return kNegInf;
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = dev[s][k];
      if (d < p.dev_lo(k) - tol || d > p.dev_hi(k) + tol) return kNegInf;
      c += d;
      if (c < lo[k] - tol || c > hi[k] + tol) return kNegInf;
      z += p.probabilities[s] *
           (p.prices[s][k].at(d) * d / kKwhPerMwh - (with_penalty ? p.penalty * std::abs(d) : 0.0));
    }
  }
  return z;
}

RtTrace make_trace(const VirtualBattery& vb, const EProgram& eprog) {
  RtTrace trace;
  trace.steps.resize(vb.horizon());
  for (std::size_t t = 0; t < vb.horizon(); ++t) trace.steps[t].e_rt = eprog.e_da[t];
  trace.energy = vb_trajectory(vb, eprog.e_da);
  return trace;
}

WindowStats rolling_horizon_window(const VirtualBattery& vb, const EProgram& eprog,
                                   const Window& w, const MechanismSchedule& schedule,
                                   const MarketSeries& market, const RtOptions& options,
                                   RtTrace& trace) {
  WindowStats stats;
  double e_prev = window_start_energy(vb, trace.energy, w.begin);
  std::vector<double> feas_lo, feas_hi;
  for (std::size_t t0 = w.begin; t0 < w.end; ++t0) {
    const std::size_t n = w.end - t0;
    RtStep& step = trace.steps[t0];
    step.mechanism = schedule.announced.at(t0);

    // Feasible range of the first deviation: the cumulative box intersected
    // with what the later steps can still absorb.
    RtProblem shell;
    shell.t0 = t0;
    shell.e_start = e_prev;
    shell.eta = vb.eta;
    shell.e_da.assign(eprog.e_da.begin() + static_cast<long>(t0),
                      eprog.e_da.begin() + static_cast<long>(w.end));
    shell.e_max.resize(n);
    shell.net_arrivals.resize(n);
    shell.e_lower.assign(vb.e_lower.begin() + static_cast<long>(t0),
                         vb.e_lower.begin() + static_cast<long>(w.end));
    shell.e_upper.assign(vb.e_upper.begin() + static_cast<long>(t0),
                         vb.e_upper.begin() + static_cast<long>(w.end));
    for (std::size_t k = 0; k < n; ++k) {
      shell.e_max[k] = vb.e_max(t0 + k);
      shell.net_arrivals[k] = vb.e_arr[t0 + k] - vb.e_dep[t0 + k];
    }
    shell.cumulative_box(feas_lo, feas_hi);
    for (std::size_t k = n - 1; k > 0; --k) {
      feas_lo[k - 1] = std::max(feas_lo[k - 1], feas_lo[k] - shell.dev_hi(k));
      feas_hi[k - 1] = std::min(feas_hi[k - 1], feas_hi[k] - shell.dev_lo(k));
    }
    const double x_lo = std::max(feas_lo[0], shell.dev_lo(0));
    const double x_hi = std::min(feas_hi[0], shell.dev_hi(0));
    if (x_lo > x_hi + 1e-7) {
      throw SolverError("real-time stage infeasible at isp " + std::to_string(t0));
    }

    double dev;
    if (x_hi - x_lo <= kForcedWidth) {
      dev = x_lo <= 0.0 && 0.0 <= x_hi ? 0.0 : 0.5 * (x_lo + x_hi);
      step.solved = false;
    } else {
      const PriceScenarioSet fan =
          rt_fan(market.lambda_up(), market.lambda_down(), t0, options.seed, options.fan, w.end);
      const RtProblem p = build_rt_problem(vb, eprog, t0, w.end, e_prev, schedule, market, fan,
                                           options.retail, options.settlement);
      RtSolution sol;
      try {
        sol = solve_rt_structured(p, options.solver);
      } catch (const SolverError& e) {
        throw SolverError("real-time solve failed at isp " + std::to_string(t0) + ": " +
                          e.what());
      }
      dev = std::clamp(sol.dev0, x_lo, x_hi);
      step.solved = true;
      step.optimal = sol.optimal;
      step.nodes = sol.nodes;
      step.objective = sol.objective;
      ++stats.solves;
      if (!sol.optimal) ++stats.suboptimal;
    }
    step.dev = dev;
    step.e_rt = eprog.e_da[t0] - dev;
    step.surplus = std::max(dev, 0.0);
    step.shortage = std::min(dev, 0.0);
    e_prev = e_prev + vb.e_arr[t0] - vb.e_dep[t0] + vb.eta * step.e_rt;
    trace.energy[t0] = e_prev;
  }
  return stats;
}

RtTrace rolling_horizon_day(const VirtualBattery& vb, const EProgram& eprog,
                            const MechanismSchedule& schedule, const MarketSeries& market,
                            const RtOptions& options, std::size_t day) {
  RtTrace trace = make_trace(vb, eprog);
  for (const Window& w : active_windows(vb)) {
    if (w.begin / kIspsPerDay == day) {
      const WindowStats st = rolling_horizon_window(vb, eprog, w, schedule, market, options, trace);
      trace.solves += st.solves;
      trace.suboptimal += st.suboptimal;
    }
  }
  return trace;
}

RtTrace rolling_horizon(const VirtualBattery& vb, const EProgram& eprog,
                        const MechanismSchedule& schedule, const MarketSeries& market,
                        const RtOptions& options) {
  RtTrace trace = make_trace(vb, eprog);
  for (const Window& w : active_windows(vb)) {
    const WindowStats st = rolling_horizon_window(vb, eprog, w, schedule, market, options, trace);
    trace.solves += st.solves;
    trace.suboptimal += st.suboptimal;
  }
  return trace;
}

}  // namespace pbsim
