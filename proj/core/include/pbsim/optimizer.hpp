#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pbsim/fleet.hpp"
#include "pbsim/market_data.hpp"
#include "pbsim/milp.hpp"
#include "pbsim/scenarios.hpp"
#include "pbsim/settlement.hpp"
#include "pbsim/types.hpp"

namespace pbsim {

// Day-ahead purchases per ISP (kWh, consumption-positive).
struct EProgram {
  std::vector<double> e_da;
  double objective_value = 0.0;  // expected margin over the DA scenarios, €
};

// Maximizes sum_s pi_s sum_t e_da[t] (retail - lambda_s[t]) / 1000 over the
// virtual battery's envelope. Among optimal programs, purchases are deferred
// as late as possible. Throws SolverError naming the first ISP whose envelope
// cannot be reached.
EProgram solve_da_stage(const VirtualBattery& vb, const PriceScenarioSet& da_set, double retail);

// Stored energy at the end of every ISP when the battery buys `energy`.
std::vector<double> vb_trajectory(const VirtualBattery& vb, const std::vector<double>& energy);

// Deviation tie-break penalty, €/kWh.
inline constexpr double kDeviationPenalty = 1e-6;

// Real-time problem for ISPs [t0, t0 + steps). Step 0 uses actual prices and
// is shared by all scenarios; later steps are scenario-indexed. The surplus
// or shortage side of step k is a single choice shared by all scenarios.
struct RtProblem {
  std::size_t t0 = 0;
  std::vector<double> e_da;
  std::vector<double> e_max;         // p_charge_max * dt
  std::vector<double> net_arrivals;  // e_arr - e_dep
  std::vector<double> e_lower;
  std::vector<double> e_upper;
  double e_start = 0.0;  // stored energy at the end of ISP t0 - 1
  double eta = 1.0;
  std::vector<double> probabilities;
  std::vector<std::vector<BranchPrices>> prices;  // [scenario][step], €/MWh
  std::vector<Mechanism> mechanisms;              // per step, as seen at t0
  double penalty = kDeviationPenalty;
  double da_margin = 0.0;  // sum e_da (retail - lambda_da) / 1000 over the steps

  std::size_t steps() const noexcept { return e_da.size(); }
  std::size_t scenarios() const noexcept { return probabilities.size(); }
  double dev_lo(std::size_t k) const { return e_da[k] - e_max[k]; }
  double dev_hi(std::size_t k) const { return e_da[k]; }
  // Box on the cumulative deviation C_k = dev_0 + ... + dev_k.
  void cumulative_box(std::vector<double>& lo, std::vector<double>& hi) const;
};

// Mechanism per ISP as announced to the BRP: exact for ISPs up to
// t0 + lookahead, `assumed` beyond.
struct MechanismSchedule {
  std::vector<Mechanism> announced;
  Mechanism assumed = Mechanism::kSingle;
  std::size_t lookahead = 1;

  static MechanismSchedule uniform(std::size_t horizon, Mechanism m) {
    return {std::vector<Mechanism>(horizon, m), m, 1};
  }
  Mechanism seen_at(std::size_t t0, std::size_t isp) const {
    return isp <= t0 + lookahead ? announced.at(isp) : assumed;
  }
};

RtProblem build_rt_problem(const VirtualBattery& vb, const EProgram& eprog, std::size_t t0,
                           std::size_t end, double e_start, const MechanismSchedule& schedule,
                           const MarketSeries& market, const PriceScenarioSet& fan, double retail,
                           const SettlementOptions& options = {});

// Extensive-form MILP of an RtProblem: surplus/shortage split per scenario
// and step with big-M = p_charge_max * dt, energy balance rows and one
// binary per step.
MilpModel build_rt_model(const RtProblem& problem);

// Convenience overload that assembles the problem first.
MilpModel build_rt_model(const VirtualBattery& vb, const EProgram& eprog, std::size_t t0,
                         std::size_t end, double e_start, const MechanismSchedule& schedule,
                         const MarketSeries& market, const PriceScenarioSet& fan, double retail,
                         const SettlementOptions& options = {});

struct RtSolveOptions {
  double gap_tol = 1e-6;
  std::size_t node_limit = 200;
  double time_limit_s = 2.0;
};

struct RtSolution {
  double dev0 = 0.0;                     // committed deviation at t0
  std::vector<std::vector<double>> dev;  // [scenario][step]
  std::vector<std::int8_t> side;         // per step: 0 surplus, 1 shortage
  double objective = 0.0;                // includes the tie-break penalty
  double expected_cash = 0.0;            // without the penalty
  double bound = 0.0;
  std::size_t nodes = 0;
  bool optimal = false;
};

// Branch and bound over the shared sides with an exact chain recursion per
// scenario at every node.
RtSolution solve_rt_structured(const RtProblem& problem, const RtSolveOptions& options = {});

// Objective (with penalty) of a scenario deviation profile; -inf if the
// profile leaves the feasible set.
double rt_objective(const RtProblem& problem, const std::vector<std::vector<double>>& dev,
                    bool with_penalty = true);

struct RtStep {
  double e_rt = 0.0;
  double dev = 0.0;
  double surplus = 0.0;   // max(dev, 0)
  double shortage = 0.0;  // min(dev, 0)
  Mechanism mechanism = Mechanism::kSingle;
  double objective = 0.0;
  bool solved = false;  // false when the envelope forced the decision
  bool optimal = true;
  std::size_t nodes = 0;
};

struct RtTrace {
  std::vector<RtStep> steps;     // one per ISP of the horizon
  std::vector<double> energy;    // realized stored energy at the end of each ISP
  std::size_t solves = 0;
  std::size_t suboptimal = 0;
};

struct RtOptions {
  FanParams fan;
  std::uint64_t seed = 0;
  double retail = 0.0;
  SettlementOptions settlement;
  RtSolveOptions solver;
};

struct WindowStats {
  std::size_t solves = 0;
  std::size_t suboptimal = 0;
};

// Rolls over ISPs [w.begin, w.end), committing the first-step decision of
// each solve. Writes only the window's entries of `trace`, which must span
// the horizon, so distinct windows may run concurrently.
WindowStats rolling_horizon_window(const VirtualBattery& vb, const EProgram& eprog, const Window& w,
                            const MechanismSchedule& schedule, const MarketSeries& market,
                            const RtOptions& options, RtTrace& trace);

// All windows that start within `day`.
RtTrace rolling_horizon_day(const VirtualBattery& vb, const EProgram& eprog,
                            const MechanismSchedule& schedule, const MarketSeries& market,
                            const RtOptions& options, std::size_t day);

// Every window of the horizon.
RtTrace rolling_horizon(const VirtualBattery& vb, const EProgram& eprog,
                        const MechanismSchedule& schedule, const MarketSeries& market,
                        const RtOptions& options);

RtTrace make_trace(const VirtualBattery& vb, const EProgram& eprog);

}  // namespace pbsim
