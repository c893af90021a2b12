#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pbsim/optimizer.hpp"
#include "pbsim/pwl.hpp"

using namespace pbsim;
using testutil::session;

namespace {

constexpr double kTol = 1e-9;

PriceScenarioSet flat_da(std::size_t n, double price) {
  return da_scenarios(std::vector<double>(n, price), 10, 0.0, 1);
}

// Two days, day-0 evening spike at ISPs 80 and 81.
MarketSeries spike_market() {
  const std::size_t n = 2 * kIspsPerDay;
  std::vector<double> da(n, 60.0), up(n, 90.0), down(n, 30.0);
  std::vector<RegulationState> st(n, RegulationState::kBalanced);
  for (const std::size_t t : {80, 81}) {
    st[t] = RegulationState::kLong;
    down[t] = -400.0;
    up[t] = 100.0;
  }
  return MarketSeries(da, up, down, st);
}

struct Night {
  VirtualBattery vb;
  EProgram eprog;
};

Night night(std::uint64_t seed, const MarketSeries& market, double retail = 150.0) {
  Night n;
  n.vb = build_virtual_battery(generate_sessions(100, {}, seed), market.size());
  n.eprog = solve_da_stage(n.vb, da_scenarios(market.lambda_da(), 10, 0.2, seed), retail);
  return n;
}

RtOptions rt_options(double sigma = 0.5) {
  RtOptions o;
  o.fan.sigma_rel = sigma;
  o.seed = 9;
  o.retail = 150.0;
  return o;
}

void check_envelope(const VirtualBattery& vb, const std::vector<double>& energy,
                    const std::vector<double>& purchases) {
  for (std::size_t t = 0; t < vb.horizon(); ++t) {
    CHECK(energy[t] >= vb.e_lower[t] - kTol);
    CHECK(energy[t] <= vb.e_upper[t] + kTol);
    CHECK(purchases[t] >= -kTol);
    CHECK(purchases[t] <= vb.e_max(t) + kTol);
  }
}

}  // namespace

TEST_CASE("empty fleet buys nothing") {
  const VirtualBattery vb = build_virtual_battery({}, 96);
  const EProgram p = solve_da_stage(vb, flat_da(96, 40.0), 150.0);
  CHECK(std::all_of(p.e_da.begin(), p.e_da.end(), [](double v) { return v == 0.0; }));
  CHECK(p.objective_value == 0.0);
}

TEST_CASE("single EV needing 7.4 kWh at a flat price") {
  const VirtualBattery vb = build_virtual_battery({session(0, 72, 128, 30.0, 37.4)}, 192);
  const EProgram p = solve_da_stage(vb, flat_da(192, 40.0), 150.0);
  const double total = std::accumulate(p.e_da.begin(), p.e_da.end(), 0.0);
  CHECK(total == doctest::Approx(7.4).epsilon(1e-12));
  CHECK(p.objective_value == doctest::Approx(7.4 * (150.0 - 40.0) / 1000.0));
  check_envelope(vb, vb_trajectory(vb, p.e_da), p.e_da);
  // Ties are broken toward the latest purchases.
  CHECK(p.e_da[127] == doctest::Approx(0.925));
  CHECK(p.e_da[72] == 0.0);
}

TEST_CASE("two-ISP toy buys at the cheap ISP") {
  const VirtualBattery vb = build_virtual_battery({session(0, 0, 2, 10.0, 10.925)}, 2);
  PriceScenarioSet set = da_scenarios({10.0, 200.0}, 1, 0.0, 1);
  const EProgram p = solve_da_stage(vb, set, 100.0);
  CHECK(p.e_da[0] == doctest::Approx(0.925));
  CHECK(p.e_da[1] == doctest::Approx(0.0));
  CHECK(p.objective_value == doctest::Approx(0.925 * 90.0 / 1000.0));
}

TEST_CASE("day-ahead stage reports the unreachable ISP") {
  VirtualBattery vb = build_virtual_battery({session(0, 10, 14, 0.0, 3.0)}, 20);
  vb.e_lower[11] = 40.0;
  vb.e_upper[11] = 40.0;
  try {
    (void)solve_da_stage(vb, flat_da(20, 10.0), 100.0);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("isp 11") != std::string::npos);
  }
  CHECK_THROWS_AS(solve_da_stage(vb, flat_da(21, 10.0), 100.0), ValidationError);
}

TEST_CASE("negative down price rewards a one-step shortage up to the power bound") {
  RtProblem p;
  p.e_da = {2.0};
  p.e_max = {5.0};
  p.net_arrivals = {0.0};
  p.e_start = 10.0;
  p.e_lower = {0.0};
  p.e_upper = {50.0};
  p.probabilities = {1.0};
  p.prices = {{branch_prices(Mechanism::kSingle, RegulationState::kLong, 100.0, -400.0, 60.0)}};
  p.mechanisms = {Mechanism::kSingle};
  const RtSolution s = solve_rt_structured(p);
  CHECK(s.dev0 == doctest::Approx(-3.0));
  CHECK(s.expected_cash == doctest::Approx(1.2));
  CHECK(s.optimal);
  const MilpResult m = solve_milp(build_rt_model(p));
  CHECK(m.objective == doctest::Approx(s.objective));
}

TEST_CASE("structured solver agrees with MILP and enumeration on small instances") {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 120; ++rep) {
    const RtProblem p = testutil::random_rt_problem(rng, 1 + rep % 3, 1 + (rep / 3) % 2);
    const MilpModel model = build_rt_model(p);
    const double oracle = testutil::enumerate_binaries(model);
    const RtSolution s = solve_rt_structured(p);
    const MilpResult m = solve_milp(model);
    const double scale = std::max(1.0, std::abs(oracle));
    REQUIRE(m.status == MilpStatus::kOptimal);
    CHECK(std::abs(m.objective - oracle) <= 1e-6 * scale);
    CHECK(std::abs(s.objective - oracle) <= 1e-6 * scale);
    CHECK(rt_objective(p, s.dev) == doctest::Approx(s.objective).epsilon(1e-9));
    const std::vector<std::vector<double>> zero(p.scenarios(), std::vector<double>(p.steps(), 0.0));
    CHECK(s.objective >= rt_objective(p, zero) - 1e-6);
  }
}

TEST_CASE("MILP solutions never hold surplus and shortage together") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 40; ++rep) {
    const RtProblem p = testutil::random_rt_problem(rng, 3, 2);
    const MilpModel model = build_rt_model(p);
    const MilpResult r = solve_milp(model);
    REQUIRE(r.status == MilpStatus::kOptimal);
    for (std::size_t k = 0; k < p.steps(); ++k) {
      for (int s = 0; s < 2; ++s) {
        double up = 0.0, dn = 0.0;
        for (std::size_t j = 0; j < model.variables().size(); ++j) {
          const VarTag& tag = model.variables()[j].tag;
          if (tag.isp != k || (tag.scenario != s && tag.scenario != -1)) continue;
          if (tag.kind == VarKind::kSurplus) up = r.x[j];
          if (tag.kind == VarKind::kShortage) dn = r.x[j];
        }
        CHECK(std::abs(up * dn) <= 1e-9);
      }
    }
  }
}

TEST_CASE("scaling prices, retail and penalty keeps the optimal deviations") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 30; ++rep) {
    const RtProblem p = testutil::random_rt_problem(rng, 4, 3);
    RtProblem q = p;
    q.penalty *= 3.0;
    for (auto& row : q.prices) {
      for (auto& b : row) {
        b.surplus *= 3.0;
        b.shortage *= 3.0;
      }
    }
    const RtSolution a = solve_rt_structured(p), b = solve_rt_structured(q);
    CHECK(b.objective == doctest::Approx(3.0 * a.objective).epsilon(1e-9));
    CHECK(b.dev0 == doctest::Approx(a.dev0).epsilon(1e-9));
  }
}

TEST_CASE("dual model settles no deviation at the DA price") {
  const MarketSeries m = spike_market();
  const Night n = night(4, m);
  const std::size_t t0 = 78;
  const PriceScenarioSet fan = rt_fan(m.lambda_up(), m.lambda_down(), t0, 1, {5, 5, 0.0}, 130);
  const MilpModel model =
      build_rt_model(n.vb, n.eprog, t0, 130, 0.0, MechanismSchedule::uniform(m.size(), Mechanism::kDualPrice),
                     m, fan, 150.0);
  for (const auto& v : model.variables()) {
    if (v.tag.kind != VarKind::kSurplus && v.tag.kind != VarKind::kShortage) continue;
    const double pi = v.tag.scenario < 0 ? 1.0 : 1.0 / 25.0;
    const double price = (v.obj / pi + (v.tag.kind == VarKind::kSurplus ? kDeviationPenalty
                                                                          : -kDeviationPenalty)) *
                         1000.0;
    CHECK(price != doctest::Approx(60.0));
    CHECK(price == doctest::Approx(v.tag.kind == VarKind::kSurplus ? m.lambda_down(v.tag.isp)
                                                                    : m.lambda_up(v.tag.isp)));
  }
}

TEST_CASE("prices equal to DA with zero noise keep the schedule") {
  const std::size_t n = 2 * kIspsPerDay;
  const MarketSeries m(std::vector<double>(n, 60.0), std::vector<double>(n, 60.0),
                       std::vector<double>(n, 60.0),
                       std::vector<RegulationState>(n, RegulationState::kBalanced));
  const Night ng = night(6, m);
  const RtTrace tr = rolling_horizon_day(ng.vb, ng.eprog, MechanismSchedule::uniform(n, Mechanism::kSingle),
                                         m, rt_options(0.0), 0);
  CHECK(tr.solves > 0);
  for (std::size_t t = 0; t < n; ++t) {
    CHECK(std::abs(tr.steps[t].dev) <= 1e-9);
    CHECK(tr.steps[t].e_rt == doctest::Approx(ng.eprog.e_da[t]));
  }
}

TEST_CASE("single price commits the spike shortage, dual price shrinks it") {
  const MarketSeries m = spike_market();
  const Night ng = night(8, m);
  const RtTrace single = rolling_horizon_day(
      ng.vb, ng.eprog, MechanismSchedule::uniform(m.size(), Mechanism::kSingle), m, rt_options(), 0);
  const RtTrace dual = rolling_horizon_day(
      ng.vb, ng.eprog, MechanismSchedule::uniform(m.size(), Mechanism::kDualPrice), m, rt_options(),
      0);
  for (const std::size_t t : {80, 81}) {
    const RtStep& s = single.steps[t];
    CHECK(s.dev < 0.0);
    const bool at_power = s.e_rt >= ng.vb.e_max(t) - 1e-6;
    const bool at_envelope = single.energy[t] >= ng.vb.e_upper[t] - 1e-6;
    CHECK((at_power || at_envelope));
    CHECK(std::abs(dual.steps[t].dev) < std::abs(s.dev));
  }
  std::vector<double> purchases(m.size());
  for (std::size_t t = 0; t < m.size(); ++t) purchases[t] = single.steps[t].e_rt;
  check_envelope(ng.vb, single.energy, purchases);
}

TEST_CASE("rolling horizon keeps random fleets inside the envelope") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> price(-300.0, 300.0);
  std::uniform_int_distribution<int> state(-1, 2);
  const std::size_t n = 2 * kIspsPerDay;
  for (int rep = 0; rep < 4; ++rep) {
    std::vector<double> da(n), up(n), down(n);
    std::vector<RegulationState> st(n);
    for (std::size_t h = 0; h < n / 4; ++h) {
      const double p = price(rng);
      for (std::size_t k = 0; k < 4; ++k) da[4 * h + k] = p;
    }
    for (std::size_t t = 0; t < n; ++t) {
      up[t] = price(rng);
      down[t] = price(rng);
      st[t] = regulation_state_from_int(state(rng));
    }
    const MarketSeries m(da, up, down, st);
    const Night ng = night(100 + rep, m);
    check_envelope(ng.vb, vb_trajectory(ng.vb, ng.eprog.e_da), ng.eprog.e_da);
    const RtTrace tr = rolling_horizon(ng.vb, ng.eprog,
                                       MechanismSchedule::uniform(n, Mechanism::kTwoPrice), m,
                                       rt_options());
    std::vector<double> purchases(n);
    for (std::size_t t = 0; t < n; ++t) purchases[t] = tr.steps[t].e_rt;
    check_envelope(ng.vb, tr.energy, purchases);
  }
}
