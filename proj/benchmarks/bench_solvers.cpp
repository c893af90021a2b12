#include <benchmark/benchmark.h>

#include <random>

#include "pbsim/fleet.hpp"
#include "pbsim/optimizer.hpp"
#include "pbsim/scenarios.hpp"
#include "pbsim/settlement.hpp"

namespace {

struct Setup {
  pbsim::MarketSeries market;
  pbsim::VirtualBattery vb;
  pbsim::EProgram eprog;
};

const Setup& setup() {
  static const Setup s = [] {
    const std::size_t n = 2 * pbsim::kIspsPerDay;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(0.0, 30.0);
    std::vector<double> da(n), up(n), down(n);
    std::vector<pbsim::RegulationState> st(n);
    for (std::size_t t = 0; t < n; ++t) {
      da[t] = t % 4 == 0 ? 60.0 + noise(rng) : da[t - 1];
      up[t] = da[t] + 40.0 + std::abs(noise(rng));
      down[t] = da[t] - 40.0 - std::abs(noise(rng));
      st[t] = pbsim::regulation_state_from_int(static_cast<int>(t % 3) - 1);
    }
    Setup out{pbsim::MarketSeries(da, up, down, st), {}, {}};
    out.vb = pbsim::build_virtual_battery(pbsim::generate_sessions(100, {}, 4), n);
    out.eprog = pbsim::solve_da_stage(out.vb, pbsim::da_scenarios(da, 10, 0.2, 5), 150.0);
    return out;
  }();
  return s;
}

void BM_DaStage(benchmark::State& state) {
  const Setup& s = setup();
  const auto set = pbsim::da_scenarios(s.market.lambda_da(), 10, 0.2, 5);
  for (auto _ : state) benchmark::DoNotOptimize(pbsim::solve_da_stage(s.vb, set, 150.0));
}
BENCHMARK(BM_DaStage);

// One real-time solve at the start of the overnight window.
void BM_RtSolve(benchmark::State& state) {
  const Setup& s = setup();
  const pbsim::Window w = pbsim::active_windows(s.vb).front();
  const std::size_t t0 = w.begin + static_cast<std::size_t>(state.range(0));
  const auto fan = pbsim::rt_fan(s.market.lambda_up(), s.market.lambda_down(), t0, 3, {}, w.end);
  const double e_start = pbsim::vb_trajectory(s.vb, s.eprog.e_da)[t0 - 1];
  const auto problem = pbsim::build_rt_problem(
      s.vb, s.eprog, t0, w.end, e_start,
      pbsim::MechanismSchedule::uniform(s.market.size(), pbsim::Mechanism::kSingle), s.market,
      fan, 150.0);
  for (auto _ : state) benchmark::DoNotOptimize(pbsim::solve_rt_structured(problem));
}
BENCHMARK(BM_RtSolve)->Arg(0)->Arg(24)->Arg(48)->Unit(benchmark::kMicrosecond);

void BM_RollingDay(benchmark::State& state) {
  const Setup& s = setup();
  pbsim::RtOptions opt;
  opt.seed = 7;
  opt.retail = 150.0;
  const auto sched = pbsim::MechanismSchedule::uniform(s.market.size(), pbsim::Mechanism::kSingle);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pbsim::rolling_horizon_day(s.vb, s.eprog, sched, s.market, opt, 0));
  }
}
BENCHMARK(BM_RollingDay)->Unit(benchmark::kMillisecond);

void BM_Settlement(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-400.0, 400.0);
  std::vector<double> v(4096);
  for (auto& x : v) x = u(rng);
  for (auto _ : state) {
    double total = 0.0;
    for (std::size_t i = 0; i + 3 < v.size(); i += 4) {
      total += pbsim::settle(pbsim::Mechanism::kTwoPrice, v[i],
                             pbsim::regulation_state_from_int(static_cast<int>(i % 4) - 1), v[i + 1],
                             v[i + 2], v[i + 3])
                   .cash;
    }
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_Settlement);

}  // namespace

BENCHMARK_MAIN();
