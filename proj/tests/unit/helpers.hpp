#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <random>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pbsim/fleet.hpp"
#include "pbsim/market_data.hpp"
#include "pbsim/milp.hpp"
#include "pbsim/optimizer.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("pbsim_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline pbsim::EvSession session(std::size_t id, std::size_t arr, std::size_t dep, double soc,
                                double target, bool large = false) {
  pbsim::EvSession s;
  s.ev_id = id;
  s.arrival_isp = arr;
  s.departure_isp = dep;
  s.capacity_kwh = large ? 75.0 : 50.0;
  s.p_max_kw = large ? 11.0 : 3.7;
  s.soc_init_kwh = soc;
  s.e_target_kwh = target;
  s.e_trip_kwh = target - soc;
  return s;
}

// Flat market: DA `da`, up/down at da +/- spread, every state `state`.
inline pbsim::MarketSeries flat_market(std::size_t days, double da, double up, double down,
                                       pbsim::RegulationState state = pbsim::RegulationState::kBalanced) {
  const std::size_t n = days * pbsim::kIspsPerDay;
  return pbsim::MarketSeries(std::vector<double>(n, da), std::vector<double>(n, up),
                             std::vector<double>(n, down),
                             std::vector<pbsim::RegulationState>(n, state));
}

// Random real-time problem around a feasible schedule. Step 0 prices are
// shared by all scenarios; later steps may be non-concave.
inline pbsim::RtProblem random_rt_problem(std::mt19937_64& rng, std::size_t steps,
                                          std::size_t scenarios) {
  std::uniform_real_distribution<double> cap(0.5, 5.0), unit(0.0, 1.0), margin(0.0, 3.0),
      price(-400.0, 400.0);
  pbsim::RtProblem p;
  p.t0 = 0;
  p.e_start = 10.0;
  double planned = p.e_start;
  for (std::size_t k = 0; k < steps; ++k) {
    p.e_max.push_back(cap(rng));
    p.e_da.push_back(unit(rng) < 0.2 ? 0.0 : p.e_max.back() * unit(rng));
    p.net_arrivals.push_back(0.0);
    planned += p.e_da.back();
    const bool tight = unit(rng) < 0.15;
    p.e_lower.push_back(planned - (tight ? 0.0 : margin(rng)));
    p.e_upper.push_back(planned + (tight ? 0.0 : margin(rng)));
  }
  p.probabilities.assign(scenarios, 1.0 / static_cast<double>(scenarios));
  p.prices.assign(scenarios, std::vector<pbsim::BranchPrices>(steps));
  for (std::size_t s = 0; s < scenarios; ++s) {
    for (std::size_t k = 0; k < steps; ++k) {
      p.prices[s][k] = s > 0 && k == 0 ? p.prices[0][0] : pbsim::BranchPrices{price(rng), price(rng)};
    }
  }
  p.mechanisms.assign(steps, pbsim::Mechanism::kSingle);
  return p;
}

// Best objective over every assignment of the binaries, one LP per branch.
inline double enumerate_binaries(const pbsim::MilpModel& m) {
  std::vector<int> bins;
  for (std::size_t j = 0; j < m.variables().size(); ++j) {
    if (m.variables()[j].binary) bins.push_back(static_cast<int>(j));
  }
  std::vector<double> lb, ub;
  for (const auto& v : m.variables()) {
    lb.push_back(v.lb);
    ub.push_back(v.ub);
  }
  double best = -pbsim::kInf;
  for (std::size_t mask = 0; mask < (std::size_t{1} << bins.size()); ++mask) {
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const double bit = (mask >> i) & 1U ? 1.0 : 0.0;
      lb[static_cast<std::size_t>(bins[i])] = ub[static_cast<std::size_t>(bins[i])] = bit;
    }
    const pbsim::LpResult r = pbsim::solve_lp(m, lb, ub);
    if (r.status == pbsim::LpStatus::kOptimal) best = std::max(best, r.objective);
  }
  return best;
}

}  // namespace testutil
