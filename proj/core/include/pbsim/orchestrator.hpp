#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pbsim/config.hpp"
#include "pbsim/fleet.hpp"
#include "pbsim/grid.hpp"
#include "pbsim/market_data.hpp"
#include "pbsim/optimizer.hpp"
#include "pbsim/settlement.hpp"
#include "pbsim/types.hpp"

namespace pbsim {

// sp/tp/dp apply one mechanism everywhere (scope none); proposed-tp and
// proposed-dp keep single as base and switch to the alternative under
// congestion with global or local scope.
struct CaseSpec {
  std::string name;
  Scope scope = Scope::kNone;
  Mechanism base = Mechanism::kSingle;
  Mechanism alt = Mechanism::kSingle;

  std::string label() const { return name + "_" + std::string(to_string(scope)); }
};

CaseSpec make_case(std::string_view name, Scope scope);

// Loaded market data, per-group sessions and regions expanded to the horizon.
struct CaseInputs {
  MarketSeries market;
  std::vector<std::vector<EvSession>> fleets;  // index = virtual battery group
  std::vector<RegionConfig> regions;
};

// Market truncated to config.days when set; fleets read from config.fleet_dir.
CaseInputs load_inputs(const SimConfig& config);

// Market alone, truncated to config.days when set.
MarketSeries load_case_market(const SimConfig& config);

// One session list per group, seeded from seeds.fleet and the group index.
std::vector<std::vector<EvSession>> build_fleets(const SimConfig& config, std::size_t days);
void write_fleets(const std::filesystem::path& dir,
                  const std::vector<std::vector<EvSession>>& fleets);

// Mechanism per region and ISP from the flags:
// none -> base everywhere; global -> alt in every region when any region is
// flagged; local -> alt only in the flagged regions.
std::vector<std::vector<Mechanism>> assign_mechanisms(
    Scope scope, Mechanism base, Mechanism alt, const std::vector<std::vector<bool>>& flags);

struct BrpResult {
  std::size_t id = 0;
  std::string region;
  VirtualBattery vb;
  EProgram eprog;
  RtTrace trace;
  std::vector<SettlementRecord> ledger;
  double da_margin = 0.0;
  double settlement_cash = 0.0;
  double benefit() const { return da_margin + settlement_cash; }
};

struct CaseResult {
  CaseSpec spec;
  std::vector<BrpResult> brps;
  std::vector<std::vector<bool>> flags;               // [region][isp]
  std::vector<std::vector<Mechanism>> mechanisms;     // [region][isp]
  std::vector<LoadingTrace> loading;                  // one per region
  double benefit = 0.0;
  std::size_t solves = 0;
  std::size_t suboptimal = 0;
};

// DA stage per BRP, DSO flags from the DA schedules, mechanism assignment,
// rolling-horizon RT, settlement with the mechanism the BRP optimized
// against, and loading traces from realized energy.
CaseResult run_case(const CaseSpec& spec, const SimConfig& config, const CaseInputs& inputs);

// ledger.csv, loading.csv, schedule.csv and summary.json under `dir`.
void write_case(const std::filesystem::path& dir, const CaseResult& result,
                const MarketSeries& market);

}  // namespace pbsim
