#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pbsim/fleet.hpp"
#include "pbsim/grid.hpp"
#include "pbsim/optimizer.hpp"
#include "pbsim/scenarios.hpp"
#include "pbsim/settlement.hpp"
#include "pbsim/types.hpp"

namespace pbsim {

// Region as written in the config. Profiles hold either one value per ISP
// of a day (repeated daily) or one per ISP of the horizon.
struct RegionSpec {
  std::string id;
  double line_rating = 1.0;  // MW
  std::size_t groups = 0;    // virtual batteries attached
  std::vector<double> baseload;
  std::vector<double> pv;
};

struct Seeds {
  std::uint64_t fleet = 1;
  std::uint64_t da = 2;
  std::uint64_t rt = 3;
};

// JSON keys mirror these field names.
struct SimConfig {
  std::vector<RegionSpec> regions;
  double retail_price = 150.0;  // €/MWh
  double eta = 1.0;
  Mechanism alt_mechanism = Mechanism::kDualPrice;
  Scope scope = Scope::kLocal;
  Seeds seeds;
  std::size_t da_scenarios = 10;
  double da_noise_sigma_rel = 0.2;
  std::size_t rt_n_up = 5;
  std::size_t rt_n_down = 5;
  double rt_sigma_rel = 0.5;
  std::size_t group_size = 100;
  std::size_t days = 0;  // 0: taken from the market file
  MobilityParams mobility;
  ForecastOptions forecast;
  RtSolveOptions solver;
  SettlementOptions settlement;
  std::filesystem::path market_file;
  std::filesystem::path fleet_dir;
  std::size_t threads = 0;  // 0: hardware concurrency

  std::size_t total_groups() const;
  FanParams fan() const { return {rt_n_up, rt_n_down, rt_sigma_rel}; }
};

// Relative paths resolve against `base_dir`. Throws ValidationError.
SimConfig parse_config(const std::string& json_text,
                       const std::filesystem::path& base_dir = ".");
SimConfig load_config(const std::filesystem::path& path);

void validate_config(const SimConfig& config);

// Regions expanded to the horizon; group indices are assigned in order.
std::vector<RegionConfig> expand_regions(const SimConfig& config, std::size_t horizon);

// Fleet file of virtual battery `group` under fleet_dir.
std::filesystem::path fleet_file(const SimConfig& config, std::size_t group);

}  // namespace pbsim
