#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace pbsim {

enum class ScenarioKind : std::uint8_t { kDa, kRtUp, kRtDown, kRtJoint };

// Equiprobable price paths. Column k holds ISP t0 + k. For kRtJoint,
// `prices` carries the upward and `down_prices` the downward series.
struct PriceScenarioSet {
  ScenarioKind kind = ScenarioKind::kDa;
  std::size_t t0 = 0;
  std::vector<std::vector<double>> prices;
  std::vector<std::vector<double>> down_prices;
  std::vector<double> probabilities;

  std::size_t size() const noexcept { return prices.size(); }
  std::size_t columns() const noexcept { return prices.empty() ? 0 : prices.front().size(); }
};

// row_s[t] = base[t] * (1 + eps), eps ~ N(0, sigma_rel).
PriceScenarioSet da_scenarios(const std::vector<double>& base, std::size_t n, double sigma_rel,
                              std::uint64_t seed);

// n_up x n_down joint fan over ISPs [t0, end). Row i * n_down + j pairs
// upward draw i with downward draw j. Column 0 carries the actual prices;
// later columns are actual * (1 + eps), eps ~ N(0, sigma_rel).
// `end` defaults to the end of the series.
struct FanParams {
  std::size_t n_up = 5;
  std::size_t n_down = 5;
  double sigma_rel = 0.5;
};
PriceScenarioSet rt_fan(const std::vector<double>& actual_up, const std::vector<double>& actual_down,
                        std::size_t t0, std::uint64_t seed, const FanParams& params = {},
                        std::size_t end = 0);

// One row per (scenario, isp): `scenario,isp,probability,price[,down_price]`.
void write_scenarios(const std::filesystem::path& path, const PriceScenarioSet& set);

}  // namespace pbsim
