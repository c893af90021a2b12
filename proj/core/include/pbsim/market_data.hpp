#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "pbsim/types.hpp"

namespace pbsim {

// Per-ISP market data: day-ahead price (hourly, repeated per ISP), upward and
// downward regulation prices (€/MWh) and the system regulation state.
//
// Immutable once constructed; the constructor enforces that all series share
// one length that is a whole number of days and that the day-ahead price is
// constant within each hour.
class MarketSeries {
 public:
  MarketSeries() = default;
  MarketSeries(std::vector<double> lambda_da, std::vector<double> lambda_up,
               std::vector<double> lambda_down, std::vector<RegulationState> reg_state);

  std::size_t size() const noexcept { return lambda_da_.size(); }
  std::size_t days() const noexcept { return size() / kIspsPerDay; }
  bool empty() const noexcept { return lambda_da_.empty(); }

  const std::vector<double>& lambda_da() const noexcept { return lambda_da_; }
  const std::vector<double>& lambda_up() const noexcept { return lambda_up_; }
  const std::vector<double>& lambda_down() const noexcept { return lambda_down_; }
  const std::vector<RegulationState>& reg_state() const noexcept { return reg_state_; }

  double lambda_da(std::size_t isp) const { return lambda_da_.at(isp); }
  double lambda_up(std::size_t isp) const { return lambda_up_.at(isp); }
  double lambda_down(std::size_t isp) const { return lambda_down_.at(isp); }
  RegulationState reg_state(std::size_t isp) const { return reg_state_.at(isp); }

  friend bool operator==(const MarketSeries&, const MarketSeries&) = default;

 private:
  std::vector<double> lambda_da_;
  std::vector<double> lambda_up_;
  std::vector<double> lambda_down_;
  std::vector<RegulationState> reg_state_;
};

// Expands 24 hourly values per day to ISP resolution (x4).
std::vector<double> expand_hourly(const std::vector<double>& hourly);

// Reads `isp,lambda_da,lambda_up,lambda_down,reg_state`. Malformed rows raise
// ParseError with the line number; domain violations raise ValidationError
// naming the line.
MarketSeries load_market_data(const std::filesystem::path& path);
void write_market_data(const std::filesystem::path& path, const MarketSeries& series);

// One stress event: the listed ISPs get `state` and `lambda_down`. The
// optional overrides replace the upward price at those ISPs and the
// day-ahead price of every hour that contains one of them.
struct StressSpike {
  std::vector<std::size_t> isps;
  double lambda_down = -400.0;
  RegulationState state = RegulationState::kLong;
  std::optional<double> lambda_up;
  std::optional<double> lambda_da;
};

// Shape of the smooth baseline the spikes are laid over.
struct SyntheticMarketParams {
  double da_mean = 60.0;           // €/MWh
  double da_daily_amplitude = 25.0;
  double da_hourly_noise = 4.0;    // stddev of the per-hour perturbation
  double up_spread = 25.0;         // lambda_up - lambda_da
  double down_spread = 25.0;       // lambda_da - lambda_down
  double spread_noise = 3.0;
  // Probability per ISP of a baseline +1/-1 regulation state; 0 keeps the
  // baseline balanced everywhere.
  double baseline_imbalance_prob = 0.0;
};

MarketSeries synthesize_stress_series(std::size_t days, const std::vector<StressSpike>& spikes,
                                      std::uint64_t seed,
                                      const SyntheticMarketParams& params = {});

}  // namespace pbsim
