#include "pbsim/market_data.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "pbsim/csv.hpp"
#include "pbsim/rng.hpp"

namespace pbsim {
namespace {

constexpr std::array<double, 24> kDailyShape = {
    -0.3, -0.5, -0.7, -0.9, -1.0, -0.9, -0.4, 0.3, 0.6, 0.4, 0.1, -0.1,
    -0.3, -0.4, -0.3, -0.1, 0.2,  0.6,  0.9,  1.0, 0.8, 0.5, 0.2, -0.1};

}  // namespace

MarketSeries::MarketSeries(std::vector<double> lambda_da, std::vector<double> lambda_up,
                           std::vector<double> lambda_down, std::vector<RegulationState> reg_state)
    : lambda_da_(std::move(lambda_da)),
      lambda_up_(std::move(lambda_up)),
      lambda_down_(std::move(lambda_down)),
      reg_state_(std::move(reg_state)) {
  const std::size_t n = lambda_da_.size();
  if (lambda_up_.size() != n || lambda_down_.size() != n || reg_state_.size() != n) {
    throw ValidationError("market series have different lengths");
  }
  if (n % kIspsPerDay != 0) {
    throw ValidationError("market series length " + std::to_string(n) +
                          " is not a multiple of " + std::to_string(kIspsPerDay));
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (!std::isfinite(lambda_da_[t]) || !std::isfinite(lambda_up_[t]) ||
        !std::isfinite(lambda_down_[t])) {
      throw ValidationError("non-finite price at isp " + std::to_string(t));
    }
    if (t % kIspsPerHour != 0 && lambda_da_[t] != lambda_da_[t - 1]) {
      throw ValidationError("day-ahead price changes within the hour at isp " + std::to_string(t));
    }
    // Rejects values smuggled in through static_cast.
    (void)regulation_state_from_int(to_int(reg_state_[t]));
  }
}

std::vector<double> expand_hourly(const std::vector<double>& hourly) {
  std::vector<double> out;
  out.reserve(hourly.size() * kIspsPerHour);
  for (const double v : hourly) out.insert(out.end(), kIspsPerHour, v);
  return out;
}

MarketSeries load_market_data(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  csv::expect_header(table, {"isp", "lambda_da", "lambda_up", "lambda_down", "reg_state"});

  const std::size_t n = table.rows.size();
  std::vector<double> da(n), up(n), down(n);
  std::vector<RegulationState> state(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const std::size_t line = table.line_numbers[i];
    const long long isp = csv::parse_int(row[0], line);
    if (isp != static_cast<long long>(i)) {
      throw ValidationError("line " + std::to_string(line) + ": isp " + std::to_string(isp) +
                            " out of sequence (expected " + std::to_string(i) + ")");
    }
    da[i] = csv::parse_double(row[1], line);
    up[i] = csv::parse_double(row[2], line);
    down[i] = csv::parse_double(row[3], line);
    const long long s = csv::parse_int(row[4], line);
    if (s < -1 || s > 2) {
      throw ValidationError("line " + std::to_string(line) + ": reg_state " + std::to_string(s) +
                            " not in {-1,0,1,2}");
    }
    state[i] = regulation_state_from_int(static_cast<int>(s));
    if (i % kIspsPerHour != 0 && da[i] != da[i - 1]) {
      throw ValidationError("line " + std::to_string(line) +
                            ": day-ahead price not constant within the hour");
    }
  }
  return MarketSeries(std::move(da), std::move(up), std::move(down), std::move(state));
}

void write_market_data(const std::filesystem::path& path, const MarketSeries& series) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "isp,lambda_da,lambda_up,lambda_down,reg_state\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    csv::write_row(out, {std::to_string(t), csv::format_double(series.lambda_da(t)),
                         csv::format_double(series.lambda_up(t)),
                         csv::format_double(series.lambda_down(t)),
                         std::to_string(to_int(series.reg_state(t)))});
  }
}

MarketSeries synthesize_stress_series(std::size_t days, const std::vector<StressSpike>& spikes,
                                      std::uint64_t seed, const SyntheticMarketParams& params) {
  if (days == 0) throw ValidationError("synthetic series needs at least one day");
  const std::size_t n = days * kIspsPerDay;
  for (const auto& spike : spikes) {
    for (const std::size_t isp : spike.isps) {
      if (isp >= n) {
        throw ValidationError("spike isp " + std::to_string(isp) + " outside horizon of " +
                              std::to_string(n) + " isps");
      }
    }
  }

  Rng rng(derive_seed(seed, {0x6d61726b6574ull}));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<double> hourly(days * 24);
  for (std::size_t h = 0; h < hourly.size(); ++h) {
    hourly[h] = params.da_mean + params.da_daily_amplitude * kDailyShape[h % 24] +
                params.da_hourly_noise * unit(rng);
  }
  for (const auto& spike : spikes) {
    if (!spike.lambda_da) continue;
    for (const std::size_t isp : spike.isps) hourly[isp / kIspsPerHour] = *spike.lambda_da;
  }
  std::vector<double> da = expand_hourly(hourly);

  std::vector<double> up(n), down(n);
  std::vector<RegulationState> state(n, RegulationState::kBalanced);
  for (std::size_t t = 0; t < n; ++t) {
    up[t] = da[t] + params.up_spread + std::abs(params.spread_noise * unit(rng));
    down[t] = da[t] - params.down_spread - std::abs(params.spread_noise * unit(rng));
    const double u = coin(rng);
    if (u < params.baseline_imbalance_prob) {
      state[t] = u < 0.5 * params.baseline_imbalance_prob ? RegulationState::kShort
                                                          : RegulationState::kLong;
    }
  }
  for (const auto& spike : spikes) {
    for (const std::size_t isp : spike.isps) {
      state[isp] = spike.state;
      down[isp] = spike.lambda_down;
      if (spike.lambda_up) up[isp] = *spike.lambda_up;
    }
  }
  return MarketSeries(std::move(da), std::move(up), std::move(down), std::move(state));
}

}  // namespace pbsim
