#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "pbsim/fleet.hpp"
#include "pbsim/market_data.hpp"

namespace pbsim {

// One aggregate connection line per region.
struct RegionConfig {
  std::string id;
  double line_rating_mw = 1.0;
  std::vector<double> baseload_mw;  // per ISP
  std::vector<double> pv_mw;        // per ISP
  std::vector<std::size_t> groups;  // indices of the attached virtual batteries
};

void validate_region(const RegionConfig& region, std::size_t horizon);

// baseload - pv + sum(e / dt / 1000), MW; negative means reverse flow.
double connection_flow(const RegionConfig& region, std::size_t t,
                       const std::vector<double>& brp_energies_kwh);

double loading(double flow_mw, double rating_mw);
inline bool is_overload(double loading_fraction) { return loading_fraction > 1.0; }

// A BRP's day-ahead schedule as the DSO sees it.
struct ScheduleView {
  const VirtualBattery* vb = nullptr;
  const std::vector<double>* e_da = nullptr;
  const std::vector<double>* planned_energy = nullptr;  // envelope trajectory under e_da
};

struct ForecastOptions {
  bool worst_case = true;
  double threshold = 1.0;
};

struct ForecastResult {
  std::size_t t = 0;
  std::vector<double> loading;  // for t+1, t+2 (truncated at the horizon)
  std::vector<bool> flag;
};

// Price seen by a passive BRP at t under single pricing; its sign sets the
// direction of the worst-case response.
double single_price_signal(const MarketSeries& market, std::size_t t);

// Projected loading for t+1 and t+2 from the schedules. In worst-case mode each
// BRP is moved to the envelope-feasible extreme that the price signal at t
// rewards: a negative price pushes consumption up, a positive one down.
ForecastResult dso_congestion_forecast(const RegionConfig& region, std::size_t t,
                                       const std::vector<ScheduleView>& schedules,
                                       double price_signal_at_t, const ForecastOptions& options);

// flag[t] is the forecast issued at t - 2 for ISP t.
std::vector<bool> congestion_flags(const RegionConfig& region,
                                   const std::vector<ScheduleView>& schedules,
                                   const MarketSeries& market, const ForecastOptions& options);

struct LoadingTrace {
  std::string region;
  std::vector<double> flow_mw;
  std::vector<double> loading;
  std::vector<double> scheduled_loading;
  std::vector<bool> overload;
  std::vector<bool> flagged;
};

// Loading from realized energies, alongside the schedule-only loading.
LoadingTrace build_loading_trace(const RegionConfig& region,
                                 const std::vector<const std::vector<double>*>& realized,
                                 const std::vector<const std::vector<double>*>& scheduled,
                                 const std::vector<bool>& flags);

void write_loading_trace(const std::filesystem::path& path, const std::vector<LoadingTrace>& traces);

}  // namespace pbsim
