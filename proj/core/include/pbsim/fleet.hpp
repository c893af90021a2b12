#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace pbsim {

// One plug-in interval. The EV is parked during ISPs [arrival_isp, departure_isp).
struct EvSession {
  std::size_t ev_id = 0;
  std::size_t arrival_isp = 0;
  std::size_t departure_isp = 0;
  double capacity_kwh = 0.0;
  double p_max_kw = 0.0;
  double soc_init_kwh = 0.0;
  double e_target_kwh = 0.0;
  double e_trip_kwh = 0.0;

  std::size_t parked_isps() const noexcept { return departure_isp - arrival_isp; }
  friend bool operator==(const EvSession&, const EvSession&) = default;
};

// Throws ValidationError unless the session is internally consistent and
// can reach e_target at full power with efficiency eta.
void validate_session(const EvSession& s, double eta);

struct MobilityParams {
  double arrival_mean_h = 18.0;
  double arrival_sd_h = 1.5;
  double arrival_min_h = 13.0;
  double arrival_max_h = 23.75;
  double departure_mean_h = 8.0;  // next morning
  double departure_sd_h = 1.0;
  double departure_min_h = 4.0;
  double departure_max_h = 11.0;
  double trip_min_kwh = 4.0;
  double trip_max_kwh = 16.0;
  double target_soc_fraction = 0.9;  // e_target as a share of capacity
  double large_share = 0.5;          // share of 75 kWh / 11 kW vehicles
  double eta = 1.0;
  int max_retries = 100;
};

// Draws one night of sessions for `group_size` EVs: arrival on day `night`,
// departure the next morning. Vehicle type depends on (seed, ev_id) only, so
// an EV keeps its battery across nights.
std::vector<EvSession> generate_sessions(std::size_t group_size, const MobilityParams& params,
                                         std::uint64_t seed, std::size_t night = 0);

// Sessions for nights 0..days-2 of a `days`-long horizon.
std::vector<EvSession> generate_fleet(std::size_t days, std::size_t group_size,
                                      const MobilityParams& params, std::uint64_t seed);

// Stored energy at the end of each parked ISP; energy[k] belongs to ISP
// start_isp + k and the last entry equals e_target.
struct EnergyPath {
  std::size_t start_isp = 0;
  std::vector<double> energy;
};

EnergyPath asap_path(const EvSession& s, double eta = 1.0);
EnergyPath alap_path(const EvSession& s, double eta = 1.0);

// Aggregate envelope of an EV group. Energy balance per ISP:
//   E[t] = E[t-1] + e_arr[t] - e_dep[t] + eta * e[t],  E[-1] = e_init
// with e_lower[t] <= E[t] <= e_upper[t] and 0 <= e[t] <= p_charge_max[t] * dt.
struct VirtualBattery {
  std::vector<double> e_upper;
  std::vector<double> e_lower;
  std::vector<double> p_charge_max;  // kW
  std::vector<double> e_arr;
  std::vector<double> e_dep;
  std::vector<int> n_parked;
  double e_init = 0.0;
  double eta = 1.0;

  std::size_t horizon() const noexcept { return e_upper.size(); }
  double e_max(std::size_t t) const;  // kWh purchasable in ISP t
};

VirtualBattery build_virtual_battery(const std::vector<EvSession>& sessions, std::size_t horizon,
                                     double eta = 1.0);

// Maximal runs [begin, end) of ISPs with at least one parked EV. The stored
// energy is pinned by the envelope at the last ISP of every run.
struct Window {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Window&, const Window&) = default;
};
std::vector<Window> active_windows(const VirtualBattery& vb);

std::vector<EvSession> load_fleet(const std::filesystem::path& path);
void write_fleet(const std::filesystem::path& path, const std::vector<EvSession>& sessions);

}  // namespace pbsim
