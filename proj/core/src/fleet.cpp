#include "pbsim/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "pbsim/csv.hpp"
#include "pbsim/rng.hpp"
#include "pbsim/types.hpp"

namespace pbsim {
namespace {

constexpr double kSmallCapacity = 50.0;
constexpr double kSmallPower = 3.7;
constexpr double kLargeCapacity = 75.0;
constexpr double kLargePower = 11.0;

std::string session_tag(const EvSession& s) { return "ev " + std::to_string(s.ev_id); }

std::size_t hour_to_isp(double h) {
  return static_cast<std::size_t>(std::llround(h * static_cast<double>(kIspsPerHour)));
}

}  // namespace

void validate_session(const EvSession& s, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in (0, 1]");
  if (s.arrival_isp >= s.departure_isp) {
    throw ValidationError(session_tag(s) + ": arrival must precede departure");
  }
  const bool small = s.capacity_kwh == kSmallCapacity && s.p_max_kw == kSmallPower;
  const bool large = s.capacity_kwh == kLargeCapacity && s.p_max_kw == kLargePower;
  if (!small && !large) {
    throw ValidationError(session_tag(s) + ": capacity/p_max must be 50/3.7 or 75/11");
  }
  if (!(s.soc_init_kwh >= 0.0 && s.soc_init_kwh <= s.e_target_kwh &&
        s.e_target_kwh <= s.capacity_kwh)) {
    throw ValidationError(session_tag(s) + ": need 0 <= soc_init <= e_target <= capacity");
  }
  if (!(s.e_trip_kwh >= 0.0)) throw ValidationError(session_tag(s) + ": negative e_trip");
  const double reachable = eta * s.p_max_kw * kIspHours * static_cast<double>(s.parked_isps());
  if (s.e_target_kwh - s.soc_init_kwh > reachable * (1.0 + 1e-12)) {
    throw ValidationError(session_tag(s) + ": target unreachable within the parked interval");
  }
}

std::vector<EvSession> generate_sessions(std::size_t group_size, const MobilityParams& p,
                                         std::uint64_t seed, std::size_t night) {
  if (p.trip_min_kwh < 0.0 || p.trip_max_kwh < p.trip_min_kwh) {
    throw ValidationError("trip energy range is empty");
  }
  if (p.arrival_min_h > p.arrival_max_h || p.departure_min_h > p.departure_max_h) {
    throw ValidationError("arrival/departure clamp range is empty");
  }
  const std::size_t day0 = night * kIspsPerDay;
  std::vector<EvSession> out;
  out.reserve(group_size);
  for (std::size_t ev = 0; ev < group_size; ++ev) {
    Rng type_rng(derive_seed(seed, {0x74797065ull, ev}));
    const bool large = std::uniform_real_distribution<double>(0.0, 1.0)(type_rng) < p.large_share;

    EvSession s;
    s.ev_id = ev;
    s.capacity_kwh = large ? kLargeCapacity : kSmallCapacity;
    s.p_max_kw = large ? kLargePower : kSmallPower;
    s.e_target_kwh = p.target_soc_fraction * s.capacity_kwh;

    Rng rng(derive_seed(seed, {night, ev}));
    std::normal_distribution<double> arr(p.arrival_mean_h, p.arrival_sd_h);
    std::normal_distribution<double> dep(p.departure_mean_h, p.departure_sd_h);
    std::uniform_real_distribution<double> trip(p.trip_min_kwh, p.trip_max_kwh);
    bool ok = false;
    for (int attempt = 0; attempt <= p.max_retries && !ok; ++attempt) {
      const double a = std::clamp(arr(rng), p.arrival_min_h, p.arrival_max_h);
      const double d = std::clamp(dep(rng), p.departure_min_h, p.departure_max_h);
      s.arrival_isp = day0 + hour_to_isp(a);
      s.departure_isp = day0 + kIspsPerDay + hour_to_isp(d);
      s.e_trip_kwh = p.trip_min_kwh == p.trip_max_kwh ? p.trip_min_kwh : trip(rng);
      s.e_trip_kwh = std::min(s.e_trip_kwh, s.e_target_kwh);
      s.soc_init_kwh = s.e_target_kwh - s.e_trip_kwh;
      const double reachable =
          p.eta * s.p_max_kw * kIspHours * static_cast<double>(s.parked_isps());
      ok = s.arrival_isp < s.departure_isp && s.e_trip_kwh <= reachable;
    }
    if (!ok) {
      throw ValidationError("ev " + std::to_string(ev) + ", night " + std::to_string(night) +
                            ": no feasible session after " + std::to_string(p.max_retries) +
                            " retries");
    }
    out.push_back(s);
  }
  return out;
}

std::vector<EvSession> generate_fleet(std::size_t days, std::size_t group_size,
                                      const MobilityParams& params, std::uint64_t seed) {
  std::vector<EvSession> out;
  for (std::size_t night = 0; night + 1 < days; ++night) {
    auto sessions = generate_sessions(group_size, params, seed, night);
    out.insert(out.end(), sessions.begin(), sessions.end());
  }
  return out;
}

EnergyPath asap_path(const EvSession& s, double eta) {
  const std::size_t n = s.parked_isps();
  const double step = eta * s.p_max_kw * kIspHours;
  EnergyPath path{s.arrival_isp, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    path.energy[k] = std::min(s.e_target_kwh, s.soc_init_kwh + static_cast<double>(k + 1) * step);
  }
  if (n > 0) path.energy.back() = s.e_target_kwh;
  return path;
}

EnergyPath alap_path(const EvSession& s, double eta) {
  const std::size_t n = s.parked_isps();
  const double step = eta * s.p_max_kw * kIspHours;
  EnergyPath path{s.arrival_isp, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double remaining_steps = static_cast<double>(n - 1 - k);
    path.energy[k] = std::max(s.soc_init_kwh, s.e_target_kwh - remaining_steps * step);
  }
  return path;
}

double VirtualBattery::e_max(std::size_t t) const { return p_charge_max.at(t) * kIspHours; }

VirtualBattery build_virtual_battery(const std::vector<EvSession>& sessions, std::size_t horizon,
                                     double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in (0, 1]");
  VirtualBattery vb;
  vb.eta = eta;
  vb.e_upper.assign(horizon, 0.0);
  vb.e_lower.assign(horizon, 0.0);
  vb.p_charge_max.assign(horizon, 0.0);
  vb.e_arr.assign(horizon, 0.0);
  vb.e_dep.assign(horizon, 0.0);
  vb.n_parked.assign(horizon, 0);
  for (const auto& s : sessions) {
    // Reachability below full efficiency surfaces as day-ahead infeasibility.
    validate_session(s, 1.0);
    if (s.departure_isp > horizon) {
      throw ValidationError(session_tag(s) + ": departs after the horizon end");
    }
    const EnergyPath up = asap_path(s, eta);
    const EnergyPath lo = alap_path(s, eta);
    for (std::size_t k = 0; k < up.energy.size(); ++k) {
      const std::size_t t = s.arrival_isp + k;
      vb.e_upper[t] += up.energy[k];
      vb.e_lower[t] += lo.energy[k];
      vb.p_charge_max[t] += s.p_max_kw;
      vb.n_parked[t] += 1;
    }
    vb.e_arr[s.arrival_isp] += s.soc_init_kwh;
    if (s.departure_isp < horizon) vb.e_dep[s.departure_isp] += s.e_target_kwh;
  }
  return vb;
}

std::vector<Window> active_windows(const VirtualBattery& vb) {
  std::vector<Window> out;
  const std::size_t n = vb.horizon();
  std::size_t t = 0;
  while (t < n) {
    if (vb.n_parked[t] == 0) {
      ++t;
      continue;
    }
    Window w{t, t};
    while (w.end < n && vb.n_parked[w.end] > 0) ++w.end;
    out.push_back(w);
    t = w.end;
  }
  return out;
}

std::vector<EvSession> load_fleet(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  csv::expect_header(table, {"ev_id", "arrival_isp", "departure_isp", "capacity_kwh", "p_max_kw",
                             "soc_init_kwh", "e_target_kwh", "e_trip_kwh"});
  std::vector<EvSession> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::size_t line = table.line_numbers[i];
    auto non_negative = [&](std::string_view f) {
      const long long v = csv::parse_int(f, line);
      if (v < 0) throw ValidationError("line " + std::to_string(line) + ": negative index");
      return static_cast<std::size_t>(v);
    };
    EvSession s;
    s.ev_id = non_negative(r[0]);
    s.arrival_isp = non_negative(r[1]);
    s.departure_isp = non_negative(r[2]);
    s.capacity_kwh = csv::parse_double(r[3], line);
    s.p_max_kw = csv::parse_double(r[4], line);
    s.soc_init_kwh = csv::parse_double(r[5], line);
    s.e_target_kwh = csv::parse_double(r[6], line);
    s.e_trip_kwh = csv::parse_double(r[7], line);
    try {
      validate_session(s, 1.0);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
    out.push_back(s);
  }
  return out;
}

void write_fleet(const std::filesystem::path& path, const std::vector<EvSession>& sessions) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "ev_id,arrival_isp,departure_isp,capacity_kwh,p_max_kw,soc_init_kwh,e_target_kwh,"
         "e_trip_kwh\n";
  for (const auto& s : sessions) {
    csv::write_row(out, {std::to_string(s.ev_id), std::to_string(s.arrival_isp),
                         std::to_string(s.departure_isp), csv::format_double(s.capacity_kwh),
                         csv::format_double(s.p_max_kw), csv::format_double(s.soc_init_kwh),
                         csv::format_double(s.e_target_kwh), csv::format_double(s.e_trip_kwh)});
  }
}

}  // namespace pbsim
