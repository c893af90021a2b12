#include "pbsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pbsim {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key)) throw ValidationError("unknown config key '" + where + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<double> expand_profile(const std::vector<double>& profile, std::size_t horizon,
                                   const std::string& what) {
  if (profile.empty()) return std::vector<double>(horizon, 0.0);
  if (profile.size() == horizon) return profile;
  if (profile.size() == 1) return std::vector<double>(horizon, profile[0]);
  if (profile.size() == kIspsPerDay) {
    std::vector<double> out(horizon);
    for (std::size_t t = 0; t < horizon; ++t) out[t] = profile[t % kIspsPerDay];
    return out;
  }
  throw ValidationError(what + " profile must have 1, 96 or " + std::to_string(horizon) + " values");
}

}  // namespace

std::size_t SimConfig::total_groups() const {
  std::size_t n = 0;
  for (const auto& r : regions) n += r.groups;
  return n;
}

SimConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  SimConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    reject_unknown(j,
                   {"regions", "retail_price", "eta", "alt_mechanism", "scope", "seeds",
                    "da_scenarios", "da_noise_sigma_rel", "rt_n_up", "rt_n_down", "rt_sigma_rel",
                    "group_size", "days", "mobility", "forecast", "solver", "settlement",
                    "market_file", "fleet_dir", "threads"},
                   "");
    read(j, "retail_price", c.retail_price);
    read(j, "eta", c.eta);
    if (j.contains("alt_mechanism")) {
      c.alt_mechanism = mechanism_from_string(j.at("alt_mechanism").get<std::string>());
    }
    if (j.contains("scope")) c.scope = scope_from_string(j.at("scope").get<std::string>());
    read(j, "da_scenarios", c.da_scenarios);
    read(j, "da_noise_sigma_rel", c.da_noise_sigma_rel);
    read(j, "rt_n_up", c.rt_n_up);
    read(j, "rt_n_down", c.rt_n_down);
    read(j, "rt_sigma_rel", c.rt_sigma_rel);
    read(j, "group_size", c.group_size);
    read(j, "days", c.days);
    read(j, "threads", c.threads);
    if (j.contains("market_file")) {
      c.market_file = resolve(base_dir, j.at("market_file").get<std::string>());
    }
    c.fleet_dir = resolve(base_dir, j.value("fleet_dir", std::string("fleet")));

    if (j.contains("seeds")) {
      const json& s = j.at("seeds");
      reject_unknown(s, {"fleet", "da", "rt"}, "seeds.");
      read(s, "fleet", c.seeds.fleet);
      read(s, "da", c.seeds.da);
      read(s, "rt", c.seeds.rt);
    }
    if (j.contains("mobility")) {
      const json& m = j.at("mobility");
      reject_unknown(m,
                     {"arrival_mean_h", "arrival_sd_h", "arrival_min_h", "arrival_max_h",
                      "departure_mean_h", "departure_sd_h", "departure_min_h", "departure_max_h",
                      "trip_min_kwh", "trip_max_kwh", "target_soc_fraction", "large_share",
                      "max_retries"},
                     "mobility.");
      auto& p = c.mobility;
      read(m, "arrival_mean_h", p.arrival_mean_h);
      read(m, "arrival_sd_h", p.arrival_sd_h);
      read(m, "arrival_min_h", p.arrival_min_h);
      read(m, "arrival_max_h", p.arrival_max_h);
      read(m, "departure_mean_h", p.departure_mean_h);
      read(m, "departure_sd_h", p.departure_sd_h);
      read(m, "departure_min_h", p.departure_min_h);
      read(m, "departure_max_h", p.departure_max_h);
      read(m, "trip_min_kwh", p.trip_min_kwh);
      read(m, "trip_max_kwh", p.trip_max_kwh);
      read(m, "target_soc_fraction", p.target_soc_fraction);
      read(m, "large_share", p.large_share);
      read(m, "max_retries", p.max_retries);
    }
    c.mobility.eta = c.eta;
    if (j.contains("forecast")) {
      const json& f = j.at("forecast");
      reject_unknown(f, {"worst_case", "threshold"}, "forecast.");
      read(f, "worst_case", c.forecast.worst_case);
      read(f, "threshold", c.forecast.threshold);
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      reject_unknown(s, {"gap_tol", "node_limit", "time_limit_s"}, "solver.");
      read(s, "gap_tol", c.solver.gap_tol);
      read(s, "node_limit", c.solver.node_limit);
      read(s, "time_limit_s", c.solver.time_limit_s);
    }
    if (j.contains("settlement")) {
      const json& s = j.at("settlement");
      reject_unknown(s, {"single_variant", "mid_guards"}, "settlement.");
      if (s.contains("single_variant")) {
        const auto v = s.at("single_variant").get<std::string>();
        if (v == "nl_simplified") {
          c.settlement.single_variant = SingleVariant::kSimplified;
        } else if (v == "nl_full") {
          c.settlement.single_variant = SingleVariant::kFull;
        } else {
          throw ValidationError("settlement.single_variant must be nl_simplified or nl_full");
        }
      }
      read(s, "mid_guards", c.settlement.mid_guards);
    }
    if (j.contains("regions")) {
      for (const json& r : j.at("regions")) {
        reject_unknown(r, {"id", "line_rating", "groups", "baseload", "pv"}, "regions[].");
        RegionSpec spec;
        spec.id = r.at("id").get<std::string>();
        read(r, "line_rating", spec.line_rating);
        read(r, "groups", spec.groups);
        read(r, "baseload", spec.baseload);
        read(r, "pv", spec.pv);
        c.regions.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  validate_config(c);
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

void validate_config(const SimConfig& c) {
  if (!(c.eta > 0.0 && c.eta <= 1.0)) throw ValidationError("eta must lie in (0, 1]");
  if (!std::isfinite(c.retail_price)) throw ValidationError("retail_price must be finite");
  if (c.alt_mechanism == Mechanism::kSingle) {
    throw ValidationError("alt_mechanism must be two_price or dual_price");
  }
  if (c.da_scenarios == 0 || c.rt_n_up == 0 || c.rt_n_down == 0) {
    throw ValidationError("scenario counts must be positive");
  }
  if (c.da_noise_sigma_rel < 0.0 || c.rt_sigma_rel < 0.0) {
    throw ValidationError("noise parameters must be non-negative");
  }
  if (c.regions.empty()) throw ValidationError("at least one region is required");
  std::set<std::string> ids;
  for (const auto& r : c.regions) {
    if (!ids.insert(r.id).second) throw ValidationError("duplicate region id " + r.id);
    if (!(r.line_rating > 0.0)) throw ValidationError("region " + r.id + ": line_rating <= 0");
  }
  if (!(c.forecast.threshold > 0.0)) throw ValidationError("forecast.threshold must be positive");
  if (c.solver.node_limit == 0) throw ValidationError("solver.node_limit must be positive");
}

std::vector<RegionConfig> expand_regions(const SimConfig& c, std::size_t horizon) {
  std::vector<RegionConfig> out;
  std::size_t next = 0;
  for (const auto& spec : c.regions) {
    RegionConfig r;
    r.id = spec.id;
    r.line_rating_mw = spec.line_rating;
    r.baseload_mw = expand_profile(spec.baseload, horizon, "region " + spec.id + " baseload");
    r.pv_mw = expand_profile(spec.pv, horizon, "region " + spec.id + " pv");
    for (std::size_t g = 0; g < spec.groups; ++g) r.groups.push_back(next++);
    validate_region(r, horizon);
    out.push_back(std::move(r));
  }
  return out;
}

std::filesystem::path fleet_file(const SimConfig& c, std::size_t group) {
  return c.fleet_dir / ("group_" + std::to_string(group) + ".csv");
}

}  // namespace pbsim
