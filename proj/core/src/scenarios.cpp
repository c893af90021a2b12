#include "pbsim/scenarios.hpp"

#include <fstream>
#include <random>
#include <string>

#include "pbsim/csv.hpp"
#include "pbsim/rng.hpp"
#include "pbsim/types.hpp"

namespace pbsim {
namespace {

std::vector<double> noisy_row(const std::vector<double>& actual, std::size_t t0, std::size_t end,
                              double sigma, Rng& rng) {
  std::vector<double> row(end - t0);
  if (sigma == 0.0) {
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = actual[t0 + k];
    return row;
  }
  std::normal_distribution<double> eps(0.0, sigma);
  row[0] = actual[t0];
  for (std::size_t k = 1; k < row.size(); ++k) row[k] = actual[t0 + k] * (1.0 + eps(rng));
  return row;
}

}  // namespace

PriceScenarioSet da_scenarios(const std::vector<double>& base, std::size_t n, double sigma_rel,
                              std::uint64_t seed) {
  if (n == 0) throw ValidationError("scenario count must be at least 1");
  if (!(sigma_rel >= 0.0)) throw ValidationError("scenario noise must be non-negative");
  PriceScenarioSet set;
  set.kind = ScenarioKind::kDa;
  set.probabilities.assign(n, 1.0 / static_cast<double>(n));
  set.prices.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    Rng rng(derive_seed(seed, {0x6461ull, s}));
    std::normal_distribution<double> eps(0.0, sigma_rel);
    std::vector<double> row(base.size());
    for (std::size_t t = 0; t < base.size(); ++t) {
      row[t] = sigma_rel == 0.0 ? base[t] : base[t] * (1.0 + eps(rng));
    }
    set.prices.push_back(std::move(row));
  }
  return set;
}

PriceScenarioSet rt_fan(const std::vector<double>& actual_up, const std::vector<double>& actual_down,
                        std::size_t t0, std::uint64_t seed, const FanParams& params,
                        std::size_t end) {
  if (actual_up.size() != actual_down.size()) {
    throw ValidationError("upward and downward price series differ in length");
  }
  if (end == 0) end = actual_up.size();
  if (t0 >= end || end > actual_up.size()) {
    throw ValidationError("fan start isp " + std::to_string(t0) + " outside horizon");
  }
  if (params.n_up == 0 || params.n_down == 0) throw ValidationError("empty fan");
  if (!(params.sigma_rel >= 0.0)) throw ValidationError("fan noise must be non-negative");

  std::vector<std::vector<double>> ups, downs;
  for (std::size_t i = 0; i < params.n_up; ++i) {
    Rng rng(derive_seed(seed, {t0, 0x7570ull, i}));
    ups.push_back(noisy_row(actual_up, t0, end, params.sigma_rel, rng));
  }
  for (std::size_t j = 0; j < params.n_down; ++j) {
    Rng rng(derive_seed(seed, {t0, 0x646eull, j}));
    downs.push_back(noisy_row(actual_down, t0, end, params.sigma_rel, rng));
  }

  PriceScenarioSet set;
  set.kind = ScenarioKind::kRtJoint;
  set.t0 = t0;
  const std::size_t n = params.n_up * params.n_down;
  set.probabilities.assign(n, 1.0 / static_cast<double>(n));
  set.prices.reserve(n);
  set.down_prices.reserve(n);
  for (std::size_t i = 0; i < params.n_up; ++i) {
    for (std::size_t j = 0; j < params.n_down; ++j) {
      set.prices.push_back(ups[i]);
      set.down_prices.push_back(downs[j]);
    }
  }
  return set;
}

void write_scenarios(const std::filesystem::path& path, const PriceScenarioSet& set) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  const bool joint = !set.down_prices.empty();
  out << (joint ? "scenario,isp,probability,price,down_price\n" : "scenario,isp,probability,price\n");
  for (std::size_t s = 0; s < set.size(); ++s) {
    for (std::size_t k = 0; k < set.prices[s].size(); ++k) {
      std::vector<std::string> row = {std::to_string(s), std::to_string(set.t0 + k),
                                      csv::format_double(set.probabilities[s]),
                                      csv::format_double(set.prices[s][k])};
      if (joint) row.push_back(csv::format_double(set.down_prices[s][k]));
      csv::write_row(out, row);
    }
  }
}

}  // namespace pbsim
