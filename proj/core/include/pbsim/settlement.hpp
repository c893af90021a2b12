#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "pbsim/types.hpp"

namespace pbsim {

// nl_simplified: mid-price (average of up/down) in states 0 and 2.
// nl_full: dual-price in state 2; the mid-price guards optionally replace
// lambda_up below the mid (state 1) and lambda_down above it (state -1).
enum class SingleVariant : std::uint8_t { kSimplified, kFull };

struct SettlementOptions {
  SingleVariant single_variant = SingleVariant::kSimplified;
  bool mid_guards = false;
};

// Prices (€/MWh) applied to a surplus (dev > 0) and to a shortage (dev < 0).
struct BranchPrices {
  double surplus = 0.0;
  double shortage = 0.0;
  double at(double dev) const noexcept { return dev < 0.0 ? shortage : surplus; }
};

BranchPrices branch_prices(Mechanism mechanism, RegulationState state, double lambda_up,
                           double lambda_down, double lambda_da,
                           const SettlementOptions& options = {});

// Cash is positive when the BRP receives money: price * dev / 1000.
struct SettlementRecord {
  std::size_t isp = 0;
  std::size_t brp = 0;
  Mechanism mechanism = Mechanism::kSingle;
  RegulationState state = RegulationState::kBalanced;
  double dev_kwh = 0.0;
  double price = 0.0;
  double cash = 0.0;
};

SettlementRecord settle_single(double dev, RegulationState state, double lambda_up,
                               double lambda_down,
                               SingleVariant variant = SingleVariant::kSimplified,
                               bool mid_guards = false);
SettlementRecord settle_two_price(double dev, RegulationState state, double lambda_up,
                                  double lambda_down, double lambda_da);
SettlementRecord settle_dual(double dev, double lambda_up, double lambda_down);

SettlementRecord settle(Mechanism mechanism, double dev, RegulationState state, double lambda_up,
                        double lambda_down, double lambda_da,
                        const SettlementOptions& options = {});

// Congested regions settle with the alternative mechanism, all others single.
Mechanism select_mechanism(bool region_congested, Mechanism alt);

void write_ledger(const std::filesystem::path& path, const std::vector<SettlementRecord>& records);

}  // namespace pbsim
