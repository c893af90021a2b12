#include "pbsim/settlement.hpp"

#include <fstream>
#include <string>

#include "pbsim/csv.hpp"

namespace pbsim {
namespace {

void check_state(RegulationState state) {
  switch (state) {
    case RegulationState::kLong:
    case RegulationState::kBalanced:
    case RegulationState::kShort:
    case RegulationState::kBoth:
      return;
  }
  throw ValidationError("invalid regulation state " + std::to_string(to_int(state)));
}

SettlementRecord make_record(Mechanism mechanism, RegulationState state, double dev,
                             const BranchPrices& p) {
  SettlementRecord r;
  r.mechanism = mechanism;
  r.state = state;
  r.dev_kwh = dev;
  r.price = p.at(dev);
  r.cash = r.price * dev / kKwhPerMwh;
  return r;
}

}  // namespace

BranchPrices branch_prices(Mechanism mechanism, RegulationState state, double up, double down,
                           double da, const SettlementOptions& options) {
  check_state(state);
  const double mid = 0.5 * (up + down);
  switch (mechanism) {
    case Mechanism::kSingle: {
      if (state == RegulationState::kBoth && options.single_variant == SingleVariant::kFull) {
        return {down, up};
      }
      double price = mid;
      if (state == RegulationState::kShort) {
        price = options.mid_guards && up < mid ? mid : up;
      } else if (state == RegulationState::kLong) {
        price = options.mid_guards && down > mid ? mid : down;
      }
      return {price, price};
    }
    case Mechanism::kTwoPrice:
      if (state == RegulationState::kShort) return {da, up};
      if (state == RegulationState::kLong) return {down, da};
      return {mid, mid};
    case Mechanism::kDualPrice:
      return {down, up};
  }
  throw ValidationError("unknown mechanism");
}

SettlementRecord settle_single(double dev, RegulationState state, double up, double down,
                               SingleVariant variant, bool mid_guards) {
  const SettlementOptions options{variant, mid_guards};
  return make_record(Mechanism::kSingle, state, dev,
                     branch_prices(Mechanism::kSingle, state, up, down, 0.0, options));
}

SettlementRecord settle_two_price(double dev, RegulationState state, double up, double down,
                                  double da) {
  return make_record(Mechanism::kTwoPrice, state, dev,
                     branch_prices(Mechanism::kTwoPrice, state, up, down, da));
}

SettlementRecord settle_dual(double dev, double up, double down) {
  return make_record(Mechanism::kDualPrice, RegulationState::kBalanced, dev, {down, up});
}

SettlementRecord settle(Mechanism mechanism, double dev, RegulationState state, double up,
                        double down, double da, const SettlementOptions& options) {
  return make_record(mechanism, state, dev,
                     branch_prices(mechanism, state, up, down, da, options));
}

Mechanism select_mechanism(bool region_congested, Mechanism alt) {
  return region_congested ? alt : Mechanism::kSingle;
}

void write_ledger(const std::filesystem::path& path, const std::vector<SettlementRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "isp,brp_id,mechanism,state,dev_kwh,price_eur_mwh,cash_eur\n";
  for (const auto& r : records) {
    csv::write_row(out, {std::to_string(r.isp), std::to_string(r.brp),
                         std::string(to_string(r.mechanism)), std::to_string(to_int(r.state)),
                         csv::format_double(r.dev_kwh), csv::format_double(r.price),
                         csv::format_double(r.cash)});
  }
}

}  // namespace pbsim
