#include "pbsim/types.hpp"

#include <string>

namespace pbsim {

RegulationState regulation_state_from_int(int value) {
  switch (value) {
    case -1: return RegulationState::kLong;
    case 0: return RegulationState::kBalanced;
    case 1: return RegulationState::kShort;
    case 2: return RegulationState::kBoth;
    default: break;
  }
  throw ValidationError("regulation state " + std::to_string(value) + " not in {-1,0,1,2}");
}

int to_int(RegulationState state) noexcept { return static_cast<int>(state); }

std::string_view to_string(Mechanism mechanism) noexcept {
  switch (mechanism) {
    case Mechanism::kSingle: return "single";
    case Mechanism::kTwoPrice: return "two_price";
    case Mechanism::kDualPrice: return "dual_price";
  }
  return "single";
}

Mechanism mechanism_from_string(std::string_view text) {
  if (text == "single" || text == "sp") return Mechanism::kSingle;
  if (text == "two_price" || text == "tp") return Mechanism::kTwoPrice;
  if (text == "dual_price" || text == "dp") return Mechanism::kDualPrice;
  throw ValidationError("unknown mechanism '" + std::string(text) + "'");
}

std::string_view to_string(Scope scope) noexcept {
  switch (scope) {
    case Scope::kNone: return "none";
    case Scope::kGlobal: return "global";
    case Scope::kLocal: return "local";
  }
  return "none";
}

Scope scope_from_string(std::string_view text) {
  if (text == "none") return Scope::kNone;
  if (text == "global") return Scope::kGlobal;
  if (text == "local") return Scope::kLocal;
  throw ValidationError("unknown scope '" + std::string(text) + "'");
}

}  // namespace pbsim
