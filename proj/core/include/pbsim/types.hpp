#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pbsim {

// One imbalance settlement period (ISP) is 15 minutes.
inline constexpr double kIspHours = 0.25;
inline constexpr std::size_t kIspsPerDay = 96;
inline constexpr std::size_t kIspsPerHour = 4;

// Prices are €/MWh, energies kWh; cash = price * energy / kKwhPerMwh.
inline constexpr double kKwhPerMwh = 1000.0;

enum class RegulationState : std::int8_t {
  kLong = -1,     // system surplus, downward regulation
  kBalanced = 0,
  kShort = 1,     // system deficit, upward regulation
  kBoth = 2,      // both directions activated
};

enum class Mechanism : std::uint8_t { kSingle, kTwoPrice, kDualPrice };

enum class Scope : std::uint8_t { kNone, kGlobal, kLocal };

// Error raised for malformed input files (carries the 1-based line number).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Domain rule violated by otherwise well-formed input.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Optimization failed (infeasible model, unbounded relaxation, ...).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RegulationState regulation_state_from_int(int value);
int to_int(RegulationState state) noexcept;

std::string_view to_string(Mechanism mechanism) noexcept;
Mechanism mechanism_from_string(std::string_view text);

std::string_view to_string(Scope scope) noexcept;
Scope scope_from_string(std::string_view text);

}  // namespace pbsim
