#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace pbsim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind : std::uint8_t { kSurplus, kShortage, kEnergy, kBinary, kOther };

// Links a column back to the simulation: ISP index and scenario (-1 = shared).
struct VarTag {
  VarKind kind = VarKind::kOther;
  std::size_t isp = 0;
  int scenario = -1;
};

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  double obj = 0.0;
  bool binary = false;
  VarTag tag;
};

// lo <= sum(coef * x) <= hi; equality when lo == hi.
struct Row {
  std::string name;
  std::vector<std::pair<int, double>> terms;
  double lo = -kInf;
  double hi = kInf;
};

// Maximization model. Binaries carry bounds within [0, 1].
class MilpModel {
 public:
  int add_variable(std::string name, double lb, double ub, double obj, bool binary = false,
                   VarTag tag = {});
  int add_row(std::string name, std::vector<std::pair<int, double>> terms, double lo, double hi);

  const std::vector<Variable>& variables() const noexcept { return vars_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  std::vector<Variable>& variables() noexcept { return vars_; }

  // Constant added to every objective value (not optimized).
  double objective_offset = 0.0;

  double objective(const std::vector<double>& x) const;
  // Largest bound or row violation of x.
  double max_violation(const std::vector<double>& x) const;
  // Throws std::invalid_argument on dangling indices or inverted bounds.
  void validate() const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
};

enum class LpStatus : std::uint8_t { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;  // includes objective_offset
  std::size_t iterations = 0;
  // Rows whose phase-one artificial stayed positive.
  std::vector<int> infeasible_rows;
};

// Dense bounded-variable two-phase primal simplex. Binaries are relaxed to
// their bounds. `lb`/`ub` replace the column bounds when non-empty.
LpResult solve_lp(const MilpModel& model, const std::vector<double>& lb = {},
                  const std::vector<double>& ub = {});

struct MilpOptions {
  double gap_tol = 1e-6;  // relative
  double time_limit_s = 60.0;
  std::size_t node_limit = 1'000'000;
  double integrality_tol = 1e-6;
};

enum class MilpStatus : std::uint8_t { kOptimal, kSuboptimal, kInfeasible, kUnbounded, kNoSolution };

struct MilpResult {
  MilpStatus status = MilpStatus::kNoSolution;
  std::vector<double> x;
  double objective = 0.0;
  double bound = 0.0;  // proven upper bound on the optimum
  std::size_t nodes = 0;
  std::vector<std::string> certificate;  // violated rows when infeasible
};

// Best-first branch and bound on the most fractional binary.
MilpResult solve_milp(const MilpModel& model, const MilpOptions& options = {});

// CPLEX LP text format. Ranged rows are split into a pair of inequalities.
void write_lp(std::ostream& out, const MilpModel& model);

}  // namespace pbsim
