#include "pbsim/milp.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "pbsim/csv.hpp"

namespace pbsim {

int MilpModel::add_variable(std::string name, double lb, double ub, double obj, bool binary,
                            VarTag tag) {
  vars_.push_back({std::move(name), lb, ub, obj, binary, tag});
  return static_cast<int>(vars_.size()) - 1;
}

int MilpModel::add_row(std::string name, std::vector<std::pair<int, double>> terms, double lo,
                       double hi) {
  rows_.push_back({std::move(name), std::move(terms), lo, hi});
  return static_cast<int>(rows_.size()) - 1;
}

double MilpModel::objective(const std::vector<double>& x) const {
  double z = objective_offset;
  for (std::size_t j = 0; j < vars_.size(); ++j) z += vars_[j].obj * x[j];
  return z;
}

double MilpModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max({worst, vars_[j].lb - x[j], x[j] - vars_[j].ub});
  }
  for (const auto& row : rows_) {
    double a = 0.0;
    for (const auto& [j, c] : row.terms) a += c * x[static_cast<std::size_t>(j)];
    worst = std::max({worst, row.lo - a, a - row.hi});
  }
  return worst;
}

void MilpModel::validate() const {
  for (const auto& v : vars_) {
    if (v.lb > v.ub) throw std::invalid_argument("variable " + v.name + " has inverted bounds");
    if (v.binary && (v.lb < 0.0 || v.ub > 1.0)) {
      throw std::invalid_argument("binary " + v.name + " bounds outside [0, 1]");
    }
  }
  for (const auto& row : rows_) {
    if (row.lo > row.hi) throw std::invalid_argument("row " + row.name + " has inverted range");
    for (const auto& [j, c] : row.terms) {
      if (j < 0 || static_cast<std::size_t>(j) >= vars_.size()) {
        throw std::invalid_argument("row " + row.name + " references an undeclared variable");
      }
      (void)c;
    }
  }
}

namespace {

struct Node {
  double bound;
  std::size_t id;
  std::vector<double> lb, ub;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

}  // namespace

MilpResult solve_milp(const MilpModel& model, const MilpOptions& options) {
  model.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto& vars = model.variables();
  MilpResult result;

  std::vector<double> lb(vars.size()), ub(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) {
    lb[j] = vars[j].lb;
    ub[j] = vars[j].ub;
  }

  const LpResult root = solve_lp(model, lb, ub);
  result.nodes = 1;
  if (root.status == LpStatus::kInfeasible) {
    result.status = MilpStatus::kInfeasible;
    for (const int r : root.infeasible_rows) {
      result.certificate.push_back(model.rows()[static_cast<std::size_t>(r)].name);
    }
    return result;
  }
  if (root.status == LpStatus::kUnbounded) {
    result.status = MilpStatus::kUnbounded;
    return result;
  }
  if (root.status != LpStatus::kOptimal) return result;

  bool have_incumbent = false;
  double incumbent = -kInf;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::size_t next_id = 0;

  auto within_gap = [&](double bound) {
    return have_incumbent &&
           bound - incumbent <= options.gap_tol * std::max(1.0, std::abs(incumbent));
  };

  // Processes a solved relaxation: either records an incumbent or branches.
  auto expand = [&](const LpResult& lp, const std::vector<double>& nlb,
                    const std::vector<double>& nub) {
    if (within_gap(lp.objective)) return;
    std::size_t branch = vars.size();
    double best_frac = options.integrality_tol;
    for (std::size_t j = 0; j < vars.size(); ++j) {
      if (!vars[j].binary) continue;
      const double f = lp.x[j] - std::floor(lp.x[j]);
      const double frac = std::min(f, 1.0 - f);
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        branch = j;
      }
    }
    if (branch == vars.size()) {
      if (!have_incumbent || lp.objective > incumbent) {
        have_incumbent = true;
        incumbent = lp.objective;
        result.x = lp.x;
        for (std::size_t j = 0; j < vars.size(); ++j) {
          if (vars[j].binary) result.x[j] = std::round(result.x[j]);
        }
      }
      return;
    }
    for (const double v : {0.0, 1.0}) {
      Node child{lp.objective, next_id++, nlb, nub};
      child.lb[branch] = v;
      child.ub[branch] = v;
      open.push(std::move(child));
    }
  };

  expand(root, lb, ub);
  bool limit_hit = false;
  while (!open.empty()) {
    if (within_gap(open.top().bound)) break;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (result.nodes >= options.node_limit || elapsed > options.time_limit_s) {
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    const LpResult lp = solve_lp(model, node.lb, node.ub);
    ++result.nodes;
    if (lp.status != LpStatus::kOptimal) continue;
    expand(lp, node.lb, node.ub);
  }

  result.bound = open.empty() ? incumbent : std::max(incumbent, open.top().bound);
  if (!have_incumbent) {
    result.status = limit_hit ? MilpStatus::kNoSolution : MilpStatus::kInfeasible;
    return result;
  }
  result.objective = model.objective(result.x);
  result.status = limit_hit && !within_gap(result.bound) ? MilpStatus::kSuboptimal
                                                         : MilpStatus::kOptimal;
  return result;
}

namespace {

std::string lp_name(const std::string& name) {
  std::string out;
  for (const char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "v" + out;
  return out;
}

void write_terms(std::ostream& out, const MilpModel& model,
                 const std::vector<std::pair<int, double>>& terms) {
  bool first = true;
  for (const auto& [j, c] : terms) {
    if (c == 0.0) continue;
    out << (c < 0.0 ? " - " : (first ? " " : " + ")) << csv::format_double(std::abs(c)) << ' '
        << lp_name(model.variables()[static_cast<std::size_t>(j)].name);
    first = false;
  }
  if (first) out << " 0 " << lp_name(model.variables().front().name);
}

}  // namespace

void write_lp(std::ostream& out, const MilpModel& model) {
  out << "\\ objective offset " << csv::format_double(model.objective_offset) << '\n';
  out << "Maximize\n obj:";
  std::vector<std::pair<int, double>> obj;
  for (std::size_t j = 0; j < model.variables().size(); ++j) {
    obj.emplace_back(static_cast<int>(j), model.variables()[j].obj);
  }
  if (model.variables().empty()) {
    out << " 0\nSubject To\nEnd\n";
    return;
  }
  write_terms(out, model, obj);
  out << "\nSubject To\n";
  for (const auto& row : model.rows()) {
    const std::string name = lp_name(row.name);
    if (row.lo == row.hi) {
      out << ' ' << name << ':';
      write_terms(out, model, row.terms);
      out << " = " << csv::format_double(row.lo) << '\n';
      continue;
    }
    if (std::isfinite(row.lo)) {
      out << ' ' << name << (std::isfinite(row.hi) ? "_lo:" : ":");
      write_terms(out, model, row.terms);
      out << " >= " << csv::format_double(row.lo) << '\n';
    }
    if (std::isfinite(row.hi)) {
      out << ' ' << name << (std::isfinite(row.lo) ? "_hi:" : ":");
      write_terms(out, model, row.terms);
      out << " <= " << csv::format_double(row.hi) << '\n';
    }
  }
  out << "Bounds\n";
  for (const auto& v : model.variables()) {
    const std::string name = lp_name(v.name);
    if (!std::isfinite(v.lb) && !std::isfinite(v.ub)) {
      out << ' ' << name << " free\n";
    } else if (v.lb == v.ub) {
      out << ' ' << name << " = " << csv::format_double(v.lb) << '\n';
    } else {
      out << ' ' << (std::isfinite(v.lb) ? csv::format_double(v.lb) : "-inf") << " <= " << name
          << " <= " << (std::isfinite(v.ub) ? csv::format_double(v.ub) : "+inf") << '\n';
    }
  }
  bool any_binary = false;
  for (const auto& v : model.variables()) any_binary = any_binary || v.binary;
  if (any_binary) {
    out << "Binaries\n";
    for (const auto& v : model.variables()) {
      if (v.binary) out << ' ' << lp_name(v.name) << '\n';
    }
  }
  out << "End\n";
}

}  // namespace pbsim
