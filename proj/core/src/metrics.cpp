#include "pbsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pbsim/csv.hpp"
#include "pbsim/types.hpp"

namespace pbsim {
namespace {

CongestionStats stats_from_mask(const std::vector<bool>& over) {
  CongestionStats s;
  std::set<std::size_t> days, weeks;
  for (std::size_t t = 0; t < over.size(); ++t) {
    if (!over[t]) continue;
    ++s.isps;
    days.insert(t / kIspsPerDay);
    weeks.insert(t / kIspsPerDay / 7);
  }
  s.days = days.size();
  s.weeks = weeks.size();
  s.hours = kIspHours * static_cast<double>(s.isps);
  return s;
}

}  // namespace

CongestionStats congestion_frequency(const std::vector<LoadingTrace>& traces, double limit) {
  std::size_t n = 0;
  for (const auto& tr : traces) n = std::max(n, tr.loading.size());
  std::vector<bool> over(n, false);
  for (const auto& tr : traces) {
    for (std::size_t t = 0; t < tr.loading.size(); ++t) {
      if (tr.loading[t] > limit) over[t] = true;
    }
  }
  return stats_from_mask(over);
}

CongestionStats congestion_frequency(const std::vector<double>& loading, double limit) {
  std::vector<bool> over(loading.size());
  for (std::size_t t = 0; t < loading.size(); ++t) over[t] = loading[t] > limit;
  return stats_from_mask(over);
}

double round_half_away(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // Shave representation error so that e.g. 0.15 rounds like the decimal it denotes.
  const double scaled = x * scale;
  const double nudged = scaled + std::copysign(1e-9 * std::max(1.0, std::abs(scaled)), scaled);
  return std::trunc(nudged + std::copysign(0.5, nudged)) / scale;
}

double percent_change(double baseline, double value, int decimals) {
  if (baseline == 0.0) throw ValidationError("percent change against a zero baseline");
  return round_half_away((value - baseline) / std::abs(baseline) * 100.0, decimals);
}

std::vector<BenefitRow> benefit_summary(const std::vector<CaseBenefit>& cases,
                                        const std::string& baseline_label) {
  std::optional<double> base;
  for (const auto& c : cases) {
    if (c.label == baseline_label) base = c.benefit;
  }
  std::vector<BenefitRow> rows;
  for (const auto& c : cases) {
    BenefitRow row{c.label, c.benefit, std::nullopt};
    if (base && *base != 0.0) row.delta_pct = percent_change(*base, c.benefit);
    rows.push_back(row);
  }
  return rows;
}

CaseReport load_case_report(const std::filesystem::path& dir) {
  CaseReport rep;
  {
    std::ifstream in(dir / "summary.json");
    if (!in) throw ValidationError("missing " + (dir / "summary.json").string());
    try {
      const auto j = nlohmann::json::parse(in);
      rep.label = j.at("label").get<std::string>();
      rep.benefit = j.at("benefit_eur").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError((dir / "summary.json").string() + ": " + e.what());
    }
  }

  const csv::Table loading = csv::read(dir / "loading.csv");
  csv::expect_header(loading,
                     {"isp", "region", "flow_mw", "loading", "scheduled_loading", "overload", "flagged"});
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < loading.rows.size(); ++i) {
    const auto& r = loading.rows[i];
    const std::size_t line = loading.line_numbers[i];
    auto [it, added] = index.emplace(r[1], rep.loading.size());
    if (added) {
      rep.loading.emplace_back();
      rep.loading.back().region = r[1];
    }
    LoadingTrace& tr = rep.loading[it->second];
    if (static_cast<std::size_t>(csv::parse_int(r[0], line)) != tr.flow_mw.size()) {
      throw ParseError("line " + std::to_string(line) + ": loading rows out of order", line);
    }
    tr.flow_mw.push_back(csv::parse_double(r[2], line));
    tr.loading.push_back(csv::parse_double(r[3], line));
    tr.scheduled_loading.push_back(csv::parse_double(r[4], line));
    tr.overload.push_back(csv::parse_bool(r[5], line));
    tr.flagged.push_back(csv::parse_bool(r[6], line));
  }

  const csv::Table ledger = csv::read(dir / "ledger.csv");
  csv::expect_header(ledger, {"isp", "brp_id", "mechanism", "state", "dev_kwh", "price_eur_mwh",
                              "cash_eur"});
  for (std::size_t i = 0; i < ledger.rows.size(); ++i) {
    const auto& r = ledger.rows[i];
    const std::size_t line = ledger.line_numbers[i];
    SettlementRecord rec;
    rec.isp = static_cast<std::size_t>(csv::parse_int(r[0], line));
    rec.brp = static_cast<std::size_t>(csv::parse_int(r[1], line));
    rec.mechanism = mechanism_from_string(r[2]);
    rec.state = regulation_state_from_int(static_cast<int>(csv::parse_int(r[3], line)));
    rec.dev_kwh = csv::parse_double(r[4], line);
    rec.price = csv::parse_double(r[5], line);
    rec.cash = csv::parse_double(r[6], line);
    rep.ledger.push_back(rec);
  }
  return rep;
}

std::vector<CaseReport> load_case_reports(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    throw ValidationError("not a directory: " + root.string());
  }
  std::vector<std::filesystem::path> dirs;
  if (std::filesystem::exists(root / "summary.json")) dirs.push_back(root);
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "summary.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<CaseReport> out;
  for (const auto& d : dirs) out.push_back(load_case_report(d));
  return out;
}

ReportFormat report_format_from_string(const std::string& text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "svg") return ReportFormat::kSvg;
  throw ValidationError("unknown report format '" + text + "'");
}

}  // namespace pbsim
