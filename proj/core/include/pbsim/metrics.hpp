#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pbsim/grid.hpp"
#include "pbsim/settlement.hpp"

namespace pbsim {

struct CongestionStats {
  std::size_t isps = 0;
  std::size_t days = 0;
  std::size_t weeks = 0;  // floor(day / 7) from the simulation start
  double hours = 0.0;     // 0.25 per ISP
  friend bool operator==(const CongestionStats&, const CongestionStats&) = default;
};

// ISPs where any of the traces exceeds `limit`, with the days and weeks that
// contain at least one of them.
CongestionStats congestion_frequency(const std::vector<LoadingTrace>& traces, double limit = 1.0);
CongestionStats congestion_frequency(const std::vector<double>& loading, double limit = 1.0);

// Half away from zero at `decimals` digits.
double round_half_away(double x, int decimals);

// (value - baseline) / |baseline| in percent, rounded to `decimals`.
double percent_change(double baseline, double value, int decimals = 1);

struct BenefitRow {
  std::string label;
  double benefit = 0.0;
  std::optional<double> delta_pct;  // empty without a baseline
};

struct CaseBenefit {
  std::string label;
  double benefit = 0.0;
};

// Rows in input order; deltas against `baseline_label` when present.
std::vector<BenefitRow> benefit_summary(const std::vector<CaseBenefit>& cases,
                                        const std::string& baseline_label = "sp_none");

// Everything a report needs from one case directory.
struct CaseReport {
  std::string label;
  double benefit = 0.0;
  std::vector<LoadingTrace> loading;
  std::vector<SettlementRecord> ledger;
};

CaseReport load_case_report(const std::filesystem::path& case_dir);

// Case directories under `root` (those holding summary.json), sorted by name.
std::vector<CaseReport> load_case_reports(const std::filesystem::path& root);

enum class ReportFormat { kCsv, kSvg };
ReportFormat report_format_from_string(const std::string& text);

// benefit_summary, congestion_stats, loading_trace and deviation_scatter as
// .csv or .svg. Each SVG embeds the matching CSV text verbatim in its
// <metadata> block.
void emit_report(const std::vector<CaseReport>& cases, ReportFormat format,
                 const std::filesystem::path& out_dir);

}  // namespace pbsim
