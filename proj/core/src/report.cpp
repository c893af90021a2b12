#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "pbsim/csv.hpp"
#include "pbsim/metrics.hpp"
#include "pbsim/types.hpp"

namespace pbsim {
namespace {

struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv_text() const {
    std::ostringstream out;
    csv::write_row(out, header);
    for (const auto& r : rows) csv::write_row(out, r);
    return out.str();
  }
};

std::string fmt(double v) { return csv::format_double(v); }

TextTable benefit_table(const std::vector<CaseReport>& cases) {
  TextTable t{{"case", "benefit_eur", "delta_pct"}, {}};
  std::vector<CaseBenefit> in;
  for (const auto& c : cases) in.push_back({c.label, c.benefit});
  for (const auto& row : benefit_summary(in)) {
    t.rows.push_back({row.label, fmt(row.benefit), row.delta_pct ? fmt(*row.delta_pct) : ""});
  }
  return t;
}

TextTable congestion_table(const std::vector<CaseReport>& cases) {
  TextTable t{{"case", "region", "isps", "days", "weeks", "hours"}, {}};
  auto add = [&](const std::string& label, const std::string& region, const CongestionStats& s) {
    t.rows.push_back({label, region, std::to_string(s.isps), std::to_string(s.days),
                      std::to_string(s.weeks), fmt(s.hours)});
  };
  for (const auto& c : cases) {
    for (const auto& tr : c.loading) add(c.label, tr.region, congestion_frequency({tr}));
    add(c.label, "all", congestion_frequency(c.loading));
  }
  return t;
}

TextTable loading_table(const std::vector<CaseReport>& cases) {
  TextTable t{{"case", "isp", "region", "flow_mw", "loading", "scheduled_loading", "overload",
               "flagged"},
              {}};
  for (const auto& c : cases) {
    for (const auto& tr : c.loading) {
      for (std::size_t i = 0; i < tr.loading.size(); ++i) {
        t.rows.push_back({c.label, std::to_string(i), tr.region, fmt(tr.flow_mw[i]),
                          fmt(tr.loading[i]), fmt(tr.scheduled_loading[i]),
                          tr.overload[i] ? "true" : "false", tr.flagged[i] ? "true" : "false"});
      }
    }
  }
  return t;
}

TextTable scatter_table(const std::vector<CaseReport>& cases) {
  TextTable t{{"case", "isp", "brp_id", "mechanism", "state", "dev_kwh", "price_eur_mwh"}, {}};
  for (const auto& c : cases) {
    for (const auto& r : c.ledger) {
      if (r.dev_kwh == 0.0) continue;
      t.rows.push_back({c.label, std::to_string(r.isp), std::to_string(r.brp),
                        std::string(to_string(r.mechanism)), std::to_string(to_int(r.state)),
                        fmt(r.dev_kwh), fmt(r.price)});
    }
  }
  return t;
}

// Minimal SVG canvas with a linear data-to-pixel map.
class Svg {
 public:
  static constexpr double kW = 900, kH = 420, kL = 70, kR = 20, kT = 30, kB = 50;

  Svg(std::string title, double x0, double x1, double y0, double y1)
      : title_(std::move(title)), x0_(x0), x1_(x1 > x0 ? x1 : x0 + 1), y0_(y0),
        y1_(y1 > y0 ? y1 : y0 + 1) {}

  double px(double x) const { return kL + (x - x0_) / (x1_ - x0_) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - y0_) / (y1_ - y0_) * (kH - kT - kB); }

  void add(const std::string& element) { body_ << element << "\n"; }

  std::string render(const std::string& payload) const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<metadata><![CDATA[\n" << payload << "]]></metadata>\n";
    out << "<text x=\"" << kL << "\" y=\"18\" font-size=\"14\">" << title_ << "</text>\n";
    out << "<line x1=\"" << kL << "\" y1=\"" << py(y0_) << "\" x2=\"" << kW - kR << "\" y2=\""
        << py(y0_) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"4\" y=\"" << py(y1_) + 4 << "\">" << fmt(y1_) << "</text>\n";
    out << "<text x=\"4\" y=\"" << py(y0_) + 4 << "\">" << fmt(y0_) << "</text>\n";
    out << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  std::string title_;
  double x0_, x1_, y0_, y1_;
  std::ostringstream body_;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string benefit_svg(const std::vector<CaseReport>& cases, const TextTable& table) {
  double lo = 0.0, hi = 0.0;
  for (const auto& c : cases) {
    lo = std::min(lo, c.benefit);
    hi = std::max(hi, c.benefit);
  }
  Svg svg("BRP benefit per case (EUR)", 0.0, static_cast<double>(std::max<std::size_t>(cases.size(), 1)), lo, hi);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const double x = svg.px(i + 0.15), w = svg.px(i + 0.85) - x;
    const double top = svg.py(std::max(cases[i].benefit, 0.0));
    const double bottom = svg.py(std::min(cases[i].benefit, 0.0));
    std::ostringstream e;
    e << "<rect x=\"" << x << "\" y=\"" << top << "\" width=\"" << w << "\" height=\""
      << bottom - top << "\" fill=\"" << color(i) << "\"/>"
      << "<text x=\"" << x << "\" y=\"" << Svg::kH - 30 << "\">" << cases[i].label << "</text>";
    svg.add(e.str());
  }
  return svg.render(table.csv_text());
}

std::string congestion_svg(const std::vector<CaseReport>& cases, const TextTable& table) {
  double hi = 0.0;
  std::vector<double> hours;
  for (const auto& c : cases) {
    hours.push_back(congestion_frequency(c.loading).hours);
    hi = std::max(hi, hours.back());
  }
  Svg svg("Congested hours per case", 0.0, static_cast<double>(std::max<std::size_t>(cases.size(), 1)), 0.0, hi);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const double x = svg.px(i + 0.15), w = svg.px(i + 0.85) - x;
    std::ostringstream e;
    e << "<rect x=\"" << x << "\" y=\"" << svg.py(hours[i]) << "\" width=\"" << w
      << "\" height=\"" << svg.py(0.0) - svg.py(hours[i]) << "\" fill=\"" << color(i) << "\"/>"
      << "<text x=\"" << x << "\" y=\"" << Svg::kH - 30 << "\">" << cases[i].label << "</text>";
    svg.add(e.str());
  }
  return svg.render(table.csv_text());
}

std::string loading_svg(const std::vector<CaseReport>& cases, const TextTable& table) {
  std::size_t n = 0;
  double hi = 1.0;
  for (const auto& c : cases) {
    for (const auto& tr : c.loading) {
      n = std::max(n, tr.loading.size());
      for (const double l : tr.loading) hi = std::max(hi, l);
    }
  }
  Svg svg("Loading at the connection line", 0.0, static_cast<double>(n), 0.0, hi);
  std::size_t series = 0;
  for (const auto& c : cases) {
    for (const auto& tr : c.loading) {
      std::ostringstream e;
      e << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << color(series++) << "\" points=\"";
      for (std::size_t t = 0; t < tr.loading.size(); ++t) {
        e << svg.px(static_cast<double>(t)) << "," << svg.py(tr.loading[t]) << " ";
      }
      e << "\"><title>" << c.label << " " << tr.region << "</title></polyline>";
      svg.add(e.str());
    }
  }
  std::ostringstream limit;
  limit << "<line x1=\"" << svg.px(0) << "\" y1=\"" << svg.py(1.0) << "\" x2=\""
        << svg.px(static_cast<double>(n)) << "\" y2=\"" << svg.py(1.0)
        << "\" stroke=\"red\" stroke-dasharray=\"6,4\"/>";
  svg.add(limit.str());
  return svg.render(table.csv_text());
}

std::string scatter_svg(const std::vector<CaseReport>& cases, const TextTable& table) {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  for (const auto& c : cases) {
    for (const auto& r : c.ledger) {
      if (r.dev_kwh == 0.0) continue;
      x0 = std::min(x0, r.price);
      x1 = std::max(x1, r.price);
      y0 = std::min(y0, r.dev_kwh);
      y1 = std::max(y1, r.dev_kwh);
    }
  }
  Svg svg("Deviation (kWh) against applied price (EUR/MWh)", x0, x1, y0, y1);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    std::ostringstream e;
    for (const auto& r : cases[i].ledger) {
      if (r.dev_kwh == 0.0) continue;
      e << "<circle r=\"2\" cx=\"" << svg.px(r.price) << "\" cy=\"" << svg.py(r.dev_kwh)
        << "\" fill=\"" << color(i) << "\"/>";
    }
    svg.add(e.str());
  }
  return svg.render(table.csv_text());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace

void emit_report(const std::vector<CaseReport>& cases, ReportFormat format,
                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const TextTable benefit = benefit_table(cases);
  const TextTable congestion = congestion_table(cases);
  const TextTable loading = loading_table(cases);
  const TextTable scatter = scatter_table(cases);
  if (format == ReportFormat::kCsv) {
    write_text(out_dir / "benefit_summary.csv", benefit.csv_text());
    write_text(out_dir / "congestion_stats.csv", congestion.csv_text());
    write_text(out_dir / "loading_trace.csv", loading.csv_text());
    write_text(out_dir / "deviation_scatter.csv", scatter.csv_text());
  } else {
    write_text(out_dir / "benefit_summary.svg", benefit_svg(cases, benefit));
    write_text(out_dir / "congestion_stats.svg", congestion_svg(cases, congestion));
    write_text(out_dir / "loading_trace.svg", loading_svg(cases, loading));
    write_text(out_dir / "deviation_scatter.svg", scatter_svg(cases, scatter));
  }
}

}  // namespace pbsim
