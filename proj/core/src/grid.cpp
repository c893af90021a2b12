#include "pbsim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pbsim/csv.hpp"
#include "pbsim/types.hpp"

namespace pbsim {
namespace {

double to_mw(double kwh) { return kwh / kIspHours / kKwhPerMwh; }

double exogenous(const RegionConfig& region, std::size_t t) {
  return region.baseload_mw.at(t) - region.pv_mw.at(t);
}

}  // namespace

void validate_region(const RegionConfig& region, std::size_t horizon) {
  if (!(region.line_rating_mw > 0.0) || !std::isfinite(region.line_rating_mw)) {
    throw ValidationError("region " + region.id + ": line rating must be positive");
  }
  if (region.baseload_mw.size() != horizon || region.pv_mw.size() != horizon) {
    throw ValidationError("region " + region.id + ": baseload/pv length differs from horizon");
  }
}

double connection_flow(const RegionConfig& region, std::size_t t,
                       const std::vector<double>& brp_energies_kwh) {
  double flow = exogenous(region, t);
  for (const double e : brp_energies_kwh) flow += to_mw(e);
  return flow;
}

double loading(double flow_mw, double rating_mw) { return std::abs(flow_mw) / rating_mw; }

double single_price_signal(const MarketSeries& market, std::size_t t) {
  switch (market.reg_state(t)) {
    case RegulationState::kShort:
      return market.lambda_up(t);
    case RegulationState::kLong:
      return market.lambda_down(t);
    default:
      return 0.5 * (market.lambda_up(t) + market.lambda_down(t));
  }
}

ForecastResult dso_congestion_forecast(const RegionConfig& region, std::size_t t,
                                       const std::vector<ScheduleView>& schedules,
                                       double price_signal_at_t, const ForecastOptions& options) {
  ForecastResult out;
  out.t = t;
  const std::size_t horizon = region.baseload_mw.size();
  for (std::size_t ahead = 1; ahead <= 2 && t + ahead < horizon; ++ahead) {
    const std::size_t tau = t + ahead;
    double flow = exogenous(region, tau);
    for (const ScheduleView& s : schedules) {
      const VirtualBattery& vb = *s.vb;
      double e = (*s.e_da)[tau];
      if (options.worst_case) {
        const double planned = (*s.planned_energy)[tau];
        if (price_signal_at_t < 0.0) {
          const double room = std::min(vb.e_max(tau) - e, (vb.e_upper[tau] - planned) / vb.eta);
          e += std::max(0.0, room);
        } else if (price_signal_at_t > 0.0) {
          const double room = std::min(e, (planned - vb.e_lower[tau]) / vb.eta);
          e -= std::max(0.0, room);
        }
      }
      flow += to_mw(e);
    }
    const double l = loading(flow, region.line_rating_mw);
    out.loading.push_back(l);
    out.flag.push_back(l > options.threshold);
  }
  return out;
}

std::vector<bool> congestion_flags(const RegionConfig& region,
                                   const std::vector<ScheduleView>& schedules,
                                   const MarketSeries& market, const ForecastOptions& options) {
  const std::size_t n = market.size();
  std::vector<bool> flags(n, false);
  for (std::size_t t = 0; t + 2 < n; ++t) {
    const ForecastResult f =
        dso_congestion_forecast(region, t, schedules, single_price_signal(market, t), options);
    flags[t + 2] = f.flag.size() == 2 && f.flag[1];
  }
  return flags;
}

LoadingTrace build_loading_trace(const RegionConfig& region,
                                 const std::vector<const std::vector<double>*>& realized,
                                 const std::vector<const std::vector<double>*>& scheduled,
                                 const std::vector<bool>& flags) {
  const std::size_t n = region.baseload_mw.size();
  LoadingTrace tr;
  tr.region = region.id;
  tr.flow_mw.resize(n);
  tr.loading.resize(n);
  tr.scheduled_loading.resize(n);
  tr.overload.resize(n);
  tr.flagged = flags;
  tr.flagged.resize(n, false);
  for (std::size_t t = 0; t < n; ++t) {
    double flow = exogenous(region, t);
    double sched = flow;
    for (const auto* e : realized) flow += to_mw((*e)[t]);
    for (const auto* e : scheduled) sched += to_mw((*e)[t]);
    tr.flow_mw[t] = flow;
    tr.loading[t] = loading(flow, region.line_rating_mw);
    tr.scheduled_loading[t] = loading(sched, region.line_rating_mw);
    tr.overload[t] = is_overload(tr.loading[t]);
  }
  return tr;
}

void write_loading_trace(const std::filesystem::path& path,
                         const std::vector<LoadingTrace>& traces) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "isp,region,flow_mw,loading,scheduled_loading,overload,flagged\n";
  for (const auto& tr : traces) {
    for (std::size_t t = 0; t < tr.flow_mw.size(); ++t) {
      csv::write_row(out, {std::to_string(t), tr.region, csv::format_double(tr.flow_mw[t]),
                           csv::format_double(tr.loading[t]),
                           csv::format_double(tr.scheduled_loading[t]),
                           tr.overload[t] ? "true" : "false", tr.flagged[t] ? "true" : "false"});
    }
  }
}

}  // namespace pbsim
