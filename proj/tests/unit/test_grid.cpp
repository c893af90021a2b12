#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pbsim/grid.hpp"

using namespace pbsim;

namespace {

RegionConfig region(std::size_t n, double base, double pv, double rating) {
  RegionConfig r;
  r.id = "A";
  r.line_rating_mw = rating;
  r.baseload_mw.assign(n, base);
  r.pv_mw.assign(n, pv);
  return r;
}

// Hand-built battery with `room_kwh` of purchasable energy per ISP.
VirtualBattery open_battery(std::size_t n, double room_kwh) {
  VirtualBattery vb;
  vb.e_upper.assign(n, 1e6);
  vb.e_lower.assign(n, 0.0);
  vb.p_charge_max.assign(n, room_kwh / kIspHours);
  vb.e_arr.assign(n, 0.0);
  vb.e_dep.assign(n, 0.0);
  vb.n_parked.assign(n, 1);
  return vb;
}

}  // namespace

TEST_CASE("connection flow examples") {
  CHECK(connection_flow(region(4, 2.0, 0.0, 1.0), 0, {}) == 2.0);
  CHECK(connection_flow(region(4, 1.0, 3.0, 1.0), 0, {0.0}) == -2.0);
  CHECK(connection_flow(region(4, 0.0, 0.0, 1.0), 0, {500.0}) == doctest::Approx(2.0));
  CHECK(connection_flow(region(4, 0.0, 0.0, 1.0), 0, {200.0, 300.0}) ==
        doctest::Approx(connection_flow(region(4, 0.0, 0.0, 1.0), 0, {500.0})));
}

TEST_CASE("loading examples and the strict overload boundary") {
  CHECK(loading(0.0, 4.0) == 0.0);
  CHECK(loading(-5.0, 4.0) == 1.25);
  CHECK(is_overload(loading(-5.0, 4.0)));
  CHECK(loading(4.0, 4.0) == 1.0);
  CHECK_FALSE(is_overload(loading(4.0, 4.0)));
}

TEST_CASE("forecast flags only above the threshold") {
  const std::size_t n = 8;
  const VirtualBattery vb = open_battery(n, 75.0);
  const std::vector<double> e_da(n, 0.0), planned(n, 0.0);
  const std::vector<ScheduleView> views{{&vb, &e_da, &planned}};

  const ForecastResult low = dso_congestion_forecast(region(n, 0.5, 0.0, 1.0), 2, views, -100.0,
                                                     {.worst_case = false});
  REQUIRE(low.flag.size() == 2);
  CHECK(low.loading[0] == doctest::Approx(0.5));
  CHECK_FALSE(low.flag[0]);

  // Schedule loading 0.9 plus a worst-case shortage of 75 kWh (0.3 MW).
  const ForecastResult high =
      dso_congestion_forecast(region(n, 0.9, 0.0, 1.0), 2, views, -100.0, {});
  CHECK(high.loading[1] == doctest::Approx(1.2));
  CHECK(high.flag[1]);

  // A positive signal pushes consumption down instead.
  const ForecastResult pos = dso_congestion_forecast(region(n, 0.9, 0.0, 1.0), 2, views, 50.0, {});
  CHECK(pos.loading[1] == doctest::Approx(0.9));
  CHECK_FALSE(pos.flag[1]);
}

TEST_CASE("forecast output is truncated at the horizon") {
  const std::size_t n = 4;
  const VirtualBattery vb = open_battery(n, 10.0);
  const std::vector<double> e(n, 0.0);
  const std::vector<ScheduleView> views{{&vb, &e, &e}};
  CHECK(dso_congestion_forecast(region(n, 0.2, 0.0, 1.0), 2, views, 0.0, {}).flag.size() == 1);
  CHECK(dso_congestion_forecast(region(n, 0.2, 0.0, 1.0), 3, views, 0.0, {}).flag.empty());
}

TEST_CASE("flags for ISP t never read prices after t - 2") {
  const std::size_t n = 2 * kIspsPerDay;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> p(-300.0, 300.0);
  std::vector<double> da(n, 50.0), up(n), down(n);
  for (std::size_t t = 0; t < n; ++t) {
    up[t] = p(rng);
    down[t] = p(rng);
  }
  std::vector<RegulationState> st(n, RegulationState::kLong);
  const MarketSeries a(da, up, down, st);
  for (std::size_t t = 50; t < n; ++t) {
    up[t] = -up[t];
    down[t] = -down[t];
  }
  const MarketSeries b(da, up, down, st);
  const VirtualBattery vb = open_battery(n, 60.0);
  const std::vector<double> e_da(n, 10.0);
  const std::vector<double> planned = vb_trajectory(vb, e_da);
  const std::vector<ScheduleView> views{{&vb, &e_da, &planned}};
  const RegionConfig r = region(n, 0.85, 0.0, 1.0);
  const auto fa = congestion_flags(r, views, a, {});
  const auto fb = congestion_flags(r, views, b, {});
  CHECK_FALSE(fa[0]);
  CHECK_FALSE(fa[1]);
  for (std::size_t t = 0; t <= 51; ++t) CHECK(fa[t] == fb[t]);
  bool differs = false;
  for (std::size_t t = 52; t < n; ++t) differs = differs || fa[t] != fb[t];
  CHECK(differs);
}

TEST_CASE("loading trace marks overloads and writes the file layout") {
  const std::size_t n = 3;
  RegionConfig r = region(n, 1.0, 0.0, 1.5);
  const std::vector<double> realized{0.0, 250.0, 100.0}, scheduled{0.0, 0.0, 100.0};
  const LoadingTrace tr = build_loading_trace(r, {&realized}, {&scheduled}, {false, true});
  CHECK(tr.overload == std::vector<bool>{false, true, false});
  CHECK(tr.loading[1] == doctest::Approx(2.0 / 1.5));
  CHECK(tr.scheduled_loading[1] == doctest::Approx(1.0 / 1.5));
  CHECK(tr.flagged == std::vector<bool>{false, true, false});
  testutil::TempDir dir;
  write_loading_trace(dir / "l.csv", {tr});
  const std::string text = testutil::slurp(dir / "l.csv");
  CHECK(text.rfind("isp,region,flow_mw,loading,scheduled_loading,overload,flagged\n0,A,1,", 0) == 0);
  CHECK(text.find("\n1,A,2,") != std::string::npos);
}

TEST_CASE("regions are validated against the horizon") {
  CHECK_THROWS_AS(validate_region(region(4, 1.0, 0.0, 1.0), 5), ValidationError);
  CHECK_THROWS_AS(validate_region(region(4, 1.0, 0.0, 0.0), 4), ValidationError);
  CHECK_NOTHROW(validate_region(region(4, 1.0, 0.0, 2.0), 4));
}
