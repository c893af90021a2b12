#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "pbsim/orchestrator.hpp"

using namespace pbsim;

namespace {

SimConfig small_config(double rt_sigma) {
  SimConfig c = parse_config(
      R"({"regions": [{"id": "A", "line_rating": 0.2, "groups": 2, "baseload": [0.1], "pv": [0.0]},
                      {"id": "B", "line_rating": 5.0, "groups": 1, "baseload": [0.1], "pv": [0.0]}],
          "group_size": 15, "threads": 2})");
  c.rt_sigma_rel = rt_sigma;
  return c;
}

CaseInputs small_inputs(const SimConfig& c, MarketSeries market) {
  CaseInputs in{std::move(market), {}, {}};
  in.fleets = build_fleets(c, in.market.days());
  in.regions = expand_regions(c, in.market.size());
  return in;
}

MarketSeries spiky_market() {
  const std::size_t n = 2 * kIspsPerDay;
  std::vector<double> da(n, 60.0), up(n, 90.0), down(n, 30.0);
  std::vector<RegulationState> st(n, RegulationState::kBalanced);
  for (std::size_t t = 78; t < 86; ++t) {
    st[t] = RegulationState::kLong;
    down[t] = -400.0;
  }
  return MarketSeries(da, up, down, st);
}

}  // namespace

TEST_CASE("case names and scopes") {
  CHECK(make_case("sp", Scope::kNone).base == Mechanism::kSingle);
  CHECK(make_case("dp", Scope::kNone).alt == Mechanism::kDualPrice);
  const CaseSpec p = make_case("proposed-tp", Scope::kLocal);
  CHECK(p.base == Mechanism::kSingle);
  CHECK(p.alt == Mechanism::kTwoPrice);
  CHECK(p.label() == "proposed-tp_local");
  CHECK_THROWS_AS(make_case("sp", Scope::kGlobal), ValidationError);
  CHECK_THROWS_AS(make_case("proposed-dp", Scope::kNone), ValidationError);
  CHECK_THROWS_AS(make_case("xp", Scope::kNone), ValidationError);
}

TEST_CASE("mechanism assignment per scope") {
  const std::vector<std::vector<bool>> flags{{false, true, false}, {false, false, false}};
  const auto M1 = Mechanism::kSingle, MD = Mechanism::kDualPrice;
  const auto none = assign_mechanisms(Scope::kNone, M1, MD, flags);
  CHECK(none[0] == std::vector<Mechanism>{M1, M1, M1});
  const auto local = assign_mechanisms(Scope::kLocal, M1, MD, flags);
  CHECK(local[0] == std::vector<Mechanism>{M1, MD, M1});
  CHECK(local[1] == std::vector<Mechanism>{M1, M1, M1});
  const auto global = assign_mechanisms(Scope::kGlobal, M1, MD, flags);
  CHECK(global[0] == std::vector<Mechanism>{M1, MD, M1});
  CHECK(global[1] == std::vector<Mechanism>{M1, MD, M1});
}

TEST_CASE("flat prices without noise leave the DA margin as the only benefit") {
  const SimConfig c = small_config(0.0);
  const CaseInputs in = small_inputs(c, testutil::flat_market(2, 60.0, 60.0, 60.0));
  const CaseResult r = run_case(make_case("sp", Scope::kNone), c, in);
  REQUIRE(r.brps.size() == 3);
  double margin = 0.0;
  for (const auto& b : r.brps) {
    margin += b.da_margin;
    CHECK(b.settlement_cash == doctest::Approx(0.0).epsilon(1e-12));
    for (const auto& s : b.trace.steps) CHECK(std::abs(s.dev) <= 1e-9);
  }
  CHECK(margin > 0.0);
  CHECK(r.benefit == doctest::Approx(margin));
}

TEST_CASE("results are consistent with traces and announced mechanisms") {
  const SimConfig c = small_config(0.5);
  const CaseInputs in = small_inputs(c, spiky_market());
  const CaseResult r = run_case(make_case("proposed-dp", Scope::kLocal), c, in);
  double total = 0.0;
  for (std::size_t b = 0; b < r.brps.size(); ++b) {
    const BrpResult& brp = r.brps[b];
    const std::size_t region = brp.region == "A" ? 0 : 1;
    double cash = 0.0, margin = 0.0;
    for (const auto& rec : brp.ledger) {
      cash += rec.cash;
      CHECK(rec.mechanism == r.mechanisms[region][rec.isp]);
      CHECK(rec.mechanism == brp.trace.steps[rec.isp].mechanism);
      CHECK(rec.dev_kwh == brp.trace.steps[rec.isp].dev);
    }
    for (std::size_t t = 0; t < in.market.size(); ++t) {
      margin += brp.eprog.e_da[t] * (c.retail_price - in.market.lambda_da(t)) / 1000.0;
    }
    CHECK(cash == doctest::Approx(brp.settlement_cash).epsilon(1e-12));
    CHECK(margin == doctest::Approx(brp.da_margin).epsilon(1e-12));
    total += brp.benefit();
  }
  CHECK(std::abs(total - r.benefit) <= 1e-6);
  CHECK(r.loading.size() == 2);
  CHECK(r.flags[1] == std::vector<bool>(in.market.size(), false));
}

TEST_CASE("identical specs produce identical files") {
  const SimConfig c = small_config(0.5);
  const CaseInputs in = small_inputs(c, spiky_market());
  testutil::TempDir dir;
  SimConfig serial = c;
  serial.threads = 1;
  write_case(dir / "a", run_case(make_case("proposed-tp", Scope::kGlobal), c, in), in.market);
  write_case(dir / "b", run_case(make_case("proposed-tp", Scope::kGlobal), serial, in), in.market);
  for (const char* f : {"ledger.csv", "loading.csv", "schedule.csv", "summary.json"}) {
    CHECK(testutil::slurp(dir / "a" / f) == testutil::slurp(dir / "b" / f));
    CHECK_FALSE(testutil::slurp(dir / "a" / f).empty());
  }
}

TEST_CASE("groups outside every region are rejected") {
  const SimConfig c = small_config(0.0);
  CaseInputs in = small_inputs(c, testutil::flat_market(2, 60.0, 60.0, 60.0));
  in.regions[1].groups.push_back(0);
  CHECK_THROWS_AS(run_case(make_case("sp", Scope::kNone), c, in), ValidationError);
}

TEST_CASE("missing fleet files point at generate-fleet") {
  testutil::TempDir dir;
  SimConfig c = small_config(0.0);
  write_market_data(dir / "m.csv", testutil::flat_market(2, 60.0, 60.0, 60.0));
  c.market_file = dir / "m.csv";
  c.fleet_dir = dir / "fleet";
  try {
    (void)load_inputs(c);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("generate-fleet") != std::string::npos);
  }
  write_fleets(c.fleet_dir, build_fleets(c, 2));
  CHECK(load_inputs(c).fleets.size() == 3);
}
