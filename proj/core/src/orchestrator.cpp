#include "pbsim/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <thread>

#include "json.hpp"
#include "pbsim/csv.hpp"
#include "pbsim/rng.hpp"
#include "pbsim/scenarios.hpp"

namespace pbsim {
namespace {

// Runs fn(0..n-1) on up to `threads` workers. The error of the lowest failing
// index is rethrown so failures do not depend on scheduling.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename F>
auto with_context(const std::string& context, F&& f) {
  try {
    return f();
  } catch (const SolverError& e) {
    throw SolverError(context + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(context + ": " + e.what());
  }
}

}  // namespace

CaseSpec make_case(std::string_view name, Scope scope) {
  CaseSpec spec;
  spec.name = std::string(name);
  spec.scope = scope;
  if (name == "sp" || name == "tp" || name == "dp") {
    if (scope != Scope::kNone) {
      throw ValidationError("case " + spec.name + " applies one mechanism everywhere; use --scope none");
    }
    spec.base = name == "sp" ? Mechanism::kSingle
                : name == "tp" ? Mechanism::kTwoPrice
                               : Mechanism::kDualPrice;
    spec.alt = spec.base;
  } else if (name == "proposed-tp" || name == "proposed-dp") {
    if (scope == Scope::kNone) {
      throw ValidationError("case " + spec.name + " needs --scope global or local");
    }
    spec.base = Mechanism::kSingle;
    spec.alt = name == "proposed-tp" ? Mechanism::kTwoPrice : Mechanism::kDualPrice;
  } else {
    throw ValidationError("unknown case '" + spec.name + "'");
  }
  return spec;
}

MarketSeries load_case_market(const SimConfig& config) {
  if (config.market_file.empty()) throw ValidationError("config has no market_file");
  MarketSeries m = load_market_data(config.market_file);
  if (config.days == 0 || config.days == m.days()) return m;
  if (config.days > m.days()) {
    throw ValidationError("config asks for " + std::to_string(config.days) +
                          " days but the market file has " + std::to_string(m.days()));
  }
  const auto n = static_cast<long>(config.days * kIspsPerDay);
  auto cut = [n](const auto& v) { return std::vector(v.begin(), v.begin() + n); };
  return MarketSeries(cut(m.lambda_da()), cut(m.lambda_up()), cut(m.lambda_down()),
                      cut(m.reg_state()));
}

CaseInputs load_inputs(const SimConfig& config) {
  CaseInputs in;
  in.market = load_case_market(config);
  in.regions = expand_regions(config, in.market.size());
  for (std::size_t g = 0; g < config.total_groups(); ++g) {
    const auto path = fleet_file(config, g);
    if (!std::filesystem::exists(path)) {
      throw ValidationError("missing fleet file " + path.string() + " (run generate-fleet)");
    }
    in.fleets.push_back(load_fleet(path));
  }
  return in;
}

std::vector<std::vector<EvSession>> build_fleets(const SimConfig& config, std::size_t days) {
  std::vector<std::vector<EvSession>> fleets;
  for (std::size_t g = 0; g < config.total_groups(); ++g) {
    fleets.push_back(
        generate_fleet(days, config.group_size, config.mobility, derive_seed(config.seeds.fleet, {g})));
  }
  return fleets;
}

void write_fleets(const std::filesystem::path& dir,
                  const std::vector<std::vector<EvSession>>& fleets) {
  std::filesystem::create_directories(dir);
  for (std::size_t g = 0; g < fleets.size(); ++g) {
    write_fleet(dir / ("group_" + std::to_string(g) + ".csv"), fleets[g]);
  }
}

std::vector<std::vector<Mechanism>> assign_mechanisms(
    Scope scope, Mechanism base, Mechanism alt, const std::vector<std::vector<bool>>& flags) {
  std::vector<std::vector<Mechanism>> out;
  const std::size_t n = flags.empty() ? 0 : flags.front().size();
  for (const auto& f : flags) {
    if (f.size() != n) throw ValidationError("flag series differ in length");
    out.emplace_back(n, base);
  }
  for (std::size_t t = 0; t < n; ++t) {
    bool any = false;
    for (const auto& f : flags) any = any || f[t];
    for (std::size_t r = 0; r < flags.size(); ++r) {
      const bool use_alt = scope == Scope::kGlobal ? any : scope == Scope::kLocal && flags[r][t];
      if (use_alt) out[r][t] = alt;
    }
  }
  return out;
}

CaseResult run_case(const CaseSpec& spec, const SimConfig& config, const CaseInputs& inputs) {
  const MarketSeries& market = inputs.market;
  const std::size_t horizon = market.size();
  const std::size_t n_brp = inputs.fleets.size();
  if (n_brp != config.total_groups()) {
    throw ValidationError("fleet count " + std::to_string(n_brp) + " differs from the " +
                          std::to_string(config.total_groups()) + " configured groups");
  }
  std::vector<std::size_t> region_of(n_brp, inputs.regions.size());
  for (std::size_t r = 0; r < inputs.regions.size(); ++r) {
    validate_region(inputs.regions[r], horizon);
    for (const std::size_t g : inputs.regions[r].groups) {
      if (g >= n_brp || region_of[g] != inputs.regions.size()) {
        throw ValidationError("group " + std::to_string(g) + " must belong to exactly one region");
      }
      region_of[g] = r;
    }
  }

  CaseResult res;
  res.spec = spec;
  res.brps.resize(n_brp);

  // Day-ahead stage.
  std::vector<std::vector<double>> planned(n_brp);
  parallel_for(n_brp, config.threads, [&](std::size_t g) {
    BrpResult& b = res.brps[g];
    b.id = g;
    b.region = inputs.regions.at(region_of.at(g)).id;
    with_context("day-ahead stage, brp " + std::to_string(g), [&] {
      b.vb = build_virtual_battery(inputs.fleets[g], horizon, config.eta);
      const PriceScenarioSet da = da_scenarios(market.lambda_da(), config.da_scenarios,
                                               config.da_noise_sigma_rel,
                                               derive_seed(config.seeds.da, {g}));
      b.eprog = solve_da_stage(b.vb, da, config.retail_price);
      return 0;
    });
    planned[g] = vb_trajectory(b.vb, b.eprog.e_da);
    for (std::size_t t = 0; t < horizon; ++t) {
      b.da_margin += b.eprog.e_da[t] * (config.retail_price - market.lambda_da(t)) / kKwhPerMwh;
    }
  });

  // DSO flags from the DA schedules; none of them depends on RT decisions.
  for (const RegionConfig& region : inputs.regions) {
    std::vector<ScheduleView> views;
    for (const std::size_t g : region.groups) {
      views.push_back({&res.brps[g].vb, &res.brps[g].eprog.e_da, &planned[g]});
    }
    res.flags.push_back(spec.scope == Scope::kNone
                            ? std::vector<bool>(horizon, false)
                            : congestion_flags(region, views, market, config.forecast));
  }
  res.mechanisms = assign_mechanisms(spec.scope, spec.base, spec.alt, res.flags);

  // Rolling horizon, one task per BRP window.
  std::vector<MechanismSchedule> schedules(n_brp);
  std::vector<RtOptions> rt_options(n_brp);
  struct Task {
    std::size_t brp;
    Window window;
  };
  std::vector<Task> tasks;
  for (std::size_t g = 0; g < n_brp; ++g) {
    schedules[g] = {res.mechanisms[region_of[g]], spec.base, 1};
    rt_options[g] = {config.fan(), derive_seed(config.seeds.rt, {g}), config.retail_price,
                     config.settlement, config.solver};
    res.brps[g].trace = make_trace(res.brps[g].vb, res.brps[g].eprog);
    for (const Window& w : active_windows(res.brps[g].vb)) tasks.push_back({g, w});
  }
  std::vector<WindowStats> stats(tasks.size());
  parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
    const Task& task = tasks[i];
    BrpResult& b = res.brps[task.brp];
    stats[i] = with_context("real-time stage, brp " + std::to_string(task.brp), [&] {
      return rolling_horizon_window(b.vb, b.eprog, task.window, schedules[task.brp], market,
                                    rt_options[task.brp], b.trace);
    });
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    res.brps[tasks[i].brp].trace.solves += stats[i].solves;
    res.brps[tasks[i].brp].trace.suboptimal += stats[i].suboptimal;
  }

  // Settlement with the mechanism the BRP saw at decision time.
  for (std::size_t g = 0; g < n_brp; ++g) {
    BrpResult& b = res.brps[g];
    b.ledger.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const Mechanism m = schedules[g].announced[t];
      SettlementRecord rec = settle(m, b.trace.steps[t].dev, market.reg_state(t),
                                    market.lambda_up(t), market.lambda_down(t),
                                    market.lambda_da(t), config.settlement);
      rec.isp = t;
      rec.brp = g;
      b.settlement_cash += rec.cash;
      b.ledger.push_back(rec);
    }
    res.benefit += b.benefit();
    res.solves += b.trace.solves;
    res.suboptimal += b.trace.suboptimal;
  }

  for (std::size_t r = 0; r < inputs.regions.size(); ++r) {
    std::vector<std::vector<double>> realized;
    std::vector<const std::vector<double>*> realized_ptr, scheduled_ptr;
    for (const std::size_t g : inputs.regions[r].groups) {
      std::vector<double> e(horizon);
      for (std::size_t t = 0; t < horizon; ++t) e[t] = res.brps[g].trace.steps[t].e_rt;
      realized.push_back(std::move(e));
      scheduled_ptr.push_back(&res.brps[g].eprog.e_da);
    }
    for (const auto& e : realized) realized_ptr.push_back(&e);
    res.loading.push_back(
        build_loading_trace(inputs.regions[r], realized_ptr, scheduled_ptr, res.flags[r]));
  }
  return res;
}

void write_case(const std::filesystem::path& dir, const CaseResult& res,
                const MarketSeries& market) {
  std::filesystem::create_directories(dir);
  std::vector<SettlementRecord> ledger;
  for (const auto& b : res.brps) ledger.insert(ledger.end(), b.ledger.begin(), b.ledger.end());
  write_ledger(dir / "ledger.csv", ledger);
  write_loading_trace(dir / "loading.csv", res.loading);

  {
    std::ofstream out(dir / "schedule.csv");
    if (!out) throw ValidationError("cannot write " + (dir / "schedule.csv").string());
    out << "isp,brp_id,region,mechanism,e_da_kwh,e_rt_kwh,dev_kwh,energy_kwh,e_lower_kwh,"
           "e_upper_kwh,lambda_da,lambda_up,lambda_down,reg_state,solved,optimal\n";
    for (const auto& b : res.brps) {
      for (std::size_t t = 0; t < market.size(); ++t) {
        const RtStep& s = b.trace.steps[t];
        csv::write_row(out, {std::to_string(t), std::to_string(b.id), b.region,
                             std::string(to_string(b.ledger[t].mechanism)),
                             csv::format_double(b.eprog.e_da[t]), csv::format_double(s.e_rt),
                             csv::format_double(s.dev), csv::format_double(b.trace.energy[t]),
                             csv::format_double(b.vb.e_lower[t]),
                             csv::format_double(b.vb.e_upper[t]),
                             csv::format_double(market.lambda_da(t)),
                             csv::format_double(market.lambda_up(t)),
                             csv::format_double(market.lambda_down(t)),
                             std::to_string(to_int(market.reg_state(t))),
                             s.solved ? "true" : "false", s.optimal ? "true" : "false"});
      }
    }
  }

  nlohmann::ordered_json j;
  j["case"] = res.spec.name;
  j["scope"] = std::string(to_string(res.spec.scope));
  j["label"] = res.spec.label();
  j["base_mechanism"] = std::string(to_string(res.spec.base));
  j["alt_mechanism"] = std::string(to_string(res.spec.alt));
  j["isps"] = market.size();
  j["benefit_eur"] = res.benefit;
  j["rt_solves"] = res.solves;
  j["rt_suboptimal"] = res.suboptimal;
  auto brps = nlohmann::ordered_json::array();
  for (const auto& b : res.brps) {
    nlohmann::ordered_json e;
    e["brp_id"] = b.id;
    e["region"] = b.region;
    e["da_margin_eur"] = b.da_margin;
    e["settlement_cash_eur"] = b.settlement_cash;
    e["benefit_eur"] = b.benefit();
    brps.push_back(e);
  }
  j["brps"] = brps;
  auto regions = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < res.loading.size(); ++r) {
    nlohmann::ordered_json e;
    e["region"] = res.loading[r].region;
    e["flagged_isps"] = std::count(res.flags[r].begin(), res.flags[r].end(), true);
    e["overloaded_isps"] =
        std::count(res.loading[r].overload.begin(), res.loading[r].overload.end(), true);
    regions.push_back(e);
  }
  j["regions"] = regions;
  std::ofstream out(dir / "summary.json");
  if (!out) throw ValidationError("cannot write " + (dir / "summary.json").string());
  out << j.dump(2) << "\n";
}

}  // namespace pbsim
