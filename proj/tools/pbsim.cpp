#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pbsim/config.hpp"
#include "pbsim/market_data.hpp"
#include "pbsim/metrics.hpp"
#include "pbsim/orchestrator.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

int generate_fleet(const std::string& config_path, const std::string& out) {
  const pbsim::SimConfig config = pbsim::load_config(config_path);
  std::size_t days = config.days;
  if (days == 0) days = pbsim::load_case_market(config).days();
  const auto fleets = pbsim::build_fleets(config, days);
  pbsim::write_fleets(out, fleets);
  std::size_t sessions = 0;
  for (const auto& f : fleets) sessions += f.size();
  std::printf("wrote %zu groups, %zu sessions over %zu days to %s\n", fleets.size(), sessions,
              days, out.c_str());
  return 0;
}

int run(const std::string& config_path, const std::string& case_name, const std::string& scope,
        const std::string& out) {
  const auto start = std::chrono::steady_clock::now();
  const pbsim::SimConfig config = pbsim::load_config(config_path);
  const pbsim::CaseSpec spec = pbsim::make_case(case_name, pbsim::scope_from_string(scope));
  const pbsim::CaseInputs inputs = pbsim::load_inputs(config);
  const pbsim::CaseResult result = pbsim::run_case(spec, config, inputs);
  const std::filesystem::path dir = std::filesystem::path(out) / spec.label();
  pbsim::write_case(dir, result, inputs.market);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t overloads = 0;
  for (const auto& tr : result.loading) {
    for (const bool o : tr.overload) overloads += o;
  }
  std::printf("%s: benefit %.2f EUR, %zu overloaded region-ISPs, %zu RT solves (%zu at limit), "
              "%.1f s -> %s\n",
              spec.label().c_str(), result.benefit, overloads, result.solves, result.suboptimal,
              secs, dir.string().c_str());
  return 0;
}

int report(const std::string& in, const std::string& format, const std::string& out) {
  const auto fmt = pbsim::report_format_from_string(format);
  const auto cases = pbsim::load_case_reports(in);
  pbsim::emit_report(cases, fmt, out.empty() ? in : out);
  std::printf("report over %zu cases written to %s\n", cases.size(),
              (out.empty() ? in : out).c_str());
  return 0;
}

// Spike file: {"days", "seed", "baseline": {...}, "spikes": [{"first", "last" | "isps",
// "lambda_down", "state", "lambda_up", "lambda_da"}]}.
int synth_market(const std::string& spec_path, const std::string& out) {
  std::ifstream in(spec_path);
  if (!in) throw pbsim::ValidationError("cannot open " + spec_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw pbsim::ValidationError(spec_path + ": " + e.what());
  }
  pbsim::SyntheticMarketParams params;
  if (j.contains("baseline")) {
    const auto& b = j.at("baseline");
    params.da_mean = b.value("da_mean", params.da_mean);
    params.da_daily_amplitude = b.value("da_daily_amplitude", params.da_daily_amplitude);
    params.da_hourly_noise = b.value("da_hourly_noise", params.da_hourly_noise);
    params.up_spread = b.value("up_spread", params.up_spread);
    params.down_spread = b.value("down_spread", params.down_spread);
    params.spread_noise = b.value("spread_noise", params.spread_noise);
    params.baseline_imbalance_prob = b.value("baseline_imbalance_prob", params.baseline_imbalance_prob);
  }
  std::vector<pbsim::StressSpike> spikes;
  for (const auto& s : j.value("spikes", nlohmann::json::array())) {
    pbsim::StressSpike spike;
    if (s.contains("isps")) {
      spike.isps = s.at("isps").get<std::vector<std::size_t>>();
    } else {
      for (std::size_t t = s.at("first").get<std::size_t>(); t <= s.at("last").get<std::size_t>(); ++t) {
        spike.isps.push_back(t);
      }
    }
    spike.lambda_down = s.value("lambda_down", spike.lambda_down);
    spike.state = pbsim::regulation_state_from_int(s.value("state", -1));
    if (s.contains("lambda_up")) spike.lambda_up = s.at("lambda_up").get<double>();
    if (s.contains("lambda_da")) spike.lambda_da = s.at("lambda_da").get<double>();
    spikes.push_back(std::move(spike));
  }
  const auto series = pbsim::synthesize_stress_series(j.at("days").get<std::size_t>(), spikes,
                                                      j.value("seed", std::uint64_t{1}), params);
  pbsim::write_market_data(out, series);
  std::printf("wrote %zu ISPs to %s\n", series.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive-balancing simulator for BRPs with EV virtual batteries"};
  app.require_subcommand(1);

  std::string config, out, case_name, scope = "none", in, format = "csv", spec;

  auto* gen = app.add_subcommand("generate-fleet", "Generate EV sessions per virtual battery group");
  gen->add_option("--config", config, "Simulation config (JSON)")->required();
  gen->add_option("--out", out, "Output directory")->required();

  auto* runc = app.add_subcommand("run", "Run one case");
  runc->add_option("--config", config, "Simulation config (JSON)")->required();
  runc->add_option("--case", case_name, "Case")
      ->required()
      ->check(CLI::IsMember({"sp", "tp", "dp", "proposed-tp", "proposed-dp"}));
  runc->add_option("--scope", scope, "Congestion scope")
      ->check(CLI::IsMember({"none", "global", "local"}));
  runc->add_option("--out", out, "Output directory; results go to <out>/<case>_<scope>")->required();

  auto* rep = app.add_subcommand("report", "Summarize case directories");
  rep->add_option("--in", in, "Directory holding case directories")->required();
  rep->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "svg"}));
  rep->add_option("--out", out, "Report directory (default: --in)");

  auto* syn = app.add_subcommand("synth-market", "Write a synthetic stress market file");
  syn->add_option("--spec", spec, "Spike specification (JSON)")->required();
  syn->add_option("--out", out, "Market CSV to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) return generate_fleet(config, out);
    if (*runc) return run(config, case_name, scope, out);
    if (*rep) return report(in, format, out);
    if (*syn) return synth_market(spec, out);
  } catch (const pbsim::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const pbsim::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const pbsim::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
