#include "cityaccess/cli.hpp"

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cityaccess/emissions.hpp"
#include "cityaccess/errors.hpp"
#include "cityaccess/ledger.hpp"
#include "cityaccess/simulator.hpp"

#ifndef CITYACCESS_VERSION
#define CITYACCESS_VERSION "0.0.0"
#endif

namespace cityaccess::cli {

namespace fs = std::filesystem;

std::string version() { return CITYACCESS_VERSION; }

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

emissions::Species parse_species(const std::string& s) {
  if (s == "pm25") return emissions::Species::kPm25;
  if (s == "pm10") return emissions::Species::kPm10;
  throw InvalidInput("species must be pm25 or pm10, got " + s);
}

emissions::Horizon parse_horizon(const std::string& s) {
  if (s == "annual") return emissions::Horizon::kAnnual;
  if (s == "daily") return emissions::Horizon::kDaily;
  throw InvalidInput("horizon must be annual or daily, got " + s);
}

}  // namespace

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  sim::ScenarioConfig config;
  try {
    config = sim::load_config(opts.config);
    if (opts.seed) config.seed = *opts.seed;
    std::error_code ec;
    fs::create_directories(opts.outdir, ec);
    if (ec || !fs::is_directory(opts.outdir)) {
      throw ConfigError("output directory not writable: " + opts.outdir.string());
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    sim::Simulator simulator(config);
    std::ofstream settlements;
    if (config.ledger != sim::LedgerMode::kOff) {
      settlements = open_output(opts.outdir / "settlements.csv");
      compliance::write_settlement_header(settlements);
      simulator.set_settlement_sink([&settlements](const compliance::SettlementReport& r) {
        compliance::write_settlement_rows(settlements, r);
      });
    }
    std::vector<sim::DailyMetrics> metrics;
    metrics.reserve(static_cast<std::size_t>(config.days));
    for (std::int64_t d = 0; d < config.days; ++d) metrics.push_back(simulator.step_day());
    auto result = simulator.summarize();
    result.metrics = std::move(metrics);

    auto metrics_out = open_output(opts.outdir / "metrics.csv");
    sim::write_metrics_csv(metrics_out, result.metrics);
    auto summary_out = open_output(opts.outdir / "summary.csv");
    sim::write_summary_csv(summary_out, result);
    if (opts.dump_dag && simulator.ledger()) {
      auto dag_out = open_output(opts.outdir / "dag.csv");
      simulator.ledger()->dump(dag_out);
    }
    out << "wrote " << result.metrics.size() << " days to " << (opts.outdir / "metrics.csv").string()
        << '\n';
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_pm_estimate(const PmEstimateOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const auto species = parse_species(opts.species);
    const auto horizon = parse_horizon(opts.horizon);
    const auto estimate =
        emissions::annual_fleet_estimate(opts.cars, opts.kg_per_car, opts.airborne_frac);
    const double c = emissions::steady_concentration(estimate.kg_per_year, opts.volume_m3,
                                                     opts.air_changes_per_hour);
    const auto cls = emissions::classify_who(c, species, horizon);
    out << "kg_per_year: " << estimate.kg_per_year << '\n'
        << "kg_per_day: " << estimate.kg_per_day << '\n'
        << "concentration_ug_m3: " << c << '\n'
        << "who_class: " << emissions::to_string(cls) << " (" << opts.species << ' '
        << opts.horizon << " limit " << emissions::WhoLimits::limit(species, horizon)
        << " ug/m3)\n";
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<emissions::SweepPoint> points;
  try {
    emissions::SweepSpec spec;
    if (opts.axis == "cars") {
      spec.axis = emissions::SweepAxis::kCars;
    } else if (opts.axis == "volume") {
      spec.axis = emissions::SweepAxis::kVolume;
    } else {
      throw InvalidInput("axis must be cars or volume, got " + opts.axis);
    }
    spec.from = opts.from;
    spec.to = opts.to;
    spec.steps = opts.steps;
    spec.airborne_kg_per_car_year = opts.kg_per_car_airborne;
    spec.cars = opts.cars;
    spec.volume_m3 = opts.volume_m3;
    spec.air_changes_per_hour = opts.air_changes_per_hour;
    points = emissions::sweep(spec);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    auto csv = open_output(opts.out);
    emissions::write_sweep_csv(csv, points);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  out << "wrote " << points.size() << " rows to " << opts.out.string() << '\n';
  return kExitOk;
}

int cmd_ledger_audit(const AuditOptions& opts, std::ostream& out, std::ostream& err) {
  std::ifstream in(opts.dag);
  if (!in) {
    err << "error: dag dump not found: " << opts.dag.string() << '\n';
    return kExitConfig;
  }
  ledger::AuditReport report;
  try {
    report = ledger::audit_dump(in);
  } catch (const std::exception& e) {
    err << "error: malformed dump: " << e.what() << '\n';
    return kExitConfig;
  }
  out << "transactions: " << report.transactions << '\n'
      << "acyclic: " << (report.acyclic ? "yes" : "no") << '\n'
      << "conserved: " << (report.conserved ? "yes" : "no") << '\n'
      << "non_negative: " << (report.non_negative ? "yes" : "no") << '\n';
  for (const auto& p : report.problems) err << "problem: " << p << '\n';
  return report.ok() ? kExitOk : kExitRuntime;
}

int run(int argc, char** argv) {
  CLI::App app{"Feedback access control and tyre PM simulator"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  SimulateOptions sim_opts;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write metrics/summary CSVs");
  simulate->add_option("--config,-c", sim_opts.config, "Scenario JSON")->required();
  auto* seed_opt = simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--out,-o", sim_opts.outdir, "Output directory");
  simulate->add_flag("--dump-dag", sim_opts.dump_dag, "Also write dag.csv when the ledger is on");

  PmEstimateOptions pm_opts;
  auto* pm = app.add_subcommand("pm-estimate", "Fleet tyre PM budget and box-model concentration");
  pm->add_option("--cars", pm_opts.cars, "Cars changing tyres per year")->required();
  pm->add_option("--kg-per-car", pm_opts.kg_per_car, "Tyre mass lost per car (kg)");
  pm->add_option("--airborne-frac", pm_opts.airborne_frac, "Airborne fraction");
  pm->add_option("--volume-m3", pm_opts.volume_m3, "Dispersion volume (m^3)");
  pm->add_option("--ach", pm_opts.air_changes_per_hour, "Air changes per hour");
  pm->add_option("--species", pm_opts.species, "pm25 or pm10");
  pm->add_option("--horizon", pm_opts.horizon, "annual or daily");

  SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Concentration over car count or volume");
  sweep->add_option("--axis", sweep_opts.axis, "cars or volume")->required();
  sweep->add_option("--from", sweep_opts.from)->required();
  sweep->add_option("--to", sweep_opts.to)->required();
  sweep->add_option("--steps", sweep_opts.steps)->required();
  sweep->add_option("--kg-per-car-airborne", sweep_opts.kg_per_car_airborne,
                    "Airborne kg per car-year");
  sweep->add_option("--cars", sweep_opts.cars, "Fixed car count (volume axis)");
  sweep->add_option("--volume-m3", sweep_opts.volume_m3, "Fixed volume (cars axis)");
  sweep->add_option("--ach", sweep_opts.air_changes_per_hour, "Air changes per hour");
  sweep->add_option("--out,-o", sweep_opts.out, "Output CSV");

  AuditOptions audit_opts;
  auto* audit = app.add_subcommand("ledger-audit", "Check a DAG dump for conservation and order");
  audit->add_option("--dag", audit_opts.dag, "dag.csv written by simulate --dump-dag")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (simulate->parsed()) {
    if (*seed_opt) sim_opts.seed = seed;
    return cmd_simulate(sim_opts, std::cout, std::cerr);
  }
  if (pm->parsed()) return cmd_pm_estimate(pm_opts, std::cout, std::cerr);
  if (sweep->parsed()) return cmd_sweep(sweep_opts, std::cout, std::cerr);
  if (audit->parsed()) return cmd_ledger_audit(audit_opts, std::cout, std::cerr);
  return kExitConfig;
}

}  // namespace cityaccess::cli
