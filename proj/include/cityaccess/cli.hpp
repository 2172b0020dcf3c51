#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace cityaccess::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

std::string version();

struct SimulateOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path outdir = ".";
  bool dump_dag = false;
};

struct PmEstimateOptions {
  double cars = 0.0;
  double kg_per_car = 4.0;
  double airborne_frac = 0.1;
  double volume_m3 = 450e6;
  double air_changes_per_hour = 1.0;
  std::string species = "pm25";
  std::string horizon = "annual";
};

struct SweepOptions {
  std::string axis = "cars";
  double from = 0.0;
  double to = 500000.0;
  int steps = 50;
  double kg_per_car_airborne = 0.4;
  double cars = 100000.0;
  double volume_m3 = 450e6;
  double air_changes_per_hour = 1.0;
  std::filesystem::path out = "sweep.csv";
};

struct AuditOptions {
  std::filesystem::path dag;
};

// Each command reports to `out`/`err` and returns a process exit code.
int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_pm_estimate(const PmEstimateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err);
int cmd_ledger_audit(const AuditOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, char** argv);

}  // namespace cityaccess::cli
