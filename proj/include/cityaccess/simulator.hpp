#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cityaccess/allocation.hpp"
#include "cityaccess/compliance.hpp"
#include "cityaccess/emissions.hpp"
#include "cityaccess/ledger.hpp"
#include "cityaccess/matchmaking.hpp"

namespace cityaccess::sim {

/// Permitted car count per day: piecewise-linear through (day, N) knots,
/// constant before the first knot and after the last.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<std::pair<std::int64_t, double>> knots);

  static Schedule constant(std::int64_t n);
  /// low until `up_start`, linear to high at `up_end`, high through
  /// `high_end`, linear back to low at `down_end`, low afterwards.
  static Schedule ramp(std::int64_t low, std::int64_t high, std::int64_t up_start = 60,
                       std::int64_t up_end = 100, std::int64_t high_end = 180,
                       std::int64_t down_end = 220);

  std::int64_t at(std::int64_t day) const;
  std::int64_t max() const;
  std::int64_t min() const;
  const std::vector<std::pair<std::int64_t, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<std::int64_t, double>> knots_;
};

std::int64_t n_schedule(std::int64_t day, const Schedule& schedule);

enum class LedgerMode { kOff, kFull, kSampled };

struct ScenarioConfig {
  std::int64_t population = 11000;
  std::int64_t fleet = 500;
  std::int64_t passengers = 4000;
  int seat_capacity = 4;
  std::int64_t days = 360;
  double alpha = 0.01;
  double gamma0 = 1.0;
  Schedule schedule = Schedule::constant(400);
  std::vector<double> cost_weights;  // empty => every car weighs 1
  std::uint32_t pickup_points = 64;
  matchmaking::WindowPolicy windows;
  compliance::BehaviorModel behavior;
  std::int64_t driver_tokens = 8;
  std::int64_t passenger_tokens = 2;
  emissions::EmissionParams emission;
  emissions::DispersionGeometry geometry;
  LedgerMode ledger = LedgerMode::kOff;
  std::int64_t ledger_every = 1;  // sampled mode: active when day % ledger_every == 0
  std::uint64_t seed = 42;
  unsigned threads = 1;

  /// Throws ConfigError naming the violated field or invariant.
  void validate() const;
  double cost_weight(std::size_t car) const;
  bool ledger_active(std::int64_t day) const;
};

/// Parses a scenario document. Unknown keys are rejected.
ScenarioConfig parse_config(const std::string& json_text);
/// Throws ConfigError("config not found: ...") if the file is missing.
ScenarioConfig load_config(const std::filesystem::path& path);

struct DailyMetrics {
  std::int64_t day = 0;
  std::int64_t granted = 0;
  double gamma = 0.0;  // after this day's update, i.e. the gain used tomorrow
  double mean_occupancy = 0.0;
  std::int64_t seated_passengers = 0;
  std::int64_t tokens_forfeited = 0;
  double pm_ug_m3 = 0.0;
  std::int64_t capacity_n = 0;
};

struct AgentSummary {
  std::uint32_t id = 0;
  compliance::Role role = compliance::Role::kDriver;
  double frequency = 0.0;
};

struct RunResult {
  std::vector<DailyMetrics> metrics;
  std::vector<AgentSummary> drivers;
  std::vector<AgentSummary> passengers;
};

/// Day-by-day simulation state. Each step runs eligibility, matchmaking,
/// grant draws, bond contracts, the gain update and emission accounting, in
/// that order. Day 0 grants every car.
class Simulator {
 public:
  using SettlementSink = std::function<void(const compliance::SettlementReport&)>;

  explicit Simulator(ScenarioConfig config);

  DailyMetrics step_day();
  RunResult summarize() const;

  std::int64_t day() const { return day_; }
  double gamma() const { return gamma_; }
  const ScenarioConfig& config() const { return config_; }
  const std::vector<allocation::DriverRecord>& drivers() const { return drivers_; }
  const std::vector<matchmaking::PassengerRecord>& passengers() const { return passengers_; }
  const std::vector<std::int64_t>& driver_grants() const { return driver_grants_; }
  const ledger::LedgerDag* ledger() const { return ledger_.get(); }
  const compliance::AgentDirectory& agents() const { return agents_; }

  void set_settlement_sink(SettlementSink sink) { sink_ = std::move(sink); }

 private:
  void setup_ledger();

  ScenarioConfig config_;
  std::int64_t day_ = 0;
  double gamma_ = 1.0;
  std::vector<allocation::DriverRecord> drivers_;
  std::vector<matchmaking::PassengerRecord> passengers_;
  std::vector<std::int64_t> driver_grants_;
  std::unique_ptr<ledger::LedgerDag> ledger_;
  compliance::AgentDirectory agents_;
  Rng ledger_rng_;
  SettlementSink sink_;
};

RunResult run_scenario(const ScenarioConfig& config);

void write_metrics_csv(std::ostream& out, std::span<const DailyMetrics> metrics);
void write_summary_csv(std::ostream& out, const RunResult& result);

}  // namespace cityaccess::sim
