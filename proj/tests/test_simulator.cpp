#include <sstream>
#include <string>

#include "cityaccess/errors.hpp"
#include "cityaccess/simulator.hpp"
#include "doctest.h"

using namespace cityaccess;
using namespace cityaccess::sim;

namespace {

ScenarioConfig small(std::int64_t days = 60) {
  ScenarioConfig c;
  c.population = 1000;
  c.fleet = 50;
  c.passengers = 400;
  c.schedule = Schedule::constant(40);
  c.days = days;
  c.alpha = 0.1;
  return c;
}

std::string metrics_text(const RunResult& r) {
  std::ostringstream out;
  write_metrics_csv(out, r.metrics);
  write_summary_csv(out, r);
  return out.str();
}

std::string config_error(const std::string& json) {
  try {
    parse_config(json);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("ramp schedule") {
  const auto s = Schedule::ramp(50000, 80000);
  CHECK(n_schedule(0, s) == 50000);
  CHECK(n_schedule(59, s) == 50000);
  CHECK(n_schedule(80, s) == 65000);
  CHECK(n_schedule(100, s) == 80000);
  CHECK(n_schedule(150, s) == 80000);
  CHECK(n_schedule(180, s) == 80000);
  CHECK(n_schedule(200, s) == 65000);
  CHECK(n_schedule(220, s) == 50000);
  CHECK(n_schedule(359, s) == 50000);
  CHECK(s.max() == 80000);
  CHECK(s.min() == 50000);
}

TEST_CASE("day zero at Dublin scale grants everyone and zeroes the gain") {
  ScenarioConfig c;
  c.population = 1'100'000;
  c.fleet = 50000;
  c.passengers = 400000;
  c.schedule = Schedule::constant(40000);
  c.alpha = 1e-4;
  Simulator s(c);
  const auto m = s.step_day();
  CHECK(m.granted == 50000);
  CHECK(m.gamma == 0.0);
  CHECK(m.seated_passengers == 200000);
}

TEST_CASE("without passengers nobody is granted after day zero") {
  auto c = small(30);
  c.passengers = 0;
  const auto r = run_scenario(c);
  CHECK(r.metrics[0].granted == 50);
  for (std::size_t d = 1; d < r.metrics.size(); ++d) {
    CHECK(r.metrics[d].granted == 0);
    CHECK(r.metrics[d].mean_occupancy == 0.0);
  }
}

TEST_CASE("granted never exceeds the fleet and metrics are consistent") {
  const auto c = small(200);
  const auto r = run_scenario(c);
  REQUIRE(r.metrics.size() == 200);
  for (const auto& m : r.metrics) {
    CHECK(m.granted <= c.fleet);
    CHECK(m.gamma >= 0.0);
    CHECK(m.capacity_n == 40);
  }
  CHECK(r.drivers.size() == 50);
  CHECK(r.passengers.size() == 400);
}

TEST_CASE("same seed gives identical output; a different seed does not") {
  const auto c = small();
  CHECK(metrics_text(run_scenario(c)) == metrics_text(run_scenario(c)));
  auto other = c;
  other.seed = 43;
  CHECK(metrics_text(run_scenario(other)) != metrics_text(run_scenario(c)));
}

TEST_CASE("output does not depend on the thread count") {
  ScenarioConfig c;
  c.population = 100000;
  c.fleet = 6000;
  c.passengers = 48000;
  c.schedule = Schedule::constant(4800);
  c.alpha = 0.01 * 500.0 / 6000.0;
  c.days = 40;
  const auto one = metrics_text(run_scenario(c));
  c.threads = 4;
  CHECK(metrics_text(run_scenario(c)) == one);
}

TEST_CASE("daily concentration is the box model applied to granted cars") {
  const auto c = small(20);
  const auto r = run_scenario(c);
  for (const auto& m : r.metrics) {
    const double kg = static_cast<double>(m.granted) * c.emission.airborne_kg_per_car_day() *
                      emissions::kDaysPerYear;
    const double expected = emissions::steady_concentration(
        kg, emissions::dispersion_volume(c.geometry), c.geometry.air_changes_per_hour);
    CHECK(m.pm_ug_m3 == expected);
  }
}

TEST_CASE("ledger layer with compliant agents leaves dynamics unchanged") {
  auto off = small(40);
  auto on = off;
  on.ledger = LedgerMode::kFull;
  CHECK(metrics_text(run_scenario(off)) == metrics_text(run_scenario(on)));

  Simulator s(on);
  for (int d = 0; d < 40; ++d) s.step_day();
  REQUIRE(s.ledger());
  CHECK(ledger::audit(*s.ledger()).ok());
  CHECK(s.ledger()->live_bond_count() == 0);
  CHECK(s.ledger()->total_supply() == s.ledger()->issuance());
}

TEST_CASE("defectors forfeit tokens and lose eligibility") {
  auto c = small(120);
  c.ledger = LedgerMode::kFull;
  c.behavior.passenger_show = 0.5;
  c.passenger_tokens = 2;
  std::int64_t forfeited = 0;
  std::int64_t rows = 0;
  Simulator s(c);
  s.set_settlement_sink([&](const compliance::SettlementReport& r) {
    for (const auto& st : r.stops) rows += st.funded ? 1 : 0;
  });
  std::int64_t late_seated = 0;
  for (int d = 0; d < 120; ++d) {
    const auto m = s.step_day();
    forfeited += m.tokens_forfeited;
    if (d >= 100) late_seated += m.seated_passengers;
  }
  CHECK(forfeited > 0);
  CHECK(rows > 0);
  // Passengers who keep missing pick-ups run out of bonds and drop out.
  CHECK(late_seated < 20 * 200);
  CHECK(ledger::audit(*s.ledger()).ok());
}

TEST_CASE("sampled ledger is active on multiples of the period") {
  auto c = small();
  c.ledger = LedgerMode::kSampled;
  c.ledger_every = 7;
  CHECK(c.ledger_active(0));
  CHECK_FALSE(c.ledger_active(3));
  CHECK(c.ledger_active(14));
}

TEST_CASE("config parsing") {
  const auto c = parse_config(R"json({
    "name": "t", "population": 11000, "fleet": 800, "passengers": 6400, "days": 10,
    "alpha": 0.00625, "schedule": {"ramp": {"low": 400, "high": 640}},
    "ledger": "sampled(5)", "seed": 7, "threads": 2,
    "behavior": {"driver_show": 0.9, "lateness": [[0, 0.5], [3, 0.5]]},
    "tokens": {"driver": 10, "passenger": 3},
    "emissions": {"pm25_preset": "half"}, "geometry": {"air_changes_per_hour": 2}
  })json");
  CHECK(c.fleet == 800);
  CHECK(c.schedule.at(80) == 520);
  CHECK(c.ledger == LedgerMode::kSampled);
  CHECK(c.ledger_every == 5);
  CHECK(c.seed == 7);
  CHECK(c.threads == 2);
  CHECK(c.behavior.driver_show == 0.9);
  CHECK(c.behavior.lateness.size() == 2);
  CHECK(c.driver_tokens == 10);
  CHECK(c.emission.pm25_fraction == 0.5);
  CHECK(c.geometry.air_changes_per_hour == 2.0);

  const auto k = parse_config(R"({"schedule": {"knots": [[0, 100], [10, 200]]}})");
  CHECK(k.schedule.at(5) == 150);
  CHECK(parse_config(R"({"schedule": 250})").schedule.at(3) == 250);
}

TEST_CASE("config errors name the offending field") {
  CHECK(config_error(R"({"population": 400, "fleet": 500})").find("population") !=
        std::string::npos);
  CHECK(config_error(R"({"fleet": 300})").find("largest scheduled N") != std::string::npos);
  CHECK(config_error(R"({"flete": 300})").find("'flete'") != std::string::npos);
  CHECK(config_error(R"({"alpha": "fast"})").find("'alpha'") != std::string::npos);
  CHECK(config_error(R"({"ledger": "sometimes"})").find("'ledger'") != std::string::npos);
  CHECK(config_error(R"({"behavior": {"passenger_show": 2}})").find("passenger_show") !=
        std::string::npos);
  CHECK(config_error(R"({"emissions": {"wear_mg_per_km": 20}})").find("wear") !=
        std::string::npos);
  CHECK(config_error("{not json").find("JSON") != std::string::npos);
  CHECK(config_error(R"({"days": 0})").find("days") != std::string::npos);
}

TEST_CASE("missing config file") {
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/desk.json"),
                       doctest::Contains("config not found"), ConfigError);
}

}  // TEST_SUITE
