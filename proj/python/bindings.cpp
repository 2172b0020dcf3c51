#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "cityaccess/allocation.hpp"
#include "cityaccess/emissions.hpp"
#include "cityaccess/errors.hpp"
#include "cityaccess/ledger.hpp"
#include "cityaccess/matchmaking.hpp"
#include "cityaccess/simulator.hpp"

namespace py = pybind11;
using namespace cityaccess;

namespace {

emissions::Species species_from(const std::string& s) {
  if (s == "pm25") return emissions::Species::kPm25;
  if (s == "pm10") return emissions::Species::kPm10;
  throw InvalidInput("species must be pm25 or pm10");
}

emissions::Horizon horizon_from(const std::string& s) {
  if (s == "annual") return emissions::Horizon::kAnnual;
  if (s == "daily") return emissions::Horizon::kDaily;
  throw InvalidInput("horizon must be annual or daily");
}

py::dict run_scenario_py(const std::string& config_json) {
  const auto result = sim::run_scenario(sim::parse_config(config_json));
  py::dict metrics;
  std::vector<std::int64_t> day, granted, seated, forfeited;
  std::vector<double> gamma, occupancy, pm;
  for (const auto& m : result.metrics) {
    day.push_back(m.day);
    granted.push_back(m.granted);
    gamma.push_back(m.gamma);
    occupancy.push_back(m.mean_occupancy);
    seated.push_back(m.seated_passengers);
    forfeited.push_back(m.tokens_forfeited);
    pm.push_back(m.pm_ug_m3);
  }
  metrics["day"] = day;
  metrics["granted"] = granted;
  metrics["gamma"] = gamma;
  metrics["mean_occupancy"] = occupancy;
  metrics["seated_passengers"] = seated;
  metrics["tokens_forfeited"] = forfeited;
  metrics["pm_ug_m3"] = pm;

  std::vector<double> drivers, passengers;
  for (const auto& a : result.drivers) drivers.push_back(a.frequency);
  for (const auto& a : result.passengers) passengers.push_back(a.frequency);
  py::dict out;
  out["metrics"] = metrics;
  out["driver_frequency"] = drivers;
  out["passenger_frequency"] = passengers;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Feedback access control, ride-sharing bonds and tyre PM box model";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<ledger::LedgerError>(m, "LedgerError", PyExc_RuntimeError);

  // allocation
  py::class_<allocation::DriverRecord>(m, "DriverRecord")
      .def(py::init<>())
      .def(py::init([](std::uint32_t id, double x_avg, double cost_weight, int capacity,
                       int occupancy) {
             allocation::DriverRecord r;
             r.id = id;
             r.x_avg = x_avg;
             r.cost_weight = cost_weight;
             r.capacity = capacity;
             r.occupancy_today = occupancy;
             return r;
           }),
           py::arg("id") = 0, py::arg("x_avg") = 1.0, py::arg("cost_weight") = 1.0,
           py::arg("capacity") = 4, py::arg("occupancy_today") = 0)
      .def_readwrite("id", &allocation::DriverRecord::id)
      .def_readwrite("x_current", &allocation::DriverRecord::x_current)
      .def_readwrite("x_avg", &allocation::DriverRecord::x_avg)
      .def_readwrite("cost_weight", &allocation::DriverRecord::cost_weight)
      .def_readwrite("capacity", &allocation::DriverRecord::capacity)
      .def_readwrite("occupancy_today", &allocation::DriverRecord::occupancy_today);

  py::class_<allocation::ControllerState>(m, "ControllerState")
      .def(py::init([](double gamma, double alpha, std::int64_t n, std::int64_t fleet,
                       std::int64_t population) {
             return allocation::ControllerState{gamma, alpha, n, fleet, population};
           }),
           py::arg("gamma"), py::arg("alpha"), py::arg("capacity_n"), py::arg("fleet_size") = 0,
           py::arg("population") = 0)
      .def_readwrite("gamma", &allocation::ControllerState::gamma)
      .def_readwrite("alpha", &allocation::ControllerState::alpha)
      .def_readwrite("capacity_n", &allocation::ControllerState::capacity_n);

  m.def("update_average", &allocation::update_average, py::arg("x_avg"), py::arg("x_new"),
        py::arg("k"));
  m.def(
      "access_probability",
      [](const allocation::DriverRecord& rec, double gamma) {
        return allocation::access_probability(rec, gamma);
      },
      py::arg("record"), py::arg("gamma"));
  m.def("update_gamma", &allocation::update_gamma, py::arg("state"), py::arg("granted_count"));
  m.def(
      "draw_daily_access",
      [](const std::vector<allocation::DriverRecord>& records, double gamma, std::uint64_t seed,
         std::int64_t day) {
        auto g = allocation::draw_daily_access(records, gamma, seed, day);
        return std::vector<int>(g.begin(), g.end());
      },
      py::arg("records"), py::arg("gamma"), py::arg("seed"), py::arg("day"));
  m.def(
      "solve_optimum",
      [](const std::vector<double>& weights, std::int64_t n) {
        return allocation::solve_optimum(weights, n).z_star;
      },
      py::arg("cost_weights"), py::arg("capacity_n"));

  // matchmaking
  py::class_<matchmaking::PassengerRecord>(m, "PassengerRecord")
      .def(py::init([](std::uint32_t id, std::int64_t participating, std::int64_t assigned,
                       std::uint32_t home_point) {
             matchmaking::PassengerRecord p;
             p.id = id;
             p.days_participating = participating;
             p.days_assigned = assigned;
             p.home_point = home_point;
             return p;
           }),
           py::arg("id") = 0, py::arg("days_participating") = 0, py::arg("days_assigned") = 0,
           py::arg("home_point") = 0)
      .def_readwrite("id", &matchmaking::PassengerRecord::id)
      .def_readwrite("days_participating", &matchmaking::PassengerRecord::days_participating)
      .def_readwrite("days_assigned", &matchmaking::PassengerRecord::days_assigned)
      .def_readwrite("days_accessed", &matchmaking::PassengerRecord::days_accessed)
      .def_readwrite("home_point", &matchmaking::PassengerRecord::home_point);
  m.def("has_priority", &matchmaking::has_priority, py::arg("passenger"));
  m.def(
      "assign_passengers",
      [](const std::vector<matchmaking::PassengerRecord>& passengers,
         std::vector<allocation::DriverRecord> cars, std::uint64_t seed, std::int64_t day) {
        Rng rng(seed, StreamTag::kMatchmaking, static_cast<std::uint64_t>(day));
        auto manifest = matchmaking::assign_passengers(passengers, cars, rng, day);
        py::list entries;
        for (const auto& e : manifest.entries) {
          py::list stops;
          for (const auto& s : e.stops) {
            stops.append(py::make_tuple(s.passenger, s.point, s.window.start, s.window.end));
          }
          entries.append(py::make_tuple(e.car, stops));
        }
        return py::make_tuple(entries, cars);
      },
      py::arg("passengers"), py::arg("cars"), py::arg("seed"), py::arg("day"),
      "Returns (entries, cars) where each entry is (car, [(passenger, point, start, end)]).");

  // ledger
  py::class_<ledger::ObserverAttestation>(m, "ObserverAttestation")
      .def_readonly("observer", &ledger::ObserverAttestation::observer)
      .def_readonly("agent", &ledger::ObserverAttestation::agent)
      .def_readonly("point", &ledger::ObserverAttestation::point)
      .def_readonly("tick", &ledger::ObserverAttestation::tick);

  py::class_<ledger::LedgerDag>(m, "LedgerDag")
      .def(py::init<std::uint64_t>(), py::arg("observer_secret") = 0x5eed5eed5eedULL)
      .def("open_account", &ledger::LedgerDag::open_account, py::arg("name"))
      .def("register_observer", &ledger::LedgerDag::register_observer, py::arg("point"))
      .def(
          "genesis",
          [](ledger::LedgerDag& dag,
             const std::vector<std::pair<ledger::AccountId, std::int64_t>>& alloc) {
            dag.genesis(alloc);
          },
          py::arg("allocations"))
      .def("balance", &ledger::LedgerDag::balance, py::arg("account"))
      .def("total_supply", &ledger::LedgerDag::total_supply)
      .def("issuance", &ledger::LedgerDag::issuance)
      .def_property_readonly("system_escrow", &ledger::LedgerDag::system_escrow)
      .def("transaction_count",
           [](const ledger::LedgerDag& dag) { return dag.transactions().size(); })
      .def("audit_ok", [](const ledger::LedgerDag& dag) { return ledger::audit(dag).ok(); });

  m.def("attest_presence", &ledger::attest_presence, py::arg("dag"), py::arg("observer"),
        py::arg("agent"), py::arg("point"), py::arg("tick"));
  m.def(
      "deposit_bond",
      [](ledger::LedgerDag& dag, ledger::AccountId agent, PointId point,
         ledger::ContractId contract, Tick start, Tick end, std::uint64_t seed) {
        Rng rng(seed);
        return ledger::deposit_bond(dag, agent, point, contract, {start, end}, start, rng).id;
      },
      py::arg("dag"), py::arg("agent"), py::arg("point"), py::arg("contract"),
      py::arg("window_start"), py::arg("window_end"), py::arg("seed") = 0);
  m.def(
      "retrieve_bond",
      [](ledger::LedgerDag& dag, ledger::AccountId agent, PointId point,
         ledger::ContractId contract, const ledger::ObserverAttestation& att, Tick start,
         Tick end, std::uint64_t seed) {
        Rng rng(seed);
        return ledger::retrieve_bond(dag, agent, point, contract, att, {start, end}, rng).id;
      },
      py::arg("dag"), py::arg("agent"), py::arg("point"), py::arg("contract"),
      py::arg("attestation"), py::arg("window_start"), py::arg("window_end"),
      py::arg("seed") = 0);
  m.def(
      "forfeit_expired",
      [](ledger::LedgerDag& dag, PointId point, ledger::ContractId contract, Tick now,
         const std::vector<ledger::ObserverAttestation>& present, std::uint64_t seed) {
        Rng rng(seed);
        return ledger::forfeit_expired(dag, point, contract, now, present, rng);
      },
      py::arg("dag"), py::arg("point"), py::arg("contract"), py::arg("now"),
      py::arg("present") = std::vector<ledger::ObserverAttestation>{}, py::arg("seed") = 0);

  // emissions
  m.def(
      "annual_fleet_estimate",
      [](double cars, double kg, double frac) {
        auto e = emissions::annual_fleet_estimate(cars, kg, frac);
        return py::make_tuple(e.kg_per_year, e.kg_per_day);
      },
      py::arg("cars"), py::arg("kg_per_car"), py::arg("airborne_fraction"));
  m.def(
      "dispersion_volume",
      [](double length, double width, double height) {
        return emissions::dispersion_volume({length, width, height, 1.0});
      },
      py::arg("street_length_m"), py::arg("street_width_m") = 10.0,
      py::arg("building_height_m") = 4.0);
  m.def("steady_concentration", &emissions::steady_concentration, py::arg("airborne_kg_per_year"),
        py::arg("volume_m3"), py::arg("air_changes_per_hour") = 1.0);
  m.def(
      "classify_who",
      [](double c, const std::string& species, const std::string& horizon) {
        return std::string(
            emissions::to_string(emissions::classify_who(c, species_from(species),
                                                         horizon_from(horizon))));
      },
      py::arg("concentration"), py::arg("species") = "pm25", py::arg("horizon") = "annual");
  m.def(
      "sweep",
      [](const std::string& axis, double from, double to, int steps, double kg_per_car,
         double cars, double volume, double ach) {
        emissions::SweepSpec spec;
        if (axis == "cars") {
          spec.axis = emissions::SweepAxis::kCars;
        } else if (axis == "volume") {
          spec.axis = emissions::SweepAxis::kVolume;
        } else {
          throw InvalidInput("axis must be cars or volume");
        }
        spec.from = from;
        spec.to = to;
        spec.steps = steps;
        spec.airborne_kg_per_car_year = kg_per_car;
        spec.cars = cars;
        spec.volume_m3 = volume;
        spec.air_changes_per_hour = ach;
        py::list rows;
        for (const auto& p : emissions::sweep(spec)) {
          rows.append(py::make_tuple(p.x, p.concentration,
                                     std::string(emissions::to_string(p.who_class))));
        }
        return rows;
      },
      py::arg("axis"), py::arg("start"), py::arg("stop"), py::arg("steps"),
      py::arg("kg_per_car_airborne") = 0.4, py::arg("cars") = 100000.0,
      py::arg("volume_m3") = 450e6, py::arg("air_changes_per_hour") = 1.0);

  // simulator
  py::class_<sim::Schedule>(m, "Schedule")
      .def_static("constant", &sim::Schedule::constant, py::arg("n"))
      .def_static("ramp", &sim::Schedule::ramp, py::arg("low"), py::arg("high"),
                  py::arg("up_start") = 60, py::arg("up_end") = 100, py::arg("high_end") = 180,
                  py::arg("down_end") = 220)
      .def("at", &sim::Schedule::at, py::arg("day"));
  m.def("n_schedule", &sim::n_schedule, py::arg("day"), py::arg("schedule"));
  m.def("run_scenario", &run_scenario_py, py::arg("config_json"),
        "Runs a scenario given as a JSON string; returns metrics and per-agent frequencies.");
}
