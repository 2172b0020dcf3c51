#include "cityaccess/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "cityaccess/errors.hpp"

namespace cityaccess::sim {

Schedule::Schedule(std::vector<std::pair<std::int64_t, double>> knots) : knots_(std::move(knots)) {}

Schedule Schedule::constant(std::int64_t n) {
  return Schedule({{0, static_cast<double>(n)}});
}

Schedule Schedule::ramp(std::int64_t low, std::int64_t high, std::int64_t up_start,
                        std::int64_t up_end, std::int64_t high_end, std::int64_t down_end) {
  const auto lo = static_cast<double>(low);
  const auto hi = static_cast<double>(high);
  return Schedule({{up_start, lo}, {up_end, hi}, {high_end, hi}, {down_end, lo}});
}

std::int64_t Schedule::at(std::int64_t day) const {
  if (knots_.empty()) return 0;
  if (day <= knots_.front().first) return std::llround(knots_.front().second);
  if (day >= knots_.back().first) return std::llround(knots_.back().second);
  auto hi = std::upper_bound(knots_.begin(), knots_.end(), day,
                             [](std::int64_t d, const auto& k) { return d < k.first; });
  auto lo = std::prev(hi);
  const double t = static_cast<double>(day - lo->first) / static_cast<double>(hi->first - lo->first);
  return std::llround(lo->second + t * (hi->second - lo->second));
}

std::int64_t Schedule::max() const {
  std::int64_t m = 0;
  for (const auto& k : knots_) m = std::max<std::int64_t>(m, std::llround(k.second));
  return m;
}

std::int64_t Schedule::min() const {
  if (knots_.empty()) return 0;
  std::int64_t m = std::llround(knots_.front().second);
  for (const auto& k : knots_) m = std::min<std::int64_t>(m, std::llround(k.second));
  return m;
}

std::int64_t n_schedule(std::int64_t day, const Schedule& schedule) { return schedule.at(day); }

Simulator::Simulator(ScenarioConfig config)
    : config_(std::move(config)), ledger_rng_(config_.seed, StreamTag::kLedgerTips, 0) {
  config_.validate();
  gamma_ = config_.gamma0;
  drivers_.resize(static_cast<std::size_t>(config_.fleet));
  for (std::size_t i = 0; i < drivers_.size(); ++i) {
    auto& d = drivers_[i];
    d.id = static_cast<allocation::DriverId>(i);
    d.x_current = true;
    d.x_avg = 1.0;
    d.cost_weight = config_.cost_weight(i);
    d.capacity = config_.seat_capacity;
  }
  driver_grants_.assign(drivers_.size(), 0);
  passengers_.resize(static_cast<std::size_t>(config_.passengers));
  for (std::size_t j = 0; j < passengers_.size(); ++j) {
    passengers_[j].id = static_cast<PassengerId>(j);
    passengers_[j].home_point = static_cast<PointId>(j % config_.pickup_points);
  }
  if (config_.ledger != LedgerMode::kOff) setup_ledger();
}

void Simulator::setup_ledger() {
  ledger_ = std::make_unique<ledger::LedgerDag>(config_.seed);
  std::vector<std::pair<ledger::AccountId, std::int64_t>> endowment;
  for (const auto& d : drivers_) {
    const auto a = ledger_->open_account("driver:" + std::to_string(d.id));
    agents_.drivers.push_back(a);
    endowment.emplace_back(a, config_.driver_tokens);
  }
  for (const auto& p : passengers_) {
    const auto a = ledger_->open_account("passenger:" + std::to_string(p.id));
    agents_.passengers.push_back(a);
    endowment.emplace_back(a, config_.passenger_tokens);
  }
  for (std::uint32_t point = 0; point < config_.pickup_points; ++point) {
    ledger_->register_observer(point);
  }
  ledger_->genesis(endowment);
}

DailyMetrics Simulator::step_day() {
  const std::int64_t k = day_;
  const std::int64_t capacity_n = n_schedule(k, config_.schedule);
  const bool ledger_on = ledger_ && config_.ledger_active(k);

  // Eligibility: without the ledger every agent takes part.
  std::vector<std::size_t> car_idx;
  std::vector<std::size_t> pax_idx;
  if (ledger_on) {
    for (std::size_t i = 0; i < drivers_.size(); ++i) {
      if (compliance::eligibility(agents_.drivers[i], compliance::Role::kDriver,
                                  drivers_[i].capacity, *ledger_)) {
        car_idx.push_back(i);
      }
    }
    for (std::size_t j = 0; j < passengers_.size(); ++j) {
      if (compliance::eligibility(agents_.passengers[j], compliance::Role::kPassenger, 1,
                                  *ledger_)) {
        pax_idx.push_back(j);
      }
    }
  }

  // Matchmaking.
  Rng match_rng(config_.seed, StreamTag::kMatchmaking, static_cast<std::uint64_t>(k));
  matchmaking::Manifest manifest;
  if (!ledger_on) {
    manifest = matchmaking::assign_passengers(passengers_, drivers_, match_rng, k, config_.windows);
    matchmaking::record_history(passengers_, manifest);
  } else {
    std::vector<allocation::DriverRecord> cars;
    cars.reserve(car_idx.size());
    for (auto i : car_idx) cars.push_back(drivers_[i]);
    std::vector<matchmaking::PassengerRecord> pax;
    pax.reserve(pax_idx.size());
    for (auto j : pax_idx) pax.push_back(passengers_[j]);
    manifest = matchmaking::assign_passengers(pax, cars, match_rng, k, config_.windows);
    matchmaking::record_history(pax, manifest);
    for (auto& d : drivers_) d.occupancy_today = 0;
    for (std::size_t c = 0; c < cars.size(); ++c) drivers_[car_idx[c]] = cars[c];
    for (std::size_t p = 0; p < pax.size(); ++p) passengers_[pax_idx[p]] = pax[p];
  }
  const auto seated = static_cast<std::int64_t>(manifest.seated());

  // Grant draws.
  std::vector<std::uint8_t> granted;
  if (k == 0) {
    granted.assign(drivers_.size(), 1);
  } else {
    granted = allocation::draw_daily_access(drivers_, gamma_, config_.seed, k,
                                            allocation::CostFamily::quadratic(), config_.threads);
  }

  // Bonds for the granted cars, then access bookkeeping for passengers.
  std::int64_t forfeited = 0;
  for (const auto& entry : manifest.entries) {
    if (!granted[entry.car]) continue;
    std::vector<std::uint8_t> rode(entry.stops.size(), 1);
    if (ledger_on) {
      const ledger::ContractId cid =
          static_cast<ledger::ContractId>(k) * static_cast<ledger::ContractId>(config_.fleet) +
          entry.car + 1;
      Rng settle_rng(config_.seed, StreamTag::kSettlement, static_cast<std::uint64_t>(k),
                     entry.car);
      auto contract = compliance::initiate_contract(entry, cid, k, agents_, *ledger_,
                                                    k * config_.windows.ticks_per_day, ledger_rng_);
      if (contract) {
        for (std::size_t s = 0; s < contract->stops.size(); ++s) {
          rode[s] = contract->stops[s].funded ? 1 : 0;
        }
        drivers_[entry.car].occupancy_today = static_cast<int>(contract->funded_stops());
        auto report = compliance::settle_contract(*contract, config_.behavior, *ledger_, settle_rng);
        forfeited += report.tokens_forfeited();
        if (sink_) sink_(report);
      }
    }
    for (std::size_t s = 0; s < entry.stops.size(); ++s) {
      if (rode[s]) ++passengers_[entry.stops[s].passenger].days_accessed;
    }
  }

  // Controller state.
  std::int64_t granted_count = 0;
  std::int64_t occupancy_sum = 0;
  for (std::size_t i = 0; i < drivers_.size(); ++i) {
    auto& d = drivers_[i];
    d.x_current = granted[i] != 0;
    d.x_avg = allocation::update_average(d.x_avg, d.x_current, k);
    driver_grants_[i] += d.x_current ? 1 : 0;
    granted_count += d.x_current ? 1 : 0;
    occupancy_sum += d.occupancy_today;
  }
  allocation::ControllerState state{gamma_, config_.alpha, capacity_n, config_.fleet,
                                    config_.population};
  gamma_ = allocation::update_gamma(state, granted_count);

  DailyMetrics m;
  m.day = k;
  m.granted = granted_count;
  m.gamma = gamma_;
  m.mean_occupancy = static_cast<double>(occupancy_sum) / static_cast<double>(drivers_.size());
  m.seated_passengers = seated;
  m.tokens_forfeited = forfeited;
  m.pm_ug_m3 = emissions::daily_concentration(granted_count, config_.emission, config_.geometry);
  m.capacity_n = capacity_n;
  ++day_;
  return m;
}

RunResult Simulator::summarize() const {
  RunResult r;
  const auto days = static_cast<double>(std::max<std::int64_t>(day_, 1));
  r.drivers.reserve(drivers_.size());
  for (std::size_t i = 0; i < drivers_.size(); ++i) {
    r.drivers.push_back({drivers_[i].id, compliance::Role::kDriver,
                         static_cast<double>(driver_grants_[i]) / days});
  }
  r.passengers.reserve(passengers_.size());
  for (const auto& p : passengers_) {
    r.passengers.push_back(
        {p.id, compliance::Role::kPassenger, static_cast<double>(p.days_accessed) / days});
  }
  return r;
}

RunResult run_scenario(const ScenarioConfig& config) {
  Simulator sim(config);
  std::vector<DailyMetrics> metrics;
  metrics.reserve(static_cast<std::size_t>(config.days));
  for (std::int64_t d = 0; d < config.days; ++d) metrics.push_back(sim.step_day());
  RunResult r = sim.summarize();
  r.metrics = std::move(metrics);
  return r;
}

void write_metrics_csv(std::ostream& out, std::span<const DailyMetrics> metrics) {
  out << "day,granted,gamma,mean_occupancy,seated_passengers,tokens_forfeited,pm_ug_m3\n";
  const auto old = out.precision(12);
  for (const auto& m : metrics) {
    out << m.day << ',' << m.granted << ',' << m.gamma << ',' << m.mean_occupancy << ','
        << m.seated_passengers << ',' << m.tokens_forfeited << ',' << m.pm_ug_m3 << '\n';
  }
  out.precision(old);
}

void write_summary_csv(std::ostream& out, const RunResult& result) {
  out << "agent_id,role,frequency\n";
  const auto old = out.precision(12);
  for (const auto& a : result.drivers) out << a.id << ",driver," << a.frequency << '\n';
  for (const auto& a : result.passengers) out << a.id << ",passenger," << a.frequency << '\n';
  out.precision(old);
}

}  // namespace cityaccess::sim
