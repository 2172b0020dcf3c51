#include "cityaccess/compliance.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "cityaccess/errors.hpp"

namespace cityaccess::compliance {

double BehaviorModel::show_probability(AccountId agent, Role role) const {
  if (auto it = show_override.find(agent); it != show_override.end()) return it->second;
  return role == Role::kDriver ? driver_show : passenger_show;
}

Tick BehaviorModel::draw_arrival_offset(Rng& rng) const {
  if (lateness.empty()) return 0;
  double u = rng.uniform();
  for (const auto& [offset, p] : lateness) {
    if (u < p) return offset;
    u -= p;
  }
  return lateness.back().first;
}

void BehaviorModel::validate() const {
  auto check = [](double p, const std::string& field) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(field + " must lie in [0, 1], got " + std::to_string(p));
    }
  };
  check(driver_show, "behavior.driver_show");
  check(passenger_show, "behavior.passenger_show");
  for (const auto& [agent, p] : show_override) check(p, "behavior.show_override");
  if (!lateness.empty()) {
    double total = 0.0;
    for (const auto& [offset, p] : lateness) {
      check(p, "behavior.lateness probability");
      if (offset < 0) throw ConfigError("behavior.lateness offsets must be >= 0");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("behavior.lateness probabilities must sum to 1");
    }
  }
}

bool eligibility(AccountId agent, Role role, int capacity, const ledger::LedgerDag& dag) {
  const std::int64_t required = role == Role::kDriver ? capacity : 1;
  return dag.balance(agent) >= required;
}

std::size_t PickupContract::funded_stops() const {
  std::size_t n = 0;
  for (const auto& s : stops) n += s.funded ? 1 : 0;
  return n;
}

int SettlementReport::tokens_forfeited() const {
  int n = 0;
  for (const auto& s : stops) n += s.tokens_forfeited;
  return n;
}

std::optional<PickupContract> initiate_contract(const matchmaking::ManifestEntry& entry,
                                                ContractId id, std::int64_t day,
                                                const AgentDirectory& agents,
                                                ledger::LedgerDag& dag, Tick now, Rng& rng) {
  if (entry.stops.empty()) return std::nullopt;
  PickupContract contract;
  contract.id = id;
  contract.day = day;
  contract.car = entry.car;
  contract.driver_account = agents.drivers.at(entry.car);
  for (const auto& stop : entry.stops) {
    ContractStop cs;
    cs.passenger = stop.passenger;
    cs.passenger_account = agents.passengers.at(stop.passenger);
    cs.point = stop.point;
    cs.window = stop.window;
    dag.register_observer(stop.point);
    cs.funded = dag.balance(contract.driver_account) >= 1 && dag.balance(cs.passenger_account) >= 1;
    if (cs.funded) {
      ledger::deposit_bond(dag, contract.driver_account, cs.point, id, cs.window, now, rng);
      ledger::deposit_bond(dag, cs.passenger_account, cs.point, id, cs.window, now, rng);
      ++contract.driver_deposits;
      ++contract.passenger_deposits;
    }
    contract.stops.push_back(cs);
  }
  return contract;
}

namespace {

// Draws whether `agent` turns up and when; attests and retrieves if the
// arrival falls inside the window. Returns the attestation when present.
std::optional<ledger::ObserverAttestation> play_party(const PickupContract& contract,
                                                      const ContractStop& stop, AccountId agent,
                                                      Role role, const BehaviorModel& behavior,
                                                      ledger::LedgerDag& dag, Rng& rng) {
  const bool shows = rng.bernoulli(behavior.show_probability(agent, role));
  const Tick arrival = stop.window.start + behavior.draw_arrival_offset(rng);
  if (!shows || !stop.window.contains(arrival)) return std::nullopt;
  const auto observer = *dag.observer_at(stop.point);
  auto att = ledger::attest_presence(dag, observer, agent, stop.point, arrival);
  ledger::retrieve_bond(dag, agent, stop.point, contract.id, att, stop.window, rng);
  return att;
}

}  // namespace

SettlementReport settle_contract(PickupContract& contract, const BehaviorModel& behavior,
                                 ledger::LedgerDag& dag, Rng& rng) {
  SettlementReport report;
  report.day = contract.day;
  report.car = contract.car;
  for (const auto& stop : contract.stops) {
    StopOutcome outcome;
    outcome.passenger = stop.passenger;
    outcome.point = stop.point;
    outcome.funded = stop.funded;
    if (!stop.funded) {
      report.stops.push_back(outcome);
      continue;
    }
    std::vector<ledger::ObserverAttestation> present;
    if (auto att = play_party(contract, stop, contract.driver_account, Role::kDriver, behavior,
                              dag, rng)) {
      outcome.driver_showed = true;
      present.push_back(*att);
    }
    if (auto att = play_party(contract, stop, stop.passenger_account, Role::kPassenger, behavior,
                              dag, rng)) {
      outcome.passenger_showed = true;
      present.push_back(*att);
    }
    const auto forfeits =
        ledger::forfeit_expired(dag, stop.point, contract.id, stop.window.end + 1, present, rng);
    outcome.tokens_forfeited = static_cast<int>(forfeits.size());
    report.stops.push_back(outcome);
  }
  contract.status = ContractStatus::kSettled;
  return report;
}

void write_settlement_header(std::ostream& out) {
  out << "day,car,passenger,point,driver_showed,passenger_showed,tokens_forfeited\n";
}

void write_settlement_rows(std::ostream& out, const SettlementReport& report) {
  for (const auto& s : report.stops) {
    if (!s.funded) continue;
    out << report.day << ',' << report.car << ',' << s.passenger << ',' << s.point << ','
        << (s.driver_showed ? 1 : 0) << ',' << (s.passenger_showed ? 1 : 0) << ','
        << s.tokens_forfeited << '\n';
  }
}

}  // namespace cityaccess::compliance
