#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cityaccess/allocation.hpp"
#include "cityaccess/ledger.hpp"
#include "cityaccess/matchmaking.hpp"
#include "cityaccess/random.hpp"

namespace cityaccess::compliance {

using ledger::AccountId;
using ledger::ContractId;

enum class Role { kPassenger, kDriver };

/// How agents behave at pick-up time. Defaults to full compliance.
struct BehaviorModel {
  double driver_show = 1.0;
  double passenger_show = 1.0;
  std::unordered_map<AccountId, double> show_override;  // per-agent probability
  // Arrival offset (ticks after window start) with its probability. Empty
  // means always on time.
  std::vector<std::pair<Tick, double>> lateness;

  double show_probability(AccountId agent, Role role) const;
  Tick draw_arrival_offset(Rng& rng) const;
  /// Throws ConfigError when a probability lies outside [0, 1] or the
  /// lateness weights do not sum to 1.
  void validate() const;
};

/// Ledger accounts of every agent, indexed by driver / passenger id.
struct AgentDirectory {
  std::vector<AccountId> drivers;
  std::vector<AccountId> passengers;
};

/// Enough balance to post tomorrow's bonds: 1 for a passenger, one per seat
/// for a driver.
bool eligibility(AccountId agent, Role role, int capacity, const ledger::LedgerDag& dag);

enum class ContractStatus { kOpen, kSettled };

struct ContractStop {
  PassengerId passenger = 0;
  AccountId passenger_account = ledger::kNoAccount;
  PointId point = 0;
  TimeWindow window;
  bool funded = false;
};

struct PickupContract {
  ContractId id = 0;
  std::int64_t day = 0;
  allocation::DriverId car = 0;
  AccountId driver_account = ledger::kNoAccount;
  std::vector<ContractStop> stops;
  std::size_t driver_deposits = 0;
  std::size_t passenger_deposits = 0;
  ContractStatus status = ContractStatus::kOpen;

  std::size_t funded_stops() const;
};

struct StopOutcome {
  PassengerId passenger = 0;
  PointId point = 0;
  bool funded = false;
  bool driver_showed = false;
  bool passenger_showed = false;
  int tokens_forfeited = 0;
};

struct SettlementReport {
  std::int64_t day = 0;
  allocation::DriverId car = 0;
  std::vector<StopOutcome> stops;

  int tokens_forfeited() const;
};

/// Posts the bonds for one granted car: at every stop the driver and the
/// passenger each deposit one token into that stop's escrow. A stop where
/// either party cannot fund is dropped and the remaining stops proceed.
/// Returns nullopt for an entry without passengers.
std::optional<PickupContract> initiate_contract(const matchmaking::ManifestEntry& entry,
                                                ContractId id, std::int64_t day,
                                                const AgentDirectory& agents,
                                                ledger::LedgerDag& dag, Tick now, Rng& rng);

/// Plays out every funded stop: show/no-show and arrival are drawn for both
/// parties, attested-present parties retrieve their bonds, and once the
/// window closes unclaimed bonds are forfeited to whoever was attested
/// present (the system escrow if nobody was).
SettlementReport settle_contract(PickupContract& contract, const BehaviorModel& behavior,
                                 ledger::LedgerDag& dag, Rng& rng);

/// Header plus one `day,car,passenger,point,driver_showed,passenger_showed,
/// tokens_forfeited` row per funded stop.
void write_settlement_header(std::ostream& out);
void write_settlement_rows(std::ostream& out, const SettlementReport& report);

}  // namespace cityaccess::compliance
