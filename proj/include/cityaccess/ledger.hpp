#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cityaccess/matchmaking.hpp"
#include "cityaccess/random.hpp"

namespace cityaccess::ledger {

using AccountId = std::uint32_t;
using TxId = std::uint32_t;
using ObserverId = std::uint32_t;
using ContractId = std::uint64_t;

inline constexpr AccountId kNoAccount = ~AccountId{0};

enum class TxKind : std::uint8_t { kGenesis, kDeposit, kRetrieve, kForfeit };

std::string_view to_string(TxKind kind);

enum class LedgerErrc {
  kUnknownAccount,
  kInsufficientBalance,
  kInvalidAmount,
  kMissingAttestation,
  kInvalidAttestation,
  kAttestationMismatch,
  kNoLiveDeposit,
  kTooEarly,
  kTooLate,
  kNotExpired,
  kObserverNotRegistered,
  kNotEscrow,
  kGenesisState,
};

std::string_view to_string(LedgerErrc code);

class LedgerError : public std::runtime_error {
 public:
  LedgerError(LedgerErrc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  LedgerErrc code() const noexcept { return code_; }

 private:
  LedgerErrc code_;
};

/// Witness statement from a location-bound observer. The signature is a
/// keyed tag over (observer, agent, point, tick) that only the ledger can
/// recompute; it stands in for a real signature scheme.
struct ObserverAttestation {
  ObserverId observer = 0;
  AccountId agent = kNoAccount;
  PointId point = 0;
  Tick tick = 0;
  std::uint64_t signature = 0;
};

struct Transaction {
  TxId id = 0;
  TxKind kind = TxKind::kDeposit;
  AccountId from = kNoAccount;
  AccountId to = kNoAccount;
  AccountId subject = kNoAccount;  // owner of the bond being created or consumed
  std::int64_t amount = 1;
  std::array<TxId, 2> parents{0, 0};
  Tick tick = 0;
  ContractId contract = 0;
  TimeWindow window;  // bond window (Deposit/Retrieve/Forfeit)
  std::optional<ObserverAttestation> attestation;
};

struct Bond {
  AccountId owner = kNoAccount;
  TimeWindow window;
  TxId deposit = 0;
};

/// Append-only permissioned DAG of token transactions.
///
/// Every transaction other than Genesis approves two parents drawn uniformly
/// from the current tips (Genesis twice while fewer than two tips exist), so
/// ids increase along every edge and the graph stays acyclic. Balances are
/// maintained incrementally and can be recomputed from the DAG alone.
class LedgerDag {
 public:
  explicit LedgerDag(std::uint64_t observer_secret = 0x5eed5eed5eedULL);

  // -- accounts ---------------------------------------------------------
  AccountId open_account(std::string name);
  AccountId open_escrow(PointId point);
  AccountId system_escrow() const { return system_escrow_; }
  std::optional<AccountId> find_account(std::string_view name) const;
  const std::string& account_name(AccountId id) const;
  std::size_t account_count() const { return names_.size(); }
  bool is_escrow(AccountId id) const;
  std::optional<PointId> point_of_escrow(AccountId id) const;
  std::optional<AccountId> escrow_of(PointId point) const;

  /// Mints the total issuance. Must precede every other transaction.
  const Transaction& genesis(std::span<const std::pair<AccountId, std::int64_t>> allocations);
  bool has_genesis() const { return !txs_.empty(); }

  // -- observers --------------------------------------------------------
  ObserverId register_observer(PointId point);
  std::optional<ObserverId> observer_at(PointId point) const;
  bool observer_registered_at(ObserverId observer, PointId point) const;
  std::uint64_t sign(ObserverId observer, AccountId agent, PointId point, Tick tick) const;
  bool verify(const ObserverAttestation& att) const;

  // -- state ------------------------------------------------------------
  std::int64_t balance(AccountId id) const;
  const std::vector<std::int64_t>& balances() const { return balances_; }
  std::int64_t issuance() const { return issuance_; }
  std::int64_t total_supply() const;
  const std::vector<Transaction>& transactions() const { return txs_; }
  const std::vector<TxId>& tips() const { return tips_; }
  const std::vector<std::pair<AccountId, std::int64_t>>& genesis_allocations() const {
    return genesis_allocations_;
  }
  std::span<const Bond> live_bonds(AccountId escrow, ContractId contract) const;
  std::size_t live_bond_count() const;

  /// Validates `tx`, picks its parents and applies it. Throws LedgerError on
  /// rejection, leaving the ledger unchanged.
  const Transaction& append_transaction(Transaction tx, Rng& rng);

  // -- audit ------------------------------------------------------------
  /// Kahn's algorithm over parent edges; empty if a cycle exists.
  std::vector<TxId> topological_order() const;
  /// Balances recomputed by replaying the DAG in topological order.
  std::vector<std::int64_t> replay_balances() const;
  /// One `txid,kind,from,to,amount,parent1,parent2,tick` record per line.
  /// Genesis is written as one line (txid 0) per allocation.
  void dump(std::ostream& out) const;

 private:
  using BondKey = std::pair<AccountId, ContractId>;

  void require_account(AccountId id, const char* role) const;
  std::array<TxId, 2> select_parents(Rng& rng) const;
  void attach(Transaction& tx, Rng& rng);
  std::vector<Bond>& bonds_for(AccountId escrow, ContractId contract);

  std::uint64_t secret_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, AccountId> by_name_;
  std::vector<std::int64_t> balances_;
  std::unordered_map<AccountId, PointId> escrow_point_;
  std::unordered_map<PointId, AccountId> point_escrow_;
  std::unordered_map<PointId, ObserverId> observers_;
  std::vector<PointId> observer_points_;
  AccountId system_escrow_;

  std::vector<Transaction> txs_;
  std::vector<std::pair<AccountId, std::int64_t>> genesis_allocations_;
  std::int64_t issuance_ = 0;
  std::vector<TxId> tips_;
  std::vector<std::int64_t> tip_pos_;
  std::map<BondKey, std::vector<Bond>> bonds_;
};

/// Witnessed presence of `agent` at `point` at `tick`. Throws LedgerError if
/// the observer is not the one registered for that point.
ObserverAttestation attest_presence(const LedgerDag& registry, ObserverId observer,
                                    AccountId agent, PointId point, Tick tick);

/// Moves one token from `agent` to the escrow at `point` as a bond for
/// `contract` that can be reclaimed within `window`.
const Transaction& deposit_bond(LedgerDag& dag, AccountId agent, PointId point,
                                ContractId contract, TimeWindow window, Tick now, Rng& rng);

/// Returns the agent's bond. Rejects ticks outside the (inclusive) window
/// with kTooEarly / kTooLate and a missing bond with kNoLiveDeposit.
const Transaction& retrieve_bond(LedgerDag& dag, AccountId agent, PointId point,
                                 ContractId contract, const ObserverAttestation& attestation,
                                 TimeWindow window, Rng& rng);

/// Settles every bond of `contract` at `point` whose window closed before
/// `now`. Tokens go round-robin, in attestation order, to the agents attested
/// present at that point during the bond's window; with nobody present they
/// go to the system escrow. Returns the Forfeit transaction ids.
std::vector<TxId> forfeit_expired(LedgerDag& dag, PointId point, ContractId contract, Tick now,
                                  std::span<const ObserverAttestation> present, Rng& rng);

struct AuditReport {
  bool acyclic = true;
  bool conserved = true;
  bool non_negative = true;
  bool replay_matches = true;
  bool retrievals_authorized = true;
  std::size_t transactions = 0;
  std::vector<std::string> problems;

  bool ok() const {
    return acyclic && conserved && non_negative && replay_matches && retrievals_authorized;
  }
};

AuditReport audit(const LedgerDag& dag);

/// Audit of a dump produced by LedgerDag::dump: parents must precede
/// children, replayed balances must stay non-negative and sum to the Genesis
/// issuance. Attestations are not part of the dump and are not checked.
AuditReport audit_dump(std::istream& in);

}  // namespace cityaccess::ledger
