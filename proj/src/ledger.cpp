#include "cityaccess/ledger.hpp"

#include <algorithm>
#include <functional>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

namespace cityaccess::ledger {

std::string_view to_string(TxKind kind) {
  switch (kind) {
    case TxKind::kGenesis: return "Genesis";
    case TxKind::kDeposit: return "Deposit";
    case TxKind::kRetrieve: return "Retrieve";
    case TxKind::kForfeit: return "Forfeit";
  }
  return "?";
}

std::string_view to_string(LedgerErrc code) {
  switch (code) {
    case LedgerErrc::kUnknownAccount: return "unknown-account";
    case LedgerErrc::kInsufficientBalance: return "balance-insufficient";
    case LedgerErrc::kInvalidAmount: return "invalid-amount";
    case LedgerErrc::kMissingAttestation: return "missing-attestation";
    case LedgerErrc::kInvalidAttestation: return "invalid-attestation";
    case LedgerErrc::kAttestationMismatch: return "attestation-mismatch";
    case LedgerErrc::kNoLiveDeposit: return "no-live-deposit";
    case LedgerErrc::kTooEarly: return "too-early";
    case LedgerErrc::kTooLate: return "too-late";
    case LedgerErrc::kNotExpired: return "not-expired";
    case LedgerErrc::kObserverNotRegistered: return "observer-not-registered";
    case LedgerErrc::kNotEscrow: return "not-escrow";
    case LedgerErrc::kGenesisState: return "genesis-state";
  }
  return "?";
}

LedgerDag::LedgerDag(std::uint64_t observer_secret) : secret_(splitmix64(observer_secret)) {
  system_escrow_ = open_account("system");
}

AccountId LedgerDag::open_account(std::string name) {
  if (by_name_.contains(name)) {
    throw std::invalid_argument("account already exists: " + name);
  }
  const auto id = static_cast<AccountId>(names_.size());
  by_name_.emplace(name, id);
  names_.push_back(std::move(name));
  balances_.push_back(0);
  return id;
}

AccountId LedgerDag::open_escrow(PointId point) {
  if (auto it = point_escrow_.find(point); it != point_escrow_.end()) return it->second;
  const AccountId id = open_account("escrow:" + std::to_string(point));
  point_escrow_.emplace(point, id);
  escrow_point_.emplace(id, point);
  return id;
}

std::optional<AccountId> LedgerDag::find_account(std::string_view name) const {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  return std::nullopt;
}

const std::string& LedgerDag::account_name(AccountId id) const {
  require_account(id, "account");
  return names_[id];
}

bool LedgerDag::is_escrow(AccountId id) const { return escrow_point_.contains(id); }

std::optional<PointId> LedgerDag::point_of_escrow(AccountId id) const {
  if (auto it = escrow_point_.find(id); it != escrow_point_.end()) return it->second;
  return std::nullopt;
}

std::optional<AccountId> LedgerDag::escrow_of(PointId point) const {
  if (auto it = point_escrow_.find(point); it != point_escrow_.end()) return it->second;
  return std::nullopt;
}

void LedgerDag::require_account(AccountId id, const char* role) const {
  if (id >= names_.size()) {
    throw LedgerError(LedgerErrc::kUnknownAccount, std::string(role) + " " + std::to_string(id));
  }
}

const Transaction& LedgerDag::genesis(
    std::span<const std::pair<AccountId, std::int64_t>> allocations) {
  if (has_genesis()) throw LedgerError(LedgerErrc::kGenesisState, "genesis already issued");
  std::int64_t total = 0;
  for (const auto& [account, amount] : allocations) {
    require_account(account, "genesis recipient");
    if (amount < 0) throw LedgerError(LedgerErrc::kInvalidAmount, "negative genesis allocation");
    total += amount;
  }
  for (const auto& [account, amount] : allocations) {
    balances_[account] += amount;
    genesis_allocations_.emplace_back(account, amount);
  }
  issuance_ = total;

  Transaction tx;
  tx.id = 0;
  tx.kind = TxKind::kGenesis;
  tx.amount = total;
  txs_.push_back(tx);
  tip_pos_.push_back(0);
  tips_.push_back(0);
  return txs_.back();
}

ObserverId LedgerDag::register_observer(PointId point) {
  if (auto it = observers_.find(point); it != observers_.end()) return it->second;
  const auto id = static_cast<ObserverId>(observer_points_.size());
  observer_points_.push_back(point);
  observers_.emplace(point, id);
  open_escrow(point);
  return id;
}

std::optional<ObserverId> LedgerDag::observer_at(PointId point) const {
  if (auto it = observers_.find(point); it != observers_.end()) return it->second;
  return std::nullopt;
}

bool LedgerDag::observer_registered_at(ObserverId observer, PointId point) const {
  return observer < observer_points_.size() && observer_points_[observer] == point;
}

std::uint64_t LedgerDag::sign(ObserverId observer, AccountId agent, PointId point,
                              Tick tick) const {
  std::uint64_t h = splitmix64(secret_ ^ (0x100000001b3ULL * (observer + 1ULL)));
  h = splitmix64(h ^ agent);
  h = splitmix64(h ^ point);
  return splitmix64(h ^ static_cast<std::uint64_t>(tick));
}

bool LedgerDag::verify(const ObserverAttestation& att) const {
  return observer_registered_at(att.observer, att.point) &&
         att.signature == sign(att.observer, att.agent, att.point, att.tick);
}

std::int64_t LedgerDag::balance(AccountId id) const {
  require_account(id, "account");
  return balances_[id];
}

std::int64_t LedgerDag::total_supply() const {
  std::int64_t sum = 0;
  for (auto b : balances_) sum += b;
  return sum;
}

std::span<const Bond> LedgerDag::live_bonds(AccountId escrow, ContractId contract) const {
  if (auto it = bonds_.find({escrow, contract}); it != bonds_.end()) return it->second;
  return {};
}

std::size_t LedgerDag::live_bond_count() const {
  std::size_t n = 0;
  for (const auto& [key, list] : bonds_) n += list.size();
  return n;
}

std::vector<Bond>& LedgerDag::bonds_for(AccountId escrow, ContractId contract) {
  return bonds_[{escrow, contract}];
}

std::array<TxId, 2> LedgerDag::select_parents(Rng& rng) const {
  if (tips_.size() < 2) return {0, 0};
  const auto n = tips_.size();
  const auto i = static_cast<std::size_t>(rng.below(n));
  auto j = static_cast<std::size_t>(rng.below(n - 1));
  if (j >= i) ++j;
  return {tips_[i], tips_[j]};
}

void LedgerDag::attach(Transaction& tx, Rng& rng) {
  tx.parents = select_parents(rng);
  tx.id = static_cast<TxId>(txs_.size());
  for (TxId parent : tx.parents) {
    const std::int64_t pos = tip_pos_[parent];
    if (pos < 0) continue;
    const TxId moved = tips_.back();
    tips_[static_cast<std::size_t>(pos)] = moved;
    tip_pos_[moved] = pos;
    tips_.pop_back();
    tip_pos_[parent] = -1;
  }
  tip_pos_.push_back(static_cast<std::int64_t>(tips_.size()));
  tips_.push_back(tx.id);
  balances_[tx.from] -= tx.amount;
  balances_[tx.to] += tx.amount;
}

const Transaction& LedgerDag::append_transaction(Transaction tx, Rng& rng) {
  if (!has_genesis()) throw LedgerError(LedgerErrc::kGenesisState, "no genesis yet");
  if (tx.kind == TxKind::kGenesis) {
    throw LedgerError(LedgerErrc::kGenesisState, "genesis can only be issued once");
  }
  require_account(tx.from, "sender");
  require_account(tx.to, "recipient");
  if (tx.amount < 1) throw LedgerError(LedgerErrc::kInvalidAmount, "amount must be >= 1");
  if (tx.kind != TxKind::kDeposit && tx.amount != 1) {
    throw LedgerError(LedgerErrc::kInvalidAmount, "bonds are settled one token at a time");
  }
  if (balances_[tx.from] < tx.amount) {
    throw LedgerError(LedgerErrc::kInsufficientBalance,
                      names_[tx.from] + " holds " + std::to_string(balances_[tx.from]) +
                          ", needs " + std::to_string(tx.amount));
  }

  switch (tx.kind) {
    case TxKind::kDeposit: {
      if (!is_escrow(tx.to)) throw LedgerError(LedgerErrc::kNotEscrow, names_[tx.to]);
      if (is_escrow(tx.from) || tx.from == system_escrow_) {
        throw LedgerError(LedgerErrc::kNotEscrow, "deposits come from agent accounts");
      }
      if (tx.window.start > tx.window.end) {
        throw LedgerError(LedgerErrc::kInvalidAmount, "empty bond window");
      }
      tx.subject = tx.from;
      attach(tx, rng);
      auto& list = bonds_for(tx.to, tx.contract);
      for (std::int64_t i = 0; i < tx.amount; ++i) list.push_back({tx.from, tx.window, tx.id});
      break;
    }
    case TxKind::kRetrieve: {
      if (!is_escrow(tx.from)) throw LedgerError(LedgerErrc::kNotEscrow, names_[tx.from]);
      if (!tx.attestation) throw LedgerError(LedgerErrc::kMissingAttestation, "retrieve");
      const auto& att = *tx.attestation;
      if (!verify(att)) throw LedgerError(LedgerErrc::kInvalidAttestation, "bad observer tag");
      if (att.agent != tx.to || att.point != *point_of_escrow(tx.from)) {
        throw LedgerError(LedgerErrc::kAttestationMismatch,
                          "attestation does not bind recipient and escrow point");
      }
      auto it = bonds_.find({tx.from, tx.contract});
      if (it == bonds_.end()) throw LedgerError(LedgerErrc::kNoLiveDeposit, names_[tx.to]);
      auto& list = it->second;
      auto own = [&](const Bond& b) { return b.owner == tx.to; };
      auto first = std::find_if(list.begin(), list.end(), own);
      if (first == list.end()) throw LedgerError(LedgerErrc::kNoLiveDeposit, names_[tx.to]);
      auto match = std::find_if(list.begin(), list.end(), [&](const Bond& b) {
        return own(b) && b.window == tx.window && b.window.contains(att.tick);
      });
      if (match == list.end()) {
        match = std::find_if(list.begin(), list.end(), [&](const Bond& b) {
          return own(b) && b.window.contains(att.tick);
        });
      }
      if (match == list.end()) {
        throw LedgerError(att.tick < first->window.start ? LedgerErrc::kTooEarly
                                                         : LedgerErrc::kTooLate,
                          "tick " + std::to_string(att.tick));
      }
      tx.subject = tx.to;
      tx.tick = att.tick;
      tx.window = match->window;
      attach(tx, rng);
      list.erase(match);
      if (list.empty()) bonds_.erase(it);
      break;
    }
    case TxKind::kForfeit: {
      if (!is_escrow(tx.from)) throw LedgerError(LedgerErrc::kNotEscrow, names_[tx.from]);
      require_account(tx.subject, "bond owner");
      auto it = bonds_.find({tx.from, tx.contract});
      if (it == bonds_.end()) throw LedgerError(LedgerErrc::kNoLiveDeposit, names_[tx.subject]);
      auto& list = it->second;
      auto match = std::find_if(list.begin(), list.end(), [&](const Bond& b) {
        return b.owner == tx.subject && b.window.end < tx.tick;
      });
      if (match == list.end()) {
        const bool any = std::any_of(list.begin(), list.end(),
                                     [&](const Bond& b) { return b.owner == tx.subject; });
        throw LedgerError(any ? LedgerErrc::kNotExpired : LedgerErrc::kNoLiveDeposit,
                          names_[tx.subject]);
      }
      tx.window = match->window;
      attach(tx, rng);
      list.erase(match);
      if (list.empty()) bonds_.erase(it);
      break;
    }
    case TxKind::kGenesis:
      break;
  }
  txs_.push_back(std::move(tx));
  return txs_.back();
}

std::vector<TxId> LedgerDag::topological_order() const {
  const std::size_t n = txs_.size();
  // CSR child lists.
  std::vector<std::size_t> offset(n + 1, 0);
  std::vector<std::uint32_t> indegree(n, 0);
  for (const auto& tx : txs_) {
    if (tx.kind == TxKind::kGenesis) continue;
    for (TxId p : tx.parents) {
      if (p >= n) return {};
      ++offset[p + 1];
      ++indegree[tx.id];
    }
  }
  for (std::size_t i = 0; i < n; ++i) offset[i + 1] += offset[i];
  std::vector<TxId> children(offset[n]);
  std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
  for (const auto& tx : txs_) {
    if (tx.kind == TxKind::kGenesis) continue;
    for (TxId p : tx.parents) children[fill[p]++] = tx.id;
  }

  std::priority_queue<TxId, std::vector<TxId>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(static_cast<TxId>(i));
  }
  std::vector<TxId> order;
  order.reserve(n);
  while (!ready.empty()) {
    const TxId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (std::size_t e = offset[id]; e < offset[id + 1]; ++e) {
      if (--indegree[children[e]] == 0) ready.push(children[e]);
    }
  }
  if (order.size() != n) return {};
  return order;
}

std::vector<std::int64_t> LedgerDag::replay_balances() const {
  std::vector<std::int64_t> out(names_.size(), 0);
  for (TxId id : topological_order()) {
    const auto& tx = txs_[id];
    if (tx.kind == TxKind::kGenesis) {
      for (const auto& [account, amount] : genesis_allocations_) out[account] += amount;
      continue;
    }
    out[tx.from] -= tx.amount;
    out[tx.to] += tx.amount;
  }
  return out;
}

void LedgerDag::dump(std::ostream& out) const {
  out << "txid,kind,from,to,amount,parent1,parent2,tick\n";
  for (const auto& tx : txs_) {
    if (tx.kind == TxKind::kGenesis) {
      for (const auto& [account, amount] : genesis_allocations_) {
        out << tx.id << ",Genesis,," << names_[account] << ',' << amount << ",,," << tx.tick
            << '\n';
      }
      continue;
    }
    out << tx.id << ',' << to_string(tx.kind) << ',' << names_[tx.from] << ',' << names_[tx.to]
        << ',' << tx.amount << ',' << tx.parents[0] << ',' << tx.parents[1] << ',' << tx.tick
        << '\n';
  }
}

ObserverAttestation attest_presence(const LedgerDag& registry, ObserverId observer,
                                    AccountId agent, PointId point, Tick tick) {
  if (!registry.observer_registered_at(observer, point)) {
    throw LedgerError(LedgerErrc::kObserverNotRegistered,
                      "observer " + std::to_string(observer) + " is not registered at point " +
                          std::to_string(point));
  }
  if (agent >= registry.account_count()) {
    throw LedgerError(LedgerErrc::kUnknownAccount, "agent " + std::to_string(agent));
  }
  return {observer, agent, point, tick, registry.sign(observer, agent, point, tick)};
}

namespace {

AccountId escrow_or_throw(const LedgerDag& dag, PointId point) {
  auto escrow = dag.escrow_of(point);
  if (!escrow) {
    throw LedgerError(LedgerErrc::kNotEscrow, "no escrow at point " + std::to_string(point));
  }
  return *escrow;
}

}  // namespace

const Transaction& deposit_bond(LedgerDag& dag, AccountId agent, PointId point,
                                ContractId contract, TimeWindow window, Tick now, Rng& rng) {
  Transaction tx;
  tx.kind = TxKind::kDeposit;
  tx.from = agent;
  tx.to = escrow_or_throw(dag, point);
  tx.amount = 1;
  tx.tick = now;
  tx.contract = contract;
  tx.window = window;
  return dag.append_transaction(std::move(tx), rng);
}

const Transaction& retrieve_bond(LedgerDag& dag, AccountId agent, PointId point,
                                 ContractId contract, const ObserverAttestation& attestation,
                                 TimeWindow window, Rng& rng) {
  const AccountId escrow = escrow_or_throw(dag, point);
  if (attestation.agent != agent) {
    throw LedgerError(LedgerErrc::kAttestationMismatch, "attestation names another agent");
  }
  const auto bonds = dag.live_bonds(escrow, contract);
  const bool live = std::any_of(bonds.begin(), bonds.end(), [&](const Bond& b) {
    return b.owner == agent && b.window == window;
  });
  if (!live) throw LedgerError(LedgerErrc::kNoLiveDeposit, dag.account_name(agent));
  if (attestation.tick < window.start) {
    throw LedgerError(LedgerErrc::kTooEarly, "tick " + std::to_string(attestation.tick));
  }
  if (attestation.tick > window.end) {
    throw LedgerError(LedgerErrc::kTooLate, "tick " + std::to_string(attestation.tick));
  }
  Transaction tx;
  tx.kind = TxKind::kRetrieve;
  tx.from = escrow;
  tx.to = agent;
  tx.amount = 1;
  tx.contract = contract;
  tx.window = window;
  tx.attestation = attestation;
  return dag.append_transaction(std::move(tx), rng);
}

std::vector<TxId> forfeit_expired(LedgerDag& dag, PointId point, ContractId contract, Tick now,
                                  std::span<const ObserverAttestation> present, Rng& rng) {
  const AccountId escrow = escrow_or_throw(dag, point);
  std::vector<Bond> expired;
  for (const auto& b : dag.live_bonds(escrow, contract)) {
    if (b.window.end < now) expired.push_back(b);
  }
  std::vector<TxId> out;
  std::size_t turn = 0;
  for (const auto& bond : expired) {
    std::vector<AccountId> eligible;
    for (const auto& att : present) {
      if (att.point == point && bond.window.contains(att.tick) && dag.verify(att)) {
        eligible.push_back(att.agent);
      }
    }
    Transaction tx;
    tx.kind = TxKind::kForfeit;
    tx.from = escrow;
    tx.to = eligible.empty() ? dag.system_escrow() : eligible[turn++ % eligible.size()];
    tx.subject = bond.owner;
    tx.amount = 1;
    tx.tick = now;
    tx.contract = contract;
    out.push_back(dag.append_transaction(std::move(tx), rng).id);
  }
  return out;
}

AuditReport audit(const LedgerDag& dag) {
  AuditReport r;
  const auto& txs = dag.transactions();
  r.transactions = txs.size();
  if (dag.topological_order().size() != txs.size()) {
    r.acyclic = false;
    r.problems.push_back("transaction graph has no topological order");
  }
  if (dag.total_supply() != dag.issuance()) {
    r.conserved = false;
    r.problems.push_back("supply " + std::to_string(dag.total_supply()) + " != issuance " +
                         std::to_string(dag.issuance()));
  }
  for (std::size_t a = 0; a < dag.balances().size(); ++a) {
    if (dag.balances()[a] < 0) {
      r.non_negative = false;
      r.problems.push_back("negative balance on " + dag.account_name(static_cast<AccountId>(a)));
    }
  }
  if (dag.replay_balances() != dag.balances()) {
    r.replay_matches = false;
    r.problems.push_back("replayed balances differ from incremental state");
  }
  for (const auto& tx : txs) {
    if (tx.kind != TxKind::kRetrieve) continue;
    const auto point = dag.point_of_escrow(tx.from);
    const bool ok = tx.attestation && dag.verify(*tx.attestation) &&
                    tx.attestation->agent == tx.to && point &&
                    tx.attestation->point == *point && tx.window.contains(tx.attestation->tick);
    if (!ok) {
      r.retrievals_authorized = false;
      r.problems.push_back("unauthorized retrieve tx " + std::to_string(tx.id));
    }
  }
  return r;
}

AuditReport audit_dump(std::istream& in) {
  AuditReport r;
  std::unordered_map<std::string, std::int64_t> balances;
  std::int64_t issuance = 0;
  std::int64_t last_id = -1;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](bool& flag, const std::string& msg) {
    flag = false;
    if (r.problems.size() < 50) r.problems.push_back("line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.rfind("txid,", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 8) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected 8 fields, got " +
                               std::to_string(f.size()));
    }
    const std::int64_t id = std::stoll(f[0]);
    const std::int64_t amount = std::stoll(f[4]);
    if (f[1] == "Genesis") {
      if (id != 0) fail(r.acyclic, "genesis must be tx 0");
      balances[f[3]] += amount;
      issuance += amount;
      last_id = 0;
      continue;
    }
    if (id <= last_id) fail(r.acyclic, "transaction ids must increase");
    last_id = id;
    ++r.transactions;
    for (int k : {5, 6}) {
      const std::int64_t parent = std::stoll(f[static_cast<std::size_t>(k)]);
      if (parent < 0 || parent >= id) fail(r.acyclic, "parent does not precede child");
    }
    balances[f[2]] -= amount;
    balances[f[3]] += amount;
    if (balances[f[2]] < 0) fail(r.non_negative, "negative balance on " + f[2]);
  }
  if (last_id >= 0) ++r.transactions;  // genesis
  std::int64_t total = 0;
  for (const auto& [name, b] : balances) total += b;
  if (total != issuance) {
    r.conserved = false;
    r.problems.push_back("supply " + std::to_string(total) + " != issuance " +
                         std::to_string(issuance));
  }
  return r;
}

}  // namespace cityaccess::ledger
