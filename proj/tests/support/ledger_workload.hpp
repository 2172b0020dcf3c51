#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cityaccess/ledger.hpp"
#include "cityaccess/random.hpp"

namespace testsupport {

// Random mix of valid and invalid ledger operations against a shadow model
// of live bonds. Invalid operations must be rejected without touching state.
struct LedgerWorkload {
  struct Shadow {
    cityaccess::ledger::AccountId agent;
    cityaccess::PointId point;
    cityaccess::ledger::ContractId contract;
    cityaccess::TimeWindow window;
  };

  cityaccess::ledger::LedgerDag dag;
  std::vector<cityaccess::ledger::AccountId> agents;
  std::vector<Shadow> live;
  cityaccess::Rng rng;
  cityaccess::Rng ledger_rng;
  cityaccess::Tick now = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t unexpected = 0;  // outcomes that disagree with the shadow model
  std::uint32_t points = 8;

  explicit LedgerWorkload(std::uint64_t seed, std::size_t n_agents = 40,
                          std::int64_t endowment = 3)
      : dag(seed ^ 0xabcdef), rng(seed, cityaccess::StreamTag::kTest, 1),
        ledger_rng(seed, cityaccess::StreamTag::kTest, 2) {
    std::vector<std::pair<cityaccess::ledger::AccountId, std::int64_t>> alloc;
    for (std::size_t i = 0; i < n_agents; ++i) {
      agents.push_back(dag.open_account("agent:" + std::to_string(i)));
      alloc.emplace_back(agents.back(), endowment);
    }
    for (std::uint32_t p = 0; p < points; ++p) dag.register_observer(p);
    dag.genesis(alloc);
  }

  cityaccess::ledger::AccountId random_agent() {
    return agents[rng.below(agents.size())];
  }

  bool expect_rejected(auto&& op) {
    const auto before = dag.balances();
    const auto txs = dag.transactions().size();
    try {
      op();
    } catch (const cityaccess::ledger::LedgerError&) {
      if (dag.balances() != before || dag.transactions().size() != txs) ++unexpected;
      ++rejected;
      return true;
    }
    ++unexpected;
    return false;
  }

  void deposit() {
    const auto agent = random_agent();
    const auto point = static_cast<cityaccess::PointId>(rng.below(points));
    const auto contract = 1 + rng.below(16);
    const cityaccess::Tick start = now + static_cast<cityaccess::Tick>(rng.below(6));
    const cityaccess::TimeWindow w{start, start + 3};
    if (dag.balance(agent) < 1) {
      expect_rejected([&] {
        cityaccess::ledger::deposit_bond(dag, agent, point, contract, w, now, ledger_rng);
      });
      return;
    }
    cityaccess::ledger::deposit_bond(dag, agent, point, contract, w, now, ledger_rng);
    live.push_back({agent, point, contract, w});
    ++accepted;
  }

  void retrieve() {
    if (live.empty()) return deposit();
    const std::size_t idx = rng.below(live.size());
    const Shadow b = live[idx];
    const cityaccess::Tick tick = b.window.start - 2 + static_cast<cityaccess::Tick>(rng.below(8));
    const auto observer = *dag.observer_at(b.point);
    const auto att = cityaccess::ledger::attest_presence(dag, observer, b.agent, b.point, tick);
    if (!b.window.contains(tick)) {
      expect_rejected([&] {
        cityaccess::ledger::retrieve_bond(dag, b.agent, b.point, b.contract, att, b.window,
                                          ledger_rng);
      });
      return;
    }
    cityaccess::ledger::retrieve_bond(dag, b.agent, b.point, b.contract, att, b.window,
                                      ledger_rng);
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(idx));
    ++accepted;
  }

  void forfeit() {
    if (live.empty()) return deposit();
    const Shadow b = live[rng.below(live.size())];
    std::vector<cityaccess::ledger::ObserverAttestation> present;
    const auto observer = *dag.observer_at(b.point);
    const std::size_t n_present = rng.below(50) == 0 ? 0 : 1 + rng.below(2);
    for (std::size_t i = 0; i < n_present; ++i) {
      present.push_back(cityaccess::ledger::attest_presence(dag, observer, random_agent(),
                                                            b.point, b.window.start + 1));
    }
    const auto ids =
        cityaccess::ledger::forfeit_expired(dag, b.point, b.contract, now, present, ledger_rng);
    std::size_t expired = 0;
    std::erase_if(live, [&](const Shadow& s) {
      const bool gone = s.point == b.point && s.contract == b.contract && s.window.end < now;
      expired += gone ? 1 : 0;
      return gone;
    });
    if (ids.size() != expired) ++unexpected;
    accepted += ids.size();
  }

  void invalid() {
    switch (rng.below(4)) {
      case 0: {  // forged tag
        if (live.empty()) return;
        const Shadow b = live[rng.below(live.size())];
        auto att = cityaccess::ledger::attest_presence(dag, *dag.observer_at(b.point), b.agent,
                                                       b.point, b.window.start);
        att.signature ^= 1;
        expect_rejected([&] {
          cityaccess::ledger::retrieve_bond(dag, b.agent, b.point, b.contract, att, b.window,
                                            ledger_rng);
        });
        return;
      }
      case 1: {  // attestation replayed for a different agent
        if (live.empty()) return;
        const Shadow b = live[rng.below(live.size())];
        auto att = cityaccess::ledger::attest_presence(dag, *dag.observer_at(b.point), b.agent,
                                                       b.point, b.window.start);
        att.agent = b.agent == agents.front() ? agents.back() : agents.front();
        expect_rejected([&] {
          cityaccess::ledger::retrieve_bond(dag, att.agent, b.point, b.contract, att, b.window,
                                            ledger_rng);
        });
        return;
      }
      case 2: {  // unknown account
        expect_rejected([&] {
          cityaccess::ledger::Transaction tx;
          tx.kind = cityaccess::ledger::TxKind::kDeposit;
          tx.from = 1'000'000;
          tx.to = *dag.escrow_of(0);
          dag.append_transaction(tx, ledger_rng);
        });
        return;
      }
      default: {  // retrieve with no bond at all
        const auto agent = random_agent();
        const auto att =
            cityaccess::ledger::attest_presence(dag, *dag.observer_at(0), agent, 0, now);
        expect_rejected([&] {
          cityaccess::ledger::retrieve_bond(dag, agent, 0, 999'999, att, {now, now + 3},
                                            ledger_rng);
        });
        return;
      }
    }
  }

  void step() {
    now += static_cast<cityaccess::Tick>(rng.below(3));
    const auto r = rng.below(100);
    if (r < 35) {
      deposit();
    } else if (r < 70) {
      retrieve();
    } else if (r < 90) {
      forfeit();
    } else {
      invalid();
    }
  }
};

}  // namespace testsupport
