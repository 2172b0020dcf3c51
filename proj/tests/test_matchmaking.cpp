#include <algorithm>
#include <set>
#include <unordered_map>
#include <vector>

#include "cityaccess/matchmaking.hpp"
#include "cityaccess/random.hpp"
#include "doctest.h"

using namespace cityaccess;
using namespace cityaccess::matchmaking;
using allocation::DriverRecord;

namespace {

std::vector<DriverRecord> make_cars(std::size_t n, int capacity) {
  std::vector<DriverRecord> cars(n);
  for (std::size_t i = 0; i < n; ++i) {
    cars[i].id = static_cast<allocation::DriverId>(i);
    cars[i].capacity = capacity;
  }
  return cars;
}

std::vector<PassengerRecord> make_passengers(std::size_t n) {
  std::vector<PassengerRecord> p(n);
  for (std::size_t j = 0; j < n; ++j) {
    p[j].id = static_cast<PassengerId>(j);
    p[j].home_point = static_cast<PointId>(j % 7);
  }
  return p;
}

PassengerRecord with_history(PassengerId id, std::int64_t participating, std::int64_t assigned) {
  PassengerRecord p;
  p.id = id;
  p.days_participating = participating;
  p.days_assigned = assigned;
  return p;
}

}  // namespace

TEST_SUITE("matchmaking") {

TEST_CASE("priority follows the half-time rule") {
  CHECK(has_priority(with_history(0, 10, 3)));
  CHECK_FALSE(has_priority(with_history(0, 10, 7)));
  CHECK_FALSE(has_priority(with_history(0, 10, 5)));
  CHECK(has_priority(with_history(0, 0, 0)));
  const std::vector<PassengerRecord> ps{with_history(0, 10, 3), with_history(1, 10, 7),
                                        with_history(2, 0, 0)};
  const auto part = priority_set(ps);
  CHECK(part.priority == std::vector<std::size_t>{0, 2});
  CHECK(part.non_priority == std::vector<std::size_t>{1});
}

TEST_CASE("no passengers leaves every car empty") {
  auto cars = make_cars(10, 4);
  cars[3].occupancy_today = 2;
  Rng rng(1);
  const auto m = assign_passengers({}, cars, rng, 0);
  CHECK(m.entries.empty());
  for (const auto& c : cars) CHECK(c.occupancy_today == 0);
}

TEST_CASE("the single seat goes to the under-served passenger") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::vector<PassengerRecord> ps{with_history(0, 10, 7), with_history(1, 10, 3)};
    auto cars = make_cars(1, 1);
    Rng rng(seed);
    const auto m = assign_passengers(ps, cars, rng, 4);
    REQUIRE(m.entries.size() == 1);
    REQUIRE(m.entries[0].stops.size() == 1);
    CHECK(m.entries[0].stops[0].passenger == 1);
  }
}

TEST_CASE("desk-sized fresh day fills every seat") {
  const auto ps = make_passengers(4000);
  auto cars = make_cars(500, 4);
  Rng rng(42);
  const auto m = assign_passengers(ps, cars, rng, 0);
  CHECK(m.seated() == 2000);
  for (const auto& c : cars) CHECK(c.occupancy_today == 4);
}

TEST_CASE("stops carry home points and consecutive inclusive windows") {
  const auto ps = make_passengers(30);
  auto cars = make_cars(10, 3);
  Rng rng(2);
  const WindowPolicy policy{288, 12};
  const auto m = assign_passengers(ps, cars, rng, 5, policy);
  for (const auto& e : m.entries) {
    for (std::size_t j = 0; j < e.stops.size(); ++j) {
      const auto& s = e.stops[j];
      CHECK(s.point == ps[s.passenger].home_point);
      const Tick start = 5 * 288 + static_cast<Tick>(j) * 12;
      CHECK(s.window.start == start);
      CHECK(s.window.end == start + 11);
    }
  }
}

TEST_CASE("capacity and single booking hold on random instances") {
  Rng gen(77, StreamTag::kTest, 0);
  for (int trial = 0; trial < 10000; ++trial) {
    auto ps = make_passengers(gen.below(60));
    for (auto& p : ps) {
      p.days_participating = static_cast<std::int64_t>(gen.below(20));
      p.days_assigned = static_cast<std::int64_t>(
          gen.below(static_cast<std::uint64_t>(p.days_participating) + 1));
    }
    auto cars = make_cars(gen.below(15), 1);
    for (auto& c : cars) c.capacity = static_cast<int>(gen.below(6));
    Rng rng(static_cast<std::uint64_t>(trial));
    const auto m = assign_passengers(ps, cars, rng, trial);

    std::set<PassengerId> seen;
    std::size_t seats = 0;
    std::size_t seated = 0;
    for (const auto& c : cars) seats += static_cast<std::size_t>(c.capacity);
    for (const auto& e : m.entries) {
      CHECK(!e.stops.empty());
      CHECK(static_cast<int>(e.stops.size()) <= cars[e.car].capacity);
      CHECK(static_cast<int>(e.stops.size()) == cars[e.car].occupancy_today);
      for (const auto& s : e.stops) CHECK(seen.insert(s.passenger).second);
      seated += e.stops.size();
    }
    CHECK(seated == std::min(seats, ps.size()));

    // Priority dominance when seats are scarce.
    if (seats < ps.size()) {
      bool priority_unseated = false;
      bool non_priority_seated = false;
      for (const auto& p : ps) {
        const bool is_seated = seen.contains(p.id);
        if (has_priority(p) && !is_seated) priority_unseated = true;
        if (!has_priority(p) && is_seated) non_priority_seated = true;
      }
      CHECK_FALSE((priority_unseated && non_priority_seated));
    }
  }
}

TEST_CASE("history counts participation and seats") {
  auto ps = make_passengers(6);
  auto cars = make_cars(1, 2);
  Rng rng(9);
  const auto m = assign_passengers(ps, cars, rng, 0);
  record_history(ps, m);
  std::int64_t assigned = 0;
  for (const auto& p : ps) {
    CHECK(p.days_participating == 1);
    assigned += p.days_assigned;
  }
  CHECK(assigned == 2);
}

TEST_CASE("assignment frequencies settle around one half when seats are half the demand") {
  auto ps = make_passengers(400);
  auto cars = make_cars(50, 4);
  for (std::int64_t day = 0; day < 1000; ++day) {
    Rng rng(1234, StreamTag::kMatchmaking, static_cast<std::uint64_t>(day));
    const auto m = assign_passengers(ps, cars, rng, day);
    record_history(ps, m);
  }
  for (const auto& p : ps) {
    const double f = static_cast<double>(p.days_assigned) / static_cast<double>(p.days_participating);
    CHECK(f >= 0.45);
    CHECK(f <= 0.55);
  }
}

TEST_CASE("assignment is a deterministic function of the seed") {
  const auto ps = make_passengers(100);
  auto a = make_cars(20, 3);
  auto b = make_cars(20, 3);
  Rng r1(5), r2(5);
  const auto m1 = assign_passengers(ps, a, r1, 0);
  const auto m2 = assign_passengers(ps, b, r2, 0);
  REQUIRE(m1.entries.size() == m2.entries.size());
  for (std::size_t i = 0; i < m1.entries.size(); ++i) {
    CHECK(m1.entries[i].car == m2.entries[i].car);
    REQUIRE(m1.entries[i].stops.size() == m2.entries[i].stops.size());
    for (std::size_t j = 0; j < m1.entries[i].stops.size(); ++j) {
      CHECK(m1.entries[i].stops[j].passenger == m2.entries[i].stops[j].passenger);
    }
  }
}

}  // TEST_SUITE
