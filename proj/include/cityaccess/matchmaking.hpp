#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cityaccess/allocation.hpp"
#include "cityaccess/random.hpp"

namespace cityaccess {

using Tick = std::int64_t;
using PointId = std::uint32_t;
using PassengerId = std::uint32_t;

// Inclusive on both ends.
struct TimeWindow {
  Tick start = 0;
  Tick end = 0;

  bool contains(Tick t) const { return t >= start && t <= end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

}  // namespace cityaccess

namespace cityaccess::matchmaking {

struct PassengerRecord {
  PassengerId id = 0;
  std::int64_t days_participating = 0;
  std::int64_t days_assigned = 0;
  std::int64_t days_accessed = 0;
  PointId home_point = 0;
};

struct Stop {
  PassengerId passenger = 0;
  PointId point = 0;
  TimeWindow window;
};

struct ManifestEntry {
  allocation::DriverId car = 0;
  std::vector<Stop> stops;  // pick-up order
};

/// One day's passenger-to-car assignment. Only cars carrying at least one
/// passenger get an entry.
struct Manifest {
  std::int64_t day = 0;
  std::vector<ManifestEntry> entries;

  std::size_t seated() const;
};

struct WindowPolicy {
  Tick ticks_per_day = 288;  // 5-minute ticks
  Tick window_ticks = 12;    // one hour
};

struct PriorityPartition {
  std::vector<std::size_t> priority;      // indices into the input span
  std::vector<std::size_t> non_priority;
};

/// A passenger has priority when they have no history yet or were assigned a
/// seat on fewer than half of their participating days.
bool has_priority(const PassengerRecord& p);

PriorityPartition priority_set(std::span<const PassengerRecord> passengers);

/// Two-pass random assignment. Priority passengers are seated first, in
/// uniformly random order, each into a uniformly random car that still has a
/// free seat; non-priority passengers then fill what is left. Resets and sets
/// `occupancy_today` on every car. Passenger histories are not touched; see
/// record_history.
Manifest assign_passengers(std::span<const PassengerRecord> passengers,
                           std::span<allocation::DriverRecord> cars, Rng& rng, std::int64_t day,
                           const WindowPolicy& policy = {});

/// Folds one day's manifest into the histories of the passengers that took
/// part in matchmaking: every one of them participated, the seated ones were
/// assigned.
void record_history(std::span<PassengerRecord> passengers, const Manifest& manifest);

}  // namespace cityaccess::matchmaking
