#include "cityaccess/matchmaking.hpp"

#include <algorithm>

namespace cityaccess::matchmaking {

std::size_t Manifest::seated() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.stops.size();
  return n;
}

bool has_priority(const PassengerRecord& p) {
  if (p.days_participating == 0) return true;
  // assigned / participating < 1/2, kept in integers.
  return 2 * p.days_assigned < p.days_participating;
}

PriorityPartition priority_set(std::span<const PassengerRecord> passengers) {
  PriorityPartition out;
  for (std::size_t i = 0; i < passengers.size(); ++i) {
    (has_priority(passengers[i]) ? out.priority : out.non_priority).push_back(i);
  }
  return out;
}

Manifest assign_passengers(std::span<const PassengerRecord> passengers,
                           std::span<allocation::DriverRecord> cars, Rng& rng, std::int64_t day,
                           const WindowPolicy& policy) {
  Manifest manifest;
  manifest.day = day;

  std::vector<std::uint32_t> open;  // car indices with a free seat
  open.reserve(cars.size());
  for (std::size_t c = 0; c < cars.size(); ++c) {
    cars[c].occupancy_today = 0;
    if (cars[c].capacity > 0) open.push_back(static_cast<std::uint32_t>(c));
  }

  // Per car: passenger indices in boarding order.
  std::vector<std::vector<std::uint32_t>> boarded(cars.size());

  auto partition = priority_set(passengers);
  auto seat_group = [&](std::vector<std::size_t>& group) {
    rng.shuffle(std::span<std::size_t>(group));
    for (std::size_t p : group) {
      if (open.empty()) return;
      const auto slot = static_cast<std::size_t>(rng.below(open.size()));
      const std::uint32_t c = open[slot];
      boarded[c].push_back(static_cast<std::uint32_t>(p));
      if (++cars[c].occupancy_today >= cars[c].capacity) {
        open[slot] = open.back();
        open.pop_back();
      }
    }
  };
  seat_group(partition.priority);
  seat_group(partition.non_priority);

  const Tick day_start = day * policy.ticks_per_day;
  for (std::size_t c = 0; c < cars.size(); ++c) {
    if (boarded[c].empty()) continue;
    ManifestEntry entry;
    entry.car = cars[c].id;
    entry.stops.reserve(boarded[c].size());
    for (std::size_t j = 0; j < boarded[c].size(); ++j) {
      const auto& p = passengers[boarded[c][j]];
      const Tick start = day_start + static_cast<Tick>(j) * policy.window_ticks;
      entry.stops.push_back({p.id, p.home_point, {start, start + policy.window_ticks - 1}});
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void record_history(std::span<PassengerRecord> passengers, const Manifest& manifest) {
  PassengerId max_id = 0;
  for (const auto& p : passengers) max_id = std::max(max_id, p.id);
  std::vector<std::uint8_t> seated(static_cast<std::size_t>(max_id) + 1, 0);
  for (const auto& e : manifest.entries) {
    for (const auto& s : e.stops) {
      if (s.passenger <= max_id) seated[s.passenger] = 1;
    }
  }
  for (auto& p : passengers) {
    ++p.days_participating;
    if (seated[p.id]) ++p.days_assigned;
  }
}

}  // namespace cityaccess::matchmaking
