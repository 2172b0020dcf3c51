#include "cityaccess/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "cityaccess/errors.hpp"
#include "cityaccess/random.hpp"

namespace cityaccess::allocation {

double update_average(double x_avg, bool x_new, std::int64_t k) {
  const auto kd = static_cast<double>(k);
  const double next = (kd * x_avg + (x_new ? 1.0 : 0.0)) / (kd + 1.0);
  return std::clamp(next, 0.0, 1.0);
}

double access_probability(const DriverRecord& rec, double gamma, const CostFamily& family) {
  if (rec.occupancy_today <= 0 || rec.capacity <= 0) return 0.0;
  double ratio = 0.0;
  if (family.is_quadratic()) {
    ratio = 1.0 / (2.0 * rec.cost_weight);
  } else {
    const double slope = family.derivative(rec.x_avg, rec.cost_weight);
    if (slope == 0.0 || !std::isfinite(slope)) {
      throw DomainError("cost derivative is " + std::to_string(slope) + " at x_avg=" +
                        std::to_string(rec.x_avg) + " for driver " + std::to_string(rec.id));
    }
    ratio = rec.x_avg / slope;
  }
  const double fill = static_cast<double>(rec.occupancy_today) / rec.capacity;
  const double p = gamma * ratio * fill;
  if (!(p > 0.0)) return 0.0;
  return std::min(p, 1.0);
}

double update_gamma(const ControllerState& state, std::int64_t granted_count) {
  const double raw =
      state.gamma + state.alpha * static_cast<double>(state.capacity_n - granted_count);
  return std::max(0.0, raw);
}

std::vector<std::uint8_t> draw_daily_access(std::span<const DriverRecord> records, double gamma,
                                            std::uint64_t seed, std::int64_t day,
                                            const CostFamily& family, unsigned threads) {
  std::vector<std::uint8_t> granted(records.size(), 0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double p = access_probability(records[i], gamma, family);
      if (p <= 0.0) continue;
      const double u = counter_uniform(seed, StreamTag::kAccessDraw, records[i].id,
                                       static_cast<std::uint64_t>(day));
      granted[i] = u < p ? 1 : 0;
    }
  };

  threads = std::max(1u, threads);
  if (threads == 1 || records.size() < 4096) {
    work(0, records.size());
    return granted;
  }
  std::vector<std::exception_ptr> failures(threads);
  std::vector<std::jthread> pool;
  const std::size_t chunk = (records.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(records.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, t, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  }
  pool.clear();  // joins
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return granted;
}

OptimalAllocation solve_optimum(std::span<const double> cost_weights, std::int64_t capacity_n) {
  if (cost_weights.empty()) throw InvalidInput("solve_optimum: no cost weights");
  if (capacity_n < 0) throw InvalidInput("solve_optimum: capacity must be non-negative");
  double inv_sum = 0.0;
  for (std::size_t i = 0; i < cost_weights.size(); ++i) {
    const double w = cost_weights[i];
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidInput("solve_optimum: weight " + std::to_string(i) + " is not positive");
    }
    inv_sum += 1.0 / (2.0 * w);
  }
  // Stationarity: 2 w_i z_i = lambda for every i; the sum constraint fixes lambda.
  const double lambda = static_cast<double>(capacity_n) / inv_sum;
  OptimalAllocation out;
  out.z_star.reserve(cost_weights.size());
  for (double w : cost_weights) out.z_star.push_back(lambda / (2.0 * w));
  return out;
}

}  // namespace cityaccess::allocation
