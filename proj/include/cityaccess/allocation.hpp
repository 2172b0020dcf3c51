#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cityaccess::allocation {

using DriverId = std::uint32_t;

/// Per-car controller state for the current day.
struct DriverRecord {
  DriverId id = 0;
  bool x_current = false;       // granted access today
  double x_avg = 1.0;           // running mean of x over days 0..k
  double cost_weight = 1.0;     // w in f(z) = w z^2
  int capacity = 4;             // passenger seats (driver excluded)
  int occupancy_today = 0;      // passengers assigned today
};

/// Global feedback state shared by all cars.
struct ControllerState {
  double gamma = 1.0;
  double alpha = 1e-4;
  std::int64_t capacity_n = 0;  // cars permitted today
  std::int64_t fleet_size = 0;
  std::int64_t population = 0;
};

struct OptimalAllocation {
  std::vector<double> z_star;
};

/// Derivative of a convex per-car cost f(z; w). The default family is the
/// quadratic f(z) = w z^2, for which x / f'(x) = 1 / (2w) at every x
/// (including the limit at x = 0).
struct CostFamily {
  std::function<double(double z, double weight)> derivative;  // empty => quadratic

  static CostFamily quadratic() { return {}; }
  bool is_quadratic() const { return !derivative; }
};

/// Exact running mean: given the mean over days 0..k-1, fold in day k.
double update_average(double x_avg, bool x_new, std::int64_t k);

/// Grant probability, clamped to [0, 1]:
///   gamma * (x_avg / f'(x_avg)) * (occupancy / capacity).
/// Throws DomainError when a non-quadratic family has f'(x_avg) == 0.
double access_probability(const DriverRecord& rec, double gamma,
                          const CostFamily& family = CostFamily::quadratic());

/// Integrator step gamma + alpha (N - granted), floored at 0.
double update_gamma(const ControllerState& state, std::int64_t granted_count);

/// Independent Bernoulli draw per record. Record i (by its id) consumes the
/// counter-based uniform keyed on (seed, id, day), so the result does not
/// depend on `threads`.
std::vector<std::uint8_t> draw_daily_access(std::span<const DriverRecord> records, double gamma,
                                            std::uint64_t seed, std::int64_t day,
                                            const CostFamily& family = CostFamily::quadratic(),
                                            unsigned threads = 1);

/// Minimiser of sum w_i z_i^2 subject to sum z_i = N, z_i >= 0.
/// Throws InvalidInput if any weight is not strictly positive.
OptimalAllocation solve_optimum(std::span<const double> cost_weights, std::int64_t capacity_n);

}  // namespace cityaccess::allocation
