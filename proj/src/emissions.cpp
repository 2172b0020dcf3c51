#include "cityaccess/emissions.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "cityaccess/errors.hpp"

namespace cityaccess::emissions {

namespace {

void require_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidInput(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidInput(std::string(name) + " must be positive, got " + std::to_string(v));
  }
}

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidInput(std::string(name) + " must be non-negative, got " + std::to_string(v));
  }
}

}  // namespace

void EmissionParams::validate() const {
  if (!(wear_mg_per_km >= 50.0 && wear_mg_per_km <= 240.0)) {
    throw InvalidInput("wear_mg_per_km must lie in [50, 240], got " +
                       std::to_string(wear_mg_per_km));
  }
  require_fraction(airborne_fraction, "airborne_fraction");
  require_fraction(pm25_fraction, "pm25_fraction");
  require_non_negative(kg_lost_per_car, "kg_lost_per_car");
  require_non_negative(km_per_day, "km_per_day");
}

double EmissionParams::airborne_kg_per_car_day() const {
  return km_per_day * wear_mg_per_km * 1e-6 * airborne_fraction;
}

double pm25_fraction_preset(std::string_view name) {
  if (name == "fine90") return 0.9;
  if (name == "half") return 0.5;
  if (name == "low") return 0.05;
  throw InvalidInput("unknown pm25 preset: " + std::string(name));
}

void DispersionGeometry::validate() const {
  require_positive(street_length_m, "street_length_m");
  require_positive(street_width_m, "street_width_m");
  require_positive(building_height_m, "building_height_m");
  require_positive(air_changes_per_hour, "air_changes_per_hour");
}

std::string_view to_string(WhoClass c) {
  return c == WhoClass::kSafe ? "Safe" : "AboveLimit";
}

double WhoLimits::limit(Species species, Horizon horizon) {
  if (species == Species::kPm25) return horizon == Horizon::kDaily ? kPm25Daily : kPm25Annual;
  return horizon == Horizon::kDaily ? kPm10Daily : kPm10Annual;
}

FleetEstimate annual_fleet_estimate(double cars, double kg_per_car, double airborne_fraction) {
  require_non_negative(cars, "cars");
  require_non_negative(kg_per_car, "kg_per_car");
  require_fraction(airborne_fraction, "airborne_fraction");
  const double per_year = cars * kg_per_car * airborne_fraction;
  return {per_year, per_year / kDaysPerYear};
}

double dispersion_volume(const DispersionGeometry& geometry) {
  geometry.validate();
  return geometry.street_length_m * geometry.street_width_m * geometry.building_height_m;
}

double steady_concentration(double airborne_kg_per_year, double volume_m3,
                            double air_changes_per_hour) {
  require_non_negative(airborne_kg_per_year, "airborne mass");
  require_positive(volume_m3, "volume");
  require_positive(air_changes_per_hour, "air changes per hour");
  const double ug_per_hour = airborne_kg_per_year * kMicrogramsPerKg / kHoursPerYear;
  return ug_per_hour / (volume_m3 * air_changes_per_hour);
}

WhoClass classify_who(double concentration, Species species, Horizon horizon) {
  require_non_negative(concentration, "concentration");
  return concentration <= WhoLimits::limit(species, horizon) ? WhoClass::kSafe
                                                             : WhoClass::kAboveLimit;
}

std::vector<SweepPoint> sweep(const SweepSpec& spec) {
  if (spec.steps < 2) throw InvalidInput("sweep needs at least 2 steps");
  if (!(spec.from < spec.to)) throw InvalidInput("sweep range must satisfy from < to");
  if (spec.axis == SweepAxis::kVolume) {
    require_positive(spec.from, "volume sweep start");
  } else {
    require_non_negative(spec.from, "car sweep start");
  }
  require_non_negative(spec.airborne_kg_per_car_year, "airborne kg per car-year");

  std::vector<SweepPoint> out;
  out.reserve(static_cast<std::size_t>(spec.steps));
  const double step = (spec.to - spec.from) / (spec.steps - 1);
  for (int i = 0; i < spec.steps; ++i) {
    const double x = i == spec.steps - 1 ? spec.to : spec.from + step * i;
    const double cars = spec.axis == SweepAxis::kCars ? x : spec.cars;
    const double volume = spec.axis == SweepAxis::kVolume ? x : spec.volume_m3;
    const double c = steady_concentration(cars * spec.airborne_kg_per_car_year, volume,
                                          spec.air_changes_per_hour);
    out.push_back({x, c, classify_who(c, spec.species, spec.horizon)});
  }
  return out;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "x,concentration_ug_m3,who_class\n";
  const auto old = out.precision(10);
  for (const auto& p : points) {
    out << p.x << ',' << p.concentration << ',' << to_string(p.who_class) << '\n';
  }
  out.precision(old);
}

double daily_concentration(std::int64_t granted_cars, const EmissionParams& params,
                           const DispersionGeometry& geometry) {
  const double kg_per_year =
      static_cast<double>(granted_cars) * params.airborne_kg_per_car_day() * kDaysPerYear;
  return steady_concentration(kg_per_year, dispersion_volume(geometry),
                              geometry.air_changes_per_hour);
}

}  // namespace cityaccess::emissions
