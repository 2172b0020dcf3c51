#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace cityaccess::emissions {

inline constexpr double kDaysPerYear = 365.0;
inline constexpr double kHoursPerYear = 8760.0;
inline constexpr double kMicrogramsPerKg = 1e9;

/// Tyre-wear emission inputs. Wear is for a whole vehicle (four tyres).
struct EmissionParams {
  double wear_mg_per_km = 114.0;   // 4 kg over ~35,000 km
  double airborne_fraction = 0.1;
  double kg_lost_per_car = 4.0;    // over one set of tyres
  double km_per_day = 41.0;        // ~15,000 km a year
  double pm25_fraction = 0.9;      // share of the airborne mass below 2.5 um

  /// Throws InvalidInput if wear lies outside [50, 240] mg/km, a fraction
  /// outside [0, 1], or a distance is negative.
  void validate() const;
  double airborne_kg_per_car_day() const;
};

/// Named readings of the PM2.5 share of airborne tyre PM: "fine90" (0.9),
/// "half" (0.5 of PM10) and "low" (0.05, middle of 3-7%).
double pm25_fraction_preset(std::string_view name);

/// Street canyon in which the PM is assumed to mix.
struct DispersionGeometry {
  double street_length_m = 11.25e6;
  double street_width_m = 10.0;
  double building_height_m = 4.0;
  double air_changes_per_hour = 1.0;

  void validate() const;
};

enum class Species { kPm25, kPm10 };
enum class Horizon { kDaily, kAnnual };
enum class WhoClass { kSafe, kAboveLimit };

std::string_view to_string(WhoClass c);

/// WHO guideline values in ug/m^3.
struct WhoLimits {
  static constexpr double kPm25Daily = 25.0;
  static constexpr double kPm25Annual = 10.0;
  static constexpr double kPm10Daily = 50.0;
  static constexpr double kPm10Annual = 20.0;

  static double limit(Species species, Horizon horizon);
};

struct FleetEstimate {
  double kg_per_year = 0.0;
  double kg_per_day = 0.0;
};

FleetEstimate annual_fleet_estimate(double cars, double kg_per_car, double airborne_fraction);

double dispersion_volume(const DispersionGeometry& geometry);

/// Box model with full air exchange: the hourly emitted mass divided by the
/// volume replaced per hour.
double steady_concentration(double airborne_kg_per_year, double volume_m3,
                            double air_changes_per_hour);

/// Values equal to the limit are Safe.
WhoClass classify_who(double concentration, Species species, Horizon horizon);

enum class SweepAxis { kCars, kVolume };

struct SweepSpec {
  SweepAxis axis = SweepAxis::kCars;
  double from = 0.0;
  double to = 500000.0;
  int steps = 50;
  double airborne_kg_per_car_year = 0.4;
  double cars = 100000.0;        // held fixed on the volume axis
  double volume_m3 = 450e6;      // held fixed on the cars axis
  double air_changes_per_hour = 1.0;
  Species species = Species::kPm25;
  Horizon horizon = Horizon::kAnnual;
};

struct SweepPoint {
  double x = 0.0;
  double concentration = 0.0;
  WhoClass who_class = WhoClass::kSafe;
};

/// `steps` evenly spaced points from `from` to `to` inclusive. Throws
/// InvalidInput unless from < to, steps >= 2 and (volume axis) from > 0.
std::vector<SweepPoint> sweep(const SweepSpec& spec);

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);

/// Concentration produced by `granted_cars` driving in the zone every day.
double daily_concentration(std::int64_t granted_cars, const EmissionParams& params,
                           const DispersionGeometry& geometry);

}  // namespace cityaccess::emissions
