#include <cmath>
#include <sstream>

#include "cityaccess/emissions.hpp"
#include "cityaccess/errors.hpp"
#include "cityaccess/random.hpp"
#include "doctest.h"

using namespace cityaccess;
using namespace cityaccess::emissions;

TEST_SUITE("emissions") {

TEST_CASE("Dublin tyre budget") {
  const auto e = annual_fleet_estimate(170000, 4.0, 0.10);
  CHECK(e.kg_per_year == 68000.0);
  CHECK(e.kg_per_day == doctest::Approx(68000.0 / 365.0));
  CHECK(std::abs(e.kg_per_day - 185.0) <= 2.0);
  CHECK(annual_fleet_estimate(170000, 4.0, 1.0).kg_per_year == 680000.0);
  const auto zero = annual_fleet_estimate(0, 4.0, 0.1);
  CHECK(zero.kg_per_year == 0.0);
  CHECK(zero.kg_per_day == 0.0);
}

TEST_CASE("fractions outside the unit interval are rejected") {
  CHECK_THROWS_AS(annual_fleet_estimate(10, 4.0, 1.5), InvalidInput);
  CHECK_THROWS_AS(annual_fleet_estimate(-1, 4.0, 0.1), InvalidInput);
}

TEST_CASE("dispersion volume") {
  CHECK(dispersion_volume({11'250'000, 10, 4, 1}) == 450'000'000.0);
  CHECK(dispersion_volume({1, 1, 1, 1}) == 1.0);
  CHECK(dispersion_volume({2 * 3.5e5, 10, 4, 1}) == 2 * dispersion_volume({3.5e5, 10, 4, 1}));
  CHECK(dispersion_volume(DispersionGeometry{}) == 450'000'000.0);
  CHECK_THROWS_AS(dispersion_volume({0, 10, 4, 1}), InvalidInput);
}

TEST_CASE("steady concentration follows the unit chain") {
  // 68000 kg/yr -> 6.8e13 ug/yr -> /8760 h -> /4.5e8 m^3
  const double oracle = 68000.0 * 1e9 / 8760.0 / 450e6;
  const double c = steady_concentration(68000, 450e6, 1);
  CHECK(c == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(std::abs(c - 17.25) <= 0.05);
  CHECK(steady_concentration(0, 450e6, 1) == 0.0);
  CHECK(steady_concentration(68000, 450e6, 2) == doctest::Approx(c / 2));
}

TEST_CASE("WHO classification") {
  CHECK(classify_who(17.25, Species::kPm25, Horizon::kAnnual) == WhoClass::kAboveLimit);
  CHECK(classify_who(10.0, Species::kPm25, Horizon::kAnnual) == WhoClass::kSafe);
  CHECK(classify_who(24.9, Species::kPm25, Horizon::kDaily) == WhoClass::kSafe);
  CHECK(classify_who(25.1, Species::kPm25, Horizon::kDaily) == WhoClass::kAboveLimit);
  CHECK(classify_who(50.0, Species::kPm10, Horizon::kDaily) == WhoClass::kSafe);
  CHECK(classify_who(20.5, Species::kPm10, Horizon::kAnnual) == WhoClass::kAboveLimit);
  CHECK(to_string(WhoClass::kAboveLimit) == "AboveLimit");
}

TEST_CASE("classification is monotone") {
  Rng rng(4, StreamTag::kTest, 0);
  for (int i = 0; i < 5000; ++i) {
    const double a = 60.0 * rng.uniform();
    const double b = a + 10.0 * rng.uniform();
    for (auto s : {Species::kPm25, Species::kPm10}) {
      for (auto h : {Horizon::kDaily, Horizon::kAnnual}) {
        if (classify_who(a, s, h) == WhoClass::kAboveLimit) {
          CHECK(classify_who(b, s, h) == WhoClass::kAboveLimit);
        }
      }
    }
  }
}

TEST_CASE("linear in cars and inverse in volume and air changes") {
  Rng rng(6, StreamTag::kTest, 0);
  for (int i = 0; i < 1000; ++i) {
    const double m = 1e5 * rng.uniform();
    const double v = 1e6 + 1e9 * rng.uniform();
    const double ach = 0.1 + 5 * rng.uniform();
    const double k = 1.0 + 9.0 * rng.uniform();
    const double c = steady_concentration(m, v, ach);
    CHECK(steady_concentration(k * m, v, ach) == doctest::Approx(k * c).epsilon(1e-12));
    CHECK(steady_concentration(m, k * v, ach) == doctest::Approx(c / k).epsilon(1e-12));
    CHECK(steady_concentration(m, v, k * ach) == doctest::Approx(c / k).epsilon(1e-12));
  }
}

TEST_CASE("car sweep reaches the annual boundary at 100000 cars") {
  SweepSpec spec;
  spec.from = 0;
  spec.to = 500000;
  spec.steps = 6;
  const auto pts = sweep(spec);
  REQUIRE(pts.size() == 6);
  CHECK(pts[1].x == 100000.0);
  CHECK(std::abs(pts[1].concentration - 10.1) <= 0.2);
  CHECK(pts[2].concentration == doctest::Approx(2 * pts[1].concentration));
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].concentration > pts[i - 1].concentration);
  CHECK(pts[0].who_class == WhoClass::kSafe);
  CHECK(pts.back().who_class == WhoClass::kAboveLimit);
}

TEST_CASE("volume sweep halves concentration when volume doubles") {
  SweepSpec spec;
  spec.axis = SweepAxis::kVolume;
  spec.from = 100e6;
  spec.to = 800e6;
  spec.steps = 8;
  const auto pts = sweep(spec);
  CHECK(pts[1].x == doctest::Approx(200e6));
  CHECK(pts[3].x == doctest::Approx(400e6));
  CHECK(pts[3].concentration == doctest::Approx(pts[1].concentration / 2));
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].concentration < pts[i - 1].concentration);
}

TEST_CASE("sweep validation") {
  SweepSpec one;
  one.steps = 1;
  CHECK_THROWS_AS(sweep(one), InvalidInput);
  SweepSpec backwards;
  backwards.from = 10;
  backwards.to = 5;
  CHECK_THROWS_AS(sweep(backwards), InvalidInput);
  SweepSpec zero_volume;
  zero_volume.axis = SweepAxis::kVolume;
  zero_volume.from = 0;
  CHECK_THROWS_AS(sweep(zero_volume), InvalidInput);
}

TEST_CASE("sweep csv layout") {
  SweepSpec spec;
  spec.from = 0;
  spec.to = 100000;
  spec.steps = 2;
  std::ostringstream out;
  write_sweep_csv(out, sweep(spec));
  CHECK(out.str().rfind("x,concentration_ug_m3,who_class\n0,0,Safe\n100000,", 0) == 0);
}

TEST_CASE("per-km and per-tyre-set accounting agree at the Dublin point") {
  const EmissionParams p;
  // Distance over which one tyre set wears out, versus a year of driving.
  const double km_per_set = p.kg_lost_per_car * 1e6 / p.wear_mg_per_km;
  CHECK(std::abs(km_per_set - 35000.0) / 35000.0 < 0.15);
  const double km_per_year = p.km_per_day * kDaysPerYear;
  CHECK(std::abs(km_per_year - 15000.0) / 15000.0 < 0.15);
  // A year at the per-km rate equals the per-set loss scaled by distance.
  const double per_km_annual = km_per_year * p.wear_mg_per_km * 1e-6 * p.airborne_fraction;
  const double per_set_annual = p.kg_lost_per_car * p.airborne_fraction * km_per_year / km_per_set;
  CHECK(per_km_annual == doctest::Approx(per_set_annual).epsilon(1e-12));
  CHECK(p.airborne_kg_per_car_day() * kDaysPerYear == doctest::Approx(per_km_annual));
}

TEST_CASE("parameter validation") {
  EmissionParams p;
  CHECK_NOTHROW(p.validate());
  p.wear_mg_per_km = 300;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p.wear_mg_per_km = 50;
  CHECK_NOTHROW(p.validate());
  p.airborne_fraction = -0.1;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  CHECK(pm25_fraction_preset("half") == 0.5);
  CHECK(pm25_fraction_preset("low") == 0.05);
  CHECK_THROWS_AS(pm25_fraction_preset("coarse"), InvalidInput);
}

}  // TEST_SUITE
