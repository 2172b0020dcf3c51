#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cityaccess/errors.hpp"
#include "cityaccess/simulator.hpp"

namespace cityaccess::sim {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown field '" + where + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const std::string& key, T& out, const std::string& where = "") {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + where + key + "' has the wrong type");
  }
}

Schedule parse_schedule(const json& s) {
  if (s.is_number()) return Schedule::constant(s.get<std::int64_t>());
  if (!s.is_object()) throw ConfigError("field 'schedule' must be a number or an object");
  reject_unknown(s, "schedule.", {"constant", "ramp", "knots"});
  if (s.size() != 1) throw ConfigError("field 'schedule' needs exactly one of constant/ramp/knots");
  if (s.contains("constant")) {
    std::int64_t n = 0;
    read(s, "constant", n, "schedule.");
    return Schedule::constant(n);
  }
  if (s.contains("ramp")) {
    const json& r = s["ramp"];
    reject_unknown(r, "schedule.ramp.",
                   {"low", "high", "up_start", "up_end", "high_end", "down_end"});
    if (!r.contains("low") || !r.contains("high")) {
      throw ConfigError("field 'schedule.ramp' needs 'low' and 'high'");
    }
    std::int64_t low = 0, high = 0, up_start = 60, up_end = 100, high_end = 180, down_end = 220;
    read(r, "low", low, "schedule.ramp.");
    read(r, "high", high, "schedule.ramp.");
    read(r, "up_start", up_start, "schedule.ramp.");
    read(r, "up_end", up_end, "schedule.ramp.");
    read(r, "high_end", high_end, "schedule.ramp.");
    read(r, "down_end", down_end, "schedule.ramp.");
    if (!(up_start <= up_end && up_end <= high_end && high_end <= down_end)) {
      throw ConfigError("field 'schedule.ramp' breakpoints must be non-decreasing");
    }
    return Schedule::ramp(low, high, up_start, up_end, high_end, down_end);
  }
  std::vector<std::pair<std::int64_t, double>> knots;
  read(s, "knots", knots, "schedule.");
  if (knots.empty()) throw ConfigError("field 'schedule.knots' must not be empty");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (knots[i].first <= knots[i - 1].first) {
      throw ConfigError("field 'schedule.knots' days must increase");
    }
  }
  return Schedule(std::move(knots));
}

void parse_ledger_mode(const json& v, ScenarioConfig& cfg) {
  if (!v.is_string()) throw ConfigError("field 'ledger' must be a string");
  const auto mode = v.get<std::string>();
  static const std::regex sampled(R"(sampled\((\d+)\))");
  std::smatch m;
  if (mode == "off") {
    cfg.ledger = LedgerMode::kOff;
  } else if (mode == "full") {
    cfg.ledger = LedgerMode::kFull;
  } else if (std::regex_match(mode, m, sampled)) {
    cfg.ledger = LedgerMode::kSampled;
    cfg.ledger_every = std::stoll(m[1].str());
  } else {
    throw ConfigError("field 'ledger' must be off, full or sampled(<days>), got '" + mode + "'");
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, "",
                 {"name", "population", "fleet", "passengers", "seat_capacity", "days", "alpha",
                  "gamma0", "schedule", "cost_weight", "cost_weights", "pickup_points",
                  "window_ticks", "ticks_per_day", "behavior", "tokens", "emissions", "geometry",
                  "ledger", "seed", "threads"});

  ScenarioConfig cfg;
  read(doc, "population", cfg.population);
  read(doc, "fleet", cfg.fleet);
  read(doc, "passengers", cfg.passengers);
  read(doc, "seat_capacity", cfg.seat_capacity);
  read(doc, "days", cfg.days);
  read(doc, "alpha", cfg.alpha);
  read(doc, "gamma0", cfg.gamma0);
  if (doc.contains("schedule")) cfg.schedule = parse_schedule(doc["schedule"]);
  if (doc.contains("cost_weight") && doc.contains("cost_weights")) {
    throw ConfigError("use either 'cost_weight' or 'cost_weights', not both");
  }
  if (doc.contains("cost_weight")) {
    double w = 1.0;
    read(doc, "cost_weight", w);
    cfg.cost_weights.assign(1, w);
  }
  read(doc, "cost_weights", cfg.cost_weights);
  read(doc, "pickup_points", cfg.pickup_points);
  read(doc, "window_ticks", cfg.windows.window_ticks);
  read(doc, "ticks_per_day", cfg.windows.ticks_per_day);
  if (doc.contains("behavior")) {
    const json& b = doc["behavior"];
    reject_unknown(b, "behavior.", {"driver_show", "passenger_show", "lateness"});
    read(b, "driver_show", cfg.behavior.driver_show, "behavior.");
    read(b, "passenger_show", cfg.behavior.passenger_show, "behavior.");
    read(b, "lateness", cfg.behavior.lateness, "behavior.");
  }
  if (doc.contains("tokens")) {
    const json& t = doc["tokens"];
    reject_unknown(t, "tokens.", {"driver", "passenger"});
    read(t, "driver", cfg.driver_tokens, "tokens.");
    read(t, "passenger", cfg.passenger_tokens, "tokens.");
  }
  if (doc.contains("emissions")) {
    const json& e = doc["emissions"];
    reject_unknown(e, "emissions.",
                   {"wear_mg_per_km", "airborne_fraction", "kg_lost_per_car", "km_per_day",
                    "pm25_fraction", "pm25_preset"});
    read(e, "wear_mg_per_km", cfg.emission.wear_mg_per_km, "emissions.");
    read(e, "airborne_fraction", cfg.emission.airborne_fraction, "emissions.");
    read(e, "kg_lost_per_car", cfg.emission.kg_lost_per_car, "emissions.");
    read(e, "km_per_day", cfg.emission.km_per_day, "emissions.");
    read(e, "pm25_fraction", cfg.emission.pm25_fraction, "emissions.");
    if (e.contains("pm25_preset")) {
      std::string preset;
      read(e, "pm25_preset", preset, "emissions.");
      try {
        cfg.emission.pm25_fraction = emissions::pm25_fraction_preset(preset);
      } catch (const InvalidInput& err) {
        throw ConfigError(std::string("field 'emissions.pm25_preset': ") + err.what());
      }
    }
  }
  if (doc.contains("geometry")) {
    const json& g = doc["geometry"];
    reject_unknown(g, "geometry.",
                   {"street_length_m", "street_width_m", "building_height_m",
                    "air_changes_per_hour"});
    read(g, "street_length_m", cfg.geometry.street_length_m, "geometry.");
    read(g, "street_width_m", cfg.geometry.street_width_m, "geometry.");
    read(g, "building_height_m", cfg.geometry.building_height_m, "geometry.");
    read(g, "air_changes_per_hour", cfg.geometry.air_changes_per_hour, "geometry.");
  }
  if (doc.contains("ledger")) parse_ledger_mode(doc["ledger"], cfg);
  read(doc, "seed", cfg.seed);
  read(doc, "threads", cfg.threads);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (days < 1) fail("days must be >= 1");
  if (fleet < 1) fail("fleet must be >= 1");
  if (!(population > fleet)) fail("population (n) must exceed fleet (N')");
  if (schedule.knots().empty()) fail("schedule must define N");
  if (schedule.min() < 1) fail("schedule N must be >= 1 on every day");
  if (schedule.max() > fleet) fail("fleet (N') must be at least the largest scheduled N");
  if (passengers < 0) fail("passengers must be >= 0");
  if (seat_capacity < 1) fail("seat_capacity must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be positive");
  if (!(gamma0 >= 0.0) || !std::isfinite(gamma0)) fail("gamma0 must be >= 0");
  if (!cost_weights.empty() && cost_weights.size() != 1 &&
      cost_weights.size() != static_cast<std::size_t>(fleet)) {
    fail("cost_weights must hold 1 or fleet entries");
  }
  for (double w : cost_weights) {
    if (!(w > 0.0)) fail("cost_weights entries must be positive");
  }
  if (pickup_points < 1) fail("pickup_points must be >= 1");
  if (windows.window_ticks < 1) fail("window_ticks must be >= 1");
  if (windows.ticks_per_day < windows.window_ticks * seat_capacity) {
    fail("ticks_per_day must fit one window per seat");
  }
  if (driver_tokens < 0 || passenger_tokens < 0) fail("tokens must be >= 0");
  if (ledger == LedgerMode::kSampled && ledger_every < 1) fail("ledger sampled(days) needs days >= 1");
  if (threads < 1) fail("threads must be >= 1");
  behavior.validate();
  try {
    emission.validate();
    geometry.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

double ScenarioConfig::cost_weight(std::size_t car) const {
  if (cost_weights.empty()) return 1.0;
  if (cost_weights.size() == 1) return cost_weights.front();
  return cost_weights[car];
}

bool ScenarioConfig::ledger_active(std::int64_t day) const {
  switch (ledger) {
    case LedgerMode::kOff: return false;
    case LedgerMode::kFull: return true;
    case LedgerMode::kSampled: return day % ledger_every == 0;
  }
  return false;
}

}  // namespace cityaccess::sim
