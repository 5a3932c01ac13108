#include "gridhier/scenario_io.hpp"

#include "gridhier/error.hpp"

#include <fstream>
#include <sstream>

namespace gridhier {
namespace {

using nlohmann::json;

const json& member(const json& obj, const char* key, const char* where) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, std::string(where) + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::ParseError, std::string("missing key \"") + key + "\" in " + where);
  }
  return *it;
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw Error(ErrorCode::ParseError, what + " must be a number");
  return v.get<double>();
}

Vector vector(const json& v, const std::string& what) {
  if (!v.is_array()) throw Error(ErrorCode::ParseError, what + " must be an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = number(v[i], what + "[" + std::to_string(i) + "]");
  }
  return out;
}

json to_array(const Vector& v) {
  json arr = json::array();
  for (double e : v) arr.push_back(e);
  return arr;
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  Scenario s;
  const auto& sys = member(doc, "system", "scenario");
  s.system.inertia = number(member(sys, "M", "system"), "system.M");
  s.system.damping = number(member(sys, "D", "system"), "system.D");

  const auto& fleet = member(doc, "fleet", "scenario");
  s.fleet.tau = vector(member(fleet, "tau", "fleet"), "fleet.tau");
  s.fleet.droop = vector(member(fleet, "droop", "fleet"), "fleet.droop");
  s.fleet.capacity = vector(member(fleet, "capacity", "fleet"), "fleet.capacity");
  s.fleet.cost_a = vector(member(fleet, "cost_a", "fleet"), "fleet.cost_a");
  s.fleet.cost_b = vector(member(fleet, "cost_b", "fleet"), "fleet.cost_b");
  s.fleet.cost_c = vector(member(fleet, "cost_c", "fleet"), "fleet.cost_c");

  if (auto it = doc.find("secondary"); it != doc.end() && !it->is_null()) {
    SecondaryParams sec;
    sec.tau_z = number(member(*it, "tau_z", "secondary"), "secondary.tau_z");
    sec.beta = number(member(*it, "beta", "secondary"), "secondary.beta");
    sec.participation = vector(member(*it, "k", "secondary"), "secondary.k");
    if (auto e = it->find("enforce_unit_sum"); e != it->end()) {
      if (!e->is_boolean()) throw Error(ErrorCode::ParseError, "secondary.enforce_unit_sum must be a boolean");
      sec.enforce_unit_sum = e->get<bool>();
    }
    s.secondary = std::move(sec);
  }

  s.x_star = vector(member(doc, "x_star", "scenario"), "x_star");

  const auto& schedule = member(doc, "demand_schedule", "scenario");
  if (!schedule.is_array()) throw Error(ErrorCode::ParseError, "demand_schedule must be an array of [t, d] pairs");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& entry = schedule[i];
    const auto where = "demand_schedule[" + std::to_string(i) + "]";
    if (!entry.is_array() || entry.size() != 2) throw Error(ErrorCode::ParseError, where + " must be a [t, d] pair");
    s.demand_schedule.push_back({number(entry[0], where + ".t"), number(entry[1], where + ".d")});
  }

  s.d_hat = number(member(doc, "d_hat", "scenario"), "d_hat");
  s.horizon = number(member(doc, "horizon", "scenario"), "horizon");
  if (auto it = doc.find("dt"); it != doc.end() && !it->is_null()) s.dt = number(*it, "dt");
  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["system"] = {{"M", s.system.inertia}, {"D", s.system.damping}};
  doc["fleet"] = {{"tau", to_array(s.fleet.tau)},
                  {"droop", to_array(s.fleet.droop)},
                  {"capacity", to_array(s.fleet.capacity)},
                  {"cost_a", to_array(s.fleet.cost_a)},
                  {"cost_b", to_array(s.fleet.cost_b)},
                  {"cost_c", to_array(s.fleet.cost_c)}};
  if (s.secondary) {
    doc["secondary"] = {{"tau_z", s.secondary->tau_z},
                        {"beta", s.secondary->beta},
                        {"k", to_array(s.secondary->participation)}};
    if (s.secondary->enforce_unit_sum) doc["secondary"]["enforce_unit_sum"] = true;
  }
  doc["x_star"] = to_array(s.x_star);
  json schedule = json::array();
  for (const auto& step : s.demand_schedule) schedule.push_back({step.time, step.demand});
  doc["demand_schedule"] = std::move(schedule);
  doc["d_hat"] = s.d_hat;
  doc["horizon"] = s.horizon;
  if (s.dt) doc["dt"] = *s.dt;
  return doc;
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return scenario_from_json(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << scenario_to_json(scenario).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace gridhier
