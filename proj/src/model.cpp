#include "odta/model.hpp"

#include "odta/world.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace odta {

std::string type_tag(RequestType t) { return "T" + std::to_string(t); }

RequestType parse_type_tag(std::string_view s) {
  if (!s.empty() && (s.front() == 'T' || s.front() == 't')) s.remove_prefix(1);
  if (s.empty()) throw std::invalid_argument("empty request type");
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad request type: " + std::string(s));
    v = v * 10 + (c - '0');
  }
  return v;
}

std::string_view to_string(TimeConstraint c) { return c == TimeConstraint::Hard ? "Hard" : "Soft"; }

std::string_view to_string(RequestStatus s) {
  switch (s) {
    case RequestStatus::Pending: return "Pending";
    case RequestStatus::InProgress: return "InProgress";
    case RequestStatus::Completed: return "Completed";
    case RequestStatus::Rejected: return "Rejected";
  }
  return "?";
}

bool RobotClassSpec::can_serve(RequestType t) const {
  return std::binary_search(abilities.begin(), abilities.end(), t);
}

std::string to_string(RobotId rid) {
  return "R" + std::to_string(rid.cls) + "_" + std::to_string(rid.index);
}

std::string_view to_string(RobotStatus s) {
  switch (s) {
    case RobotStatus::Busy: return "Busy";
    case RobotStatus::Free: return "Free";
    case RobotStatus::Failed: return "Failed";
    case RobotStatus::Charging: return "Charging";
  }
  return "?";
}

bool RequestTypeCatalog::contains(RequestType t) const {
  return std::find(types.begin(), types.end(), t) != types.end();
}

std::vector<RobotClassSpec> default_classes() {
  return {
      {0, {1, 2, 3, 4, 5, 6, 7}, 1.5, 60.0, 4000.0, 90.0, "Dock2"},
      {1, {1, 3, 4}, 1.0, 75.0, 5000.0, 80.0, "Dock3"},
      {2, {1, 4}, 0.75, 85.0, 6500.0, 70.0, "Dock2"},
      {3, {6, 7}, 0.5, 95.0, 7000.0, 60.0, "Dock1"},
  };
}

RequestTypeCatalog default_catalog() {
  RequestTypeCatalog cat;
  cat.types = {1, 2, 3, 4, 5, 6, 7};
  for (const auto& spec : default_classes()) cat.class_map.push_back(spec.abilities);
  return cat;
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::UnknownType: return "unknown type";
    case RejectReason::NoCapableClass: return "no capable class";
    case RejectReason::OverCapacity: return "over capacity";
  }
  return "?";
}

std::optional<RejectReason> validate_request(const ServiceRequest& req,
                                             const RequestTypeCatalog& catalog,
                                             std::span<const RobotClassSpec> classes) {
  if (!catalog.contains(req.rtype)) return RejectReason::UnknownType;
  bool typed = false;
  for (const auto& spec : classes) {
    if (!spec.can_serve(req.rtype)) continue;
    typed = true;
    if (req.demand <= spec.capacity) return std::nullopt;
  }
  return typed ? RejectReason::OverCapacity : RejectReason::NoCapableClass;
}

bool transition_allowed(RequestStatus from, RequestStatus to) {
  using S = RequestStatus;
  return (from == S::Pending && (to == S::InProgress || to == S::Rejected)) ||
         (from == S::InProgress && to == S::Completed);
}

ServiceRequest transition_request(ServiceRequest req, RequestStatus to, double now) {
  if (!transition_allowed(req.status, to))
    throw std::logic_error("illegal request transition " + std::string(to_string(req.status)) +
                           " -> " + std::string(to_string(to)));
  req.status = to;
  if (to == RequestStatus::Completed) req.completion = now;
  return req;
}

std::string_view to_string(FleetScenario f) {
  return f == FleetScenario::EqualRobots ? "equal" : "unequal";
}

FleetScenario parse_fleet(std::string_view s) {
  if (s == "equal" || s == "EqualRobots") return FleetScenario::EqualRobots;
  if (s == "unequal" || s == "UnequalRobots") return FleetScenario::UnequalRobots;
  throw std::invalid_argument("unknown fleet: " + std::string(s));
}

std::vector<int> fleet_counts(FleetScenario scenario) {
  if (scenario == FleetScenario::EqualRobots) return {20, 20, 20, 20};
  return {13, 20, 22, 25};
}

std::vector<RobotState> default_fleet(FleetScenario scenario, const GridWorld& world,
                                      std::span<const RobotClassSpec> classes) {
  const auto counts = fleet_counts(scenario);
  if (classes.size() != counts.size())
    throw std::invalid_argument("default fleet expects four robot classes");
  std::vector<RobotState> fleet;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const SiteId site = world.locations().size() + world.depot_index(classes[c].start_depot);
    for (int r = 0; r < counts[c]; ++r) {
      RobotState s;
      s.rid = {static_cast<int>(c), r};
      s.site = site;
      s.energy = classes[c].energy;
      fleet.push_back(std::move(s));
    }
  }
  return fleet;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_request_log(std::ostream& out, std::span<const ServiceRequest> requests) {
  for (const auto& r : requests) {
    out << r.id << ',' << r.pickup << ',' << r.dropoff << ',' << type_tag(r.rtype) << ','
        << num(r.demand) << ',' << num(r.arrival) << ',' << num(r.earliest) << ','
        << num(r.deadline) << ',' << to_string(r.constraint) << '\n';
  }
}

std::vector<ServiceRequest> read_request_log(std::istream& in) {
  std::vector<ServiceRequest> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9)
      throw std::invalid_argument("request log line " + std::to_string(lineno) +
                                  ": expected 9 fields");
    try {
      ServiceRequest r;
      r.id = static_cast<RequestId>(std::stoul(f[0]));
      r.pickup = f[1];
      r.dropoff = f[2];
      r.rtype = parse_type_tag(f[3]);
      r.demand = std::stod(f[4]);
      r.arrival = std::stod(f[5]);
      r.earliest = std::stod(f[6]);
      r.deadline = std::stod(f[7]);
      if (f[8] == "Hard") r.constraint = TimeConstraint::Hard;
      else if (f[8] == "Soft") r.constraint = TimeConstraint::Soft;
      else throw std::invalid_argument("bad TC");
      if (!(r.arrival <= r.earliest && r.earliest <= r.deadline) || !(r.demand > 0.0))
        throw std::invalid_argument("time window or demand invalid");
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::invalid_argument("request log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace odta
