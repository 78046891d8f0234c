#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace odta {

class GridWorld;

using RequestId = std::uint32_t;
/// Index into GridWorld::sites(): named locations first, then depots.
using SiteId = std::size_t;

/// Request-type tag T1..TP, stored as p.
using RequestType = int;
std::string type_tag(RequestType t);
/// Parses "T3" (or a bare "3"); throws std::invalid_argument.
RequestType parse_type_tag(std::string_view s);

enum class TimeConstraint { Hard, Soft };
enum class RequestStatus { Pending, InProgress, Completed, Rejected };

std::string_view to_string(TimeConstraint c);
std::string_view to_string(RequestStatus s);

struct ServiceRequest {
  RequestId id = 0;
  std::string pickup;
  std::string dropoff;
  RequestType rtype = 1;
  double demand = 0.0;    // kg
  double arrival = 0.0;   // s
  double earliest = 0.0;  // s, earliest pickup
  double deadline = 0.0;  // s
  TimeConstraint constraint = TimeConstraint::Soft;
  RequestStatus status = RequestStatus::Pending;
  std::optional<double> completion;

  bool hard() const { return constraint == TimeConstraint::Hard; }
};

struct RobotClassSpec {
  int class_id = 0;
  std::vector<RequestType> abilities;  // sorted, unique
  double speed = 0.0;     // m/s
  double capacity = 0.0;  // kg
  double energy = 0.0;    // J, full charge
  double weight = 0.0;    // kg
  std::string start_depot;

  bool can_serve(RequestType t) const;
};

struct RobotId {
  int cls = 0;
  int index = 0;
  auto operator<=>(const RobotId&) const = default;
};
std::string to_string(RobotId rid);

enum class RobotStatus { Busy, Free, Failed, Charging };
std::string_view to_string(RobotStatus s);

struct RobotState {
  RobotId rid;
  SiteId site = 0;
  double energy = 0.0;
  std::vector<RequestId> srl;
  std::deque<RequestId> aucq;
  RobotStatus status = RobotStatus::Free;
  double carried_load = 0.0;
};

struct RequestTypeCatalog {
  std::vector<RequestType> types;
  /// abilities per class id, indexed by class id
  std::vector<std::vector<RequestType>> class_map;

  bool contains(RequestType t) const;
};

/// Robot classes CL0..CL3 with their speeds, capacities, energies, weights,
/// start docks and served request types.
std::vector<RobotClassSpec> default_classes();
/// Seven request types; class abilities mirror default_classes().
RequestTypeCatalog default_catalog();

enum class RejectReason { UnknownType, NoCapableClass, OverCapacity };
std::string_view to_string(RejectReason r);

/// nullopt when accepted. A request is accepted when some class serves its
/// type and at least one such class can carry its demand.
std::optional<RejectReason> validate_request(const ServiceRequest& req,
                                             const RequestTypeCatalog& catalog,
                                             std::span<const RobotClassSpec> classes);

/// Pending -> InProgress -> Completed, or Pending -> Rejected.
bool transition_allowed(RequestStatus from, RequestStatus to);
/// Throws std::logic_error on an illegal transition. `now` is recorded as the
/// completion time when moving to Completed.
ServiceRequest transition_request(ServiceRequest req, RequestStatus to, double now = 0.0);

enum class FleetScenario { EqualRobots, UnequalRobots };
std::string_view to_string(FleetScenario f);
FleetScenario parse_fleet(std::string_view s);

std::vector<int> fleet_counts(FleetScenario scenario);

/// Robots ordered by (class, index), Free, fully charged, at their class's
/// start dock.
std::vector<RobotState> default_fleet(FleetScenario scenario, const GridWorld& world,
                                      std::span<const RobotClassSpec> classes);

/// Request log, one request per line, no header:
///   j,pickup,dropoff,rtype,dem_kg,AT_s,ET_s,DD_s,TC
void write_request_log(std::ostream& out, std::span<const ServiceRequest> requests);
std::vector<ServiceRequest> read_request_log(std::istream& in);

}  // namespace odta
