#pragma once

#include "odta/energy.hpp"
#include "odta/model.hpp"
#include "odta/stn.hpp"
#include "odta/world.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace odta {

/// What the planner needs to know about one request.
struct Job {
  RequestId id = 0;
  RequestType rtype = 1;
  SiteId pickup = 0;
  SiteId dropoff = 0;
  double demand = 0.0;
  double release = 0.0;   // earliest pickup
  double deadline = 0.0;
  bool hard = false;
};

enum class StopKind { Pickup, Dropoff, Depot };

/// One pickup or dropoff in a robot's remaining route. A dropoff without a
/// preceding pickup in the same route belongs to a job already on board.
struct RouteEvent {
  Job job;
  StopKind kind = StopKind::Pickup;

  SiteId site() const { return kind == StopKind::Pickup ? job.pickup : job.dropoff; }
};

/// The state from which a robot's remaining route is planned: where it will
/// next be free to leave from, when, and with how much energy.
struct Anchor {
  SiteId site = 0;
  double time = 0.0;
  double energy = 0.0;
};

struct ScheduleEntry {
  StopKind kind = StopKind::Pickup;
  RequestId request = 0;         // unused for depot stops
  SiteId site = 0;
  double travel_in = 0.0;        // leg duration arriving here
  double service = 0.0;          // charging time at depots, zero otherwise
  double release = -std::numeric_limits<double>::infinity();
  double deadline = std::numeric_limits<double>::infinity();  // hard dropoffs only
  double planned_start = 0.0;
  double planned_end = 0.0;
  double energy_arrival = 0.0;   // after the inbound leg
  double energy_after = 0.0;     // after service (full charge at depots)
  double load_after = 0.0;
};

/// Distances plus the depot bookkeeping the planner consults on every leg.
class PlanningContext {
 public:
  PlanningContext(DistanceMatrix matrix, std::vector<SiteId> depot_sites, EnergyParams params);
  /// Matrix over world.sites(): named locations, then depots.
  static PlanningContext for_world(const GridWorld& world, EnergyParams params);

  const DistanceMatrix& matrix() const { return matrix_; }
  double distance(SiteId a, SiteId b) const { return matrix_(a, b); }
  const std::vector<SiteId>& depot_sites() const { return depot_sites_; }
  SiteId nearest_depot_site(SiteId s) const { return nearest_site_[s]; }
  double nearest_depot_distance(SiteId s) const { return nearest_m_[s]; }
  const EnergyParams& params() const { return params_; }

 private:
  DistanceMatrix matrix_;
  std::vector<SiteId> depot_sites_;
  std::vector<SiteId> nearest_site_;
  std::vector<double> nearest_m_;
  EnergyParams params_;
};

struct BidComponents {
  double penalty = std::numeric_limits<double>::infinity();
  double completion_time = std::numeric_limits<double>::infinity();
  double eta = std::numeric_limits<double>::infinity();
  double used_energy = std::numeric_limits<double>::infinity();
  double energy_rem = std::numeric_limits<double>::infinity();
  bool feasible = false;

  static BidComponents infeasible() { return {}; }
};

enum class RouteFailure { None, Capacity, Unreachable, Energy, HardDeadline };

struct RouteOutcome {
  bool feasible = false;
  RouteFailure failure = RouteFailure::None;
  double penalty = 0.0;        // summed soft lateness
  double finish_time = 0.0;
  double used_energy = 0.0;    // summed leg energies
  double energy_rem = 0.0;     // at the end of the route
  std::vector<ScheduleEntry> entries;  // filled when requested

  /// Completion time of a job's dropoff, +inf when absent.
  double completion_of(RequestId id) const;
};

/// Energy the robot must hold on arrival at `site` to still reach the nearest
/// depot carrying `load`. Always at least min_return_energy for the site.
double return_reserve(const RobotClassSpec& spec, SiteId site, double load,
                      const PlanningContext& ctx);

/// RouteSum: every request in the route counts against capacity for the whole
/// route (an SRL). OnBoard: only what is carried between stops counts, which
/// suits a route planned offline over a whole trial.
enum class CapacityRule { RouteSum, OnBoard };

/// Walks the route from the anchor with earliest-start timing. Before each
/// leg, if arriving would leave less than the return reserve, the robot first
/// detours to the depot nearest its current stop and recharges. Fails on
/// capacity, unreachable stops, an unaffordable leg, or a hard dropoff after
/// its deadline.
RouteOutcome simulate_route(const RobotClassSpec& spec, const Anchor& anchor,
                            std::span<const RouteEvent> order, const PlanningContext& ctx,
                            bool record_entries = false,
                            CapacityRule capacity = CapacityRule::RouteSum);

/// Sum of demands of all jobs present in the route.
double route_demand(std::span<const RouteEvent> order);

/// STN for a planned route: point 0 is the anchor, point k the start of
/// entries[k-1]. Consecutive points are separated by at least the previous
/// service plus the travel time; pickups honour their release and hard
/// dropoffs their deadline, both relative to the anchor time.
TemporalNetwork<double> build_and_solve(double anchor_time, std::span<const ScheduleEntry> entries);

struct StartWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool recharge = false;
  bool empty() const { return hi < lo; }
};

/// Admissible start interval for serving `job` directly from `anchor`:
/// lo = earliest pickup, hi = deadline minus the travel to the pickup and the
/// pickup-to-dropoff leg (through the nearest depot plus charging when the
/// direct trip cannot be afforded).
StartWindow start_window(const Job& job, const RobotClassSpec& spec, const Anchor& anchor,
                         const PlanningContext& ctx);

struct Insertion {
  BidComponents bid;
  std::vector<RouteEvent> order;  // best route including the candidate
  std::size_t pickup_pos = 0;
  std::size_t dropoff_pos = 0;
};

/// Cheapest insertion of `candidate` into the existing order: every pickup
/// position, every later dropoff position, existing events kept in order.
/// Positions compare by (penalty, candidate completion, used energy), earliest
/// position first on ties. The winning route is confirmed by solving its STN.
Insertion evaluate_insertion(const RobotClassSpec& spec, double eta, const Anchor& anchor,
                             std::span<const RouteEvent> existing, const Job& candidate,
                             const PlanningContext& ctx);

/// Schedule realizing `order` from the anchor, depot visits included. Throws
/// std::logic_error when the route is infeasible or its STN is inconsistent.
std::vector<ScheduleEntry> make_schedule(const RobotClassSpec& spec, const Anchor& anchor,
                                         std::span<const RouteEvent> order,
                                         const PlanningContext& ctx);

}  // namespace odta
