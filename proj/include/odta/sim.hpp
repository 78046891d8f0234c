#pragma once

#include "odta/auction.hpp"
#include "odta/energy.hpp"
#include "odta/model.hpp"
#include "odta/planner.hpp"
#include "odta/world.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace odta {

enum class DeadlineMode { E, TwoE, U5to10E, U1to10E };
std::string_view to_string(DeadlineMode m);
DeadlineMode parse_deadline_mode(std::string_view s);

enum class Policy { HMRODTA, GreedyFCFS };
std::string_view to_string(Policy p);
Policy parse_policy(std::string_view s);

struct ScenarioConfig {
  FleetScenario fleet = FleetScenario::EqualRobots;
  int n_requests = 40;
  DeadlineMode deadline = DeadlineMode::E;
  double arrival_gap_max = 10.0;  // gaps ~ U[0, max] s
  std::uint64_t seed = 1;
  std::string map;
  int trials = 1;
  double demand_min = 1.0;
  double demand_max = 60.0;
  double hard_probability = 0.5;
  EnergyParams energy;
  std::string requests_log;  // replay this log instead of generating

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Immutable per-map data shared by every trial.
struct Environment {
  GridWorld world;
  std::vector<RobotClassSpec> classes;
  RequestTypeCatalog catalog;
  PlanningContext planning;

  static Environment make(GridWorld world, EnergyParams params = {},
                          std::vector<RobotClassSpec> classes = default_classes(),
                          RequestTypeCatalog catalog = default_catalog());

  SiteId site_of(std::string_view location) const;
  Job job_for(const ServiceRequest& req) const;
  double min_speed() const;
};

/// Pickup-to-dropoff distance over the slowest class speed.
double execution_time_E(const ServiceRequest& req, const Environment& env);

/// Deterministic in cfg.seed. Requests are drawn one after another, so a run
/// with more requests extends a shorter run with the same seed; deadlines come
/// from a separate stream, so deadline modes pair on identical workloads.
std::vector<ServiceRequest> generate_requests(const ScenarioConfig& cfg, const Environment& env);

struct SimEvent {
  enum class Kind { RequestArrival = 0, RobotArrives = 1, ChargeDone = 2 };
  double time = 0.0;
  Kind kind = Kind::RequestArrival;
  std::size_t id = 0;  // request id or robot slot
  std::uint64_t seq = 0;

  bool operator>(const SimEvent& o) const;
};

struct RequestRecord {
  RequestId j = 0;
  RequestType rtype = 1;
  double arrival = 0.0;
  double earliest = 0.0;
  double deadline = 0.0;
  TimeConstraint constraint = TimeConstraint::Soft;
  std::optional<RobotId> winner;
  std::optional<double> completion;
  double penalty = 0.0;
  RequestStatus outcome = RequestStatus::Pending;
};

struct Metrics {
  double cumulative_penalty = 0.0;
  int rejected = 0;
  int completed = 0;
  int arrived = 0;
  std::vector<RequestRecord> per_request;  // by request id
};

/// Violation counters; all zero in a sound run.
struct InvariantReport {
  long capacity = 0;
  long exclusivity = 0;
  long energy = 0;
  long conservation = 0;
  long hard_deadline = 0;
  long checks = 0;

  long violations() const { return capacity + exclusivity + energy + conservation + hard_deadline; }
};

struct Visit {
  double time = 0.0;
  SiteId site = 0;
  StopKind kind = StopKind::Pickup;
  RequestId request = 0;
};

struct SimOptions {
  bool record_rounds = false;
  bool record_visits = false;
  bool check_invariants = true;
};

struct TrialResult {
  Metrics metrics;
  InvariantReport invariants;
  std::vector<AuctionRound> rounds;
  std::vector<std::vector<Visit>> visits;  // per robot slot
  long reschedules = 0;
  long idle_recharges = 0;
};

class Simulation {
 public:
  Simulation(const Environment& env, std::vector<RobotState> fleet,
             std::vector<ServiceRequest> requests, Policy policy, SimOptions options = {});

  /// Processes one event; false once nothing is left to do.
  bool step();
  TrialResult run();

  double now() const { return now_; }
  const std::vector<RobotAgent>& fleet() const { return fleet_; }
  const std::vector<ServiceRequest>& requests() const { return requests_; }

 private:
  void push(double time, SimEvent::Kind kind, std::size_t id);
  void on_request_arrival(RequestId j);
  void on_robot_arrives(std::size_t slot);
  void on_charge_done(std::size_t slot);

  /// Advances a robot past the stop it just finished, re-solving its schedule
  /// first when its SRL changed.
  void step_robot(std::size_t slot);
  void commit_next(std::size_t slot);
  void start_idle_robot(std::size_t slot);
  void recharge_if_low(std::size_t slot);
  void assign(std::size_t slot, RequestId j, std::vector<RouteEvent> order);

  void dispatch_greedy(bool flush);
  std::optional<std::size_t> first_free_capable(const Job& job) const;

  void complete(RequestId j, RobotId rid);
  void reject(RequestId j);
  void check_invariants();

  ServiceRequest& request(RequestId j);
  const RobotClassSpec& spec_of(std::size_t slot) const;

  const Environment& env_;
  Policy policy_;
  SimOptions options_;
  std::vector<RobotAgent> fleet_;
  std::vector<ServiceRequest> requests_;
  std::vector<Job> jobs_;
  std::unordered_map<RequestId, std::size_t> index_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  GlobalQueue queue_;
  std::deque<RequestId> waiting_;  // greedy backlog
  MessageBus bus_;
  TrialResult result_;
  bool greedy_pending_ = false;
};

/// Generates (or replays) the workload and runs it against the default fleet.
TrialResult run_trial(const ScenarioConfig& cfg, Policy policy, const Environment& env,
                      SimOptions options = {});
/// Workload a trial would use: the replay log when configured, else generated.
std::vector<ServiceRequest> trial_requests(const ScenarioConfig& cfg, const Environment& env);

/// j,rtype,AT,ET,DD,TC,winner,CT,penalty,outcome
void write_request_trace(std::ostream& out, const Metrics& metrics);

struct OracleRobot {
  RobotClassSpec spec;
  Anchor anchor;
};

struct OracleResult {
  bool feasible = false;
  double min_penalty = std::numeric_limits<double>::infinity();
  std::vector<std::vector<RouteEvent>> routes;  // witness, per robot
  std::vector<RequestId> unassignable;           // no robot can serve these alone
};

/// Offline optimum for tiny instances: every request known up front, every
/// assignment of servable requests to robots and every pickup-before-dropoff
/// ordering per robot. Capacity counts only the load on board, since an
/// offline route spans the whole trial. Requests no robot can serve even alone
/// are reported and left out. Throws std::invalid_argument beyond 5 requests or 3 robots.
OracleResult brute_force_oracle(std::span<const Job> jobs, std::span<const OracleRobot> robots,
                                const PlanningContext& ctx);

}  // namespace odta
