#include "odta/sim.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace odta;

namespace {

GridWorld toy_world() {
  return testing::open_room(
      12, 6, {{"A", {0, 0}}, {"B", {11, 0}}, {"C", {0, 5}}, {"D", {11, 5}}, {"E", {6, 3}}}, {6, 0});
}

const Environment& hospital() {
  static const Environment env = Environment::make(load_map_file(testing::hospital_map_path()));
  return env;
}

ServiceRequest request(RequestId id, std::string p, std::string d, RequestType t, double dem,
                       double at, double dd, bool hard = false) {
  ServiceRequest r;
  r.id = id;
  r.pickup = std::move(p);
  r.dropoff = std::move(d);
  r.rtype = t;
  r.demand = dem;
  r.arrival = at;
  r.earliest = at;
  r.deadline = dd;
  r.constraint = hard ? TimeConstraint::Hard : TimeConstraint::Soft;
  return r;
}

RobotState robot(int cls, int index, const Environment& env, SiteId site) {
  RobotState s;
  s.rid = {cls, index};
  s.site = site;
  s.energy = env.classes[static_cast<std::size_t>(cls)].energy;
  return s;
}

// one robot of each class, all on the depot
std::vector<RobotState> one_each(const Environment& env) {
  std::vector<RobotState> f;
  for (int c = 0; c < static_cast<int>(env.classes.size()); ++c) f.push_back(robot(c, 0, env, 5));
  return f;
}

std::string trace_of(const Metrics& m) {
  std::ostringstream out;
  write_request_trace(out, m);
  return out.str();
}

ScenarioConfig hospital_cfg(int n, DeadlineMode mode, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.n_requests = n;
  cfg.deadline = mode;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("execution time") {
  const auto env = Environment::make(
      testing::open_room(12, 2, {{"A", {0, 0}}, {"B", {10, 0}}}, {11, 1}));
  CHECK(execution_time_E(request(1, "A", "B", 1, 1, 0, 0), env) == 20.0);
  CHECK(execution_time_E(request(1, "A", "A", 1, 1, 0, 0), env) == 0.0);
  CHECK_THROWS_AS(env.site_of("Nowhere"), std::out_of_range);
  CHECK(env.site_of("Dock1") == 2);
}

TEST_CASE("generated workloads") {
  const auto& env = hospital();
  auto cfg = hospital_cfg(280, DeadlineMode::E, 4);
  const auto a = generate_requests(cfg, env);
  REQUIRE(a.size() == 280);
  std::ostringstream la, lb;
  write_request_log(la, a);
  write_request_log(lb, generate_requests(cfg, env));
  CHECK(la.str() == lb.str());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == i + 1);
    if (i > 0) CHECK(a[i].arrival >= a[i - 1].arrival);
    CHECK(a[i].arrival - (i > 0 ? a[i - 1].arrival : 0.0) <= 10.0);
    CHECK(a[i].earliest == a[i].arrival);
    CHECK(a[i].pickup != a[i].dropoff);
    CHECK(a[i].demand >= 1.0);
    CHECK(a[i].demand <= 60.0);
    CHECK(env.catalog.contains(a[i].rtype));
    CHECK(a[i].deadline == a[i].earliest + execution_time_E(a[i], env));
  }
  int hard = 0;
  for (const auto& r : a) hard += r.hard() ? 1 : 0;
  CHECK(hard > 100);
  CHECK(hard < 180);

  cfg.deadline = DeadlineMode::TwoE;
  for (const auto& r : generate_requests(cfg, env))
    CHECK(r.deadline - r.earliest == doctest::Approx(2.0 * execution_time_E(r, env)));

  cfg.deadline = DeadlineMode::U5to10E;
  const auto u = generate_requests(cfg, env);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double e = execution_time_E(u[i], env);
    CHECK(u[i].deadline - u[i].earliest >= 5.0 * e - 1e-9);
    CHECK(u[i].deadline - u[i].earliest <= 10.0 * e + 1e-9);
    // same workload as the E run, only deadlines differ
    CHECK(u[i].arrival == a[i].arrival);
    CHECK(u[i].demand == a[i].demand);
  }

  // a shorter run is a prefix of a longer one
  cfg.n_requests = 40;
  cfg.deadline = DeadlineMode::E;
  const auto short_run = generate_requests(cfg, env);
  for (std::size_t i = 0; i < short_run.size(); ++i) {
    CHECK(short_run[i].arrival == a[i].arrival);
    CHECK(short_run[i].pickup == a[i].pickup);
    CHECK(short_run[i].deadline == a[i].deadline);
  }

  cfg.n_requests = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), "n_requests must be positive", std::invalid_argument);
}

TEST_CASE("deadline modes and policies parse") {
  for (auto m : {DeadlineMode::E, DeadlineMode::TwoE, DeadlineMode::U5to10E, DeadlineMode::U1to10E})
    CHECK(parse_deadline_mode(to_string(m)) == m);
  for (auto p : {Policy::HMRODTA, Policy::GreedyFCFS}) CHECK(parse_policy(to_string(p)) == p);
  CHECK_THROWS_AS(parse_deadline_mode("3E"), std::invalid_argument);
}

TEST_CASE("event ordering") {
  const SimEvent a{5.0, SimEvent::Kind::RequestArrival, 9, 3};
  const SimEvent b{5.0, SimEvent::Kind::RobotArrives, 1, 0};
  const SimEvent c{5.0, SimEvent::Kind::RobotArrives, 2, 0};
  const SimEvent d{4.0, SimEvent::Kind::ChargeDone, 7, 9};
  CHECK(b > a);
  CHECK(c > b);
  CHECK(a > d);
}

TEST_CASE("idle fleet does nothing") {
  const auto env = Environment::make(toy_world());
  Simulation sim(env, one_each(env), {}, Policy::HMRODTA);
  CHECK_FALSE(sim.step());
  for (const auto& a : sim.fleet()) {
    CHECK(a.state.status == RobotStatus::Free);
    CHECK(a.state.srl.empty());
  }
}

TEST_CASE("single request with slack") {
  const auto env = Environment::make(toy_world());
  for (auto policy : {Policy::HMRODTA, Policy::GreedyFCFS}) {
    // T2: only CL0 can take it
    Simulation sim(env, one_each(env), {request(1, "A", "D", 2, 20, 3.0, 1e4)}, policy);
    const auto r = sim.run();
    CHECK(r.metrics.completed == 1);
    CHECK(r.metrics.rejected == 0);
    CHECK(r.metrics.cumulative_penalty == 0.0);
    CHECK(r.invariants.violations() == 0);
    REQUIRE(r.metrics.per_request[0].winner.has_value());
    CHECK(*r.metrics.per_request[0].winner == RobotId{0, 0});
    const double travel = (env.planning.distance(5, 0) + env.planning.distance(0, 3)) / 1.5;
    CHECK(*r.metrics.per_request[0].completion == doctest::Approx(3.0 + travel));
  }
}

TEST_CASE("soft lateness is recorded as penalty") {
  const auto env = Environment::make(toy_world());
  auto fleet = one_each(env);
  fleet[0].status = RobotStatus::Failed;  // leave the slow CL3 robot as the only T6 server
  const double travel = (env.planning.distance(5, 0) + env.planning.distance(0, 3)) / 0.5;
  Simulation sim(env, fleet, {request(1, "A", "D", 6, 20, 0.0, travel - 30.0)}, Policy::HMRODTA);
  const auto r = sim.run();
  CHECK(r.metrics.completed == 1);
  CHECK(*r.metrics.per_request[0].winner == RobotId{3, 0});
  CHECK(r.metrics.cumulative_penalty == doctest::Approx(30.0));
  CHECK(r.metrics.per_request[0].penalty == doctest::Approx(30.0));

  // the same request with a hard deadline cannot be met
  Simulation hard(env, fleet, {request(1, "A", "D", 6, 20, 0.0, travel - 30.0, true)},
                  Policy::HMRODTA);
  const auto h = hard.run();
  CHECK(h.metrics.rejected == 1);
  CHECK(h.metrics.cumulative_penalty == 0.0);
}

TEST_CASE("requests no class serves are all rejected") {
  auto classes = default_classes();
  auto catalog = default_catalog();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    auto& ab = classes[c].abilities;
    ab.erase(std::remove(ab.begin(), ab.end(), RequestType{7}), ab.end());
    catalog.class_map[c] = ab;
  }
  const auto env = Environment::make(toy_world(), {}, classes, catalog);
  std::vector<ServiceRequest> reqs;
  for (RequestId j = 1; j <= 6; ++j) reqs.push_back(request(j, "A", "B", 7, 5, j * 2.0, 1e4));
  for (auto policy : {Policy::HMRODTA, Policy::GreedyFCFS}) {
    Simulation sim(env, one_each(env), reqs, policy);
    const auto r = sim.run();
    CHECK(r.metrics.rejected == 6);
    CHECK(r.metrics.arrived == 6);
  }
}

TEST_CASE("mid-route wins replan without revisiting") {
  const auto env = Environment::make(toy_world());
  // three T2 requests, CL0 is the only server; the later two arrive while it moves
  const std::vector<ServiceRequest> reqs{request(1, "A", "D", 2, 10, 0.0, 1e4),
                                         request(2, "B", "C", 2, 10, 3.0, 1e4),
                                         request(3, "E", "A", 2, 10, 6.0, 1e4)};
  SimOptions opt;
  opt.record_visits = true;
  Simulation sim(env, one_each(env), reqs, Policy::HMRODTA, opt);
  const auto r = sim.run();
  CHECK(r.metrics.completed == 3);
  CHECK(r.reschedules >= 3);
  const auto& visits = r.visits[0];
  std::set<std::pair<RequestId, int>> seen;
  double last = 0.0;
  std::map<RequestId, double> picked;
  for (const auto& v : visits) {
    CHECK(v.time >= last);
    last = v.time;
    if (v.kind == StopKind::Depot) continue;
    CHECK(seen.insert({v.request, static_cast<int>(v.kind)}).second);
    if (v.kind == StopKind::Pickup) picked[v.request] = v.time;
    else CHECK(picked.count(v.request) == 1);
  }
  CHECK(seen.size() == 6);
  for (std::size_t s = 1; s < r.visits.size(); ++s) CHECK(r.visits[s].empty());
}

TEST_CASE("greedy waits for a busy robot") {
  const auto env = Environment::make(toy_world());
  const std::vector<ServiceRequest> reqs{request(1, "A", "D", 2, 10, 0.0, 1e4),
                                         request(2, "B", "C", 2, 10, 1.0, 1e4)};
  Simulation sim(env, one_each(env), reqs, Policy::GreedyFCFS);
  const auto r = sim.run();
  CHECK(r.metrics.completed == 2);
  CHECK(r.metrics.rejected == 0);
  // the second starts only after the first is delivered
  CHECK(*r.metrics.per_request[1].completion > *r.metrics.per_request[0].completion);

  auto fleet = one_each(env);
  fleet[0].status = RobotStatus::Failed;
  Simulation stuck(env, fleet, reqs, Policy::GreedyFCFS);
  const auto s = stuck.run();
  CHECK(s.metrics.rejected == 2);
  CHECK(s.invariants.violations() == 0);
}

TEST_CASE("trials are deterministic and replayable") {
  const auto& env = hospital();
  const auto cfg = hospital_cfg(80, DeadlineMode::TwoE, 7);
  for (auto policy : {Policy::HMRODTA, Policy::GreedyFCFS}) {
    const auto a = run_trial(cfg, policy, env);
    const auto b = run_trial(cfg, policy, env);
    CHECK(trace_of(a.metrics) == trace_of(b.metrics));
    CHECK(a.metrics.cumulative_penalty == b.metrics.cumulative_penalty);
    CHECK(a.invariants.violations() == 0);
    CHECK(a.metrics.arrived == 80);
    CHECK(a.metrics.completed + a.metrics.rejected == 80);

    const auto path = std::filesystem::temp_directory_path() / "odta_replay_test.csv";
    {
      std::ofstream out(path);
      write_request_log(out, generate_requests(cfg, env));
    }
    auto replay = cfg;
    replay.requests_log = path.string();
    const auto c = run_trial(replay, policy, env);
    CHECK(trace_of(c.metrics) == trace_of(a.metrics));
    std::filesystem::remove(path);
  }
}

TEST_CASE("invariants hold on seeded trials") {
  const auto& env = hospital();
  for (auto fleet : {FleetScenario::EqualRobots, FleetScenario::UnequalRobots})
    for (auto mode : {DeadlineMode::E, DeadlineMode::U1to10E})
      for (auto policy : {Policy::HMRODTA, Policy::GreedyFCFS}) {
        auto cfg = hospital_cfg(160, mode, 3);
        cfg.fleet = fleet;
        const auto r = run_trial(cfg, policy, env);
        CHECK(r.invariants.checks > 0);
        CHECK(r.invariants.violations() == 0);
        double sum = 0.0;
        for (const auto& rec : r.metrics.per_request) {
          if (rec.outcome == RequestStatus::Completed && rec.constraint == TimeConstraint::Hard)
            CHECK(*rec.completion <= rec.deadline);
          if (rec.constraint == TimeConstraint::Soft) sum += rec.penalty;
          if (rec.outcome != RequestStatus::Completed) CHECK(rec.penalty == 0.0);
        }
        CHECK(sum == doctest::Approx(r.metrics.cumulative_penalty));
      }
}

TEST_CASE("oracle examples") {
  const auto env = Environment::make(toy_world());
  const auto& ctx = env.planning;
  const auto spec = env.classes[0];
  const OracleRobot r0{spec, {5, 0.0, spec.energy}};

  // one request, one robot: same penalty as the planned schedule
  auto one = env.job_for(request(1, "A", "D", 1, 10, 0.0, 5.0));
  const auto o1 = brute_force_oracle(std::span(&one, 1), std::span(&r0, 1), ctx);
  REQUIRE(o1.feasible);
  const std::vector<RouteEvent> route{{one, StopKind::Pickup}, {one, StopKind::Dropoff}};
  const auto walked = simulate_route(spec, r0.anchor, route, ctx);
  CHECK(o1.min_penalty == walked.penalty);
  CHECK(o1.min_penalty > 0.0);

  // tight windows force job 2 first
  std::vector<Job> two{env.job_for(request(1, "A", "C", 1, 10, 100.0, 200.0, true)),
                       env.job_for(request(2, "B", "D", 1, 10, 0.0, 30.0, true))};
  const auto o2 = brute_force_oracle(two, std::span(&r0, 1), ctx);
  REQUIRE(o2.feasible);
  CHECK(o2.min_penalty == 0.0);
  REQUIRE(o2.routes[0].size() == 4);
  CHECK(o2.routes[0][0].job.id == 2);
  CHECK(o2.routes[0][1].job.id == 2);

  // a hard request nobody can make is unassignable; the auction rejects it too
  auto hopeless = env.job_for(request(3, "A", "D", 1, 10, 0.0, 1.0, true));
  const auto o3 = brute_force_oracle(std::span(&hopeless, 1), std::span(&r0, 1), ctx);
  CHECK(o3.unassignable == std::vector<RequestId>{3});
  std::vector<RobotAgent> fleet(1);
  fleet[0].state.rid = {0, 0};
  fleet[0].anchor = r0.anchor;
  GlobalQueue q;
  q.push(3);
  MessageBus bus;
  const std::vector<RobotClassSpec> cls{spec};
  const auto round = run_auction(hopeless, fleet, q, {ctx, cls, env.catalog, 0.0}, bus);
  CHECK(round.outcome == AuctionOutcome::Rejected);

  std::vector<Job> six(6, one);
  for (std::size_t i = 0; i < six.size(); ++i) six[i].id = i + 1;
  CHECK_THROWS_AS(brute_force_oracle(six, std::span(&r0, 1), ctx), std::invalid_argument);
}

TEST_CASE("online penalty never beats the offline optimum") {
  // two classes keep the fleet small enough for the oracle
  auto classes = default_classes();
  classes.resize(2);
  auto catalog = default_catalog();
  catalog.class_map.resize(2);
  const auto env = Environment::make(toy_world(), {}, classes, catalog);
  const char* names[] = {"A", "B", "C", "D", "E"};
  const RequestType types[] = {1, 3, 4, 2};

  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> loc(0, 4), type(0, 3), count(2, 4);
  std::uniform_real_distribution<double> gap(0, 6), dem(1, 40), slack(0, 25);
  std::bernoulli_distribution hard(0.3);
  int compared = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::vector<RobotState> fleet{robot(0, 0, env, 5), robot(1, 0, env, 5),
                                        robot(1, 1, env, static_cast<SiteId>(loc(rng)))};
    std::vector<ServiceRequest> reqs;
    double t = 0.0;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      t += gap(rng);
      const int p = loc(rng);
      const int d = (p + 1 + loc(rng) % 4) % 5;
      auto r = request(static_cast<RequestId>(i + 1), names[p], names[d], types[type(rng)],
                       dem(rng), t, 0.0, hard(rng));
      r.deadline = r.earliest + execution_time_E(r, env) * 0.4 + slack(rng);
      reqs.push_back(r);
    }
    Simulation sim(env, fleet, reqs, Policy::HMRODTA);
    const auto online = sim.run();
    CHECK(online.invariants.violations() == 0);

    std::vector<Job> jobs;
    for (const auto& r : reqs) jobs.push_back(env.job_for(r));
    std::vector<OracleRobot> robots;
    for (const auto& s : fleet)
      robots.push_back({env.classes[static_cast<std::size_t>(s.rid.cls)], {s.site, 0.0, s.energy}});
    const auto offline = brute_force_oracle(jobs, robots, env.planning);

    std::vector<RequestId> rejected;
    for (const auto& rec : online.metrics.per_request)
      if (rec.outcome == RequestStatus::Rejected) rejected.push_back(rec.j);
    // only comparable when both served the same requests
    if (!offline.feasible || rejected != offline.unassignable) continue;
    ++compared;
    CHECK(online.metrics.cumulative_penalty >= offline.min_penalty - 1e-9);
  }
  CHECK(compared >= 60);
}
