#include "odta/sim.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

namespace odta {

std::string_view to_string(DeadlineMode m) {
  switch (m) {
    case DeadlineMode::E: return "E";
    case DeadlineMode::TwoE: return "2E";
    case DeadlineMode::U5to10E: return "U5to10E";
    case DeadlineMode::U1to10E: return "U1to10E";
  }
  return "?";
}

DeadlineMode parse_deadline_mode(std::string_view s) {
  if (s == "E") return DeadlineMode::E;
  if (s == "2E" || s == "TwoE") return DeadlineMode::TwoE;
  if (s == "U5to10E" || s == "5E-10E") return DeadlineMode::U5to10E;
  if (s == "U1to10E" || s == "E-10E") return DeadlineMode::U1to10E;
  throw std::invalid_argument("unknown deadline mode: " + std::string(s));
}

std::string_view to_string(Policy p) { return p == Policy::HMRODTA ? "hmrodta" : "greedy"; }

Policy parse_policy(std::string_view s) {
  if (s == "hmrodta" || s == "HMRODTA") return Policy::HMRODTA;
  if (s == "greedy" || s == "GreedyFCFS") return Policy::GreedyFCFS;
  throw std::invalid_argument("unknown policy: " + std::string(s));
}

void ScenarioConfig::validate() const {
  if (n_requests <= 0) throw std::invalid_argument("n_requests must be positive");
  if (trials <= 0) throw std::invalid_argument("trials must be positive");
  if (!(arrival_gap_max >= 0.0)) throw std::invalid_argument("arrival gap must be nonnegative");
  if (!(demand_min > 0.0) || demand_max < demand_min)
    throw std::invalid_argument("demand range invalid");
  if (!(hard_probability >= 0.0 && hard_probability <= 1.0))
    throw std::invalid_argument("hard probability outside [0,1]");
  energy.validate();
}

Environment Environment::make(GridWorld world, EnergyParams params,
                              std::vector<RobotClassSpec> classes, RequestTypeCatalog catalog) {
  auto planning = PlanningContext::for_world(world, params);
  return Environment{std::move(world), std::move(classes), std::move(catalog), std::move(planning)};
}

SiteId Environment::site_of(std::string_view location) const {
  const auto& locs = world.locations();
  for (std::size_t i = 0; i < locs.size(); ++i)
    if (locs[i].name == location) return i;
  for (std::size_t i = 0; i < world.depots().size(); ++i)
    if (GridWorld::depot_name(i) == location) return locs.size() + i;
  throw std::out_of_range("unknown location: " + std::string(location));
}

Job Environment::job_for(const ServiceRequest& req) const {
  Job job;
  job.id = req.id;
  job.rtype = req.rtype;
  job.pickup = site_of(req.pickup);
  job.dropoff = site_of(req.dropoff);
  job.demand = req.demand;
  job.release = req.earliest;
  job.deadline = req.deadline;
  job.hard = req.hard();
  return job;
}

double Environment::min_speed() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& c : classes) v = std::min(v, c.speed);
  return v;
}

double execution_time_E(const ServiceRequest& req, const Environment& env) {
  const double d = env.planning.distance(env.site_of(req.pickup), env.site_of(req.dropoff));
  if (!std::isfinite(d)) throw std::runtime_error("pickup and dropoff are not connected");
  return d / env.min_speed();
}

namespace {

// splitmix64 finalizer; derives independent stream seeds from one seed.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<ServiceRequest> generate_requests(const ScenarioConfig& cfg, const Environment& env) {
  cfg.validate();
  const auto& locs = env.world.locations();
  if (locs.size() < 2) throw std::invalid_argument("map needs at least two named locations");
  if (env.catalog.types.empty()) throw std::invalid_argument("empty request-type catalog");

  std::mt19937_64 workload(mix(cfg.seed));
  std::mt19937_64 deadlines(mix(cfg.seed ^ 0xd1b54a32d192ed03ULL));
  std::uniform_real_distribution<double> gap(0.0, cfg.arrival_gap_max);
  std::uniform_int_distribution<std::size_t> pick_loc(0, locs.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_other(0, locs.size() - 2);
  std::uniform_int_distribution<std::size_t> pick_type(0, env.catalog.types.size() - 1);
  std::uniform_real_distribution<double> demand(cfg.demand_min, cfg.demand_max);
  std::bernoulli_distribution hard(cfg.hard_probability);
  std::uniform_real_distribution<double> slack(5.0, 10.0);
  std::uniform_int_distribution<int> mixed_mode(0, 2);

  std::vector<ServiceRequest> out;
  out.reserve(static_cast<std::size_t>(cfg.n_requests));
  double clock = 0.0;
  for (int i = 0; i < cfg.n_requests; ++i) {
    ServiceRequest r;
    r.id = static_cast<RequestId>(i + 1);
    clock += gap(workload);
    const std::size_t p = pick_loc(workload);
    std::size_t d = pick_other(workload);
    if (d >= p) ++d;
    r.pickup = locs[p].name;
    r.dropoff = locs[d].name;
    r.rtype = env.catalog.types[pick_type(workload)];
    r.demand = demand(workload);
    r.constraint = hard(workload) ? TimeConstraint::Hard : TimeConstraint::Soft;
    r.arrival = clock;
    r.earliest = clock;

    const double e = execution_time_E(r, env);
    DeadlineMode mode = cfg.deadline;
    if (mode == DeadlineMode::U1to10E) {
      static constexpr DeadlineMode kChoices[] = {DeadlineMode::E, DeadlineMode::TwoE,
                                                  DeadlineMode::U5to10E};
      mode = kChoices[mixed_mode(deadlines)];
    }
    double factor = 1.0;
    if (mode == DeadlineMode::TwoE) factor = 2.0;
    else if (mode == DeadlineMode::U5to10E) factor = slack(deadlines);
    r.deadline = r.earliest + factor * e;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ServiceRequest> trial_requests(const ScenarioConfig& cfg, const Environment& env) {
  if (cfg.requests_log.empty()) return generate_requests(cfg, env);
  std::ifstream in(cfg.requests_log);
  if (!in) throw std::runtime_error("cannot open request log: " + cfg.requests_log);
  auto reqs = read_request_log(in);
  for (const auto& r : reqs) {
    env.site_of(r.pickup);
    env.site_of(r.dropoff);
  }
  return reqs;
}

}  // namespace odta
