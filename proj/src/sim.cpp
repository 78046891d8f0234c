#include "odta/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

namespace odta {

bool SimEvent::operator>(const SimEvent& o) const {
  if (time != o.time) return time > o.time;
  if (kind != o.kind) return static_cast<int>(kind) > static_cast<int>(o.kind);
  if (id != o.id) return id > o.id;
  return seq > o.seq;
}

Simulation::Simulation(const Environment& env, std::vector<RobotState> fleet,
                       std::vector<ServiceRequest> requests, Policy policy, SimOptions options)
    : env_(env), policy_(policy), options_(options), requests_(std::move(requests)) {
  fleet_.reserve(fleet.size());
  for (auto& s : fleet) {
    if (static_cast<std::size_t>(s.rid.cls) >= env_.classes.size())
      throw std::invalid_argument("robot class outside class table");
    RobotAgent a;
    a.anchor = {s.site, 0.0, s.energy};
    a.state = std::move(s);
    fleet_.push_back(std::move(a));
  }
  std::sort(fleet_.begin(), fleet_.end(),
            [](const RobotAgent& a, const RobotAgent& b) { return a.state.rid < b.state.rid; });
  if (options_.record_visits) result_.visits.resize(fleet_.size());

  jobs_.reserve(requests_.size());
  for (std::size_t i = 0; i < requests_.size(); ++i) {
    auto& r = requests_[i];
    if (!index_.emplace(r.id, i).second)
      throw std::invalid_argument("duplicate request id " + std::to_string(r.id));
    r.status = RequestStatus::Pending;
    r.completion.reset();
    jobs_.push_back(env_.job_for(r));
    RequestRecord rec;
    rec.j = r.id;
    rec.rtype = r.rtype;
    rec.arrival = r.arrival;
    rec.earliest = r.earliest;
    rec.deadline = r.deadline;
    rec.constraint = r.constraint;
    result_.metrics.per_request.push_back(rec);
    push(r.arrival, SimEvent::Kind::RequestArrival, r.id);
  }
}

void Simulation::push(double time, SimEvent::Kind kind, std::size_t id) {
  events_.push(SimEvent{time, kind, id, seq_++});
}

ServiceRequest& Simulation::request(RequestId j) { return requests_.at(index_.at(j)); }

const RobotClassSpec& Simulation::spec_of(std::size_t slot) const {
  return env_.classes[static_cast<std::size_t>(fleet_[slot].state.rid.cls)];
}

bool Simulation::step() {
  if (events_.empty()) {
    if (policy_ == Policy::GreedyFCFS && !waiting_.empty()) {
      dispatch_greedy(true);
      if (options_.check_invariants) check_invariants();
      return true;
    }
    return false;
  }
  const SimEvent ev = events_.top();
  events_.pop();
  now_ = ev.time;
  switch (ev.kind) {
    case SimEvent::Kind::RequestArrival: on_request_arrival(static_cast<RequestId>(ev.id)); break;
    case SimEvent::Kind::RobotArrives: on_robot_arrives(ev.id); break;
    case SimEvent::Kind::ChargeDone: on_charge_done(ev.id); break;
  }
  if (policy_ == Policy::GreedyFCFS && greedy_pending_) {
    greedy_pending_ = false;
    dispatch_greedy(false);
  }
  if (options_.check_invariants) check_invariants();
  return true;
}

TrialResult Simulation::run() {
  while (step()) {
  }
  auto& per = result_.metrics.per_request;
  std::sort(per.begin(), per.end(),
            [](const RequestRecord& a, const RequestRecord& b) { return a.j < b.j; });
  return result_;
}

void Simulation::on_request_arrival(RequestId j) {
  ++result_.metrics.arrived;
  const auto& req = request(j);
  if (validate_request(req, env_.catalog, env_.classes)) {
    reject(j);
    return;
  }
  if (policy_ == Policy::GreedyFCFS) {
    waiting_.push_back(j);
    greedy_pending_ = true;
    return;
  }

  queue_.push(j);
  const AuctionContext ctx{env_.planning, env_.classes, env_.catalog, now_};
  auto round = run_auction(jobs_[index_.at(j)], fleet_, queue_, ctx, bus_);
  if (round.winner) {
    std::size_t slot = 0;
    while (fleet_[slot].state.rid != *round.winner) ++slot;
    request(j) = transition_request(request(j), RequestStatus::InProgress);
    result_.metrics.per_request[index_.at(j)].winner = *round.winner;
    if (!fleet_[slot].moving) start_idle_robot(slot);
  } else {
    reject(j);
  }
  if (options_.record_rounds) result_.rounds.push_back(std::move(round));
}

void Simulation::on_robot_arrives(std::size_t slot) {
  auto& a = fleet_[slot];
  const ScheduleEntry& e = a.schedule.at(a.cursor);
  a.state.site = e.site;
  a.state.energy = e.energy_arrival;
  if (options_.record_visits) result_.visits[slot].push_back({now_, e.site, e.kind, e.request});
  switch (e.kind) {
    case StopKind::Pickup:
      a.state.carried_load += jobs_[index_.at(e.request)].demand;
      break;
    case StopKind::Dropoff:
      a.state.carried_load -= jobs_[index_.at(e.request)].demand;
      if (a.state.carried_load < 1e-9) a.state.carried_load = 0.0;
      complete(e.request, a.state.rid);
      a.state.srl.erase(std::remove(a.state.srl.begin(), a.state.srl.end(), e.request),
                        a.state.srl.end());
      break;
    case StopKind::Depot:
      a.state.status = RobotStatus::Charging;
      push(e.planned_end, SimEvent::Kind::ChargeDone, slot);
      return;
  }
  step_robot(slot);
}

void Simulation::on_charge_done(std::size_t slot) {
  auto& a = fleet_[slot];
  a.state.energy = a.schedule.at(a.cursor).energy_after;
  a.state.status = RobotStatus::Busy;
  step_robot(slot);
}

void Simulation::step_robot(std::size_t slot) {
  auto& a = fleet_[slot];
  if (a.dirty) {
    a.schedule = make_schedule(spec_of(slot), a.anchor, a.order, env_.planning);
    a.cursor = 0;
    a.dirty = false;
    ++result_.reschedules;
  } else {
    ++a.cursor;
  }
  commit_next(slot);
}

void Simulation::start_idle_robot(std::size_t slot) {
  auto& a = fleet_[slot];
  a.anchor.time = std::max(a.anchor.time, now_);
  a.schedule = make_schedule(spec_of(slot), a.anchor, a.order, env_.planning);
  a.cursor = 0;
  a.dirty = false;
  ++result_.reschedules;
  commit_next(slot);
}

void Simulation::commit_next(std::size_t slot) {
  auto& a = fleet_[slot];
  if (a.cursor >= a.schedule.size()) {
    if (!a.order.empty()) throw std::logic_error("schedule exhausted with route events left");
    a.moving = false;
    a.committed_demand = 0.0;
    a.schedule.clear();
    a.cursor = 0;
    a.state.status = RobotStatus::Free;
    greedy_pending_ = true;
    recharge_if_low(slot);
    return;
  }
  const ScheduleEntry& e = a.schedule[a.cursor];
  if (e.kind != StopKind::Depot) {
    if (a.order.empty() || a.order.front().job.id != e.request || a.order.front().kind != e.kind)
      throw std::logic_error("schedule and route disagree");
    a.order.erase(a.order.begin());
  }
  a.committed_demand = e.kind == StopKind::Dropoff ? jobs_[index_.at(e.request)].demand : 0.0;
  a.anchor = {e.site, e.planned_end, e.energy_after};
  a.moving = true;
  a.state.status = RobotStatus::Busy;
  push(e.planned_start, SimEvent::Kind::RobotArrives, slot);
}

// A free robot at or below the energy needed to reach a dock goes charging.
void Simulation::recharge_if_low(std::size_t slot) {
  auto& a = fleet_[slot];
  const auto& spec = spec_of(slot);
  const auto& ctx = env_.planning;
  const double d = ctx.nearest_depot_distance(a.anchor.site);
  const double me = power_at_velocity(spec, ctx.params()) * d / spec.speed;
  if (a.anchor.energy > me || a.anchor.energy >= spec.energy) return;
  const double t = d / spec.speed;
  const double leg = leg_energy(spec.weight, spec.speed, t, ctx.params());
  if (leg > a.anchor.energy) return;  // stranded; the energy monitor will not see a negative
  ScheduleEntry e;
  e.kind = StopKind::Depot;
  e.site = ctx.nearest_depot_site(a.anchor.site);
  e.travel_in = t;
  e.service = ctx.params().charge_s;
  e.planned_start = std::max(a.anchor.time, now_) + t;
  e.planned_end = e.planned_start + e.service;
  e.energy_arrival = a.anchor.energy - leg;
  e.energy_after = spec.energy;
  a.schedule = {e};
  a.cursor = 0;
  ++result_.idle_recharges;
  commit_next(slot);
}

void Simulation::assign(std::size_t slot, RequestId j, std::vector<RouteEvent> order) {
  auto& a = fleet_[slot];
  a.state.srl.push_back(j);
  a.order = std::move(order);
  a.dirty = true;
  request(j) = transition_request(request(j), RequestStatus::InProgress);
  result_.metrics.per_request[index_.at(j)].winner = a.state.rid;
}

std::optional<std::size_t> Simulation::first_free_capable(const Job& job) const {
  for (std::size_t slot = 0; slot < fleet_.size(); ++slot) {
    const auto& a = fleet_[slot];
    if (a.moving || !a.order.empty() || a.state.status != RobotStatus::Free) continue;
    const auto& spec = spec_of(slot);
    if (spec.can_serve(job.rtype) && job.demand <= spec.capacity) return slot;
  }
  return std::nullopt;
}

// First come, first served: the oldest waiting request goes to the first free
// robot (fleet order) whose abilities and capacity fit it, and waits while
// there is none. If that robot cannot complete it (a hard deadline it would
// miss), the request is rejected. A flush happens once nothing else will
// change; requests no robot in the fleet could ever take are rejected then.
void Simulation::dispatch_greedy(bool flush) {
  std::deque<RequestId> keep;
  for (const RequestId j : waiting_) {
    const Job& job = jobs_[index_.at(j)];
    const auto slot = first_free_capable(job);
    if (!slot) {
      keep.push_back(j);
      continue;
    }
    const auto& spec = spec_of(*slot);
    auto ins = evaluate_insertion(spec, robot_efficiency(spec, env_.catalog),
                                  bidding_anchor(fleet_[*slot], now_), {}, job, env_.planning);
    if (!ins.bid.feasible) {
      reject(j);
      continue;
    }
    assign(*slot, j, std::move(ins.order));
    start_idle_robot(*slot);
  }
  if (flush) {
    std::deque<RequestId> still;
    for (const RequestId j : keep) {
      const Job& job = jobs_[index_.at(j)];
      const bool servable = std::any_of(fleet_.begin(), fleet_.end(), [&](const RobotAgent& a) {
        const auto& spec = env_.classes[static_cast<std::size_t>(a.state.rid.cls)];
        return a.state.status != RobotStatus::Failed && spec.can_serve(job.rtype) &&
               job.demand <= spec.capacity;
      });
      if (servable) still.push_back(j);
      else reject(j);
    }
    keep = std::move(still);
  }
  waiting_ = std::move(keep);
}

void Simulation::complete(RequestId j, RobotId) {
  auto& req = request(j);
  req = transition_request(req, RequestStatus::Completed, now_);
  auto& rec = result_.metrics.per_request[index_.at(j)];
  rec.completion = now_;
  rec.outcome = RequestStatus::Completed;
  if (req.hard()) {
    if (now_ > req.deadline) ++result_.invariants.hard_deadline;
  } else {
    rec.penalty = std::max(0.0, now_ - req.deadline);
  }
  result_.metrics.cumulative_penalty += rec.penalty;
  ++result_.metrics.completed;
}

void Simulation::reject(RequestId j) {
  auto& req = request(j);
  req = transition_request(req, RequestStatus::Rejected);
  result_.metrics.per_request[index_.at(j)].outcome = RequestStatus::Rejected;
  ++result_.metrics.rejected;
}

void Simulation::check_invariants() {
  auto& inv = result_.invariants;
  ++inv.checks;
  std::unordered_set<RequestId> held;
  std::size_t in_progress = 0;
  for (std::size_t slot = 0; slot < fleet_.size(); ++slot) {
    const auto& a = fleet_[slot];
    const auto& spec = spec_of(slot);
    double srl_demand = 0.0;
    for (const RequestId j : a.state.srl) {
      srl_demand += jobs_[index_.at(j)].demand;
      if (!held.insert(j).second) ++inv.exclusivity;
      if (request(j).status != RequestStatus::InProgress) ++inv.exclusivity;
    }
    if (srl_demand > spec.capacity + 1e-9 || a.state.carried_load > spec.capacity + 1e-9)
      ++inv.capacity;
    if (a.state.energy < 0.0 || a.anchor.energy < 0.0) ++inv.energy;
  }
  for (const auto& r : requests_)
    if (r.status == RequestStatus::InProgress) ++in_progress;
  if (in_progress != held.size()) ++inv.exclusivity;
  for (const RequestId j : queue_.items())
    if (held.count(j)) ++inv.exclusivity;
  for (const RequestId j : waiting_)
    if (held.count(j)) ++inv.exclusivity;

  const auto& m = result_.metrics;
  const std::size_t accounted = static_cast<std::size_t>(m.completed + m.rejected) + in_progress +
                                queue_.size() + waiting_.size();
  if (accounted != static_cast<std::size_t>(m.arrived)) ++inv.conservation;
}

TrialResult run_trial(const ScenarioConfig& cfg, Policy policy, const Environment& env,
                      SimOptions options) {
  auto fleet = default_fleet(cfg.fleet, env.world, env.classes);
  Simulation sim(env, std::move(fleet), trial_requests(cfg, env), policy, options);
  return sim.run();
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_request_trace(std::ostream& out, const Metrics& metrics) {
  out << "j,rtype,AT,ET,DD,TC,winner,CT,penalty,outcome\n";
  for (const auto& r : metrics.per_request) {
    out << r.j << ',' << type_tag(r.rtype) << ',' << num(r.arrival) << ',' << num(r.earliest)
        << ',' << num(r.deadline) << ',' << to_string(r.constraint) << ','
        << (r.winner ? to_string(*r.winner) : std::string("none")) << ','
        << (r.completion ? num(*r.completion) : std::string()) << ',' << num(r.penalty) << ','
        << to_string(r.outcome) << '\n';
  }
}

}  // namespace odta
