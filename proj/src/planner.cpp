#include "odta/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace odta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Slack for comparing Floyd-Warshall sums against forward-propagated times.
constexpr double kTimeTolerance = 1e-6;

}  // namespace

PlanningContext::PlanningContext(DistanceMatrix matrix, std::vector<SiteId> depot_sites,
                                 EnergyParams params)
    : matrix_(std::move(matrix)), depot_sites_(std::move(depot_sites)), params_(params) {
  params_.validate();
  if (depot_sites_.empty()) throw std::invalid_argument("planning context needs a depot");
  const std::size_t n = matrix_.size();
  for (SiteId d : depot_sites_)
    if (d >= n) throw std::out_of_range("depot site outside distance matrix");
  nearest_site_.assign(n, depot_sites_.front());
  nearest_m_.assign(n, kInf);
  for (SiteId s = 0; s < n; ++s) {
    for (SiteId d : depot_sites_) {
      if (matrix_(s, d) < nearest_m_[s]) {
        nearest_m_[s] = matrix_(s, d);
        nearest_site_[s] = d;
      }
    }
  }
}

PlanningContext PlanningContext::for_world(const GridWorld& world, EnergyParams params) {
  const auto sites = world.sites();
  std::vector<SiteId> depots;
  for (std::size_t i = 0; i < world.depots().size(); ++i)
    depots.push_back(world.locations().size() + i);
  return PlanningContext(precompute_distances(world, sites), std::move(depots), params);
}

double RouteOutcome::completion_of(RequestId id) const {
  for (const auto& e : entries)
    if (e.kind == StopKind::Dropoff && e.request == id) return e.planned_start;
  return kInf;
}

double return_reserve(const RobotClassSpec& spec, SiteId site, double load,
                      const PlanningContext& ctx) {
  const double d = ctx.nearest_depot_distance(site);
  return leg_energy(spec.weight + load, spec.speed, d / spec.speed, ctx.params());
}

double route_demand(std::span<const RouteEvent> order) {
  double total = 0.0;
  for (const auto& ev : order)
    if (ev.kind == StopKind::Dropoff) total += ev.job.demand;
  return total;
}

namespace {

double carried_at_start(std::span<const RouteEvent> order) {
  double load = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i].kind != StopKind::Dropoff) continue;
    bool picked_here = false;
    for (std::size_t k = 0; k < i; ++k)
      if (order[k].kind == StopKind::Pickup && order[k].job.id == order[i].job.id) picked_here = true;
    if (!picked_here) load += order[i].job.demand;
  }
  return load;
}

}  // namespace

namespace {

// Shared by simulate_route and evaluate_insertion; returns the completion time
// of `watch` through the out-parameter.
RouteOutcome walk(const RobotClassSpec& spec, const Anchor& anchor,
                  std::span<const RouteEvent> order, const PlanningContext& ctx, bool record,
                  RequestId watch, double* watch_completion,
                  CapacityRule capacity = CapacityRule::RouteSum) {
  RouteOutcome out;
  auto fail = [&](RouteFailure f) {
    out.feasible = false;
    out.failure = f;
    return out;
  };
  if (capacity == CapacityRule::RouteSum && route_demand(order) > spec.capacity)
    return fail(RouteFailure::Capacity);

  const double v = spec.speed;
  const EnergyParams& params = ctx.params();
  double load = carried_at_start(order);
  SiteId cur = anchor.site;
  double t = anchor.time;
  double e = anchor.energy;
  double used = 0.0;
  double penalty = 0.0;
  if (record) out.entries.reserve(order.size() + 2);

  for (const auto& ev : order) {
    const SiteId target = ev.site();
    const double load_after =
        ev.kind == StopKind::Pickup ? load + ev.job.demand : load - ev.job.demand;
    if (load_after > spec.capacity) return fail(RouteFailure::Capacity);
    const double reserve = return_reserve(spec, target, load_after, ctx);
    const double mass = spec.weight + load;

    double d = ctx.distance(cur, target);
    if (!std::isfinite(d)) return fail(RouteFailure::Unreachable);
    double leg_t = d / v;
    double leg_e = leg_energy(mass, v, leg_t, params);

    if (e - leg_e < reserve) {
      const SiteId depot = ctx.nearest_depot_site(cur);
      const double dd = ctx.nearest_depot_distance(cur);
      if (!std::isfinite(dd)) return fail(RouteFailure::Unreachable);
      const double dt = dd / v;
      const double de = leg_energy(mass, v, dt, params);
      if (e - de < 0.0) return fail(RouteFailure::Energy);
      const double arrival = t + dt;
      if (record) {
        ScheduleEntry s;
        s.kind = StopKind::Depot;
        s.site = depot;
        s.travel_in = dt;
        s.service = params.charge_s;
        s.planned_start = arrival;
        s.planned_end = arrival + params.charge_s;
        s.energy_arrival = e - de;
        s.energy_after = spec.energy;
        s.load_after = load;
        out.entries.push_back(s);
      }
      used += de;
      t = arrival + params.charge_s;
      e = spec.energy;
      cur = depot;

      d = ctx.distance(cur, target);
      if (!std::isfinite(d)) return fail(RouteFailure::Unreachable);
      leg_t = d / v;
      leg_e = leg_energy(mass, v, leg_t, params);
      if (e - leg_e < reserve) return fail(RouteFailure::Energy);
    }

    const double arrival = t + leg_t;
    double start = arrival;
    if (ev.kind == StopKind::Pickup) start = std::max(arrival, ev.job.release);
    e -= leg_e;
    used += leg_e;

    if (ev.kind == StopKind::Dropoff) {
      if (ev.job.hard) {
        if (start > ev.job.deadline) return fail(RouteFailure::HardDeadline);
      } else {
        penalty += std::max(0.0, start - ev.job.deadline);
      }
      if (ev.job.id == watch && watch_completion) *watch_completion = start;
    }

    if (record) {
      ScheduleEntry s;
      s.kind = ev.kind;
      s.request = ev.job.id;
      s.site = target;
      s.travel_in = leg_t;
      if (ev.kind == StopKind::Pickup) s.release = ev.job.release;
      if (ev.kind == StopKind::Dropoff && ev.job.hard) s.deadline = ev.job.deadline;
      s.planned_start = start;
      s.planned_end = start;
      s.energy_arrival = e;
      s.energy_after = e;
      s.load_after = load_after;
      out.entries.push_back(s);
    }
    t = start;
    cur = target;
    load = load_after;
  }

  out.feasible = true;
  out.penalty = penalty;
  out.finish_time = t;
  out.used_energy = used;
  out.energy_rem = e;
  return out;
}

}  // namespace

RouteOutcome simulate_route(const RobotClassSpec& spec, const Anchor& anchor,
                            std::span<const RouteEvent> order, const PlanningContext& ctx,
                            bool record_entries, CapacityRule capacity) {
  return walk(spec, anchor, order, ctx, record_entries, 0, nullptr, capacity);
}

TemporalNetwork<double> build_and_solve(double anchor_time, std::span<const ScheduleEntry> entries) {
  using Index = Eigen::Index;
  TemporalNetwork<double> net(static_cast<Index>(entries.size()) + 1);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Index point = static_cast<Index>(k) + 1;
    const Index prev = static_cast<Index>(k);
    const double gap = (k == 0 ? 0.0 : entries[k - 1].service) + entries[k].travel_in;
    net.require_gap(prev, point, gap);
    const auto& e = entries[k];
    if (std::isfinite(e.release)) net.window(point, e.release - anchor_time, kInf);
    if (std::isfinite(e.deadline)) net.window(point, -kInf, e.deadline - anchor_time);
  }
  net.solve(kTimeTolerance);
  return net;
}

namespace {

bool stn_confirms(double anchor_time, std::span<const ScheduleEntry> entries) {
  const auto net = build_and_solve(anchor_time, entries);
  if (!net.consistent()) return false;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const double earliest = anchor_time + net.earliest(static_cast<Eigen::Index>(k) + 1);
    if (std::abs(earliest - entries[k].planned_start) > kTimeTolerance) return false;
  }
  return true;
}

void build_candidate(std::span<const RouteEvent> existing, const Job& candidate, std::size_t i,
                     std::size_t k, std::vector<RouteEvent>& out) {
  out.clear();
  for (std::size_t p = 0; p < i; ++p) out.push_back(existing[p]);
  out.push_back({candidate, StopKind::Pickup});
  for (std::size_t p = i; p < k; ++p) out.push_back(existing[p]);
  out.push_back({candidate, StopKind::Dropoff});
  for (std::size_t p = k; p < existing.size(); ++p) out.push_back(existing[p]);
}

}  // namespace

StartWindow start_window(const Job& job, const RobotClassSpec& spec, const Anchor& anchor,
                         const PlanningContext& ctx) {
  const double v = spec.speed;
  const double to_pickup = ctx.distance(anchor.site, job.pickup);
  const double direct = ctx.distance(job.pickup, job.dropoff);
  if (!std::isfinite(to_pickup) || !std::isfinite(direct))
    throw std::runtime_error("request locations unreachable");

  const auto& params = ctx.params();
  const double power = power_at_velocity(spec, params);
  const double projected = leg_energy(spec.weight, v, to_pickup / v, params) +
                           leg_energy(spec.weight + job.demand, v, direct / v, params);
  const double return_energy = power * ctx.nearest_depot_distance(job.dropoff) / v;
  const double remaining_tt = anchor.energy / power;

  StartWindow w;
  w.recharge = anchor.energy - projected < return_energy || (to_pickup + direct) / v > remaining_tt;
  double tail = direct / v;
  if (w.recharge) {
    const SiteId depot = ctx.nearest_depot_site(job.pickup);
    tail = ctx.nearest_depot_distance(job.pickup) / v + params.charge_s +
           ctx.distance(depot, job.dropoff) / v;
  }
  w.lo = job.release;
  w.hi = job.deadline - to_pickup / v - tail;
  return w;
}

Insertion evaluate_insertion(const RobotClassSpec& spec, double eta, const Anchor& anchor,
                             std::span<const RouteEvent> existing, const Job& candidate,
                             const PlanningContext& ctx) {
  Insertion result;
  if (route_demand(existing) + candidate.demand > spec.capacity) return result;

  using Key = std::tuple<double, double, double>;
  struct Scored {
    Key key;
    std::size_t i;
    std::size_t k;
  };
  std::vector<Scored> feasible;
  std::vector<RouteEvent> scratch;
  scratch.reserve(existing.size() + 2);

  const std::size_t n = existing.size();
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t k = i; k <= n; ++k) {
      build_candidate(existing, candidate, i, k, scratch);
      double ct = kInf;
      const auto out = walk(spec, anchor, scratch, ctx, false, candidate.id, &ct);
      if (!out.feasible) continue;
      feasible.push_back({{out.penalty, ct, out.used_energy}, i, k});
    }
  }
  // stable: equal keys keep enumeration order, so the earliest position wins
  std::stable_sort(feasible.begin(), feasible.end(),
                   [](const Scored& a, const Scored& b) { return a.key < b.key; });

  for (const auto& cand : feasible) {
    build_candidate(existing, candidate, cand.i, cand.k, scratch);
    const auto out = simulate_route(spec, anchor, scratch, ctx, true);
    if (!stn_confirms(anchor.time, out.entries)) continue;
    result.bid.penalty = out.penalty;
    result.bid.completion_time = std::get<1>(cand.key);
    result.bid.eta = eta;
    result.bid.used_energy = out.used_energy;
    result.bid.energy_rem = out.energy_rem;
    result.bid.feasible = true;
    result.order = scratch;
    result.pickup_pos = cand.i;
    result.dropoff_pos = cand.k + 1;
    break;
  }
  return result;
}

std::vector<ScheduleEntry> make_schedule(const RobotClassSpec& spec, const Anchor& anchor,
                                         std::span<const RouteEvent> order,
                                         const PlanningContext& ctx) {
  auto out = simulate_route(spec, anchor, order, ctx, true);
  if (!out.feasible) throw std::logic_error("accepted route is no longer feasible");
  if (!stn_confirms(anchor.time, out.entries))
    throw std::logic_error("schedule temporal network is inconsistent");
  return std::move(out.entries);
}

}  // namespace odta
