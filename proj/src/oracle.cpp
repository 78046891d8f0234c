#include "odta/sim.hpp"

#include <stdexcept>

namespace odta {

namespace {

struct Best {
  double penalty = std::numeric_limits<double>::infinity();
  std::vector<RouteEvent> order;
};

// Every interleaving of the selected jobs with each pickup before its dropoff.
void enumerate(const RobotClassSpec& spec, const Anchor& anchor, std::span<const Job> jobs,
               std::vector<int>& stage, std::vector<RouteEvent>& order, std::size_t total,
               const PlanningContext& ctx, Best& best) {
  if (order.size() == total) {
    const auto out = simulate_route(spec, anchor, order, ctx, false, CapacityRule::OnBoard);
    if (out.feasible && out.penalty < best.penalty) {
      best.penalty = out.penalty;
      best.order = order;
    }
    return;
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (stage[i] >= 2) continue;
    order.push_back({jobs[i], stage[i] == 0 ? StopKind::Pickup : StopKind::Dropoff});
    ++stage[i];
    enumerate(spec, anchor, jobs, stage, order, total, ctx, best);
    --stage[i];
    order.pop_back();
  }
}

}  // namespace

OracleResult brute_force_oracle(std::span<const Job> jobs, std::span<const OracleRobot> robots,
                                const PlanningContext& ctx) {
  if (jobs.size() > 5 || robots.size() > 3)
    throw std::invalid_argument("oracle limited to 5 requests and 3 robots");
  if (robots.empty()) throw std::invalid_argument("oracle needs at least one robot");

  OracleResult result;
  std::vector<Job> servable;
  for (const auto& job : jobs) {
    bool ok = false;
    for (const auto& r : robots) {
      if (!r.spec.can_serve(job.rtype)) continue;
      const RouteEvent solo[] = {{job, StopKind::Pickup}, {job, StopKind::Dropoff}};
      if (simulate_route(r.spec, r.anchor, solo, ctx).feasible) {
        ok = true;
        break;
      }
    }
    if (ok) servable.push_back(job);
    else result.unassignable.push_back(job.id);
  }

  const std::size_t n = servable.size();
  const std::size_t masks = std::size_t{1} << n;
  std::vector<std::vector<Best>> best(robots.size(), std::vector<Best>(masks));
  for (std::size_t r = 0; r < robots.size(); ++r) {
    best[r][0].penalty = 0.0;
    for (std::size_t mask = 1; mask < masks; ++mask) {
      std::vector<Job> subset;
      bool typed = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(mask >> i & 1)) continue;
        typed = typed && robots[r].spec.can_serve(servable[i].rtype);
        subset.push_back(servable[i]);
      }
      if (!typed) continue;
      std::vector<int> stage(subset.size(), 0);
      std::vector<RouteEvent> order;
      enumerate(robots[r].spec, robots[r].anchor, subset, stage, order, 2 * subset.size(), ctx,
                best[r][mask]);
    }
  }

  // Assign each servable job to one robot: base-|robots| counter over jobs.
  std::vector<std::size_t> owner(n, 0);
  while (true) {
    std::vector<std::size_t> mask(robots.size(), 0);
    for (std::size_t i = 0; i < n; ++i) mask[owner[i]] |= std::size_t{1} << i;
    double total = 0.0;
    for (std::size_t r = 0; r < robots.size(); ++r) total += best[r][mask[r]].penalty;
    if (total < result.min_penalty) {
      result.min_penalty = total;
      result.feasible = true;
      result.routes.clear();
      for (std::size_t r = 0; r < robots.size(); ++r) result.routes.push_back(best[r][mask[r]].order);
    }
    std::size_t i = 0;
    while (i < n && ++owner[i] == robots.size()) owner[i++] = 0;
    if (i == n) break;
  }
  return result;
}

}  // namespace odta
