#include "odta/auction.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace odta {

Anchor bidding_anchor(const RobotAgent& robot, double now) {
  Anchor a = robot.anchor;
  if (!robot.moving) a.time = std::max(a.time, now);
  return a;
}

RobotId determine_auctioneer(RequestId j, std::span<const int> class_sizes) {
  const auto m = static_cast<RequestId>(class_sizes.size());
  if (m == 0) throw std::invalid_argument("no robot classes");
  const RequestId cls = j % m;
  const RequestId quotient = j / m;
  const int size = class_sizes[cls];
  if (size <= 0) throw std::invalid_argument("auctioneer class is empty");
  return {static_cast<int>(cls), static_cast<int>(quotient % static_cast<RequestId>(size))};
}

BidDetail compute_bid(const RobotAgent& robot, const RobotClassSpec& spec, const Job& job,
                      const AuctionContext& ctx) {
  BidDetail out;
  out.bid.rid = robot.state.rid;
  if (robot.state.status == RobotStatus::Failed) return out;
  if (!spec.can_serve(job.rtype)) return out;
  if (robot.committed_demand + route_demand(robot.order) + job.demand > spec.capacity) return out;
  const double eta = robot_efficiency(spec, ctx.catalog);
  auto ins = evaluate_insertion(spec, eta, bidding_anchor(robot, ctx.now), robot.order, job,
                                ctx.planning);
  out.bid.components = ins.bid;
  out.order = std::move(ins.order);
  return out;
}

bool outbids(const BidComponents& challenger, const BidComponents& current) {
  if (!challenger.feasible) return false;
  if (!current.feasible) return true;
  if (challenger.penalty != current.penalty) return challenger.penalty < current.penalty;
  if (challenger.eta != current.eta) return challenger.eta < current.eta;
  return challenger.energy_rem < current.energy_rem;
}

Bid best_bid(const Bid& current, const Bid& challenger) {
  return outbids(challenger.components, current.components) ? challenger : current;
}

bool GlobalQueue::contains(RequestId j) const {
  return std::find(pending_.begin(), pending_.end(), j) != pending_.end();
}

void GlobalQueue::remove(RequestId j) {
  auto it = std::find(pending_.begin(), pending_.end(), j);
  if (it != pending_.end()) pending_.erase(it);
}

void MessageBus::broadcast(RobotId, RequestId, std::size_t recipients) {
  ++broadcasts_;
  messages_ += recipients;
}

std::vector<Bid> MessageBus::collect() {
  std::vector<Bid> out;
  out.swap(inbox_);
  messages_ += out.size();
  if (reorder) reorder(out);
  return out;
}

std::string_view to_string(AuctionOutcome o) {
  return o == AuctionOutcome::Assigned ? "Assigned" : "Rejected";
}

std::vector<int> class_sizes(std::span<const RobotAgent> fleet, std::size_t classes) {
  std::vector<int> sizes(classes, 0);
  for (const auto& r : fleet) {
    const auto c = static_cast<std::size_t>(r.state.rid.cls);
    if (c >= classes) throw std::out_of_range("robot class outside class table");
    ++sizes[c];
  }
  return sizes;
}

AuctionRound run_auction(const Job& job, std::vector<RobotAgent>& fleet, GlobalQueue& queue,
                         const AuctionContext& ctx, MessageBus& bus) {
  if (!queue.contains(job.id)) throw std::logic_error("auctioned request is not queued");

  AuctionRound round;
  round.request = job.id;
  const auto sizes = class_sizes(fleet, ctx.classes.size());
  round.auctioneer = determine_auctioneer(job.id, sizes);

  auto find = [&](RobotId rid) -> RobotAgent& {
    for (auto& r : fleet)
      if (r.state.rid == rid) return r;
    throw std::out_of_range("robot not in fleet");
  };
  RobotAgent& auctioneer = find(round.auctioneer);
  auctioneer.state.aucq.push_back(job.id);
  bus.broadcast(round.auctioneer, job.id, fleet.size());

  std::vector<BidDetail> details;
  details.reserve(fleet.size());
  for (const auto& robot : fleet) {
    const auto& spec = ctx.classes[static_cast<std::size_t>(robot.state.rid.cls)];
    details.push_back(compute_bid(robot, spec, job, ctx));
    bus.reply(details.back().bid);
  }

  round.bids = bus.collect();
  std::sort(round.bids.begin(), round.bids.end(),
            [](const Bid& a, const Bid& b) { return a.rid < b.rid; });
  if (!round.bids.empty()) {
    Bid best = round.bids.front();
    for (std::size_t i = 1; i < round.bids.size(); ++i) best = best_bid(best, round.bids[i]);
    if (best.components.feasible) {
      round.winner = best.rid;
      round.winning = best.components;
    }
  }

  if (round.winner) {
    round.outcome = AuctionOutcome::Assigned;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      if (fleet[i].state.rid != *round.winner) continue;
      fleet[i].state.srl.push_back(job.id);
      fleet[i].order = std::move(details[i].order);
      fleet[i].dirty = true;
      break;
    }
  } else {
    round.outcome = AuctionOutcome::Rejected;
  }
  queue.remove(job.id);
  auto& aq = auctioneer.state.aucq;
  aq.erase(std::remove(aq.begin(), aq.end(), job.id), aq.end());
  return round;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_auction_trace(std::ostream& out, std::span<const AuctionRound> rounds) {
  out << "j,auctioneer,winner,outcome,penalty,eta,energy_rem\n";
  for (const auto& r : rounds) {
    out << r.request << ',' << to_string(r.auctioneer) << ','
        << (r.winner ? to_string(*r.winner) : std::string("none")) << ',' << to_string(r.outcome)
        << ',';
    if (r.winner)
      out << num(r.winning.penalty) << ',' << num(r.winning.eta) << ','
          << num(r.winning.energy_rem);
    else
      out << "inf,inf,inf";
    out << '\n';
  }
}

}  // namespace odta
