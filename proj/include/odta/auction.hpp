#pragma once

#include "odta/model.hpp"
#include "odta/planner.hpp"

#include <cstddef>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace odta {

/// A robot as the auction and the simulator see it: its public state plus the
/// route it has committed to.
struct RobotAgent {
  RobotState state;
  /// State after the stop the robot is currently heading to (or where it
  /// idles); all re-planning starts here.
  Anchor anchor;
  /// Pickups and dropoffs still to do after the anchor.
  std::vector<RouteEvent> order;
  std::vector<ScheduleEntry> schedule;
  std::size_t cursor = 0;  // schedule entry currently committed to
  /// Demand of a request whose dropoff is underway: still in the SRL but no
  /// longer part of `order`.
  double committed_demand = 0.0;
  bool moving = false;     // an arrival or charge-done event is pending
  bool dirty = false;      // SRL changed since the last schedule solve
};

/// Anchor a bid is evaluated from; an idle robot can leave no earlier than now.
Anchor bidding_anchor(const RobotAgent& robot, double now);

struct AuctionContext {
  const PlanningContext& planning;
  std::span<const RobotClassSpec> classes;
  const RequestTypeCatalog& catalog;
  double now = 0.0;
};

struct Bid {
  RobotId rid;
  BidComponents components;
};

struct BidDetail {
  Bid bid;
  std::vector<RouteEvent> order;  // the robot's route if it wins
};

/// Round-robin auctioneer: class j mod m, then robot floor(j/m) mod |class|.
/// Throws std::invalid_argument for zero classes or an empty selected class.
RobotId determine_auctioneer(RequestId j, std::span<const int> class_sizes);

/// Appends the request tentatively to the robot's route and evaluates every
/// insertion position. Type mismatch, capacity (whole SRL plus the request),
/// energy or deadline failure
/// all yield an infeasible (infinite) bid.
BidDetail compute_bid(const RobotAgent& robot, const RobotClassSpec& spec, const Job& job,
                      const AuctionContext& ctx);

/// True when `challenger` strictly beats `current`: lower penalty, then lower
/// efficiency, then lower remaining energy. Infeasible bids never win.
bool outbids(const BidComponents& challenger, const BidComponents& current);

/// Keeps the current best on a full tie.
Bid best_bid(const Bid& current, const Bid& challenger);

class GlobalQueue {
 public:
  void push(RequestId j) { pending_.push_back(j); }
  bool contains(RequestId j) const;
  void remove(RequestId j);
  bool empty() const { return pending_.empty(); }
  std::size_t size() const { return pending_.size(); }
  const std::deque<RequestId>& items() const { return pending_; }

 private:
  std::deque<RequestId> pending_;
};

/// In-process broadcast/reply channel. Delivery is reliable and instantaneous;
/// `reorder` lets callers perturb the order in which replies arrive.
class MessageBus {
 public:
  std::function<void(std::vector<Bid>&)> reorder;

  void broadcast(RobotId from, RequestId j, std::size_t recipients);
  void reply(const Bid& bid) { inbox_.push_back(bid); }
  /// Drains the inbox in arrival order.
  std::vector<Bid> collect();

  std::size_t broadcasts() const { return broadcasts_; }
  std::size_t messages() const { return messages_; }

 private:
  std::vector<Bid> inbox_;
  std::size_t broadcasts_ = 0;
  std::size_t messages_ = 0;
};

enum class AuctionOutcome { Assigned, Rejected };
std::string_view to_string(AuctionOutcome o);

struct AuctionRound {
  RequestId request = 0;
  RobotId auctioneer;
  std::vector<Bid> bids;  // in scan order
  std::optional<RobotId> winner;
  BidComponents winning;
  AuctionOutcome outcome = AuctionOutcome::Rejected;
};

/// Class sizes of a fleet ordered by (class, index).
std::vector<int> class_sizes(std::span<const RobotAgent> fleet, std::size_t classes);

/// One auction for a queued request. The auctioneer queues and broadcasts it,
/// every robot bids, replies are folded in (class, index) order. The winner
/// takes the request into its SRL and adopts the bid's route; a round where
/// every bid is infinite rejects the request. Either way it leaves the queue.
/// Throws std::logic_error when the request is not in the queue.
AuctionRound run_auction(const Job& job, std::vector<RobotAgent>& fleet, GlobalQueue& queue,
                         const AuctionContext& ctx, MessageBus& bus);

/// j,auctioneer,winner,outcome,penalty,eta,energy_rem
void write_auction_trace(std::ostream& out, std::span<const AuctionRound> rounds);

}  // namespace odta
