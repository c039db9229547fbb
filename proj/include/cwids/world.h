#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "cwids/config.h"
#include "cwids/kernel.h"
#include "cwids/messages.h"
#include "cwids/trace.h"
#include "cwids/types.h"

namespace cwids {

// Node positions plus random-waypoint motion. Waypoint targets are drawn in
// event order from the "mobility" stream, so positions are a pure function
// of (seed, query time).
class MobilityModel {
 public:
  MobilityModel(SimKernel& kernel, const ScenarioConfig& cfg);

  Position position(NodeId node, SimTime t) const;
  Position position_now(NodeId node) const;

 private:
  struct Leg {
    Position from;
    SimTime depart = 0.0;   // end of pause, start of motion
    Position to;
    double speed = 0.0;
    SimTime arrive = 0.0;
  };

  void schedule_arrival(NodeId node);
  void on_arrival(NodeId node);

  SimKernel& kernel_;
  const ScenarioConfig& cfg_;
  bool moving_ = false;
  std::vector<Leg> legs_;
};

// Unit-disk radio with a finite shared-rate transmitter per node. No
// contention model: loss is an optional independent per-delivery probability.
class World {
 public:
  using ReceiveFn = std::function<void(NodeId self, const Frame&, bool overheard)>;

  World(SimKernel& kernel, TraceLog& trace, const ScenarioConfig& cfg);

  void set_receiver(ReceiveFn fn) { receive_ = std::move(fn); }

  Position position(NodeId node) const;
  // All other nodes within tx range (inclusive) at the current clock.
  std::vector<NodeId> neighbors(NodeId node) const;
  std::uint32_t degree(NodeId node) const;
  bool in_range(NodeId a, NodeId b) const;

  // FIFO per-node transmitter: the frame goes on air once earlier frames
  // finish; receivers are captured at on-air time and called back one
  // airtime later. Unicast frames also raise overheard callbacks at
  // non-destination neighbors.
  void transmit(NodeId src, Frame frame);

  SimTime airtime(std::uint32_t bytes) const {
    return 8.0 * static_cast<double>(bytes) / cfg_.channel_bps;
  }

  std::uint32_t node_count() const { return cfg_.node_count; }

 private:
  void begin_tx(NodeId src);

  SimKernel& kernel_;
  TraceLog& trace_;
  const ScenarioConfig& cfg_;
  MobilityModel mobility_;
  ReceiveFn receive_;
  std::vector<std::deque<Frame>> tx_queue_;
  std::vector<bool> tx_busy_;
};

}  // namespace cwids
