#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>

#include "cwids/messages.h"
#include "cwids/types.h"

namespace cwids {

struct RouteEntry {
  NodeId next_hop = 0;
  std::uint32_t hop_count = 1;
  std::uint32_t dst_seq = 0;
  SimTime expires_at = 0.0;
};

// Per-destination reactive routes with sequence-number freshness. Expired
// entries are never returned.
class RouteTable {
 public:
  const RouteEntry* lookup(NodeId dst, SimTime now) const;
  // Installs or replaces per freshness: newer dst_seq wins, equal dst_seq
  // with fewer hops wins. Returns true when the table changed.
  bool offer(NodeId dst, const RouteEntry& entry);
  void remove(NodeId dst);
  void clear() { routes_.clear(); }
  const std::map<NodeId, RouteEntry>& entries() const { return routes_; }

 private:
  std::map<NodeId, RouteEntry> routes_;
};

// Fixed-capacity FIFO of frames awaiting a route; overflow drops the oldest.
class SendBuffer {
 public:
  explicit SendBuffer(std::size_t capacity) : capacity_(capacity) {}

  struct Pending {
    NodeId final_dst;
    Frame frame;
  };

  // Returns the displaced frame when the buffer was full.
  std::optional<Pending> push(NodeId final_dst, Frame frame);
  // Removes and returns all frames waiting on dst, oldest first.
  std::vector<Pending> take_for(NodeId dst);
  std::size_t size() const { return q_.size(); }
  bool has_for(NodeId dst) const;

 private:
  std::size_t capacity_;
  std::deque<Pending> q_;
};

// Duplicate-RREQ memory: one entry per (origin, req_id).
class RreqSeen {
 public:
  bool insert(NodeId origin, std::uint32_t req_id) {
    return seen_.insert({origin, req_id}).second;
  }

 private:
  std::set<std::pair<NodeId, std::uint32_t>> seen_;
};

}  // namespace cwids
