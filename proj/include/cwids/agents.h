#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "cwids/messages.h"
#include "cwids/types.h"

namespace cwids {

enum class AgentStatus : std::uint8_t { InFlight, Returned, Lost };
const char* agent_status_name(AgentStatus s);

struct AgentRegistryEntry {
  std::uint64_t agent_id = 0;
  AgentQuery query;
  std::vector<NodeId> itinerary;
  NodeId requester = 0;
  SimTime deadline = 0.0;
  std::uint32_t retries = 0;
  AgentStatus status = AgentStatus::InFlight;
};

// Head-side database of dispatched agents. Terminal entries (Returned, Lost)
// are removed; the per-run lifecycle history lives in the trace.
class AgentRegistry {
 public:
  explicit AgentRegistry(NodeId head) : head_(head) {}

  // Creates an entry for a new agent; deadline = now + per_hop * |itinerary|.
  AgentRegistryEntry& create(const AgentQuery& query,
                             const std::vector<NodeId>& itinerary,
                             NodeId requester, SimTime now, SimTime per_hop,
                             std::uint32_t retries);

  AgentRegistryEntry* find(std::uint64_t agent_id);
  // Marks returned and removes; false for unknown/duplicate ids.
  bool settle_returned(std::uint64_t agent_id);
  // Marks lost and removes; nullopt when the id is not in flight.
  std::optional<AgentRegistryEntry> settle_lost(std::uint64_t agent_id);

  // An in-flight query for the same (suspect, metric) pair, if any.
  bool busy_with(NodeId suspect, AgentMetric metric) const;
  std::size_t in_flight() const { return entries_.size(); }

 private:
  NodeId head_;
  std::uint32_t next_local_id_ = 0;
  std::map<std::uint64_t, AgentRegistryEntry> entries_;
};

}  // namespace cwids
