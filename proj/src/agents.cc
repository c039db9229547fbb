#include "cwids/agents.h"

#include <stdexcept>

namespace cwids {

const char* agent_status_name(AgentStatus s) {
  switch (s) {
    case AgentStatus::InFlight: return "in_flight";
    case AgentStatus::Returned: return "returned";
    case AgentStatus::Lost: return "lost";
  }
  return "?";
}

const char* agent_metric_name(AgentMetric m) {
  switch (m) {
    case AgentMetric::ForwardRatio: return "forward_ratio";
    case AgentMetric::RreqRate: return "rreq_rate";
    case AgentMetric::DestRxRate: return "dest_rx_rate";
  }
  return "?";
}

AgentRegistryEntry& AgentRegistry::create(const AgentQuery& query,
                                          const std::vector<NodeId>& itinerary,
                                          NodeId requester, SimTime now,
                                          SimTime per_hop,
                                          std::uint32_t retries) {
  if (itinerary.empty())
    throw std::invalid_argument("create_agent: empty itinerary");
  AgentRegistryEntry e;
  e.agent_id = (static_cast<std::uint64_t>(head_) << 32) | next_local_id_++;
  e.query = query;
  e.itinerary = itinerary;
  e.requester = requester;
  e.deadline = now + per_hop * static_cast<double>(itinerary.size());
  e.retries = retries;
  e.status = AgentStatus::InFlight;
  return entries_.emplace(e.agent_id, std::move(e)).first->second;
}

AgentRegistryEntry* AgentRegistry::find(std::uint64_t agent_id) {
  auto it = entries_.find(agent_id);
  return it == entries_.end() ? nullptr : &it->second;
}

bool AgentRegistry::settle_returned(std::uint64_t agent_id) {
  auto it = entries_.find(agent_id);
  if (it == entries_.end() || it->second.status != AgentStatus::InFlight)
    return false;
  entries_.erase(it);
  return true;
}

std::optional<AgentRegistryEntry> AgentRegistry::settle_lost(
    std::uint64_t agent_id) {
  auto it = entries_.find(agent_id);
  if (it == entries_.end() || it->second.status != AgentStatus::InFlight)
    return std::nullopt;
  AgentRegistryEntry e = std::move(it->second);
  e.status = AgentStatus::Lost;
  entries_.erase(it);
  return e;
}

bool AgentRegistry::busy_with(NodeId suspect, AgentMetric metric) const {
  for (const auto& [id, e] : entries_) {
    if (e.query.suspect == suspect && e.query.metric == metric) return true;
  }
  return false;
}

}  // namespace cwids
