#include <algorithm>

#include "cwids/node.h"
#include "cwids/simulation.h"
#include "cwids/wire.h"

namespace cwids {

void Node::dispatch_agent(const AgentRegistryEntry& entry) {
  AgentMsg msg;
  msg.agent_id = entry.agent_id;
  msg.origin_head = id_;
  msg.query = entry.query;
  msg.itinerary = entry.itinerary;
  msg.cursor = 0;
  msg.created_at = sim_.now();
  Frame f;
  f.kind = FrameKind::Agent;
  f.bytes = wire::agent_bytes(msg) + sim_.cfg().tag_bytes;
  f.body = std::move(msg);
  route_unicast(entry.itinerary.front(), std::move(f));
  const std::uint64_t agent_id = entry.agent_id;
  sim_.kernel().schedule(entry.deadline,
                         [this, agent_id] { agent_timeout(agent_id); });
}

void Node::agent_timeout(std::uint64_t agent_id) {
  auto lost = agent_registry_.settle_lost(agent_id);
  if (!lost) return;  // already returned
  const SimTime now = sim_.now();
  sim_.trace().emit(now, id_, "agent", "lost",
                    {{"id", std::to_string(agent_id)},
                     {"retry", std::to_string(lost->retries)}});
  if (cluster_.role != ClusterRole::Head) return;  // tenure ended meanwhile
  if (lost->retries < sim_.cfg().agent_max_retries) {
    const AgentRegistryEntry& fresh = agent_registry_.create(
        lost->query, lost->itinerary, lost->requester, now,
        sim_.cfg().agent_hop_timeout_s, lost->retries + 1);
    sim_.trace().emit(now, id_, "agent", "created",
                      {{"id", std::to_string(fresh.agent_id)},
                       {"suspect", TraceLog::fmt_id(fresh.query.suspect)},
                       {"metric", agent_metric_name(fresh.query.metric)},
                       {"hops", std::to_string(fresh.itinerary.size())},
                       {"retry", std::to_string(fresh.retries)},
                       {"deadline", TraceLog::fmt_time(fresh.deadline)}});
    dispatch_agent(fresh);
    return;
  }
  sim_.trace().emit(now, id_, "agent", "exhausted",
                    {{"suspect", TraceLog::fmt_id(lost->query.suspect)}});
  cooperative_detect(lost->query, {}, "exhausted");
}

void Node::handle_agent(const Frame& f, const AgentMsg& agent) {
  const NodeId target = agent.cursor < agent.itinerary.size()
                            ? agent.itinerary[agent.cursor]
                            : agent.origin_head;
  if (target != id_) {
    // Transit hop; subject to the same attacker behaviors as data.
    if (attack_is(AttackKind::Blackhole)) {
      sim_.trace().emit(sim_.now(), id_, "attack", "drop_agent",
                        {{"id", std::to_string(agent.agent_id)}});
      return;
    }
    if (attack_is(AttackKind::PacketDrop) &&
        sim_.kernel().rng("attack").bernoulli(attack_.spec.drop_prob)) {
      sim_.trace().emit(sim_.now(), id_, "attack", "drop_agent",
                        {{"id", std::to_string(agent.agent_id)}});
      return;
    }
    if (agent.hops_left == 0) return;
    AgentMsg fwd = agent;
    fwd.hops_left -= 1;
    Frame out;
    out.kind = FrameKind::Agent;
    out.bytes = wire::agent_bytes(fwd) + sim_.cfg().tag_bytes;
    out.body = std::move(fwd);
    route_unicast(target, std::move(out));
    return;
  }
  if (agent.origin_head == id_ && agent.cursor >= agent.itinerary.size()) {
    on_agent_return(agent);
    return;
  }
  execute_agent(agent);
}

void Node::execute_agent(AgentMsg agent) {
  const SimTime now = sim_.now();
  auto obs = audit_.observe(agent.query.metric, agent.query.suspect,
                            agent.query.window_start, agent.query.window_end);
  AgentResult r;
  r.node = id_;
  r.no_data = !obs.has_value();
  r.value = obs ? obs->value : 0.0;
  agent.results.push_back(r);
  agent.cursor += 1;
  sim_.trace().emit(now, id_, "agent", "hop",
                    {{"id", std::to_string(agent.agent_id)},
                     {"no_data", r.no_data ? "1" : "0"},
                     {"value", TraceLog::fmt_num(r.value)}});
  const NodeId next = agent.cursor < agent.itinerary.size()
                          ? agent.itinerary[agent.cursor]
                          : agent.origin_head;
  agent.hops_left = 32;
  Frame f;
  f.kind = FrameKind::Agent;
  f.bytes = wire::agent_bytes(agent) + sim_.cfg().tag_bytes;
  f.body = std::move(agent);
  route_unicast(next, std::move(f));
}

void Node::on_agent_return(const AgentMsg& agent) {
  const SimTime now = sim_.now();
  if (!agent_registry_.settle_returned(agent.agent_id)) {
    // Late duplicate from a timed-out round: the replacement is
    // authoritative and this result set is discarded.
    sim_.trace().emit(now, id_, "agent", "stale",
                      {{"id", std::to_string(agent.agent_id)}});
    return;
  }
  sim_.trace().emit(now, id_, "agent", "returned",
                    {{"id", std::to_string(agent.agent_id)},
                     {"results", std::to_string(agent.results.size())}});
  cooperative_detect(agent.query, agent.results, "returned");
}

void Node::cooperative_detect(const AgentQuery& query,
                              const std::vector<AgentResult>& results,
                              const char* why) {
  const SimTime now = sim_.now();
  std::vector<double> values;
  for (const AgentResult& r : results) {
    if (!r.no_data) values.push_back(r.value);
  }
  std::sort(values.begin(), values.end());
  if (values.size() < 2) {
    sim_.trace().emit(now, id_, "agent", "coop_verdict",
                      {{"suspect", TraceLog::fmt_id(query.suspect)},
                       {"verdict", "inconclusive"},
                       {"reason", values.empty() ? why : "quorum"},
                       {"observers", std::to_string(values.size())}});
    return;
  }
  const std::size_t n = values.size();
  const double median = n % 2 == 1
                            ? values[n / 2]
                            : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  const AnomalyRule* rule = nullptr;
  for (const AnomalyRule& r : base_.rules()) {
    if (r.metric == query.metric) rule = &r;
  }
  if (rule == nullptr) return;
  if (classify(*rule, median) == WindowOutcome::Alert) {
    sim_.trace().emit(now, id_, "agent", "coop_verdict",
                      {{"suspect", TraceLog::fmt_id(query.suspect)},
                       {"verdict", "confirmed"},
                       {"median", TraceLog::fmt_num(median)},
                       {"observers", std::to_string(n)}});
    raise_alert(DetectorKind::Cooperative, query.suspect, rule->attack_label,
                0.8);
    const MisuseSignature sig = InterpreterBase::derived_signature(
        query.metric, query.suspect, sim_.cfg());
    if (base_.learn(sig)) {
      sim_.trace().emit(now, id_, "alert", "learn",
                        {{"sig", sig.sig_id},
                         {"version", std::to_string(base_.version())}});
      CtlMsg delta;
      delta.type = CtlType::BaseDelta;
      delta.a = base_.version();
      for (const auto& [suspect, metric] : base_.learned_keys())
        delta.table2.emplace_back(suspect, static_cast<double>(metric));
      const std::uint32_t bytes =
          wire::kBaseDelta +
          8 * static_cast<std::uint32_t>(delta.table2.size());
      cluster_broadcast(std::move(delta), bytes, "base_delta");
    }
  } else {
    sim_.trace().emit(now, id_, "agent", "coop_verdict",
                      {{"suspect", TraceLog::fmt_id(query.suspect)},
                       {"verdict", "benign"},
                       {"median", TraceLog::fmt_num(median)},
                       {"observers", std::to_string(n)}});
  }
}

}  // namespace cwids
