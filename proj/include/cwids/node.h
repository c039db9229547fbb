#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cwids/agents.h"
#include "cwids/config.h"
#include "cwids/detection.h"
#include "cwids/messages.h"
#include "cwids/response.h"
#include "cwids/routing.h"
#include "cwids/trust.h"
#include "cwids/types.h"

namespace cwids {

class Simulation;

// Passive-clustering view of one node plus the head-side bookkeeping that
// only applies while the node acts as a cluster-head.
struct ClusterSide {
  ClusterRole role = ClusterRole::Unclustered;
  std::optional<NodeId> head_id;
  std::uint8_t hops_to_head = 0;
  std::optional<NodeId> via;  // relay toward a 2-hop head
  SimTime head_last_heard = 0.0;

  // head side
  struct MemberInfo {
    SimTime last_seen = 0.0;
    std::optional<NodeId> via;
  };
  std::map<NodeId, MemberInfo> registry;
  std::uint32_t beacon_counter = 0;
  std::uint32_t election_epoch = 0;
  std::set<NodeId> cluster_isolated;  // subjects this head has isolated

  // adjacency per foreign head
  struct PairInfo {
    SimTime head_direct = -1.0;                  // last direct contact
    std::map<NodeId, SimTime> candidates;        // bridges hearing both heads
    std::map<NodeId, std::pair<NodeId, SimTime>> paths;  // m -> (min m2, time)
    std::optional<NodeId> gateway;
    std::optional<std::pair<NodeId, NodeId>> dist_pair;
  };
  std::map<NodeId, PairInfo> adjacent;

  // member side: foreign heads heard directly, foreign 1-hop members heard
  std::map<NodeId, SimTime> direct_foreign_heads;
  std::map<NodeId, std::map<NodeId, SimTime>> foreign_members;
  std::map<NodeId, SimTime> gateway_for;  // peer head -> last assignment
  bool distributed_gateway = false;

  // broadcast dedup
  std::set<std::pair<NodeId, std::uint32_t>> beacons_seen;
  std::set<std::pair<NodeId, std::uint32_t>> bcasts_seen;
  std::uint32_t bcast_counter = 0;
};

struct AttackState {
  bool installed = false;
  AttackSpec spec;
  bool active = false;
};

// One simulated host: reactive routing, passive clustering, trust/election,
// mobile-agent execution, layered intrusion detection, and response
// enforcement, plus an optional installed attacker behavior that overrides
// the honest paths inside its window.
class Node {
 public:
  Node(NodeId id, Simulation& sim);

  NodeId id() const { return id_; }

  // --- frame entry from the radio ---
  void on_frame(const Frame& f, bool overheard);

  // --- application traffic ---
  void originate_data(NodeId dst, std::uint32_t flow, bool bogus);

  // --- attack control (harness) ---
  void install_attack(const AttackSpec& spec);

  // --- periodic detector hook (harness, every window) ---
  void on_window_close(SimTime end);

  // --- inspection (tests, harness) ---
  const ClusterSide& cluster() const { return cluster_; }
  const RouteTable& routes() const { return routes_; }
  TrustTable& trust() { return trust_; }
  const Blocklist& blocklist() const { return blocklist_; }
  const InterpreterBase& base() const { return base_; }
  const AuditStore& audit() const { return audit_; }
  AuditStore& audit_mut() { return audit_; }
  const AttackState& attack() const { return attack_; }
  std::uint32_t own_seq() const { return own_seq_; }
  std::vector<NodeId> neighbor_heads() const;

 private:
  // routing
  void route_unicast(NodeId final_dst, Frame frame);
  void flush_buffer(NodeId dst);
  void issue_rreq(NodeId dst);
  void rreq_retry(NodeId dst);
  void handle_rreq(const Frame& f, const RreqMsg& rreq);
  void handle_rrep(const Frame& f, const RrepMsg& rrep);
  void handle_data(const Frame& f, const DataPkt& pkt, bool overheard);
  void forward_data(const Frame& f, const DataPkt& pkt);
  Frame make_data_frame(const DataPkt& pkt) const;

  // clustering
  void maybe_declare_head();
  void become_head(const char* reason);
  void adopt_head(NodeId head, std::uint8_t hops, std::optional<NodeId> via);
  void become_unclustered(const char* reason);
  void on_tag(NodeId src, const PiggybackTag& tag);
  void on_beacon(const Frame& f, const BeaconMsg& b);
  void beacon_tick();
  void emit_beacon();
  void select_gateways();
  void send_contact_reports();
  void schedule_head_expiry();
  void schedule_member_expiry(NodeId member);
  void head_register(NodeId member, std::optional<NodeId> via, bool refresh);
  PiggybackTag current_tag() const;
  void send_to_head(CtlMsg msg, std::uint32_t bytes, const char* kind);
  void send_to_member(NodeId member, CtlMsg msg, std::uint32_t bytes,
                      const char* kind);
  void cluster_broadcast(CtlMsg msg, std::uint32_t bytes, const char* kind);
  void send_ctl(std::vector<NodeId> route, CtlMsg msg, std::uint32_t bytes,
                const char* kind);
  std::vector<NodeId> bridge_path(NodeId peer_head) const;

  // elections
  void election_tick();
  void initiate_election();
  void tally_election(std::uint32_t epoch);
  void cast_vote(NodeId head, std::uint32_t epoch,
                 const std::vector<NodeId>& candidates);
  void start_handover(NodeId winner, std::uint32_t epoch, bool retry);
  void complete_handover(NodeId new_head);
  void on_handover(const Frame& f, const CtlMsg& m);

  // control dispatch
  void handle_ctl(const Frame& f, const CtlMsg& m);

  // detection
  void record_audit(AuditRecord rec);
  void audit_rreq(const Frame& f, const RreqMsg& rreq);
  void audit_rrep(const Frame& f, const RrepMsg& rrep);
  void watchdog_handoff(NodeId next_hop, const DataPkt& pkt);
  void watchdog_hear(NodeId src, const DataPkt& pkt);
  void resolve_expectation(std::uint64_t key);
  void raise_alert(DetectorKind kind, NodeId suspect, const std::string& label,
                   double confidence);
  void report_to_head(const Alert& alert);
  void send_suspicion(NodeId suspect, AgentMetric metric, double value,
                      SimTime w_start, SimTime w_end);
  void head_on_alert_report(NodeId reporter, NodeId suspect,
                            DetectorKind detector, const std::string& label);
  void head_on_suspicion(NodeId requester, NodeId suspect, AgentMetric metric,
                         double value, SimTime w_start, SimTime w_end);

  // agents
  void dispatch_agent(const AgentRegistryEntry& entry);
  void agent_timeout(std::uint64_t agent_id);
  void handle_agent(const Frame& f, const AgentMsg& agent);
  void execute_agent(AgentMsg agent);
  void on_agent_return(const AgentMsg& agent);
  void cooperative_detect(const AgentQuery& query,
                          const std::vector<AgentResult>& results,
                          const char* why);

  // response
  void local_block(NodeId subject, const char* reason);
  void cluster_response(NodeId subject);
  void network_response(NodeId subject, NodeId issuer, std::uint32_t epoch);
  void apply_isolation(NodeId subject, NodeId issuer, const char* how);

  // attacks
  bool attack_is(AttackKind kind) const;
  void attack_start();
  void attack_stop();
  void flood_tick();
  void sleep_dep_tick();
  void send_forged_rrep(const Frame& f, const RreqMsg& rreq);

  NodeId id_;
  Simulation& sim_;

  // routing
  RouteTable routes_;
  SendBuffer buffer_;
  RreqSeen rreq_seen_;
  std::uint32_t own_seq_ = 0;
  std::uint32_t next_req_id_ = 0;
  std::set<NodeId> pending_rreq_;
  std::map<std::uint32_t, std::uint32_t> flow_seq_;

  // clustering / trust
  ClusterSide cluster_;
  TrustTable trust_;
  std::map<std::uint32_t, std::vector<Ballot>> ballots_;  // epoch -> ballots
  std::vector<NodeId> last_candidates_;  // member list from latest beacon
  std::optional<std::pair<NodeId, std::uint32_t>> pending_handover_;

  // detection
  AuditStore audit_;
  InterpreterBase base_;
  struct Expectation {
    NodeId suspect;
    SimTime deadline;
    bool satisfied = false;
  };
  std::map<std::uint64_t, Expectation> expectations_;
  std::set<std::tuple<std::string, NodeId, std::int64_t>> alert_dedup_;
  struct HeadLogEntry {
    std::set<NodeId> reporters;
    bool misuse = false;
    bool responded = false;
  };
  std::map<std::pair<NodeId, std::int64_t>, HeadLogEntry> head_log_;
  std::map<std::pair<NodeId, std::uint32_t>, SimTime> report_unacked_;
  std::uint32_t next_report_id_ = 0;
  std::map<NodeId, std::uint32_t> isolations_issued_;  // subject -> count

  // agents
  AgentRegistry agent_registry_;

  // response
  Blocklist blocklist_;
  ResponseDedup response_dedup_;
  std::uint32_t response_epoch_ = 0;
  std::set<NodeId> network_issued_;

  // attack
  AttackState attack_;
  std::uint32_t head_tenure_ = 0;
};

}  // namespace cwids
