#include <stdexcept>

#include "cwids/node.h"
#include "cwids/simulation.h"
#include "cwids/wire.h"

namespace cwids {

const char* role_name(ClusterRole r) {
  switch (r) {
    case ClusterRole::Unclustered: return "unclustered";
    case ClusterRole::Head: return "head";
    case ClusterRole::Member: return "member";
    case ClusterRole::Gateway: return "gateway";
    case ClusterRole::DistributedGateway: return "dist_gateway";
  }
  return "?";
}

const char* ctl_type_name(CtlType t) {
  switch (t) {
    case CtlType::Register: return "reg";
    case CtlType::RegisterAck: return "reg_ack";
    case CtlType::RegisterRefresh: return "reg_refresh";
    case CtlType::GwReport: return "gw_report";
    case CtlType::GwAssign: return "gw_assign";
    case CtlType::ElectionStart: return "election_start";
    case CtlType::Ballot: return "ballot";
    case CtlType::Handover: return "handover";
    case CtlType::HandoverAck: return "handover_ack";
    case CtlType::HeadChanged: return "head_changed";
    case CtlType::AlertReport: return "alert_report";
    case CtlType::ReportAck: return "report_ack";
    case CtlType::SuspicionReq: return "suspicion_req";
    case CtlType::BaseDelta: return "base_delta";
    case CtlType::ClusterIsolate: return "cluster_isolate";
    case CtlType::NetworkIsolate: return "network_isolate";
  }
  return "?";
}

Node::Node(NodeId id, Simulation& sim)
    : id_(id),
      sim_(sim),
      buffer_(sim.cfg().send_buffer),
      trust_(TrustParams{sim.cfg().trust_initial, sim.cfg().trust_penalty,
                         sim.cfg().trust_recovery_per_s, sim.cfg().trust_cap,
                         sim.cfg().trust_eligibility}),
      audit_(id, sim.cfg().audit_retention_s),
      base_(InterpreterBase::with_defaults(sim.cfg())),
      agent_registry_(id),
      blocklist_(id) {}

void Node::on_frame(const Frame& f, bool overheard) {
  const SimTime now = sim_.now();
  if (blocklist_.contains(f.src)) {
    if (!overheard)
      sim_.trace().emit(now, id_, "drop", "isolated_drop",
                        {{"from", TraceLog::fmt_id(f.src)}});
    return;
  }
  // Liveness bookkeeping rides on every frame heard.
  if (cluster_.role == ClusterRole::Head) {
    auto it = cluster_.registry.find(f.src);
    if (it != cluster_.registry.end()) it->second.last_seen = now;
  } else if (cluster_.head_id && f.src == *cluster_.head_id) {
    cluster_.head_last_heard = now;
  }
  if (f.tag) on_tag(f.src, *f.tag);

  switch (f.kind) {
    case FrameKind::Rreq: {
      const auto& rreq = std::get<RreqMsg>(f.body);
      audit_rreq(f, rreq);
      if (!blocklist_.contains(rreq.origin)) handle_rreq(f, rreq);
      break;
    }
    case FrameKind::Rrep: {
      const auto& rrep = std::get<RrepMsg>(f.body);
      audit_rrep(f, rrep);
      if (!overheard) handle_rrep(f, rrep);
      break;
    }
    case FrameKind::Data:
      handle_data(f, std::get<DataPkt>(f.body), overheard);
      break;
    case FrameKind::Agent:
      if (!overheard) handle_agent(f, std::get<AgentMsg>(f.body));
      break;
    case FrameKind::Beacon:
      on_beacon(f, std::get<BeaconMsg>(f.body));
      break;
    case FrameKind::Ctl:
      if (!overheard) handle_ctl(f, std::get<CtlMsg>(f.body));
      break;
  }
}

void Node::originate_data(NodeId dst, std::uint32_t flow, bool bogus) {
  const SimTime now = sim_.now();
  maybe_declare_head();
  DataPkt pkt;
  pkt.origin = id_;
  pkt.dst = dst;
  pkt.flow = flow;
  pkt.seq = flow_seq_[flow]++;
  pkt.bogus = bogus;
  if (bogus) {
    sim_.trace().emit(now, id_, "attack", "bogus_tx",
                      {{"dst", TraceLog::fmt_id(dst)},
                       {"seq", std::to_string(pkt.seq)}});
  } else {
    sim_.trace().emit(now, id_, "route", "originate",
                      {{"dst", TraceLog::fmt_id(dst)},
                       {"flow", std::to_string(flow)},
                       {"seq", std::to_string(pkt.seq)}});
  }
  route_unicast(dst, make_data_frame(pkt));
}

Frame Node::make_data_frame(const DataPkt& pkt) const {
  Frame f;
  f.kind = FrameKind::Data;
  f.bytes = sim_.cfg().packet_bytes + sim_.cfg().tag_bytes;
  f.body = pkt;
  return f;
}

PiggybackTag Node::current_tag() const {
  PiggybackTag tag;
  tag.sender_role = cluster_.role;
  tag.sender_head = cluster_.head_id;
  tag.hops_to_head = cluster_.hops_to_head;
  return tag;
}

std::vector<NodeId> Node::neighbor_heads() const {
  const SimTime now = sim_.now();
  const SimTime timeout = sim_.cfg().cluster_timeout_s;
  std::vector<NodeId> out;
  for (const auto& [peer, pi] : cluster_.adjacent) {
    bool fresh = pi.head_direct >= 0.0 && now - pi.head_direct < timeout;
    for (const auto& [n, t] : pi.candidates) fresh |= now - t < timeout;
    for (const auto& [m, p] : pi.paths) fresh |= now - p.second < timeout;
    if (fresh) out.push_back(peer);
  }
  return out;
}

}  // namespace cwids
