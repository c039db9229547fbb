#include "cwids/node.h"
#include "cwids/simulation.h"
#include "cwids/wire.h"

namespace cwids {

namespace {

std::uint64_t pkt_key(const DataPkt& p) {
  return (static_cast<std::uint64_t>(p.origin) << 48) |
         (static_cast<std::uint64_t>(p.flow & 0xffff) << 32) | p.seq;
}

}  // namespace

void Node::route_unicast(NodeId final_dst, Frame frame) {
  const SimTime now = sim_.now();
  const RouteEntry* e = routes_.lookup(final_dst, now);
  if (e != nullptr && !blocklist_.contains(e->next_hop)) {
    frame.dst = e->next_hop;
    frame.tag = current_tag();
    if (frame.kind == FrameKind::Data) {
      const auto& pkt = std::get<DataPkt>(frame.body);
      if (e->next_hop != final_dst) watchdog_handoff(e->next_hop, pkt);
      sim_.trace().emit(now, id_, "route", "data_tx",
                        {{"origin", TraceLog::fmt_id(pkt.origin)},
                         {"flow", std::to_string(pkt.flow)},
                         {"seq", std::to_string(pkt.seq)},
                         {"next", TraceLog::fmt_id(e->next_hop)},
                         {"dst", TraceLog::fmt_id(final_dst)},
                         {"bogus", pkt.bogus ? "1" : "0"},
                         {"bytes", std::to_string(frame.bytes)}});
    } else if (frame.kind == FrameKind::Agent) {
      const auto& agent = std::get<AgentMsg>(frame.body);
      frame.bytes = wire::agent_bytes(agent) + sim_.cfg().tag_bytes;
      sim_.trace().emit(now, id_, "agent", "agent_tx",
                        {{"id", std::to_string(agent.agent_id)},
                         {"next", TraceLog::fmt_id(e->next_hop)},
                         {"bytes", std::to_string(frame.bytes)}});
    }
    sim_.world().transmit(id_, std::move(frame));
    return;
  }
  auto displaced = buffer_.push(final_dst, std::move(frame));
  if (displaced) {
    sim_.trace().emit(now, id_, "drop", "buffer_full",
                      {{"dst", TraceLog::fmt_id(displaced->final_dst)}});
  }
  issue_rreq(final_dst);
}

void Node::flush_buffer(NodeId dst) {
  if (!buffer_.has_for(dst)) return;
  if (routes_.lookup(dst, sim_.now()) == nullptr) return;
  for (auto& pending : buffer_.take_for(dst))
    route_unicast(dst, std::move(pending.frame));
}

void Node::issue_rreq(NodeId dst) {
  if (pending_rreq_.count(dst)) return;
  pending_rreq_.insert(dst);
  ++own_seq_;
  RreqMsg rreq;
  rreq.origin = id_;
  rreq.req_id = next_req_id_++;
  rreq.target = dst;
  rreq.origin_seq = own_seq_;
  rreq.hop_count = 0;
  sim_.trace().emit(sim_.now(), id_, "route", "rreq_tx",
                    {{"target", TraceLog::fmt_id(dst)},
                     {"req_id", std::to_string(rreq.req_id)}});
  Frame f;
  f.kind = FrameKind::Rreq;
  f.dst = kBroadcast;
  f.bytes = wire::kRreq;
  f.body = rreq;
  sim_.world().transmit(id_, std::move(f));
  sim_.kernel().schedule_in(sim_.cfg().rreq_retry_s,
                            [this, dst] { rreq_retry(dst); });
}

void Node::rreq_retry(NodeId dst) {
  pending_rreq_.erase(dst);
  if (!buffer_.has_for(dst)) return;
  if (routes_.lookup(dst, sim_.now()) != nullptr) {
    flush_buffer(dst);
    return;
  }
  issue_rreq(dst);
}

void Node::handle_rreq(const Frame& f, const RreqMsg& rreq) {
  const SimTime now = sim_.now();
  const ScenarioConfig& cfg = sim_.cfg();
  if (rreq.origin == id_) return;
  if (!rreq_seen_.insert(rreq.origin, rreq.req_id)) return;

  if (attack_is(AttackKind::Blackhole) && rreq.target != id_) {
    send_forged_rrep(f, rreq);
    return;
  }

  RouteEntry rev;
  rev.next_hop = f.src;
  rev.hop_count = rreq.hop_count + 1;
  rev.dst_seq = rreq.origin_seq;
  rev.expires_at = now + cfg.route_expiry_s;
  routes_.offer(rreq.origin, rev);
  flush_buffer(rreq.origin);

  if (rreq.target == id_) {
    ++own_seq_;
    RrepMsg rrep;
    rrep.origin = rreq.origin;
    rrep.target = id_;
    rrep.target_seq = own_seq_;
    rrep.hop_count = 0;
    Frame out;
    out.kind = FrameKind::Rrep;
    out.dst = f.src;
    out.bytes = wire::kRrep;
    out.body = rrep;
    sim_.world().transmit(id_, std::move(out));
    return;
  }
  const RouteEntry* cached = routes_.lookup(rreq.target, now);
  if (cached != nullptr && cached->dst_seq > 0 &&
      !blocklist_.contains(cached->next_hop)) {
    RrepMsg rrep;
    rrep.origin = rreq.origin;
    rrep.target = rreq.target;
    rrep.target_seq = cached->dst_seq;
    rrep.hop_count = cached->hop_count;
    Frame out;
    out.kind = FrameKind::Rrep;
    out.dst = f.src;
    out.bytes = wire::kRrep;
    out.body = rrep;
    sim_.world().transmit(id_, std::move(out));
    return;
  }
  if (rreq.hop_count < cfg.rreq_ttl) {
    RreqMsg fwd = rreq;
    fwd.hop_count += 1;
    Frame out;
    out.kind = FrameKind::Rreq;
    out.dst = kBroadcast;
    out.bytes = wire::kRreq;
    out.body = fwd;
    sim_.world().transmit(id_, std::move(out));
  }
}

void Node::handle_rrep(const Frame& f, const RrepMsg& rrep) {
  const SimTime now = sim_.now();
  RouteEntry entry;
  entry.next_hop = f.src;
  entry.hop_count = rrep.hop_count + 1;
  entry.dst_seq = rrep.target_seq;
  entry.expires_at = now + sim_.cfg().route_expiry_s;
  if (rrep.target != id_ && routes_.offer(rrep.target, entry)) {
    sim_.trace().emit(now, id_, "route", "route_install",
                      {{"dst", TraceLog::fmt_id(rrep.target)},
                       {"next", TraceLog::fmt_id(f.src)},
                       {"hops", std::to_string(entry.hop_count)},
                       {"seq", std::to_string(entry.dst_seq)}});
    flush_buffer(rrep.target);
  }
  if (rrep.origin == id_) return;
  const RouteEntry* rev = routes_.lookup(rrep.origin, now);
  if (rev == nullptr || blocklist_.contains(rev->next_hop)) return;
  RrepMsg fwd = rrep;
  fwd.hop_count += 1;
  Frame out;
  out.kind = FrameKind::Rrep;
  out.dst = rev->next_hop;
  out.bytes = wire::kRrep;
  out.body = fwd;
  sim_.world().transmit(id_, std::move(out));
}

void Node::handle_data(const Frame& f, const DataPkt& pkt, bool overheard) {
  const SimTime now = sim_.now();
  watchdog_hear(f.src, pkt);
  // Final-hop receptions feed the per-destination pressure metric.
  if (pkt.origin != id_ && f.dst == pkt.dst) {
    AuditRecord rec;
    rec.time = now;
    rec.layer = AuditLayer::Network;
    rec.kind = "data_rx";
    rec.actor = pkt.origin;
    rec.fields["dst"] = static_cast<double>(pkt.dst);
    record_audit(std::move(rec));
  }
  if (overheard) return;
  if (blocklist_.contains(pkt.origin)) {
    sim_.trace().emit(now, id_, "drop", "isolated_drop",
                      {{"from", TraceLog::fmt_id(pkt.origin)}});
    return;
  }
  if (pkt.dst == id_) {
    sim_.trace().emit(now, id_, "route", "deliver",
                      {{"origin", TraceLog::fmt_id(pkt.origin)},
                       {"flow", std::to_string(pkt.flow)},
                       {"seq", std::to_string(pkt.seq)},
                       {"bogus", pkt.bogus ? "1" : "0"}});
    return;
  }
  forward_data(f, pkt);
}

void Node::forward_data(const Frame& f, const DataPkt& pkt) {
  const SimTime now = sim_.now();
  if (attack_is(AttackKind::Blackhole)) {
    sim_.trace().emit(now, id_, "attack", "drop_data",
                      {{"origin", TraceLog::fmt_id(pkt.origin)},
                       {"flow", std::to_string(pkt.flow)},
                       {"seq", std::to_string(pkt.seq)}});
    return;
  }
  if (attack_is(AttackKind::PacketDrop)) {
    const AttackSpec& spec = attack_.spec;
    if (sim_.kernel().rng("attack").bernoulli(spec.drop_prob)) {
      sim_.trace().emit(now, id_, "attack", "drop_data",
                        {{"origin", TraceLog::fmt_id(pkt.origin)},
                         {"flow", std::to_string(pkt.flow)},
                         {"seq", std::to_string(pkt.seq)}});
      return;
    }
  }
  if (pkt.hops_left == 0) {
    sim_.trace().emit(now, id_, "drop", "hop_limit",
                      {{"origin", TraceLog::fmt_id(pkt.origin)}});
    return;
  }
  DataPkt next = pkt;
  next.hops_left -= 1;
  route_unicast(pkt.dst, make_data_frame(next));
}

void Node::watchdog_handoff(NodeId next_hop, const DataPkt& pkt) {
  const SimTime now = sim_.now();
  const std::uint64_t key = pkt_key(pkt);
  Expectation exp;
  exp.suspect = next_hop;
  exp.deadline = now + sim_.cfg().watchdog_deadline_s;
  expectations_[key] = exp;
  sim_.kernel().schedule(exp.deadline, [this, key] { resolve_expectation(key); });
}

void Node::watchdog_hear(NodeId src, const DataPkt& pkt) {
  auto it = expectations_.find(pkt_key(pkt));
  if (it == expectations_.end()) return;
  if (it->second.suspect != src) return;
  it->second.satisfied = true;
}

void Node::resolve_expectation(std::uint64_t key) {
  auto it = expectations_.find(key);
  if (it == expectations_.end()) return;
  AuditRecord rec;
  rec.time = sim_.now();
  rec.layer = AuditLayer::Network;
  rec.kind = it->second.satisfied ? "forward_ok" : "forward_miss";
  rec.actor = it->second.suspect;
  expectations_.erase(it);
  record_audit(std::move(rec));
}

}  // namespace cwids
