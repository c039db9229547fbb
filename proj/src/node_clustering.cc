#include <algorithm>

#include "cwids/node.h"
#include "cwids/simulation.h"
#include "cwids/wire.h"

namespace cwids {

void Node::maybe_declare_head() {
  // Passive clustering is on-demand: a node with traffic to send and no
  // live head claim heard declares itself head first.
  if (cluster_.role != ClusterRole::Unclustered) return;
  become_head("first_declaration");
}

void Node::become_head(const char* reason) {
  const SimTime now = sim_.now();
  cluster_.role = ClusterRole::Head;
  cluster_.head_id = id_;
  cluster_.hops_to_head = 0;
  cluster_.via.reset();
  cluster_.registry.clear();
  cluster_.gateway_for.clear();
  sim_.trace().emit(now, id_, "cluster", "role_change",
                    {{"role", "head"}, {"reason", reason}});
  const std::uint32_t tenure = ++head_tenure_;
  sim_.kernel().schedule_in(sim_.cfg().beacon_period_s, [this, tenure] {
    if (head_tenure_ == tenure) beacon_tick();
  });
  sim_.kernel().schedule_in(sim_.election_period(), [this, tenure] {
    if (head_tenure_ == tenure) election_tick();
  });
}

void Node::adopt_head(NodeId head, std::uint8_t hops,
                      std::optional<NodeId> via) {
  const SimTime now = sim_.now();
  cluster_.role = ClusterRole::Member;
  cluster_.head_id = head;
  cluster_.hops_to_head = hops;
  cluster_.via = via;
  cluster_.head_last_heard = now;
  sim_.trace().emit(now, id_, "cluster", "role_change",
                    {{"role", "member"},
                     {"head", TraceLog::fmt_id(head)},
                     {"hops", std::to_string(hops)}});
  schedule_head_expiry();
  CtlMsg reg;
  reg.type = CtlType::Register;
  reg.a = hops;
  send_to_head(std::move(reg), wire::kReg, "reg");
}

void Node::become_unclustered(const char* reason) {
  cluster_.role = ClusterRole::Unclustered;
  cluster_.head_id.reset();
  cluster_.hops_to_head = 0;
  cluster_.via.reset();
  cluster_.gateway_for.clear();
  sim_.trace().emit(sim_.now(), id_, "cluster", "role_change",
                    {{"role", "unclustered"}, {"reason", reason}});
}

void Node::schedule_head_expiry() {
  // Fires exactly at the implicit time-out unless refreshed meanwhile.
  const SimTime deadline = cluster_.head_last_heard + sim_.cfg().cluster_timeout_s;
  sim_.kernel().schedule(deadline, [this] {
    if (cluster_.role == ClusterRole::Head ||
        cluster_.role == ClusterRole::Unclustered)
      return;
    const SimTime due =
        cluster_.head_last_heard + sim_.cfg().cluster_timeout_s;
    if (sim_.now() + 1e-9 < due) {
      schedule_head_expiry();
      return;
    }
    become_unclustered("head_timeout");
  });
}

void Node::schedule_member_expiry(NodeId member) {
  auto it = cluster_.registry.find(member);
  if (it == cluster_.registry.end()) return;
  const SimTime deadline = it->second.last_seen + sim_.cfg().cluster_timeout_s;
  sim_.kernel().schedule(deadline, [this, member] {
    if (cluster_.role != ClusterRole::Head) return;
    auto it2 = cluster_.registry.find(member);
    if (it2 == cluster_.registry.end()) return;
    const SimTime due = it2->second.last_seen + sim_.cfg().cluster_timeout_s;
    if (sim_.now() + 1e-9 < due) {
      schedule_member_expiry(member);
      return;
    }
    cluster_.registry.erase(it2);
    sim_.trace().emit(sim_.now(), id_, "cluster", "reg_expire",
                      {{"member", TraceLog::fmt_id(member)}});
  });
}

void Node::on_tag(NodeId src, const PiggybackTag& tag) {
  const SimTime now = sim_.now();
  if (tag.sender_role == ClusterRole::Head) {
    if (cluster_.role == ClusterRole::Unclustered) {
      adopt_head(src, 1, std::nullopt);
      return;
    }
    if (cluster_.role == ClusterRole::Head) {
      if (src != id_) {
        cluster_.adjacent[src].head_direct = now;
        // A node known to be a head is never a bridge candidate.
        for (auto& [peer, pi] : cluster_.adjacent) pi.candidates.erase(src);
      }
      return;
    }
    if (cluster_.head_id && src == *cluster_.head_id) {
      cluster_.head_last_heard = now;
      if (cluster_.hops_to_head > 1) {
        cluster_.hops_to_head = 1;
        cluster_.via.reset();
      }
    } else {
      // First-declaration-wins: a bound member ignores later claims but
      // remembers the contact for gateway candidacy.
      cluster_.direct_foreign_heads[src] = now;
    }
    return;
  }
  if (!tag.sender_head) return;
  const NodeId h2 = *tag.sender_head;
  if (cluster_.role == ClusterRole::Head) {
    // A 1-hop member of another cluster inside my range hears both clusters.
    if (h2 != id_ && tag.hops_to_head == 1)
      cluster_.adjacent[h2].candidates[src] = now;
    return;
  }
  if (cluster_.head_id && h2 != *cluster_.head_id &&
      cluster_.hops_to_head == 1 && tag.hops_to_head == 1) {
    cluster_.foreign_members[h2][src] = now;
  }
}

void Node::on_beacon(const Frame& f, const BeaconMsg& b) {
  const SimTime now = sim_.now();
  if (!cluster_.beacons_seen.insert({b.head, b.counter}).second) return;
  const bool direct = f.src == b.head;

  if (cluster_.role == ClusterRole::Head && b.head != id_) {
    auto& pi = cluster_.adjacent[b.head];
    if (direct) {
      pi.head_direct = now;
      for (auto& [peer, other] : cluster_.adjacent) other.candidates.erase(b.head);
    } else if (!cluster_.adjacent.count(f.src)) {
      // Relayers received the beacon straight from its head and are in my
      // range, so they hear both clusters.
      pi.candidates[f.src] = now;
    }
  } else if (cluster_.role == ClusterRole::Unclustered) {
    adopt_head(b.head, direct ? 1 : 2,
               direct ? std::nullopt : std::optional<NodeId>(f.src));
  } else if (cluster_.head_id && b.head == *cluster_.head_id) {
    cluster_.head_last_heard = now;
    if (direct) {
      cluster_.hops_to_head = 1;
      cluster_.via.reset();
    } else if (cluster_.hops_to_head == 2) {
      cluster_.via = f.src;
    }
    last_candidates_ = b.members;
    for (NodeId s : b.isolated) apply_isolation(s, b.head, "beacon");
    CtlMsg refresh;
    refresh.type = CtlType::RegisterRefresh;
    refresh.a = cluster_.hops_to_head;
    send_to_head(std::move(refresh), wire::kRegRefresh, "reg_refresh");
    send_contact_reports();
  } else if (cluster_.head_id && direct) {
    cluster_.direct_foreign_heads[b.head] = now;
  }

  if (b.ttl == 2) {
    BeaconMsg relay = b;
    relay.ttl = 1;
    Frame out;
    out.kind = FrameKind::Beacon;
    out.dst = kBroadcast;
    out.bytes = wire::beacon_bytes(relay);
    out.body = relay;
    sim_.trace().emit(now, id_, "cluster", "beacon_relay",
                      {{"head", TraceLog::fmt_id(b.head)},
                       {"ctr", std::to_string(b.counter)},
                       {"bytes", std::to_string(out.bytes)}});
    sim_.world().transmit(id_, std::move(out));
  }
}

void Node::beacon_tick() {
  if (cluster_.role != ClusterRole::Head) return;
  select_gateways();
  emit_beacon();
  const std::uint32_t tenure = head_tenure_;
  sim_.kernel().schedule_in(sim_.cfg().beacon_period_s, [this, tenure] {
    if (head_tenure_ == tenure) beacon_tick();
  });
}

void Node::emit_beacon() {
  const SimTime now = sim_.now();
  BeaconMsg b;
  b.head = id_;
  b.counter = cluster_.beacon_counter++;
  b.ttl = 2;
  for (const auto& [m, info] : cluster_.registry) b.members.push_back(m);
  for (const auto& [peer, pi] : cluster_.adjacent) {
    if (pi.gateway) b.gateways.push_back(*pi.gateway);
  }
  b.isolated.assign(cluster_.cluster_isolated.begin(),
                    cluster_.cluster_isolated.end());
  Frame f;
  f.kind = FrameKind::Beacon;
  f.dst = kBroadcast;
  f.bytes = wire::beacon_bytes(b);
  f.body = b;
  sim_.trace().emit(now, id_, "cluster", "beacon",
                    {{"ctr", std::to_string(b.counter)},
                     {"members", std::to_string(b.members.size())},
                     {"bytes", std::to_string(f.bytes)}});
  sim_.world().transmit(id_, std::move(f));
}

void Node::send_contact_reports() {
  const SimTime now = sim_.now();
  const SimTime timeout = sim_.cfg().cluster_timeout_s;
  if (cluster_.hops_to_head != 1 || !cluster_.head_id) return;
  for (const auto& [h2, t] : cluster_.direct_foreign_heads) {
    if (now - t >= timeout || h2 == *cluster_.head_id) continue;
    CtlMsg m;
    m.type = CtlType::GwReport;
    m.a = h2;
    m.b = kBroadcast;
    send_to_head(std::move(m), wire::kGwReport, "gw_report");
  }
  for (const auto& [h2, members] : cluster_.foreign_members) {
    if (h2 == *cluster_.head_id) continue;
    std::optional<NodeId> m2;
    for (const auto& [m, t] : members) {
      if (now - t < timeout && (!m2 || m < *m2)) m2 = m;
    }
    if (!m2) continue;
    CtlMsg m;
    m.type = CtlType::GwReport;
    m.a = h2;
    m.b = *m2;
    send_to_head(std::move(m), wire::kGwReport, "gw_report");
  }
}

void Node::select_gateways() {
  const SimTime now = sim_.now();
  const SimTime timeout = sim_.cfg().cluster_timeout_s;
  for (auto it = cluster_.adjacent.begin(); it != cluster_.adjacent.end();) {
    const NodeId peer = it->first;
    ClusterSide::PairInfo& pi = it->second;
    for (auto c = pi.candidates.begin(); c != pi.candidates.end();) {
      if (now - c->second >= timeout) c = pi.candidates.erase(c);
      else ++c;
    }
    for (auto p = pi.paths.begin(); p != pi.paths.end();) {
      if (now - p->second.second >= timeout) p = pi.paths.erase(p);
      else ++p;
    }
    const bool head_fresh = pi.head_direct >= 0.0 && now - pi.head_direct < timeout;
    if (pi.candidates.empty() && pi.paths.empty() && !head_fresh) {
      it = cluster_.adjacent.erase(it);
      continue;
    }

    std::optional<NodeId> winner;
    for (const auto& [cand, t] : pi.candidates) {
      if (blocklist_.contains(cand)) continue;
      if (!winner || cand < *winner) winner = cand;
    }
    if (winner) {
      if (pi.gateway != winner) {
        sim_.trace().emit(now, id_, "cluster", "gw_select",
                          {{"peer", TraceLog::fmt_id(peer)},
                           {"gateway", TraceLog::fmt_id(*winner)}});
      }
      pi.gateway = winner;
      pi.dist_pair.reset();
      if (cluster_.registry.count(*winner)) {
        CtlMsg m;
        m.type = CtlType::GwAssign;
        m.a = peer;
        m.b = 1;
        send_to_member(*winner, std::move(m), wire::kGwAssign, "gw_assign");
      }
    } else if (!pi.paths.empty()) {
      // Canonical orientation: the pair is ordered from the lower head id,
      // so both heads converge on the same lexicographically smallest pair.
      NodeId mine = 0, theirs = 0;
      if (id_ < peer) {
        auto best = pi.paths.begin();
        for (auto p = pi.paths.begin(); p != pi.paths.end(); ++p)
          if (p->first < best->first) best = p;
        mine = best->first;
        theirs = best->second.first;
      } else {
        auto best = pi.paths.begin();
        for (auto p = pi.paths.begin(); p != pi.paths.end(); ++p) {
          if (p->second.first < best->second.first ||
              (p->second.first == best->second.first && p->first < best->first))
            best = p;
        }
        mine = best->first;
        theirs = best->second.first;
      }
      if (blocklist_.contains(mine) || blocklist_.contains(theirs)) {
        ++it;
        continue;
      }
      const auto pair = std::make_pair(mine, theirs);
      if (pi.dist_pair != std::optional(pair)) {
        sim_.trace().emit(now, id_, "cluster", "gw_select_dist",
                          {{"peer", TraceLog::fmt_id(peer)},
                           {"near", TraceLog::fmt_id(mine)},
                           {"far", TraceLog::fmt_id(theirs)}});
      }
      pi.dist_pair = pair;
      pi.gateway.reset();
      if (cluster_.registry.count(mine)) {
        CtlMsg m;
        m.type = CtlType::GwAssign;
        m.a = peer;
        m.b = 2;
        send_to_member(mine, std::move(m), wire::kGwAssign, "gw_assign");
      }
    } else {
      pi.gateway.reset();
      pi.dist_pair.reset();
    }
    ++it;
  }
}

void Node::head_register(NodeId member, std::optional<NodeId> via, bool refresh) {
  const SimTime now = sim_.now();
  if (cluster_.role != ClusterRole::Head) return;
  if (blocklist_.contains(member)) return;
  auto it = cluster_.registry.find(member);
  if (it != cluster_.registry.end()) {
    it->second.last_seen = now;
    if (via) it->second.via = via;
    return;
  }
  if (refresh) return;  // refresh for an unknown member is not a registration
  cluster_.registry[member] = ClusterSide::MemberInfo{now, via};
  sim_.trace().emit(now, id_, "cluster", "register",
                    {{"member", TraceLog::fmt_id(member)},
                     {"size", std::to_string(cluster_.registry.size())}});
  schedule_member_expiry(member);
  CtlMsg ack;
  ack.type = CtlType::RegisterAck;
  ack.a = base_.version();
  for (const auto& [suspect, metric] : base_.learned_keys())
    ack.table.emplace_back(suspect, static_cast<double>(metric));
  const std::uint32_t bytes =
      wire::kRegAck + 16 * static_cast<std::uint32_t>(ack.table.size());
  send_to_member(member, std::move(ack), bytes, "reg_ack");
}

std::vector<NodeId> Node::bridge_path(NodeId peer_head) const {
  auto it = cluster_.adjacent.find(peer_head);
  if (it == cluster_.adjacent.end()) return {};
  const SimTime now = sim_.now();
  const SimTime timeout = sim_.cfg().cluster_timeout_s;
  const ClusterSide::PairInfo& pi = it->second;
  if (pi.gateway) return {*pi.gateway, peer_head};
  if (pi.dist_pair) return {pi.dist_pair->first, pi.dist_pair->second, peer_head};
  if (pi.head_direct >= 0.0 && now - pi.head_direct < timeout) return {peer_head};
  return {};
}

void Node::send_to_head(CtlMsg msg, std::uint32_t bytes, const char* kind) {
  if (!cluster_.head_id || *cluster_.head_id == id_) return;
  std::vector<NodeId> route;
  if (cluster_.hops_to_head == 2 && cluster_.via) route.push_back(*cluster_.via);
  route.push_back(*cluster_.head_id);
  send_ctl(std::move(route), std::move(msg), bytes, kind);
}

void Node::send_to_member(NodeId member, CtlMsg msg, std::uint32_t bytes,
                          const char* kind) {
  std::vector<NodeId> route;
  auto it = cluster_.registry.find(member);
  if (it != cluster_.registry.end() && it->second.via)
    route.push_back(*it->second.via);
  route.push_back(member);
  send_ctl(std::move(route), std::move(msg), bytes, kind);
}

void Node::send_ctl(std::vector<NodeId> route, CtlMsg msg, std::uint32_t bytes,
                    const char* kind) {
  if (route.empty()) return;
  msg.origin = id_;
  msg.route = std::move(route);
  Frame f;
  f.kind = FrameKind::Ctl;
  f.dst = msg.route.front();
  msg.route.erase(msg.route.begin());
  f.bytes = bytes;
  f.body = std::move(msg);
  sim_.trace().emit(sim_.now(), id_, "cluster", "ctl_tx",
                    {{"what", kind},
                     {"to", TraceLog::fmt_id(f.dst)},
                     {"bytes", std::to_string(bytes)}});
  sim_.world().transmit(id_, std::move(f));
}

void Node::cluster_broadcast(CtlMsg msg, std::uint32_t bytes, const char* kind) {
  msg.origin = id_;
  msg.bcast_origin = id_;
  msg.bcast_id = cluster_.bcast_counter++;
  msg.ttl = 2;
  Frame f;
  f.kind = FrameKind::Ctl;
  f.dst = kBroadcast;
  f.bytes = bytes;
  f.body = std::move(msg);
  sim_.trace().emit(sim_.now(), id_, "cluster", "ctl_tx",
                    {{"what", kind},
                     {"to", "-"},
                     {"bytes", std::to_string(bytes)}});
  sim_.world().transmit(id_, std::move(f));
}

}  // namespace cwids
