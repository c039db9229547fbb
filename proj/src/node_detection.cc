#include <algorithm>
#include <cmath>

#include "cwids/node.h"
#include "cwids/simulation.h"
#include "cwids/wire.h"

namespace cwids {

namespace {

const char* kLabels[] = {"blackhole", "flooding", "sleep_deprivation",
                         "packet_drop", "learned"};

std::uint32_t label_index(const std::string& label) {
  for (std::uint32_t i = 0; i < 5; ++i)
    if (label == kLabels[i]) return i;
  return 4;
}

const char* label_from_index(std::uint32_t i) { return kLabels[i < 5 ? i : 4]; }

const char* outcome_name(WindowOutcome o) {
  switch (o) {
    case WindowOutcome::None: return "none";
    case WindowOutcome::Suspicion: return "suspicion";
    case WindowOutcome::Alert: return "alert";
  }
  return "?";
}

}  // namespace

void Node::record_audit(AuditRecord rec) {
  const AuditRecord* stored = audit_.record(std::move(rec));
  if (stored == nullptr) return;
  const MisuseSignature* sig = audit_.match_misuse(base_, *stored);
  if (sig == nullptr) return;
  const std::int64_t bucket =
      static_cast<std::int64_t>(std::floor(stored->time / sim_.cfg().window_s));
  if (!alert_dedup_.insert({sig->sig_id, stored->actor, bucket}).second) return;
  raise_alert(DetectorKind::LocalMisuse, stored->actor, sig->attack_label, 1.0);
}

void Node::audit_rreq(const Frame& f, const RreqMsg& rreq) {
  AuditRecord rec;
  rec.time = sim_.now();
  rec.layer = AuditLayer::Network;
  rec.kind = "rreq_seen";
  rec.actor = rreq.origin;
  rec.fields["req_id"] = static_cast<double>(rreq.req_id);
  rec.fields["target"] = static_cast<double>(rreq.target);
  record_audit(std::move(rec));
  (void)f;
}

void Node::audit_rrep(const Frame& f, const RrepMsg& rrep) {
  const RouteEntry* known = routes_.lookup(rrep.target, sim_.now());
  const double best_known = known ? static_cast<double>(known->dst_seq) : 0.0;
  AuditRecord rec;
  rec.time = sim_.now();
  rec.layer = AuditLayer::Network;
  rec.kind = "rrep_seen";
  rec.actor = f.src;
  rec.fields["target"] = static_cast<double>(rrep.target);
  rec.fields["target_seq"] = static_cast<double>(rrep.target_seq);
  rec.fields["hop_count"] = static_cast<double>(rrep.hop_count);
  rec.fields["best_known"] = best_known;
  rec.fields["seq_delta"] = static_cast<double>(rrep.target_seq) - best_known;
  record_audit(std::move(rec));
}

void Node::on_window_close(SimTime end) {
  audit_.prune(end);
  const ScenarioConfig& cfg = sim_.cfg();
  for (const AnomalyRule& rule : base_.rules()) {
    for (const auto& sample :
         audit_.metric_window(rule.metric, end, cfg.window_s)) {
      if (sample.samples < rule.min_samples) continue;
      const WindowOutcome outcome = classify(rule, sample.value);
      sim_.trace().emit(end, id_, "alert", "window_eval",
                        {{"rule", rule.rule_id},
                         {"suspect", TraceLog::fmt_id(sample.suspect)},
                         {"value", TraceLog::fmt_num(sample.value)},
                         {"n", std::to_string(sample.samples)},
                         {"outcome", outcome_name(outcome)}});
      if (outcome == WindowOutcome::Alert) {
        raise_alert(DetectorKind::LocalAnomaly, sample.suspect,
                    rule.attack_label, 0.9);
      } else if (outcome == WindowOutcome::Suspicion) {
        sim_.trace().emit(end, id_, "alert", "suspicion",
                          {{"rule", rule.rule_id},
                           {"suspect", TraceLog::fmt_id(sample.suspect)},
                           {"value", TraceLog::fmt_num(sample.value)}});
        send_suspicion(sample.suspect, rule.metric, sample.value,
                       end - cfg.window_s, end);
      }
    }
  }
}

void Node::raise_alert(DetectorKind kind, NodeId suspect,
                       const std::string& label, double confidence) {
  if (suspect == id_) return;  // no self-accusation
  const SimTime now = sim_.now();
  sim_.trace().emit(now, id_, "alert", "alert",
                    {{"detector", detector_name(kind)},
                     {"suspect", TraceLog::fmt_id(suspect)},
                     {"label", label},
                     {"conf", TraceLog::fmt_num(confidence)}});
  local_block(suspect, detector_name(kind));
  if (cluster_.role == ClusterRole::Head) {
    head_on_alert_report(id_, suspect, kind, label);
    return;
  }
  trust_.penalize(suspect, kind == DetectorKind::LocalAnomaly ? 0.5 : 1.0, now);
  if (cluster_.head_id) {
    Alert a;
    a.time = now;
    a.detector = kind;
    a.reporter = id_;
    a.suspect = suspect;
    a.attack_label = label;
    a.confidence = confidence;
    report_to_head(a);
  }
}

void Node::report_to_head(const Alert& alert) {
  const std::uint32_t rid = next_report_id_++;
  CtlMsg m;
  m.type = CtlType::AlertReport;
  m.a = alert.suspect;
  m.b = static_cast<NodeId>(alert.detector) |
        (label_index(alert.attack_label) << 8);
  m.c = rid;
  m.x = alert.confidence;
  report_unacked_[{alert.suspect, rid}] = sim_.now();
  send_to_head(m, wire::kAlertReport, "alert_report");

  // One retry after 2 s, then the report is abandoned with a trace record.
  sim_.kernel().schedule_in(2.0, [this, m, rid, suspect = alert.suspect] {
    if (!report_unacked_.count({suspect, rid})) return;
    send_to_head(m, wire::kAlertReport, "alert_report");
    sim_.kernel().schedule_in(2.0, [this, rid, suspect] {
      if (report_unacked_.erase({suspect, rid}) > 0) {
        sim_.trace().emit(sim_.now(), id_, "alert", "report_dropped",
                          {{"suspect", TraceLog::fmt_id(suspect)}});
      }
    });
  });
}

void Node::head_on_alert_report(NodeId reporter, NodeId suspect,
                                DetectorKind detector,
                                const std::string& label) {
  const SimTime now = sim_.now();
  if (suspect == id_) return;
  const std::int64_t bucket =
      static_cast<std::int64_t>(std::floor(now / sim_.cfg().window_s));
  HeadLogEntry& entry = head_log_[{suspect, bucket}];
  const bool first = entry.reporters.empty();
  entry.reporters.insert(reporter);
  if (detector != DetectorKind::LocalAnomaly) entry.misuse = true;
  if (first) {
    sim_.trace().emit(now, id_, "alert", "head_log",
                      {{"reporter", TraceLog::fmt_id(reporter)},
                       {"suspect", TraceLog::fmt_id(suspect)},
                       {"detector", detector_name(detector)},
                       {"label", label}});
    trust_.penalize(suspect,
                    detector == DetectorKind::LocalAnomaly ? 0.5 : 1.0, now);
  }
  // Response policy: conclusive evidence (misuse or cooperative) isolates at
  // once; anomaly reports need two distinct reporters.
  if (entry.responded) {
    if (detector == DetectorKind::Cooperative)
      network_response(suspect, id_, response_epoch_);
    return;
  }
  const bool conclusive = detector == DetectorKind::LocalMisuse ||
                          detector == DetectorKind::Cooperative ||
                          entry.misuse;
  if (conclusive || entry.reporters.size() >= 2) {
    entry.responded = true;
    cluster_response(suspect);
    if (detector == DetectorKind::Cooperative)
      network_response(suspect, id_, response_epoch_);
  }
}

void Node::send_suspicion(NodeId suspect, AgentMetric metric, double value,
                          SimTime w_start, SimTime w_end) {
  if (cluster_.role == ClusterRole::Head) {
    head_on_suspicion(id_, suspect, metric, value, w_start, w_end);
    return;
  }
  if (!cluster_.head_id) return;
  CtlMsg m;
  m.type = CtlType::SuspicionReq;
  m.a = suspect;
  m.b = static_cast<NodeId>(metric);
  m.x = value;
  m.t0 = w_start;
  m.t1 = w_end;
  send_to_head(std::move(m), wire::kSuspicionReq, "suspicion_req");
}

void Node::head_on_suspicion(NodeId requester, NodeId suspect,
                             AgentMetric metric, double value, SimTime w_start,
                             SimTime w_end) {
  const SimTime now = sim_.now();
  if (cluster_.role != ClusterRole::Head) return;
  if (requester != id_ && !cluster_.registry.count(requester)) return;
  if (blocklist_.contains(suspect)) return;
  if (agent_registry_.busy_with(suspect, metric)) return;

  std::vector<NodeId> itinerary;
  for (const auto& [member, info] : cluster_.registry) {
    if (itinerary.size() >= sim_.cfg().itinerary_cap) break;
    if (member == suspect || member == requester) continue;
    if (blocklist_.contains(member)) continue;
    if (!sim_.world().in_range(member, suspect)) continue;
    itinerary.push_back(member);
  }
  if (itinerary.empty()) {
    sim_.trace().emit(now, id_, "agent", "coop_verdict",
                      {{"suspect", TraceLog::fmt_id(suspect)},
                       {"verdict", "inconclusive"},
                       {"reason", "no_observers"},
                       {"value", TraceLog::fmt_num(value)}});
    return;
  }
  AgentQuery query;
  query.metric = metric;
  query.suspect = suspect;
  query.window_start = w_start;
  query.window_end = w_end;
  const AgentRegistryEntry& entry = agent_registry_.create(
      query, itinerary, requester, now, sim_.cfg().agent_hop_timeout_s, 0);
  sim_.trace().emit(now, id_, "agent", "created",
                    {{"id", std::to_string(entry.agent_id)},
                     {"suspect", TraceLog::fmt_id(suspect)},
                     {"metric", agent_metric_name(metric)},
                     {"hops", std::to_string(itinerary.size())},
                     {"retry", std::to_string(entry.retries)},
                     {"deadline", TraceLog::fmt_time(entry.deadline)}});
  dispatch_agent(entry);
}

void Node::handle_ctl(const Frame& f, const CtlMsg& m) {
  const SimTime now = sim_.now();
  // Source-routed transit.
  if (!m.route.empty()) {
    if (m.type == CtlType::NetworkIsolate) {
      apply_isolation(m.a, m.c, "transit");
    }
    CtlMsg fwd = m;
    Frame out;
    out.kind = FrameKind::Ctl;
    out.dst = fwd.route.front();
    fwd.route.erase(fwd.route.begin());
    out.bytes = f.bytes;
    out.body = std::move(fwd);
    sim_.trace().emit(now, id_, "cluster", "ctl_tx",
                      {{"what", ctl_type_name(m.type)},
                       {"to", TraceLog::fmt_id(out.dst)},
                       {"bytes", std::to_string(out.bytes)}});
    sim_.world().transmit(id_, std::move(out));
    return;
  }
  // Cluster broadcast handling: dedup, process, relay.
  if (f.dst == kBroadcast) {
    if (!cluster_.bcasts_seen.insert({m.bcast_origin, m.bcast_id}).second)
      return;
    const bool mine = cluster_.head_id && *cluster_.head_id == m.bcast_origin;
    switch (m.type) {
      case CtlType::ElectionStart:
        if (mine && cluster_.role != ClusterRole::Head)
          cast_vote(m.bcast_origin, m.a, m.list);
        break;
      case CtlType::HeadChanged:
        if (mine && cluster_.role != ClusterRole::Head && m.a != id_) {
          cluster_.head_id = m.a;
          cluster_.head_last_heard = now;
          if (f.src == m.a) {
            cluster_.hops_to_head = 1;
            cluster_.via.reset();
          } else {
            cluster_.hops_to_head = 2;
            cluster_.via = f.src;
          }
          sim_.trace().emit(now, id_, "cluster", "rebind",
                            {{"head", TraceLog::fmt_id(m.a)}});
        }
        break;
      case CtlType::ClusterIsolate:
        if (mine && response_dedup_.first_time(m.c, m.a, m.b))
          apply_isolation(m.a, m.c, "cluster_isolate");
        break;
      case CtlType::BaseDelta:
        if (mine) {
          std::vector<std::pair<NodeId, AgentMetric>> keys;
          for (const auto& [suspect, metric] : m.table2)
            keys.emplace_back(
                suspect, static_cast<AgentMetric>(static_cast<int>(metric)));
          base_.merge(keys, m.a, sim_.cfg());
        }
        break;
      default:
        break;
    }
    if (m.ttl == 2) {
      CtlMsg relay = m;
      relay.ttl = 1;
      Frame out;
      out.kind = FrameKind::Ctl;
      out.dst = kBroadcast;
      out.bytes = f.bytes;
      out.body = std::move(relay);
      sim_.trace().emit(now, id_, "cluster", "ctl_relay",
                        {{"what", ctl_type_name(m.type)},
                         {"bytes", std::to_string(out.bytes)}});
      sim_.world().transmit(id_, std::move(out));
    }
    return;
  }
  // Unicast control addressed to me.
  switch (m.type) {
    case CtlType::Register:
      head_register(m.origin, f.src != m.origin ? std::optional<NodeId>(f.src)
                                                : std::nullopt,
                    false);
      break;
    case CtlType::RegisterRefresh:
      head_register(m.origin, f.src != m.origin ? std::optional<NodeId>(f.src)
                                                : std::nullopt,
                    true);
      break;
    case CtlType::RegisterAck: {
      std::vector<std::pair<NodeId, AgentMetric>> keys;
      for (const auto& [suspect, metric] : m.table)
        keys.emplace_back(suspect,
                          static_cast<AgentMetric>(static_cast<int>(metric)));
      base_.merge(keys, m.a, sim_.cfg());
      break;
    }
    case CtlType::GwReport:
      if (cluster_.role == ClusterRole::Head) {
        auto& pi = cluster_.adjacent[m.a];
        if (m.b == kBroadcast) pi.candidates[m.origin] = now;
        else pi.paths[m.origin] = {m.b, now};
      }
      break;
    case CtlType::GwAssign:
      if (cluster_.head_id && !cluster_.gateway_for.count(m.a))
        sim_.trace().emit(now, id_, "cluster", "role_change",
                          {{"role", m.b == 2 ? "dist_gateway" : "gateway"},
                           {"peer", TraceLog::fmt_id(m.a)}});
      if (cluster_.head_id) {
        cluster_.gateway_for[m.a] = now;
        cluster_.distributed_gateway = m.b == 2;
        if (cluster_.role == ClusterRole::Member)
          cluster_.role = m.b == 2 ? ClusterRole::DistributedGateway
                                   : ClusterRole::Gateway;
        else if (cluster_.role == ClusterRole::Gateway && m.b == 2)
          cluster_.role = ClusterRole::DistributedGateway;
        const double keep = 2 * sim_.cfg().beacon_period_s + 5.0;
        sim_.kernel().schedule_in(keep, [this, peer = m.a] {
          auto it = cluster_.gateway_for.find(peer);
          if (it == cluster_.gateway_for.end()) return;
          if (sim_.now() - it->second <
              2 * sim_.cfg().beacon_period_s + 5.0 - 1e-9)
            return;
          cluster_.gateway_for.erase(it);
          if (cluster_.gateway_for.empty() &&
              (cluster_.role == ClusterRole::Gateway ||
               cluster_.role == ClusterRole::DistributedGateway)) {
            cluster_.role = ClusterRole::Member;
            sim_.trace().emit(sim_.now(), id_, "cluster", "role_change",
                              {{"role", "member"},
                               {"head", TraceLog::fmt_id(*cluster_.head_id)},
                               {"hops", std::to_string(cluster_.hops_to_head)}});
          }
        });
      }
      break;
    case CtlType::ElectionStart:
      break;  // elections arrive as broadcasts
    case CtlType::Ballot:
      if (cluster_.role == ClusterRole::Head &&
          m.a == cluster_.election_epoch &&
          (cluster_.registry.count(m.origin) || m.origin == id_)) {
        auto& box = ballots_[m.a];
        bool dup = false;
        for (const Ballot& b : box) dup |= b.voter == m.origin;
        if (!dup) box.push_back(Ballot{m.origin, m.b, m.a});
      }
      break;
    case CtlType::Handover:
      on_handover(f, m);
      break;
    case CtlType::HandoverAck:
      if (pending_handover_ && pending_handover_->second == m.a &&
          pending_handover_->first == m.origin) {
        const NodeId winner = pending_handover_->first;
        pending_handover_.reset();
        complete_handover(winner);
      }
      break;
    case CtlType::HeadChanged:
      break;  // broadcast only
    case CtlType::AlertReport: {
      if (cluster_.role != ClusterRole::Head) break;
      const DetectorKind detector = static_cast<DetectorKind>(m.b & 0xff);
      const char* label = label_from_index(m.b >> 8);
      CtlMsg ack;
      ack.type = CtlType::ReportAck;
      ack.a = m.a;
      ack.c = m.c;
      send_to_member(m.origin, std::move(ack), wire::kReportAck, "report_ack");
      head_on_alert_report(m.origin, m.a, detector, label);
      break;
    }
    case CtlType::ReportAck:
      report_unacked_.erase({m.a, m.c});
      break;
    case CtlType::SuspicionReq:
      if (cluster_.role == ClusterRole::Head)
        head_on_suspicion(m.origin, m.a, static_cast<AgentMetric>(m.b), m.x,
                          m.t0, m.t1);
      break;
    case CtlType::BaseDelta:
      break;  // broadcast only
    case CtlType::ClusterIsolate:
      break;  // broadcast only
    case CtlType::NetworkIsolate: {
      if (cluster_.role != ClusterRole::Head) {
        apply_isolation(m.a, m.c, "stray");
        break;
      }
      if (!response_dedup_.first_time(m.c, m.a, m.b)) break;
      sim_.trace().emit(now, id_, "response", "network_isolate_rx",
                        {{"subject", TraceLog::fmt_id(m.a)},
                         {"issuer", TraceLog::fmt_id(m.c)},
                         {"epoch", std::to_string(m.b)}});
      cluster_response(m.a);
      network_response(m.a, m.c, m.b);
      break;
    }
    default:
      break;
  }
}

}  // namespace cwids
