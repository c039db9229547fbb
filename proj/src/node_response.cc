#include "cwids/node.h"
#include "cwids/simulation.h"
#include "cwids/wire.h"

namespace cwids {

void Node::local_block(NodeId subject, const char* reason) {
  const SimTime now = sim_.now();
  if (subject == id_) {
    sim_.trace().emit(now, id_, "response", "self_block_rejected", {});
    return;
  }
  if (blocklist_.add(subject, now)) {
    sim_.trace().emit(now, id_, "response", "local_block",
                      {{"subject", TraceLog::fmt_id(subject)},
                       {"reason", reason}});
  }
}

void Node::apply_isolation(NodeId subject, NodeId issuer, const char* how) {
  if (subject == id_) return;
  if (blocklist_.add(subject, sim_.now())) {
    sim_.trace().emit(sim_.now(), id_, "response", "blocklist_add",
                      {{"subject", TraceLog::fmt_id(subject)},
                       {"issuer", TraceLog::fmt_id(issuer)},
                       {"how", how}});
  }
}

void Node::cluster_response(NodeId subject) {
  const SimTime now = sim_.now();
  if (cluster_.role != ClusterRole::Head || subject == id_) return;
  const std::uint32_t epoch = ++response_epoch_;
  isolations_issued_[subject] += 1;
  cluster_.cluster_isolated.insert(subject);
  apply_isolation(subject, id_, "cluster_head");
  if (cluster_.registry.erase(subject) > 0) {
    sim_.trace().emit(now, id_, "cluster", "deregister",
                      {{"member", TraceLog::fmt_id(subject)}});
  }
  sim_.trace().emit(now, id_, "response", "cluster_isolate",
                    {{"subject", TraceLog::fmt_id(subject)},
                     {"epoch", std::to_string(epoch)}});
  CtlMsg m;
  m.type = CtlType::ClusterIsolate;
  m.a = subject;
  m.b = epoch;
  m.c = id_;
  cluster_broadcast(std::move(m), wire::kClusterIsolate, "cluster_isolate");
  // Repeated isolation of the same subject escalates network-wide.
  if (isolations_issued_[subject] >= 2)
    network_response(subject, id_, epoch);
}

void Node::network_response(NodeId subject, NodeId issuer,
                            std::uint32_t epoch) {
  const SimTime now = sim_.now();
  if (cluster_.role != ClusterRole::Head || subject == id_) return;
  // A head introduces its own identity at most once per subject; received
  // actions are re-forwarded under the original identity and deduped there.
  if (issuer == id_ && !network_issued_.insert(subject).second) return;
  for (NodeId peer : neighbor_heads()) {
    std::vector<NodeId> path = bridge_path(peer);
    if (path.empty()) continue;
    sim_.trace().emit(now, id_, "response", "network_isolate_tx",
                      {{"subject", TraceLog::fmt_id(subject)},
                       {"peer", TraceLog::fmt_id(peer)},
                       {"issuer", TraceLog::fmt_id(issuer)},
                       {"epoch", std::to_string(epoch)}});
    CtlMsg m;
    m.type = CtlType::NetworkIsolate;
    m.a = subject;
    m.b = epoch;
    m.c = issuer;
    send_ctl(std::move(path), std::move(m), wire::kNetworkIsolate,
             "network_isolate");
  }
}

}  // namespace cwids
