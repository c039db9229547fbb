#include <algorithm>

#include "cwids/node.h"
#include "cwids/simulation.h"
#include "cwids/wire.h"

namespace cwids {

void Node::election_tick() {
  if (cluster_.role != ClusterRole::Head) return;
  initiate_election();
  const std::uint32_t tenure = head_tenure_;
  sim_.kernel().schedule_in(sim_.election_period(), [this, tenure] {
    if (head_tenure_ == tenure) election_tick();
  });
}

void Node::initiate_election() {
  const SimTime now = sim_.now();
  const std::uint32_t epoch = ++cluster_.election_epoch;
  std::vector<NodeId> candidates;
  for (const auto& [m, info] : cluster_.registry) {
    if (!blocklist_.contains(m)) candidates.push_back(m);
  }
  candidates.push_back(id_);
  std::sort(candidates.begin(), candidates.end());
  sim_.trace().emit(now, id_, "cluster", "election_start",
                    {{"epoch", std::to_string(epoch)},
                     {"candidates", std::to_string(candidates.size())}});
  CtlMsg m;
  m.type = CtlType::ElectionStart;
  m.a = epoch;
  m.list = candidates;
  const std::uint32_t bytes =
      wire::kElectionStart + 4 * static_cast<std::uint32_t>(candidates.size());
  cluster_broadcast(std::move(m), bytes, "election_start");

  // The head votes like any member.
  auto own = choose_candidate(trust_, now, candidates);
  if (own) ballots_[epoch].push_back(Ballot{id_, *own, epoch});

  const std::uint32_t tenure = head_tenure_;
  sim_.kernel().schedule_in(sim_.cfg().election_collect_s, [this, tenure, epoch] {
    if (head_tenure_ == tenure && cluster_.role == ClusterRole::Head)
      tally_election(epoch);
  });
}

void Node::cast_vote(NodeId head, std::uint32_t epoch,
                     const std::vector<NodeId>& candidates) {
  std::vector<NodeId> eligible;
  for (NodeId c : candidates) {
    if (!blocklist_.contains(c)) eligible.push_back(c);
  }
  auto choice = choose_candidate(trust_, sim_.now(), eligible);
  if (!choice) return;  // abstain
  CtlMsg m;
  m.type = CtlType::Ballot;
  m.a = epoch;
  m.b = *choice;
  send_to_head(std::move(m), wire::kBallot, "ballot");
}

void Node::tally_election(std::uint32_t epoch) {
  const SimTime now = sim_.now();
  auto it = ballots_.find(epoch);
  if (it == ballots_.end() || it->second.empty()) {
    sim_.trace().emit(now, id_, "cluster", "election_result",
                      {{"epoch", std::to_string(epoch)},
                       {"winner", TraceLog::fmt_id(id_)},
                       {"ballots", "0"},
                       {"tie", "none"},
                       {"note", "retained"}});
    return;
  }
  std::map<NodeId, std::uint32_t> connectivity;
  for (const Ballot& b : it->second)
    connectivity[b.candidate] = sim_.world().degree(b.candidate);
  const ElectionResult res = tally(it->second, connectivity);
  sim_.trace().emit(now, id_, "cluster", "election_result",
                    {{"epoch", std::to_string(epoch)},
                     {"winner", TraceLog::fmt_id(res.winner)},
                     {"ballots", std::to_string(it->second.size())},
                     {"tie", tie_break_name(res.tie_broken_by)}});
  ballots_.erase(it);
  if (res.winner != id_) start_handover(res.winner, epoch, false);
}

void Node::start_handover(NodeId winner, std::uint32_t epoch, bool retry) {
  const SimTime now = sim_.now();
  pending_handover_ = {winner, epoch};
  CtlMsg m;
  m.type = CtlType::Handover;
  m.a = epoch;
  m.b = base_.version();
  m.c = id_;
  for (const auto& [member, info] : cluster_.registry) m.list.push_back(member);
  m.list2.assign(cluster_.cluster_isolated.begin(),
                 cluster_.cluster_isolated.end());
  m.list3 = neighbor_heads();
  for (const auto& [node, score] : trust_.entries())
    m.table.emplace_back(node, trust_.get(node, now));
  for (const auto& [suspect, metric] : base_.learned_keys())
    m.table2.emplace_back(suspect, static_cast<double>(metric));
  const std::uint32_t bytes =
      wire::kHandover +
      8 * static_cast<std::uint32_t>(m.list.size() + m.list2.size() +
                                     m.list3.size() + m.table.size() +
                                     m.table2.size());
  sim_.trace().emit(now, id_, "cluster", retry ? "handover_retry" : "handover_tx",
                    {{"winner", TraceLog::fmt_id(winner)},
                     {"epoch", std::to_string(epoch)}});
  send_to_member(winner, std::move(m), bytes, "handover");

  const std::uint32_t tenure = head_tenure_;
  sim_.kernel().schedule_in(2.0, [this, tenure, winner, epoch, retry] {
    if (head_tenure_ != tenure) return;
    if (!pending_handover_ || pending_handover_->first != winner ||
        pending_handover_->second != epoch)
      return;
    if (!retry) {
      start_handover(winner, epoch, true);
    } else {
      pending_handover_.reset();
      sim_.trace().emit(sim_.now(), id_, "cluster", "handover_failed",
                        {{"winner", TraceLog::fmt_id(winner)},
                         {"epoch", std::to_string(epoch)}});
    }
  });
}

void Node::on_handover(const Frame& f, const CtlMsg& m) {
  const SimTime now = sim_.now();
  const NodeId old_head = m.c;
  // Duplicate after a lost ack: just re-acknowledge.
  const bool already_head =
      cluster_.role == ClusterRole::Head && cluster_.election_epoch == m.a;
  if (!already_head) {
    ++head_tenure_;
    cluster_.role = ClusterRole::Head;
    cluster_.head_id = id_;
    cluster_.hops_to_head = 0;
    cluster_.via.reset();
    cluster_.election_epoch = m.a;
    cluster_.registry.clear();
    for (NodeId member : m.list) {
      if (member == id_) continue;
      cluster_.registry[member] = ClusterSide::MemberInfo{now, std::nullopt};
      schedule_member_expiry(member);
    }
    // The departing head becomes a plain member.
    cluster_.registry[old_head] = ClusterSide::MemberInfo{now, std::nullopt};
    schedule_member_expiry(old_head);
    for (NodeId s : m.list2) {
      cluster_.cluster_isolated.insert(s);
      apply_isolation(s, old_head, "handover");
    }
    for (NodeId h : m.list3) {
      if (h != id_) cluster_.adjacent[h].head_direct = now;
    }
    // Transferred head view overrides the local member view.
    for (const auto& [node, value] : m.table) {
      if (node != id_) trust_.set(node, value, now);
    }
    std::vector<std::pair<NodeId, AgentMetric>> keys;
    for (const auto& [suspect, metric] : m.table2)
      keys.emplace_back(suspect, static_cast<AgentMetric>(
                                     static_cast<int>(metric)));
    base_.merge(keys, m.b, sim_.cfg());
    sim_.trace().emit(now, id_, "cluster", "role_change",
                      {{"role", "head"}, {"reason", "elected"}});
    const std::uint32_t tenure = head_tenure_;
    sim_.kernel().schedule_in(sim_.cfg().beacon_period_s, [this, tenure] {
      if (head_tenure_ == tenure) beacon_tick();
    });
    sim_.kernel().schedule_in(sim_.election_period(), [this, tenure] {
      if (head_tenure_ == tenure) election_tick();
    });
  }

  CtlMsg ack;
  ack.type = CtlType::HandoverAck;
  ack.a = m.a;
  std::vector<NodeId> route;
  if (f.src != old_head) route.push_back(f.src);
  route.push_back(old_head);
  send_ctl(std::move(route), std::move(ack), wire::kHandoverAck, "handover_ack");

  if (!already_head) emit_beacon();
}

void Node::complete_handover(NodeId new_head) {
  const SimTime now = sim_.now();
  sim_.trace().emit(now, id_, "cluster", "handover_done",
                    {{"new_head", TraceLog::fmt_id(new_head)}});
  CtlMsg m;
  m.type = CtlType::HeadChanged;
  m.a = new_head;
  cluster_broadcast(std::move(m), wire::kHeadChanged, "head_changed");
  ++head_tenure_;
  cluster_.role = ClusterRole::Member;
  cluster_.head_id = new_head;
  cluster_.hops_to_head = 1;
  cluster_.via.reset();
  cluster_.head_last_heard = now;
  cluster_.registry.clear();
  cluster_.adjacent.clear();
  cluster_.cluster_isolated.clear();
  sim_.trace().emit(now, id_, "cluster", "role_change",
                    {{"role", "member"},
                     {"head", TraceLog::fmt_id(new_head)},
                     {"hops", "1"}});
  schedule_head_expiry();
}

}  // namespace cwids
