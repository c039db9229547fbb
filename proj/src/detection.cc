#include "cwids/detection.h"

#include <algorithm>

namespace cwids {

const char* layer_name(AuditLayer l) {
  switch (l) {
    case AuditLayer::Application: return "application";
    case AuditLayer::Transport: return "transport";
    case AuditLayer::Network: return "network";
    case AuditLayer::DataLink: return "datalink";
    case AuditLayer::Physical: return "physical";
  }
  return "?";
}

const char* detector_name(DetectorKind d) {
  switch (d) {
    case DetectorKind::LocalMisuse: return "local_misuse";
    case DetectorKind::LocalAnomaly: return "local_anomaly";
    case DetectorKind::Cooperative: return "cooperative";
  }
  return "?";
}

InterpreterBase InterpreterBase::with_defaults(const ScenarioConfig& cfg) {
  std::vector<MisuseSignature> sigs;
  // Forged route reply: absurd freshness jump combined with a 1-hop claim.
  MisuseSignature bh;
  bh.sig_id = "SIG-BH";
  bh.attack_label = "blackhole";
  bh.kind = "rrep_seen";
  bh.bounds = {{"seq_delta", 1000.0, 1e18}, {"hop_count", 1.0, 1.0}};
  sigs.push_back(bh);
  // Route-request flood: distinct request ids from one origin.
  MisuseSignature fl;
  fl.sig_id = "SIG-FL";
  fl.attack_label = "flooding";
  fl.kind = "rreq_seen";
  fl.count_over = 50;
  fl.window_s = cfg.window_s;
  sigs.push_back(fl);
  // Sleep deprivation: traffic pressure on a single destination.
  MisuseSignature sd;
  sd.sig_id = "SIG-SD";
  sd.attack_label = "sleep_deprivation";
  sd.kind = "data_rx";
  sd.count_over = 200;
  sd.group_field = "dst";
  sd.window_s = cfg.window_s;
  sigs.push_back(sd);

  std::vector<AnomalyRule> rules;
  AnomalyRule fr;
  fr.rule_id = "forward_ratio";
  fr.metric = AgentMetric::ForwardRatio;
  fr.lower_hard = cfg.fr_lower_hard;
  fr.lower_soft = cfg.fr_lower_soft;
  fr.min_samples = cfg.min_samples;
  fr.attack_label = "packet_drop";
  rules.push_back(fr);
  AnomalyRule rr;
  rr.rule_id = "rreq_rate";
  rr.metric = AgentMetric::RreqRate;
  rr.upper_soft = cfg.rreq_upper_soft;
  rr.upper_hard = cfg.rreq_upper_hard;
  rr.min_samples = 1;
  rr.attack_label = "flooding";
  rules.push_back(rr);
  AnomalyRule dr;
  dr.rule_id = "dest_rx_rate";
  dr.metric = AgentMetric::DestRxRate;
  dr.upper_soft = cfg.drx_upper_soft;
  dr.upper_hard = cfg.drx_upper_hard;
  dr.min_samples = 1;
  dr.attack_label = "sleep_deprivation";
  rules.push_back(dr);

  return InterpreterBase(std::move(sigs), std::move(rules));
}

void InterpreterBase::add_signature(MisuseSignature sig) {
  signatures_.push_back(std::move(sig));
}

void InterpreterBase::add_rule(AnomalyRule rule) {
  rules_.push_back(std::move(rule));
}

MisuseSignature InterpreterBase::derived_signature(AgentMetric metric,
                                                   NodeId suspect,
                                                   const ScenarioConfig& cfg) {
  MisuseSignature sig;
  sig.sig_id = std::string("LEARNED-") + agent_metric_name(metric) + "-" +
               std::to_string(suspect);
  sig.attack_label = "learned";
  sig.only_actor = suspect;
  sig.window_s = cfg.window_s;
  switch (metric) {
    case AgentMetric::ForwardRatio:
      sig.kind = "forward_miss";
      sig.count_over = 3;
      break;
    case AgentMetric::RreqRate:
      sig.kind = "rreq_seen";
      sig.count_over =
          static_cast<std::uint32_t>(cfg.rreq_upper_hard * cfg.window_s);
      break;
    case AgentMetric::DestRxRate:
      sig.kind = "data_rx";
      sig.group_field = "dst";
      sig.count_over =
          static_cast<std::uint32_t>(cfg.drx_upper_hard * cfg.window_s);
      break;
  }
  return sig;
}

bool InterpreterBase::learn(const MisuseSignature& sig) {
  if (!learned_ids_.insert(sig.sig_id).second) return false;
  signatures_.push_back(sig);
  ++version_;
  return true;
}

std::vector<std::pair<NodeId, AgentMetric>> InterpreterBase::learned_keys()
    const {
  std::vector<std::pair<NodeId, AgentMetric>> out;
  for (const auto& sig : signatures_) {
    if (!learned_ids_.count(sig.sig_id) || !sig.only_actor) continue;
    AgentMetric m = AgentMetric::ForwardRatio;
    if (sig.kind == "rreq_seen") m = AgentMetric::RreqRate;
    if (sig.kind == "data_rx") m = AgentMetric::DestRxRate;
    out.emplace_back(*sig.only_actor, m);
  }
  return out;
}

void InterpreterBase::merge(
    const std::vector<std::pair<NodeId, AgentMetric>>& keys,
    std::uint32_t version, const ScenarioConfig& cfg) {
  for (const auto& [suspect, metric] : keys) {
    const MisuseSignature sig = derived_signature(metric, suspect, cfg);
    if (learned_ids_.insert(sig.sig_id).second) signatures_.push_back(sig);
  }
  version_ = std::max(version_, version);
}

const AuditRecord* AuditStore::record(AuditRecord rec) {
  if (rec.actor == owner_) return nullptr;
  rec.observer = owner_;
  if (rec.kind == "rreq_seen") {
    const std::uint32_t req_id =
        static_cast<std::uint32_t>(rec.fields.at("req_id"));
    if (!rreq_window_seen_.insert({rec.actor, req_id}).second) return nullptr;
    rreq_order_.push_back({rec.time, {rec.actor, req_id}});
  }
  auto& store = records_[static_cast<std::size_t>(rec.layer)];
  store.push_back(std::move(rec));
  prune(store.back().time);
  return &store.back();
}

void AuditStore::prune(SimTime now) {
  const SimTime cutoff = now - retention_s_;
  for (auto& store : records_) {
    while (!store.empty() && store.front().time < cutoff) store.pop_front();
  }
  while (!rreq_order_.empty() && rreq_order_.front().first < cutoff) {
    rreq_window_seen_.erase(rreq_order_.front().second);
    rreq_order_.pop_front();
  }
}

std::uint32_t AuditStore::count_pattern(const MisuseSignature& sig,
                                        const AuditRecord& rec) const {
  const auto& store = records_[static_cast<std::size_t>(sig.layer)];
  const SimTime from = rec.time - sig.window_s;
  double group = 0.0;
  bool grouped = false;
  if (!sig.group_field.empty()) {
    auto it = rec.fields.find(sig.group_field);
    if (it == rec.fields.end()) return 0;
    group = it->second;
    grouped = true;
  }
  std::uint32_t n = 0;
  for (auto it = store.rbegin(); it != store.rend(); ++it) {
    if (it->time < from) break;
    if (it->kind != sig.kind || it->actor != rec.actor) continue;
    if (grouped) {
      auto f = it->fields.find(sig.group_field);
      if (f == it->fields.end() || f->second != group) continue;
    }
    ++n;
  }
  return n;
}

const MisuseSignature* AuditStore::match_misuse(const InterpreterBase& base,
                                                const AuditRecord& rec) const {
  for (const auto& sig : base.signatures()) {
    if (sig.layer != rec.layer || sig.kind != rec.kind) continue;
    if (sig.only_actor && *sig.only_actor != rec.actor) continue;
    if (sig.count_over == 0) {
      bool ok = true;
      for (const auto& b : sig.bounds) {
        auto it = rec.fields.find(b.field);
        if (it == rec.fields.end() || it->second < b.min || it->second > b.max) {
          ok = false;
          break;
        }
      }
      if (ok) return &sig;
    } else if (count_pattern(sig, rec) > sig.count_over) {
      return &sig;
    }
  }
  return nullptr;
}

namespace {

struct Tally {
  std::uint32_t ok = 0;
  std::uint32_t miss = 0;
  std::map<double, std::uint32_t> per_dst;
  std::uint32_t rreqs = 0;
};

}  // namespace

std::vector<AuditStore::MetricSample> AuditStore::metric_window(
    AgentMetric metric, SimTime end, SimTime window_s) const {
  const SimTime from = end - window_s;
  std::map<NodeId, Tally> tallies;
  const auto& net = records_[static_cast<std::size_t>(AuditLayer::Network)];
  for (const auto& rec : net) {
    if (rec.time <= from || rec.time > end) continue;
    Tally& t = tallies[rec.actor];
    if (metric == AgentMetric::ForwardRatio) {
      if (rec.kind == "forward_ok") ++t.ok;
      else if (rec.kind == "forward_miss") ++t.miss;
    } else if (metric == AgentMetric::RreqRate) {
      if (rec.kind == "rreq_seen") ++t.rreqs;
    } else if (metric == AgentMetric::DestRxRate) {
      if (rec.kind == "data_rx") ++t.per_dst[rec.fields.at("dst")];
    }
  }
  std::vector<MetricSample> out;
  for (const auto& [actor, t] : tallies) {
    MetricSample s;
    s.suspect = actor;
    if (metric == AgentMetric::ForwardRatio) {
      s.samples = t.ok + t.miss;
      if (s.samples == 0) continue;
      s.value = static_cast<double>(t.ok) / s.samples;
    } else if (metric == AgentMetric::RreqRate) {
      s.samples = t.rreqs;
      if (s.samples == 0) continue;
      s.value = t.rreqs / window_s;
    } else {
      std::uint32_t peak = 0;
      for (const auto& [dst, n] : t.per_dst) peak = std::max(peak, n);
      s.samples = peak;
      if (s.samples == 0) continue;
      s.value = peak / window_s;
    }
    out.push_back(s);
  }
  return out;
}

std::optional<AuditStore::MetricSample> AuditStore::observe(AgentMetric metric,
                                                            NodeId suspect,
                                                            SimTime start,
                                                            SimTime end) const {
  auto samples = metric_window(metric, end, end - start);
  for (const auto& s : samples)
    if (s.suspect == suspect) return s;
  return std::nullopt;
}

WindowOutcome classify(const AnomalyRule& rule, double value) {
  if (rule.lower_hard && value < *rule.lower_hard) return WindowOutcome::Alert;
  if (rule.upper_hard && value > *rule.upper_hard) return WindowOutcome::Alert;
  if (rule.lower_soft && value < *rule.lower_soft) return WindowOutcome::Suspicion;
  if (rule.upper_soft && value > *rule.upper_soft) return WindowOutcome::Suspicion;
  return WindowOutcome::None;
}

}  // namespace cwids
