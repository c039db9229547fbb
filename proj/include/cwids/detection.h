#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cwids/config.h"
#include "cwids/messages.h"
#include "cwids/types.h"

namespace cwids {

enum class AuditLayer : std::uint8_t {
  Application,
  Transport,
  Network,
  DataLink,
  Physical
};
const char* layer_name(AuditLayer l);

// One layered observation. actor is the observed node, observer the recorder;
// watchdog-style records never have actor == observer.
struct AuditRecord {
  SimTime time = 0.0;
  AuditLayer layer = AuditLayer::Network;
  std::string kind;
  NodeId actor = 0;
  NodeId observer = 0;
  std::map<std::string, double> fields;
};

struct FieldBound {
  std::string field;
  double min;
  double max;  // inclusive bounds
};

// Declarative attack pattern. count_over == 0 means a single-record
// condition on `bounds`; otherwise the signature fires when more than
// count_over records of `kind` from one actor (optionally grouped by
// group_field, optionally pinned to only_actor) fall within window_s.
struct MisuseSignature {
  std::string sig_id;
  AuditLayer layer = AuditLayer::Network;
  std::string attack_label;
  std::string kind;
  std::vector<FieldBound> bounds;
  std::uint32_t count_over = 0;
  std::string group_field;
  std::optional<NodeId> only_actor;
  SimTime window_s = 10.0;
};

enum class DetectorKind : std::uint8_t { LocalMisuse, LocalAnomaly, Cooperative };
const char* detector_name(DetectorKind d);

struct Alert {
  SimTime time = 0.0;
  DetectorKind detector = DetectorKind::LocalMisuse;
  NodeId reporter = 0;
  NodeId suspect = 0;
  std::string attack_label;
  double confidence = 1.0;
};

// Threshold rule over a windowed metric: beyond the hard bound is a local
// alert, between soft and hard is a suspicion that triggers cooperative
// detection.
struct AnomalyRule {
  std::string rule_id;
  AgentMetric metric = AgentMetric::ForwardRatio;
  std::optional<double> lower_hard;
  std::optional<double> lower_soft;
  std::optional<double> upper_soft;
  std::optional<double> upper_hard;
  std::uint32_t min_samples = 1;
  std::string attack_label;
};

enum class WindowOutcome : std::uint8_t { None, Suspicion, Alert };

// Per-node signature/rule store with runtime-learned entries. Versions
// increment on every learn so propagation can be checked for convergence.
class InterpreterBase {
 public:
  InterpreterBase() = default;
  InterpreterBase(std::vector<MisuseSignature> sigs, std::vector<AnomalyRule> rules)
      : signatures_(std::move(sigs)), rules_(std::move(rules)) {}

  static InterpreterBase with_defaults(const ScenarioConfig& cfg);

  const std::vector<MisuseSignature>& signatures() const { return signatures_; }
  const std::vector<AnomalyRule>& rules() const { return rules_; }
  std::uint32_t version() const { return version_; }

  void add_signature(MisuseSignature sig);  // plugin hook, no version bump
  void add_rule(AnomalyRule rule);

  // Learned, suspect-specific signature; returns false when already known.
  bool learn(const MisuseSignature& sig);
  // Learned entries as (suspect, metric) pairs for cluster propagation.
  std::vector<std::pair<NodeId, AgentMetric>> learned_keys() const;
  // Idempotent merge of a propagated delta; version converges to `version`.
  void merge(const std::vector<std::pair<NodeId, AgentMetric>>& keys,
             std::uint32_t version, const ScenarioConfig& cfg);

  static MisuseSignature derived_signature(AgentMetric metric, NodeId suspect,
                                           const ScenarioConfig& cfg);

 private:
  std::vector<MisuseSignature> signatures_;
  std::vector<AnomalyRule> rules_;
  std::set<std::string> learned_ids_;
  std::uint32_t version_ = 1;
};

// Layered ring store of audit records with bounded retention, plus the
// matching logic for misuse signatures and windowed anomaly metrics.
class AuditStore {
 public:
  AuditStore(NodeId owner, SimTime retention_s)
      : owner_(owner), retention_s_(retention_s) {}

  // Stores rec (self-observations are dropped: no record may accuse its own
  // observer). rreq_seen records are deduped by (actor, req_id) within
  // retention so counted patterns see distinct request ids.
  // Returns the stored record, or nullptr when dropped.
  const AuditRecord* record(AuditRecord rec);

  // First signature of rec's layer that rec completes, if any.
  const MisuseSignature* match_misuse(const InterpreterBase& base,
                                      const AuditRecord& rec) const;

  struct MetricSample {
    NodeId suspect = 0;
    double value = 0.0;
    std::uint32_t samples = 0;  // observation count backing the value
  };
  // Windowed metric per suspect over (end - window_s, end].
  std::vector<MetricSample> metric_window(AgentMetric metric, SimTime end,
                                          SimTime window_s) const;
  // Same metric for one suspect; nullopt when no observations exist.
  std::optional<MetricSample> observe(AgentMetric metric, NodeId suspect,
                                      SimTime start, SimTime end) const;

  void prune(SimTime now);
  const std::deque<AuditRecord>& layer_records(AuditLayer l) const {
    return records_[static_cast<std::size_t>(l)];
  }

 private:
  std::uint32_t count_pattern(const MisuseSignature& sig,
                              const AuditRecord& rec) const;

  NodeId owner_;
  SimTime retention_s_;
  std::deque<AuditRecord> records_[5];
  std::set<std::pair<NodeId, std::uint32_t>> rreq_window_seen_;
  std::deque<std::pair<SimTime, std::pair<NodeId, std::uint32_t>>> rreq_order_;
};

// Zone classification against a rule. Values strictly inside
// (lower_soft, upper_soft) never produce anything.
WindowOutcome classify(const AnomalyRule& rule, double value);

}  // namespace cwids
