#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cwids/types.h"

namespace cwids {

enum class AttackKind { Flooding, Blackhole, SleepDeprivation, PacketDrop };

const char* attack_kind_name(AttackKind k);
std::optional<AttackKind> attack_kind_from_name(const std::string& s);

struct AttackSpec {
  NodeId node = 0;
  AttackKind kind = AttackKind::Blackhole;
  SimTime start = 0.0;
  SimTime stop = 0.0;
  double rreq_rate = 50.0;   // flooding, RREQs per second
  NodeId victim = 0;         // sleep deprivation target
  double pkt_rate = 30.0;    // sleep deprivation, packets per second
  double drop_prob = 1.0;    // packet drop
};

// Experiment description. Defaults reproduce the reference parameter set:
// 500x500 m area, 30 nodes, 250 m range, random waypoint with 5 s pause,
// 15 CBR flows at 2 pkt/s and 512 B, 64-packet send buffers, 2 Mbps channel,
// 1000 s warmup plus 50 s test.
struct ScenarioConfig {
  // area
  double area_width = 500.0;
  double area_height = 500.0;
  // nodes
  std::uint32_t node_count = 30;
  std::vector<std::pair<NodeId, Position>> fixed_positions;  // overrides placement
  // radio
  double tx_range_m = 250.0;
  double channel_bps = 2.0e6;
  double loss_prob = 0.0;
  std::uint32_t tx_queue_cap = 256;
  // mobility
  std::string mobility_model = "waypoint";  // "waypoint" | "static"
  double speed_min_mps = 1.0;
  double speed_max_mps = 5.0;
  double pause_s = 5.0;
  // traffic
  std::uint32_t flow_count = 15;
  double flow_rate_pps = 2.0;
  std::uint32_t packet_bytes = 512;
  std::uint32_t send_buffer = 64;
  std::vector<std::pair<NodeId, NodeId>> fixed_flows;  // overrides random pairs
  // durations
  SimTime warmup_s = 1000.0;
  SimTime test_s = 50.0;
  // routing
  SimTime route_expiry_s = 30.0;
  std::uint32_t rreq_ttl = 10;
  SimTime rreq_retry_s = 2.0;
  // clustering
  SimTime beacon_period_s = 20.0;
  SimTime cluster_timeout_s = 60.0;
  std::uint32_t tag_bytes = 8;
  // trust
  double trust_initial = 0.5;
  double trust_penalty = 0.2;       // per unit severity
  double trust_recovery_per_s = 0.005;
  double trust_eligibility = 0.5;
  double trust_cap = 1.0;
  // election
  SimTime election_base_period_s = 100.0;
  SimTime election_collect_s = 2.0;
  // agents
  SimTime agent_hop_timeout_s = 2.0;
  std::uint32_t agent_max_retries = 2;
  std::uint32_t itinerary_cap = 5;
  // detection
  SimTime window_s = 10.0;
  SimTime watchdog_deadline_s = 0.5;
  std::uint32_t min_samples = 5;
  double fr_lower_hard = 0.25;
  double fr_lower_soft = 0.5;
  double rreq_upper_soft = 5.0;    // per second
  double rreq_upper_hard = 10.0;
  double drx_upper_soft = 10.0;    // per second
  double drx_upper_hard = 20.0;
  SimTime audit_retention_s = 60.0;
  // response / scoring
  SimTime grace_s = 30.0;
  // attacks
  std::vector<AttackSpec> attacks;
  // rng
  std::uint64_t seed = 1;

  SimTime end_time() const { return warmup_s + test_s; }

  // Throws std::runtime_error naming the offending key and value.
  void validate() const;

  // Resolved key=value snapshot in documented key order (used by manifests).
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
};

// Parses `key = value` lines with '#' comments. Missing keys keep defaults;
// unknown keys and invariant violations raise std::runtime_error naming the
// key.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

}  // namespace cwids
