#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "cwids/types.h"

namespace cwids {

enum class ClusterRole : std::uint8_t {
  Unclustered,
  Head,
  Member,
  Gateway,
  DistributedGateway
};

const char* role_name(ClusterRole r);

// Cluster state carried on data-plane frames. hops_to_head is 1 or 2 for
// bound nodes, 0 otherwise.
struct PiggybackTag {
  ClusterRole sender_role = ClusterRole::Unclustered;
  std::optional<NodeId> sender_head;
  std::uint8_t hops_to_head = 0;
};

struct RreqMsg {
  NodeId origin = 0;
  std::uint32_t req_id = 0;
  NodeId target = 0;
  std::uint32_t origin_seq = 0;
  std::uint32_t hop_count = 0;
};

struct RrepMsg {
  NodeId origin = 0;   // node the reply travels back to
  NodeId target = 0;   // destination the route is for
  std::uint32_t target_seq = 0;
  std::uint32_t hop_count = 0;
};

// Unicast payload routed hop by hop: CBR data, attack traffic, and mobile
// agents all ride this path.
struct DataPkt {
  NodeId origin = 0;
  NodeId dst = 0;
  std::uint32_t flow = 0;      // flow index, or attack marker
  std::uint32_t seq = 0;       // per-flow sequence
  std::uint32_t hops_left = 32;
  bool bogus = false;          // attack-generated, excluded from PDR
};

struct BeaconMsg {
  NodeId head = 0;
  std::uint32_t counter = 0;   // emission counter, dedup key with head
  std::uint8_t ttl = 2;        // hops remaining including this transmission
  std::vector<NodeId> members;
  std::vector<NodeId> gateways;
  std::vector<NodeId> isolated;  // piggybacked isolation list
};

enum class CtlType : std::uint8_t {
  Register,       // member -> head, a: hops (1|2)
  RegisterAck,    // head -> member, carries base version/learned sigs
  RegisterRefresh,
  GwReport,       // member -> head: a=foreign head, b=foreign member or none
  GwAssign,       // head -> member: a=peer head, b=1 plain | 2 distributed
  ElectionStart,  // head -> cluster: a=epoch; list=candidates
  Ballot,         // member -> head: a=epoch, b=candidate
  Handover,       // old head -> winner: a=epoch; list/list2 = registry/isolated
  HandoverAck,    // winner -> old head: a=epoch
  HeadChanged,    // old head -> cluster: a=new head
  AlertReport,    // member -> head: a=suspect, b=detector|label, c=report id
  ReportAck,      // head -> member: a=suspect, c=report id
  SuspicionReq,   // member -> head: a=suspect, b=metric, t0/t1 window
  BaseDelta,      // head -> cluster: a=version; list=suspects of learned sigs
  ClusterIsolate, // head -> cluster: a=subject, b=epoch, c=issuer
  NetworkIsolate  // head -> head: a=subject, b=epoch, c=issuer
};

const char* ctl_type_name(CtlType t);

// Catch-all clustering / IDS control message. Small fixed fields instead of
// per-type structs; the dispatch switch documents the meaning per type.
struct CtlMsg {
  CtlType type = CtlType::Register;
  NodeId origin = 0;      // node that created the message
  NodeId a = 0;
  NodeId b = 0;
  NodeId c = 0;
  double x = 0.0;         // metric value / trust payload
  SimTime t0 = 0.0;       // window start
  SimTime t1 = 0.0;       // window end
  std::vector<NodeId> list;
  std::vector<NodeId> list2;
  std::vector<NodeId> list3;
  std::vector<std::pair<NodeId, double>> table;   // trust entries on handover
  std::vector<std::pair<NodeId, double>> table2;  // learned signature keys
  // Remaining relay hops for source-routed delivery (front = next hop).
  std::vector<NodeId> route;
  // Cluster-broadcast delivery (2-hop relayed, deduped like beacons).
  NodeId bcast_origin = kBroadcast;
  std::uint32_t bcast_id = 0;
  std::uint8_t ttl = 0;
};

enum class AgentMetric : std::uint8_t { ForwardRatio, RreqRate, DestRxRate };
const char* agent_metric_name(AgentMetric m);

struct AgentQuery {
  AgentMetric metric = AgentMetric::ForwardRatio;
  NodeId suspect = 0;
  SimTime window_start = 0.0;
  SimTime window_end = 0.0;
};

struct AgentResult {
  NodeId node = 0;
  bool no_data = true;
  double value = 0.0;
};

struct AgentMsg {
  std::uint64_t agent_id = 0;
  NodeId origin_head = 0;
  AgentQuery query;
  std::vector<NodeId> itinerary;
  std::uint32_t cursor = 0;  // next itinerary index; == size when homebound
  std::vector<AgentResult> results;
  SimTime created_at = 0.0;
};

enum class FrameKind : std::uint8_t { Rreq, Rrep, Data, Agent, Beacon, Ctl };

struct Frame {
  NodeId src = 0;           // transmitting node for this hop
  NodeId dst = kBroadcast;  // link-layer destination
  FrameKind kind = FrameKind::Data;
  std::uint32_t bytes = 0;  // wire size including any piggyback tag
  std::optional<PiggybackTag> tag;
  std::variant<RreqMsg, RrepMsg, DataPkt, BeaconMsg, AgentMsg, CtlMsg> body;
};

}  // namespace cwids
