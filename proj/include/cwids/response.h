#pragma once

#include <cstdint>
#include <map>
#include <set>

#include "cwids/types.h"

namespace cwids {

enum class ResponseKind : std::uint8_t { BlockLocal, ClusterIsolate, NetworkIsolate };
const char* response_kind_name(ResponseKind k);

struct ResponseAction {
  ResponseKind kind = ResponseKind::BlockLocal;
  NodeId subject = 0;
  std::uint32_t epoch = 0;
  NodeId issuer = 0;
};

// Per-node set of isolated peers. Entries persist for the rest of the run.
class Blocklist {
 public:
  explicit Blocklist(NodeId owner) : owner_(owner) {}

  // False when subject == owner (self-blocking rejected) or already present.
  bool add(NodeId subject, SimTime now);
  bool contains(NodeId subject) const { return blocked_.count(subject) != 0; }
  const std::map<NodeId, SimTime>& entries() const { return blocked_; }

 private:
  NodeId owner_;
  std::map<NodeId, SimTime> blocked_;
};

// Loop/duplicate suppression for propagated isolation actions,
// keyed by (issuer, subject, epoch).
class ResponseDedup {
 public:
  bool first_time(NodeId issuer, NodeId subject, std::uint32_t epoch) {
    return seen_.insert({issuer, {subject, epoch}}).second;
  }

 private:
  std::set<std::pair<NodeId, std::pair<NodeId, std::uint32_t>>> seen_;
};

}  // namespace cwids
