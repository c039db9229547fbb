#include "cwids/response.h"

namespace cwids {

const char* response_kind_name(ResponseKind k) {
  switch (k) {
    case ResponseKind::BlockLocal: return "block_local";
    case ResponseKind::ClusterIsolate: return "cluster_isolate";
    case ResponseKind::NetworkIsolate: return "network_isolate";
  }
  return "?";
}

bool Blocklist::add(NodeId subject, SimTime now) {
  if (subject == owner_) return false;
  return blocked_.emplace(subject, now).second;
}

}  // namespace cwids
