#include "cwids/routing.h"

namespace cwids {

const RouteEntry* RouteTable::lookup(NodeId dst, SimTime now) const {
  auto it = routes_.find(dst);
  if (it == routes_.end()) return nullptr;
  if (it->second.expires_at < now) return nullptr;
  return &it->second;
}

bool RouteTable::offer(NodeId dst, const RouteEntry& entry) {
  auto it = routes_.find(dst);
  if (it == routes_.end()) {
    routes_.emplace(dst, entry);
    return true;
  }
  RouteEntry& cur = it->second;
  const bool fresher = entry.dst_seq > cur.dst_seq ||
                       (entry.dst_seq == cur.dst_seq &&
                        entry.hop_count < cur.hop_count);
  if (fresher) {
    cur = entry;
    return true;
  }
  // Same route re-learned: keep it alive.
  if (entry.dst_seq == cur.dst_seq && entry.next_hop == cur.next_hop &&
      entry.hop_count == cur.hop_count && entry.expires_at > cur.expires_at) {
    cur.expires_at = entry.expires_at;
  }
  return false;
}

void RouteTable::remove(NodeId dst) { routes_.erase(dst); }

std::optional<SendBuffer::Pending> SendBuffer::push(NodeId final_dst,
                                                    Frame frame) {
  std::optional<Pending> displaced;
  if (q_.size() >= capacity_) {
    displaced = std::move(q_.front());
    q_.pop_front();
  }
  q_.push_back(Pending{final_dst, std::move(frame)});
  return displaced;
}

std::vector<SendBuffer::Pending> SendBuffer::take_for(NodeId dst) {
  std::vector<Pending> out;
  for (auto it = q_.begin(); it != q_.end();) {
    if (it->final_dst == dst) {
      out.push_back(std::move(*it));
      it = q_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

bool SendBuffer::has_for(NodeId dst) const {
  for (const auto& p : q_)
    if (p.final_dst == dst) return true;
  return false;
}

}  // namespace cwids
