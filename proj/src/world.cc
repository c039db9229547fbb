#include "cwids/world.h"

#include <algorithm>
#include <stdexcept>

namespace cwids {

MobilityModel::MobilityModel(SimKernel& kernel, const ScenarioConfig& cfg)
    : kernel_(kernel), cfg_(cfg) {
  legs_.resize(cfg.node_count);
  RngStream& rng = kernel_.rng("mobility");
  for (NodeId n = 0; n < cfg.node_count; ++n) {
    Position p{rng.uniform(0.0, cfg.area_width), rng.uniform(0.0, cfg.area_height)};
    legs_[n] = Leg{p, 0.0, p, 0.0, 0.0};
  }
  for (const auto& [id, pos] : cfg.fixed_positions) legs_[id].from = legs_[id].to = pos;
  moving_ = cfg.mobility_model == "waypoint" && cfg.speed_max_mps > 0.0;
  if (moving_) {
    for (NodeId n = 0; n < cfg.node_count; ++n) schedule_arrival(n);
  }
}

void MobilityModel::schedule_arrival(NodeId node) {
  RngStream& rng = kernel_.rng("mobility");
  Leg& leg = legs_[node];
  leg.from = leg.to;
  leg.depart = kernel_.now();
  leg.to = Position{rng.uniform(0.0, cfg_.area_width),
                    rng.uniform(0.0, cfg_.area_height)};
  leg.speed = cfg_.speed_min_mps == cfg_.speed_max_mps
                  ? cfg_.speed_min_mps
                  : rng.uniform(cfg_.speed_min_mps, cfg_.speed_max_mps);
  if (leg.speed <= 0.0) {
    leg.to = leg.from;
    return;  // immobile node, never reschedules
  }
  leg.arrive = leg.depart + distance(leg.from, leg.to) / leg.speed;
  kernel_.schedule(leg.arrive, [this, node] { on_arrival(node); });
}

void MobilityModel::on_arrival(NodeId node) {
  Leg& leg = legs_[node];
  leg.from = leg.to;
  leg.depart = kernel_.now() + cfg_.pause_s;
  kernel_.schedule(leg.depart, [this, node] { schedule_arrival(node); });
}

Position MobilityModel::position(NodeId node, SimTime t) const {
  if (node >= legs_.size()) throw std::invalid_argument("unknown node");
  const Leg& leg = legs_[node];
  if (!moving_ || t <= leg.depart || leg.speed <= 0.0) return leg.from;
  const double frac =
      std::min(1.0, (t - leg.depart) * leg.speed / std::max(1e-12, distance(leg.from, leg.to)));
  return Position{leg.from.x + (leg.to.x - leg.from.x) * frac,
                  leg.from.y + (leg.to.y - leg.from.y) * frac};
}

Position MobilityModel::position_now(NodeId node) const {
  return position(node, kernel_.now());
}

World::World(SimKernel& kernel, TraceLog& trace, const ScenarioConfig& cfg)
    : kernel_(kernel), trace_(trace), cfg_(cfg), mobility_(kernel, cfg) {
  tx_queue_.resize(cfg.node_count);
  tx_busy_.assign(cfg.node_count, false);
}

Position World::position(NodeId node) const {
  return mobility_.position_now(node);
}

bool World::in_range(NodeId a, NodeId b) const {
  return distance(mobility_.position_now(a), mobility_.position_now(b)) <=
         cfg_.tx_range_m;
}

std::vector<NodeId> World::neighbors(NodeId node) const {
  std::vector<NodeId> out;
  const Position p = mobility_.position_now(node);
  for (NodeId n = 0; n < cfg_.node_count; ++n) {
    if (n == node) continue;
    if (distance(p, mobility_.position_now(n)) <= cfg_.tx_range_m)
      out.push_back(n);
  }
  return out;
}

std::uint32_t World::degree(NodeId node) const {
  return static_cast<std::uint32_t>(neighbors(node).size());
}

void World::transmit(NodeId src, Frame frame) {
  if (src >= cfg_.node_count) throw std::invalid_argument("unknown node");
  frame.src = src;
  if (tx_queue_[src].size() >= cfg_.tx_queue_cap) {
    trace_.emit(kernel_.now(), src, "drop", "txq_full", {});
    return;
  }
  tx_queue_[src].push_back(std::move(frame));
  if (!tx_busy_[src]) begin_tx(src);
}

void World::begin_tx(NodeId src) {
  tx_busy_[src] = true;
  const Frame& frame = tx_queue_[src].front();
  // Receivers are fixed at on-air time.
  std::vector<NodeId> receivers = neighbors(src);
  const SimTime done = kernel_.now() + airtime(frame.bytes);
  kernel_.schedule(done, [this, src, receivers = std::move(receivers)] {
    Frame frame = std::move(tx_queue_[src].front());
    tx_queue_[src].pop_front();
    RngStream& rng = kernel_.rng("radio");
    for (NodeId r : receivers) {
      if (cfg_.loss_prob > 0.0 && rng.bernoulli(cfg_.loss_prob)) continue;
      const bool overheard = frame.dst != kBroadcast && frame.dst != r;
      if (receive_) receive_(r, frame, overheard);
    }
    tx_busy_[src] = false;
    if (!tx_queue_[src].empty()) begin_tx(src);
  });
}

}  // namespace cwids
