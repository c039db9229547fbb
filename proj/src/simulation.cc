#include "cwids/simulation.h"

#include <algorithm>

namespace cwids {

Simulation::Simulation(const ScenarioConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), seed_(seed), kernel_(seed), world_(kernel_, trace_, cfg_) {
  cfg_.seed = seed;
  cfg_.validate();
  nodes_.reserve(cfg_.node_count);
  for (NodeId n = 0; n < cfg_.node_count; ++n)
    nodes_.push_back(std::make_unique<Node>(n, *this));
  world_.set_receiver([this](NodeId self, const Frame& f, bool overheard) {
    nodes_[self]->on_frame(f, overheard);
  });
  setup_flows();
  setup_attacks();
  schedule_windows();
}

double Simulation::mean_speed() const {
  if (cfg_.mobility_model != "waypoint") return 0.0;
  return 0.5 * (cfg_.speed_min_mps + cfg_.speed_max_mps);
}

SimTime Simulation::election_period() const {
  return cfg_.election_base_period_s * 5.0 / (5.0 + mean_speed());
}

void Simulation::setup_flows() {
  RngStream& rng = kernel_.rng("traffic");
  for (std::uint32_t i = 0; i < cfg_.flow_count; ++i) {
    Flow flow;
    if (i < cfg_.fixed_flows.size()) {
      flow.src = cfg_.fixed_flows[i].first;
      flow.dst = cfg_.fixed_flows[i].second;
    } else if (cfg_.node_count < 2) {
      break;
    } else {
      flow.src = static_cast<NodeId>(rng.uniform_int(cfg_.node_count));
      do {
        flow.dst = static_cast<NodeId>(rng.uniform_int(cfg_.node_count));
      } while (flow.dst == flow.src);
    }
    // Staggered starts so early head claims spread before most flows begin.
    flow.start = 0.1 + 0.4 * static_cast<double>(i);
    flows_.push_back(flow);
  }
  const SimTime period = 1.0 / cfg_.flow_rate_pps;
  for (std::uint32_t i = 0; i < flows_.size(); ++i) {
    // Self-rescheduling generator per flow.
    struct Gen {
      Simulation* sim;
      std::uint32_t flow;
      SimTime period;
      void operator()() const {
        const Flow& f = sim->flows()[flow];
        sim->node(f.src).originate_data(f.dst, flow, false);
        const SimTime next = sim->kernel().now() + period;
        if (next < sim->cfg().end_time())
          sim->kernel().schedule(next, Gen{sim, flow, period});
      }
    };
    kernel_.schedule(flows_[i].start, Gen{this, i, period});
  }
}

void Simulation::setup_attacks() {
  for (const AttackSpec& spec : cfg_.attacks) nodes_[spec.node]->install_attack(spec);
}

void Simulation::schedule_windows() {
  struct WindowTick {
    Simulation* sim;
    SimTime period;
    void operator()() const {
      const SimTime end = sim->kernel().now();
      for (NodeId n = 0; n < sim->world().node_count(); ++n)
        sim->node(n).on_window_close(end);
      const SimTime next = end + period;
      if (next <= sim->cfg().end_time())
        sim->kernel().schedule(next, WindowTick{sim, period});
    }
  };
  kernel_.schedule(cfg_.window_s, WindowTick{this, cfg_.window_s});
}

void Simulation::run() { kernel_.run_until(cfg_.end_time()); }

void Simulation::run_until(SimTime t) { kernel_.run_until(t); }

}  // namespace cwids
