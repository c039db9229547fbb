#pragma once

#include <memory>
#include <vector>

#include "cwids/config.h"
#include "cwids/kernel.h"
#include "cwids/node.h"
#include "cwids/trace.h"
#include "cwids/world.h"

namespace cwids {

struct Flow {
  NodeId src = 0;
  NodeId dst = 0;
  SimTime start = 0.0;
};

// One deterministic run: a kernel, the radio world, and the protocol nodes.
// Instances share nothing and are safe to run in parallel with each other.
class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, std::uint64_t seed);

  // Runs to the configured end time (warmup + test).
  void run();
  // Incremental stepping for tests.
  void run_until(SimTime t);

  SimKernel& kernel() { return kernel_; }
  World& world() { return world_; }
  TraceLog& trace() { return trace_; }
  const TraceLog& trace() const { return trace_; }
  const ScenarioConfig& cfg() const { return cfg_; }
  Node& node(NodeId id) { return *nodes_[id]; }
  const std::vector<Flow>& flows() const { return flows_; }
  SimTime now() const { return kernel_.now(); }
  std::uint64_t seed() const { return seed_; }

  // Mean configured node speed; drives the election period scaling.
  double mean_speed() const;
  SimTime election_period() const;

 private:
  void setup_flows();
  void setup_attacks();
  void schedule_windows();

  ScenarioConfig cfg_;
  std::uint64_t seed_;
  SimKernel kernel_;
  TraceLog trace_;
  World world_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<Flow> flows_;
};

}  // namespace cwids
