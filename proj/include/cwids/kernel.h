#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "cwids/types.h"

namespace cwids {

// Deterministic random substream. The draw sequence depends only on
// (master seed, name), so adding draws in one stream never perturbs another.
// Raw 64-bit output of std::mt19937_64 is fully specified by the standard;
// the derived distributions below are hand-rolled for the same reason.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, const std::string& name);

  std::uint64_t next_u64();
  // Uniform in [0,1).
  double uniform();
  // Uniform in [lo,hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0,n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);
  bool bernoulli(double p);

 private:
  std::mt19937_64 gen_;
};

// Discrete-event engine: virtual clock plus a single (time, seq) ordered
// queue. Events at equal times fire in insertion order.
class SimKernel {
 public:
  explicit SimKernel(std::uint64_t master_seed);

  SimTime now() const { return now_; }

  // Enqueues fn to fire at time t. Throws std::invalid_argument for t < now().
  std::uint64_t schedule(SimTime t, std::function<void()> fn);
  // Convenience: fire after a delay relative to now().
  std::uint64_t schedule_in(SimTime delay, std::function<void()> fn);

  // Fires every event with fire_at <= t_end in (fire_at, seq) order, including
  // events scheduled by handlers during the call. Clock ends at t_end.
  // Returns the number of events fired.
  std::size_t run_until(SimTime t_end);

  std::size_t pending() const { return queue_.size(); }

  // Named substream, created on first use and persistent for the run.
  RngStream& rng(const std::string& name);

  std::uint64_t master_seed() const { return master_seed_; }

 private:
  struct Entry {
    SimTime at;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t master_seed_;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::map<std::string, RngStream> streams_;
};

}  // namespace cwids
