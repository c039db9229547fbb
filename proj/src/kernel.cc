#include "cwids/kernel.h"

#include <stdexcept>

namespace cwids {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, const std::string& name)
    : gen_(splitmix64(master_seed ^ splitmix64(fnv1a(name)))) {}

std::uint64_t RngStream::next_u64() { return gen_(); }

double RngStream::uniform() {
  // 53 uniform mantissa bits -> [0,1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be > 0");
  // Rejection sampling keeps the distribution exact and deterministic.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

bool RngStream::bernoulli(double p) { return uniform() < p; }

SimKernel::SimKernel(std::uint64_t master_seed) : master_seed_(master_seed) {}

std::uint64_t SimKernel::schedule(SimTime t, std::function<void()> fn) {
  if (t < now_) throw std::invalid_argument("schedule: past event");
  const std::uint64_t id = next_seq_++;
  queue_.push(Entry{t, id, std::move(fn)});
  return id;
}

std::uint64_t SimKernel::schedule_in(SimTime delay, std::function<void()> fn) {
  return schedule(now_ + delay, std::move(fn));
}

std::size_t SimKernel::run_until(SimTime t_end) {
  if (t_end < now_) throw std::invalid_argument("run_until: t_end < now");
  std::size_t fired = 0;
  while (!queue_.empty() && queue_.top().at <= t_end) {
    Entry e = queue_.top();
    queue_.pop();
    now_ = e.at;
    e.fn();
    ++fired;
  }
  now_ = t_end;
  return fired;
}

RngStream& SimKernel::rng(const std::string& name) {
  auto it = streams_.find(name);
  if (it == streams_.end()) {
    it = streams_.emplace(name, RngStream(master_seed_, name)).first;
  }
  return it->second;
}

}  // namespace cwids
