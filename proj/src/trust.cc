#include "cwids/trust.h"

#include <algorithm>
#include <stdexcept>

namespace cwids {

const char* tie_break_name(TieBreak t) {
  switch (t) {
    case TieBreak::None: return "none";
    case TieBreak::Connectivity: return "connectivity";
    case TieBreak::Id: return "id";
  }
  return "?";
}

TrustScore& TrustTable::fetch(NodeId node, SimTime now) {
  auto it = scores_.find(node);
  if (it == scores_.end()) {
    it = scores_.emplace(node, TrustScore{params_.initial, now}).first;
    return it->second;
  }
  TrustScore& s = it->second;
  if (now > s.last_update) {
    s.value = std::min(params_.cap,
                       s.value + params_.recovery_per_s * (now - s.last_update));
    s.last_update = now;
  }
  return s;
}

double TrustTable::get(NodeId node, SimTime now) { return fetch(node, now).value; }

double TrustTable::penalize(NodeId node, double severity, SimTime now) {
  if (severity < 0.0) throw std::invalid_argument("penalize: negative severity");
  TrustScore& s = fetch(node, now);
  s.value = std::max(0.0, s.value - params_.penalty_per_severity * severity);
  s.last_update = now;
  return s.value;
}

void TrustTable::set(NodeId node, double value, SimTime now) {
  scores_[node] = TrustScore{std::clamp(value, 0.0, params_.cap), now};
}

std::optional<NodeId> choose_candidate(TrustTable& table, SimTime now,
                                       const std::vector<NodeId>& candidates) {
  std::optional<NodeId> best;
  double best_trust = 0.0;
  for (NodeId c : candidates) {
    const double t = table.get(c, now);
    if (t < table.params().eligibility) continue;
    if (!best || t > best_trust || (t == best_trust && c < *best)) {
      best = c;
      best_trust = t;
    }
  }
  return best;
}

ElectionResult tally(const std::vector<Ballot>& ballots,
                     const std::map<NodeId, std::uint32_t>& connectivity) {
  if (ballots.empty()) throw std::invalid_argument("tally: no ballots");
  ElectionResult res;
  for (const Ballot& b : ballots) res.vote_counts[b.candidate]++;

  std::uint32_t max_votes = 0;
  for (const auto& [cand, n] : res.vote_counts) max_votes = std::max(max_votes, n);

  std::vector<NodeId> leaders;
  for (const auto& [cand, n] : res.vote_counts)
    if (n == max_votes) leaders.push_back(cand);

  if (leaders.size() == 1) {
    res.winner = leaders.front();
    res.tie_broken_by = TieBreak::None;
    return res;
  }

  auto deg = [&connectivity](NodeId n) -> std::uint32_t {
    auto it = connectivity.find(n);
    return it == connectivity.end() ? 0 : it->second;
  };
  std::uint32_t best_deg = 0;
  for (NodeId n : leaders) best_deg = std::max(best_deg, deg(n));
  std::vector<NodeId> top;
  for (NodeId n : leaders)
    if (deg(n) == best_deg) top.push_back(n);

  res.winner = *std::min_element(top.begin(), top.end());
  res.tie_broken_by = top.size() == 1 ? TieBreak::Connectivity : TieBreak::Id;
  return res;
}

}  // namespace cwids
