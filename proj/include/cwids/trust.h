#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "cwids/types.h"

namespace cwids {

struct TrustParams {
  double initial = 0.5;
  double penalty_per_severity = 0.2;
  double recovery_per_s = 0.005;
  double cap = 1.0;
  double eligibility = 0.5;
};

struct TrustScore {
  double value = 0.5;
  SimTime last_update = 0.0;
};

// Bounded reputation per peer: penalties subtract, idle time recovers up to
// the cap. Recovery is applied lazily before every read and write.
class TrustTable {
 public:
  explicit TrustTable(TrustParams params) : params_(params) {}

  // Current value with recovery applied (entry created at initial if absent).
  double get(NodeId node, SimTime now);
  // value <- max(0, value - penalty*severity). Throws on negative severity.
  double penalize(NodeId node, double severity, SimTime now);
  // State transfer (handover): overwrite an entry outright.
  void set(NodeId node, double value, SimTime now);
  const std::map<NodeId, TrustScore>& entries() const { return scores_; }
  const TrustParams& params() const { return params_; }

 private:
  TrustScore& fetch(NodeId node, SimTime now);

  TrustParams params_;
  std::map<NodeId, TrustScore> scores_;
};

struct Ballot {
  NodeId voter = 0;
  NodeId candidate = 0;
  std::uint32_t epoch = 0;
};

enum class TieBreak : std::uint8_t { None, Connectivity, Id };
const char* tie_break_name(TieBreak t);

struct ElectionResult {
  NodeId winner = 0;
  std::map<NodeId, std::uint32_t> vote_counts;
  TieBreak tie_broken_by = TieBreak::None;
};

// Voter-side choice: highest own-table trust among eligible candidates,
// ties to the lowest id. nullopt when no candidate meets eligibility.
std::optional<NodeId> choose_candidate(TrustTable& table, SimTime now,
                                       const std::vector<NodeId>& candidates);

// Head-side count: max votes, ties broken by higher connectivity index
// (1-hop degree), then lowest id. Ballots must be non-empty.
ElectionResult tally(const std::vector<Ballot>& ballots,
                     const std::map<NodeId, std::uint32_t>& connectivity);

}  // namespace cwids
