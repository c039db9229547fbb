#pragma once

#include <cstdint>

#include "cwids/messages.h"

namespace cwids::wire {

// Control frame sizes in bytes (overhead accounting).
inline constexpr std::uint32_t kRreq = 64;
inline constexpr std::uint32_t kRrep = 64;
inline constexpr std::uint32_t kReg = 32;
inline constexpr std::uint32_t kRegAck = 16;
inline constexpr std::uint32_t kRegRefresh = 16;
inline constexpr std::uint32_t kGwReport = 24;
inline constexpr std::uint32_t kGwAssign = 24;
inline constexpr std::uint32_t kElectionStart = 24;
inline constexpr std::uint32_t kBallot = 16;
inline constexpr std::uint32_t kHandover = 64;
inline constexpr std::uint32_t kHandoverAck = 16;
inline constexpr std::uint32_t kHeadChanged = 16;
inline constexpr std::uint32_t kAlertReport = 48;
inline constexpr std::uint32_t kReportAck = 16;
inline constexpr std::uint32_t kSuspicionReq = 48;
inline constexpr std::uint32_t kBaseDelta = 32;
inline constexpr std::uint32_t kClusterIsolate = 24;
inline constexpr std::uint32_t kNetworkIsolate = 32;
inline constexpr std::uint32_t kAgentBase = 128;
inline constexpr std::uint32_t kAgentPerResult = 32;

inline std::uint32_t beacon_bytes(const BeaconMsg& b) {
  return 24 + 4 * static_cast<std::uint32_t>(b.members.size() +
                                             b.gateways.size() +
                                             b.isolated.size());
}

inline std::uint32_t agent_bytes(const AgentMsg& a) {
  return kAgentBase +
         kAgentPerResult * static_cast<std::uint32_t>(a.results.size());
}

}  // namespace cwids::wire
