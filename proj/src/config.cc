#include "cwids/config.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cwids {

const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::Flooding: return "flooding";
    case AttackKind::Blackhole: return "blackhole";
    case AttackKind::SleepDeprivation: return "sleep_deprivation";
    case AttackKind::PacketDrop: return "packet_drop";
  }
  return "?";
}

std::optional<AttackKind> attack_kind_from_name(const std::string& s) {
  if (s == "flooding") return AttackKind::Flooding;
  if (s == "blackhole") return AttackKind::Blackhole;
  if (s == "sleep_deprivation") return AttackKind::SleepDeprivation;
  if (s == "packet_drop") return AttackKind::PacketDrop;
  return std::nullopt;
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& value,
                      const std::string& why) {
  throw std::runtime_error("scenario config: key '" + key + "' value '" +
                           value + "': " + why);
}

double to_num(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) bad(key, value, "not a number");
    return v;
  } catch (const std::invalid_argument&) {
    bad(key, value, "not a number");
  } catch (const std::out_of_range&) {
    bad(key, value, "out of range");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  const double v = to_num(key, value);
  if (v < 0 || v != static_cast<std::uint64_t>(v))
    bad(key, value, "not a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  ScenarioConfig cfg;
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("scenario config: line " +
                               std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::runtime_error("scenario config: line " +
                               std::to_string(lineno) + ": empty key or value");
    if (!kv.emplace(key, val).second)
      throw std::runtime_error("scenario config: duplicate key '" + key + "'");
  }

  // Indexed keys are matched by prefix, everything else must be known.
  std::uint64_t attack_count = 0;
  if (auto it = kv.find("attack.count"); it != kv.end()) {
    attack_count = to_uint("attack.count", it->second);
    kv.erase(it);
  }
  cfg.attacks.resize(attack_count);

  auto take = [&kv](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto num = [&take](const char* key, double& slot) {
    if (auto v = take(key)) slot = to_num(key, *v);
  };
  auto uint32 = [&take](const char* key, std::uint32_t& slot) {
    if (auto v = take(key)) slot = static_cast<std::uint32_t>(to_uint(key, *v));
  };

  num("area.width", cfg.area_width);
  num("area.height", cfg.area_height);
  uint32("nodes.count", cfg.node_count);
  num("radio.tx_range_m", cfg.tx_range_m);
  num("radio.channel_bps", cfg.channel_bps);
  num("radio.loss_prob", cfg.loss_prob);
  uint32("radio.tx_queue_cap", cfg.tx_queue_cap);
  if (auto v = take("mobility.model")) cfg.mobility_model = *v;
  num("mobility.speed_min_mps", cfg.speed_min_mps);
  num("mobility.speed_max_mps", cfg.speed_max_mps);
  num("mobility.pause_s", cfg.pause_s);
  uint32("traffic.flow_count", cfg.flow_count);
  num("traffic.rate_pps", cfg.flow_rate_pps);
  uint32("traffic.packet_bytes", cfg.packet_bytes);
  uint32("traffic.send_buffer", cfg.send_buffer);
  num("time.warmup_s", cfg.warmup_s);
  num("time.test_s", cfg.test_s);
  num("routing.route_expiry_s", cfg.route_expiry_s);
  uint32("routing.rreq_ttl", cfg.rreq_ttl);
  num("routing.rreq_retry_s", cfg.rreq_retry_s);
  num("cluster.beacon_period_s", cfg.beacon_period_s);
  num("cluster.timeout_s", cfg.cluster_timeout_s);
  uint32("cluster.tag_bytes", cfg.tag_bytes);
  num("trust.initial", cfg.trust_initial);
  num("trust.penalty", cfg.trust_penalty);
  num("trust.recovery_per_s", cfg.trust_recovery_per_s);
  num("trust.eligibility", cfg.trust_eligibility);
  num("trust.cap", cfg.trust_cap);
  num("election.base_period_s", cfg.election_base_period_s);
  num("election.collect_s", cfg.election_collect_s);
  num("agents.hop_timeout_s", cfg.agent_hop_timeout_s);
  uint32("agents.max_retries", cfg.agent_max_retries);
  uint32("agents.itinerary_cap", cfg.itinerary_cap);
  num("detector.window_s", cfg.window_s);
  num("detector.watchdog_deadline_s", cfg.watchdog_deadline_s);
  uint32("detector.min_samples", cfg.min_samples);
  num("detector.forward_ratio.lower_hard", cfg.fr_lower_hard);
  num("detector.forward_ratio.lower_soft", cfg.fr_lower_soft);
  num("detector.rreq_rate.upper_soft", cfg.rreq_upper_soft);
  num("detector.rreq_rate.upper_hard", cfg.rreq_upper_hard);
  num("detector.dest_rx_rate.upper_soft", cfg.drx_upper_soft);
  num("detector.dest_rx_rate.upper_hard", cfg.drx_upper_hard);
  num("detector.audit_retention_s", cfg.audit_retention_s);
  num("metrics.grace_s", cfg.grace_s);
  if (auto v = take("seed")) cfg.seed = to_uint("seed", *v);

  for (std::uint64_t i = 0; i < attack_count; ++i) {
    const std::string p = "attack." + std::to_string(i) + ".";
    AttackSpec& a = cfg.attacks[i];
    auto req = [&](const std::string& key) -> std::string {
      auto it = kv.find(key);
      if (it == kv.end())
        throw std::runtime_error("scenario config: missing key '" + key + "'");
      std::string v = it->second;
      kv.erase(it);
      return v;
    };
    const std::string kind_s = req(p + "kind");
    auto kind = attack_kind_from_name(kind_s);
    if (!kind) bad(p + "kind", kind_s, "unknown attack kind");
    a.kind = *kind;
    a.node = static_cast<NodeId>(to_uint(p + "node", req(p + "node")));
    a.start = to_num(p + "start", req(p + "start"));
    a.stop = to_num(p + "stop", req(p + "stop"));
    if (auto it = kv.find(p + "rreq_rate"); it != kv.end()) {
      a.rreq_rate = to_num(p + "rreq_rate", it->second);
      kv.erase(it);
    }
    if (auto it = kv.find(p + "victim"); it != kv.end()) {
      a.victim = static_cast<NodeId>(to_uint(p + "victim", it->second));
      kv.erase(it);
    }
    if (auto it = kv.find(p + "pkt_rate"); it != kv.end()) {
      a.pkt_rate = to_num(p + "pkt_rate", it->second);
      kv.erase(it);
    }
    if (auto it = kv.find(p + "drop_prob"); it != kv.end()) {
      a.drop_prob = to_num(p + "drop_prob", it->second);
      kv.erase(it);
    }
  }

  // Per-node pinned positions, e.g. nodes.3.x / nodes.3.y.
  for (auto it = kv.begin(); it != kv.end();) {
    const std::string& key = it->first;
    if (key.rfind("nodes.", 0) == 0 &&
        (key.size() > 8 && (key.substr(key.size() - 2) == ".x" ||
                            key.substr(key.size() - 2) == ".y"))) {
      const std::string idx_s = key.substr(6, key.size() - 8);
      const NodeId id = static_cast<NodeId>(to_uint(key, idx_s));
      const bool is_x = key.back() == 'x';
      const double v = to_num(key, it->second);
      auto pos = std::find_if(cfg.fixed_positions.begin(),
                              cfg.fixed_positions.end(),
                              [id](const auto& p) { return p.first == id; });
      if (pos == cfg.fixed_positions.end()) {
        cfg.fixed_positions.push_back({id, Position{}});
        pos = cfg.fixed_positions.end() - 1;
      }
      (is_x ? pos->second.x : pos->second.y) = v;
      it = kv.erase(it);
    } else if (key.rfind("flow.", 0) == 0) {
      // flow.N.src / flow.N.dst pin CBR endpoints.
      const auto dot = key.find('.', 5);
      if (dot == std::string::npos) bad(key, it->second, "malformed flow key");
      const std::uint64_t idx = to_uint(key, key.substr(5, dot - 5));
      const std::string what = key.substr(dot + 1);
      if (what != "src" && what != "dst") bad(key, it->second, "unknown flow field");
      if (cfg.fixed_flows.size() <= idx) cfg.fixed_flows.resize(idx + 1, {kBroadcast, kBroadcast});
      const NodeId id = static_cast<NodeId>(to_uint(key, it->second));
      (what == "src" ? cfg.fixed_flows[idx].first : cfg.fixed_flows[idx].second) = id;
      it = kv.erase(it);
    } else {
      ++it;
    }
  }

  if (!kv.empty())
    throw std::runtime_error("scenario config: unknown key '" +
                             kv.begin()->first + "'");

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

void ScenarioConfig::validate() const {
  auto check = [](bool ok, const std::string& key, const std::string& value,
                  const std::string& why) {
    if (!ok) bad(key, value, why);
  };
  check(area_width > 0, "area.width", fmt(area_width), "must be > 0");
  check(area_height > 0, "area.height", fmt(area_height), "must be > 0");
  check(node_count > 0, "nodes.count", std::to_string(node_count), "must be > 0");
  check(tx_range_m > 0, "radio.tx_range_m", fmt(tx_range_m), "must be > 0");
  check(channel_bps > 0, "radio.channel_bps", fmt(channel_bps), "must be > 0");
  check(loss_prob >= 0 && loss_prob <= 1, "radio.loss_prob", fmt(loss_prob),
        "must be in [0,1]");
  check(mobility_model == "waypoint" || mobility_model == "static",
        "mobility.model", mobility_model, "must be waypoint or static");
  check(speed_min_mps >= 0, "mobility.speed_min_mps", fmt(speed_min_mps),
        "must be >= 0");
  check(speed_max_mps >= speed_min_mps, "mobility.speed_max_mps",
        fmt(speed_max_mps), "must be >= speed_min_mps");
  check(pause_s >= 0, "mobility.pause_s", fmt(pause_s), "must be >= 0");
  check(flow_rate_pps > 0, "traffic.rate_pps", fmt(flow_rate_pps), "must be > 0");
  check(packet_bytes > 0, "traffic.packet_bytes", std::to_string(packet_bytes),
        "must be > 0");
  check(send_buffer > 0, "traffic.send_buffer", std::to_string(send_buffer),
        "must be > 0");
  check(warmup_s >= 0, "time.warmup_s", fmt(warmup_s), "must be >= 0");
  check(test_s > 0, "time.test_s", fmt(test_s), "must be > 0");
  check(route_expiry_s > 0, "routing.route_expiry_s", fmt(route_expiry_s),
        "must be > 0");
  check(beacon_period_s > 0, "cluster.beacon_period_s", fmt(beacon_period_s),
        "must be > 0");
  check(cluster_timeout_s > 0, "cluster.timeout_s", fmt(cluster_timeout_s),
        "must be > 0");
  check(trust_initial >= 0 && trust_initial <= trust_cap, "trust.initial",
        fmt(trust_initial), "must be in [0,cap]");
  check(trust_penalty >= 0, "trust.penalty", fmt(trust_penalty), "must be >= 0");
  check(trust_recovery_per_s >= 0, "trust.recovery_per_s",
        fmt(trust_recovery_per_s), "must be >= 0");
  check(trust_cap > 0 && trust_cap <= 1.0, "trust.cap", fmt(trust_cap),
        "must be in (0,1]");
  check(window_s > 0, "detector.window_s", fmt(window_s), "must be > 0");
  check(fr_lower_hard <= fr_lower_soft, "detector.forward_ratio.lower_hard",
        fmt(fr_lower_hard), "must be <= lower_soft");
  check(rreq_upper_soft <= rreq_upper_hard, "detector.rreq_rate.upper_soft",
        fmt(rreq_upper_soft), "must be <= upper_hard");
  check(drx_upper_soft <= drx_upper_hard, "detector.dest_rx_rate.upper_soft",
        fmt(drx_upper_soft), "must be <= upper_hard");
  check(audit_retention_s >= window_s, "detector.audit_retention_s",
        fmt(audit_retention_s), "must be >= window_s");
  for (std::size_t i = 0; i < attacks.size(); ++i) {
    const AttackSpec& a = attacks[i];
    const std::string p = "attack." + std::to_string(i) + ".";
    check(a.node < node_count, p + "node", std::to_string(a.node),
          "node does not exist");
    check(a.start < a.stop, p + "start", fmt(a.start), "must be < stop");
    check(a.rreq_rate > 0, p + "rreq_rate", fmt(a.rreq_rate), "must be > 0");
    check(a.pkt_rate > 0, p + "pkt_rate", fmt(a.pkt_rate), "must be > 0");
    check(a.drop_prob >= 0 && a.drop_prob <= 1, p + "drop_prob",
          fmt(a.drop_prob), "must be in [0,1]");
    if (a.kind == AttackKind::SleepDeprivation) {
      check(a.victim < node_count && a.victim != a.node, p + "victim",
            std::to_string(a.victim), "must name another existing node");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (attacks[j].node == a.node && attacks[j].stop > a.start &&
          a.stop > attacks[j].start) {
        bad(p + "start", fmt(a.start), "overlaps another attack on this node");
      }
    }
  }
  for (const auto& [id, pos] : fixed_positions) {
    check(id < node_count, "nodes." + std::to_string(id) + ".x",
          std::to_string(id), "node does not exist");
    check(pos.x >= 0 && pos.x <= area_width && pos.y >= 0 &&
              pos.y <= area_height,
          "nodes." + std::to_string(id) + ".x", fmt(pos.x),
          "position outside area");
  }
  for (std::size_t i = 0; i < fixed_flows.size(); ++i) {
    const auto& [src, dst] = fixed_flows[i];
    const std::string p = "flow." + std::to_string(i) + ".";
    check(src != kBroadcast && dst != kBroadcast, p + "src", "-",
          "flow needs both src and dst");
    check(src < node_count && dst < node_count && src != dst, p + "src",
          std::to_string(src), "invalid flow endpoints");
  }
}

std::vector<std::pair<std::string, std::string>> ScenarioConfig::to_key_values()
    const {
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&out](const std::string& k, const std::string& v) {
    out.emplace_back(k, v);
  };
  add("area.width", fmt(area_width));
  add("area.height", fmt(area_height));
  add("nodes.count", std::to_string(node_count));
  add("radio.tx_range_m", fmt(tx_range_m));
  add("radio.channel_bps", fmt(channel_bps));
  add("radio.loss_prob", fmt(loss_prob));
  add("radio.tx_queue_cap", std::to_string(tx_queue_cap));
  add("mobility.model", mobility_model);
  add("mobility.speed_min_mps", fmt(speed_min_mps));
  add("mobility.speed_max_mps", fmt(speed_max_mps));
  add("mobility.pause_s", fmt(pause_s));
  add("traffic.flow_count", std::to_string(flow_count));
  add("traffic.rate_pps", fmt(flow_rate_pps));
  add("traffic.packet_bytes", std::to_string(packet_bytes));
  add("traffic.send_buffer", std::to_string(send_buffer));
  add("time.warmup_s", fmt(warmup_s));
  add("time.test_s", fmt(test_s));
  add("routing.route_expiry_s", fmt(route_expiry_s));
  add("routing.rreq_ttl", std::to_string(rreq_ttl));
  add("routing.rreq_retry_s", fmt(rreq_retry_s));
  add("cluster.beacon_period_s", fmt(beacon_period_s));
  add("cluster.timeout_s", fmt(cluster_timeout_s));
  add("cluster.tag_bytes", std::to_string(tag_bytes));
  add("trust.initial", fmt(trust_initial));
  add("trust.penalty", fmt(trust_penalty));
  add("trust.recovery_per_s", fmt(trust_recovery_per_s));
  add("trust.eligibility", fmt(trust_eligibility));
  add("trust.cap", fmt(trust_cap));
  add("election.base_period_s", fmt(election_base_period_s));
  add("election.collect_s", fmt(election_collect_s));
  add("agents.hop_timeout_s", fmt(agent_hop_timeout_s));
  add("agents.max_retries", std::to_string(agent_max_retries));
  add("agents.itinerary_cap", std::to_string(itinerary_cap));
  add("detector.window_s", fmt(window_s));
  add("detector.watchdog_deadline_s", fmt(watchdog_deadline_s));
  add("detector.min_samples", std::to_string(min_samples));
  add("detector.forward_ratio.lower_hard", fmt(fr_lower_hard));
  add("detector.forward_ratio.lower_soft", fmt(fr_lower_soft));
  add("detector.rreq_rate.upper_soft", fmt(rreq_upper_soft));
  add("detector.rreq_rate.upper_hard", fmt(rreq_upper_hard));
  add("detector.dest_rx_rate.upper_soft", fmt(drx_upper_soft));
  add("detector.dest_rx_rate.upper_hard", fmt(drx_upper_hard));
  add("detector.audit_retention_s", fmt(audit_retention_s));
  add("metrics.grace_s", fmt(grace_s));
  add("seed", std::to_string(seed));
  add("attack.count", std::to_string(attacks.size()));
  for (std::size_t i = 0; i < attacks.size(); ++i) {
    const AttackSpec& a = attacks[i];
    const std::string p = "attack." + std::to_string(i) + ".";
    add(p + "kind", attack_kind_name(a.kind));
    add(p + "node", std::to_string(a.node));
    add(p + "start", fmt(a.start));
    add(p + "stop", fmt(a.stop));
    if (a.kind == AttackKind::Flooding) add(p + "rreq_rate", fmt(a.rreq_rate));
    if (a.kind == AttackKind::SleepDeprivation) {
      add(p + "victim", std::to_string(a.victim));
      add(p + "pkt_rate", fmt(a.pkt_rate));
    }
    if (a.kind == AttackKind::PacketDrop) add(p + "drop_prob", fmt(a.drop_prob));
  }
  for (const auto& [id, pos] : fixed_positions) {
    add("nodes." + std::to_string(id) + ".x", fmt(pos.x));
    add("nodes." + std::to_string(id) + ".y", fmt(pos.y));
  }
  for (std::size_t i = 0; i < fixed_flows.size(); ++i) {
    add("flow." + std::to_string(i) + ".src", std::to_string(fixed_flows[i].first));
    add("flow." + std::to_string(i) + ".dst", std::to_string(fixed_flows[i].second));
  }
  return out;
}

}  // namespace cwids
