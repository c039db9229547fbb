#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cwids/types.h"

namespace cwids {

// One trace line per record, fixed field order, fixed numeric formatting.
// The trace is the complete ground truth of a run: metrics are recomputed
// from it and a byte hash of it is the determinism witness.
class TraceLog {
 public:
  using Field = std::pair<const char*, std::string>;

  void emit(SimTime t, NodeId node, const char* category, const char* kind,
            std::initializer_list<Field> fields);
  // Record not attributable to a single node.
  void emit_global(SimTime t, const char* category, const char* kind,
                   std::initializer_list<Field> fields);

  const std::vector<std::string>& lines() const { return lines_; }
  std::uint64_t hash() const;
  void write_file(const std::string& path) const;

  // Formatting helpers shared by emitters so equal values always render
  // identically.
  static std::string fmt_time(SimTime t);
  static std::string fmt_num(double v);
  static std::string fmt_id(NodeId n);

 private:
  std::vector<std::string> lines_;
};

// Parsed view of one trace line, used by metrics and by tests that check
// ground truth against detector output.
struct TraceRecord {
  SimTime t = 0.0;
  NodeId node = kBroadcast;  // kBroadcast for global records
  std::string category;
  std::string kind;
  std::map<std::string, std::string> fields;

  double num(const std::string& key) const;
  NodeId id(const std::string& key) const;
  bool has(const std::string& key) const { return fields.count(key) != 0; }
};

std::vector<TraceRecord> parse_trace(const std::vector<std::string>& lines);
std::vector<std::string> read_trace_lines(const std::string& path);
std::uint64_t hash_lines(const std::vector<std::string>& lines);

}  // namespace cwids
