#include "cwids/trace.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cwids {

std::string TraceLog::fmt_time(SimTime t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", t);
  return buf;
}

std::string TraceLog::fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string TraceLog::fmt_id(NodeId n) {
  return n == kBroadcast ? std::string("-") : std::to_string(n);
}

void TraceLog::emit(SimTime t, NodeId node, const char* category,
                    const char* kind, std::initializer_list<Field> fields) {
  std::string line;
  line.reserve(96);
  line += "t=";
  line += fmt_time(t);
  line += " node=";
  line += fmt_id(node);
  line += " cat=";
  line += category;
  line += " kind=";
  line += kind;
  for (const auto& [k, v] : fields) {
    line += ' ';
    line += k;
    line += '=';
    line += v;
  }
  lines_.push_back(std::move(line));
}

void TraceLog::emit_global(SimTime t, const char* category, const char* kind,
                           std::initializer_list<Field> fields) {
  emit(t, kBroadcast, category, kind, fields);
}

std::uint64_t hash_lines(const std::vector<std::string>& lines) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& line : lines) {
    for (unsigned char c : line) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= static_cast<unsigned char>('\n');
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t TraceLog::hash() const { return hash_lines(lines_); }

void TraceLog::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  for (const auto& line : lines_) out << line << '\n';
}

double TraceRecord::num(const std::string& key) const {
  auto it = fields.find(key);
  if (it == fields.end())
    throw std::runtime_error("trace field missing: " + key + " in " + kind);
  return std::stod(it->second);
}

NodeId TraceRecord::id(const std::string& key) const {
  auto it = fields.find(key);
  if (it == fields.end())
    throw std::runtime_error("trace field missing: " + key + " in " + kind);
  return static_cast<NodeId>(std::stoul(it->second));
}

std::vector<TraceRecord> parse_trace(const std::vector<std::string>& lines) {
  std::vector<TraceRecord> out;
  out.reserve(lines.size());
  for (const auto& line : lines) {
    TraceRecord rec;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "t") {
        rec.t = std::stod(val);
      } else if (key == "node") {
        rec.node = val == "-" ? kBroadcast : static_cast<NodeId>(std::stoul(val));
      } else if (key == "cat") {
        rec.category = val;
      } else if (key == "kind") {
        rec.kind = val;
      } else {
        rec.fields.emplace(key, val);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::string> read_trace_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace cwids
