#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "idca/cell.hpp"
#include "idca/csv.hpp"
#include "idca/errors.hpp"

namespace idca {

enum class EventKind { cycle, tissue, sample, migrate_semi, migrate_mature, replace, retain, escalate };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::cycle: return "cycle";
    case EventKind::tissue: return "tissue";
    case EventKind::sample: return "sample";
    case EventKind::migrate_semi: return "migrate-semi";
    case EventKind::migrate_mature: return "migrate-mature";
    case EventKind::replace: return "replace";
    case EventKind::retain: return "retain";
    case EventKind::escalate: return "escalate";
  }
  return "cycle";
}

/// One run-log record. Which fields are meaningful depends on `kind`:
///   cycle     mt, immature (|U| at cycle start), migrated (|E| so far), escalations
///   tissue    tissue, size, clone_size
///   sample    tissue, cell, antigen, csm/semi/mat after the presentation
///   migrate-* tissue, cell, csm/semi/mat, context, mt
///   replace   tissue, cell (new), replaces, retired
///   retain    tissue, cell, csm/semi/mat, mt
///   escalate  mt (next cycle's scale factor)
struct LogEvent {
  EventKind kind = EventKind::cycle;
  std::size_t cycle = 0;
  std::string tissue;
  std::size_t cell = 0;
  std::size_t antigen = 0;
  std::size_t replaces = 0;
  bool retired = false;
  std::size_t size = 0;
  std::size_t clone_size = 0;
  std::size_t immature = 0;
  std::size_t migrated = 0;
  std::size_t escalations = 0;
  double csm = 0.0;
  double semi = 0.0;
  double mat = 0.0;
  double context = 0.0;
  double mt = 0.0;
};

enum class LogLevel { full, migrations };

inline std::string_view to_string(LogLevel l) { return l == LogLevel::full ? "full" : "migrations"; }

inline LogLevel parse_log_level(std::string_view s) {
  if (s == "full") return LogLevel::full;
  if (s == "migrations") return LogLevel::migrations;
  throw ConfigError("dca", "unknown log level '" + std::string(s) + "'");
}

inline std::string json_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

struct RunLog {
  std::string algorithm;
  LogLevel level = LogLevel::full;
  std::vector<LogEvent> events;

  void add(LogEvent e) {
    if (e.kind == EventKind::sample && level != LogLevel::full) return;
    events.push_back(std::move(e));
  }

  void write_jsonl(std::ostream& out) const {
    auto num = [](double v) { return csv::format(v); };
    for (const auto& e : events) {
      out << "{\"algo\":\"" << algorithm << "\",\"cycle\":" << e.cycle << ",\"event\":\"" << to_string(e.kind)
          << '"';
      switch (e.kind) {
        case EventKind::cycle:
          out << ",\"mt\":" << num(e.mt) << ",\"immature\":" << e.immature << ",\"migrated\":" << e.migrated
              << ",\"escalations\":" << e.escalations;
          break;
        case EventKind::tissue:
          out << ",\"tissue\":" << json_string(e.tissue) << ",\"size\":" << e.size << ",\"clone_size\":" << e.clone_size;
          break;
        case EventKind::sample:
          out << ",\"tissue\":" << json_string(e.tissue) << ",\"cell\":" << e.cell << ",\"antigen\":" << e.antigen
              << ",\"csm\":" << num(e.csm) << ",\"semi\":" << num(e.semi) << ",\"mat\":" << num(e.mat);
          break;
        case EventKind::migrate_semi:
        case EventKind::migrate_mature:
          out << ",\"tissue\":" << json_string(e.tissue) << ",\"cell\":" << e.cell << ",\"csm\":" << num(e.csm)
              << ",\"semi\":" << num(e.semi) << ",\"mat\":" << num(e.mat) << ",\"context\":" << num(e.context)
              << ",\"mt\":" << num(e.mt);
          break;
        case EventKind::replace:
          out << ",\"tissue\":" << json_string(e.tissue) << ",\"cell\":" << e.cell << ",\"replaces\":" << e.replaces
              << ",\"retired\":" << (e.retired ? "true" : "false");
          break;
        case EventKind::retain:
          out << ",\"tissue\":" << json_string(e.tissue) << ",\"cell\":" << e.cell << ",\"csm\":" << num(e.csm)
              << ",\"semi\":" << num(e.semi) << ",\"mat\":" << num(e.mat) << ",\"mt\":" << num(e.mt);
          break;
        case EventKind::escalate:
          out << ",\"mt\":" << num(e.mt) << ",\"escalations\":" << e.escalations;
          break;
      }
      out << "}\n";
    }
  }
};

}  // namespace idca
