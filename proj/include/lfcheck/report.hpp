#pragma once

// Stable, versioned rendering of check results. JSON documents use ordered
// keys and carry no timestamps or machine-specific data unless timing fields
// are explicitly requested, so two runs of the same command over the same
// inputs emit byte-identical reports. Witnesses render as numbered states
// with one labelled edge per line and the cycle introduced by a "<loop>"
// marker line.

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lfcheck/action.hpp"
#include "lfcheck/interp.hpp"
#include "lfcheck/lts.hpp"

namespace lfcheck {

using Json = nlohmann::ordered_json;

/// Schema tag carried by every JSON report.
inline constexpr const char* kReportFormat = "lfcheck-report/1";

/// Common document head: schema tag plus the subcommand that produced it.
inline Json report_head(const std::string& command) {
  Json j;
  j["format"] = kReportFormat;
  j["command"] = command;
  return j;
}

/// Bounds as configured (pool 0 means auto-sized by the machine).
inline Json bounds_json(const Bounds& b) {
  Json j;
  j["threads"] = b.threads;
  j["ops"] = b.ops;
  j["values"] = b.values;
  j["pool"] = b.pool;
  j["state_cap"] = b.state_cap;
  if (!b.thread_methods.empty()) {
    Json c = Json::object();
    for (const auto& [t, methods] : b.thread_methods) c[std::to_string(t)] = methods;
    j["client"] = c;
  }
  return j;
}

/// Name plus size of one explored system.
inline Json lts_json(const std::string& name, const Lts& l) {
  Json j;
  j["name"] = name;
  j["states"] = l.num_states();
  j["transitions"] = l.num_transitions();
  return j;
}

inline Json trace_json(const std::vector<ActionLabel>& trace) {
  Json a = Json::array();
  for (const ActionLabel& x : trace) a.push_back(x.str());
  return a;
}

inline Json witness_json(const Witness& w) {
  auto steps = [](const std::vector<std::pair<StateId, ActionLabel>>& v) {
    Json a = Json::array();
    for (const auto& [state, action] : v)
      a.push_back(Json{{"state", state}, {"action", action.str()}});
    return a;
  };
  Json j;
  j["prefix"] = steps(w.prefix);
  if (w.is_lasso())
    j["cycle"] = steps(w.cycle);
  else
    j["end_state"] = w.end_state;
  return j;
}

/// One space-separated line; histories and refinement counterexamples read
/// exactly like the event sequences they are.
inline std::string render_trace(const std::vector<ActionLabel>& trace) {
  std::string out;
  for (const ActionLabel& a : trace) {
    if (!out.empty()) out += ' ';
    out += a.str();
  }
  return out;
}

/// Numbered-state path: every line is the state an edge leaves followed by
/// the edge's label; the cycle of a lasso is introduced by "<loop>" and
/// closes back on its first line's state. Plain paths end with the state
/// the last edge enters.
inline std::string render_witness(const Witness& w) {
  std::string out;
  auto line = [&out](StateId s, const std::string& text) {
    char head[16];
    std::snprintf(head, sizeof head, "%6u  ", s);
    out += head;
    out += text;
    out += '\n';
  };
  for (const auto& [state, action] : w.prefix) line(state, action.str());
  if (w.is_lasso()) {
    out += "<loop>\n";
    for (const auto& [state, action] : w.cycle) line(state, action.str());
  } else {
    line(w.end_state, "(end)");
  }
  return out;
}

}  // namespace lfcheck
