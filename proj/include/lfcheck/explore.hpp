#pragma once

// Breadth-first construction of the labelled transition system of a
// compiled model under its bounded client. States are interned
// configurations in discovery order, so the result is deterministic.

#include <algorithm>
#include <chrono>
#include <memory>
#include <unordered_map>
#include <vector>

#include "lfcheck/interp.hpp"
#include "lfcheck/lts.hpp"

namespace lfcheck {

/// State-space construction hit the configured state cap.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(uint64_t states, uint64_t transitions)
      : std::runtime_error("state cap exceeded after " + std::to_string(states) +
                           " states and " + std::to_string(transitions) + " transitions"),
        states_(states),
        transitions_(transitions) {}
  uint64_t states() const { return states_; }
  uint64_t transitions() const { return transitions_; }

 private:
  uint64_t states_, transitions_;
};

/// A runtime rule violation, with the action sequence that reaches it.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& msg, ast::SourceLoc loc, int thread,
             std::vector<ActionLabel> trace)
      : std::runtime_error(msg + " (thread " + std::to_string(thread) + ", line " +
                           std::to_string(loc.line) + ")"),
        loc_(loc),
        thread_(thread),
        trace_(std::move(trace)) {}
  ast::SourceLoc loc() const { return loc_; }
  int thread() const { return thread_; }
  const std::vector<ActionLabel>& trace() const { return trace_; }

 private:
  ast::SourceLoc loc_;
  int thread_;
  std::vector<ActionLabel> trace_;
};

struct Exploration {
  Lts lts;
  std::vector<Config> configs;             // indexed by state id
  std::shared_ptr<const Machine> machine;  // for config introspection
  double seconds = 0;
};

inline Exploration explore(Program p, Bounds b) {
  auto t0 = std::chrono::steady_clock::now();
  auto machine = std::make_shared<const Machine>(std::move(p), b);

  std::vector<Config> configs;
  std::unordered_map<Config, StateId, ConfigHash> index;
  std::vector<std::pair<StateId, ActionLabel>> parent;  // discovery edges
  LtsBuilder edges;

  auto intern = [&](Config&& c, StateId from, const ActionLabel& via) -> StateId {
    auto it = index.find(c);
    if (it != index.end()) return it->second;
    StateId id = static_cast<StateId>(configs.size());
    if (configs.size() >= b.state_cap)
      throw CapacityError(configs.size(), edges.num_transitions());
    index.emplace(c, id);
    configs.push_back(std::move(c));
    parent.emplace_back(from, via);
    return id;
  };

  auto trace_to = [&](StateId s) {
    std::vector<ActionLabel> out;
    while (s != 0) {
      out.push_back(parent[s].second);
      s = parent[s].first;
    }
    std::reverse(out.begin(), out.end());
    return out;
  };

  intern(machine->initial(), 0, ActionLabel::tau());
  for (StateId cur = 0; cur < configs.size(); ++cur) {
    std::vector<Machine::Move> moves;
    try {
      moves = machine->moves(configs[cur]);
    } catch (const StepError& e) {
      throw ModelError(e.what(), e.loc(), e.thread(), trace_to(cur));
    }
    for (Machine::Move& m : moves) {
      StateId dst = intern(std::move(m.dst), cur, m.label);
      edges.add(cur, m.label, dst);
    }
  }

  Exploration out;
  out.lts = std::move(edges).build(static_cast<StateId>(configs.size()), 0);
  out.configs = std::move(configs);
  out.machine = std::move(machine);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace lfcheck
