#pragma once

// Weak-trace refinement by on-the-fly subset construction. The left system
// is walked state by state while the right system is tracked as a tau-closed
// macro state (the set of all states it could be in after the same visible
// trace). Refinement fails exactly when some visible move on the left finds
// an empty macro on the right, and the breadth-first order makes the
// reported counterexample a shortest one.

#include <chrono>
#include <cstdint>
#include <map>
#include <vector>

#include "lfcheck/lts.hpp"

namespace lfcheck {

/// Tau-closed set of states one system can occupy after a visible trace.
using MacroState = std::vector<StateId>;

struct RefinementResult {
  bool holds = true;
  /// When violated: a shortest visible trace of the left system that the
  /// right system cannot perform (the final action is the unmatched one).
  std::vector<ActionLabel> counterexample;
};

inline RefinementResult traces_refine(const Lts& lhs, const Lts& rhs) {
  std::vector<MacroState> macros;
  std::map<MacroState, uint32_t> macro_ids;
  auto intern = [&](MacroState m) {
    auto [it, fresh] = macro_ids.emplace(std::move(m), static_cast<uint32_t>(macros.size()));
    if (fresh) macros.push_back(it->first);
    return it->second;
  };

  // Memoized macro successor per (macro, rhs label). UINT32_MAX = empty.
  std::map<std::pair<uint32_t, LabelId>, uint32_t> step_memo;
  auto macro_step = [&](uint32_t m, LabelId lab) {
    auto [it, fresh] = step_memo.emplace(std::pair{m, lab}, 0u);
    if (fresh) {
      MacroState next;
      for (StateId s : macros[m])
        for (const Transition& t : rhs.out(s))
          if (t.label == lab) next.push_back(t.dst);
      it->second = next.empty() ? UINT32_MAX : intern(detail::tau_closure(rhs, next));
    }
    return it->second;
  };

  struct Node {
    StateId s;       // lhs state
    uint32_t m;      // rhs macro id
    int64_t parent;  // index into nodes
    LabelId label;   // lhs label on the edge from the parent
  };
  std::vector<Node> nodes;
  std::map<std::pair<StateId, uint32_t>, uint8_t> visited;

  nodes.push_back({lhs.initial(), intern(detail::tau_closure(rhs, {rhs.initial()})), 0, kTauLabel});
  visited.emplace(std::pair{nodes[0].s, nodes[0].m}, 1);

  auto trace_of = [&](int64_t i, LabelId last) {
    std::vector<ActionLabel> trace{lhs.label(last)};
    for (; nodes[i].parent != i; i = nodes[i].parent)
      if (!lhs.is_tau(nodes[i].label)) trace.push_back(lhs.label(nodes[i].label));
    std::reverse(trace.begin(), trace.end());
    return trace;
  };

  for (std::size_t qi = 0; qi < nodes.size(); ++qi) {
    Node cur = nodes[qi];
    for (const Transition& t : lhs.out(cur.s)) {
      uint32_t nm = cur.m;
      if (!lhs.is_tau(t.label)) {
        auto rl = rhs.find_label(lhs.label(t.label));
        nm = rl ? macro_step(cur.m, *rl) : UINT32_MAX;
        if (nm == UINT32_MAX)
          return {false, trace_of(static_cast<int64_t>(qi), t.label)};
      }
      if (visited.emplace(std::pair{t.dst, nm}, 1).second)
        nodes.push_back({t.dst, nm, static_cast<int64_t>(qi), t.label});
    }
  }
  return {};
}

/// Linearizability via trace refinement against an atomic specification:
/// the implementation is linearizable in the bounded system if and only if
/// every visible trace it produces is also a trace of the specification.
/// Wall time is recorded for cost comparisons against other methods.
struct RefinementCheck {
  RefinementResult result;
  double seconds = 0.0;
};

inline RefinementCheck linearizable_by_refinement(const Lts& impl, const Lts& spec) {
  auto t0 = std::chrono::steady_clock::now();
  RefinementCheck out;
  out.result = traces_refine(impl, spec);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace lfcheck
