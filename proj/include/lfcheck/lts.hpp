#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lfcheck/action.hpp"

namespace lfcheck {

using StateId = std::uint32_t;
using LabelId = std::uint32_t;

constexpr LabelId kTauLabel = 0;  // label table slot 0 is always tau

struct Transition {
  StateId src;
  LabelId label;
  StateId dst;

  friend bool operator==(const Transition& a, const Transition& b) {
    return a.src == b.src && a.label == b.label && a.dst == b.dst;
  }
};

class LtsError : public std::runtime_error {
 public:
  explicit LtsError(const std::string& what) : std::runtime_error(what) {}
};

/// Finite labelled transition system over ActionLabels.
///
/// States are dense ids [0, num_states). Labels are interned in a table whose
/// slot 0 is always tau; transitions reference labels by id. The transition
/// order given at construction is preserved (it is the canonical order used
/// by exporters and witness search tie-breaking), and a CSR index over
/// sources is built once for traversal.
class Lts {
 public:
  Lts() : Lts(1, 0, {}, {ActionLabel::tau()}) {}

  Lts(StateId num_states, StateId initial, std::vector<Transition> transitions,
      std::vector<ActionLabel> labels)
      : num_states_(num_states),
        initial_(initial),
        labels_(std::move(labels)),
        transitions_(std::move(transitions)) {
    if (num_states_ == 0) throw LtsError("lts must have at least one state");
    if (initial_ >= num_states_) throw LtsError("initial state out of range");
    if (labels_.empty() || !labels_[0].is_tau()) throw LtsError("label table slot 0 must be tau");
    for (const auto& t : transitions_) {
      if (t.src >= num_states_ || t.dst >= num_states_)
        throw LtsError("transition endpoint out of range: (" + std::to_string(t.src) + ", " +
                       std::to_string(t.dst) + ") with " + std::to_string(num_states_) + " states");
      if (t.label >= labels_.size()) throw LtsError("transition label out of range");
    }
    build_index();
  }

  StateId num_states() const { return num_states_; }
  StateId initial() const { return initial_; }
  std::size_t num_transitions() const { return transitions_.size(); }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<ActionLabel>& labels() const { return labels_; }
  const ActionLabel& label(LabelId id) const { return labels_[id]; }
  bool is_tau(LabelId id) const { return id == kTauLabel; }

  /// Out-transitions of `s`, in canonical construction order.
  std::span<const Transition> out(StateId s) const {
    return {sorted_.data() + offsets_[s], sorted_.data() + offsets_[s + 1]};
  }

  /// Looks up a label id by value; nullopt if the alphabet lacks it.
  std::optional<LabelId> find_label(const ActionLabel& a) const {
    for (LabelId i = 0; i < labels_.size(); ++i)
      if (labels_[i] == a) return i;
    return std::nullopt;
  }

  /// Value equality: same shape with transitions compared by label value, so
  /// two systems with differently-arranged label tables can still be equal.
  friend bool operator==(const Lts& a, const Lts& b) {
    if (a.num_states_ != b.num_states_ || a.initial_ != b.initial_ ||
        a.transitions_.size() != b.transitions_.size())
      return false;
    for (std::size_t i = 0; i < a.transitions_.size(); ++i) {
      const auto& x = a.transitions_[i];
      const auto& y = b.transitions_[i];
      if (x.src != y.src || x.dst != y.dst || a.labels_[x.label] != b.labels_[y.label]) return false;
    }
    return true;
  }

 private:
  void build_index() {
    offsets_.assign(num_states_ + 1, 0);
    for (const auto& t : transitions_) offsets_[t.src + 1]++;
    for (StateId s = 0; s < num_states_; ++s) offsets_[s + 1] += offsets_[s];
    sorted_.resize(transitions_.size());
    std::vector<std::uint32_t> next(offsets_.begin(), offsets_.end() - 1);
    for (const auto& t : transitions_) sorted_[next[t.src]++] = t;
  }

  StateId num_states_;
  StateId initial_;
  std::vector<ActionLabel> labels_;
  std::vector<Transition> transitions_;
  std::vector<std::uint32_t> offsets_;  // CSR index over sorted_
  std::vector<Transition> sorted_;
};

/// Builder that interns labels (tau is preseeded at slot 0).
class LtsBuilder {
 public:
  LtsBuilder() { intern(ActionLabel::tau()); }

  LabelId intern(const ActionLabel& a) {
    auto it = ids_.find(a);
    if (it != ids_.end()) return it->second;
    LabelId id = static_cast<LabelId>(labels_.size());
    labels_.push_back(a);
    ids_.emplace(a, id);
    return id;
  }

  void add(StateId src, const ActionLabel& a, StateId dst) {
    transitions_.push_back({src, intern(a), dst});
  }

  void add(StateId src, LabelId label, StateId dst) { transitions_.push_back({src, label, dst}); }

  std::size_t num_transitions() const { return transitions_.size(); }

  Lts build(StateId num_states, StateId initial) && {
    return Lts(num_states, initial, std::move(transitions_), std::move(labels_));
  }

 private:
  std::vector<ActionLabel> labels_;
  std::unordered_map<ActionLabel, LabelId> ids_;
  std::vector<Transition> transitions_;
};

/// Builds an LTS from explicit (src, label, dst) triples, validating endpoints.
inline Lts make_lts(StateId num_states, StateId initial,
                    const std::vector<std::tuple<StateId, ActionLabel, StateId>>& transitions) {
  LtsBuilder b;
  for (const auto& [src, a, dst] : transitions) b.add(src, a, dst);
  return std::move(b).build(num_states, initial);
}

/// Disjoint union: l2's states are renumbered to follow l1's; the union's
/// initial state is l1's. l2's initial lands at l1.num_states() + l2.initial().
inline Lts disjoint_union(const Lts& l1, const Lts& l2) {
  LtsBuilder b;
  for (const auto& t : l1.transitions()) b.add(t.src, l1.label(t.label), t.dst);
  const StateId off = l1.num_states();
  for (const auto& t : l2.transitions()) b.add(t.src + off, l2.label(t.label), t.dst + off);
  return std::move(b).build(l1.num_states() + l2.num_states(), l1.initial());
}

/// BFS order over reachable states; result[i] is the old id of new state i.
inline std::vector<StateId> bfs_order(const Lts& l, StateId root) {
  std::vector<StateId> order;
  std::vector<char> seen(l.num_states(), 0);
  std::queue<StateId> q;
  q.push(root);
  seen[root] = 1;
  while (!q.empty()) {
    StateId s = q.front();
    q.pop();
    order.push_back(s);
    for (const auto& t : l.out(s)) {
      if (!seen[t.dst]) {
        seen[t.dst] = 1;
        q.push(t.dst);
      }
    }
  }
  return order;
}

/// Sub-LTS of states reachable from the initial state, renumbered in BFS
/// discovery order (initial becomes 0); per-source transition order is kept.
inline Lts reachable(const Lts& l) {
  std::vector<StateId> order = bfs_order(l, l.initial());
  std::vector<StateId> remap(l.num_states(), UINT32_MAX);
  for (StateId i = 0; i < order.size(); ++i) remap[order[i]] = i;
  LtsBuilder b;
  for (StateId i = 0; i < order.size(); ++i)
    for (const auto& t : l.out(order[i])) b.add(i, l.label(t.label), remap[t.dst]);
  return std::move(b).build(static_cast<StateId>(order.size()), 0);
}

/// Same system re-rooted at `s`, pruned to the part reachable from `s`.
inline Lts reroot(const Lts& l, StateId s) {
  if (s >= l.num_states()) throw LtsError("reroot state out of range");
  return reachable(Lts(l.num_states(), s, l.transitions(), l.labels()));
}

/// Follows one visible action from `s` (deterministically): the unique
/// transition labeled `a`. Errors if absent or ambiguous.
inline StateId follow_visible(const Lts& l, StateId s, const ActionLabel& a) {
  std::optional<StateId> found;
  for (const auto& t : l.out(s)) {
    if (l.label(t.label) == a) {
      if (found) throw LtsError("ambiguous action " + a.str() + " from state " + std::to_string(s));
      found = t.dst;
    }
  }
  if (!found) throw LtsError("no transition " + a.str() + " from state " + std::to_string(s));
  return *found;
}

namespace detail {

// Sorted duplicate-free set of states reachable from `seed` (which may
// contain repeats) by tau steps alone.
inline std::vector<StateId> tau_closure(const Lts& l, const std::vector<StateId>& seed) {
  std::vector<uint8_t> seen(l.num_states(), 0);
  std::vector<StateId> out;
  out.reserve(seed.size());
  for (StateId s : seed)
    if (!seen[s]) {
      seen[s] = 1;
      out.push_back(s);
    }
  for (std::size_t qi = 0; qi < out.size(); ++qi)
    for (const Transition& t : l.out(out[qi]))
      if (l.is_tau(t.label) && !seen[t.dst]) {
        seen[t.dst] = 1;
        out.push_back(t.dst);
      }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Path evidence for a refuted check. `prefix` is a path starting at an
/// initial state of the relevant component; if `cycle` is non-empty the
/// witness is a lasso and the cycle's transitions loop back to cycle[0].
/// Every (state, label) pair corresponds to a real transition whose target
/// is the next listed state (resp. end_state / cycle[0] at the seams).
struct Witness {
  std::vector<std::pair<StateId, ActionLabel>> prefix;
  std::vector<std::pair<StateId, ActionLabel>> cycle;
  StateId end_state = 0;  // target of the last prefix step when cycle is empty

  bool is_lasso() const { return !cycle.empty(); }
};

/// Checks that a witness denotes real consecutive transitions of `l`.
inline bool replay_witness(const Lts& l, const Witness& w) {
  auto has_edge = [&](StateId src, const ActionLabel& a, StateId dst) {
    for (const auto& t : l.out(src))
      if (t.dst == dst && l.label(t.label) == a) return true;
    return false;
  };
  for (std::size_t i = 0; i < w.prefix.size(); ++i) {
    StateId next = i + 1 < w.prefix.size() ? w.prefix[i + 1].first
                   : w.cycle.empty()       ? w.end_state
                                           : w.cycle.front().first;
    if (!has_edge(w.prefix[i].first, w.prefix[i].second, next)) return false;
  }
  for (std::size_t i = 0; i < w.cycle.size(); ++i) {
    StateId next = i + 1 < w.cycle.size() ? w.cycle[i + 1].first : w.cycle.front().first;
    if (!has_edge(w.cycle[i].first, w.cycle[i].second, next)) return false;
  }
  return true;
}

}  // namespace lfcheck
