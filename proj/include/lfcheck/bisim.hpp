#pragma once

// Branching bisimulation, optionally divergence sensitive, via signature
// refinement. Starting from one block, each round recomputes per-state
// signatures (visible or block-leaving transitions, propagated through
// block-internal tau steps) plus, when requested, a divergence flag (the
// state can follow tau steps inside its own block into a tau cycle that
// also stays inside the block), and splits blocks by signature. The
// fixpoint is the coarsest such partition, so two states are equivalent
// exactly when they end in the same block.
//
// Systems without any tau cycle take a faster route: a tau postorder
// computed once stays a valid propagation order for every round, no state
// can diverge, and block ids are kept stable across splits so each round
// only regroups blocks containing a state whose signature may actually
// have changed. Systems with tau cycles recompute the in-block tau
// components every round instead, tracking merged signatures and
// divergence flags as the blocks shrink.
//
// Tau-cycle detection for the lock-freedom sanity check of specifications
// and the divergence marking share one SCC pass.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lfcheck/lts.hpp"

namespace lfcheck {

struct Partition {
  std::vector<uint32_t> block;     // state -> block id
  uint32_t num_blocks = 0;
  bool divergence_sensitive = false;
  std::vector<uint8_t> divergent;  // per state, against the final partition

  bool same_class(StateId a, StateId b) const { return block[a] == block[b]; }
};

namespace detail {

// Strongly connected components of the tau subgraph, optionally restricted
// to edges that stay inside a block of `block`. Iterative Tarjan; components
// are emitted successors-first, which is the order the signature propagation
// needs. A component is a "cycle core" if it has an internal tau edge (two
// or more states, or a tau self-loop).
struct TauScc {
  std::vector<uint32_t> comp;        // state -> component id
  std::vector<uint8_t> core;         // component id -> has internal tau edge
  std::vector<std::vector<StateId>> members;  // emission order

  static TauScc run(const Lts& l, const std::vector<uint32_t>* block) {
    const StateId n = l.num_states();
    TauScc out;
    out.comp.assign(n, UINT32_MAX);
    std::vector<uint32_t> index(n, UINT32_MAX), low(n, 0);
    std::vector<uint8_t> onstack(n, 0);
    std::vector<StateId> stack;
    uint32_t next_index = 0;

    auto in_subgraph = [&](StateId src, const Transition& t) {
      return l.is_tau(t.label) && (!block || (*block)[src] == (*block)[t.dst]);
    };

    struct Frame {
      StateId s;
      uint32_t edge;  // index into out(s)
    };
    std::vector<Frame> dfs;

    for (StateId root = 0; root < n; ++root) {
      if (index[root] != UINT32_MAX) continue;
      dfs.push_back({root, 0});
      index[root] = low[root] = next_index++;
      stack.push_back(root);
      onstack[root] = 1;
      while (!dfs.empty()) {
        Frame& f = dfs.back();
        auto edges = l.out(f.s);
        bool descended = false;
        while (f.edge < edges.size()) {
          const Transition& t = edges[f.edge];
          ++f.edge;
          if (!in_subgraph(f.s, t)) continue;
          if (index[t.dst] == UINT32_MAX) {
            index[t.dst] = low[t.dst] = next_index++;
            stack.push_back(t.dst);
            onstack[t.dst] = 1;
            dfs.push_back({t.dst, 0});
            descended = true;
            break;
          }
          if (onstack[t.dst] && index[t.dst] < low[f.s]) low[f.s] = index[t.dst];
        }
        if (descended) continue;
        // f.s finished
        StateId s = f.s;
        dfs.pop_back();
        if (!dfs.empty() && low[s] < low[dfs.back().s]) low[dfs.back().s] = low[s];
        if (low[s] == index[s]) {
          uint32_t id = static_cast<uint32_t>(out.members.size());
          out.members.push_back({});
          StateId w;
          do {
            w = stack.back();
            stack.pop_back();
            onstack[w] = 0;
            out.comp[w] = id;
            out.members[id].push_back(w);
          } while (w != s);
        }
      }
    }

    out.core.assign(out.members.size(), 0);
    for (uint32_t c = 0; c < out.members.size(); ++c) {
      if (out.members[c].size() > 1) {
        out.core[c] = 1;
        continue;
      }
      StateId s = out.members[c][0];
      for (const Transition& t : l.out(s))
        if (t.dst == s && in_subgraph(s, t)) {
          out.core[c] = 1;
          break;
        }
    }
    return out;
  }
};

// Deterministic 64-bit mixer (the splitmix64 finaliser).
inline uint64_t mix64(uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

// Open-addressing map from (group, signature range) to a dense id, the
// splitting step of a refinement round. Signatures are ranges of a
// caller-owned arena that must stay put for the lifetime of the round;
// equality is exact, the hash only places the probe sequence.
struct SigTable {
  struct Slot {
    uint64_t hash = 0;
    uint64_t group = 0;
    std::size_t off = 0;
    uint32_t len = 0;
    uint32_t id = UINT32_MAX;  // UINT32_MAX marks an empty slot
  };

  std::vector<Slot> slots;
  std::size_t mask = 0;
  uint32_t count = 0;

  void reset(std::size_t expect) {
    std::size_t cap = 64;
    while (cap < expect * 2) cap <<= 1;
    slots.assign(cap, Slot{});
    mask = cap - 1;
    count = 0;
  }

  uint32_t intern(uint64_t group, const std::vector<uint64_t>& arena,
                  std::size_t off, uint32_t len) {
    if ((count + 1) * 2 > slots.size()) grow();
    uint64_t h = mix64(group ^ 0x9e3779b97f4a7c15ULL);
    const uint64_t* sig = arena.data() + off;
    for (uint32_t i = 0; i < len; ++i) h = mix64(h ^ sig[i]);
    std::size_t i = h & mask;
    for (;;) {
      Slot& sl = slots[i];
      if (sl.id == UINT32_MAX) {
        sl = Slot{h, group, off, len, count};
        return count++;
      }
      if (sl.hash == h && sl.group == group && sl.len == len &&
          std::equal(sig, sig + len, arena.data() + sl.off))
        return sl.id;
      i = (i + 1) & mask;
    }
  }

  void grow() {
    std::vector<Slot> old = std::move(slots);
    slots.assign(old.size() * 2, Slot{});
    mask = slots.size() - 1;
    for (const Slot& sl : old) {
      if (sl.id == UINT32_MAX) continue;
      std::size_t i = sl.hash & mask;
      while (slots[i].id != UINT32_MAX) i = (i + 1) & mask;
      slots[i] = sl;
    }
  }
};

// Appends a copy of an earlier arena range to the arena tail. Indexed
// access keeps this safe when the append reallocates.
inline void append_range(std::vector<uint64_t>& arena, std::size_t off,
                         uint32_t len) {
  std::size_t base = arena.size();
  arena.resize(base + len);
  std::copy(arena.begin() + off, arena.begin() + off + len,
            arena.begin() + base);
}

// Sorts and dedupes the arena tail starting at `start`, truncates the arena
// to the unique range, and returns that range's length.
inline uint32_t finish_sig(std::vector<uint64_t>& arena, std::size_t start) {
  auto first = arena.begin() + static_cast<std::ptrdiff_t>(start);
  std::sort(first, arena.end());
  arena.erase(std::unique(first, arena.end()), arena.end());
  return static_cast<uint32_t>(arena.size() - start);
}

// Fills `order` with a postorder of the tau subgraph (every tau successor
// of a state is emitted before the state itself) and returns false, or
// returns true as soon as any tau cycle is found, including a tau
// self-loop; in that case the order is meaningless.
inline bool tau_postorder_or_cycle(const Lts& l, std::vector<StateId>& order) {
  const StateId n = l.num_states();
  order.clear();
  order.reserve(n);
  std::vector<uint8_t> color(n, 0);  // 0 new, 1 on the dfs path, 2 done
  struct Frame {
    StateId s;
    uint32_t edge;
  };
  std::vector<Frame> dfs;
  for (StateId root = 0; root < n; ++root) {
    if (color[root] != 0) continue;
    color[root] = 1;
    dfs.push_back({root, 0});
    while (!dfs.empty()) {
      Frame& f = dfs.back();
      auto edges = l.out(f.s);
      bool descended = false;
      while (f.edge < edges.size()) {
        const Transition& t = edges[f.edge];
        ++f.edge;
        if (!l.is_tau(t.label)) continue;
        if (color[t.dst] == 1) return true;
        if (color[t.dst] != 0) continue;
        color[t.dst] = 1;
        dfs.push_back({t.dst, 0});
        descended = true;
        break;
      }
      if (descended) continue;
      color[f.s] = 2;
      order.push_back(f.s);
      dfs.pop_back();
    }
  }
  return false;
}

// Refinement of a system without tau cycles. Every in-block tau component
// is a singleton forever and nothing diverges, so `order` (a tau postorder)
// stays a valid propagation order for every round. Block ids are stable:
// when a block splits, its largest part keeps the id, so a state's
// signature can only change when a successor moved to a fresh block or the
// state itself did; each round recomputes just the blocks containing such a
// state, closed backwards over block-internal tau edges.
inline void refine_acyclic(const Lts& l, const std::vector<StateId>& order,
                           Partition& p) {
  const StateId n = l.num_states();
  std::vector<std::vector<StateId>> members;
  members.push_back(order);  // block 0 holds everything, in propagation order
  std::vector<uint8_t> dirty(n, 0), moved(n, 1), moved_next(n, 0);
  std::vector<uint8_t> affected;
  std::vector<uint32_t> worklist;  // affected blocks, first-seen order
  std::vector<std::size_t> sig_off(n, 0);
  std::vector<uint32_t> sig_len(n, 0), part(n, 0), part_bucket;
  std::vector<std::vector<StateId>> buckets;
  std::vector<uint64_t> arena;
  SigTable table;

  for (;;) {
    // Which states may have a different signature than last round, and
    // therefore which blocks have to be regrouped.
    affected.assign(p.num_blocks, 0);
    worklist.clear();
    for (StateId s : order) {
      uint8_t d = moved[s];
      if (!d) {
        for (const Transition& t : l.out(s)) {
          if (moved[t.dst] ||
              (l.is_tau(t.label) && p.block[t.dst] == p.block[s] &&
               dirty[t.dst])) {
            d = 1;
            break;
          }
        }
      }
      dirty[s] = d;
      if (d && !affected[p.block[s]]) {
        affected[p.block[s]] = 1;
        worklist.push_back(p.block[s]);
      }
    }
    if (worklist.empty()) break;

    // Fresh signatures for every member of an affected block. Merging pulls
    // from tau successors in the same block, which sit earlier in the member
    // list, so one pass in list order suffices.
    arena.clear();
    table.reset(std::max<std::size_t>(2 * worklist.size(), 256));
    for (uint32_t b : worklist) {
      for (StateId s : members[b]) {
        std::size_t start = arena.size();
        for (const Transition& t : l.out(s)) {
          if (l.is_tau(t.label) && p.block[t.dst] == p.block[s])
            append_range(arena, sig_off[t.dst], sig_len[t.dst]);
          else
            arena.push_back((static_cast<uint64_t>(t.label) << 32) |
                            p.block[t.dst]);
        }
        sig_off[s] = start;
        sig_len[s] = finish_sig(arena, start);
        part[s] = table.intern(b, arena, start, sig_len[s]);
      }
    }

    // Regroup each affected block, largest part first so most signatures
    // elsewhere keep referring to the surviving id. Part ids are unique to
    // their block (the intern group), so the part-to-bucket scratch needs
    // no reset between blocks.
    bool split = false;
    std::fill(moved_next.begin(), moved_next.end(), 0);
    part_bucket.assign(table.count, UINT32_MAX);
    for (uint32_t b : worklist) {
      buckets.clear();
      for (StateId s : members[b]) {
        uint32_t bi = part_bucket[part[s]];
        if (bi == UINT32_MAX) {
          bi = static_cast<uint32_t>(buckets.size());
          part_bucket[part[s]] = bi;
          buckets.push_back({});
        }
        buckets[bi].push_back(s);
      }
      if (buckets.size() <= 1) continue;
      split = true;
      std::size_t keep = 0;
      for (std::size_t i = 1; i < buckets.size(); ++i)
        if (buckets[i].size() > buckets[keep].size()) keep = i;
      for (std::size_t i = 0; i < buckets.size(); ++i) {
        if (i == keep) continue;
        uint32_t fresh = p.num_blocks++;
        for (StateId s : buckets[i]) {
          p.block[s] = fresh;
          moved_next[s] = 1;
        }
        members.push_back(std::move(buckets[i]));
      }
      members[b] = std::move(buckets[keep]);
    }
    if (!split) break;
    moved.swap(moved_next);
  }
}

// Refinement of a system with tau cycles somewhere: every round recomputes
// the in-block tau components to track both the merged signatures and the
// divergence flags as blocks shrink. Members of one component always share
// a block, so splitting happens per component.
inline void refine_cyclic(const Lts& l, bool divergence, Partition& p) {
  const StateId n = l.num_states();
  std::vector<uint8_t> div(n, 0);
  std::vector<uint64_t> arena;
  std::vector<std::size_t> sig_off;
  std::vector<uint32_t> sig_len, comp_block, next(n);
  std::vector<uint8_t> comp_div;
  SigTable table;

  for (;;) {
    TauScc scc = TauScc::run(l, &p.block);
    const std::size_t ncomp = scc.members.size();

    // Per-component signature: visible or block-leaving edges of members,
    // plus everything reachable through block-internal tau edges (already
    // final for successor components thanks to the emission order). The
    // split key is (block, divergence flag, signature).
    arena.clear();
    sig_off.assign(ncomp, 0);
    sig_len.assign(ncomp, 0);
    comp_div.assign(ncomp, 0);
    comp_block.assign(ncomp, 0);
    table.reset(p.num_blocks * 2);
    for (uint32_t c = 0; c < ncomp; ++c) {
      comp_div[c] = divergence && scc.core[c];
      std::size_t start = arena.size();
      for (StateId s : scc.members[c]) {
        for (const Transition& t : l.out(s)) {
          bool internal = l.is_tau(t.label) && p.block[t.dst] == p.block[s];
          if (internal) {
            uint32_t d = scc.comp[t.dst];
            if (d != c) {
              append_range(arena, sig_off[d], sig_len[d]);
              comp_div[c] |= comp_div[d];
            }
          } else {
            arena.push_back((static_cast<uint64_t>(t.label) << 32) |
                            p.block[t.dst]);
          }
        }
      }
      sig_off[c] = start;
      sig_len[c] = finish_sig(arena, start);
      uint64_t group =
          (static_cast<uint64_t>(p.block[scc.members[c][0]]) << 1) |
          comp_div[c];
      comp_block[c] = table.intern(group, arena, start, sig_len[c]);
    }

    for (StateId s = 0; s < n; ++s) {
      uint32_t c = scc.comp[s];
      next[s] = comp_block[c];
      div[s] = comp_div[c];
    }
    if (table.count == p.num_blocks) break;
    std::swap(p.block, next);
    p.num_blocks = table.count;
  }

  if (divergence) p.divergent.assign(div.begin(), div.end());
}

}  // namespace detail

inline Partition coarsest_partition(const Lts& l, bool divergence) {
  const StateId n = l.num_states();
  Partition p;
  p.divergence_sensitive = divergence;
  p.block.assign(n, 0);
  p.num_blocks = 1;
  if (n == 0) return p;

  std::vector<StateId> order;
  if (detail::tau_postorder_or_cycle(l, order)) {
    detail::refine_cyclic(l, divergence, p);
  } else {
    detail::refine_acyclic(l, order, p);
    if (divergence) p.divergent.assign(n, 0);  // no tau cycle, no divergence
  }
  return p;
}

/// Marks exactly the states that can follow tau steps inside their own block
/// of `p` into a tau cycle that also stays inside that block; on a finite
/// system these are the states with an infinite internal run that never
/// leaves its equivalence class.
inline std::vector<uint8_t> mark_divergent(const Lts& l, const Partition& p) {
  detail::TauScc scc = detail::TauScc::run(l, &p.block);
  std::vector<uint8_t> div(l.num_states(), 0);
  for (uint32_t c = 0; c < scc.members.size(); ++c) {
    uint8_t d = scc.core[c];
    for (StateId s : scc.members[c]) {
      if (d) break;
      for (const Transition& t : l.out(s))
        if (l.is_tau(t.label) && p.block[t.dst] == p.block[s] && div[t.dst]) {
          d = 1;
          break;
        }
    }
    for (StateId s : scc.members[c]) div[s] = d;
  }
  return div;
}

namespace detail {

// Visible labels enabled from the tau closure of a single state.
inline std::vector<LabelId> enabled_visible(const Lts& l, StateId s) {
  std::vector<LabelId> ev;
  for (StateId m : tau_closure(l, {s}))
    for (const Transition& t : l.out(m))
      if (!l.is_tau(t.label)) ev.push_back(t.label);
  std::sort(ev.begin(), ev.end());
  ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
  return ev;
}

// Shortest path (tau steps free) from `from` that performs exactly the
// visible labels of `trace` in order and ends in `target` (or anywhere, if
// target is absent). Returns the (state, label) steps of the path.
inline std::vector<std::pair<StateId, ActionLabel>> realize_trace(
    const Lts& l, StateId from, const std::vector<LabelId>& trace,
    std::optional<StateId> target, StateId* end_out) {
  const StateId n = l.num_states();
  const std::size_t len = trace.size();
  auto idx = [&](StateId s, std::size_t pos) { return pos * n + s; };
  std::vector<int64_t> parent(n * (len + 1), -1);
  std::vector<const Transition*> via(n * (len + 1), nullptr);
  std::vector<std::pair<StateId, std::size_t>> queue{{from, 0}};
  parent[idx(from, 0)] = idx(from, 0);
  auto done = [&](StateId s, std::size_t pos) {
    return pos == len && (!target || s == *target);
  };
  std::size_t hit = SIZE_MAX;
  if (done(from, 0)) hit = idx(from, 0);
  for (std::size_t qi = 0; qi < queue.size() && hit == SIZE_MAX; ++qi) {
    auto [s, pos] = queue[qi];
    for (const Transition& t : l.out(s)) {
      std::size_t npos;
      if (l.is_tau(t.label))
        npos = pos;
      else if (pos < len && t.label == trace[pos])
        npos = pos + 1;
      else
        continue;
      std::size_t ni = idx(t.dst, npos);
      if (parent[ni] != -1) continue;
      parent[ni] = static_cast<int64_t>(idx(s, pos));
      via[ni] = &t;
      if (done(t.dst, npos)) {
        hit = ni;
        break;
      }
      queue.push_back({t.dst, npos});
    }
  }
  if (hit == SIZE_MAX) throw LtsError("witness path reconstruction failed");
  std::vector<std::pair<StateId, ActionLabel>> steps;
  if (end_out) *end_out = static_cast<StateId>(hit % n);
  for (std::size_t i = hit; parent[i] != static_cast<int64_t>(i);
       i = static_cast<std::size_t>(parent[i]))
    steps.push_back({static_cast<StateId>(parent[i] % n), l.label(via[i]->label)});
  std::reverse(steps.begin(), steps.end());
  return steps;
}

// Search for a linear difference between the behaviours reachable from two
// starting states: either a visible trace one side can perform and the other
// cannot (the macro of reachable states empties), or a state reachable on
// one side whose equivalence class the other side cannot reach under the
// same visible trace. Explores macro pairs breadth-first, so the visible
// trace of the result has minimal length.
inline Witness action_witness(const Lts& u, const Partition& p, StateId ia, StateId ib) {
  struct PairNode {
    uint32_t mx, my;       // interned macro ids
    int64_t parent;        // index into nodes
    LabelId label;         // edge from parent
  };
  std::vector<std::vector<StateId>> macros;
  std::map<std::vector<StateId>, uint32_t> macro_ids;
  auto intern = [&](std::vector<StateId> m) {
    auto [it, fresh] = macro_ids.emplace(std::move(m), static_cast<uint32_t>(macros.size()));
    if (fresh) macros.push_back(it->first);
    return it->second;
  };
  auto trace_to = [&](const std::vector<PairNode>& nodes, int64_t i) {
    std::vector<LabelId> trace;
    for (; nodes[i].parent != i; i = nodes[i].parent) trace.push_back(nodes[i].label);
    std::reverse(trace.begin(), trace.end());
    return trace;
  };

  // A state on one side is unmatched if no state of the co-macro shares its
  // block. Among unmatched states prefer one whose set of enabled visible
  // actions is offered by no co-macro state either: that reads better in a
  // report, and both choices are justified the same way.
  auto unmatched = [&](const std::vector<StateId>& mine, const std::vector<StateId>& co)
      -> std::optional<StateId> {
    std::set<uint32_t> co_blocks;
    for (StateId y : co) co_blocks.insert(p.block[y]);
    std::vector<StateId> cands;
    for (StateId x : mine)
      if (!co_blocks.count(p.block[x])) cands.push_back(x);
    if (cands.empty()) return std::nullopt;
    std::set<std::vector<LabelId>> co_profiles;
    for (StateId y : co) co_profiles.insert(enabled_visible(u, y));
    for (StateId x : cands)
      if (!co_profiles.count(enabled_visible(u, x))) return x;
    return cands.front();
  };

  std::vector<PairNode> nodes;
  std::set<std::pair<uint32_t, uint32_t>> visited;
  nodes.push_back({intern(tau_closure(u, {ia})), intern(tau_closure(u, {ib})), 0, kTauLabel});
  visited.insert({nodes[0].mx, nodes[0].my});

  constexpr std::size_t kPairCap = 1u << 20;
  for (std::size_t qi = 0; qi < nodes.size(); ++qi) {
    if (nodes.size() > kPairCap) throw LtsError("witness search exceeded capacity");
    const std::vector<StateId>& mx = macros[nodes[qi].mx];
    const std::vector<StateId>& my = macros[nodes[qi].my];

    for (int dir = 0; dir < 2; ++dir) {
      const auto& mine = dir == 0 ? mx : my;
      const auto& co = dir == 0 ? my : mx;
      if (auto x = unmatched(mine, co)) {
        Witness w;
        w.prefix = realize_trace(u, dir == 0 ? ia : ib, trace_to(nodes, qi), *x, &w.end_state);
        return w;
      }
    }

    std::vector<LabelId> labels;
    for (const std::vector<StateId>* m : {&mx, &my})
      for (StateId s : *m)
        for (const Transition& t : u.out(s))
          if (!u.is_tau(t.label)) labels.push_back(t.label);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

    for (LabelId lab : labels) {
      auto step = [&](const std::vector<StateId>& m) {
        std::vector<StateId> next;
        for (StateId s : m)
          for (const Transition& t : u.out(s))
            if (t.label == lab) next.push_back(t.dst);
        return next;
      };
      std::vector<StateId> nx = step(mx), ny = step(my);
      if (nx.empty() && ny.empty()) continue;
      if (nx.empty() || ny.empty()) {
        // One side performs the extended trace, the other cannot at all.
        std::vector<LabelId> trace = trace_to(nodes, qi);
        trace.push_back(lab);
        Witness w;
        w.prefix = realize_trace(u, ny.empty() ? ia : ib, trace, std::nullopt, &w.end_state);
        return w;
      }
      PairNode next{intern(tau_closure(u, nx)), intern(tau_closure(u, ny)),
                    static_cast<int64_t>(qi), lab};
      if (visited.insert({next.mx, next.my}).second) nodes.push_back(next);
    }
  }
  throw LtsError("states are distinguishable but no linear witness was found");
}

// Lasso witness for a pure divergence difference: a reachable all-tau cycle
// on one side, preferring one whose plain-equivalent counterpart states on
// the other side are all non-divergent (which makes the lasso conclusive on
// its own). `p` is divergence sensitive, `q` is the plain partition.
inline Witness divergence_witness(const Lts& u, const Partition& p, const Partition& q,
                                  StateId ia, StateId ib) {
  detail::TauScc scc = detail::TauScc::run(u, &p.block);
  std::vector<uint8_t> divs = mark_divergent(u, p);

  auto reach_mask = [&](StateId from) {
    std::vector<uint8_t> seen(u.num_states(), 0);
    std::vector<StateId> q2{from};
    seen[from] = 1;
    for (std::size_t qi = 0; qi < q2.size(); ++qi)
      for (const Transition& t : u.out(q2[qi]))
        if (!seen[t.dst]) {
          seen[t.dst] = 1;
          q2.push_back(t.dst);
        }
    return seen;
  };

  struct Hit {
    StateId state = UINT32_MAX;
    std::vector<std::pair<StateId, ActionLabel>> prefix;
  };

  // BFS from one side's start to the nearest tau-cycle state; `strict`
  // additionally demands that no plain-equivalent state on the other side
  // is divergent.
  auto search = [&](StateId from, const std::vector<uint8_t>& co_reach, bool strict) {
    Hit hit;
    auto ok = [&](StateId s) {
      if (!scc.core[scc.comp[s]]) return false;
      if (!strict) return true;
      for (StateId e = 0; e < u.num_states(); ++e)
        if (co_reach[e] && q.block[e] == q.block[s] && divs[e]) return false;
      return true;
    };
    std::vector<StateId> parent(u.num_states(), UINT32_MAX);
    std::vector<const Transition*> via(u.num_states(), nullptr);
    std::vector<StateId> queue{from};
    parent[from] = from;
    StateId found = ok(from) ? from : UINT32_MAX;
    for (std::size_t qi = 0; qi < queue.size() && found == UINT32_MAX; ++qi)
      for (const Transition& t : u.out(queue[qi])) {
        if (parent[t.dst] != UINT32_MAX) continue;
        parent[t.dst] = queue[qi];
        via[t.dst] = &t;
        if (ok(t.dst)) {
          found = t.dst;
          break;
        }
        queue.push_back(t.dst);
      }
    if (found == UINT32_MAX) return hit;
    hit.state = found;
    for (StateId s = found; s != from; s = parent[s])
      hit.prefix.push_back({parent[s], u.label(via[s]->label)});
    std::reverse(hit.prefix.begin(), hit.prefix.end());
    return hit;
  };

  std::vector<uint8_t> reach_a = reach_mask(ia), reach_b = reach_mask(ib);
  Hit best;
  for (bool strict : {true, false}) {
    Hit ha = search(ia, reach_b, strict);
    Hit hb = search(ib, reach_a, strict);
    if (ha.state != UINT32_MAX && (hb.state == UINT32_MAX || ha.prefix.size() <= hb.prefix.size()))
      best = std::move(ha);
    else if (hb.state != UINT32_MAX)
      best = std::move(hb);
    if (best.state != UINT32_MAX) break;
  }
  if (best.state == UINT32_MAX)
    throw LtsError("divergence difference reported but no tau cycle is reachable");

  Witness w;
  w.prefix = std::move(best.prefix);
  w.end_state = best.state;
  uint32_t comp = scc.comp[best.state];
  std::vector<StateId> cpar(u.num_states(), UINT32_MAX);
  std::vector<StateId> cq{best.state};
  StateId back = UINT32_MAX;
  for (std::size_t qi = 0; qi < cq.size() && back == UINT32_MAX; ++qi) {
    StateId s = cq[qi];
    for (const Transition& t : u.out(s)) {
      if (!u.is_tau(t.label) || scc.comp[t.dst] != comp) continue;
      if (t.dst == best.state) {
        back = s;
        break;
      }
      if (cpar[t.dst] != UINT32_MAX) continue;
      cpar[t.dst] = s;
      cq.push_back(t.dst);
    }
  }
  for (StateId s = back; s != best.state; s = cpar[s]) w.cycle.push_back({s, ActionLabel::tau()});
  w.cycle.push_back({best.state, ActionLabel::tau()});
  std::reverse(w.cycle.begin(), w.cycle.end());
  return w;
}

}  // namespace detail

/// Produces a replayable explanation of why two states of `lts` fall into
/// different blocks of `p`: either a path whose final visible action (or
/// whose final state's reachable equivalence class) the other side cannot
/// match, or, for a purely divergence-based difference, a lasso whose cycle
/// is silent. Witness states are ids of `lts`, typically a disjoint union.
inline Witness distinguish(const Lts& lts, const Partition& p, StateId init_a, StateId init_b,
                           bool divergence) {
  if (p.same_class(init_a, init_b))
    throw LtsError("distinguish called on equivalent states");
  if (divergence) {
    Partition q = coarsest_partition(lts, false);
    if (q.same_class(init_a, init_b))
      return detail::divergence_witness(lts, p, q, init_a, init_b);
  }
  return detail::action_witness(lts, p, init_a, init_b);
}

/// Outcome of an equivalence check between two systems.
struct Verdict {
  bool equivalent = false;
  bool divergence_used = false;
  /// Present exactly when not equivalent; states refer to the disjoint
  /// union of the two systems (left system first).
  std::optional<Witness> witness;
};

/// Branching bisimilarity of two systems' initial states, on the disjoint
/// union, divergence sensitive on request. Inequivalence comes with a
/// distinguishing witness.
inline Verdict equivalent(const Lts& a, const Lts& b, bool divergence) {
  Lts u = disjoint_union(a, b);
  Partition p = coarsest_partition(u, divergence);
  StateId ia = a.initial();
  StateId ib = a.num_states() + b.initial();
  Verdict v;
  v.divergence_used = divergence;
  v.equivalent = p.same_class(ia, ib);
  if (!v.equivalent) v.witness = distinguish(u, p, ia, ib, divergence);
  return v;
}

/// Marks every state that can reach a tau cycle by tau steps alone.
inline std::vector<uint8_t> divergent_states(const Lts& l) {
  detail::TauScc scc = detail::TauScc::run(l, nullptr);
  std::vector<uint8_t> div(l.num_states(), 0);
  // Emission order is successors-first, so propagate forward over it.
  for (uint32_t c = 0; c < scc.members.size(); ++c) {
    uint8_t d = scc.core[c];
    for (StateId s : scc.members[c]) {
      if (d) break;
      for (const Transition& t : l.out(s))
        if (l.is_tau(t.label) && div[t.dst]) {
          d = 1;
          break;
        }
    }
    for (StateId s : scc.members[c]) div[s] = d;
  }
  return div;
}

/// Finds a reachable tau cycle: the returned witness is a lasso whose cycle
/// is all tau. Empty result means the system has no reachable tau cycle and
/// therefore cannot diverge.
inline std::optional<Witness> find_tau_lasso(const Lts& l) {
  detail::TauScc scc = detail::TauScc::run(l, nullptr);

  // Shortest path (by edge count) from the initial state to any cycle core.
  std::vector<StateId> parent(l.num_states(), UINT32_MAX);
  std::vector<const Transition*> via(l.num_states(), nullptr);
  std::vector<StateId> queue{l.initial()};
  parent[l.initial()] = l.initial();
  StateId hit = UINT32_MAX;
  if (scc.core[scc.comp[l.initial()]]) hit = l.initial();
  for (std::size_t qi = 0; qi < queue.size() && hit == UINT32_MAX; ++qi) {
    StateId s = queue[qi];
    for (const Transition& t : l.out(s)) {
      if (parent[t.dst] != UINT32_MAX) continue;
      parent[t.dst] = s;
      via[t.dst] = &t;
      if (scc.core[scc.comp[t.dst]]) {
        hit = t.dst;
        break;
      }
      queue.push_back(t.dst);
    }
  }
  if (hit == UINT32_MAX) return std::nullopt;

  Witness w;
  for (StateId s = hit; s != l.initial(); s = parent[s])
    w.prefix.push_back({parent[s], l.label(via[s]->label)});
  std::reverse(w.prefix.begin(), w.prefix.end());
  w.end_state = hit;

  // Tau cycle from `hit` back to itself inside its component.
  uint32_t comp = scc.comp[hit];
  std::vector<StateId> cpar(l.num_states(), UINT32_MAX);
  std::vector<StateId> cq{hit};
  StateId back = UINT32_MAX;
  for (std::size_t qi = 0; qi < cq.size() && back == UINT32_MAX; ++qi) {
    StateId s = cq[qi];
    for (const Transition& t : l.out(s)) {
      if (!l.is_tau(t.label) || scc.comp[t.dst] != comp) continue;
      if (t.dst == hit) {
        back = s;
        break;
      }
      if (cpar[t.dst] != UINT32_MAX) continue;
      cpar[t.dst] = s;
      cq.push_back(t.dst);
    }
  }
  for (StateId s = back; s != hit; s = cpar[s]) w.cycle.push_back({s, ActionLabel::tau()});
  w.cycle.push_back({hit, ActionLabel::tau()});
  std::reverse(w.cycle.begin(), w.cycle.end());
  return w;
}

/// Lock-freedom sanity check for specifications: a coarse-grained atomic
/// specification must have no reachable tau cycle, otherwise divergence
/// comparisons against it are meaningless. Returns the offending lasso, or
/// nothing when the check passes.
inline std::optional<Witness> spec_lockfree_sanity(const Lts& spec) {
  return find_tau_lasso(spec);
}

/// Thrown when a supposed specification can itself loop internally, which
/// voids any lock-freedom conclusion drawn from comparisons against it.
struct SpecSanityError : LtsError {
  Witness lasso;
  explicit SpecSanityError(Witness w)
      : LtsError("specification has a reachable internal cycle and is not a valid "
                 "linearizable specification"),
        lasso(std::move(w)) {}
};

/// Three-valued outcome of a correctness claim about an object.
enum class Claim { Verified, Refuted, NotEstablished };

inline const char* claim_name(Claim c) {
  switch (c) {
    case Claim::Verified: return "verified";
    case Claim::Refuted: return "refuted";
    default: return "not_established";
  }
}

/// Combined verification result for an implementation against its atomic
/// specification.
struct ObjectReport {
  Claim linearizable = Claim::NotEstablished;
  Claim lock_free = Claim::NotEstablished;
  Verdict divergence_verdict;               // divergence-sensitive comparison
  std::optional<Verdict> plain_verdict;     // only run when the first fails
  std::optional<Witness> witness;           // evidence for the negative claims
  std::string note;
};

/// Verifies an implementation against its coarse-grained atomic
/// specification. Divergence-sensitive branching equivalence establishes
/// both linearizability and lock-freedom; if only the divergence-insensitive
/// comparison holds, the object is linearizable but its progress failure is
/// demonstrated by the attached silent-cycle witness. If neither holds,
/// nothing is concluded: the equivalences are sufficient conditions, so
/// their failure must not be read as a disproof of linearizability.
inline ObjectReport verify_object(const Lts& impl, const Lts& spec) {
  if (auto lasso = spec_lockfree_sanity(spec)) throw SpecSanityError(std::move(*lasso));

  ObjectReport r;
  r.divergence_verdict = equivalent(impl, spec, true);
  if (r.divergence_verdict.equivalent) {
    r.linearizable = Claim::Verified;
    r.lock_free = Claim::Verified;
    r.note = "implementation and specification are divergence-sensitive branching "
             "bisimilar: linearizable and lock-free";
    return r;
  }
  r.plain_verdict = equivalent(impl, spec, false);
  if (r.plain_verdict->equivalent) {
    r.linearizable = Claim::Verified;
    r.lock_free = Claim::Refuted;
    r.witness = r.divergence_verdict.witness;
    r.note = "branching bisimilar, hence linearizable; divergence-sensitive "
             "comparison fails: the witness loops internally forever while the "
             "specification cannot";
    return r;
  }
  r.linearizable = Claim::NotEstablished;
  r.lock_free = Claim::NotEstablished;
  r.witness = r.plain_verdict->witness;
  r.note = "not branching bisimilar to the specification; bisimilarity is "
           "sufficient but not necessary, so neither property is established "
           "nor refuted";
  return r;
}

}  // namespace lfcheck
