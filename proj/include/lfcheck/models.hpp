#pragma once

// Built-in model catalog: the counter and stack specifications,
// implementations, and one deliberately broken mutant that the tests, the
// benchmarks, and the command-line tool all share. Sources are embedded so
// the tool is self-contained; the same text lives under models/ as plain
// files, and a test keeps the two copies identical.

#include <string>
#include <vector>

#include "lfcheck/bisim.hpp"
#include "lfcheck/interp.hpp"
#include "lfcheck/lts.hpp"

namespace lfcheck {

/// What a catalog entry is for.
enum class ModelRole { Spec, Impl, Mutant };

/// Verdicts a correctly working checker is expected to produce for an entry
/// compared against its specification at the entry's canonical bounds.
/// Spec-role entries are compared against themselves.
struct ExpectedVerdicts {
  bool bisim;            ///< equivalent(impl, spec, divergence = false)
  bool div_bisim;        ///< equivalent(impl, spec, divergence = true)
  bool refinement;       ///< traces_refine(impl, spec); the brute-force
                         ///< linearizability oracle must agree with this
  Claim linearizable;    ///< verify_object(impl, spec).linearizable
  Claim lock_free;       ///< verify_object(impl, spec).lock_free
};

struct ModelEntry {
  std::string name;
  ModelRole role;
  std::string spec;      ///< catalog name of its specification; "" for specs
  std::string summary;   ///< one line for listings
  Bounds bounds;         ///< canonical client under which `expected` holds
  ExpectedVerdicts expected;
  std::string source;
};

namespace modelsrc {

inline constexpr const char* kCounterAbs = R"(// Abstract counter: the read and the increment fuse into one atomic step.

shared c : int[-8..8] = 0;

method inc() {
  atomic {
    local t := c;
    c := t + 1;
  }
  return;
}
)";

inline constexpr const char* kCounterCas = R"(// Optimistic counter: read the count, then publish the increment with a
// compare-and-swap, retrying until no other thread interfered.

shared c : int[-8..8] = 0;

method inc() {
  local t := 0;
  local done := false;
  while (!done) {
    t := c;
    done := cas(c, t, t + 1);
  }
  return;
}
)";

inline constexpr const char* kCounterD1 = R"(// Counter whose increment and decrement each run as one atomic step, so
// every call returns regardless of what the other threads do.

shared c : int[-8..8] = 0;

method inc() {
  atomic { c := c + 1; }
  return;
}

method dec() {
  atomic { c := c - 1; }
  return;
}
)";

inline constexpr const char* kCounterD2 = R"(// Counter whose decrement spins forever without touching shared state:
// dec never returns and no amount of help from other threads changes that.

shared c : int[-8..8] = 0;

method inc() {
  atomic { c := c + 1; }
  return;
}

method dec() {
  while (true) { skip; }
  return;
}
)";

inline constexpr const char* kCounterD3 = R"(// Counter whose decrement waits until the count is positive, so its
// progress depends on increments performed by other threads.

shared c : int[-8..8] = 0;

method inc() {
  atomic { c := c + 1; }
  return;
}

method dec() {
  while (true) {
    if (c > 0) {
      c := c - 1;
      break;
    }
  }
  return;
}
)";

inline constexpr const char* kStackSpec = R"(// Stack specification: a linked stack whose push and pop each run as one
// atomic step. Starts holding one node with value 1, like the
// implementations it specifies.

shared Top : ref = node(1);

method push(v) {
  atomic {
    local x := null;
    x := new_node(v);
    x.next := Top;
    Top := x;
  }
  return;
}

method pop() {
  local res := EMPTY;
  atomic {
    if (Top != null) {
      local cur := Top;
      Top := cur.next;
      res := cur.value;
      retire(cur);
    }
  }
  return res;
}
)";

inline constexpr const char* kTreiber = R"(// Treiber's lock-free stack: push and pop race on Top with compare-and-swap
// and retry on interference. Popped nodes are abandoned, never reclaimed.
// Starts holding one node with value 1.

shared Top : ref = node(1);

method push(v) {
  local x := null;
  local o := null;
  local done := false;
  x := new_node(v);
  while (!done) {
    o := Top;
    x.next := o;
    done := cas(Top, o, x);
  }
  return;
}

method pop() {
  local o := null;
  local x := null;
  local done := false;
  while (!done) {
    o := Top;
    if (o == null) {
      return EMPTY;
    }
    x := o.next;
    done := cas(Top, o, x);
  }
  return o.value;
}
)";

inline constexpr const char* kTreiberHp = R"(// Treiber's stack with hazard-pointer reclamation. pop publishes the node
// it is about to dereference in hp[tid] and revalidates Top before reading
// through it. After a successful pop, one bounded scan over the other
// threads' hazard slots decides the fate of the popped node (free it now,
// or defer it onto a per-thread pending list threaded through the nodes'
// own next fields) and simultaneously gives the most recently deferred
// node a chance to be freed. Starts holding one node with value 1.

shared Top : ref = node(1);
shared hp : ref[threads];
shared pending : ref[threads];

method push(v) {
  local x := null;
  local o := null;
  local done := false;
  x := new_node(v);
  while (!done) {
    o := Top;
    x.next := o;
    done := cas(Top, o, x);
  }
  return;
}

method pop() {
  local o := null;
  local x := null;
  local res := EMPTY;
  local done := false;
  local i := 1;
  local h := null;
  local p := null;
  local mine := false;
  local prev := false;
  while (!done) {
    o := Top;
    if (o == null) {
      hp[tid] := null;
      return EMPTY;
    }
    hp[tid] := o;
    if (Top == o) {
      x := o.next;
      done := cas(Top, o, x);
    }
  }
  res := o.value;
  hp[tid] := null;
  p := pending[tid];
  i := 1;
  while (i <= threads) {
    if (i != tid) {
      h := hp[i];
      if (h == o) {
        mine := true;
      }
      if (h == p) {
        prev := true;
      }
    }
    i := i + 1;
  }
  if (p != null) {
    if (!prev) {
      pending[tid] := p.next;
      retire(p);
    }
  }
  if (mine) {
    o.next := pending[tid];
    pending[tid] := o;
  } else {
    retire(o);
  }
  return res;
}
)";

inline constexpr const char* kTreiberHpBuggy = R"(// Treiber's stack with a broken hazard-pointer reclamation. pop publishes
// the node it is about to dereference in hp[tid] and revalidates Top before
// reading through it. After a successful pop, the scan over the other
// threads' hazard slots *waits* for a slot that pins the popped node,
// re-reading it without advancing until it changes, and only then frees
// the node. Starts holding one node with value 1.

shared Top : ref = node(1);
shared hp : ref[threads];
shared pending : ref[threads];

method push(v) {
  local x := null;
  local o := null;
  local done := false;
  x := new_node(v);
  while (!done) {
    o := Top;
    x.next := o;
    done := cas(Top, o, x);
  }
  return;
}

method pop() {
  local o := null;
  local x := null;
  local res := EMPTY;
  local done := false;
  local i := 1;
  local h := null;
  local p := null;
  local mine := false;
  local prev := false;
  while (!done) {
    o := Top;
    if (o == null) {
      hp[tid] := null;
      return EMPTY;
    }
    hp[tid] := o;
    if (Top == o) {
      x := o.next;
      done := cas(Top, o, x);
    }
  }
  res := o.value;
  hp[tid] := null;
  i := 1;
  while (i <= threads) {
    if (i != tid) {
      h := hp[i];
      if (h != o) {
        i := i + 1;
      }
    } else {
      i := i + 1;
    }
  }
  retire(o);
  return res;
}
)";

inline constexpr const char* kTreiberMutantBlindPop = R"(// Treiber variant whose pop installs the new top with a plain write instead
// of a compare-and-swap, silently losing concurrent updates. A known
// non-linearizable negative control. Starts holding one node with value 1.

shared Top : ref = node(1);

method push(v) {
  local x := null;
  local o := null;
  local done := false;
  x := new_node(v);
  while (!done) {
    o := Top;
    x.next := o;
    done := cas(Top, o, x);
  }
  return;
}

method pop() {
  local o := null;
  local x := null;
  local done := false;
  while (!done) {
    o := Top;
    if (o == null) {
      return EMPTY;
    }
    x := o.next;
    Top := x;
    done := true;
  }
  return o.value;
}
)";

}  // namespace modelsrc

namespace detail {

inline Bounds counter_pair_client() {
  Bounds b;
  b.threads = 2;
  b.ops = 1;
  b.thread_methods[1] = {"dec"};
  b.thread_methods[2] = {"inc"};
  return b;
}

inline std::vector<ModelEntry> build_catalog() {
  const ExpectedVerdicts ok{true, true, true, Claim::Verified, Claim::Verified};
  const ExpectedVerdicts not_lock_free{true, false, true, Claim::Verified,
                                       Claim::Refuted};
  const ExpectedVerdicts divergent{false, false, true, Claim::NotEstablished,
                                   Claim::NotEstablished};
  const ExpectedVerdicts broken{false, false, false, Claim::NotEstablished,
                                Claim::NotEstablished};
  const Bounds two_by_one;  // two threads, one operation each
  const Bounds counter_pair = counter_pair_client();

  std::vector<ModelEntry> v;
  v.push_back({"counter_abs", ModelRole::Spec, "",
               "counter specification with an atomic fetch-and-increment",
               two_by_one, ok, modelsrc::kCounterAbs});
  v.push_back({"counter_cas", ModelRole::Impl, "counter_abs",
               "counter incrementing via a compare-and-swap retry loop",
               two_by_one, ok, modelsrc::kCounterCas});
  v.push_back({"counter_d1", ModelRole::Spec, "",
               "counter with atomic increment and decrement",
               counter_pair, ok, modelsrc::kCounterD1});
  v.push_back({"counter_d2", ModelRole::Impl, "counter_d1",
               "counter whose decrement spins forever",
               counter_pair, divergent, modelsrc::kCounterD2});
  v.push_back({"counter_d3", ModelRole::Impl, "counter_d1",
               "counter whose decrement waits for a positive count",
               counter_pair, divergent, modelsrc::kCounterD3});
  v.push_back({"stack_spec", ModelRole::Spec, "",
               "stack specification with atomic push and pop",
               two_by_one, ok, modelsrc::kStackSpec});
  v.push_back({"treiber", ModelRole::Impl, "stack_spec",
               "Treiber's lock-free stack, nodes never reclaimed",
               two_by_one, ok, modelsrc::kTreiber});
  v.push_back({"treiber_hp", ModelRole::Impl, "stack_spec",
               "Treiber's stack with hazard-pointer reclamation",
               two_by_one, ok, modelsrc::kTreiberHp});
  v.push_back({"treiber_hp_buggy", ModelRole::Impl, "stack_spec",
               "hazard-pointer stack whose reclaim scan spins on a pinned slot",
               two_by_one, not_lock_free, modelsrc::kTreiberHpBuggy});
  v.push_back({"treiber_mutant_blind_pop", ModelRole::Mutant, "stack_spec",
               "Treiber's stack with pop's compare-and-swap made a blind write",
               two_by_one, broken, modelsrc::kTreiberMutantBlindPop});
  return v;
}

}  // namespace detail

/// All built-in models, in listing order.
inline const std::vector<ModelEntry>& model_catalog() {
  static const std::vector<ModelEntry> catalog = detail::build_catalog();
  return catalog;
}

/// Looks up a built-in model by name. Throws LtsError for unknown names;
/// the message lists every available name.
inline const ModelEntry& get_model(const std::string& name) {
  const std::vector<ModelEntry>& catalog = model_catalog();
  for (const ModelEntry& e : catalog)
    if (e.name == name) return e;
  std::string msg = "unknown model '" + name + "'; available models:";
  for (const ModelEntry& e : catalog) msg += " " + e.name;
  throw LtsError(msg);
}

}  // namespace lfcheck
