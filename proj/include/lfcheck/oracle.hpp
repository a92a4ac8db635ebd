#pragma once

// Brute-force linearizability oracle. Histories are the visible call/return
// sequences of an LTS; a history is linearizable when some completion of it
// can be reordered into a legal sequential history that preserves each
// thread's order and the real-time precedence between non-overlapping
// operations. The search is factorial-time backtracking over a small,
// executable sequential specification; it exists to cross-check the
// polynomial equivalence and refinement checkers at small bounds, not to
// scale past them.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lfcheck/lts.hpp"

namespace lfcheck {

/// A history event is exactly a visible action: a call or return with a
/// thread, a method name, and an optional argument/result value. Tau-kind
/// labels are rejected as malformed wherever histories are consumed.
using Event = ActionLabel;
using History = std::vector<Event>;

/// Map from method name to every return value a pending call of that method
/// may be completed with (LabelValue::none() for value-less returns).
using ReturnDomain = std::map<std::string, std::vector<LabelValue>>;

/// Executable deterministic sequential object. `apply` runs one operation on
/// the state in place and yields its return value; it must be deterministic
/// and total over the bounded value domain, and throws LtsError for methods
/// the object does not implement.
struct SeqSpec {
  using State = std::vector<int32_t>;
  State initial;
  std::function<LabelValue(State&, const std::string&, LabelValue)> apply;
  ReturnDomain returns;
};

/// LIFO stack over the values 1..`values`; push returns nothing and pop
/// returns the top value or EMPTY. `initial` lists starting contents
/// bottom-first.
inline SeqSpec stack_seq_spec(int values, std::vector<int32_t> initial = {}) {
  SeqSpec s;
  s.initial = std::move(initial);
  s.apply = [](SeqSpec::State& st, const std::string& m, LabelValue arg) -> LabelValue {
    if (m == "push") {
      if (!arg.is_int()) throw LtsError("push requires an integer argument");
      st.push_back(arg.as_int());
      return LabelValue::none();
    }
    if (m == "pop") {
      if (st.empty()) return LabelValue::empty();
      LabelValue v = LabelValue::integer(st.back());
      st.pop_back();
      return v;
    }
    throw LtsError("sequential stack has no method '" + m + "'");
  };
  s.returns["push"] = {LabelValue::none()};
  std::vector<LabelValue> pops{LabelValue::empty()};
  for (int v = 1; v <= values; ++v) pops.push_back(LabelValue::integer(v));
  s.returns["pop"] = std::move(pops);
  return s;
}

/// Integer counter with value-less inc/dec (dec is unguarded and may take
/// the count negative, matching the atomic counter specification).
inline SeqSpec counter_seq_spec(int32_t initial = 0) {
  SeqSpec s;
  s.initial = {initial};
  s.apply = [](SeqSpec::State& st, const std::string& m, LabelValue) -> LabelValue {
    if (m == "inc") {
      ++st[0];
      return LabelValue::none();
    }
    if (m == "dec") {
      --st[0];
      return LabelValue::none();
    }
    throw LtsError("sequential counter has no method '" + m + "'");
  };
  s.returns["inc"] = {LabelValue::none()};
  s.returns["dec"] = {LabelValue::none()};
  return s;
}

namespace detail {

/// One matched (or still pending) operation of a history.
struct LinOp {
  int thread = 0;
  std::string method;
  LabelValue arg;
  LabelValue ret;
  std::size_t call_idx = 0;
  std::size_t ret_idx = 0;  // == history length while the call is pending
};

/// Splits a history into operations, enforcing per-thread alternation and
/// call/return method agreement. With `require_complete`, pending calls are
/// also an error.
inline std::vector<LinOp> parse_ops(const History& h, bool require_complete) {
  std::vector<LinOp> ops;
  std::map<int, std::size_t> pending;  // thread -> index into ops
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Event& e = h[i];
    if (e.kind == ActionLabel::Kind::Tau)
      throw LtsError("malformed history: contains an internal action");
    if (e.thread <= 0) throw LtsError("malformed history: event without a thread");
    if (e.kind == ActionLabel::Kind::Call) {
      if (pending.count(e.thread))
        throw LtsError("malformed history: thread " + std::to_string(e.thread) +
                       " calls while its previous operation is pending");
      pending[e.thread] = ops.size();
      ops.push_back({e.thread, e.method, e.value, LabelValue::none(), i, h.size()});
    } else {
      auto it = pending.find(e.thread);
      if (it == pending.end())
        throw LtsError("malformed history: return without a pending call on thread " +
                       std::to_string(e.thread));
      LinOp& op = ops[it->second];
      if (op.method != e.method)
        throw LtsError("malformed history: thread " + std::to_string(e.thread) + " returns from " +
                       e.method + " while " + op.method + " is pending");
      op.ret = e.value;
      op.ret_idx = i;
      pending.erase(it);
    }
  }
  if (require_complete && !pending.empty())
    throw LtsError("check_lin requires a complete history (pending call on thread " +
                   std::to_string(pending.begin()->first) + ")");
  return ops;
}

/// Enumerates every visible trace of `l` with at most `max_events` events,
/// shortest first and each exactly once (the determinized macro-state graph
/// has one node per distinct trace). `fn` receives each history, the empty
/// one included, and returns false to stop the enumeration.
template <class Fn>
void for_each_history(const Lts& l, std::size_t max_events, Fn&& fn) {
  std::map<std::vector<StateId>, uint32_t> macro_ids;
  std::vector<std::vector<StateId>> macros;
  auto intern = [&](std::vector<StateId>&& m) -> uint32_t {
    auto [it, fresh] = macro_ids.try_emplace(std::move(m), static_cast<uint32_t>(macros.size()));
    if (fresh) macros.push_back(it->first);
    return it->second;
  };

  std::vector<std::optional<std::vector<std::pair<LabelId, uint32_t>>>> succs;
  auto successors = [&](uint32_t m) -> const std::vector<std::pair<LabelId, uint32_t>>& {
    if (m >= succs.size()) succs.resize(m + 1);
    if (!succs[m]) {
      std::map<LabelId, std::vector<StateId>> targets;
      for (StateId s : macros[m])
        for (const Transition& t : l.out(s))
          if (!l.is_tau(t.label)) targets[t.label].push_back(t.dst);
      std::vector<std::pair<LabelId, uint32_t>> sv;
      sv.reserve(targets.size());
      for (auto& [lab, dsts] : targets) sv.emplace_back(lab, intern(tau_closure(l, dsts)));
      succs[m] = std::move(sv);
    }
    return *succs[m];
  };

  std::deque<std::pair<uint32_t, History>> queue;
  queue.emplace_back(intern(tau_closure(l, {l.initial()})), History{});
  while (!queue.empty()) {
    auto [m, h] = std::move(queue.front());
    queue.pop_front();
    if (!fn(static_cast<const History&>(h))) return;
    if (h.size() >= max_events) continue;
    for (auto [lab, sm] : successors(m)) {
      History h2 = h;
      h2.push_back(l.label(lab));
      queue.emplace_back(sm, std::move(h2));
    }
  }
}

}  // namespace detail

/// All visible-event sequences of length <= max_events obtained by
/// projecting finite paths of `l` onto its non-tau labels.
inline std::set<History> histories(const Lts& l, std::size_t max_events) {
  std::set<History> out;
  detail::for_each_history(l, max_events, [&](const History& h) {
    out.insert(h);
    return true;
  });
  return out;
}

/// Every completion of `h`: independently for each pending call, either
/// delete the call or append a matching return carrying one value from the
/// method's entry in `dom`. A history with no pending calls has exactly one
/// completion, itself. Throws LtsError when `h` is malformed or a pending
/// method has no domain entry.
inline std::set<History> completions(const History& h, const ReturnDomain& dom) {
  std::vector<detail::LinOp> ops = detail::parse_ops(h, false);
  std::vector<const detail::LinOp*> pending;
  for (const detail::LinOp& op : ops)
    if (op.ret_idx == h.size()) {
      if (!dom.count(op.method))
        throw LtsError("no completion domain for method '" + op.method + "'");
      pending.push_back(&op);
    }

  std::set<History> out;
  // Choice per pending call: SIZE_MAX = drop, otherwise an index into the
  // method's return domain.
  std::vector<std::size_t> choice(pending.size(), SIZE_MAX);
  for (;;) {
    History c;
    std::set<std::size_t> dropped;
    for (std::size_t i = 0; i < pending.size(); ++i)
      if (choice[i] == SIZE_MAX) dropped.insert(pending[i]->call_idx);
    for (std::size_t i = 0; i < h.size(); ++i)
      if (!dropped.count(i)) c.push_back(h[i]);
    for (std::size_t i = 0; i < pending.size(); ++i)
      if (choice[i] != SIZE_MAX)
        c.push_back(Event::ret(pending[i]->thread, pending[i]->method,
                               dom.at(pending[i]->method)[choice[i]]));
    out.insert(std::move(c));

    std::size_t i = 0;
    for (; i < pending.size(); ++i) {
      std::size_t limit = dom.at(pending[i]->method).size();
      if (choice[i] == SIZE_MAX) {
        choice[i] = 0;
        if (limit > 0) break;  // advanced to the first domain value
        choice[i] = SIZE_MAX;  // empty domain: drop is the only choice
      } else if (choice[i] + 1 < limit) {
        ++choice[i];
        break;
      } else {
        choice[i] = SIZE_MAX;  // wrap back to drop, carry into the next call
      }
    }
    if (i == pending.size()) return out;
  }
}

/// Result of a single-history linearizability check; when `linearizable`,
/// `witness` is the legal sequential reordering that proves it.
struct LinResult {
  bool linearizable = false;
  History witness;
};

/// True iff some legal sequential history S satisfies H|t = S|t for every
/// thread t and preserves real-time precedence (every operation that
/// returned before another was called keeps that order in S). `h` must be
/// complete; compose with `completions` otherwise. Backtracks over operation
/// orders, replaying `spec` and memoizing failed (scheduled-set, state)
/// pairs.
inline LinResult check_lin(const History& h, const SeqSpec& spec) {
  std::vector<detail::LinOp> ops = detail::parse_ops(h, true);
  constexpr std::size_t kMaxOps = 16;
  if (ops.size() > kMaxOps)
    throw LtsError("history exceeds the oracle's cap of " + std::to_string(kMaxOps) +
                   " operations");
  const std::size_t n = ops.size();

  std::vector<std::size_t> order;
  std::set<std::pair<uint32_t, SeqSpec::State>> dead;
  std::function<bool(uint32_t, const SeqSpec::State&)> dfs = [&](uint32_t done,
                                                                 const SeqSpec::State& st) {
    if (order.size() == n) return true;
    if (dead.count({done, st})) return false;
    for (std::size_t i = 0; i < n; ++i) {
      if (done >> i & 1u) continue;
      bool ready = true;
      for (std::size_t j = 0; j < n && ready; ++j)
        if (j != i && !(done >> j & 1u) && ops[j].ret_idx < ops[i].call_idx) ready = false;
      if (!ready) continue;
      SeqSpec::State next = st;
      if (!(spec.apply(next, ops[i].method, ops[i].arg) == ops[i].ret)) continue;
      order.push_back(i);
      if (dfs(done | (1u << i), next)) return true;
      order.pop_back();
    }
    dead.insert({done, st});
    return false;
  };

  LinResult out;
  out.linearizable = dfs(0, spec.initial);
  if (out.linearizable)
    for (std::size_t i : order) {
      out.witness.push_back(Event::call(ops[i].thread, ops[i].method, ops[i].arg));
      out.witness.push_back(Event::ret(ops[i].thread, ops[i].method, ops[i].ret));
    }
  return out;
}

/// Whole-object verdict: true iff every history of `l` with at most
/// `max_events` events has some completion accepted by check_lin. On
/// failure, `failing` is the first failing history in shortest-first
/// enumeration order.
struct ObjectLinResult {
  bool linearizable = true;
  std::optional<History> failing;
};

inline ObjectLinResult check_object_lin(const Lts& l, const SeqSpec& spec,
                                        std::size_t max_events) {
  ObjectLinResult out;
  detail::for_each_history(l, max_events, [&](const History& h) {
    for (const History& c : completions(h, spec.returns))
      if (check_lin(c, spec).linearizable) return true;
    out.linearizable = false;
    out.failing = h;
    return false;
  });
  return out;
}

}  // namespace lfcheck
