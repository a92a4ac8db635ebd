#pragma once

// Small-step interpreter for compiled models under a bounded most-general
// client: `threads` client threads, each invoking at most `ops` operations
// with int arguments drawn from 1..values, against a shared heap of
// `pool` preallocated nodes.
//
// A configuration is one flat int32 vector (shared scalars and arrays, then
// node triples, then per-thread control and locals), so configurations hash
// and compare cheaply. Idle threads keep zeroed locals and a cleared method
// so configurations stay canonical.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfcheck/action.hpp"
#include "lfcheck/cfg.hpp"

namespace lfcheck {

struct Bounds {
  int threads = 2;
  int ops = 1;
  int values = 1;
  int pool = 0;  // 0: auto-size to threads*ops + 1
  uint64_t state_cap = 5'000'000;
  // Per-thread method restriction (1-based thread id -> allowed method
  // names). Threads without an entry may call every method.
  std::map<int, std::vector<std::string>> thread_methods;
  enum class PoolMode { Error, Prune } pool_mode = PoolMode::Error;
};

/// A runtime rule violation (null dereference, range violation, pool
/// exhaustion, a loop that spins without taking a step, ...).
class StepError : public std::runtime_error {
 public:
  StepError(std::string msg, ast::SourceLoc loc, int thread)
      : std::runtime_error(std::move(msg)), loc_(loc), thread_(thread) {}
  ast::SourceLoc loc() const { return loc_; }
  int thread() const { return thread_; }

 private:
  ast::SourceLoc loc_;
  int thread_;
};

namespace detail {
/// Thrown instead of StepError for pool exhaustion under PoolMode::Prune;
/// the enclosing move is dropped rather than reported.
struct PruneMove {};
constexpr int kFuseLimit = 256;
}  // namespace detail

using Config = std::vector<int32_t>;

struct ConfigHash {
  std::size_t operator()(const Config& c) const {
    return detail::fnv1a(c.data(), c.size() * sizeof(int32_t));
  }
};

class Machine {
 public:
  // Takes its own copy of the program so the machine (and anything holding
  // configurations produced by it) never outlives the code it runs.
  Machine(Program p, Bounds b) : p_(std::move(p)), b_(std::move(b)) {
    if (b_.threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (b_.ops < 0) throw std::invalid_argument("ops must be >= 0");
    if (b_.values < 1) throw std::invalid_argument("values must be >= 1");
    pool_ = b_.pool > 0 ? b_.pool : b_.threads * b_.ops + 1;
    int off = 0;
    for (const SharedVar& v : p_.shared) {
      shared_off_.push_back(off);
      shared_size_.push_back(var_size(v));
      off += shared_size_.back();
    }
    pool_base_ = off;
    threads_base_ = pool_base_ + 3 * pool_;
    thread_stride_ = 4 + p_.max_locals;
    total_ = threads_base_ + b_.threads * thread_stride_;

    for (int t = 1; t <= b_.threads; ++t) {
      std::vector<int> allowed;
      auto it = b_.thread_methods.find(t);
      for (std::size_t mi = 0; mi < p_.methods.size(); ++mi) {
        if (it != b_.thread_methods.end()) {
          bool found = false;
          for (const std::string& name : it->second)
            if (name == p_.methods[mi].name) found = true;
          if (!found) continue;
        }
        allowed.push_back(static_cast<int>(mi));
      }
      allowed_.push_back(std::move(allowed));
    }
  }

  const Program& program() const { return p_; }
  const Bounds& bounds() const { return b_; }
  int pool_size() const { return pool_; }

  Config initial() const {
    Config c(total_, 0);
    int preload = 0;
    for (std::size_t i = 0; i < p_.shared.size(); ++i) {
      const SharedVar& v = p_.shared[i];
      int32_t* base = &c[shared_off_[i]];
      if (v.is_ref)
        for (int j = 0; j < shared_size_[i]; ++j) base[j] = kNullRef;
      switch (v.init) {
        case ast::SharedDecl::Init::Default:
          break;
        case ast::SharedDecl::Init::Int:
          base[0] = v.init_value;
          break;
        case ast::SharedDecl::Init::Null:
          base[0] = kNullRef;
          break;
        case ast::SharedDecl::Init::Node: {
          if (preload >= pool_)
            throw StepError("node pool too small for initializers", {0, 0}, 0);
          int slot = preload++;
          c[pool_base_ + 3 * slot + 0] = v.init_value;
          c[pool_base_ + 3 * slot + 1] = kNullRef;
          c[pool_base_ + 3 * slot + 2] = 1;
          base[0] = slot;
          break;
        }
      }
    }
    for (int t = 1; t <= b_.threads; ++t) {
      int32_t* th = thread_base(c, t);
      th[0] = 0;        // idle
      th[1] = b_.ops;   // remaining operations
      th[2] = -1;       // no method
      th[3] = 0;
    }
    return c;
  }

  struct Move {
    ActionLabel label;
    Config dst;
  };

  /// All enabled moves, in a fixed deterministic order: threads ascending;
  /// an idle thread offers one call per allowed method and argument, a
  /// running thread has exactly one move.
  std::vector<Move> moves(const Config& c) const {
    std::vector<Move> out;
    for (int t = 1; t <= b_.threads; ++t) {
      const int32_t* th = thread_base(c, t);
      if (th[0] == 0) {
        if (th[1] <= 0) continue;
        for (int mi : allowed_[t - 1]) {
          const CompiledMethod& m = p_.methods[mi];
          if (m.has_param) {
            for (int v = 1; v <= b_.values; ++v) emit_call(out, c, t, mi, v, true);
          } else {
            emit_call(out, c, t, mi, 0, false);
          }
        }
      } else {
        try {
          out.push_back(run_move(c, t));
        } catch (const detail::PruneMove&) {
        }
      }
    }
    return out;
  }

  // --- introspection ------------------------------------------------------

  bool thread_running(const Config& c, int t) const { return thread_base(c, t)[0] != 0; }
  int thread_rem(const Config& c, int t) const { return thread_base(c, t)[1]; }
  int thread_method(const Config& c, int t) const { return thread_base(c, t)[2]; }

  const CfgNode* thread_node(const Config& c, int t) const {
    const int32_t* th = thread_base(c, t);
    if (th[0] == 0) return nullptr;
    return &p_.methods[th[2]].nodes[static_cast<uint32_t>(th[3])];
  }

  /// Value of a shared scalar, or of element `index` (1-based) of an array.
  int32_t shared_value(const Config& c, const std::string& name, int index = 1) const {
    int vi = var_index(name);
    const SharedVar& v = p_.shared[vi];
    if (!v.is_array) return c[shared_off_[vi]];
    if (index < 1 || index > shared_size_[vi])
      throw std::out_of_range("array index out of range in shared_value");
    return c[shared_off_[vi] + index - 1];
  }

  int32_t node_field(const Config& c, int32_t ref, ast::Field f) const {
    if (ref < 0 || ref >= pool_) throw std::out_of_range("bad node ref");
    return c[pool_base_ + 3 * ref + (f == ast::Field::Value ? 0 : 1)];
  }
  bool node_allocated(const Config& c, int32_t ref) const {
    if (ref < 0 || ref >= pool_) throw std::out_of_range("bad node ref");
    return c[pool_base_ + 3 * ref + 2] != 0;
  }

 private:
  int var_size(const SharedVar& v) const {
    if (!v.is_array) return 1;
    return v.size_kind == ast::ArraySize::Threads ? b_.threads : v.fixed_size;
  }

  int var_index(const std::string& name) const {
    for (std::size_t i = 0; i < p_.shared.size(); ++i)
      if (p_.shared[i].name == name) return static_cast<int>(i);
    throw std::out_of_range("unknown shared variable " + name);
  }

  int32_t* thread_base(Config& c, int t) const {
    return &c[threads_base_ + (t - 1) * thread_stride_];
  }
  const int32_t* thread_base(const Config& c, int t) const {
    return &c[threads_base_ + (t - 1) * thread_stride_];
  }

  void emit_call(std::vector<Move>& out, const Config& c, int t, int mi, int arg,
                 bool has_arg) const {
    const CompiledMethod& m = p_.methods[mi];
    Move mv;
    mv.label = ActionLabel::call(
        t, m.name, has_arg ? LabelValue::integer(arg) : LabelValue::none());
    mv.dst = c;
    int32_t* th = thread_base(mv.dst, t);
    th[0] = 1;
    th[1] -= 1;
    th[2] = mi;
    th[3] = static_cast<int32_t>(m.entry);
    if (m.has_param) th[4 + 0] = arg;
    try {
      advance(mv.dst, t);
    } catch (const detail::PruneMove&) {
      return;  // pool exhausted in a free prefix cannot happen, but be safe
    }
    out.push_back(std::move(mv));
  }

  // The single enabled move of a running thread: execute its stepping node,
  // then fold any following free nodes.
  Move run_move(const Config& c, int t) const {
    const CompiledMethod& m = p_.methods[thread_base(c, t)[2]];
    uint32_t ni = static_cast<uint32_t>(thread_base(c, t)[3]);
    const CfgNode& n = m.nodes[ni];
    Move mv;
    mv.dst = c;
    mv.label = ActionLabel::tau();
    int32_t* th = thread_base(mv.dst, t);
    int32_t* locals = th + 4;

    switch (n.kind) {
      case OpKind::AssignLocal:
        locals[n.local] = eval(mv.dst, t, n.exprs[0]);
        th[3] = static_cast<int32_t>(n.next);
        break;
      case OpKind::AssignShared:
        write_shared(mv.dst, t, n.shared, 0, eval(mv.dst, t, n.exprs[0]), n.loc);
        th[3] = static_cast<int32_t>(n.next);
        break;
      case OpKind::ArrayWrite: {
        int32_t idx = eval(mv.dst, t, n.exprs[0]);
        check_index(n.shared, idx, n.loc, t);
        write_shared(mv.dst, t, n.shared, idx - 1, eval(mv.dst, t, n.exprs[1]), n.loc);
        th[3] = static_cast<int32_t>(n.next);
        break;
      }
      case OpKind::FieldWrite: {
        int32_t ref = eval(mv.dst, t, n.exprs[0]);
        write_field(mv.dst, t, ref, n.field_next, eval(mv.dst, t, n.exprs[1]), n.loc);
        th[3] = static_cast<int32_t>(n.next);
        break;
      }
      case OpKind::NewNode:
        locals[n.local] = alloc_node(mv.dst, t, eval(mv.dst, t, n.exprs[0]), n.loc);
        th[3] = static_cast<int32_t>(n.next);
        break;
      case OpKind::Cas: {
        int32_t cur = mv.dst[shared_off_[n.shared]];
        int32_t expect = eval(mv.dst, t, n.exprs[0]);
        if (cur == expect) {
          write_shared(mv.dst, t, n.shared, 0, eval(mv.dst, t, n.exprs[1]), n.loc);
          locals[n.local] = 1;
        } else {
          locals[n.local] = 0;
        }
        th[3] = static_cast<int32_t>(n.next);
        break;
      }
      case OpKind::Retire:
        retire_node(mv.dst, t, eval(mv.dst, t, n.exprs[0]), n.loc);
        th[3] = static_cast<int32_t>(n.next);
        break;
      case OpKind::Skip:
        th[3] = static_cast<int32_t>(n.next);
        break;
      case OpKind::Atomic:
        exec_atomic(mv.dst, t, n.atomic);
        th[3] = static_cast<int32_t>(n.next);
        break;
      case OpKind::Branch:
        th[3] = static_cast<int32_t>(eval(mv.dst, t, n.exprs[0]) != 0 ? n.next : n.next_else);
        break;
      case OpKind::Return: {
        LabelValue val = LabelValue::none();
        if (n.has_value) {
          int32_t v = eval(mv.dst, t, n.exprs[0]);
          val = v == kEmptyValue ? LabelValue::empty() : LabelValue::integer(v);
        }
        mv.label = ActionLabel::ret(t, m.name, val);
        th[0] = 0;
        th[2] = -1;
        th[3] = 0;
        for (int i = 0; i < p_.max_locals; ++i) locals[i] = 0;
        return mv;  // idle threads do not advance
      }
      case OpKind::Goto:
        throw std::logic_error("thread parked on a free node");
    }
    advance(mv.dst, t);
    return mv;
  }

  // Folds free nodes (pure-local assignments, structural gotos, pure
  // branches) until the thread parks on a stepping node.
  void advance(Config& c, int t) const {
    int32_t* th = thread_base(c, t);
    const CompiledMethod& m = p_.methods[th[2]];
    int fused = 0;
    for (;;) {
      const CfgNode& n = m.nodes[static_cast<uint32_t>(th[3])];
      if (n.stepping) return;
      if (++fused > detail::kFuseLimit)
        throw StepError("control makes no progress (free-operation cycle)", n.loc, t);
      switch (n.kind) {
        case OpKind::AssignLocal:
          (th + 4)[n.local] = eval(c, t, n.exprs[0]);
          th[3] = static_cast<int32_t>(n.next);
          break;
        case OpKind::Goto:
          th[3] = static_cast<int32_t>(n.next);
          break;
        case OpKind::Branch:
          th[3] = static_cast<int32_t>(eval(c, t, n.exprs[0]) != 0 ? n.next : n.next_else);
          break;
        default:
          throw std::logic_error("unexpected free node kind");
      }
    }
  }

  void exec_atomic(Config& c, int t, const std::vector<RStmt>& body) const {
    for (const RStmt& s : body) {
      switch (s.k) {
        case RStmt::K::AssignLocal:
          (thread_base(c, t) + 4)[s.local] = eval(c, t, s.exprs[0]);
          break;
        case RStmt::K::AssignShared:
          write_shared(c, t, s.shared, 0, eval(c, t, s.exprs[0]), s.loc);
          break;
        case RStmt::K::ArrayWrite: {
          int32_t idx = eval(c, t, s.exprs[0]);
          check_index(s.shared, idx, s.loc, t);
          write_shared(c, t, s.shared, idx - 1, eval(c, t, s.exprs[1]), s.loc);
          break;
        }
        case RStmt::K::FieldWrite:
          write_field(c, t, eval(c, t, s.exprs[0]), s.field_next, eval(c, t, s.exprs[1]),
                      s.loc);
          break;
        case RStmt::K::NewNode:
          (thread_base(c, t) + 4)[s.local] = alloc_node(c, t, eval(c, t, s.exprs[0]), s.loc);
          break;
        case RStmt::K::Cas: {
          int32_t cur = c[shared_off_[s.shared]];
          int32_t expect = eval(c, t, s.exprs[0]);
          int32_t* locals = thread_base(c, t) + 4;
          if (cur == expect) {
            write_shared(c, t, s.shared, 0, eval(c, t, s.exprs[1]), s.loc);
            locals[s.local] = 1;
          } else {
            locals[s.local] = 0;
          }
          break;
        }
        case RStmt::K::Retire:
          retire_node(c, t, eval(c, t, s.exprs[0]), s.loc);
          break;
        case RStmt::K::Skip:
          break;
        case RStmt::K::If:
          exec_atomic(c, t, eval(c, t, s.exprs[0]) != 0 ? s.body : s.else_body);
          break;
      }
    }
  }

  int32_t eval(const Config& c, int t, const RExpr& e) const {
    switch (e.k) {
      case RExpr::K::Const: return e.cval;
      case RExpr::K::Local: return thread_base(c, t)[4 + e.idx];
      case RExpr::K::Shared: return c[shared_off_[e.idx]];
      case RExpr::K::ArrayRead: {
        int32_t idx = eval(c, t, e.args[0]);
        check_index(e.idx, idx, e.loc, t);
        return c[shared_off_[e.idx] + idx - 1];
      }
      case RExpr::K::Field: {
        int32_t ref = eval(c, t, e.args[0]);
        check_ref(c, ref, e.loc, t);
        return c[pool_base_ + 3 * ref + (e.field_next ? 1 : 0)];
      }
      case RExpr::K::Tid: return t;
      case RExpr::K::Threads: return b_.threads;
      case RExpr::K::Not: return eval(c, t, e.args[0]) == 0 ? 1 : 0;
      case RExpr::K::Bin: {
        int32_t a = eval(c, t, e.args[0]);
        int32_t b = eval(c, t, e.args[1]);
        switch (e.bin) {
          case ast::BinOp::Add: return a + b;
          case ast::BinOp::Sub: return a - b;
          case ast::BinOp::Eq: return a == b;
          case ast::BinOp::Ne: return a != b;
          case ast::BinOp::Lt: return a < b;
          case ast::BinOp::Le: return a <= b;
          case ast::BinOp::Gt: return a > b;
          case ast::BinOp::Ge: return a >= b;
        }
        return 0;
      }
    }
    return 0;
  }

  void check_index(int var, int32_t idx, ast::SourceLoc loc, int t) const {
    if (idx < 1 || idx > shared_size_[var])
      throw StepError("array index " + std::to_string(idx) + " out of range for '" +
                          p_.shared[var].name + "'",
                      loc, t);
  }

  void check_ref(const Config& c, int32_t ref, ast::SourceLoc loc, int t) const {
    if (ref == kNullRef) throw StepError("null dereference", loc, t);
    if (ref < 0 || ref >= pool_)
      throw StepError("invalid node reference", loc, t);
    if (c[pool_base_ + 3 * ref + 2] == 0)
      throw StepError("dangling reference to a retired node", loc, t);
  }

  void write_shared(Config& c, int t, int var, int elem, int32_t v,
                    ast::SourceLoc loc) const {
    const SharedVar& sv = p_.shared[var];
    if (!sv.is_ref && (v < sv.lo || v > sv.hi))
      throw StepError("value " + std::to_string(v) + " outside range of '" + sv.name + "'",
                      loc, t);
    c[shared_off_[var] + elem] = v;
  }

  void write_field(Config& c, int t, int32_t ref, bool next, int32_t v,
                   ast::SourceLoc loc) const {
    check_ref(c, ref, loc, t);
    c[pool_base_ + 3 * ref + (next ? 1 : 0)] = v;
  }

  int32_t alloc_node(Config& c, int t, int32_t value, ast::SourceLoc loc) const {
    for (int s = 0; s < pool_; ++s) {
      if (c[pool_base_ + 3 * s + 2] == 0) {
        c[pool_base_ + 3 * s + 0] = value;
        c[pool_base_ + 3 * s + 1] = kNullRef;
        c[pool_base_ + 3 * s + 2] = 1;
        return s;
      }
    }
    if (b_.pool_mode == Bounds::PoolMode::Prune) throw detail::PruneMove{};
    throw StepError("node pool exhausted", loc, t);
  }

  void retire_node(Config& c, int t, int32_t ref, ast::SourceLoc loc) const {
    if (ref == kNullRef) throw StepError("retire of null", loc, t);
    if (ref < 0 || ref >= pool_) throw StepError("invalid node reference", loc, t);
    if (c[pool_base_ + 3 * ref + 2] == 0)
      throw StepError("double retire of a node", loc, t);
    c[pool_base_ + 3 * ref + 0] = 0;
    c[pool_base_ + 3 * ref + 1] = kNullRef;
    c[pool_base_ + 3 * ref + 2] = 0;
  }

  Program p_;
  Bounds b_;
  int pool_ = 0;
  std::vector<std::vector<int>> allowed_;  // per thread: callable method indices
  std::vector<int> shared_off_;
  std::vector<int> shared_size_;
  int pool_base_ = 0;
  int threads_base_ = 0;
  int thread_stride_ = 0;
  int total_ = 0;
};

}  // namespace lfcheck
