#pragma once

// Lowers a validated model to per-method control-flow graphs over resolved
// micro-ops. Each node is statically classified as stepping (costs one
// interleaving step when executed) or free (folded into the preceding step).
//
// The classification defines the interleaving granularity: anything that
// touches shared state (shared scalars, arrays, heap node fields), plus
// skip, cas, new_node, retire, atomic blocks, and returns, is a step of its
// own; pure-local computation and structural control flow are free.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfcheck/ast.hpp"
#include "lfcheck/validate.hpp"

namespace lfcheck {

/// Runtime encoding of the EMPTY sentinel in int-valued expressions.
constexpr int32_t kEmptyValue = -1000000;
/// Runtime encoding of null refs.
constexpr int32_t kNullRef = -1;

/// Resolved expression: variables are local slots or shared indices.
struct RExpr {
  enum class K { Const, Local, Shared, ArrayRead, Field, Tid, Threads, Not, Bin };
  K k = K::Const;
  ast::SourceLoc loc;
  int32_t cval = 0;                 // Const
  int idx = -1;                     // Local slot / Shared variable index
  bool field_next = false;          // Field: next (true) or value (false)
  ast::BinOp bin = ast::BinOp::Add; // Bin
  std::vector<RExpr> args;
};

/// Resolved statement used inside atomic blocks (loop/return/break free).
struct RStmt {
  enum class K { AssignLocal, AssignShared, ArrayWrite, FieldWrite, NewNode, Cas, Retire, Skip, If };
  K k = K::Skip;
  ast::SourceLoc loc;
  int local = -1;
  int shared = -1;
  bool field_next = false;
  std::vector<RExpr> exprs;
  std::vector<RStmt> body, else_body;
};

enum class OpKind { AssignLocal, AssignShared, ArrayWrite, FieldWrite, NewNode, Cas, Retire, Skip, Atomic, Return, Branch, Goto };

struct CfgNode {
  OpKind kind = OpKind::Skip;
  bool stepping = true;
  ast::SourceLoc loc;
  int local = -1;           // AssignLocal / NewNode / Cas result slot
  int shared = -1;          // AssignShared / ArrayWrite / Cas shared index
  bool field_next = false;  // FieldWrite
  bool has_value = false;   // Return carries a value
  std::vector<RExpr> exprs; // AssignLocal/AssignShared: [rhs]; ArrayWrite: [idx, rhs];
                            // FieldWrite: [base, rhs]; NewNode: [val]; Cas: [expect, new];
                            // Retire: [arg]; Return: [val] when has_value; Branch: [cond]
  std::vector<RStmt> atomic;
  uint32_t next = 0;        // fallthrough / branch-true target
  uint32_t next_else = 0;   // branch-false target
};

struct SharedVar {
  std::string name;
  bool is_ref = false;
  bool is_array = false;
  int32_t lo = 0, hi = 0;
  ast::ArraySize size_kind = ast::ArraySize::Fixed;
  int fixed_size = 1;  // element count when Fixed (scalars: 1)
  ast::SharedDecl::Init init = ast::SharedDecl::Init::Default;
  int32_t init_value = 0;
};

struct CompiledMethod {
  std::string name;
  bool has_param = false;  // param lives in local slot 0
  int num_locals = 0;
  uint32_t entry = 0;
  std::vector<CfgNode> nodes;
};

struct Program {
  std::vector<SharedVar> shared;
  std::vector<CompiledMethod> methods;
  int max_locals = 0;

  int method_index(const std::string& name) const {
    for (std::size_t i = 0; i < methods.size(); ++i)
      if (methods[i].name == name) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

inline bool rexpr_reads_shared(const RExpr& e) {
  switch (e.k) {
    case RExpr::K::Shared:
    case RExpr::K::ArrayRead:
    case RExpr::K::Field:
      return true;
    default:
      break;
  }
  for (const RExpr& a : e.args)
    if (rexpr_reads_shared(a)) return true;
  return false;
}

class Lowerer {
 public:
  explicit Lowerer(const ast::Model& m) : m_(m) {}

  Program run() {
    Program p;
    for (const ast::SharedDecl& d : m_.shared) {
      SharedVar v;
      v.name = d.name;
      v.is_ref = d.is_ref;
      v.is_array = d.is_array;
      v.lo = static_cast<int32_t>(d.lo);
      v.hi = static_cast<int32_t>(d.hi);
      v.size_kind = d.size_kind;
      v.fixed_size = d.is_array && d.size_kind == ast::ArraySize::Fixed
                         ? static_cast<int>(d.size)
                         : 1;
      v.init = d.init;
      v.init_value = static_cast<int32_t>(d.init_value);
      p.shared.push_back(std::move(v));
    }
    shared_ = &p.shared;
    for (const ast::Method& meth : m_.methods) p.methods.push_back(lower_method(meth));
    for (const CompiledMethod& cm : p.methods)
      if (cm.num_locals > p.max_locals) p.max_locals = cm.num_locals;
    return p;
  }

 private:
  struct Frame {
    std::vector<std::pair<std::string, int>> names;
  };

  int shared_index(const std::string& name) const {
    for (std::size_t i = 0; i < shared_->size(); ++i)
      if ((*shared_)[i].name == name) return static_cast<int>(i);
    return -1;
  }

  int local_slot(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      for (const auto& [n, slot] : it->names)
        if (n == name) return slot;
    return -1;
  }

  CompiledMethod lower_method(const ast::Method& meth) {
    cur_ = CompiledMethod{};
    cur_.name = meth.name;
    scope_.clear();
    scope_.push_back({});
    if (meth.param) {
      cur_.has_param = true;
      scope_.back().names.emplace_back(*meth.param, 0);
      cur_.num_locals = 1;
    }

    // Implicit void return at the end of the body.
    CfgNode ret;
    ret.kind = OpKind::Return;
    ret.stepping = true;
    ret.loc = meth.loc;
    uint32_t implicit = add(std::move(ret));

    cur_.entry = lower_block(meth.body, implicit);
    scope_.clear();
    return std::move(cur_);
  }

  uint32_t add(CfgNode n) {
    cur_.nodes.push_back(std::move(n));
    return static_cast<uint32_t>(cur_.nodes.size() - 1);
  }

  // Lowers statements back to front so each one knows its continuation.
  // Slots for the block's locals are registered up front; the validator has
  // already ruled out use before declaration.
  uint32_t lower_block(const std::vector<ast::Stmt>& body, uint32_t cont) {
    scope_.push_back({});
    for (const ast::Stmt& s : body)
      if (s.kind == ast::StmtKind::LocalDecl)
        scope_.back().names.emplace_back(s.target, cur_.num_locals++);
    uint32_t next = cont;
    for (auto it = body.rbegin(); it != body.rend(); ++it) next = lower_stmt(*it, next);
    scope_.pop_back();
    return next;
  }

  uint32_t lower_stmt(const ast::Stmt& s, uint32_t cont) {
    using ast::StmtKind;
    CfgNode n;
    n.loc = s.loc;
    n.next = cont;
    switch (s.kind) {
      case StmtKind::LocalDecl:
      case StmtKind::Assign: {
        int slot = local_slot(s.target);
        RExpr rhs = lower_expr(s.exprs[0]);
        if (slot >= 0) {
          n.kind = OpKind::AssignLocal;
          n.local = slot;
          n.stepping = rexpr_reads_shared(rhs);
        } else {
          n.kind = OpKind::AssignShared;
          n.shared = shared_index(s.target);
          n.stepping = true;
        }
        n.exprs.push_back(std::move(rhs));
        return add(std::move(n));
      }
      case StmtKind::ArrayWrite:
        n.kind = OpKind::ArrayWrite;
        n.shared = shared_index(s.target);
        n.exprs.push_back(lower_expr(s.exprs[0]));
        n.exprs.push_back(lower_expr(s.exprs[1]));
        return add(std::move(n));
      case StmtKind::FieldWrite:
        n.kind = OpKind::FieldWrite;
        n.field_next = s.field == ast::Field::Next;
        n.exprs.push_back(lower_expr(s.exprs[0]));
        n.exprs.push_back(lower_expr(s.exprs[1]));
        return add(std::move(n));
      case StmtKind::NewNode:
        n.kind = OpKind::NewNode;
        n.local = local_slot(s.target);
        n.exprs.push_back(lower_expr(s.exprs[0]));
        return add(std::move(n));
      case StmtKind::Cas:
        n.kind = OpKind::Cas;
        n.local = local_slot(s.target);
        n.shared = shared_index(s.cas_target);
        n.exprs.push_back(lower_expr(s.exprs[0]));
        n.exprs.push_back(lower_expr(s.exprs[1]));
        return add(std::move(n));
      case StmtKind::Retire:
        n.kind = OpKind::Retire;
        n.exprs.push_back(lower_expr(s.exprs[0]));
        return add(std::move(n));
      case StmtKind::Skip:
        n.kind = OpKind::Skip;
        return add(std::move(n));
      case StmtKind::Break:
        n.kind = OpKind::Goto;
        n.stepping = false;
        n.next = loop_exit_.back();
        return add(std::move(n));
      case StmtKind::Return:
        n.kind = OpKind::Return;
        if (!s.exprs.empty()) {
          n.has_value = true;
          n.exprs.push_back(lower_expr(s.exprs[0]));
        }
        return add(std::move(n));
      case StmtKind::If: {
        n.kind = OpKind::Branch;
        RExpr cond = lower_expr(s.exprs[0]);
        n.stepping = rexpr_reads_shared(cond);
        n.exprs.push_back(std::move(cond));
        n.next = lower_block(s.body, cont);
        n.next_else = lower_block(s.else_body, cont);
        return add(std::move(n));
      }
      case StmtKind::While: {
        RExpr cond = lower_expr(s.exprs[0]);
        // Reserve the header now so the body can loop back to it.
        uint32_t header = add(CfgNode{});
        loop_exit_.push_back(cont);
        uint32_t body_entry = lower_block(s.body, header);
        loop_exit_.pop_back();
        CfgNode& h = cur_.nodes[header];
        h.loc = s.loc;
        if (cond.k == RExpr::K::Const) {
          // A constant condition never costs a step to evaluate.
          h.kind = OpKind::Goto;
          h.stepping = false;
          h.next = cond.cval != 0 ? body_entry : cont;
        } else {
          h.kind = OpKind::Branch;
          h.stepping = rexpr_reads_shared(cond);
          h.exprs.push_back(std::move(cond));
          h.next = body_entry;
          h.next_else = cont;
        }
        return header;
      }
      case StmtKind::Atomic: {
        n.kind = OpKind::Atomic;
        scope_.push_back({});
        n.atomic = lower_rstmts(s.body);
        scope_.pop_back();
        return add(std::move(n));
      }
    }
    throw std::logic_error("unhandled statement in lowering");
  }

  std::vector<RStmt> lower_rstmts(const std::vector<ast::Stmt>& body) {
    std::vector<RStmt> out;
    for (const ast::Stmt& s : body) {
      RStmt r;
      r.loc = s.loc;
      switch (s.kind) {
        case ast::StmtKind::LocalDecl:
          scope_.back().names.emplace_back(s.target, cur_.num_locals++);
          r.k = RStmt::K::AssignLocal;
          r.local = local_slot(s.target);
          r.exprs.push_back(lower_expr(s.exprs[0]));
          break;
        case ast::StmtKind::Assign: {
          int slot = local_slot(s.target);
          if (slot >= 0) {
            r.k = RStmt::K::AssignLocal;
            r.local = slot;
          } else {
            r.k = RStmt::K::AssignShared;
            r.shared = shared_index(s.target);
          }
          r.exprs.push_back(lower_expr(s.exprs[0]));
          break;
        }
        case ast::StmtKind::ArrayWrite:
          r.k = RStmt::K::ArrayWrite;
          r.shared = shared_index(s.target);
          r.exprs.push_back(lower_expr(s.exprs[0]));
          r.exprs.push_back(lower_expr(s.exprs[1]));
          break;
        case ast::StmtKind::FieldWrite:
          r.k = RStmt::K::FieldWrite;
          r.field_next = s.field == ast::Field::Next;
          r.exprs.push_back(lower_expr(s.exprs[0]));
          r.exprs.push_back(lower_expr(s.exprs[1]));
          break;
        case ast::StmtKind::NewNode:
          r.k = RStmt::K::NewNode;
          r.local = local_slot(s.target);
          r.exprs.push_back(lower_expr(s.exprs[0]));
          break;
        case ast::StmtKind::Cas:
          r.k = RStmt::K::Cas;
          r.local = local_slot(s.target);
          r.shared = shared_index(s.cas_target);
          r.exprs.push_back(lower_expr(s.exprs[0]));
          r.exprs.push_back(lower_expr(s.exprs[1]));
          break;
        case ast::StmtKind::Retire:
          r.k = RStmt::K::Retire;
          r.exprs.push_back(lower_expr(s.exprs[0]));
          break;
        case ast::StmtKind::If:
          r.k = RStmt::K::If;
          r.exprs.push_back(lower_expr(s.exprs[0]));
          scope_.push_back({});
          r.body = lower_rstmts(s.body);
          scope_.pop_back();
          scope_.push_back({});
          r.else_body = lower_rstmts(s.else_body);
          scope_.pop_back();
          break;
        case ast::StmtKind::Skip:
          r.k = RStmt::K::Skip;
          break;
        default:
          throw std::logic_error("statement not allowed inside atomic survived validation");
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  RExpr lower_expr(const ast::Expr& e) {
    using ast::ExprKind;
    RExpr r;
    r.loc = e.loc;
    switch (e.kind) {
      case ExprKind::IntLit:
      case ExprKind::BoolLit:
        r.k = RExpr::K::Const;
        r.cval = static_cast<int32_t>(e.int_value);
        return r;
      case ExprKind::NullLit:
        r.k = RExpr::K::Const;
        r.cval = kNullRef;
        return r;
      case ExprKind::EmptyLit:
        r.k = RExpr::K::Const;
        r.cval = kEmptyValue;
        return r;
      case ExprKind::Tid:
        r.k = RExpr::K::Tid;
        return r;
      case ExprKind::Threads:
        r.k = RExpr::K::Threads;
        return r;
      case ExprKind::Var: {
        int slot = local_slot(e.name);
        if (slot >= 0) {
          r.k = RExpr::K::Local;
          r.idx = slot;
        } else {
          r.k = RExpr::K::Shared;
          r.idx = shared_index(e.name);
        }
        return r;
      }
      case ExprKind::ArrayRead:
        r.k = RExpr::K::ArrayRead;
        r.idx = shared_index(e.name);
        r.args.push_back(lower_expr(e.args[0]));
        return r;
      case ExprKind::FieldRead:
        r.k = RExpr::K::Field;
        r.field_next = e.field == ast::Field::Next;
        r.args.push_back(lower_expr(e.args[0]));
        return r;
      case ExprKind::Unary:
        r.k = RExpr::K::Not;
        r.args.push_back(lower_expr(e.args[0]));
        return r;
      case ExprKind::Binary:
        r.k = RExpr::K::Bin;
        r.bin = e.bin;
        r.args.push_back(lower_expr(e.args[0]));
        r.args.push_back(lower_expr(e.args[1]));
        return r;
    }
    throw std::logic_error("unhandled expression in lowering");
  }

  const ast::Model& m_;
  const std::vector<SharedVar>* shared_ = nullptr;
  CompiledMethod cur_;
  std::vector<Frame> scope_;
  std::vector<uint32_t> loop_exit_;
};

}  // namespace detail

/// Validates and lowers a model. Throws ValidateError on semantic errors.
inline Program compile(const ast::Model& m) {
  validate_or_throw(m);
  return detail::Lowerer(m).run();
}

}  // namespace lfcheck
