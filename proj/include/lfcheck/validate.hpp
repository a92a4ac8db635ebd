#pragma once

// Semantic checks for parsed models: name resolution, int/ref kind
// consistency, and the structural rules that keep the interleaving
// semantics well defined (atomic blocks stay loop- and return-free, cas
// operand expressions stay pure, loops cannot spin without taking a step).

#include <optional>
#include <string>
#include <vector>

#include "lfcheck/ast.hpp"

namespace lfcheck {

struct Diag {
  ast::SourceLoc loc;
  std::string msg;
};

class ValidateError : public std::runtime_error {
 public:
  ValidateError(ast::SourceLoc loc, const std::string& msg)
      : std::runtime_error("model error at " + std::to_string(loc.line) + ":" +
                           std::to_string(loc.col) + ": " + msg),
        loc_(loc) {}
  ast::SourceLoc loc() const { return loc_; }

 private:
  ast::SourceLoc loc_;
};

namespace detail {

enum class VKind { Int, Ref };

class Validator {
 public:
  explicit Validator(const ast::Model& m) : m_(m) {}

  std::vector<Diag> run() {
    check_decls();
    for (const ast::Method& meth : m_.methods) check_method(meth);
    return std::move(diags_);
  }

 private:
  struct LocalInfo {
    std::string name;
    VKind kind;
  };

  void err(ast::SourceLoc loc, std::string msg) { diags_.push_back({loc, std::move(msg)}); }

  const ast::SharedDecl* shared(const std::string& name) const {
    for (const ast::SharedDecl& d : m_.shared)
      if (d.name == name) return &d;
    return nullptr;
  }

  void check_decls() {
    for (std::size_t i = 0; i < m_.shared.size(); ++i) {
      const ast::SharedDecl& d = m_.shared[i];
      for (std::size_t j = 0; j < i; ++j)
        if (m_.shared[j].name == d.name)
          err(d.loc, "duplicate shared variable '" + d.name + "'");
      if (!d.is_ref && d.lo > d.hi)
        err(d.loc, "empty int range for '" + d.name + "'");
      if (d.is_array && d.size_kind == ast::ArraySize::Fixed && d.size < 1)
        err(d.loc, "array '" + d.name + "' must have at least one element");
      switch (d.init) {
        case ast::SharedDecl::Init::Default:
          if (!d.is_ref && (d.lo > 0 || d.hi < 0))
            err(d.loc, "int '" + d.name + "' defaults to 0 which is outside its range");
          break;
        case ast::SharedDecl::Init::Int:
          if (d.is_ref)
            err(d.loc, "ref '" + d.name + "' cannot be initialized with an int");
          else if (d.is_array)
            err(d.loc, "array '" + d.name + "' cannot take a scalar initializer");
          else if (d.init_value < d.lo || d.init_value > d.hi)
            err(d.loc, "initializer for '" + d.name + "' is outside its range");
          break;
        case ast::SharedDecl::Init::Null:
          if (!d.is_ref || d.is_array)
            err(d.loc, "'null' initializer requires a scalar ref");
          break;
        case ast::SharedDecl::Init::Node:
          if (!d.is_ref || d.is_array)
            err(d.loc, "'node(...)' initializer requires a scalar ref");
          break;
      }
    }
    for (std::size_t i = 0; i < m_.methods.size(); ++i) {
      const ast::Method& meth = m_.methods[i];
      for (std::size_t j = 0; j < i; ++j)
        if (m_.methods[j].name == meth.name)
          err(meth.loc, "duplicate method '" + meth.name + "'");
      // Uppercase method names would collide with the upper-cased .aut label
      // encoding, so require lowercase at the source level.
      for (char c : meth.name)
        if (c >= 'A' && c <= 'Z') {
          err(meth.loc, "method name '" + meth.name + "' must be lowercase");
          break;
        }
      if (shared(meth.name))
        err(meth.loc, "method '" + meth.name + "' collides with a shared variable");
    }
  }

  // --- expression kinds ---------------------------------------------------

  std::optional<VKind> lookup(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      for (const LocalInfo& l : *it)
        if (l.name == name) return l.kind;
    return std::nullopt;
  }

  // Infers Int or Ref; reports and returns nullopt on any inconsistency.
  std::optional<VKind> kind_of(const ast::Expr& e) {
    using ast::ExprKind;
    switch (e.kind) {
      case ExprKind::IntLit:
      case ExprKind::BoolLit:
      case ExprKind::EmptyLit:
      case ExprKind::Tid:
      case ExprKind::Threads:
        return VKind::Int;
      case ExprKind::NullLit:
        return VKind::Ref;
      case ExprKind::Var: {
        if (auto k = lookup(e.name)) return k;
        if (const ast::SharedDecl* d = shared(e.name)) {
          if (d->is_array) {
            err(e.loc, "array '" + e.name + "' used without an index");
            return std::nullopt;
          }
          return d->is_ref ? VKind::Ref : VKind::Int;
        }
        err(e.loc, "unknown variable '" + e.name + "'");
        return std::nullopt;
      }
      case ExprKind::ArrayRead: {
        const ast::SharedDecl* d = shared(e.name);
        if (!d || !d->is_array) {
          err(e.loc, "'" + e.name + "' is not a shared array");
          return std::nullopt;
        }
        require_kind(e.args[0], VKind::Int, "array index");
        return d->is_ref ? VKind::Ref : VKind::Int;
      }
      case ExprKind::FieldRead:
        require_kind(e.args[0], VKind::Ref, "field access base");
        return e.field == ast::Field::Next ? VKind::Ref : VKind::Int;
      case ExprKind::Unary:
        require_kind(e.args[0], VKind::Int, "'!' operand");
        return VKind::Int;
      case ExprKind::Binary: {
        using ast::BinOp;
        if (e.bin == BinOp::Eq || e.bin == BinOp::Ne) {
          auto a = kind_of(e.args[0]);
          auto b = kind_of(e.args[1]);
          if (a && b && *a != *b)
            err(e.loc, "comparison mixes int and ref operands");
          return VKind::Int;
        }
        require_kind(e.args[0], VKind::Int, "arithmetic operand");
        require_kind(e.args[1], VKind::Int, "arithmetic operand");
        return VKind::Int;
      }
    }
    return std::nullopt;
  }

  void require_kind(const ast::Expr& e, VKind want, const char* what) {
    if (auto k = kind_of(e); k && *k != want)
      err(e.loc, std::string(what) + " must be " + (want == VKind::Int ? "an int" : "a ref"));
  }

  void require_pure(const ast::Expr& e, const char* what) {
    if (ast::reads_shared(e, m_))
      err(e.loc, std::string(what) + " must not read shared state");
  }

  // --- statements -----------------------------------------------------------

  struct Ctx {
    bool in_loop = false;
    bool in_atomic = false;
  };

  void check_method(const ast::Method& meth) {
    scope_.clear();
    scope_.push_back({});
    if (meth.param) scope_.back().push_back({*meth.param, VKind::Int});
    check_block(meth.body, Ctx{});
    scope_.clear();
  }

  void check_block(const std::vector<ast::Stmt>& body, Ctx ctx) {
    scope_.push_back({});
    for (const ast::Stmt& s : body) check_stmt(s, ctx);
    scope_.pop_back();
  }

  void check_stmt(const ast::Stmt& s, Ctx ctx) {
    using ast::StmtKind;
    switch (s.kind) {
      case StmtKind::LocalDecl: {
        if (lookup(s.target))
          err(s.loc, "local '" + s.target + "' is already declared");
        if (shared(s.target))
          err(s.loc, "local '" + s.target + "' shadows a shared variable");
        auto k = kind_of(s.exprs[0]);
        scope_.back().push_back({s.target, k.value_or(VKind::Int)});
        break;
      }
      case StmtKind::Assign: {
        auto target = target_kind(s);
        auto rhs = kind_of(s.exprs[0]);
        if (target && rhs && *target != *rhs)
          err(s.loc, "assignment to '" + s.target + "' mixes int and ref");
        break;
      }
      case StmtKind::ArrayWrite: {
        const ast::SharedDecl* d = shared(s.target);
        if (!d || !d->is_array) {
          err(s.loc, "'" + s.target + "' is not a shared array");
          break;
        }
        require_kind(s.exprs[0], VKind::Int, "array index");
        require_kind(s.exprs[1], d->is_ref ? VKind::Ref : VKind::Int, "assigned value");
        break;
      }
      case StmtKind::FieldWrite:
        require_kind(s.exprs[0], VKind::Ref, "field access base");
        require_kind(s.exprs[1], s.field == ast::Field::Next ? VKind::Ref : VKind::Int,
                     "assigned value");
        break;
      case StmtKind::NewNode: {
        auto k = lookup(s.target);
        if (!k)
          err(s.loc, "new_node target '" + s.target + "' must be a declared local");
        else if (*k != VKind::Ref)
          err(s.loc, "new_node target '" + s.target + "' must be a ref local");
        require_kind(s.exprs[0], VKind::Int, "node value");
        require_pure(s.exprs[0], "node value");
        break;
      }
      case StmtKind::Cas: {
        auto k = lookup(s.target);
        if (!k || *k != VKind::Int)
          err(s.loc, "cas result target '" + s.target + "' must be an int local");
        const ast::SharedDecl* d = shared(s.cas_target);
        if (!d || d->is_array) {
          err(s.loc, "cas target '" + s.cas_target + "' must be a shared scalar");
          break;
        }
        VKind want = d->is_ref ? VKind::Ref : VKind::Int;
        require_kind(s.exprs[0], want, "cas expected value");
        require_kind(s.exprs[1], want, "cas new value");
        require_pure(s.exprs[0], "cas expected value");
        require_pure(s.exprs[1], "cas new value");
        break;
      }
      case StmtKind::Retire:
        require_kind(s.exprs[0], VKind::Ref, "retire argument");
        require_pure(s.exprs[0], "retire argument");
        break;
      case StmtKind::Skip:
        break;
      case StmtKind::Break:
        if (!ctx.in_loop) err(s.loc, "'break' outside of a loop");
        if (ctx.in_atomic) err(s.loc, "'break' inside an atomic block");
        break;
      case StmtKind::Return:
        if (ctx.in_atomic) err(s.loc, "'return' inside an atomic block");
        if (!s.exprs.empty()) require_kind(s.exprs[0], VKind::Int, "return value");
        break;
      case StmtKind::If: {
        require_kind(s.exprs[0], VKind::Int, "condition");
        check_block(s.body, ctx);
        check_block(s.else_body, ctx);
        break;
      }
      case StmtKind::While: {
        require_kind(s.exprs[0], VKind::Int, "condition");
        if (s.body.empty()) err(s.loc, "loop body must contain at least one statement");
        if (ctx.in_atomic) err(s.loc, "loops are not allowed inside atomic blocks");
        Ctx inner = ctx;
        inner.in_loop = true;
        check_block(s.body, inner);
        break;
      }
      case StmtKind::Atomic: {
        if (ctx.in_atomic) err(s.loc, "atomic blocks cannot nest");
        Ctx inner = ctx;
        inner.in_atomic = true;
        inner.in_loop = false;
        check_block(s.body, inner);
        break;
      }
    }
  }

  std::optional<VKind> target_kind(const ast::Stmt& s) {
    if (auto k = lookup(s.target)) return k;
    if (const ast::SharedDecl* d = shared(s.target)) {
      if (d->is_array) {
        err(s.loc, "array '" + s.target + "' assigned without an index");
        return std::nullopt;
      }
      return d->is_ref ? VKind::Ref : VKind::Int;
    }
    err(s.loc, "unknown assignment target '" + s.target + "'");
    return std::nullopt;
  }

  const ast::Model& m_;
  std::vector<std::vector<LocalInfo>> scope_;
  std::vector<Diag> diags_;
};

}  // namespace detail

inline std::vector<Diag> validate(const ast::Model& m) {
  return detail::Validator(m).run();
}

inline void validate_or_throw(const ast::Model& m) {
  std::vector<Diag> ds = validate(m);
  if (!ds.empty()) throw ValidateError(ds.front().loc, ds.front().msg);
}

}  // namespace lfcheck
