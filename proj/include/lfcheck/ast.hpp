#pragma once

// Abstract syntax for the modelling language: shared-state declarations plus
// a small imperative method body language with atomic blocks, CAS, and node
// allocation. Produced by parse_model(), checked by validate(), lowered by
// compile().

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lfcheck::ast {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

enum class ExprKind {
  IntLit,    // int_value
  BoolLit,   // int_value 0/1
  NullLit,
  EmptyLit,  // the EMPTY return sentinel
  Tid,       // current thread id, 1-based
  Threads,   // thread count bound
  Var,       // name
  ArrayRead, // name[args[0]]
  FieldRead, // args[0].field
  Unary,     // !args[0]
  Binary,    // args[0] op args[1]
};

enum class BinOp { Add, Sub, Eq, Ne, Lt, Le, Gt, Ge };
enum class Field { Value, Next };

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  SourceLoc loc;
  long long int_value = 0;
  std::string name;
  Field field = Field::Value;
  BinOp bin = BinOp::Add;
  std::vector<Expr> args;
};

enum class StmtKind {
  LocalDecl,  // local target := exprs[0];
  Assign,     // target := exprs[0];
  ArrayWrite, // target[exprs[0]] := exprs[1];
  FieldWrite, // exprs[0].field := exprs[1];
  NewNode,    // target := new_node(exprs[0]);
  Cas,        // target := cas(cas_target, exprs[0], exprs[1]);
  Retire,     // retire(exprs[0]);
  Skip,
  Break,
  Return,     // return; or return exprs[0];
  If,         // if (exprs[0]) body else else_body
  While,      // while (exprs[0]) body
  Atomic,     // atomic { body }
};

struct Stmt {
  StmtKind kind = StmtKind::Skip;
  SourceLoc loc;
  std::string target;
  std::string cas_target;  // shared scalar a Cas operates on
  Field field = Field::Value;
  std::vector<Expr> exprs;
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
};

enum class ArraySize { Fixed, Threads };

struct SharedDecl {
  std::string name;
  SourceLoc loc;
  bool is_ref = false;
  bool is_array = false;
  long long lo = 0, hi = 0;          // int value range
  ArraySize size_kind = ArraySize::Fixed;
  long long size = 0;                // element count when Fixed
  enum class Init { Default, Int, Null, Node } init = Init::Default;
  long long init_value = 0;          // Int value or Node payload
};

struct Method {
  std::string name;
  SourceLoc loc;
  std::optional<std::string> param;
  std::vector<Stmt> body;
};

struct Model {
  std::vector<SharedDecl> shared;
  std::vector<Method> methods;
};

/// True if evaluating `e` reads shared state (shared variables, arrays, or
/// heap node fields). Such reads cost an interleaving step; pure-local
/// expressions are folded into adjacent steps.
inline bool reads_shared(const Expr& e, const Model& m) {
  switch (e.kind) {
    case ExprKind::Var:
      for (const SharedDecl& d : m.shared)
        if (d.name == e.name) return true;
      return false;
    case ExprKind::ArrayRead:
    case ExprKind::FieldRead:
      return true;
    default:
      break;
  }
  for (const Expr& a : e.args)
    if (reads_shared(a, m)) return true;
  return false;
}

}  // namespace lfcheck::ast
