#pragma once

// Recursive-descent parser for the modelling language. Line comments start
// with //. Reports the first error with line/column.

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfcheck/ast.hpp"

namespace lfcheck {

class ParseError : public std::runtime_error {
 public:
  ParseError(ast::SourceLoc loc, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(loc.line) + ":" +
                           std::to_string(loc.col) + ": " + msg),
        loc_(loc) {}
  ast::SourceLoc loc() const { return loc_; }

 private:
  ast::SourceLoc loc_;
};

namespace detail {

enum class Tok {
  Ident, Int, KwShared, KwMethod, KwLocal, KwIf, KwElse, KwWhile, KwAtomic,
  KwSkip, KwBreak, KwReturn, KwRetire, KwCas, KwNewNode, KwNull, KwEmpty,
  KwTrue, KwFalse, KwTid, KwThreads, KwInt, KwRef, KwNode,
  Assign, Colon, Semi, Comma, Dot, DotDot, LParen, RParen, LBrace, RBrace,
  LBracket, RBracket, Eq, EqEq, NotEq, Le, Ge, Lt, Gt, Plus, Minus, Bang, Eof,
};

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  long long value = 0;
  ast::SourceLoc loc;
};

inline const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Assign: return "':='";
    case Tok::Colon: return "':'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::DotDot: return "'..'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Eof: return "end of input";
    default: return "token";
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }

  Token next() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    cur_ = Token{};
    cur_.loc = {line_, col_};
    if (pos_ >= src_.size()) {
      cur_.kind = Tok::Eof;
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        bump();
      cur_.text = std::string(src_.substr(start, pos_ - start));
      cur_.kind = keyword(cur_.text);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long long v = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        v = v * 10 + (src_[pos_] - '0');
        bump();
      }
      cur_.kind = Tok::Int;
      cur_.value = v;
      return;
    }
    auto two = [&](char a, char b) {
      return c == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
    };
    if (two(':', '=')) { bump(); bump(); cur_.kind = Tok::Assign; return; }
    if (two('=', '=')) { bump(); bump(); cur_.kind = Tok::EqEq; return; }
    if (two('!', '=')) { bump(); bump(); cur_.kind = Tok::NotEq; return; }
    if (two('<', '=')) { bump(); bump(); cur_.kind = Tok::Le; return; }
    if (two('>', '=')) { bump(); bump(); cur_.kind = Tok::Ge; return; }
    if (two('.', '.')) { bump(); bump(); cur_.kind = Tok::DotDot; return; }
    bump();
    switch (c) {
      case ':': cur_.kind = Tok::Colon; return;
      case ';': cur_.kind = Tok::Semi; return;
      case ',': cur_.kind = Tok::Comma; return;
      case '.': cur_.kind = Tok::Dot; return;
      case '(': cur_.kind = Tok::LParen; return;
      case ')': cur_.kind = Tok::RParen; return;
      case '{': cur_.kind = Tok::LBrace; return;
      case '}': cur_.kind = Tok::RBrace; return;
      case '[': cur_.kind = Tok::LBracket; return;
      case ']': cur_.kind = Tok::RBracket; return;
      case '<': cur_.kind = Tok::Lt; return;
      case '>': cur_.kind = Tok::Gt; return;
      case '+': cur_.kind = Tok::Plus; return;
      case '-': cur_.kind = Tok::Minus; return;
      case '!': cur_.kind = Tok::Bang; return;
      case '=': cur_.kind = Tok::Eq; return;
      default:
        throw ParseError(cur_.loc, std::string("unexpected character '") + c + "'");
    }
  }

  static Tok keyword(const std::string& s) {
    if (s == "shared") return Tok::KwShared;
    if (s == "method") return Tok::KwMethod;
    if (s == "local") return Tok::KwLocal;
    if (s == "if") return Tok::KwIf;
    if (s == "else") return Tok::KwElse;
    if (s == "while") return Tok::KwWhile;
    if (s == "atomic") return Tok::KwAtomic;
    if (s == "skip") return Tok::KwSkip;
    if (s == "break") return Tok::KwBreak;
    if (s == "return") return Tok::KwReturn;
    if (s == "retire") return Tok::KwRetire;
    if (s == "cas") return Tok::KwCas;
    if (s == "new_node") return Tok::KwNewNode;
    if (s == "null") return Tok::KwNull;
    if (s == "EMPTY") return Tok::KwEmpty;
    if (s == "true") return Tok::KwTrue;
    if (s == "false") return Tok::KwFalse;
    if (s == "tid") return Tok::KwTid;
    if (s == "threads") return Tok::KwThreads;
    if (s == "int") return Tok::KwInt;
    if (s == "ref") return Tok::KwRef;
    if (s == "node") return Tok::KwNode;
    return Tok::Ident;
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  ast::Model model() {
    ast::Model m;
    while (at(Tok::KwShared)) m.shared.push_back(shared_decl());
    while (at(Tok::KwMethod)) m.methods.push_back(method());
    expect(Tok::Eof, "expected 'shared', 'method', or end of input");
    if (m.methods.empty())
      throw ParseError(lex_.peek().loc, "model declares no methods");
    return m;
  }

 private:
  bool at(Tok k) const { return lex_.peek().kind == k; }

  Token expect(Tok k, const std::string& what) {
    if (!at(k))
      throw ParseError(lex_.peek().loc, what + " (found " + tok_name(lex_.peek().kind) + ")");
    return lex_.next();
  }

  long long signed_int() {
    bool neg = false;
    if (at(Tok::Minus)) {
      lex_.next();
      neg = true;
    }
    Token t = expect(Tok::Int, "expected integer");
    return neg ? -t.value : t.value;
  }

  ast::SharedDecl shared_decl() {
    ast::SharedDecl d;
    d.loc = expect(Tok::KwShared, "expected 'shared'").loc;
    d.name = expect(Tok::Ident, "expected variable name").text;
    expect(Tok::Colon, "expected ':' after variable name");
    if (at(Tok::KwInt)) {
      lex_.next();
      expect(Tok::LBracket, "expected '[' starting an int range");
      d.lo = signed_int();
      expect(Tok::DotDot, "expected '..' in int range");
      d.hi = signed_int();
      expect(Tok::RBracket, "expected ']' closing the int range");
    } else {
      expect(Tok::KwRef, "expected 'int' or 'ref' type");
      d.is_ref = true;
    }
    if (at(Tok::LBracket)) {
      lex_.next();
      d.is_array = true;
      if (at(Tok::KwThreads)) {
        lex_.next();
        d.size_kind = ast::ArraySize::Threads;
      } else {
        d.size_kind = ast::ArraySize::Fixed;
        d.size = signed_int();
      }
      expect(Tok::RBracket, "expected ']' closing the array size");
    }
    if (at(Tok::Eq)) {
      lex_.next();
      if (at(Tok::KwNull)) {
        lex_.next();
        d.init = ast::SharedDecl::Init::Null;
      } else if (at(Tok::KwNode)) {
        lex_.next();
        expect(Tok::LParen, "expected '(' after 'node'");
        d.init = ast::SharedDecl::Init::Node;
        d.init_value = signed_int();
        expect(Tok::RParen, "expected ')' closing node initializer");
      } else {
        d.init = ast::SharedDecl::Init::Int;
        d.init_value = signed_int();
      }
    }
    expect(Tok::Semi, "expected ';' after declaration");
    return d;
  }

  ast::Method method() {
    ast::Method m;
    m.loc = expect(Tok::KwMethod, "expected 'method'").loc;
    m.name = expect(Tok::Ident, "expected method name").text;
    expect(Tok::LParen, "expected '(' after method name");
    if (at(Tok::Ident)) m.param = lex_.next().text;
    expect(Tok::RParen, "expected ')' closing the parameter list");
    m.body = block();
    return m;
  }

  std::vector<ast::Stmt> block() {
    expect(Tok::LBrace, "expected '{'");
    std::vector<ast::Stmt> out;
    while (!at(Tok::RBrace)) out.push_back(stmt());
    lex_.next();
    return out;
  }

  ast::Stmt stmt() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::KwLocal: return local_decl();
      case Tok::KwIf: return if_stmt();
      case Tok::KwWhile: return while_stmt();
      case Tok::KwAtomic: return atomic_stmt();
      case Tok::KwSkip: return simple(ast::StmtKind::Skip);
      case Tok::KwBreak: return simple(ast::StmtKind::Break);
      case Tok::KwReturn: return return_stmt();
      case Tok::KwRetire: return retire_stmt();
      case Tok::Ident: return assign_stmt();
      default:
        throw ParseError(t.loc, std::string("expected a statement (found ") +
                                    tok_name(t.kind) + ")");
    }
  }

  ast::Stmt simple(ast::StmtKind k) {
    ast::Stmt s;
    s.kind = k;
    s.loc = lex_.next().loc;
    expect(Tok::Semi, "expected ';'");
    return s;
  }

  ast::Stmt local_decl() {
    ast::Stmt s;
    s.kind = ast::StmtKind::LocalDecl;
    s.loc = lex_.next().loc;
    s.target = expect(Tok::Ident, "expected local variable name").text;
    expect(Tok::Assign, "expected ':=' in local declaration");
    s.exprs.push_back(expr());
    expect(Tok::Semi, "expected ';'");
    return s;
  }

  ast::Stmt if_stmt() {
    ast::Stmt s;
    s.kind = ast::StmtKind::If;
    s.loc = lex_.next().loc;
    expect(Tok::LParen, "expected '(' after 'if'");
    s.exprs.push_back(expr());
    expect(Tok::RParen, "expected ')' after condition");
    s.body = block();
    if (at(Tok::KwElse)) {
      lex_.next();
      s.else_body = block();
    }
    return s;
  }

  ast::Stmt while_stmt() {
    ast::Stmt s;
    s.kind = ast::StmtKind::While;
    s.loc = lex_.next().loc;
    expect(Tok::LParen, "expected '(' after 'while'");
    s.exprs.push_back(expr());
    expect(Tok::RParen, "expected ')' after condition");
    s.body = block();
    return s;
  }

  ast::Stmt atomic_stmt() {
    ast::Stmt s;
    s.kind = ast::StmtKind::Atomic;
    s.loc = lex_.next().loc;
    s.body = block();
    return s;
  }

  ast::Stmt return_stmt() {
    ast::Stmt s;
    s.kind = ast::StmtKind::Return;
    s.loc = lex_.next().loc;
    if (!at(Tok::Semi)) s.exprs.push_back(expr());
    expect(Tok::Semi, "expected ';' after return");
    return s;
  }

  ast::Stmt retire_stmt() {
    ast::Stmt s;
    s.kind = ast::StmtKind::Retire;
    s.loc = lex_.next().loc;
    expect(Tok::LParen, "expected '(' after 'retire'");
    s.exprs.push_back(expr());
    expect(Tok::RParen, "expected ')' after retire argument");
    expect(Tok::Semi, "expected ';'");
    return s;
  }

  // Statements that begin with an identifier: plain assignment, array or
  // field element assignment, and the cas/new_node result-assignment forms.
  ast::Stmt assign_stmt() {
    Token name = lex_.next();
    ast::Stmt s;
    s.loc = name.loc;
    if (at(Tok::LBracket)) {
      lex_.next();
      s.kind = ast::StmtKind::ArrayWrite;
      s.target = name.text;
      s.exprs.push_back(expr());
      expect(Tok::RBracket, "expected ']' after array index");
      expect(Tok::Assign, "expected ':=' in array assignment");
      s.exprs.push_back(expr());
      expect(Tok::Semi, "expected ';'");
      return s;
    }
    if (at(Tok::Dot)) {
      lex_.next();
      s.kind = ast::StmtKind::FieldWrite;
      s.field = field_name();
      ast::Expr base;
      base.kind = ast::ExprKind::Var;
      base.loc = name.loc;
      base.name = name.text;
      s.exprs.push_back(std::move(base));
      expect(Tok::Assign, "expected ':=' in field assignment");
      s.exprs.push_back(expr());
      expect(Tok::Semi, "expected ';'");
      return s;
    }
    expect(Tok::Assign, "expected ':=' in assignment");
    s.target = name.text;
    if (at(Tok::KwCas)) {
      lex_.next();
      s.kind = ast::StmtKind::Cas;
      expect(Tok::LParen, "expected '(' after 'cas'");
      s.cas_target = expect(Tok::Ident, "expected shared variable as cas target").text;
      expect(Tok::Comma, "expected ',' after cas target");
      s.exprs.push_back(expr());
      expect(Tok::Comma, "expected ',' after cas expected value");
      s.exprs.push_back(expr());
      expect(Tok::RParen, "expected ')' closing cas");
    } else if (at(Tok::KwNewNode)) {
      lex_.next();
      s.kind = ast::StmtKind::NewNode;
      expect(Tok::LParen, "expected '(' after 'new_node'");
      s.exprs.push_back(expr());
      expect(Tok::RParen, "expected ')' closing new_node");
    } else {
      s.kind = ast::StmtKind::Assign;
      s.exprs.push_back(expr());
    }
    expect(Tok::Semi, "expected ';'");
    return s;
  }

  ast::Field field_name() {
    Token f = expect(Tok::Ident, "expected field name 'value' or 'next'");
    if (f.text == "value") return ast::Field::Value;
    if (f.text == "next") return ast::Field::Next;
    throw ParseError(f.loc, "unknown field '" + f.text + "' (expected 'value' or 'next')");
  }

  ast::Expr expr() { return equality(); }

  ast::Expr equality() {
    ast::Expr lhs = relational();
    while (at(Tok::EqEq) || at(Tok::NotEq)) {
      Token op = lex_.next();
      ast::Expr e;
      e.kind = ast::ExprKind::Binary;
      e.loc = op.loc;
      e.bin = op.kind == Tok::EqEq ? ast::BinOp::Eq : ast::BinOp::Ne;
      e.args.push_back(std::move(lhs));
      e.args.push_back(relational());
      lhs = std::move(e);
    }
    return lhs;
  }

  ast::Expr relational() {
    ast::Expr lhs = additive();
    while (at(Tok::Lt) || at(Tok::Le) || at(Tok::Gt) || at(Tok::Ge)) {
      Token op = lex_.next();
      ast::Expr e;
      e.kind = ast::ExprKind::Binary;
      e.loc = op.loc;
      e.bin = op.kind == Tok::Lt   ? ast::BinOp::Lt
              : op.kind == Tok::Le ? ast::BinOp::Le
              : op.kind == Tok::Gt ? ast::BinOp::Gt
                                   : ast::BinOp::Ge;
      e.args.push_back(std::move(lhs));
      e.args.push_back(additive());
      lhs = std::move(e);
    }
    return lhs;
  }

  ast::Expr additive() {
    ast::Expr lhs = unary();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      Token op = lex_.next();
      ast::Expr e;
      e.kind = ast::ExprKind::Binary;
      e.loc = op.loc;
      e.bin = op.kind == Tok::Plus ? ast::BinOp::Add : ast::BinOp::Sub;
      e.args.push_back(std::move(lhs));
      e.args.push_back(unary());
      lhs = std::move(e);
    }
    return lhs;
  }

  ast::Expr unary() {
    if (at(Tok::Bang)) {
      Token op = lex_.next();
      ast::Expr e;
      e.kind = ast::ExprKind::Unary;
      e.loc = op.loc;
      e.args.push_back(unary());
      return e;
    }
    return primary();
  }

  ast::Expr primary() {
    const Token t = lex_.next();
    ast::Expr e;
    e.loc = t.loc;
    switch (t.kind) {
      case Tok::Int:
        e.kind = ast::ExprKind::IntLit;
        e.int_value = t.value;
        return postfix(std::move(e));
      case Tok::Minus: {
        Token v = expect(Tok::Int, "expected integer after unary '-'");
        e.kind = ast::ExprKind::IntLit;
        e.int_value = -v.value;
        return e;
      }
      case Tok::KwNull: e.kind = ast::ExprKind::NullLit; return e;
      case Tok::KwEmpty: e.kind = ast::ExprKind::EmptyLit; return e;
      case Tok::KwTrue:
        e.kind = ast::ExprKind::BoolLit;
        e.int_value = 1;
        return e;
      case Tok::KwFalse:
        e.kind = ast::ExprKind::BoolLit;
        e.int_value = 0;
        return e;
      case Tok::KwTid: e.kind = ast::ExprKind::Tid; return e;
      case Tok::KwThreads: e.kind = ast::ExprKind::Threads; return e;
      case Tok::Ident: {
        e.kind = ast::ExprKind::Var;
        e.name = t.text;
        if (at(Tok::LBracket)) {
          lex_.next();
          ast::Expr idx = expr();
          expect(Tok::RBracket, "expected ']' after array index");
          ast::Expr rd;
          rd.kind = ast::ExprKind::ArrayRead;
          rd.loc = t.loc;
          rd.name = t.text;
          rd.args.push_back(std::move(idx));
          return postfix(std::move(rd));
        }
        return postfix(std::move(e));
      }
      case Tok::LParen: {
        ast::Expr inner = expr();
        expect(Tok::RParen, "expected ')'");
        return postfix(std::move(inner));
      }
      default:
        throw ParseError(t.loc, std::string("expected an expression (found ") +
                                    tok_name(t.kind) + ")");
    }
  }

  ast::Expr postfix(ast::Expr base) {
    while (at(Tok::Dot)) {
      Token dot = lex_.next();
      ast::Expr e;
      e.kind = ast::ExprKind::FieldRead;
      e.loc = dot.loc;
      e.field = field_name();
      e.args.push_back(std::move(base));
      base = std::move(e);
    }
    return base;
  }

  Lexer lex_;
};

}  // namespace detail

inline ast::Model parse_model(std::string_view source) {
  return detail::Parser(source).model();
}

}  // namespace lfcheck
