// Copyright 2026 The invar-opt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "invar/moo/parser.h"

#include <cctype>
#include <charconv>
#include <set>

#include "invar/diagnostic.h"
#include "invar/ir.h"

namespace invar::moo {

std::string TypeRef::to_string() const {
  switch (kind) {
    case Kind::kVoid:
      return "void";
    case Kind::kInt:
      return "int";
    case Kind::kPtr:
      return pointee + "*";
    case Kind::kNull:
      return "null";
  }
  return "?";
}

const ClassDecl* SourceProgram::find_class(const std::string& n) const {
  for (const ClassDecl& c : classes) {
    if (c.name == n) return &c;
  }
  return nullptr;
}

const UnionDecl* SourceProgram::find_union(const std::string& n) const {
  for (const UnionDecl& u : unions) {
    if (u.name == n) return &u;
  }
  return nullptr;
}

const FunctionDecl* SourceProgram::find_function(const std::string& n) const {
  for (const FunctionDecl& f : functions) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

const FunctionDecl* SourceProgram::find_external(const std::string& n) const {
  for (const FunctionDecl& f : externals) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

const MethodDecl* SourceProgram::find_method(const std::string& cls,
                                             const std::string& method,
                                             const ClassDecl** owner) const {
  const ClassDecl* c = find_class(cls);
  int guard = 0;
  while (c && guard++ < 1000) {
    for (const MethodDecl& m : c->methods) {
      if (m.name == method) {
        if (owner) *owner = c;
        return &m;
      }
    }
    c = c->base ? find_class(*c->base) : nullptr;
  }
  return nullptr;
}

bool SourceProgram::derives_from(const std::string& cls,
                                 const std::string& base) const {
  const ClassDecl* c = find_class(cls);
  int guard = 0;
  while (c && guard++ < 1000) {
    if (c->name == base) return true;
    c = c->base ? find_class(*c->base) : nullptr;
  }
  return false;
}

const ClassDecl* SourceProgram::dtor_owner(const std::string& cls) const {
  const ClassDecl* c = find_class(cls);
  int guard = 0;
  while (c && guard++ < 1000) {
    if (c->dtor) return c;
    c = c->base ? find_class(*c->base) : nullptr;
  }
  return nullptr;
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { kIdent, kInt, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  std::int64_t value = 0;
  SourcePos pos;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto bump = [&]() {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump();
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') bump();
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      SourcePos start{line, col};
      bump();
      bump();
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) bump();
      if (i + 1 >= src.size()) {
        throw SyntaxError(start.line, start.col, "unterminated comment");
      }
      bump();
      bump();
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        ++j;
      }
      t.kind = Tok::kIdent;
      t.text = std::string(src.substr(i, j - i));
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::kInt;
      t.text = std::string(src.substr(i, j - i));
      auto [p, ec] = std::from_chars(src.data() + i, src.data() + j, t.value);
      if (ec != std::errc()) throw SyntaxError(line, col, "integer out of range");
    } else {
      static constexpr std::string_view kTwo[] = {"->", "==", "!=", "<=", ">="};
      t.kind = Tok::kPunct;
      for (std::string_view two : kTwo) {
        if (src.substr(i, 2) == two) t.text = std::string(two);
      }
      if (t.text.empty()) {
        if (std::string_view("{}();,:*+-=<>").find(c) == std::string_view::npos) {
          throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, c);
      }
    }
    for (std::size_t k = 0; k < t.text.size(); ++k) bump();
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = {line, col};
  end.text = "end of input";
  out.push_back(std::move(end));
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  SourceProgram parse() {
    SourceProgram p;
    while (peek().kind != Tok::kEnd) {
      if (is_kw("class") || is_kw("struct")) {
        p.classes.push_back(parse_class());
      } else if (is_kw("union")) {
        p.unions.push_back(parse_union());
      } else if (is_kw("extern")) {
        next();
        FunctionDecl f = parse_signature();
        expect(";");
        p.externals.push_back(std::move(f));
      } else {
        FunctionDecl f = parse_signature();
        f.body = parse_block();
        p.functions.push_back(std::move(f));
      }
    }
    return p;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void error(const std::string& msg) const {
    throw SyntaxError(peek().pos.line, peek().pos.col, msg);
  }
  bool is_kw(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kIdent && peek(ahead).text == kw;
  }
  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kPunct && peek(ahead).text == p;
  }
  void expect(std::string_view p) {
    if (!is_punct(p)) {
      error("expected '" + std::string(p) + "', found '" + peek().text + "'");
    }
    next();
  }
  bool accept(std::string_view p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }
  std::string ident(std::string_view what) {
    if (peek().kind != Tok::kIdent) {
      error("expected " + std::string(what) + ", found '" + peek().text + "'");
    }
    return next().text;
  }

  TypeRef parse_type() {
    std::string n = ident("type");
    if (n == "void") return TypeRef::Void();
    if (n == "int") return TypeRef::Int();
    expect("*");
    return TypeRef::Ptr(n);
  }

  std::vector<ParamDecl> parse_params() {
    std::vector<ParamDecl> ps;
    expect("(");
    if (!is_punct(")")) {
      do {
        ParamDecl p;
        p.type = parse_type();
        if (p.type.kind == TypeRef::Kind::kVoid) error("parameter of type void");
        p.name = ident("parameter name");
        ps.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    return ps;
  }

  FunctionDecl parse_signature() {
    FunctionDecl f;
    f.pos = peek().pos;
    f.ret = parse_type();
    f.name = ident("function name");
    f.params = parse_params();
    return f;
  }

  ClassDecl parse_class() {
    next();
    ClassDecl c;
    c.pos = peek().pos;
    c.name = ident("class name");
    if (accept(":")) c.base = ident("base class name");
    expect("{");
    while (!accept("}")) {
      if (peek().kind == Tok::kEnd) error("expected '}'");
      parse_member(c);
    }
    accept(";");
    return c;
  }

  void parse_member(ClassDecl& c) {
    SourcePos pos = peek().pos;
    bool is_virtual = false;
    bool is_inline = false;
    bool is_extern = false;
    while (is_kw("virtual") || is_kw("inline") || is_kw("extern")) {
      std::string kw = next().text;
      if (kw == "virtual") is_virtual = true;
      if (kw == "inline") is_inline = true;
      if (kw == "extern") is_extern = true;
    }
    if (is_inline && is_extern) error("method cannot be both inline and extern");
    if (is_kw("ctor") || is_kw("dtor")) {
      bool ctor = next().text == "ctor";
      if (is_virtual) error("constructors and destructors cannot be virtual");
      expect("(");
      expect(")");
      SpecialMember s;
      s.pos = pos;
      if (accept(";")) {
        if (is_inline) error("inline member requires a body");
      } else {
        if (is_extern) error("extern member cannot have a body");
        s.defined = true;
        s.body = parse_block();
      }
      auto& slot = ctor ? c.ctor : c.dtor;
      if (slot) {
        throw SyntaxError(pos.line, pos.col,
                          std::string("duplicate ") + (ctor ? "constructor" : "destructor"));
      }
      slot = std::move(s);
      return;
    }
    if (is_kw("int") && peek(1).kind == Tok::kIdent && is_punct(";", 2)) {
      if (is_virtual || is_inline || is_extern) error("field cannot carry method qualifiers");
      next();
      c.fields.push_back(next().text);
      next();
      return;
    }
    MethodDecl m;
    m.pos = pos;
    m.ret = parse_type();
    m.name = ident("method name");
    m.params = parse_params();
    m.is_virtual = is_virtual;
    m.is_inline = is_inline;
    if (accept(";")) {
      if (is_inline) {
        throw SyntaxError(pos.line, pos.col, "inline method '" + m.name + "' requires a body");
      }
    } else {
      if (is_extern) error("extern method cannot have a body");
      m.defined = true;
      m.body = parse_block();
    }
    c.methods.push_back(std::move(m));
  }

  UnionDecl parse_union() {
    next();
    UnionDecl u;
    u.pos = peek().pos;
    u.name = ident("union name");
    expect("{");
    while (!accept("}")) {
      u.alternatives.push_back(ident("class name"));
      expect(";");
    }
    accept(";");
    return u;
  }

  std::vector<Stmt> parse_block() {
    expect("{");
    std::vector<Stmt> out;
    while (!accept("}")) {
      if (peek().kind == Tok::kEnd) error("expected '}'");
      out.push_back(parse_stmt());
    }
    return out;
  }

  Cond parse_cond() {
    Cond c;
    c.pos = peek().pos;
    c.lhs = parse_expr();
    static const std::pair<std::string_view, Cond::Op> kOps[] = {
        {"==", Cond::Op::kEq}, {"!=", Cond::Op::kNe}, {"<", Cond::Op::kLt},
        {">", Cond::Op::kGt},  {"<=", Cond::Op::kLe}, {">=", Cond::Op::kGe}};
    bool found = false;
    for (auto [text, op] : kOps) {
      if (is_punct(text)) {
        next();
        c.op = op;
        found = true;
        break;
      }
    }
    if (!found) error("expected comparison operator");
    c.rhs = parse_expr();
    return c;
  }

  Stmt parse_stmt() {
    Stmt s;
    s.pos = peek().pos;
    if (is_kw("if")) {
      next();
      s.kind = Stmt::Kind::kIf;
      expect("(");
      s.cond = parse_cond();
      expect(")");
      s.body = parse_block();
      if (is_kw("else")) {
        next();
        if (is_kw("if")) {
          s.else_body.push_back(parse_stmt());
        } else {
          s.else_body = parse_block();
        }
      }
      return s;
    }
    if (is_kw("while")) {
      next();
      s.kind = Stmt::Kind::kWhile;
      expect("(");
      s.cond = parse_cond();
      expect(")");
      s.body = parse_block();
      return s;
    }
    if (is_kw("return")) {
      next();
      s.kind = Stmt::Kind::kReturn;
      if (!is_punct(";")) s.exprs.push_back(parse_expr());
      expect(";");
      return s;
    }
    if (is_kw("delete")) {
      next();
      s.kind = Stmt::Kind::kDelete;
      s.exprs.push_back(parse_expr());
      expect(";");
      return s;
    }
    bool decl = (is_kw("int") && peek(1).kind == Tok::kIdent) ||
                (peek().kind == Tok::kIdent && is_punct("*", 1) &&
                 peek(2).kind == Tok::kIdent && is_punct("=", 3));
    if (decl) {
      s.kind = Stmt::Kind::kDecl;
      s.decl_type = parse_type();
      s.name = ident("variable name");
      expect("=");
      s.exprs.push_back(parse_expr());
      expect(";");
      return s;
    }
    if (peek().kind == Tok::kIdent && is_punct("=", 1)) {
      s.kind = Stmt::Kind::kAssign;
      s.name = next().text;
      next();
      s.exprs.push_back(parse_expr());
      expect(";");
      return s;
    }
    Expr e = parse_expr();
    if (accept("=")) {
      if (e.kind != Expr::Kind::kField) {
        throw SyntaxError(s.pos.line, s.pos.col, "invalid assignment target");
      }
      s.kind = Stmt::Kind::kFieldStore;
      s.name = e.name;
      s.exprs.push_back(std::move(e.args[0]));
      s.exprs.push_back(parse_expr());
      expect(";");
      return s;
    }
    s.kind = Stmt::Kind::kExpr;
    s.exprs.push_back(std::move(e));
    expect(";");
    return s;
  }

  Expr parse_expr() {
    Expr lhs = parse_mul();
    while (is_punct("+") || is_punct("-")) {
      Expr b;
      b.kind = Expr::Kind::kBinary;
      b.pos = peek().pos;
      b.op = next().text[0];
      b.args.push_back(std::move(lhs));
      b.args.push_back(parse_mul());
      lhs = std::move(b);
    }
    return lhs;
  }

  Expr parse_mul() {
    Expr lhs = parse_unary();
    while (is_punct("*")) {
      Expr b;
      b.kind = Expr::Kind::kBinary;
      b.pos = peek().pos;
      b.op = next().text[0];
      b.args.push_back(std::move(lhs));
      b.args.push_back(parse_unary());
      lhs = std::move(b);
    }
    return lhs;
  }

  Expr parse_unary() {
    if (is_punct("-")) {
      Expr e;
      e.kind = Expr::Kind::kNeg;
      e.pos = next().pos;
      e.args.push_back(parse_unary());
      return e;
    }
    return parse_postfix();
  }

  std::vector<Expr> parse_args() {
    std::vector<Expr> args;
    expect("(");
    if (!is_punct(")")) {
      do {
        args.push_back(parse_expr());
      } while (accept(","));
    }
    expect(")");
    return args;
  }

  Expr unary_builtin(Expr::Kind kind, SourcePos pos) {
    Expr e;
    e.kind = kind;
    e.pos = pos;
    expect("(");
    e.args.push_back(parse_expr());
    expect(")");
    return e;
  }

  Expr parse_primary() {
    Expr e;
    e.pos = peek().pos;
    if (peek().kind == Tok::kInt) {
      e.kind = Expr::Kind::kInt;
      e.value = next().value;
      return e;
    }
    if (accept("(")) {
      e = parse_expr();
      expect(")");
      return e;
    }
    std::string id = ident("expression");
    if (id == "null") {
      e.kind = Expr::Kind::kNull;
    } else if (id == "this") {
      e.kind = Expr::Kind::kThis;
    } else if (id == "new") {
      if (accept("(")) {
        e.kind = Expr::Kind::kPlacementNew;
        e.args.push_back(parse_expr());
        expect(")");
      } else {
        e.kind = Expr::Kind::kNew;
      }
      e.name = ident("type name");
    } else if (id == "launder") {
      return unary_builtin(Expr::Kind::kLaunder, e.pos);
    } else if (id == "ptr2int") {
      return unary_builtin(Expr::Kind::kPtrToInt, e.pos);
    } else if (id == "print") {
      return unary_builtin(Expr::Kind::kPrint, e.pos);
    } else if (id == "int2ptr") {
      expect("<");
      std::string cls = ident("class name");
      expect(">");
      e = unary_builtin(Expr::Kind::kIntToPtr, e.pos);
      e.name = cls;
    } else if (is_punct("(")) {
      e.kind = Expr::Kind::kCall;
      e.name = id;
      e.args = parse_args();
    } else {
      e.kind = Expr::Kind::kVar;
      e.name = id;
    }
    return e;
  }

  Expr parse_postfix() {
    Expr e = parse_primary();
    while (true) {
      if (is_punct("->")) {
        SourcePos pos = next().pos;
        std::string member = ident("member name");
        Expr m;
        m.pos = pos;
        m.name = member;
        m.args.push_back(std::move(e));
        if (is_punct("(")) {
          m.kind = Expr::Kind::kMethodCall;
          for (Expr& a : parse_args()) m.args.push_back(std::move(a));
        } else {
          m.kind = Expr::Kind::kField;
        }
        e = std::move(m);
      } else if (is_kw("as")) {
        SourcePos pos = next().pos;
        Expr a;
        a.kind = Expr::Kind::kAs;
        a.pos = pos;
        a.name = ident("class name");
        a.args.push_back(std::move(e));
        e = std::move(a);
      } else {
        return e;
      }
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Resolution

const std::set<std::string, std::less<>> kReserved = {
    "print", "launder", "ptr2int", "int2ptr", "free", "alloc", "new",
    "delete", "this", "null", "if", "else", "while", "return", "as",
    "class", "struct", "union", "extern", "virtual", "inline", "ctor",
    "dtor", "int", "void"};

[[noreturn]] void fail(SourcePos pos, const std::string& msg) {
  throw SyntaxError(pos.line, pos.col, msg);
}

class Resolver {
 public:
  explicit Resolver(SourceProgram& p) : p_(p) {}

  void run() {
    collect_names();
    for (ClassDecl& c : p_.classes) resolve_class(c);
    for (UnionDecl& u : p_.unions) resolve_union(u);
    for (FunctionDecl& f : p_.externals) check_signature(f.ret, f.params, f.pos);
    for (ClassDecl& c : p_.classes) check_class_bodies(c);
    for (FunctionDecl& f : p_.functions) {
      check_signature(f.ret, f.params, f.pos);
      check_body(f.body, f.params, f.ret, nullptr, f.pos);
    }
  }

 private:
  void collect_names() {
    std::set<std::string, std::less<>> types;
    std::set<std::string, std::less<>> funcs;
    for (const ClassDecl& c : p_.classes) {
      if (kReserved.contains(c.name)) fail(c.pos, "reserved name '" + c.name + "'");
      if (!types.insert(c.name).second) fail(c.pos, "duplicate definition of '" + c.name + "'");
    }
    for (const UnionDecl& u : p_.unions) {
      if (kReserved.contains(u.name)) fail(u.pos, "reserved name '" + u.name + "'");
      if (!types.insert(u.name).second) fail(u.pos, "duplicate definition of '" + u.name + "'");
    }
    for (const auto* list : {&p_.functions, &p_.externals}) {
      for (const FunctionDecl& f : *list) {
        if (kReserved.contains(f.name)) fail(f.pos, "reserved name '" + f.name + "'");
        if (!funcs.insert(f.name).second) {
          fail(f.pos, "duplicate definition of '" + f.name + "'");
        }
      }
    }
  }

  void check_type(const TypeRef& t, SourcePos pos) const {
    if (t.kind != TypeRef::Kind::kPtr) return;
    if (!p_.find_class(t.pointee) && !p_.find_union(t.pointee)) {
      fail(pos, "unknown identifier '" + t.pointee + "'");
    }
  }

  void check_signature(const TypeRef& ret, const std::vector<ParamDecl>& params,
                       SourcePos pos) const {
    check_type(ret, pos);
    std::set<std::string, std::less<>> names;
    for (const ParamDecl& p : params) {
      check_type(p.type, pos);
      if (!names.insert(p.name).second) fail(pos, "duplicate parameter '" + p.name + "'");
    }
  }

  void resolve_class(ClassDecl& c) {
    if (resolved_.contains(c.name)) return;
    if (in_progress_.contains(c.name)) fail(c.pos, "cyclic inheritance involving '" + c.name + "'");
    in_progress_.insert(c.name);

    const ClassDecl* base = nullptr;
    if (c.base) {
      ClassDecl* b = find_mutable(*c.base);
      if (!b) fail(c.pos, "unknown identifier '" + *c.base + "'");
      resolve_class(*b);
      base = b;
    }

    std::set<std::string, std::less<>> member_names;
    std::int64_t next_offset = kSlotSize;  // slot 0 holds the vptr
    if (base) {
      c.field_offsets = base->field_offsets;
      c.vtable = base->vtable;
      next_offset = base->size;
    }
    for (const std::string& f : c.fields) {
      if (!member_names.insert(f).second || c.field_offsets.contains(f)) {
        fail(c.pos, "duplicate field '" + f + "' in class " + c.name);
      }
      c.field_offsets[f] = next_offset;
      next_offset += kSlotSize;
    }
    c.size = next_offset;

    for (MethodDecl& m : c.methods) {
      if (!member_names.insert(m.name).second) {
        fail(m.pos, "duplicate member '" + m.name + "' in class " + c.name);
      }
      check_signature(m.ret, m.params, m.pos);
      const MethodDecl* overridden = base ? p_.find_method(base->name, m.name) : nullptr;
      if (overridden) {
        if (!overridden->is_virtual) {
          fail(m.pos, "override of non-virtual method '" + m.name + "'");
        }
        if (overridden->params.size() != m.params.size()) {
          fail(m.pos, "override arity mismatch for '" + m.name + "'");
        }
        if (!(overridden->ret == m.ret)) {
          fail(m.pos, "override return type mismatch for '" + m.name + "'");
        }
        m.is_virtual = true;
        for (VTableSlot& s : c.vtable) {
          if (s.method == m.name) s.definer = c.name;
        }
      } else if (m.is_virtual) {
        c.vtable.push_back({m.name, c.name});
      }
    }
    c.dynamic = !c.vtable.empty();
    for (const MethodDecl& m : c.methods) {
      if (m.is_virtual && !m.is_inline) {
        c.has_key_function = m.defined;
        break;
      }
    }

    in_progress_.erase(c.name);
    resolved_.insert(c.name);
  }

  ClassDecl* find_mutable(const std::string& n) {
    for (ClassDecl& c : p_.classes) {
      if (c.name == n) return &c;
    }
    return nullptr;
  }

  void resolve_union(UnionDecl& u) {
    std::set<std::string, std::less<>> seen;
    u.size = kSlotSize;
    for (const std::string& a : u.alternatives) {
      const ClassDecl* c = p_.find_class(a);
      if (!c) fail(u.pos, "unknown identifier '" + a + "'");
      if (!seen.insert(a).second) fail(u.pos, "duplicate union alternative '" + a + "'");
      u.size = std::max(u.size, c->size);
    }
  }

  void check_class_bodies(ClassDecl& c) {
    std::vector<ParamDecl> none;
    if (c.ctor && c.ctor->defined) {
      check_body(c.ctor->body, none, TypeRef::Void(), &c, c.ctor->pos);
    }
    if (c.dtor && c.dtor->defined) {
      check_body(c.dtor->body, none, TypeRef::Void(), &c, c.dtor->pos);
    }
    for (MethodDecl& m : c.methods) {
      if (m.defined) check_body(m.body, m.params, m.ret, &c, m.pos);
    }
  }

  // --- bodies -------------------------------------------------------------

  struct Scope {
    std::vector<std::map<std::string, TypeRef, std::less<>>> frames;
  };

  void check_body(std::vector<Stmt>& body, const std::vector<ParamDecl>& params,
                  const TypeRef& ret, const ClassDecl* cls, SourcePos pos) {
    scope_.frames.clear();
    scope_.frames.emplace_back();
    for (const ParamDecl& p : params) {
      if (kReserved.contains(p.name)) fail(pos, "reserved name '" + p.name + "'");
      scope_.frames.back()[p.name] = p.type;
    }
    ret_ = ret;
    cls_ = cls;
    check_stmts(body);
  }

  const TypeRef* lookup(const std::string& n) const {
    for (auto it = scope_.frames.rbegin(); it != scope_.frames.rend(); ++it) {
      auto f = it->find(n);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  bool assignable(const TypeRef& to, const TypeRef& from) const {
    if (to.kind == TypeRef::Kind::kInt) return from.kind == TypeRef::Kind::kInt;
    if (to.kind != TypeRef::Kind::kPtr) return false;
    if (from.kind == TypeRef::Kind::kNull) return true;
    if (from.kind != TypeRef::Kind::kPtr) return false;
    return from.pointee == to.pointee || p_.derives_from(from.pointee, to.pointee);
  }

  void require(const TypeRef& to, const Expr& e, const std::string& what) const {
    if (!assignable(to, e.type)) {
      fail(e.pos, "type mismatch in " + what + ": expected " + to.to_string() +
                      ", found " + e.type.to_string());
    }
  }

  void check_stmts(std::vector<Stmt>& stmts) {
    scope_.frames.emplace_back();
    for (Stmt& s : stmts) check_stmt(s);
    scope_.frames.pop_back();
  }

  void check_stmt(Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::kDecl: {
        check_type(s.decl_type, s.pos);
        if (s.decl_type.kind == TypeRef::Kind::kVoid) fail(s.pos, "variable of type void");
        if (kReserved.contains(s.name)) fail(s.pos, "reserved name '" + s.name + "'");
        check_expr(s.exprs[0]);
        require(s.decl_type, s.exprs[0], "initializer of '" + s.name + "'");
        auto& frame = scope_.frames.back();
        if (frame.contains(s.name)) fail(s.pos, "redeclaration of '" + s.name + "'");
        frame[s.name] = s.decl_type;
        break;
      }
      case Stmt::Kind::kAssign: {
        const TypeRef* t = lookup(s.name);
        if (!t) fail(s.pos, "unknown identifier '" + s.name + "'");
        check_expr(s.exprs[0]);
        require(*t, s.exprs[0], "assignment to '" + s.name + "'");
        break;
      }
      case Stmt::Kind::kFieldStore: {
        check_expr(s.exprs[0]);
        field_offset(s.exprs[0], s.name, s.pos);
        check_expr(s.exprs[1]);
        require(TypeRef::Int(), s.exprs[1], "field store");
        break;
      }
      case Stmt::Kind::kExpr:
        check_expr(s.exprs[0]);
        break;
      case Stmt::Kind::kIf:
        check_cond(*s.cond);
        check_stmts(s.body);
        check_stmts(s.else_body);
        break;
      case Stmt::Kind::kWhile:
        check_cond(*s.cond);
        check_stmts(s.body);
        break;
      case Stmt::Kind::kReturn:
        if (s.exprs.empty()) {
          if (ret_.kind != TypeRef::Kind::kVoid) fail(s.pos, "missing return value");
        } else {
          if (ret_.kind == TypeRef::Kind::kVoid) fail(s.pos, "return value in void function");
          check_expr(s.exprs[0]);
          require(ret_, s.exprs[0], "return");
        }
        break;
      case Stmt::Kind::kDelete:
        check_expr(s.exprs[0]);
        if (s.exprs[0].type.kind != TypeRef::Kind::kPtr ||
            !p_.find_class(s.exprs[0].type.pointee)) {
          fail(s.pos, "delete requires a class pointer");
        }
        break;
    }
  }

  void check_cond(Cond& c) {
    check_expr(c.lhs);
    check_expr(c.rhs);
    bool ptrs = c.lhs.type.is_pointer() && c.rhs.type.is_pointer();
    bool ints = c.lhs.type.kind == TypeRef::Kind::kInt &&
                c.rhs.type.kind == TypeRef::Kind::kInt;
    if (c.op == Cond::Op::kEq || c.op == Cond::Op::kNe) {
      if (!ptrs && !ints) fail(c.pos, "comparison of incompatible types");
    } else if (!ints) {
      fail(c.pos, "ordering comparison requires integers");
    }
  }

  std::int64_t field_offset(const Expr& obj, const std::string& field, SourcePos pos) const {
    if (obj.type.kind != TypeRef::Kind::kPtr) fail(pos, "member access on non-pointer");
    const ClassDecl* c = p_.find_class(obj.type.pointee);
    if (!c) fail(pos, "member access on non-class type " + obj.type.to_string());
    auto it = c->field_offsets.find(field);
    if (it == c->field_offsets.end()) {
      fail(pos, "unknown identifier '" + field + "' in class " + c->name);
    }
    return it->second;
  }

  void check_args(const std::vector<ParamDecl>& params, std::vector<Expr>& args,
                  std::size_t first, SourcePos pos, const std::string& callee) {
    if (args.size() - first != params.size()) {
      fail(pos, "wrong number of arguments to '" + callee + "'");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      check_expr(args[first + i]);
      require(params[i].type, args[first + i], "argument to '" + callee + "'");
    }
  }

  const ClassDecl& class_of(const Expr& e, SourcePos pos) const {
    if (e.type.kind != TypeRef::Kind::kPtr) fail(pos, "expected a class pointer");
    const ClassDecl* c = p_.find_class(e.type.pointee);
    if (!c) fail(pos, "expected a class pointer, found " + e.type.to_string());
    return *c;
  }

  void check_expr(Expr& e) {
    switch (e.kind) {
      case Expr::Kind::kInt:
        e.type = TypeRef::Int();
        break;
      case Expr::Kind::kNull:
        e.type = TypeRef::Null();
        break;
      case Expr::Kind::kVar: {
        const TypeRef* t = lookup(e.name);
        if (!t) fail(e.pos, "unknown identifier '" + e.name + "'");
        e.type = *t;
        break;
      }
      case Expr::Kind::kThis:
        if (!cls_) fail(e.pos, "'this' outside of a class member");
        e.type = TypeRef::Ptr(cls_->name);
        break;
      case Expr::Kind::kNew:
        if (!p_.find_class(e.name) && !p_.find_union(e.name)) {
          fail(e.pos, "unknown identifier '" + e.name + "'");
        }
        e.type = TypeRef::Ptr(e.name);
        break;
      case Expr::Kind::kPlacementNew:
        check_expr(e.args[0]);
        if (e.args[0].type.kind != TypeRef::Kind::kPtr) {
          fail(e.pos, "placement new requires pointer storage");
        }
        if (!p_.find_class(e.name)) fail(e.pos, "unknown identifier '" + e.name + "'");
        e.type = TypeRef::Ptr(e.name);
        break;
      case Expr::Kind::kLaunder:
        check_expr(e.args[0]);
        if (e.args[0].type.kind != TypeRef::Kind::kPtr) fail(e.pos, "launder requires a pointer");
        e.type = e.args[0].type;
        break;
      case Expr::Kind::kPtrToInt:
        check_expr(e.args[0]);
        if (e.args[0].type.kind != TypeRef::Kind::kPtr) fail(e.pos, "ptr2int requires a pointer");
        e.type = TypeRef::Int();
        break;
      case Expr::Kind::kIntToPtr:
        check_expr(e.args[0]);
        require(TypeRef::Int(), e.args[0], "int2ptr");
        if (!p_.find_class(e.name)) fail(e.pos, "unknown identifier '" + e.name + "'");
        e.type = TypeRef::Ptr(e.name);
        break;
      case Expr::Kind::kAs: {
        check_expr(e.args[0]);
        const UnionDecl* u = e.args[0].type.kind == TypeRef::Kind::kPtr
                                 ? p_.find_union(e.args[0].type.pointee)
                                 : nullptr;
        if (!u) fail(e.pos, "'as' requires a union pointer");
        if (std::find(u->alternatives.begin(), u->alternatives.end(), e.name) ==
            u->alternatives.end()) {
          fail(e.pos, "'" + e.name + "' is not an alternative of union " + u->name);
        }
        e.type = TypeRef::Ptr(e.name);
        break;
      }
      case Expr::Kind::kField:
        check_expr(e.args[0]);
        field_offset(e.args[0], e.name, e.pos);
        e.type = TypeRef::Int();
        break;
      case Expr::Kind::kCall: {
        if (const FunctionDecl* f = p_.find_function(e.name)) {
          check_args(f->params, e.args, 0, e.pos, e.name);
          e.type = f->ret;
        } else if (const FunctionDecl* x = p_.find_external(e.name)) {
          check_args(x->params, e.args, 0, e.pos, e.name);
          e.type = x->ret;
        } else if (cls_ && p_.find_method(cls_->name, e.name)) {
          Expr self;
          self.kind = Expr::Kind::kThis;
          self.pos = e.pos;
          e.args.insert(e.args.begin(), std::move(self));
          e.kind = Expr::Kind::kMethodCall;
          e.implicit_this = true;
          check_expr(e);
        } else {
          fail(e.pos, "unknown identifier '" + e.name + "'");
        }
        break;
      }
      case Expr::Kind::kMethodCall: {
        check_expr(e.args[0]);
        const ClassDecl& c = class_of(e.args[0], e.pos);
        const MethodDecl* m = p_.find_method(c.name, e.name);
        if (!m) fail(e.pos, "unknown identifier '" + e.name + "' in class " + c.name);
        check_args(m->params, e.args, 1, e.pos, e.name);
        e.type = m->ret;
        break;
      }
      case Expr::Kind::kPrint:
        check_expr(e.args[0]);
        require(TypeRef::Int(), e.args[0], "print");
        e.type = TypeRef::Void();
        break;
      case Expr::Kind::kBinary:
        check_expr(e.args[0]);
        check_expr(e.args[1]);
        require(TypeRef::Int(), e.args[0], "arithmetic");
        require(TypeRef::Int(), e.args[1], "arithmetic");
        e.type = TypeRef::Int();
        break;
      case Expr::Kind::kNeg:
        check_expr(e.args[0]);
        require(TypeRef::Int(), e.args[0], "negation");
        e.type = TypeRef::Int();
        break;
    }
  }

  SourceProgram& p_;
  std::set<std::string, std::less<>> resolved_;
  std::set<std::string, std::less<>> in_progress_;
  Scope scope_;
  TypeRef ret_;
  const ClassDecl* cls_ = nullptr;
};

}  // namespace

SourceProgram parse_source(std::string_view text) {
  SourceProgram p = Parser(text).parse();
  Resolver(p).run();
  return p;
}

}  // namespace invar::moo
