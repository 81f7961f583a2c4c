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

#include "invar/ir_text.h"

#include <cctype>
#include <charconv>
#include <set>
#include <sstream>
#include <vector>

#include "invar/diagnostic.h"

namespace invar {
namespace {

// ---------------------------------------------------------------------------
// Printing

void print_attrs(std::ostream& os, const ParamAttributeSet& a) {
  if (a.nonnull) os << " nonnull";
  if (a.nocapture) os << " nocapture";
  if (a.dereferenceable_bytes) {
    os << " dereferenceable(" << *a.dereferenceable_bytes << ")";
  }
}

void print_fn_attrs(std::ostream& os, const FunctionAttrs& a) {
  if (a.pure) os << " pure";
  if (a.speculatable) os << " speculatable";
  if (a.nounwind) os << " nounwind";
  if (a.inaccessiblememonly) os << " inaccessiblememonly";
}

void print_signature(std::ostream& os, std::string_view keyword,
                     const std::string& name, Type ret,
                     const std::vector<Param>& params,
                     const FunctionAttrs& attrs) {
  os << keyword << ' ' << type_name(ret) << " @" << name << '(';
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) os << ", ";
    os << type_name(params[i].type);
    print_attrs(os, params[i].attrs);
    os << " %" << params[i].name;
  }
  os << ')';
  print_fn_attrs(os, attrs);
}

void print_args(std::ostream& os, const std::vector<std::string>& ops,
                std::size_t first) {
  os << '(';
  for (std::size_t i = first; i < ops.size(); ++i) {
    if (i > first) os << ", ";
    os << '%' << ops[i];
  }
  os << ')';
}

}  // namespace

std::string print_instruction(const Instruction& inst) {
  std::ostringstream os;
  if (inst.has_result()) os << '%' << inst.result << " = ";
  const auto& ops = inst.operands;
  switch (inst.op) {
    case Opcode::kAlloc:
      os << "alloc " << inst.imm;
      break;
    case Opcode::kLoad:
      os << "load " << type_name(inst.type) << " %" << ops.at(0);
      break;
    case Opcode::kStore:
      os << "store %" << ops.at(0) << ", %" << ops.at(1);
      break;
    case Opcode::kFieldAddr:
      os << "fieldaddr %" << ops.at(0) << ", " << inst.imm;
      break;
    case Opcode::kCallDirect:
      os << "call " << type_name(inst.type) << " @" << inst.symbol;
      print_args(os, ops, 0);
      break;
    case Opcode::kCallIndirect:
      os << "call_indirect " << type_name(inst.type) << " %" << ops.at(0);
      print_args(os, ops, 1);
      break;
    case Opcode::kLaunder:
    case Opcode::kStrip:
      os << opcode_name(inst.op) << "(%" << ops.at(0);
      if (inst.operand_nocapture) os << " nocapture";
      os << ')';
      print_attrs(os, inst.result_attrs);
      break;
    case Opcode::kAssume:
      os << "assume %" << ops.at(0);
      break;
    case Opcode::kICmpEq:
    case Opcode::kICmpSlt:
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kMul:
      os << opcode_name(inst.op) << " %" << ops.at(0) << ", %" << ops.at(1);
      break;
    case Opcode::kPtrToInt:
    case Opcode::kIntToPtr:
      os << opcode_name(inst.op) << " %" << ops.at(0);
      break;
    case Opcode::kBr:
      os << "br " << inst.labels.at(0);
      break;
    case Opcode::kCondBr:
      os << "condbr %" << ops.at(0) << ", " << inst.labels.at(0) << ", "
         << inst.labels.at(1);
      break;
    case Opcode::kRet:
      os << "ret";
      if (!ops.empty()) os << " %" << ops[0];
      break;
    case Opcode::kPhi:
      os << "phi " << type_name(inst.type);
      for (std::size_t i = 0; i < ops.size(); ++i) {
        os << (i ? ", " : " ") << "[%" << ops[i] << ", " << inst.labels.at(i)
           << ']';
      }
      break;
    case Opcode::kConstInt:
      os << "const " << type_name(inst.type) << ' ' << inst.imm;
      break;
    case Opcode::kConstNull:
      os << "null";
      break;
    case Opcode::kConstUndef:
      os << "undef " << type_name(inst.type);
      break;
    case Opcode::kGlobalRef:
      os << "global @" << inst.symbol;
      break;
  }
  if (inst.md.invariant_group) os << " !invariant.group";
  if (inst.md.invariant_load) os << " !invariant.load";
  return os.str();
}

std::string print_function(const Function& f) {
  std::ostringstream os;
  print_signature(os, "define", f.name, f.ret, f.params, f.attrs);
  os << " {\n";
  for (const BasicBlock& bb : f.blocks) {
    os << bb.label << ":\n";
    for (const Instruction& inst : bb.insts) {
      os << "  " << print_instruction(inst) << '\n';
    }
  }
  os << "}\n";
  return os.str();
}

std::string print_ir(const Module& m) {
  std::ostringstream os;
  os << "module " << m.name << '\n';
  for (const VTableGlobal& v : m.vtables) {
    os << "vtable @" << v.name << " for " << v.class_name
       << " linkage=" << linkage_name(v.linkage) << " [";
    for (std::size_t i = 0; i < v.slots.size(); ++i) {
      os << (i ? ", @" : "@") << v.slots[i];
    }
    os << "]\n";
  }
  for (const Declaration& d : m.declarations) {
    print_signature(os, "declare", d.name, d.ret, d.params, d.attrs);
    os << '\n';
  }
  for (const Function& f : m.functions) os << '\n' << print_function(f);
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { kIdent, kLocal, kGlobal, kInt, kPunct, kNewline, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  std::int64_t value = 0;
  int line = 1;
  int col = 1;
};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    i += n;
    col += static_cast<int>(n);
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      out.push_back({Tok::kNewline, "\\n", 0, line, col});
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == ';') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (c == '%' || c == '@') {
      std::size_t j = i + 1;
      while (j < src.size() && is_name_char(src[j])) ++j;
      if (j == i + 1) throw SyntaxError(line, col, "expected name after '" + std::string(1, c) + "'");
      t.kind = c == '%' ? Tok::kLocal : Tok::kGlobal;
      t.text = std::string(src.substr(i + 1, j - i - 1));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < src.size() &&
                std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::kInt;
      t.text = std::string(src.substr(i, j - i));
      auto [p, ec] = std::from_chars(src.data() + i, src.data() + j, t.value);
      if (ec != std::errc()) throw SyntaxError(line, col, "integer out of range");
      advance(j - i);
    } else if (is_name_char(c)) {
      std::size_t j = i;
      while (j < src.size() && is_name_char(src[j])) ++j;
      t.kind = Tok::kIdent;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::string_view("=,()[]{}:!").find(c) != std::string_view::npos) {
      t.kind = Tok::kPunct;
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  out.push_back({Tok::kEnd, "<eof>", 0, line, col});
  return out;
}

struct SymbolUse {
  std::string name;
  int line;
  int col;
};

class IrParser {
 public:
  explicit IrParser(std::string_view text) : toks_(lex(text)) {}

  Module parse() {
    skip_newlines();
    if (!is_ident("module")) error("expected module");
    next();
    Module m;
    m.name = expect_ident("module name");
    end_of_line();
    while (true) {
      skip_newlines();
      if (peek().kind == Tok::kEnd) break;
      if (is_ident("vtable")) {
        m.vtables.push_back(parse_vtable());
      } else if (is_ident("declare")) {
        m.declarations.push_back(parse_declaration());
      } else if (is_ident("define")) {
        m.functions.push_back(parse_function());
      } else {
        error("expected 'vtable', 'declare' or 'define'");
      }
    }
    check_symbols(m);
    return m;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void error(const std::string& msg) const {
    throw SyntaxError(peek().line, peek().col, msg);
  }
  bool is_ident(std::string_view s) const {
    return peek().kind == Tok::kIdent && peek().text == s;
  }
  bool is_punct(char c) const {
    return peek().kind == Tok::kPunct && peek().text[0] == c;
  }
  void expect_punct(char c) {
    if (!is_punct(c)) error(std::string("expected '") + c + "'");
    next();
  }
  bool accept_punct(char c) {
    if (!is_punct(c)) return false;
    next();
    return true;
  }
  std::string expect_ident(std::string_view what) {
    if (peek().kind != Tok::kIdent) error("expected " + std::string(what));
    return next().text;
  }
  void expect_keyword(std::string_view kw) {
    if (!is_ident(kw)) error("expected '" + std::string(kw) + "'");
    next();
  }
  std::string expect_local() {
    if (peek().kind != Tok::kLocal) error("expected %value");
    return next().text;
  }
  std::string expect_global() {
    if (peek().kind != Tok::kGlobal) error("expected @symbol");
    const Token& t = next();
    uses_.push_back({t.text, t.line, t.col});
    return t.text;
  }
  std::int64_t expect_int() {
    if (peek().kind != Tok::kInt) error("expected integer");
    return next().value;
  }
  void skip_newlines() {
    while (peek().kind == Tok::kNewline) next();
  }
  void end_of_line() {
    if (peek().kind == Tok::kEnd) return;
    if (peek().kind != Tok::kNewline) error("expected end of line");
    next();
  }

  Type parse_type(bool allow_void) {
    std::string t = expect_ident("type");
    if (t == "int") return Type::kInt;
    if (t == "ptr") return Type::kPtr;
    if (t == "bool") return Type::kBool;
    if (t == "void" && allow_void) return Type::kVoid;
    throw SyntaxError(toks_[pos_ - 1].line, toks_[pos_ - 1].col,
                      "unknown type '" + t + "'");
  }

  // Attribute words: nonnull, nocapture, dereferenceable(N).
  bool parse_attr(ParamAttributeSet& a) {
    if (is_ident("nonnull")) {
      next();
      a.nonnull = true;
      return true;
    }
    if (is_ident("nocapture")) {
      next();
      a.nocapture = true;
      return true;
    }
    if (is_ident("dereferenceable")) {
      next();
      expect_punct('(');
      std::int64_t n = expect_int();
      if (n < 0) error("dereferenceable bytes must be non-negative");
      a.dereferenceable_bytes = static_cast<std::uint64_t>(n);
      expect_punct(')');
      return true;
    }
    return false;
  }

  FunctionAttrs parse_fn_attrs() {
    FunctionAttrs a;
    while (peek().kind == Tok::kIdent) {
      const std::string& w = peek().text;
      if (w == "pure") {
        a.pure = true;
      } else if (w == "speculatable") {
        a.speculatable = true;
      } else if (w == "nounwind") {
        a.nounwind = true;
      } else if (w == "inaccessiblememonly") {
        a.inaccessiblememonly = true;
      } else {
        error("unknown function attribute '" + w + "'");
      }
      next();
    }
    return a;
  }

  struct Header {
    std::string name;
    Type ret;
    std::vector<Param> params;
    FunctionAttrs attrs;
  };

  Header parse_header() {
    Header h;
    h.ret = parse_type(true);
    if (peek().kind != Tok::kGlobal) error("expected @symbol");
    h.name = next().text;
    expect_punct('(');
    if (!is_punct(')')) {
      do {
        Param p;
        p.type = parse_type(false);
        while (parse_attr(p.attrs)) {
        }
        p.name = expect_local();
        h.params.push_back(std::move(p));
      } while (accept_punct(','));
    }
    expect_punct(')');
    h.attrs = parse_fn_attrs();
    return h;
  }

  VTableGlobal parse_vtable() {
    next();
    VTableGlobal v;
    if (peek().kind != Tok::kGlobal) error("expected @symbol");
    v.name = next().text;
    expect_keyword("for");
    v.class_name = expect_ident("class name");
    expect_keyword("linkage");
    expect_punct('=');
    std::string l = expect_ident("linkage");
    if (l == "definition") {
      v.linkage = Linkage::kDefinition;
    } else if (l == "optimization_only") {
      v.linkage = Linkage::kOptimizationOnly;
    } else if (l == "declaration") {
      v.linkage = Linkage::kDeclaration;
    } else {
      throw SyntaxError(toks_[pos_ - 1].line, toks_[pos_ - 1].col,
                        "unknown linkage '" + l + "'");
    }
    expect_punct('[');
    if (!is_punct(']')) {
      do {
        v.slots.push_back(expect_global());
      } while (accept_punct(','));
    }
    expect_punct(']');
    end_of_line();
    return v;
  }

  Declaration parse_declaration() {
    next();
    Header h = parse_header();
    end_of_line();
    return Declaration{h.name, h.ret, std::move(h.params), h.attrs};
  }

  Function parse_function() {
    next();
    Header h = parse_header();
    Function f;
    f.name = h.name;
    f.ret = h.ret;
    f.params = std::move(h.params);
    f.attrs = h.attrs;
    expect_punct('{');
    end_of_line();
    skip_newlines();
    while (!is_punct('}')) {
      if (peek().kind == Tok::kEnd) error("expected '}'");
      if (peek().kind == Tok::kIdent && peek(1).kind == Tok::kPunct &&
          peek(1).text == ":") {
        BasicBlock bb;
        bb.label = next().text;
        next();
        f.blocks.push_back(std::move(bb));
        end_of_line();
      } else {
        if (f.blocks.empty()) error("expected block label");
        f.blocks.back().insts.push_back(parse_instruction());
        end_of_line();
      }
      skip_newlines();
    }
    next();
    end_of_line();
    return f;
  }

  std::vector<std::string> parse_call_args() {
    std::vector<std::string> args;
    expect_punct('(');
    if (!is_punct(')')) {
      do {
        args.push_back(expect_local());
      } while (accept_punct(','));
    }
    expect_punct(')');
    return args;
  }

  Instruction parse_instruction() {
    Instruction inst;
    if (peek().kind == Tok::kLocal) {
      inst.result = next().text;
      expect_punct('=');
    }
    const Token& op_tok = peek();
    std::string op = expect_ident("opcode");
    if (op == "alloc") {
      inst.op = Opcode::kAlloc;
      inst.type = Type::kPtr;
      inst.imm = expect_int();
    } else if (op == "load") {
      inst.op = Opcode::kLoad;
      inst.type = parse_type(false);
      inst.operands.push_back(expect_local());
    } else if (op == "store") {
      inst.op = Opcode::kStore;
      inst.operands.push_back(expect_local());
      expect_punct(',');
      inst.operands.push_back(expect_local());
    } else if (op == "fieldaddr") {
      inst.op = Opcode::kFieldAddr;
      inst.type = Type::kPtr;
      inst.operands.push_back(expect_local());
      expect_punct(',');
      inst.imm = expect_int();
    } else if (op == "call") {
      inst.op = Opcode::kCallDirect;
      inst.type = parse_type(true);
      inst.symbol = expect_global();
      inst.operands = parse_call_args();
    } else if (op == "call_indirect") {
      inst.op = Opcode::kCallIndirect;
      inst.type = parse_type(true);
      inst.operands.push_back(expect_local());
      for (auto& a : parse_call_args()) inst.operands.push_back(std::move(a));
    } else if (op == "launder.invariant.group" ||
               op == "strip.invariant.group") {
      inst.op = op[0] == 'l' ? Opcode::kLaunder : Opcode::kStrip;
      inst.type = Type::kPtr;
      expect_punct('(');
      inst.operands.push_back(expect_local());
      if (is_ident("nocapture")) {
        next();
        inst.operand_nocapture = true;
      }
      expect_punct(')');
      while (parse_attr(inst.result_attrs)) {
      }
    } else if (op == "assume") {
      inst.op = Opcode::kAssume;
      inst.operands.push_back(expect_local());
    } else if (op == "icmp") {
      std::string pred = expect_ident("comparison predicate");
      if (pred == "eq") {
        inst.op = Opcode::kICmpEq;
      } else if (pred == "slt") {
        inst.op = Opcode::kICmpSlt;
      } else {
        throw SyntaxError(toks_[pos_ - 1].line, toks_[pos_ - 1].col,
                          "unknown predicate '" + pred + "'");
      }
      inst.type = Type::kBool;
      inst.operands.push_back(expect_local());
      expect_punct(',');
      inst.operands.push_back(expect_local());
    } else if (op == "add" || op == "sub" || op == "mul") {
      inst.op = op == "add"   ? Opcode::kAdd
                : op == "sub" ? Opcode::kSub
                              : Opcode::kMul;
      inst.type = Type::kInt;
      inst.operands.push_back(expect_local());
      expect_punct(',');
      inst.operands.push_back(expect_local());
    } else if (op == "ptrtoint") {
      inst.op = Opcode::kPtrToInt;
      inst.type = Type::kInt;
      inst.operands.push_back(expect_local());
    } else if (op == "inttoptr") {
      inst.op = Opcode::kIntToPtr;
      inst.type = Type::kPtr;
      inst.operands.push_back(expect_local());
    } else if (op == "br") {
      inst.op = Opcode::kBr;
      inst.labels.push_back(expect_ident("label"));
    } else if (op == "condbr") {
      inst.op = Opcode::kCondBr;
      inst.operands.push_back(expect_local());
      expect_punct(',');
      inst.labels.push_back(expect_ident("label"));
      expect_punct(',');
      inst.labels.push_back(expect_ident("label"));
    } else if (op == "ret") {
      inst.op = Opcode::kRet;
      if (peek().kind == Tok::kLocal) inst.operands.push_back(next().text);
    } else if (op == "phi") {
      inst.op = Opcode::kPhi;
      inst.type = parse_type(false);
      do {
        expect_punct('[');
        inst.operands.push_back(expect_local());
        expect_punct(',');
        inst.labels.push_back(expect_ident("label"));
        expect_punct(']');
      } while (accept_punct(','));
    } else if (op == "const") {
      inst.op = Opcode::kConstInt;
      inst.type = parse_type(false);
      if (inst.type == Type::kPtr) error("const must be int or bool");
      inst.imm = expect_int();
    } else if (op == "null") {
      inst.op = Opcode::kConstNull;
      inst.type = Type::kPtr;
    } else if (op == "undef") {
      inst.op = Opcode::kConstUndef;
      inst.type = parse_type(false);
    } else if (op == "global") {
      inst.op = Opcode::kGlobalRef;
      inst.type = Type::kPtr;
      inst.symbol = expect_global();
    } else {
      throw SyntaxError(op_tok.line, op_tok.col, "unknown opcode '" + op + "'");
    }
    while (accept_punct('!')) {
      std::string md = expect_ident("metadata kind");
      if (md == "invariant.group") {
        inst.md.invariant_group = true;
      } else if (md == "invariant.load") {
        inst.md.invariant_load = true;
      } else {
        throw SyntaxError(toks_[pos_ - 1].line, toks_[pos_ - 1].col,
                          "unknown metadata '" + md + "'");
      }
    }
    return inst;
  }

  void check_symbols(const Module& m) const {
    std::set<std::string, std::less<>> defined;
    for (const auto& v : m.vtables) defined.insert(v.name);
    for (const auto& d : m.declarations) defined.insert(d.name);
    for (const auto& f : m.functions) defined.insert(f.name);
    for (const SymbolUse& u : uses_) {
      if (!defined.contains(u.name)) {
        throw SyntaxError(u.line, u.col, "undefined symbol '@" + u.name + "'");
      }
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<SymbolUse> uses_;
};

}  // namespace

Module parse_ir(std::string_view text) { return IrParser(text).parse(); }

}  // namespace invar
