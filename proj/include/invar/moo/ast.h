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

// Resolved syntax tree of MiniOO, a small single-inheritance object language
// with virtual calls, placement new, launder and unions.

#ifndef INVAR_MOO_AST_H_
#define INVAR_MOO_AST_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace invar::moo {

struct SourcePos {
  int line = 0;
  int col = 0;
};

struct TypeRef {
  enum class Kind { kVoid, kInt, kPtr, kNull };
  Kind kind = Kind::kVoid;
  std::string pointee;  // class or union name when kind == kPtr

  static TypeRef Void() { return {Kind::kVoid, {}}; }
  static TypeRef Int() { return {Kind::kInt, {}}; }
  static TypeRef Ptr(std::string to) { return {Kind::kPtr, std::move(to)}; }
  static TypeRef Null() { return {Kind::kNull, {}}; }

  bool is_pointer() const { return kind == Kind::kPtr || kind == Kind::kNull; }
  std::string to_string() const;
  bool operator==(const TypeRef&) const = default;
};

struct Expr {
  enum class Kind {
    kInt,           // value
    kNull,
    kVar,           // name
    kThis,
    kNew,           // name = class or union
    kPlacementNew,  // args[0] = storage, name = class
    kLaunder,       // args[0]
    kPtrToInt,      // args[0]
    kIntToPtr,      // args[0], name = class
    kAs,            // args[0] = union pointer, name = alternative
    kField,         // args[0] = object, name = field
    kCall,          // name = function, args
    kMethodCall,    // args[0] = object, name = method, args[1..]
    kPrint,         // args[0]
    kBinary,        // op, args[0], args[1]
    kNeg,           // args[0]
  };

  Kind kind = Kind::kInt;
  SourcePos pos;
  std::int64_t value = 0;
  std::string name;
  char op = 0;
  std::vector<Expr> args;
  // Filled in by name resolution.
  TypeRef type;
  // kCall inside a method that names one of the class's methods.
  bool implicit_this = false;
};

struct Cond {
  enum class Op { kEq, kNe, kLt, kGt, kLe, kGe };
  Op op = Op::kEq;
  Expr lhs;
  Expr rhs;
  SourcePos pos;
};

struct Stmt {
  enum class Kind {
    kDecl,        // decl_type name = exprs[0]
    kAssign,      // name = exprs[0]
    kFieldStore,  // exprs[0]->name = exprs[1]
    kExpr,        // exprs[0]
    kIf,          // cond, body, else_body
    kWhile,       // cond, body
    kReturn,      // exprs empty or {value}
    kDelete,      // exprs[0]
  };

  Kind kind = Kind::kExpr;
  SourcePos pos;
  TypeRef decl_type;
  std::string name;
  std::vector<Expr> exprs;
  std::optional<Cond> cond;
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
};

struct ParamDecl {
  TypeRef type;
  std::string name;
};

struct MethodDecl {
  std::string name;
  TypeRef ret;
  std::vector<ParamDecl> params;
  bool is_virtual = false;  // declared or inherited virtual
  bool is_inline = false;
  bool defined = false;     // body present in this input
  std::vector<Stmt> body;
  SourcePos pos;
};

// Constructor or destructor.
struct SpecialMember {
  bool defined = false;
  std::vector<Stmt> body;
  SourcePos pos;
};

struct VTableSlot {
  std::string method;
  std::string definer;  // class whose implementation fills the slot
};

struct ClassDecl {
  std::string name;
  std::optional<std::string> base;
  std::vector<std::string> fields;  // own fields, in order
  std::vector<MethodDecl> methods;
  std::optional<SpecialMember> ctor;
  std::optional<SpecialMember> dtor;
  SourcePos pos;

  // Derived by resolution.
  bool dynamic = false;
  bool has_key_function = false;
  std::vector<VTableSlot> vtable;
  std::map<std::string, std::int64_t> field_offsets;  // includes inherited
  std::int64_t size = 0;
};

struct UnionDecl {
  std::string name;
  std::vector<std::string> alternatives;
  SourcePos pos;
  std::int64_t size = 0;
};

struct FunctionDecl {
  std::string name;
  TypeRef ret;
  std::vector<ParamDecl> params;
  std::vector<Stmt> body;
  SourcePos pos;
};

struct SourceProgram {
  std::vector<ClassDecl> classes;
  std::vector<UnionDecl> unions;
  std::vector<FunctionDecl> functions;
  std::vector<FunctionDecl> externals;  // signatures only

  const ClassDecl* find_class(const std::string& name) const;
  const UnionDecl* find_union(const std::string& name) const;
  const FunctionDecl* find_function(const std::string& name) const;
  const FunctionDecl* find_external(const std::string& name) const;
  // Method lookup through the base chain; returns the declaring class too.
  const MethodDecl* find_method(const std::string& cls, const std::string& method,
                                const ClassDecl** owner = nullptr) const;
  bool derives_from(const std::string& cls, const std::string& base) const;
  // Nearest class in the chain (starting at cls) that has a destructor.
  const ClassDecl* dtor_owner(const std::string& cls) const;
};

}  // namespace invar::moo

#endif  // INVAR_MOO_AST_H_
