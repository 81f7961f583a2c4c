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

#ifndef INVAR_IR_H_
#define INVAR_IR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace invar {

// Byte size of every memory slot (vptr, field, vtable entry).
inline constexpr std::int64_t kSlotSize = 8;

enum class Type : std::uint8_t { kVoid, kInt, kBool, kPtr };

std::string_view type_name(Type t);

// The SSA instruction set. Constants and global references are instructions
// so that every operand is a plain SSA value name.
enum class Opcode : std::uint8_t {
  kAlloc,
  kLoad,
  kStore,
  kFieldAddr,
  kCallDirect,
  kCallIndirect,
  kLaunder,
  kStrip,
  kAssume,
  kICmpEq,
  kICmpSlt,
  kPtrToInt,
  kIntToPtr,
  kAdd,
  kSub,
  kMul,
  kBr,
  kCondBr,
  kRet,
  kPhi,
  kConstInt,
  kConstNull,
  kConstUndef,
  kGlobalRef,
};

std::string_view opcode_name(Opcode op);
bool is_terminator(Opcode op);
bool is_intrinsic(Opcode op);

struct Metadata {
  bool invariant_group = false;
  bool invariant_load = false;

  bool empty() const { return !invariant_group && !invariant_load; }
  bool operator==(const Metadata&) const = default;
};

struct ParamAttributeSet {
  bool nonnull = false;
  bool nocapture = false;
  std::optional<std::uint64_t> dereferenceable_bytes;

  bool empty() const {
    return !nonnull && !nocapture && !dereferenceable_bytes.has_value();
  }
  bool operator==(const ParamAttributeSet&) const = default;
};

struct FunctionAttrs {
  bool pure = false;
  bool speculatable = false;
  bool nounwind = false;
  bool inaccessiblememonly = false;

  bool operator==(const FunctionAttrs&) const = default;
};

// Operand layout by opcode:
//   Load          operands = {address}
//   Store         operands = {value, address}
//   FieldAddr     operands = {base}, imm = byte offset
//   Alloc         imm = byte size
//   CallDirect    symbol = callee, operands = args
//   CallIndirect  operands = {callee, args...}
//   Launder/Strip operands = {pointer}
//   Assume        operands = {condition}
//   Br            labels = {dest}
//   CondBr        operands = {condition}, labels = {if_true, if_false}
//   Ret           operands = {} or {value}
//   Phi           operands[i] flows in from labels[i]
//   ConstInt      imm (type kInt or kBool)
//   GlobalRef     symbol
struct Instruction {
  Opcode op = Opcode::kConstInt;
  std::string result;
  Type type = Type::kVoid;
  std::vector<std::string> operands;
  std::vector<std::string> labels;
  std::string symbol;
  std::int64_t imm = 0;
  Metadata md;
  // Attributes known for the result of a launder/strip.
  ParamAttributeSet result_attrs;
  // Set on launder/strip when the operand is known not to be captured.
  bool operand_nocapture = false;

  bool has_result() const { return !result.empty(); }
  bool operator==(const Instruction&) const = default;
};

struct Param {
  std::string name;
  Type type = Type::kInt;
  ParamAttributeSet attrs;

  bool operator==(const Param&) const = default;
};

struct BasicBlock {
  std::string label;
  std::vector<Instruction> insts;

  bool operator==(const BasicBlock&) const = default;
};

struct Function {
  std::string name;
  Type ret = Type::kVoid;
  std::vector<Param> params;
  FunctionAttrs attrs;
  std::vector<BasicBlock> blocks;

  int block_index(std::string_view label) const;
  std::size_t instruction_count() const;
  bool operator==(const Function&) const = default;
};

// A function known only by signature; its body lives elsewhere.
struct Declaration {
  std::string name;
  Type ret = Type::kVoid;
  std::vector<Param> params;
  FunctionAttrs attrs;

  bool operator==(const Declaration&) const = default;
};

enum class Linkage : std::uint8_t {
  kDefinition,
  // Contents may be inspected by the optimizer; demoted to a declaration
  // before code generation.
  kOptimizationOnly,
  kDeclaration,
};

std::string_view linkage_name(Linkage l);

struct VTableGlobal {
  std::string name;
  std::string class_name;
  std::vector<std::string> slots;
  Linkage linkage = Linkage::kDefinition;

  bool operator==(const VTableGlobal&) const = default;
};

struct Signature {
  Type ret = Type::kVoid;
  std::vector<Type> params;
  bool has_body = false;
};

struct Module {
  std::string name;
  std::vector<VTableGlobal> vtables;
  std::vector<Declaration> declarations;
  std::vector<Function> functions;

  Function* find_function(std::string_view name);
  const Function* find_function(std::string_view name) const;
  const Declaration* find_declaration(std::string_view name) const;
  const VTableGlobal* find_vtable(std::string_view name) const;
  // Signature of a function or declaration named `name`.
  std::optional<Signature> signature(std::string_view name) const;
  bool operator==(const Module&) const = default;
};

// Location of an instruction inside a function.
struct InstRef {
  int block = -1;
  int index = -1;

  bool operator==(const InstRef&) const = default;
  auto operator<=>(const InstRef&) const = default;
};

// Maps every SSA value defined in `f` to its definition site; parameters map
// to {-1, param index}.
std::map<std::string, InstRef, std::less<>> definition_map(const Function& f);

// Type of every value defined in `f` (params and results).
std::map<std::string, Type, std::less<>> value_types(const Function& f);

// Number of uses of each SSA value.
std::map<std::string, int, std::less<>> use_counts(const Function& f);

// Rewrites every use of `from` to `to`. Returns the number of rewritten uses.
int replace_all_uses(Function& f, std::string_view from, std::string_view to);

// Hands out SSA value names and block labels that do not collide with names
// already present in a function.
class NameAllocator {
 public:
  explicit NameAllocator(const Function& f);
  std::string value(std::string_view hint);
  std::string label(std::string_view hint);

 private:
  std::set<std::string, std::less<>> values_;
  std::set<std::string, std::less<>> labels_;
};

bool has_side_effects(const Instruction& inst);

// Deletes instructions whose results are unused and that have no side
// effects, iterating to a fixpoint. Returns the number of removed
// instructions.
int remove_dead_instructions(Function& f);

// Removes blocks unreachable from the entry and drops phi incomings from
// them. Returns the number of removed blocks.
int remove_unreachable_blocks(Function& f);

// Replaces phis whose incoming values (ignoring self references) are all one
// value. Returns the number of removed phis.
int remove_trivial_phis(Function& f);

}  // namespace invar

#endif  // INVAR_IR_H_
