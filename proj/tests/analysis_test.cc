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

#include <gtest/gtest.h>

#include "invar/analysis.h"
#include "invar/diff.h"
#include "invar/interp.h"
#include "invar/ir_text.h"
#include "test_util.h"

namespace invar {
namespace {

using testing::find_def;

constexpr const char* kAliasFn = R"(module t
declare void @ext(ptr %p)

define void @f(ptr %a, ptr %q) {
entry:
  %b = launder.invariant.group(%a)
  %s = strip.invariant.group(%b)
  %f8 = fieldaddr %s, 8
  %g8 = fieldaddr %a, 8
  %x = alloc 16
  %y = alloc 16
  %x8 = fieldaddr %x, 8
  ret
}
)";

TEST(Alias, LaunderAndStripChainsMustAlias) {
  Module m = parse_ir(kAliasFn);
  const Function& f = m.functions[0];
  EXPECT_EQ(alias_query("a", "b", f), AliasResult::kMustAlias);
  EXPECT_EQ(alias_query("b", "a", f), AliasResult::kMustAlias);
  EXPECT_EQ(alias_query("a", "s", f), AliasResult::kMustAlias);
  EXPECT_EQ(alias_query("f8", "g8", f), AliasResult::kMustAlias);
  EXPECT_EQ(alias_query("a", "f8", f), AliasResult::kNoAlias);
}

TEST(Alias, DistinctAllocationsAndParams) {
  Module m = parse_ir(kAliasFn);
  const Function& f = m.functions[0];
  EXPECT_EQ(alias_query("x", "y", f), AliasResult::kNoAlias);
  EXPECT_EQ(alias_query("x8", "y", f), AliasResult::kNoAlias);
  EXPECT_EQ(alias_query("a", "q", f), AliasResult::kMayAlias);
  EXPECT_EQ(alias_query("x", "a", f), AliasResult::kMayAlias);
}

TEST(Alias, IsSymmetricOverAllPairs) {
  Module m = parse_ir(kAliasFn);
  const Function& f = m.functions[0];
  std::vector<std::string> ptrs = {"a", "q", "b", "s", "f8", "g8", "x", "y", "x8"};
  for (const auto& p : ptrs) {
    for (const auto& q : ptrs) {
      EXPECT_EQ(alias_query(p, q, f), alias_query(q, p, f)) << p << " " << q;
    }
  }
}

TEST(InvariantGroupKey, RootsAndValidity) {
  Module m = parse_ir(kAliasFn);
  const Function& f = m.functions[0];
  InvariantGroupKey kb = invariant_group_key("b", f);
  EXPECT_TRUE(kb.valid);
  EXPECT_EQ(kb.root, "b");
  EXPECT_NE(kb.root, invariant_group_key("a", f).root);
  EXPECT_FALSE(invariant_group_key("s", f).valid);
  InvariantGroupKey kx = invariant_group_key("x", f);
  EXPECT_TRUE(kx.valid);
  EXPECT_EQ(kx.root, "x");
}

// Forwarding a vptr across strip would be observable: the interpreter
// oracle shows the value read through the stripped pointer differs from
// the one stored through the original after the object is replaced.
TEST(InvariantGroupKey, StripForwardingWouldChangeBehavior) {
  const char* text = R"(module t
vtable @A.vtable for A linkage=definition [@A.f]
vtable @B.vtable for B linkage=definition [@B.f]
declare void @print(int %v)

define void @A.f(ptr %this) {
entry:
  %c = const int 1
  call void @print(%c)
  ret
}

define void @B.f(ptr %this) {
entry:
  %c = const int 2
  call void @print(%c)
  ret
}

define void @main() {
entry:
  %o = alloc 8
  %va = global @A.vtable
  store %va, %o !invariant.group
  %n = launder.invariant.group(%o)
  %vb = global @B.vtable
  store %vb, %n !invariant.group
  %s = strip.invariant.group(%o)
  %v = load ptr %s !invariant.group
  %slot = fieldaddr %v, 0
  %fn = load ptr %slot !invariant.load
  call_indirect void %fn(%s)
  ret
}
)";
  Module m = parse_ir(text);
  ExecTrace t = eval_module(m, "main", ExecMode::kChecked);
  EXPECT_TRUE(t.ub_reports.empty());
  EXPECT_EQ(t.prints, (std::vector<std::int64_t>{2}));
  // Forwarding the first store's value to the load would call A.f.
  Module forwarded = m;
  Function& f = forwarded.functions.back();
  for (Instruction& i : f.blocks[0].insts) {
    if (i.op == Opcode::kFieldAddr) i.operands[0] = "va";
  }
  EXPECT_EQ(eval_module(forwarded, "main", ExecMode::kRaw).prints,
            (std::vector<std::int64_t>{1}));
}

constexpr const char* kSlots = R"(module t
vtable @B.vtable for B linkage=definition [@B.virt_meth, @B.other]
vtable @O.vtable for O linkage=optimization_only [@O.m]
vtable @D.vtable for D linkage=declaration [@D.m]
declare void @B.virt_meth(ptr %this)
declare void @B.other(ptr %this)
declare void @O.m(ptr %this)
declare void @D.m(ptr %this)

define void @f() {
entry:
  %b = global @B.vtable
  %b0 = fieldaddr %b, 0
  %l0 = load ptr %b0 !invariant.load
  %b1 = fieldaddr %b, 8
  %l1 = load ptr %b1 !invariant.load
  %p1 = load ptr %b1
  %o = global @O.vtable
  %lo = load ptr %o !invariant.load
  %d = global @D.vtable
  %ld = load ptr %d !invariant.load
  %b2 = fieldaddr %b, 16
  %l2 = load ptr %b2 !invariant.load
  ret
}
)";

TEST(ResolveVtableSlot, DefinitionAndOptimizationOnly) {
  Module m = parse_ir(kSlots);
  const Function& f = m.functions[0];
  FunctionAnalysis fa(f);
  EXPECT_EQ(resolve_vtable_slot(*find_def(f, "l0"), fa, m), "B.virt_meth");
  EXPECT_EQ(resolve_vtable_slot(*find_def(f, "l1"), fa, m), "B.other");
  EXPECT_EQ(resolve_vtable_slot(*find_def(f, "lo"), fa, m), "O.m");
}

TEST(ResolveVtableSlot, AbsentCases) {
  Module m = parse_ir(kSlots);
  const Function& f = m.functions[0];
  FunctionAnalysis fa(f);
  EXPECT_FALSE(resolve_vtable_slot(*find_def(f, "ld"), fa, m).has_value());
  EXPECT_FALSE(resolve_vtable_slot(*find_def(f, "p1"), fa, m).has_value());
  EXPECT_FALSE(resolve_vtable_slot(*find_def(f, "l2"), fa, m).has_value());
}

TEST(PropagateAttributes, LaunderOfDereferenceableParam) {
  Module m = parse_ir(R"(module t
define ptr @f(ptr nonnull dereferenceable(8) %p) {
entry:
  %l = launder.invariant.group(%p)
  %s = strip.invariant.group(%l)
  ret %s
}
)");
  Function out = propagate_pointer_attributes(m.functions[0]);
  const Instruction* l = find_def(out, "l");
  EXPECT_TRUE(l->result_attrs.nonnull);
  EXPECT_EQ(l->result_attrs.dereferenceable_bytes, 8u);
  const Instruction* s = find_def(out, "s");
  EXPECT_TRUE(s->result_attrs.nonnull);
  EXPECT_EQ(s->result_attrs.dereferenceable_bytes, 8u);
  // Returned, so captured.
  EXPECT_FALSE(s->operand_nocapture);
}

TEST(PropagateAttributes, NocaptureInference) {
  Module m = parse_ir(R"(module t
declare void @ext(ptr %p)

define bool @f(ptr %p, ptr %q) {
entry:
  %l = launder.invariant.group(%p)
  call void @ext(%l)
  %s = strip.invariant.group(%q)
  %t = strip.invariant.group(%p)
  %c = icmp eq %s, %t
  ret %c
}
)");
  Function out = propagate_pointer_attributes(m.functions[0]);
  EXPECT_FALSE(find_def(out, "l")->operand_nocapture);
  EXPECT_TRUE(find_def(out, "s")->operand_nocapture);
  EXPECT_TRUE(find_def(out, "t")->operand_nocapture);
  // The input is left untouched.
  EXPECT_FALSE(find_def(m.functions[0], "s")->operand_nocapture);
}

}  // namespace
}  // namespace invar
