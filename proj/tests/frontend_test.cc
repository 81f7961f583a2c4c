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

#include "invar/diagnostic.h"
#include "invar/ir_text.h"
#include "invar/moo/lowering.h"
#include "invar/moo/parser.h"
#include "invar/verifier.h"
#include "test_util.h"

namespace invar {
namespace {

using testing::corpus_programs;
using testing::count_op;
using testing::find_def;
using testing::lower;
using testing::read_corpus;

std::string syntax_error(const std::string& src) {
  try {
    moo::parse_source(src);
  } catch (const SyntaxError& e) {
    return e.message();
  }
  return "";
}

const Function& fn(const Module& m, const std::string& name) {
  const Function* f = m.find_function(name);
  if (!f) throw Error("no function " + name);
  return *f;
}

// Instructions of a straight-line function, in order.
std::vector<const Instruction*> flat(const Function& f) {
  std::vector<const Instruction*> out;
  for (const BasicBlock& bb : f.blocks) {
    for (const Instruction& i : bb.insts) out.push_back(&i);
  }
  return out;
}

constexpr const char* kHierarchy = R"(
class A {
  int x;
  dtor() { print(7); }
  virtual void virt_meth() { print(1); }
}
class B : A {
  ctor() { print(5); }
  dtor() { print(8); }
  virtual void virt_meth() { print(2); }
}
)";

TEST(Parser, ExternalFunctionListing) {
  moo::SourceProgram p = moo::parse_source(R"(
struct A {
  virtual void virt_meth();
}
extern void external_fun(A* a);
void foo() {
  A* a = new A;
  external_fun(a);
  a->virt_meth();
}
void bar() {
  A* a = new A;
  a->virt_meth();
  a->virt_meth();
}
)");
  ASSERT_EQ(p.classes.size(), 1u);
  EXPECT_TRUE(p.classes[0].dynamic);
  EXPECT_EQ(p.externals.size(), 1u);
  EXPECT_EQ(p.functions.size(), 2u);
}

TEST(Parser, EmptyFileIsEmptyProgram) {
  moo::SourceProgram p = moo::parse_source("");
  EXPECT_TRUE(p.classes.empty());
  EXPECT_TRUE(p.functions.empty());
  EXPECT_TRUE(p.externals.empty());
}

TEST(Parser, OverrideOfNonVirtual) {
  EXPECT_EQ(syntax_error("class A { void m() {} } class B : A { virtual void m() {} }"),
            "override of non-virtual method 'm'");
}

TEST(Parser, OverrideArityMismatch) {
  std::string msg =
      syntax_error("class A { virtual void m() {} } class B : A { virtual void m(int x) {} }");
  EXPECT_EQ(msg.rfind("override arity mismatch", 0), 0u) << msg;
}

TEST(Parser, UnknownIdentifierCarriesPosition) {
  try {
    moo::parse_source("void main() {\n  print(y);\n}\n");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.message(), "unknown identifier 'y'");
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 9);
  }
}

TEST(Parser, LayoutAndVtableOrder) {
  moo::SourceProgram p = moo::parse_source(R"(
class A { int a; virtual void f() {} virtual void g() {} }
class B : A { int b; virtual void g() {} virtual void h() {} }
)");
  const moo::ClassDecl* b = p.find_class("B");
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->size, 24);
  EXPECT_EQ(b->field_offsets.at("a"), 8);
  EXPECT_EQ(b->field_offsets.at("b"), 16);
  ASSERT_EQ(b->vtable.size(), 3u);
  EXPECT_EQ(b->vtable[0].method, "f");
  EXPECT_EQ(b->vtable[0].definer, "A");
  EXPECT_EQ(b->vtable[1].method, "g");
  EXPECT_EQ(b->vtable[1].definer, "B");
  EXPECT_EQ(b->vtable[2].method, "h");
}

TEST(Lowering, ConstructorLaundersThenStoresOwnVtable) {
  Module m = lower(kHierarchy);
  auto insts = flat(fn(m, "B.ctor"));
  // launder(this); call A.ctor(laundered); global B.vtable; store !ig to this.
  ASSERT_GE(insts.size(), 4u);
  EXPECT_EQ(insts[0]->op, Opcode::kLaunder);
  EXPECT_EQ(insts[0]->operands[0], "this");
  EXPECT_EQ(insts[1]->op, Opcode::kCallDirect);
  EXPECT_EQ(insts[1]->symbol, "A.ctor");
  EXPECT_EQ(insts[1]->operands[0], insts[0]->result);
  EXPECT_EQ(insts[2]->op, Opcode::kGlobalRef);
  EXPECT_EQ(insts[2]->symbol, "B.vtable");
  EXPECT_EQ(insts[3]->op, Opcode::kStore);
  EXPECT_TRUE(insts[3]->md.invariant_group);
  EXPECT_EQ(insts[3]->operands, (std::vector<std::string>{insts[2]->result, "this"}));
}

TEST(Lowering, DestructorStoresOwnVtableFirstThenLaunders) {
  Module m = lower(kHierarchy);
  auto insts = flat(fn(m, "B.dtor"));
  ASSERT_GE(insts.size(), 2u);
  EXPECT_EQ(insts[0]->op, Opcode::kGlobalRef);
  EXPECT_EQ(insts[0]->symbol, "B.vtable");
  EXPECT_EQ(insts[1]->op, Opcode::kStore);
  EXPECT_TRUE(insts[1]->md.invariant_group);
  // The base destructor receives a laundered pointer.
  const Instruction* base_call = nullptr;
  for (const Instruction* i : insts) {
    if (i->op == Opcode::kCallDirect && i->symbol == "A.dtor") base_call = i;
  }
  ASSERT_NE(base_call, nullptr);
  const Instruction* arg = find_def(fn(m, "B.dtor"), base_call->operands[0]);
  ASSERT_NE(arg, nullptr);
  EXPECT_EQ(arg->op, Opcode::kLaunder);
}

TEST(Lowering, PlacementNewAndLaunderBuiltinLaunder) {
  Module m = lower(std::string(kHierarchy) + R"(
void main() {
  A* a = new A;
  A* b = new(a) B;
  A* c = launder(b);
}
)");
  const Function& f = fn(m, "main");
  EXPECT_EQ(count_op(f, Opcode::kLaunder), 2);
  for (const Instruction* i : flat(f)) {
    if (i->op == Opcode::kCallDirect && i->symbol == "B.ctor") {
      EXPECT_EQ(find_def(f, i->operands[0])->op, Opcode::kLaunder);
    }
  }
}

TEST(Lowering, UnionAccessLaunders) {
  Module m = lower(std::string(kHierarchy) + R"(
union U { A; B; }
void main() {
  U* u = new U;
  A* a = new(u) A;
  (u as A)->virt_meth();
}
)");
  const Function& f = fn(m, "main");
  // Placement new and the `as` access.
  EXPECT_EQ(count_op(f, Opcode::kLaunder), 2);
  for (const Instruction* i : flat(f)) {
    if (i->op == Opcode::kLoad && i->md.invariant_group) {
      EXPECT_EQ(find_def(f, i->operands[0])->op, Opcode::kLaunder);
    }
  }
}

TEST(Lowering, PointerEqualityStripsBothOperands) {
  Module m = lower(read_corpus("g.moo"));
  const Function& f = fn(m, "g");
  int compares = 0;
  for (const Instruction* i : flat(f)) {
    if (i->op != Opcode::kICmpEq) continue;
    ++compares;
    for (const std::string& op : i->operands) {
      EXPECT_EQ(find_def(f, op)->op, Opcode::kStrip);
    }
    EXPECT_NE(find_def(f, i->operands[0])->operands[0],
              find_def(f, i->operands[1])->operands[0]);
  }
  EXPECT_EQ(compares, 1);
  // Printed form keeps both names and the strips.
  std::string text = print_function(f);
  EXPECT_NE(text.find("strip.invariant.group(%a)"), std::string::npos);
  EXPECT_NE(text.find("strip.invariant.group(%b)"), std::string::npos);
}

TEST(Lowering, IntegerCastsStripAndLaunder) {
  Module m = lower(std::string(kHierarchy) + R"(
void main() {
  A* a = new A;
  int i = ptr2int(a);
  A* b = int2ptr<A>(i);
  b->virt_meth();
}
)");
  const Function& f = fn(m, "main");
  for (const Instruction* i : flat(f)) {
    if (i->op == Opcode::kPtrToInt) EXPECT_EQ(find_def(f, i->operands[0])->op, Opcode::kStrip);
    if (i->op == Opcode::kLoad && i->md.invariant_group) {
      const Instruction* src = find_def(f, i->operands[0]);
      ASSERT_EQ(src->op, Opcode::kLaunder);
      EXPECT_EQ(find_def(f, src->operands[0])->op, Opcode::kIntToPtr);
    }
  }
}

TEST(Lowering, VirtualCallShape) {
  Module m = lower(read_corpus("multiple_calls.moo"));
  auto insts = flat(fn(m, "multiple_calls"));
  ASSERT_GE(insts.size(), 4u);
  EXPECT_EQ(insts[0]->op, Opcode::kLoad);
  EXPECT_TRUE(insts[0]->md.invariant_group);
  EXPECT_EQ(insts[0]->operands[0], "a");
  EXPECT_EQ(insts[1]->op, Opcode::kFieldAddr);
  EXPECT_EQ(insts[1]->imm, 0);
  EXPECT_EQ(insts[2]->op, Opcode::kLoad);
  EXPECT_TRUE(insts[2]->md.invariant_load);
  EXPECT_EQ(insts[3]->op, Opcode::kCallIndirect);
  EXPECT_EQ(insts[3]->operands[0], insts[2]->result);
}

TEST(Lowering, OutlineConstructorAssumptionLoad) {
  Module m = lower(read_corpus("outline_ctor.moo"));
  auto insts = flat(fn(m, "foo"));
  std::size_t k = 0;
  while (k < insts.size() && !(insts[k]->op == Opcode::kCallDirect && insts[k]->symbol == "C.ctor")) {
    ++k;
  }
  ASSERT_LT(k + 4, insts.size());
  EXPECT_EQ(insts[k + 1]->op, Opcode::kLoad);
  EXPECT_TRUE(insts[k + 1]->md.invariant_group);
  EXPECT_EQ(insts[k + 2]->op, Opcode::kGlobalRef);
  EXPECT_EQ(insts[k + 2]->symbol, "C.vtable");
  EXPECT_EQ(insts[k + 3]->op, Opcode::kICmpEq);
  EXPECT_EQ(insts[k + 4]->op, Opcode::kAssume);
  EXPECT_EQ(insts[k + 4]->operands[0], insts[k + 3]->result);
  EXPECT_NE(m.find_declaration("C.ctor"), nullptr);
}

TEST(Lowering, ExternKeywordMarksOutlineConstructor) {
  Module m = lower(R"(
class C { extern ctor(); virtual void f() { print(1); } }
void main() { C* c = new C; c->f(); }
)");
  EXPECT_EQ(count_op(fn(m, "main"), Opcode::kAssume), 1);
}

TEST(Lowering, NonStrictEmitsNoArtifacts) {
  for (const std::string& name : corpus_programs()) {
    Module m = lower(read_corpus(name), false);
    EXPECT_TRUE(verify_module(m).empty()) << name;
    for (const Function& f : m.functions) {
      EXPECT_EQ(testing::count_if(f, [](const Instruction& i) {
                  return is_intrinsic(i.op) || !i.md.empty();
                }),
                0)
          << name << " @" << f.name;
    }
  }
}

TEST(Lowering, InvariantGroupStoresWriteVtablesAtOffsetZero) {
  for (const std::string& name : corpus_programs()) {
    Module m = lower(read_corpus(name));
    for (const Function& f : m.functions) {
      for (const Instruction* i : flat(f)) {
        if (i->op != Opcode::kStore || !i->md.invariant_group) continue;
        const Instruction* v = find_def(f, i->operands[0]);
        ASSERT_NE(v, nullptr);
        EXPECT_EQ(v->op, Opcode::kGlobalRef);
        EXPECT_NE(m.find_vtable(v->symbol), nullptr);
        const Instruction* addr = find_def(f, i->operands[1]);
        EXPECT_TRUE(addr == nullptr || addr->op != Opcode::kFieldAddr || addr->imm == 0);
      }
    }
  }
}

TEST(Lowering, StripDisciplineHoldsOnCorpus) {
  for (const std::string& name : corpus_programs()) {
    Module m = lower(read_corpus(name));
    EXPECT_TRUE(moo::check_strip_discipline(m).empty()) << name;
  }
}

TEST(Lowering, StripDisciplineFlagsRawComparison) {
  Module m = parse_ir(R"(module t
define bool @f(ptr %a, ptr %b) {
entry:
  %c = icmp eq %a, %b
  ret %c
}
)");
  auto diags = moo::check_strip_discipline(m);
  ASSERT_EQ(diags.size(), 2u);
  EXPECT_EQ(diags[0].rule, "strip-discipline");
}

TEST(Lowering, IsDeterministic) {
  for (const std::string& name : corpus_programs()) {
    EXPECT_EQ(lower(read_corpus(name)), lower(read_corpus(name))) << name;
  }
}

TEST(Lowering, RejectsUnresolvedProgram) {
  moo::SourceProgram p;
  moo::ClassDecl c;
  c.name = "A";
  p.classes.push_back(c);
  EXPECT_THROW(moo::lower_to_ir(p, {}), Error);
}

TEST(Vtables, LinkageFollowsKeyFunction) {
  moo::SourceProgram p = moo::parse_source(R"(
class Key { virtual void f() {} }
class Inline { inline virtual void f() {} }
class Ext { virtual void f(); }
)");
  auto vts = moo::emit_vtables(p, {});
  ASSERT_EQ(vts.size(), 3u);
  EXPECT_EQ(vts[0].linkage, Linkage::kDefinition);
  EXPECT_EQ(vts[1].linkage, Linkage::kOptimizationOnly);
  EXPECT_EQ(vts[2].linkage, Linkage::kDeclaration);
  EXPECT_EQ(vts[2].slots, (std::vector<std::string>{"Ext.f"}));

  moo::LoweringOptions force;
  force.force_emit_vtables = true;
  EXPECT_EQ(moo::emit_vtables(p, force)[2].linkage, Linkage::kOptimizationOnly);
}

TEST(Vtables, KeyFunctionDefinedElsewhere) {
  // The key function `f` is declared only, so no definition here even
  // though `g` has a body.
  moo::SourceProgram p = moo::parse_source("class A { virtual void f(); inline virtual void g() {} }");
  EXPECT_FALSE(p.classes[0].has_key_function);
  EXPECT_EQ(moo::emit_vtables(p, {})[0].linkage, Linkage::kDeclaration);
}

TEST(Vtables, SlotsFollowOverrides) {
  moo::SourceProgram p = moo::parse_source(kHierarchy);
  auto vts = moo::emit_vtables(p, {});
  ASSERT_EQ(vts.size(), 2u);
  EXPECT_EQ(vts[1].name, "B.vtable");
  EXPECT_EQ(vts[1].class_name, "B");
  EXPECT_EQ(vts[1].slots, (std::vector<std::string>{"B.virt_meth"}));
}

}  // namespace
}  // namespace invar
