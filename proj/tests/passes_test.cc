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

#include <algorithm>
#include <sstream>

#include "invar/cfg.h"
#include "invar/diagnostic.h"
#include "invar/diff.h"
#include "invar/interp.h"
#include "invar/ir_text.h"
#include "invar/passes.h"
#include "invar/verifier.h"
#include "test_util.h"

namespace invar {
namespace {

using testing::count_if;
using testing::count_op;
using testing::find_def;
using testing::is_slot_load;
using testing::is_vptr_load;
using testing::lower;
using testing::read_corpus;

Function& only_fn(Module& m, const std::string& name) {
  Function* f = m.find_function(name);
  if (!f) throw Error("no function " + name);
  return *f;
}

const Instruction& ret_of(const Function& f) { return f.blocks.back().insts.back(); }

// ---- simplify-intrinsics -------------------------------------------------

TEST(SimplifyIntrinsics, StripOfStrip) {
  Module m = parse_ir(R"(module t
define ptr @f(ptr %x) {
entry:
  %y = strip.invariant.group(%x)
  %z = strip.invariant.group(%y)
  ret %z
}
)");
  Function& f = m.functions[0];
  PassCounts c = simplify_intrinsics(f);
  EXPECT_GE(c.intrinsic_rewrites, 1);
  EXPECT_EQ(ret_of(f).operands[0], "y");
  EXPECT_EQ(count_op(f, Opcode::kStrip), 1);
}

TEST(SimplifyIntrinsics, NullAndUndefFoldToOperand) {
  Module m = parse_ir(R"(module t
define ptr @f() {
entry:
  %n = null
  %s = strip.invariant.group(%n)
  %l = launder.invariant.group(%s)
  %u = undef ptr
  %lu = launder.invariant.group(%u)
  %su = strip.invariant.group(%lu)
  %c = icmp eq %l, %su
  ret %l
}
)");
  Function& f = m.functions[0];
  simplify_intrinsics(f);
  EXPECT_EQ(count_if(f, [](const Instruction& i) { return is_intrinsic(i.op); }), 0);
  EXPECT_EQ(ret_of(f).operands[0], "n");
  const Instruction* cmp = find_def(f, "c");
  ASSERT_NE(cmp, nullptr);
  EXPECT_EQ(cmp->operands, (std::vector<std::string>{"n", "u"}));
}

TEST(SimplifyIntrinsics, StripOfLaunderAndLaunderOfStrip) {
  Module m = parse_ir(R"(module t
define ptr @f(ptr %x) {
entry:
  %l = launder.invariant.group(%x)
  %s = strip.invariant.group(%l)
  %s2 = strip.invariant.group(%x)
  %l2 = launder.invariant.group(%s2)
  %c = icmp eq %s, %s2
  assume %c
  ret %l2
}
)");
  Function& f = m.functions[0];
  simplify_intrinsics(f);
  // Both strips now read %x directly and the launder no longer reads a strip.
  const Instruction* cmp = find_def(f, "c");
  const Instruction* a = find_def(f, cmp->operands[0]);
  const Instruction* b = find_def(f, cmp->operands[1]);
  EXPECT_EQ(a->op, Opcode::kStrip);
  EXPECT_EQ(a->operands[0], "x");
  EXPECT_EQ(b->operands[0], "x");
  const Instruction* r = find_def(f, ret_of(f).operands[0]);
  EXPECT_EQ(r->op, Opcode::kLaunder);
  EXPECT_EQ(r->operands[0], "x");
}

TEST(SimplifyIntrinsics, LaunderOfLaunderIsSingleLaunder) {
  Module m = parse_ir(R"(module t
define ptr @f(ptr %x) {
entry:
  %a = launder.invariant.group(%x)
  %b = launder.invariant.group(%a)
  ret %b
}
)");
  Function& f = m.functions[0];
  simplify_intrinsics(f);
  EXPECT_EQ(count_op(f, Opcode::kLaunder), 1);
  const Instruction* r = find_def(f, ret_of(f).operands[0]);
  EXPECT_EQ(r->op, Opcode::kLaunder);
  EXPECT_EQ(r->operands[0], "x");
}

// ---- fold-pointer-comparisons ---------------------------------------------

TEST(FoldComparisons, PointerEqualsItsLaunder) {
  Module m = lower(read_corpus("launder_compare.moo"));
  Function& f = only_fn(m, "main");
  simplify_intrinsics(f);
  PassCounts c = fold_pointer_comparisons(f);
  EXPECT_EQ(c.folded_comparisons, 1);
  EXPECT_EQ(count_op(f, Opcode::kICmpEq), 0);
}

TEST(FoldComparisons, StripLaunderVersusStrip) {
  Module m = parse_ir(R"(module t
define bool @f(ptr %x) {
entry:
  %l = launder.invariant.group(%x)
  %a = strip.invariant.group(%l)
  %b = strip.invariant.group(%x)
  %c = icmp eq %a, %b
  ret %c
}
)");
  Function& f = m.functions[0];
  simplify_intrinsics(f);
  fold_pointer_comparisons(f);
  const Instruction* r = find_def(f, ret_of(f).operands[0]);
  EXPECT_EQ(r->op, Opcode::kConstInt);
  EXPECT_EQ(r->type, Type::kBool);
  EXPECT_EQ(r->imm, 1);
}

TEST(FoldComparisons, DistinctLaundersAreNotFolded) {
  const char* text = R"(module t
define bool @f(ptr %x) {
entry:
  %a = launder.invariant.group(%x)
  %b = launder.invariant.group(%x)
  %c = icmp eq %a, %b
  ret %c
}
)";
  Module m = parse_ir(text);
  Function& f = m.functions[0];
  simplify_intrinsics(f);
  EXPECT_EQ(fold_pointer_comparisons(f).folded_comparisons, 0);
  EXPECT_EQ(count_op(f, Opcode::kICmpEq), 1);
  Module whole = parse_ir(text);
  run_pipeline(whole, PipelineConfig::default_pipeline());
  EXPECT_EQ(count_op(whole, Opcode::kICmpEq), 1);
}

TEST(FoldComparisons, AllocationIsNotNull) {
  Module m = parse_ir(R"(module t
define bool @f() {
entry:
  %x = alloc 8
  %n = null
  %c = icmp eq %x, %n
  ret %c
}
)");
  Function& f = m.functions[0];
  EXPECT_EQ(fold_pointer_comparisons(f).folded_comparisons, 1);
  const Instruction* r = find_def(f, ret_of(f).operands[0]);
  EXPECT_EQ(r->op, Opcode::kConstInt);
  EXPECT_EQ(r->imm, 0);
}

// ---- forward-invariant-loads ---------------------------------------------

constexpr const char* kForwardListing = R"(module t
declare void @foo(ptr %p)

define int @f(ptr %ptr) {
entry:
  %v = const int 42
  store %v, %ptr !invariant.group
  call void @foo(%ptr)
  %a = load int %ptr !invariant.group
  %ptr2 = launder.invariant.group(%ptr)
  %d = load int %ptr2 !invariant.group
  %s = add %a, %d
  ret %s
}
)";

TEST(ForwardInvariantLoads, StoreForwardsAcrossCall) {
  Module m = parse_ir(kForwardListing);
  Function& f = m.functions[0];
  PassCounts c = forward_invariant_loads(f, m);
  EXPECT_EQ(c.forwarded_invariant_loads, 1);
  const Instruction* s = find_def(f, "s");
  EXPECT_EQ(s->operands[0], "v");
}

TEST(ForwardInvariantLoads, NotAcrossLaunder) {
  Module m = parse_ir(kForwardListing);
  Function& f = m.functions[0];
  forward_invariant_loads(f, m);
  const Instruction* s = find_def(f, "s");
  EXPECT_EQ(s->operands[1], "d");
  ASSERT_NE(find_def(f, "d"), nullptr);
}

TEST(ForwardInvariantLoads, RepeatedVirtualCallsShareOneVptrLoad) {
  Module m = lower(read_corpus("multiple_calls.moo"));
  Function& f = only_fn(m, "multiple_calls");
  PassCounts c = forward_invariant_loads(f, m);
  EXPECT_GE(c.forwarded_invariant_loads, 1);
  EXPECT_EQ(count_if(f, is_vptr_load), 1);
}

TEST(ForwardInvariantLoads, NotThroughStrip) {
  Module m = parse_ir(R"(module t
define ptr @f(ptr %p, ptr %v) {
entry:
  store %v, %p !invariant.group
  %s = strip.invariant.group(%p)
  %x = load ptr %s !invariant.group
  ret %x
}
)");
  Function& f = m.functions[0];
  EXPECT_EQ(forward_invariant_loads(f, m).forwarded_invariant_loads, 0);
}

TEST(ForwardInvariantLoads, ResolvesSlotFromKnownVtable) {
  Module m = parse_ir(R"(module t
vtable @A.vtable for A linkage=definition [@A.f]
declare void @A.f(ptr %this)

define ptr @g() {
entry:
  %vt = global @A.vtable
  %slot = fieldaddr %vt, 0
  %fn = load ptr %slot !invariant.load
  ret %fn
}
)");
  Function& f = m.functions[0];
  PassCounts c = forward_invariant_loads(f, m);
  EXPECT_EQ(c.resolved_slot_loads, 1);
  const Instruction* r = find_def(f, ret_of(f).operands[0]);
  EXPECT_EQ(r->op, Opcode::kGlobalRef);
  EXPECT_EQ(r->symbol, "A.f");
}

// ---- fold-assumes ---------------------------------------------------------

TEST(FoldAssumes, OutlineConstructorTriple) {
  Module m = lower(read_corpus("outline_ctor.moo"));
  Function& f = only_fn(m, "foo");
  forward_invariant_loads(f, m);
  PassCounts c = fold_assumes(f);
  EXPECT_EQ(c.folded_assumes, 1);
  // The virtual call's slot address now hangs off the vtable global.
  for (const BasicBlock& bb : f.blocks) {
    for (const Instruction& i : bb.insts) {
      if (i.op == Opcode::kFieldAddr) {
        const Instruction* base = find_def(f, i.operands[0]);
        ASSERT_NE(base, nullptr);
        EXPECT_EQ(base->op, Opcode::kGlobalRef);
        EXPECT_EQ(base->symbol, "C.vtable");
      }
    }
  }
}

TEST(FoldAssumes, AssumeTrueIsDeletedWithDeadFeeders) {
  // Inlined constructor: the compare folds, the assume becomes dead.
  Module src = lower(R"(
class C { ctor() { print(0); } virtual void f() { print(3); } }
void main() { C* c = new C; c->f(); }
)");
  Function& f = only_fn(src, "main");
  inline_calls(f, src, PipelineConfig::default_pipeline());
  forward_invariant_loads(f, src);
  fold_assumes(f);
  EXPECT_EQ(count_op(f, Opcode::kAssume), 0);
}

TEST(FoldAssumes, NonEqualityAssumeLeftAlone) {
  Module m = parse_ir(R"(module t
define int @f(bool %b, int %x) {
entry:
  assume %b
  ret %x
}
)");
  Function& f = m.functions[0];
  PassCounts c = fold_assumes(f);
  EXPECT_EQ(c.folded_assumes, 0);
  EXPECT_EQ(count_op(f, Opcode::kAssume), 1);
}

// ---- devirtualize ---------------------------------------------------------

TEST(Devirtualize, OutlineConstructorCall) {
  Module m = lower(read_corpus("outline_ctor.moo"));
  Function& f = only_fn(m, "foo");
  forward_invariant_loads(f, m);
  fold_assumes(f);
  forward_invariant_loads(f, m);
  PassCounts c = devirtualize_calls(f, m);
  EXPECT_EQ(c.devirtualized_calls, 1);
  EXPECT_EQ(count_op(f, Opcode::kCallIndirect), 0);
  EXPECT_EQ(count_if(f, [](const Instruction& i) {
              return i.op == Opcode::kCallDirect && i.symbol == "C.virt_meth";
            }),
            1);
}

TEST(Devirtualize, DeclarationVtableAndUnknownCallee) {
  Module m = parse_ir(R"(module t
vtable @D.vtable for D linkage=declaration [@D.m]
declare void @D.m(ptr %this)

define void @f(ptr %o, ptr %fp) {
entry:
  %vt = global @D.vtable
  %slot = fieldaddr %vt, 0
  %fn = load ptr %slot !invariant.load
  call_indirect void %fn(%o)
  call_indirect void %fp(%o)
  ret
}
)");
  Function& f = m.functions[0];
  forward_invariant_loads(f, m);
  EXPECT_EQ(devirtualize_calls(f, m).devirtualized_calls, 0);
  EXPECT_EQ(count_op(f, Opcode::kCallIndirect), 2);
}

// ---- hoist-invariant-loads -------------------------------------------------

int loop_index(const Function& f, const std::vector<Loop>& loops, int block) {
  for (std::size_t k = 0; k < loops.size(); ++k) {
    if (loops[k].contains(block)) return static_cast<int>(k);
  }
  (void)f;
  return -1;
}

TEST(Hoist, VirtualCallInLoop) {
  Module m = lower(read_corpus("loop_hoist.moo"));
  Function& f = only_fn(m, "main");
  PassCounts c = hoist_invariant_loads(f);
  EXPECT_EQ(c.hoisted_loads, 2);
  EXPECT_TRUE(verify_module(m).empty());
  DominatorTree dt(f);
  auto loops = find_natural_loops(f, dt);
  ASSERT_EQ(loops.size(), 1u);
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    for (const Instruction& i : f.blocks[b].insts) {
      if (is_vptr_load(i) || is_slot_load(i)) {
        EXPECT_EQ(loop_index(f, loops, static_cast<int>(b)), -1) << print_instruction(i);
      }
      if (i.op == Opcode::kCallIndirect) {
        EXPECT_EQ(loop_index(f, loops, static_cast<int>(b)), 0);
      }
    }
  }
}

TEST(Hoist, VaryingAddressStays) {
  Module m = parse_ir(R"(module t
define void @f(ptr nonnull dereferenceable(8) %a, ptr nonnull dereferenceable(8) %b, bool %c) {
entry:
  br loop
loop:
  %p = phi ptr [%a, entry], [%b, loop]
  %v = load ptr %p !invariant.group
  condbr %c, loop, exit
exit:
  ret
}
)");
  Function& f = m.functions[0];
  EXPECT_EQ(hoist_invariant_loads(f).hoisted_loads, 0);
}

TEST(Hoist, GuardedLoopStillSound) {
  // The loop body never runs; the hoisted loads are speculatable.
  std::string src = R"(
class A { virtual void f() { print(1); } }
void main() {
  A* a = new A;
  A* p = launder(a);
  int i = 0;
  while (i < 0) {
    p->f();
    i = i + 1;
  }
  print(7);
}
)";
  Module m = lower(src);
  Function& f = only_fn(m, "main");
  EXPECT_EQ(hoist_invariant_loads(f).hoisted_loads, 2);
  EXPECT_EQ(diff_run(src, PipelineConfig::default_pipeline()).verdict, DiffVerdict::kEqual);
}

// ---- dse -------------------------------------------------------------------

TEST(DeadStores, StoreOverwrittenThroughLaunder) {
  Module m = parse_ir(R"(module t
declare void @print(int %v)

define void @f(ptr %p) {
entry:
  %a = const int 42
  store %a, %p
  %b = launder.invariant.group(%p)
  %c = const int 13
  store %c, %b
  %v = load int %b
  call void @print(%v)
  ret
}
)");
  Function& f = m.functions[0];
  EXPECT_EQ(eliminate_dead_stores(f).eliminated_stores, 1);
  EXPECT_EQ(count_op(f, Opcode::kStore), 1);
  EXPECT_EQ(f.blocks[0].insts[3].op, Opcode::kStore);
}

TEST(DeadStores, MayAliasReadKeepsStore) {
  Module m = parse_ir(R"(module t
define int @f(ptr %p, ptr %q) {
entry:
  %a = const int 42
  store %a, %p
  %v = load int %q
  store %v, %p
  ret %v
}
)");
  Function& f = m.functions[0];
  EXPECT_EQ(eliminate_dead_stores(f).eliminated_stores, 0);
}

TEST(DeadStores, StoreToUnreadAllocation) {
  Module m = parse_ir(R"(module t
define void @f() {
entry:
  %x = alloc 16
  %a = const int 1
  %f = fieldaddr %x, 8
  store %a, %f
  ret
}
)");
  Function& f = m.functions[0];
  EXPECT_EQ(eliminate_dead_stores(f).eliminated_stores, 1);
  EXPECT_EQ(count_op(f, Opcode::kStore), 0);
}

// ---- inline ------------------------------------------------------------------

TEST(Inline, ConstructorInBar) {
  Module m = lower(read_corpus("bar.moo"));
  Function f = only_fn(m, "bar");
  PassCounts c = inline_calls(f, m, PipelineConfig::default_pipeline());
  EXPECT_GE(c.inlined_calls, 1);
  EXPECT_EQ(count_if(f, [](const Instruction& i) {
              return i.op == Opcode::kCallDirect && i.symbol == "A.ctor";
            }),
            0);
  // The constructor's invariant.group store survives inlining verbatim.
  EXPECT_EQ(count_if(f, [](const Instruction& i) {
              return i.op == Opcode::kStore && i.md.invariant_group;
            }),
            1);
}

TEST(Inline, RecursiveAndExternalCalleesStay) {
  Module m = lower(R"(
extern void ext(int x);
int fact(int n) {
  if (n < 1) { return 1; }
  return n * fact(n - 1);
}
void main() { print(fact(5)); ext(1); }
)");
  Function f = only_fn(m, "main");
  inline_calls(f, m, PipelineConfig::default_pipeline());
  EXPECT_EQ(count_if(f, [](const Instruction& i) {
              return i.op == Opcode::kCallDirect && i.symbol == "fact";
            }),
            1);
  EXPECT_EQ(count_if(f, [](const Instruction& i) {
              return i.op == Opcode::kCallDirect && i.symbol == "ext";
            }),
            1);
}

TEST(Inline, ThresholdRespected) {
  Module m = lower(read_corpus("bar.moo"));
  Function f = only_fn(m, "bar");
  PipelineConfig cfg = PipelineConfig::default_pipeline();
  cfg.inline_threshold = 0;
  EXPECT_EQ(inline_calls(f, m, cfg).inlined_calls, 0);
}

// ---- lower-for-codegen -------------------------------------------------------

bool artifact_free(const Module& m) {
  std::string text = print_ir(m);
  for (const char* token : {"launder.invariant.group", "strip.invariant.group", "assume",
                            "!invariant", "optimization_only"}) {
    if (text.find(token) != std::string::npos) return false;
  }
  return true;
}

TEST(LowerForCodegen, RemovesArtifactsAndIsIdempotent) {
  Module m = lower(read_corpus("g.moo"));
  run_pipeline(m, PipelineConfig::default_pipeline());
  lower_for_codegen(m);
  EXPECT_TRUE(artifact_free(m));
  EXPECT_TRUE(verify_module(m).empty());
  Module again = m;
  PassReport r = lower_for_codegen(again);
  EXPECT_EQ(again, m);
  EXPECT_FALSE(r.total.any());
}

TEST(LowerForCodegen, UnresolvedAssumeTakesLoadAndCompare) {
  Module m = lower(read_corpus("outline_ctor.moo"));
  Function& before = only_fn(m, "foo");
  int loads_before = count_op(before, Opcode::kLoad);
  lower_for_codegen(m);
  Function& f = only_fn(m, "foo");
  EXPECT_EQ(count_op(f, Opcode::kAssume), 0);
  EXPECT_EQ(count_op(f, Opcode::kICmpEq), 0);
  EXPECT_EQ(count_op(f, Opcode::kLoad), loads_before - 1);
}

TEST(LowerForCodegen, DemotesOptimizationOnlyVtables) {
  Module m = lower("class A { inline virtual void f() { print(1); } } void main() { A* a = new A; a->f(); }");
  ASSERT_EQ(m.vtables[0].linkage, Linkage::kOptimizationOnly);
  lower_for_codegen(m);
  EXPECT_EQ(m.vtables[0].linkage, Linkage::kDeclaration);
}

// ---- run_pipeline ----------------------------------------------------------

TEST(Pipeline, GuardedCallInGCallsB) {
  Module m = lower(read_corpus("g.moo"));
  run_pipeline(m, PipelineConfig::default_pipeline());
  const Function& g = only_fn(m, "g");
  for (std::size_t b = 1; b < g.blocks.size(); ++b) {
    for (const Instruction& i : g.blocks[b].insts) {
      EXPECT_FALSE(i.op == Opcode::kCallDirect && i.symbol == "A.virt_meth");
    }
  }
  EXPECT_EQ(eval_module(m, "main", ExecMode::kChecked).prints,
            (std::vector<std::int64_t>{1, 2}));
}

TEST(Pipeline, EmptyPassListIsIdentity) {
  Module m = lower(read_corpus("g.moo"));
  Module before = m;
  PipelineConfig cfg;
  PassReport r = run_pipeline(m, cfg);
  EXPECT_EQ(m, before);
  EXPECT_FALSE(r.total.any());
}

TEST(Pipeline, OutlineConstructorDevirtualized) {
  Module m = lower(read_corpus("outline_ctor.moo"));
  PassReport r = run_pipeline(m, PipelineConfig::default_pipeline());
  EXPECT_GE(r.total.devirtualized_calls, 1);
}

TEST(Pipeline, RejectsBadConfigs) {
  Module m = lower(read_corpus("g.moo"));
  PipelineConfig bad;
  bad.passes = {"inline", "no-such-pass"};
  EXPECT_THROW(run_pipeline(m, bad), Error);
  PipelineConfig misplaced;
  misplaced.passes = {"lower-for-codegen", "inline"};
  EXPECT_THROW(run_pipeline(m, misplaced), Error);
}

TEST(Pipeline, ReportTextIsKeyValue) {
  Module m = lower(read_corpus("bar.moo"));
  PassReport r = run_pipeline(m, PipelineConfig::default_pipeline());
  std::string text = r.to_text();
  EXPECT_EQ(text.rfind("devirtualized_calls=4\n", 0), 0u) << text;
  EXPECT_NE(text.find("@bar.devirtualized_calls=2\n"), std::string::npos);
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    EXPECT_NE(line.find('='), std::string::npos) << line;
  }
}

TEST(Pipeline, KnownPassNames) {
  const auto& names = known_passes();
  for (const std::string& p : PipelineConfig::default_pipeline().passes) {
    EXPECT_NE(std::find(names.begin(), names.end(), p), names.end()) << p;
  }
  EXPECT_EQ(PipelineConfig::default_pipeline().passes.front(), "inline");
  EXPECT_EQ(PipelineConfig::default_pipeline().fixpoint_iterations, 4);
}

}  // namespace
}  // namespace invar
