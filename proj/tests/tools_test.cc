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
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "invar/diagnostic.h"
#include "invar/diff.h"
#include "invar/fuzz.h"
#include "invar/ir_text.h"
#include "invar/link.h"
#include "invar/moo/parser.h"
#include "invar/verifier.h"
#include "test_util.h"

namespace invar {
namespace {

using testing::corpus_path;
using testing::corpus_programs;
using testing::lower;
using testing::read_corpus;

// ---- diff --------------------------------------------------------------------

TEST(Diff, CorpusIsEqual) {
  for (const std::string& name : corpus_programs()) {
    DiffResult r = diff_run(read_corpus(name), PipelineConfig::default_pipeline());
    EXPECT_EQ(r.verdict, DiffVerdict::kEqual) << name << ": " << r.detail;
  }
}

TEST(Diff, UndefinedProgramIsSkipped) {
  DiffResult r = diff_run(read_corpus("stale_pointer.moo"), PipelineConfig::default_pipeline());
  EXPECT_EQ(r.verdict, DiffVerdict::kSkippedUb);
  EXPECT_EQ(diff_verdict_name(r.verdict), "skipped-ub");
}

// A pass list that forwards a load across a placement-new must be caught.
TEST(Diff, DetectsBrokenOptimization) {
  Module m = lower(read_corpus("g.moo"));
  Module broken = m;
  Function* g = broken.find_function("g");
  for (BasicBlock& bb : g->blocks) {
    for (Instruction& i : bb.insts) {
      if (i.op == Opcode::kLoad && i.md.invariant_group && bb.label == "if.then") {
        i.op = Opcode::kGlobalRef;
        i.operands.clear();
        i.md = {};
        i.symbol = "A.vtable";
      }
    }
  }
  ASSERT_TRUE(verify_module(broken).empty());
  ExecTrace ref = eval_module(m, "main", ExecMode::kRaw);
  ExecTrace bad = eval_module(broken, "main", ExecMode::kRaw);
  EXPECT_FALSE(same_observable(ref, bad));
  EXPECT_TRUE(same_observable(ref, ref));
}

TEST(Diff, NonStrictLoweringIsEqualToo) {
  DiffOptions opts;
  opts.lowering.strict_vtable_pointers = false;
  for (const std::string& name : corpus_programs()) {
    DiffResult r = diff_run(read_corpus(name), PipelineConfig::default_pipeline(), opts);
    EXPECT_EQ(r.verdict, DiffVerdict::kEqual) << name;
    EXPECT_EQ(r.report.total.devirtualized_calls, 0) << name;
  }
}

// ---- fuzz --------------------------------------------------------------------

TEST(Fuzz, Deterministic) {
  auto a = enumerate_fuzz_programs(7, 20);
  auto b = enumerate_fuzz_programs(7, 20);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[13], generate_fuzz_program(7, 13));
  EXPECT_NE(a, enumerate_fuzz_programs(8, 20));
}

TEST(Fuzz, ProgramsParseAndMostAreDefined) {
  auto programs = enumerate_fuzz_programs(3, 200);
  int defined = 0;
  for (const std::string& src : programs) {
    ASSERT_NO_THROW(moo::parse_source(src)) << src;
    DiffResult r = diff_run(src, PipelineConfig::default_pipeline());
    EXPECT_NE(r.verdict, DiffVerdict::kMismatch) << src << "\n" << r.detail;
    if (r.verdict == DiffVerdict::kEqual) ++defined;
  }
  EXPECT_GE(defined, 100);
}

TEST(Fuzz, StaleUsesCanBeDisabled) {
  FuzzOptions opts;
  opts.stale_use_period = 0;
  int skipped = 0;
  for (const std::string& src : enumerate_fuzz_programs(5, 64, opts)) {
    if (diff_run(src, PipelineConfig::default_pipeline()).verdict == DiffVerdict::kSkippedUb) {
      ++skipped;
    }
  }
  FuzzOptions on;
  int skipped_on = 0;
  for (const std::string& src : enumerate_fuzz_programs(5, 64, on)) {
    if (diff_run(src, PipelineConfig::default_pipeline()).verdict == DiffVerdict::kSkippedUb) {
      ++skipped_on;
    }
  }
  EXPECT_GE(skipped_on, 4);
  EXPECT_LT(skipped, skipped_on);
}

// ---- link --------------------------------------------------------------------

TEST(Link, ConstructorDefinedElsewhere) {
  Module user = lower(read_corpus("outline_ctor.moo"));
  Module ctor = parse_ir(R"(module ctor
vtable @C.vtable for C linkage=declaration []

define void @C.ctor(ptr %this) {
entry:
  %vt = global @C.vtable
  store %vt, %this !invariant.group
  ret
}
)");
  Module linked = link_modules({user, ctor});
  EXPECT_TRUE(verify_module(linked).empty());
  EXPECT_EQ(linked.find_declaration("C.ctor"), nullptr);
  ASSERT_NE(linked.find_function("C.ctor"), nullptr);
  ASSERT_EQ(linked.vtables.size(), 1u);
  EXPECT_EQ(linked.vtables[0].linkage, Linkage::kDefinition);
  DiffResult r = diff_module(linked, PipelineConfig::default_pipeline());
  EXPECT_EQ(r.verdict, DiffVerdict::kEqual);
  EXPECT_EQ(r.optimized.prints, (std::vector<std::int64_t>{3}));
}

TEST(Link, Conflicts) {
  Module a = parse_ir("module a\ndefine void @f() {\nentry:\n  ret\n}\n");
  EXPECT_THROW(link_modules({a, a}), Error);
  Module b = parse_ir("module b\ndeclare void @f(int %x)\n");
  EXPECT_THROW(link_modules({a, b}), Error);
  Module v1 = parse_ir("module v\nvtable @K.vtable for K linkage=definition []\n");
  EXPECT_THROW(link_modules({v1, v1}), Error);
}

// ---- cli ---------------------------------------------------------------------

struct RunResult {
  int status = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(INVAR_OPT_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

TEST(Cli, DiffExitCodes) {
  RunResult ok = run_cli("diff " + corpus_path("bar.moo"));
  EXPECT_EQ(ok.status, 0) << ok.output;
  EXPECT_NE(ok.output.find("equal"), std::string::npos);
  RunResult ub = run_cli("diff " + corpus_path("stale_pointer.moo"));
  EXPECT_EQ(ub.status, 0) << ub.output;
  EXPECT_NE(ub.output.find("skipped-ub"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli("").status, 3);
  EXPECT_EQ(run_cli("frobnicate").status, 3);
  EXPECT_EQ(run_cli("run --mode sideways " + corpus_path("bar.moo")).status, 3);
}

TEST(Cli, MissingFileAndBadSource) {
  EXPECT_EQ(run_cli("compile /nonexistent/x.moo").status, 1);
  auto tmp = std::filesystem::temp_directory_path() / "invar_cli_bad.moo";
  std::ofstream(tmp) << "class {";
  RunResult r = run_cli("compile " + tmp.string());
  EXPECT_EQ(r.status, 1);
  std::filesystem::remove(tmp);
}

TEST(Cli, StatsAndRun) {
  RunResult s = run_cli("stats " + corpus_path("bar.moo"));
  EXPECT_EQ(s.status, 0);
  EXPECT_NE(s.output.find("@bar.devirtualized_calls=2"), std::string::npos) << s.output;
  RunResult off = run_cli("stats --no-strict-vtable-pointers " + corpus_path("foo.moo"));
  EXPECT_NE(off.output.find("devirtualized_calls=0"), std::string::npos) << off.output;
  RunResult run = run_cli("run " + corpus_path("g.moo"));
  EXPECT_EQ(run.status, 0);
  EXPECT_EQ(run.output, "print 1\nprint 2\n");
  RunResult stale = run_cli("run " + corpus_path("stale_pointer.moo"));
  EXPECT_EQ(stale.status, 1);
  EXPECT_NE(stale.output.find("ub stale-dynamic-info"), std::string::npos);
}

TEST(Cli, CompileOutputParsesBack) {
  auto tmp = std::filesystem::temp_directory_path() / "invar_cli_g.ir";
  RunResult r = run_cli("compile -o " + tmp.string() + " " + corpus_path("g.moo"));
  ASSERT_EQ(r.status, 0) << r.output;
  std::ifstream in(tmp);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Module expected = lower(read_corpus("g.moo"));
  expected.name = "g";
  EXPECT_EQ(parse_ir(text), expected);
  RunResult d = run_cli("diff " + tmp.string());
  EXPECT_EQ(d.status, 0) << d.output;
  std::filesystem::remove(tmp);
}

TEST(Cli, FuzzSummary) {
  RunResult r = run_cli("fuzz --seed 11 --count 40");
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("seed=11 programs=40 "), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("mismatch=0"), std::string::npos) << r.output;
}

}  // namespace
}  // namespace invar
