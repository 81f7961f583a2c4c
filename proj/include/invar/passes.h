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

#ifndef INVAR_PASSES_H_
#define INVAR_PASSES_H_

#include <map>
#include <string>
#include <vector>

#include "invar/ir.h"

namespace invar {

struct PassCounts {
  int devirtualized_calls = 0;
  int forwarded_invariant_loads = 0;
  int resolved_slot_loads = 0;
  int folded_comparisons = 0;
  int folded_assumes = 0;
  int hoisted_loads = 0;
  int eliminated_stores = 0;
  int removed_intrinsics = 0;
  int intrinsic_rewrites = 0;
  int inlined_calls = 0;

  PassCounts& operator+=(const PassCounts& o);
  bool any() const;
  bool operator==(const PassCounts&) const = default;
  // (name, value) pairs in a fixed order.
  std::vector<std::pair<std::string, int>> fields() const;
};

struct PassReport {
  PassCounts total;
  std::map<std::string, PassCounts> functions;

  void add(const std::string& function, const PassCounts& c);
  const PassCounts& for_function(const std::string& name) const;
  // key=value lines: totals first, then `<function>.<key>=<value>` for
  // functions with nonzero counts.
  std::string to_text() const;
};

struct PipelineConfig {
  std::vector<std::string> passes;
  int inline_threshold = 64;
  int fixpoint_iterations = 4;

  // inline, simplify-intrinsics, forward-invariant-loads, fold-assumes,
  // fold-pointer-comparisons, devirtualize, hoist-invariant-loads, dse.
  static PipelineConfig default_pipeline();
};

// Names accepted in PipelineConfig::passes.
const std::vector<std::string>& known_passes();

// Function-level passes. Each mutates `f` in place and returns its counts.
PassCounts simplify_intrinsics(Function& f);
PassCounts fold_pointer_comparisons(Function& f);
PassCounts forward_invariant_loads(Function& f, const Module& m);
PassCounts fold_assumes(Function& f);
PassCounts devirtualize_calls(Function& f, const Module& m);
PassCounts hoist_invariant_loads(Function& f);
PassCounts eliminate_dead_stores(Function& f);
// `m` supplies callee bodies; `f` must not alias any function in `m`.
PassCounts inline_calls(Function& f, const Module& m, const PipelineConfig& cfg);
PassCounts propagate_attributes(Function& f);

// Removes every model artifact: intrinsics, assumes, metadata, and
// optimization-only vtable contents. Idempotent.
PassReport lower_for_codegen(Module& m);

// Runs the configured passes, repeating the list until nothing changes or
// the iteration cap is hit. A trailing lower-for-codegen runs once. Throws
// Error for unknown pass names, a misplaced lower-for-codegen, or an output
// module that fails verification.
PassReport run_pipeline(Module& m, const PipelineConfig& cfg);

}  // namespace invar

#endif  // INVAR_PASSES_H_
