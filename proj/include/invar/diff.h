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

// Differential execution of a MiniOO program with and without the
// optimizer.

#ifndef INVAR_DIFF_H_
#define INVAR_DIFF_H_

#include <string>
#include <string_view>

#include "invar/interp.h"
#include "invar/moo/lowering.h"
#include "invar/passes.h"

namespace invar {

enum class DiffVerdict { kEqual, kMismatch, kSkippedUb };

std::string_view diff_verdict_name(DiffVerdict v);

struct DiffResult {
  DiffVerdict verdict = DiffVerdict::kEqual;
  ExecTrace reference;  // lower_for_codegen(unoptimized)
  ExecTrace optimized;  // lower_for_codegen(run_pipeline(...))
  PassReport report;
  std::string detail;
};

struct DiffOptions {
  moo::LoweringOptions lowering;
  EvalOptions eval;
  std::string entry = "main";
};

// Compares two traces on prints and external calls.
bool same_observable(const ExecTrace& a, const ExecTrace& b);

// Module-level form: `m` is the unoptimized lowering.
DiffResult diff_module(const Module& m, const PipelineConfig& cfg, const DiffOptions& opts = {});

// Parses and lowers `source`, then diff_module. Throws SyntaxError or
// Error for invalid sources.
DiffResult diff_run(std::string_view source, const PipelineConfig& cfg,
                    const DiffOptions& opts = {});

}  // namespace invar

#endif  // INVAR_DIFF_H_
