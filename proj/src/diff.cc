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

#include "invar/diff.h"

#include "invar/moo/parser.h"

namespace invar {

std::string_view diff_verdict_name(DiffVerdict v) {
  switch (v) {
    case DiffVerdict::kEqual:
      return "equal";
    case DiffVerdict::kMismatch:
      return "mismatch";
    case DiffVerdict::kSkippedUb:
      return "skipped-ub";
  }
  return "?";
}

bool same_observable(const ExecTrace& a, const ExecTrace& b) {
  return a.prints == b.prints && a.external_calls == b.external_calls && a.events == b.events;
}

DiffResult diff_module(const Module& m, const PipelineConfig& cfg, const DiffOptions& opts) {
  DiffResult r;
  ExecTrace checked = eval_module(m, opts.entry, ExecMode::kChecked, opts.eval);
  if (!checked.ub_reports.empty()) {
    r.verdict = DiffVerdict::kSkippedUb;
    r.reference = std::move(checked);
    const UBReport& u = r.reference.ub_reports.front();
    r.detail = std::string(ub_kind_name(u.kind)) + " at " + u.location;
    return r;
  }

  Module reference = m;
  lower_for_codegen(reference);
  r.reference = eval_module(reference, opts.entry, ExecMode::kRaw, opts.eval);

  Module optimized = m;
  try {
    r.report = run_pipeline(optimized, cfg);
    lower_for_codegen(optimized);
    r.optimized = eval_module(optimized, opts.entry, ExecMode::kRaw, opts.eval);
  } catch (const Error& e) {
    r.verdict = DiffVerdict::kMismatch;
    r.detail = std::string("optimized run failed: ") + e.what();
    return r;
  }
  if (!same_observable(r.reference, r.optimized)) {
    r.verdict = DiffVerdict::kMismatch;
    r.detail = "traces differ";
  }
  return r;
}

DiffResult diff_run(std::string_view source, const PipelineConfig& cfg, const DiffOptions& opts) {
  moo::SourceProgram p = moo::parse_source(source);
  Module m = moo::lower_to_ir(p, opts.lowering);
  return diff_module(m, cfg, opts);
}

}  // namespace invar
