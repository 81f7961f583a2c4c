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

// invar-opt <compile|opt|run|diff|stats|link|fuzz> [flags] <files...>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "invar/diff.h"
#include "invar/fuzz.h"
#include "invar/interp.h"
#include "invar/ir_text.h"
#include "invar/link.h"
#include "invar/moo/lowering.h"
#include "invar/moo/parser.h"
#include "invar/passes.h"
#include "invar/verifier.h"

namespace {

constexpr int kExitDiagnostics = 1;
constexpr int kExitMismatch = 2;
constexpr int kExitUsage = 3;

struct Options {
  std::vector<std::string> inputs;
  std::string output;
  bool strict = true;
  bool force_emit = false;
  std::string passes;
  std::string mode = "checked";
  std::string entry = "main";
  bool optimize = false;
  std::uint64_t seed = 1;
  int count = 100;
  std::string dump_dir;
};

// Reported with the file name prefixed.
struct InputError {
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError{path + ": cannot open file"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_source(const std::string& path) {
  return path.size() > 4 && path.compare(path.size() - 4, 4, ".moo") == 0;
}

invar::moo::LoweringOptions lowering_options(const Options& o) {
  invar::moo::LoweringOptions lo;
  lo.strict_vtable_pointers = o.strict;
  lo.force_emit_vtables = o.force_emit;
  return lo;
}

invar::Module load(const std::string& path, const Options& o) {
  std::string text = read_file(path);
  try {
    if (is_source(path)) {
      auto lo = lowering_options(o);
      std::string stem = path.substr(path.find_last_of('/') + 1);
      lo.module_name = stem.substr(0, stem.size() - 4);
      return invar::moo::lower_to_ir(invar::moo::parse_source(text), lo);
    }
    return invar::parse_ir(text);
  } catch (const invar::Error& e) {
    throw InputError{path + ":" + e.what()};
  }
}

invar::PipelineConfig pipeline(const Options& o) {
  invar::PipelineConfig cfg = invar::PipelineConfig::default_pipeline();
  if (!o.passes.empty()) {
    cfg.passes.clear();
    std::stringstream ss(o.passes);
    for (std::string p; std::getline(ss, p, ',');) {
      if (!p.empty()) cfg.passes.push_back(p);
    }
  }
  return cfg;
}

void write_output(const Options& o, const std::string& text) {
  if (o.output.empty() || o.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out) throw InputError{o.output + ": cannot write file"};
  out << text;
}

int report_verifier(const invar::Module& m) {
  auto diags = invar::verify_module(m);
  for (const auto& d : diags) std::cerr << "error: " << d.to_string() << "\n";
  return diags.empty() ? 0 : kExitDiagnostics;
}

const std::string& single_input(const Options& o) {
  if (o.inputs.size() != 1) throw CLI::ValidationError("expected exactly one input file");
  return o.inputs[0];
}

int cmd_compile(const Options& o) {
  invar::Module m = load(single_input(o), o);
  if (int rc = report_verifier(m)) return rc;
  write_output(o, invar::print_ir(m));
  return 0;
}

int cmd_opt(const Options& o, bool stats_only) {
  invar::Module m = load(single_input(o), o);
  if (int rc = report_verifier(m)) return rc;
  invar::PassReport report = invar::run_pipeline(m, pipeline(o));
  if (stats_only) {
    write_output(o, report.to_text());
    return 0;
  }
  std::string text = invar::print_ir(m);
  std::istringstream lines(report.to_text());
  for (std::string l; std::getline(lines, l);) text += "; " + l + "\n";
  write_output(o, text);
  return 0;
}

int cmd_run(const Options& o) {
  invar::Module m = load(single_input(o), o);
  if (int rc = report_verifier(m)) return rc;
  if (o.optimize) invar::run_pipeline(m, pipeline(o));
  invar::ExecMode mode = o.mode == "raw" ? invar::ExecMode::kRaw : invar::ExecMode::kChecked;
  if (mode == invar::ExecMode::kRaw) invar::lower_for_codegen(m);
  invar::ExecTrace t = invar::eval_module(m, o.entry, mode);
  write_output(o, t.to_text());
  return t.ub_reports.empty() ? 0 : kExitDiagnostics;
}

void print_diff(std::ostream& os, const std::string& name, const invar::DiffResult& r) {
  os << name << ": " << invar::diff_verdict_name(r.verdict);
  if (!r.detail.empty()) os << " (" << r.detail << ")";
  os << "\n";
  if (r.verdict == invar::DiffVerdict::kMismatch) {
    os << "--- reference\n" << r.reference.to_text() << "--- optimized\n"
       << r.optimized.to_text();
  }
}

int cmd_diff(const Options& o) {
  const std::string& path = single_input(o);
  invar::Module m = load(path, o);
  if (int rc = report_verifier(m)) return rc;
  invar::DiffOptions dopt;
  dopt.lowering = lowering_options(o);
  dopt.entry = o.entry;
  invar::DiffResult r = invar::diff_module(m, pipeline(o), dopt);
  std::ostringstream os;
  print_diff(os, path, r);
  write_output(o, os.str());
  return r.verdict == invar::DiffVerdict::kMismatch ? kExitMismatch : 0;
}

int cmd_link(const Options& o) {
  if (o.inputs.empty()) throw CLI::ValidationError("link needs at least one input");
  std::vector<invar::Module> mods;
  for (const std::string& p : o.inputs) mods.push_back(load(p, o));
  invar::Module m = invar::link_modules(mods);
  if (int rc = report_verifier(m)) return rc;
  write_output(o, invar::print_ir(m));
  return 0;
}

int cmd_fuzz(const Options& o) {
  std::uint64_t seed = o.seed;
  if (const char* env = std::getenv("INVAR_OPT_SEED")) seed = std::strtoull(env, nullptr, 10);
  invar::DiffOptions dopt;
  dopt.lowering = lowering_options(o);
  invar::PipelineConfig cfg = pipeline(o);
  int equal = 0, skipped = 0, mismatched = 0;
  std::ostringstream os;
  for (int k = 0; k < o.count; ++k) {
    std::string src = invar::generate_fuzz_program(seed, static_cast<std::uint64_t>(k));
    std::string name = "fuzz-" + std::to_string(seed) + "-" + std::to_string(k);
    if (!o.dump_dir.empty()) {
      std::ofstream(o.dump_dir + "/" + name + ".moo", std::ios::binary) << src;
    }
    invar::DiffResult r;
    try {
      r = invar::diff_run(src, cfg, dopt);
    } catch (const invar::Error& e) {
      r.verdict = invar::DiffVerdict::kMismatch;
      r.detail = e.what();
    }
    switch (r.verdict) {
      case invar::DiffVerdict::kEqual:
        ++equal;
        break;
      case invar::DiffVerdict::kSkippedUb:
        ++skipped;
        break;
      case invar::DiffVerdict::kMismatch:
        ++mismatched;
        print_diff(os, name, r);
        break;
    }
  }
  os << "seed=" << seed << " programs=" << o.count << " equal=" << equal
     << " skipped-ub=" << skipped << " mismatch=" << mismatched << "\n";
  write_output(o, os.str());
  return mismatched ? kExitMismatch : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invar-opt: MiniOO compiler and invariant-group optimizer"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool inputs_required) {
    auto* in = sub->add_option("files", o.inputs, "Input .moo or IR files");
    if (inputs_required) in->required();
    sub->add_option("-o,--output", o.output, "Output file (default stdout)");
    sub->add_flag("--strict-vtable-pointers,!--no-strict-vtable-pointers", o.strict,
                  "Emit launder/strip and invariant metadata (default on)");
    sub->add_flag("--force-emit-vtables", o.force_emit,
                  "Emit optimization-only vtables even with missing bodies");
    sub->add_option("--passes", o.passes, "Comma-separated pass list");
  };

  auto* compile = app.add_subcommand("compile", "Lower MiniOO to textual IR");
  add_common(compile, true);
  auto* opt = app.add_subcommand("opt", "Optimize and print IR plus the pass report");
  add_common(opt, true);
  auto* run = app.add_subcommand("run", "Interpret a module and print its trace");
  add_common(run, true);
  run->add_option("--mode", o.mode, "checked or raw")
      ->check(CLI::IsMember({"checked", "raw"}));
  run->add_option("--entry", o.entry, "Entry function");
  run->add_flag("--optimize", o.optimize, "Run the pipeline first");
  auto* diff = app.add_subcommand("diff", "Compare optimized and unoptimized execution");
  add_common(diff, true);
  diff->add_option("--entry", o.entry, "Entry function");
  auto* stats = app.add_subcommand("stats", "Print the pass report");
  add_common(stats, true);
  auto* link = app.add_subcommand("link", "Merge modules");
  add_common(link, true);
  auto* fuzz = app.add_subcommand("fuzz", "Generate programs and diff each one");
  add_common(fuzz, false);
  fuzz->add_option("--seed", o.seed, "Generator seed (INVAR_OPT_SEED overrides)");
  fuzz->add_option("--count", o.count, "Number of programs")->check(CLI::PositiveNumber);
  fuzz->add_option("--dump-dir", o.dump_dir, "Write each program to this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*compile) return cmd_compile(o);
    if (*opt) return cmd_opt(o, false);
    if (*stats) return cmd_opt(o, true);
    if (*run) return cmd_run(o);
    if (*diff) return cmd_diff(o);
    if (*link) return cmd_link(o);
    if (*fuzz) return cmd_fuzz(o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitDiagnostics;
  } catch (const invar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  return kExitUsage;
}
