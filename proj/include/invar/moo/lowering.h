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

#ifndef INVAR_MOO_LOWERING_H_
#define INVAR_MOO_LOWERING_H_

#include <string>
#include <vector>

#include "invar/ir.h"
#include "invar/moo/ast.h"
#include "invar/verifier.h"

namespace invar::moo {

struct LoweringOptions {
  // Emit launder/strip/assume and invariant metadata.
  bool strict_vtable_pointers = true;
  // Emit optimization-only vtables even when some slot bodies are missing.
  bool force_emit_vtables = false;
  std::string module_name = "moo";
};

// Symbol naming used by the lowering.
std::string ctor_symbol(const std::string& cls);
std::string dtor_symbol(const std::string& cls);
std::string method_symbol(const std::string& cls, const std::string& method);
std::string vtable_symbol(const std::string& cls);

// Builtins recognized by the interpreter.
inline constexpr const char* kPrintBuiltin = "print";
inline constexpr const char* kFreeBuiltin = "free";

// One vtable per dynamic class, in class order.
std::vector<VTableGlobal> emit_vtables(const SourceProgram& p,
                                       const LoweringOptions& opts);

// Throws Error if `p` has not been through parse_source's resolution.
Module lower_to_ir(const SourceProgram& p, const LoweringOptions& opts);

// Pointer operands of icmp eq / ptrtoint that are not strip results.
// Comparisons between vtable pointers (invariant-group loads and global
// references) are exempt.
std::vector<Diagnostic> check_strip_discipline(const Module& m);

}  // namespace invar::moo

#endif  // INVAR_MOO_LOWERING_H_
