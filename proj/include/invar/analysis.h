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

// Queries over a single function. Launder and strip are address-preserving
// for alias purposes, but a launder result starts a new invariant-group key.

#ifndef INVAR_ANALYSIS_H_
#define INVAR_ANALYSIS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "invar/ir.h"

namespace invar {

enum class AliasResult { kMustAlias, kMayAlias, kNoAlias };

std::string_view alias_result_name(AliasResult r);

// A pointer value decomposed through launder, strip and fieldaddr.
struct PointerBase {
  std::string root;
  std::int64_t offset = 0;
};

struct InvariantGroupKey {
  std::string root;
  bool valid = false;

  bool operator==(const InvariantGroupKey&) const = default;
};

// Caches definitions of one function. Invalidated by any mutation of it.
class FunctionAnalysis {
 public:
  explicit FunctionAnalysis(const Function& f);

  const Function& function() const { return f_; }
  // Defining instruction, or nullptr for parameters and unknown names.
  const Instruction* def(std::string_view value) const;
  const Param* param(std::string_view value) const;
  std::optional<InstRef> def_site(std::string_view value) const;

  PointerBase decompose(std::string_view ptr) const;
  AliasResult alias(std::string_view a, std::string_view b) const;
  InvariantGroupKey invariant_group_key(std::string_view ptr) const;
  // True if the pointer is known to address at least one slot: its root is
  // an allocation, a global, or a nonnull dereferenceable parameter or
  // intrinsic result.
  bool known_dereferenceable(std::string_view ptr) const;

 private:
  const Function& f_;
  std::map<std::string, InstRef, std::less<>> defs_;
};

AliasResult alias_query(std::string_view a, std::string_view b, const Function& f);
InvariantGroupKey invariant_group_key(std::string_view ptr, const Function& f);

// Function stored in the vtable slot read by `load`, when the load carries
// invariant.load metadata and reads slot k of a vtable whose contents are
// visible (definition or optimization-only linkage).
std::optional<std::string> resolve_vtable_slot(const Instruction& load,
                                               const FunctionAnalysis& fa,
                                               const Module& m);

// Copies nonnull/dereferenceable from launder/strip operands to their
// results and marks the operand nocapture when every transitive use of the
// result is non-capturing.
Function propagate_pointer_attributes(const Function& f);

}  // namespace invar

#endif  // INVAR_ANALYSIS_H_
