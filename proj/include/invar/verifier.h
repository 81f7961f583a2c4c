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

#ifndef INVAR_VERIFIER_H_
#define INVAR_VERIFIER_H_

#include <string>
#include <vector>

#include "invar/ir.h"

namespace invar {

struct Diagnostic {
  std::string function;  // empty for module-level problems
  std::string block;
  int index = -1;        // instruction index within `block`, -1 if n/a
  std::string rule;      // short stable rule name, e.g. "ssa-dominance"
  std::string message;

  std::string to_string() const;
};

// Checks symbol resolution, block structure, SSA dominance, operand types and
// metadata placement. Returns an empty list for a well-formed module.
std::vector<Diagnostic> verify_module(const Module& m);

}  // namespace invar

#endif  // INVAR_VERIFIER_H_
