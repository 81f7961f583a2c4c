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

// Textual form of the IR. One instruction per line:
//
//   module demo
//   vtable @A.vtable for A linkage=definition [@A.virt_meth]
//   declare void @print(int %v)
//   define void @main() {
//   entry:
//     %a = alloc 8
//     %vt = global @A.vtable
//     store %vt, %a !invariant.group
//     %vptr = load ptr %a !invariant.group
//     %slot = fieldaddr %vptr, 0
//     %fn = load ptr %slot !invariant.load
//     call_indirect void %fn(%a)
//     %b = launder.invariant.group(%a)
//     %s = strip.invariant.group(%b nocapture) nonnull dereferenceable(8)
//     ret
//   }
//
// Comments start with ';' and run to the end of the line.

#ifndef INVAR_IR_TEXT_H_
#define INVAR_IR_TEXT_H_

#include <string>
#include <string_view>

#include "invar/ir.h"

namespace invar {

// Throws SyntaxError on malformed text or references to undefined symbols.
Module parse_ir(std::string_view text);

std::string print_ir(const Module& m);
std::string print_function(const Function& f);
std::string print_instruction(const Instruction& inst);

}  // namespace invar

#endif  // INVAR_IR_TEXT_H_
