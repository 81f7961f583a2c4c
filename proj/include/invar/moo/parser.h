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

#ifndef INVAR_MOO_PARSER_H_
#define INVAR_MOO_PARSER_H_

#include <string_view>

#include "invar/moo/ast.h"

namespace invar::moo {

// Parses and resolves a MiniOO translation unit:
//
//   class A {
//     virtual void virt_meth();          // declared here, defined elsewhere
//     virtual inline int get() { return this->value; }
//     int value;
//     ctor() { this->value = 0; }        // `ctor();` = outline constructor
//   }
//   class B : A { void virt_meth() { print(2); } }
//   union U { A; B; }
//   extern void external_fun(A* a);
//   void g() {
//     A* a = new A;
//     A* b = new(a) B;
//     if (a == b) { b->virt_meth(); }
//   }
//
// Throws SyntaxError (syntax, unknown identifiers, type errors, invalid
// overrides).
SourceProgram parse_source(std::string_view text);

}  // namespace invar::moo

#endif  // INVAR_MOO_PARSER_H_
