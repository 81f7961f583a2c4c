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

#ifndef INVAR_LINK_H_
#define INVAR_LINK_H_

#include <vector>

#include "invar/ir.h"

namespace invar {

// Merges modules into one. Function bodies satisfy declarations of the
// same name. A vtable definition replaces optimization-only and declared
// copies; among optimization-only copies the first is kept. Two bodies for
// one function, two vtable definitions for one symbol, or conflicting
// signatures throw Error.
Module link_modules(const std::vector<Module>& modules, std::string name = "linked");

}  // namespace invar

#endif  // INVAR_LINK_H_
