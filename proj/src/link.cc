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

#include "invar/link.h"

#include <map>

#include "invar/diagnostic.h"

namespace invar {

namespace {

int rank(Linkage l) {
  switch (l) {
    case Linkage::kDefinition:
      return 2;
    case Linkage::kOptimizationOnly:
      return 1;
    case Linkage::kDeclaration:
      break;
  }
  return 0;
}

void check_signature(const Signature& a, const Signature& b, const std::string& sym) {
  if (a.ret != b.ret || a.params != b.params) {
    throw Error("conflicting signatures for @" + sym);
  }
}

}  // namespace

Module link_modules(const std::vector<Module>& modules, std::string name) {
  Module out;
  out.name = std::move(name);
  std::map<std::string, std::size_t> vt_index;
  std::map<std::string, Signature> sigs;
  auto note_sig = [&](const std::string& sym, const Signature& s) {
    auto [it, fresh] = sigs.emplace(sym, s);
    if (!fresh) check_signature(it->second, s, sym);
  };

  for (const Module& m : modules) {
    for (const VTableGlobal& vt : m.vtables) {
      auto it = vt_index.find(vt.name);
      if (it == vt_index.end()) {
        vt_index[vt.name] = out.vtables.size();
        out.vtables.push_back(vt);
        continue;
      }
      VTableGlobal& cur = out.vtables[it->second];
      if (vt.linkage == Linkage::kDefinition && cur.linkage == Linkage::kDefinition) {
        throw Error("duplicate definition of vtable @" + vt.name);
      }
      if (rank(vt.linkage) > rank(cur.linkage)) cur = vt;
    }
    for (const Function& f : m.functions) {
      if (out.find_function(f.name)) throw Error("duplicate definition of @" + f.name);
      note_sig(f.name, *m.signature(f.name));
      out.functions.push_back(f);
    }
    for (const Declaration& d : m.declarations) note_sig(d.name, *m.signature(d.name));
  }
  for (const Module& m : modules) {
    for (const Declaration& d : m.declarations) {
      if (out.find_function(d.name) || out.find_declaration(d.name)) continue;
      out.declarations.push_back(d);
    }
  }
  return out;
}

}  // namespace invar
