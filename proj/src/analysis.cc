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

#include "invar/analysis.h"

#include <set>
#include <vector>

namespace invar {

std::string_view alias_result_name(AliasResult r) {
  switch (r) {
    case AliasResult::kMustAlias:
      return "must-alias";
    case AliasResult::kMayAlias:
      return "may-alias";
    case AliasResult::kNoAlias:
      return "no-alias";
  }
  return "?";
}

FunctionAnalysis::FunctionAnalysis(const Function& f) : f_(f), defs_(definition_map(f)) {}

std::optional<InstRef> FunctionAnalysis::def_site(std::string_view value) const {
  auto it = defs_.find(value);
  if (it == defs_.end()) return std::nullopt;
  return it->second;
}

const Instruction* FunctionAnalysis::def(std::string_view value) const {
  auto it = defs_.find(value);
  if (it == defs_.end() || it->second.block < 0) return nullptr;
  return &f_.blocks[it->second.block].insts[it->second.index];
}

const Param* FunctionAnalysis::param(std::string_view value) const {
  auto it = defs_.find(value);
  if (it == defs_.end() || it->second.block >= 0) return nullptr;
  return &f_.params[it->second.index];
}

PointerBase FunctionAnalysis::decompose(std::string_view ptr) const {
  PointerBase pb{std::string(ptr), 0};
  for (int guard = 0; guard < 10000; ++guard) {
    const Instruction* d = def(pb.root);
    if (!d) break;
    if (d->op == Opcode::kLaunder || d->op == Opcode::kStrip) {
      pb.root = d->operands[0];
    } else if (d->op == Opcode::kFieldAddr) {
      pb.offset += d->imm;
      pb.root = d->operands[0];
    } else {
      break;
    }
  }
  return pb;
}

AliasResult FunctionAnalysis::alias(std::string_view a, std::string_view b) const {
  PointerBase pa = decompose(a);
  PointerBase pb = decompose(b);
  if (pa.root == pb.root) {
    return pa.offset == pb.offset ? AliasResult::kMustAlias : AliasResult::kNoAlias;
  }
  const Instruction* da = def(pa.root);
  const Instruction* db = def(pb.root);
  auto distinct_object = [](const Instruction* d) {
    return d && (d->op == Opcode::kAlloc || d->op == Opcode::kGlobalRef);
  };
  if (distinct_object(da) && distinct_object(db)) {
    if (da->op == Opcode::kGlobalRef && db->op == Opcode::kGlobalRef &&
        da->symbol == db->symbol) {
      return pa.offset == pb.offset ? AliasResult::kMustAlias : AliasResult::kNoAlias;
    }
    return AliasResult::kNoAlias;
  }
  return AliasResult::kMayAlias;
}

InvariantGroupKey FunctionAnalysis::invariant_group_key(std::string_view ptr) const {
  const Instruction* d = def(ptr);
  return {std::string(ptr), !(d && d->op == Opcode::kStrip)};
}

bool FunctionAnalysis::known_dereferenceable(std::string_view ptr) const {
  std::string v(ptr);
  for (int guard = 0; guard < 10000; ++guard) {
    if (const Param* p = param(v)) {
      return p->attrs.nonnull && p->attrs.dereferenceable_bytes.value_or(0) > 0;
    }
    const Instruction* d = def(v);
    if (!d) return false;
    switch (d->op) {
      case Opcode::kAlloc:
      case Opcode::kGlobalRef:
        return true;
      case Opcode::kLaunder:
      case Opcode::kStrip:
        if (d->result_attrs.nonnull && d->result_attrs.dereferenceable_bytes.value_or(0) > 0) {
          return true;
        }
        v = d->operands[0];
        break;
      case Opcode::kFieldAddr:
        v = d->operands[0];
        break;
      default:
        return false;
    }
  }
  return false;
}

AliasResult alias_query(std::string_view a, std::string_view b, const Function& f) {
  return FunctionAnalysis(f).alias(a, b);
}

InvariantGroupKey invariant_group_key(std::string_view ptr, const Function& f) {
  return FunctionAnalysis(f).invariant_group_key(ptr);
}

std::optional<std::string> resolve_vtable_slot(const Instruction& load,
                                               const FunctionAnalysis& fa,
                                               const Module& m) {
  if (load.op != Opcode::kLoad || !load.md.invariant_load) return std::nullopt;
  PointerBase pb = fa.decompose(load.operands[0]);
  const Instruction* root = fa.def(pb.root);
  if (!root || root->op != Opcode::kGlobalRef) return std::nullopt;
  const VTableGlobal* vt = m.find_vtable(root->symbol);
  if (!vt || vt->linkage == Linkage::kDeclaration) return std::nullopt;
  if (pb.offset < 0 || pb.offset % kSlotSize != 0) return std::nullopt;
  auto k = static_cast<std::size_t>(pb.offset / kSlotSize);
  if (k >= vt->slots.size()) return std::nullopt;
  return vt->slots[k];
}

namespace {

ParamAttributeSet source_attrs(const FunctionAnalysis& fa, const std::string& v) {
  if (const Param* p = fa.param(v)) return p->attrs;
  const Instruction* d = fa.def(v);
  ParamAttributeSet a;
  if (!d) return a;
  if (d->op == Opcode::kLaunder || d->op == Opcode::kStrip) return d->result_attrs;
  if (d->op == Opcode::kAlloc) {
    a.nonnull = true;
    a.dereferenceable_bytes = static_cast<std::uint64_t>(d->imm);
  }
  return a;
}

}  // namespace

Function propagate_pointer_attributes(const Function& f) {
  Function out = f;
  // (a) nonnull / dereferenceable flow from operand to result.
  for (bool changed = true; changed;) {
    changed = false;
    FunctionAnalysis fa(out);
    std::vector<std::pair<InstRef, ParamAttributeSet>> updates;
    for (std::size_t b = 0; b < out.blocks.size(); ++b) {
      for (std::size_t i = 0; i < out.blocks[b].insts.size(); ++i) {
        const Instruction& inst = out.blocks[b].insts[i];
        if (!is_intrinsic(inst.op) || inst.op == Opcode::kAssume) continue;
        ParamAttributeSet src = source_attrs(fa, inst.operands[0]);
        ParamAttributeSet next = inst.result_attrs;
        next.nonnull = next.nonnull || src.nonnull;
        if (src.dereferenceable_bytes &&
            *src.dereferenceable_bytes > next.dereferenceable_bytes.value_or(0)) {
          next.dereferenceable_bytes = src.dereferenceable_bytes;
        }
        if (!(next == inst.result_attrs)) {
          updates.push_back({{static_cast<int>(b), static_cast<int>(i)}, next});
        }
      }
    }
    for (auto& [ref, attrs] : updates) {
      out.blocks[ref.block].insts[ref.index].result_attrs = attrs;
      changed = true;
    }
  }

  // (b) nocapture: every transitive use of the result is non-capturing.
  std::map<std::string, std::vector<std::pair<const Instruction*, std::size_t>>> users;
  for (const BasicBlock& bb : out.blocks) {
    for (const Instruction& inst : bb.insts) {
      for (std::size_t k = 0; k < inst.operands.size(); ++k) {
        users[inst.operands[k]].push_back({&inst, k});
      }
    }
  }
  std::map<std::string, bool> memo;
  std::set<std::string> visiting;
  auto captured = [&](auto&& self, const std::string& v) -> bool {
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    if (!visiting.insert(v).second) return false;
    bool cap = false;
    for (auto [user, k] : users[v]) {
      switch (user->op) {
        case Opcode::kICmpEq:
        case Opcode::kLoad:
          break;
        case Opcode::kStore:
          cap = cap || k == 0;
          break;
        case Opcode::kFieldAddr:
        case Opcode::kLaunder:
        case Opcode::kStrip:
          cap = cap || self(self, user->result);
          break;
        default:
          cap = true;
      }
      if (cap) break;
    }
    visiting.erase(v);
    memo[v] = cap;
    return cap;
  };
  std::vector<std::pair<int, int>> nocap;
  for (std::size_t b = 0; b < out.blocks.size(); ++b) {
    for (std::size_t i = 0; i < out.blocks[b].insts.size(); ++i) {
      const Instruction& inst = out.blocks[b].insts[i];
      if ((inst.op == Opcode::kLaunder || inst.op == Opcode::kStrip) &&
          !captured(captured, inst.result)) {
        nocap.push_back({static_cast<int>(b), static_cast<int>(i)});
      }
    }
  }
  for (auto [b, i] : nocap) out.blocks[b].insts[i].operand_nocapture = true;
  return out;
}

}  // namespace invar
