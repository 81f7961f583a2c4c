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

#include "invar/ir.h"

#include <algorithm>
#include <deque>

namespace invar {

std::string_view type_name(Type t) {
  switch (t) {
    case Type::kVoid:
      return "void";
    case Type::kInt:
      return "int";
    case Type::kBool:
      return "bool";
    case Type::kPtr:
      return "ptr";
  }
  return "?";
}

std::string_view opcode_name(Opcode op) {
  switch (op) {
    case Opcode::kAlloc:
      return "alloc";
    case Opcode::kLoad:
      return "load";
    case Opcode::kStore:
      return "store";
    case Opcode::kFieldAddr:
      return "fieldaddr";
    case Opcode::kCallDirect:
      return "call";
    case Opcode::kCallIndirect:
      return "call_indirect";
    case Opcode::kLaunder:
      return "launder.invariant.group";
    case Opcode::kStrip:
      return "strip.invariant.group";
    case Opcode::kAssume:
      return "assume";
    case Opcode::kICmpEq:
      return "icmp eq";
    case Opcode::kICmpSlt:
      return "icmp slt";
    case Opcode::kPtrToInt:
      return "ptrtoint";
    case Opcode::kIntToPtr:
      return "inttoptr";
    case Opcode::kAdd:
      return "add";
    case Opcode::kSub:
      return "sub";
    case Opcode::kMul:
      return "mul";
    case Opcode::kBr:
      return "br";
    case Opcode::kCondBr:
      return "condbr";
    case Opcode::kRet:
      return "ret";
    case Opcode::kPhi:
      return "phi";
    case Opcode::kConstInt:
      return "const";
    case Opcode::kConstNull:
      return "null";
    case Opcode::kConstUndef:
      return "undef";
    case Opcode::kGlobalRef:
      return "global";
  }
  return "?";
}

bool is_terminator(Opcode op) {
  return op == Opcode::kBr || op == Opcode::kCondBr || op == Opcode::kRet;
}

bool is_intrinsic(Opcode op) {
  return op == Opcode::kLaunder || op == Opcode::kStrip ||
         op == Opcode::kAssume;
}

std::string_view linkage_name(Linkage l) {
  switch (l) {
    case Linkage::kDefinition:
      return "definition";
    case Linkage::kOptimizationOnly:
      return "optimization_only";
    case Linkage::kDeclaration:
      return "declaration";
  }
  return "?";
}

int Function::block_index(std::string_view label) const {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].label == label) return static_cast<int>(i);
  }
  return -1;
}

std::size_t Function::instruction_count() const {
  std::size_t n = 0;
  for (const BasicBlock& bb : blocks) n += bb.insts.size();
  return n;
}

Function* Module::find_function(std::string_view n) {
  for (Function& f : functions) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

const Function* Module::find_function(std::string_view n) const {
  for (const Function& f : functions) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

const Declaration* Module::find_declaration(std::string_view n) const {
  for (const Declaration& d : declarations) {
    if (d.name == n) return &d;
  }
  return nullptr;
}

const VTableGlobal* Module::find_vtable(std::string_view n) const {
  for (const VTableGlobal& v : vtables) {
    if (v.name == n) return &v;
  }
  return nullptr;
}

std::optional<Signature> Module::signature(std::string_view n) const {
  auto collect = [](Type ret, const std::vector<Param>& params, bool body) {
    Signature s;
    s.ret = ret;
    s.has_body = body;
    for (const Param& p : params) s.params.push_back(p.type);
    return s;
  };
  if (const Function* f = find_function(n)) {
    return collect(f->ret, f->params, true);
  }
  if (const Declaration* d = find_declaration(n)) {
    return collect(d->ret, d->params, false);
  }
  return std::nullopt;
}

std::map<std::string, InstRef, std::less<>> definition_map(const Function& f) {
  std::map<std::string, InstRef, std::less<>> defs;
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    defs.emplace(f.params[i].name, InstRef{-1, static_cast<int>(i)});
  }
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    const auto& insts = f.blocks[b].insts;
    for (std::size_t i = 0; i < insts.size(); ++i) {
      if (insts[i].has_result()) {
        defs.emplace(insts[i].result,
                     InstRef{static_cast<int>(b), static_cast<int>(i)});
      }
    }
  }
  return defs;
}

std::map<std::string, Type, std::less<>> value_types(const Function& f) {
  std::map<std::string, Type, std::less<>> types;
  for (const Param& p : f.params) types.emplace(p.name, p.type);
  for (const BasicBlock& bb : f.blocks) {
    for (const Instruction& inst : bb.insts) {
      if (inst.has_result()) types.emplace(inst.result, inst.type);
    }
  }
  return types;
}

std::map<std::string, int, std::less<>> use_counts(const Function& f) {
  std::map<std::string, int, std::less<>> uses;
  for (const BasicBlock& bb : f.blocks) {
    for (const Instruction& inst : bb.insts) {
      for (const std::string& op : inst.operands) ++uses[op];
    }
  }
  return uses;
}

int replace_all_uses(Function& f, std::string_view from, std::string_view to) {
  int n = 0;
  for (BasicBlock& bb : f.blocks) {
    for (Instruction& inst : bb.insts) {
      for (std::string& op : inst.operands) {
        if (op == from) {
          op = std::string(to);
          ++n;
        }
      }
    }
  }
  return n;
}

NameAllocator::NameAllocator(const Function& f) {
  for (const Param& p : f.params) values_.insert(p.name);
  for (const BasicBlock& bb : f.blocks) {
    labels_.insert(bb.label);
    for (const Instruction& inst : bb.insts) {
      if (inst.has_result()) values_.insert(inst.result);
    }
  }
}

namespace {

std::string fresh(std::set<std::string, std::less<>>& used,
                  std::string_view hint) {
  std::string base(hint.empty() ? "v" : hint);
  if (used.insert(base).second) return base;
  for (int i = 1;; ++i) {
    std::string candidate = base + "." + std::to_string(i);
    if (used.insert(candidate).second) return candidate;
  }
}

}  // namespace

std::string NameAllocator::value(std::string_view hint) {
  return fresh(values_, hint);
}

std::string NameAllocator::label(std::string_view hint) {
  return fresh(labels_, hint);
}

bool has_side_effects(const Instruction& inst) {
  switch (inst.op) {
    case Opcode::kStore:
    case Opcode::kCallDirect:
    case Opcode::kCallIndirect:
    case Opcode::kAssume:
    case Opcode::kBr:
    case Opcode::kCondBr:
    case Opcode::kRet:
      return true;
    default:
      return false;
  }
}

int remove_dead_instructions(Function& f) {
  int removed = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    auto uses = use_counts(f);
    for (BasicBlock& bb : f.blocks) {
      auto dead = [&](const Instruction& inst) {
        if (has_side_effects(inst) || !inst.has_result()) return false;
        auto it = uses.find(inst.result);
        if (it == uses.end() || it->second == 0) return true;
        // A phi used only by itself is dead as well.
        if (inst.op == Opcode::kPhi) {
          int self = static_cast<int>(
              std::count(inst.operands.begin(), inst.operands.end(),
                         inst.result));
          return self == it->second;
        }
        return false;
      };
      auto first = std::remove_if(bb.insts.begin(), bb.insts.end(), dead);
      int n = static_cast<int>(std::distance(first, bb.insts.end()));
      if (n > 0) {
        bb.insts.erase(first, bb.insts.end());
        removed += n;
        changed = true;
      }
    }
  }
  return removed;
}

int remove_unreachable_blocks(Function& f) {
  if (f.blocks.empty()) return 0;
  std::vector<bool> seen(f.blocks.size(), false);
  std::deque<int> work{0};
  seen[0] = true;
  while (!work.empty()) {
    int b = work.front();
    work.pop_front();
    if (f.blocks[b].insts.empty()) continue;
    const Instruction& term = f.blocks[b].insts.back();
    if (!is_terminator(term.op)) continue;
    for (const std::string& l : term.labels) {
      int s = f.block_index(l);
      if (s >= 0 && !seen[s]) {
        seen[s] = true;
        work.push_back(s);
      }
    }
  }
  std::set<std::string, std::less<>> dead_labels;
  std::vector<BasicBlock> kept;
  for (std::size_t i = 0; i < f.blocks.size(); ++i) {
    if (seen[i]) {
      kept.push_back(std::move(f.blocks[i]));
    } else {
      dead_labels.insert(f.blocks[i].label);
    }
  }
  f.blocks = std::move(kept);
  if (dead_labels.empty()) return 0;
  for (BasicBlock& bb : f.blocks) {
    for (Instruction& inst : bb.insts) {
      if (inst.op != Opcode::kPhi) continue;
      Instruction pruned = inst;
      pruned.operands.clear();
      pruned.labels.clear();
      for (std::size_t i = 0; i < inst.labels.size(); ++i) {
        if (!dead_labels.contains(inst.labels[i])) {
          pruned.operands.push_back(inst.operands[i]);
          pruned.labels.push_back(inst.labels[i]);
        }
      }
      inst = std::move(pruned);
    }
  }
  return static_cast<int>(dead_labels.size());
}

int remove_trivial_phis(Function& f) {
  int removed = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (BasicBlock& bb : f.blocks) {
      for (std::size_t i = 0; i < bb.insts.size(); ++i) {
        Instruction& inst = bb.insts[i];
        if (inst.op != Opcode::kPhi) continue;
        std::string same;
        bool trivial = true;
        for (const std::string& op : inst.operands) {
          if (op == inst.result || op == same) continue;
          if (!same.empty()) {
            trivial = false;
            break;
          }
          same = op;
        }
        if (!trivial || same.empty()) continue;
        std::string name = inst.result;
        bb.insts.erase(bb.insts.begin() + static_cast<std::ptrdiff_t>(i));
        replace_all_uses(f, name, same);
        ++removed;
        changed = true;
        break;
      }
      if (changed) break;
    }
  }
  return removed;
}

}  // namespace invar
