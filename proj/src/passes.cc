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

#include "invar/passes.h"

#include <algorithm>
#include <climits>
#include <functional>
#include <set>
#include <sstream>

#include "invar/analysis.h"
#include "invar/cfg.h"
#include "invar/diagnostic.h"
#include "invar/verifier.h"

namespace invar {

PassCounts& PassCounts::operator+=(const PassCounts& o) {
  devirtualized_calls += o.devirtualized_calls;
  forwarded_invariant_loads += o.forwarded_invariant_loads;
  resolved_slot_loads += o.resolved_slot_loads;
  folded_comparisons += o.folded_comparisons;
  folded_assumes += o.folded_assumes;
  hoisted_loads += o.hoisted_loads;
  eliminated_stores += o.eliminated_stores;
  removed_intrinsics += o.removed_intrinsics;
  intrinsic_rewrites += o.intrinsic_rewrites;
  inlined_calls += o.inlined_calls;
  return *this;
}

std::vector<std::pair<std::string, int>> PassCounts::fields() const {
  return {{"devirtualized_calls", devirtualized_calls},
          {"forwarded_invariant_loads", forwarded_invariant_loads},
          {"resolved_slot_loads", resolved_slot_loads},
          {"folded_comparisons", folded_comparisons},
          {"folded_assumes", folded_assumes},
          {"hoisted_loads", hoisted_loads},
          {"eliminated_stores", eliminated_stores},
          {"removed_intrinsics", removed_intrinsics},
          {"intrinsic_rewrites", intrinsic_rewrites},
          {"inlined_calls", inlined_calls}};
}

bool PassCounts::any() const { return !(*this == PassCounts{}); }

void PassReport::add(const std::string& function, const PassCounts& c) {
  total += c;
  functions[function] += c;
}

const PassCounts& PassReport::for_function(const std::string& name) const {
  static const PassCounts kEmpty;
  auto it = functions.find(name);
  return it == functions.end() ? kEmpty : it->second;
}

std::string PassReport::to_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : total.fields()) os << k << "=" << v << "\n";
  for (const auto& [fn, c] : functions) {
    for (const auto& [k, v] : c.fields()) {
      if (v != 0) os << "@" << fn << "." << k << "=" << v << "\n";
    }
  }
  return os.str();
}

PipelineConfig PipelineConfig::default_pipeline() {
  PipelineConfig c;
  c.passes = {"inline",       "simplify-intrinsics",      "forward-invariant-loads",
              "fold-assumes", "fold-pointer-comparisons", "devirtualize",
              "hoist-invariant-loads", "dse"};
  return c;
}

const std::vector<std::string>& known_passes() {
  static const std::vector<std::string> kPasses = {
      "inline",       "simplify-intrinsics", "forward-invariant-loads",
      "fold-assumes", "fold-pointer-comparisons", "devirtualize",
      "hoist-invariant-loads", "dse", "propagate-attributes", "lower-for-codegen"};
  return kPasses;
}

namespace {

void erase_marked(Function& f, std::set<InstRef> marked) {
  for (auto it = marked.rbegin(); it != marked.rend(); ++it) {
    auto& insts = f.blocks[it->block].insts;
    insts.erase(insts.begin() + it->index);
  }
}

void make_bool(Instruction& inst, bool v) {
  inst.op = Opcode::kConstInt;
  inst.type = Type::kBool;
  inst.imm = v ? 1 : 0;
  inst.operands.clear();
  inst.md = {};
}

bool is_ptr_intrinsic(Opcode op) { return op == Opcode::kLaunder || op == Opcode::kStrip; }

int remove_unused_intrinsics(Function& f) {
  int removed = 0;
  for (bool changed = true; changed;) {
    changed = false;
    auto uses = use_counts(f);
    for (BasicBlock& bb : f.blocks) {
      auto dead = [&](const Instruction& i) {
        if (!is_ptr_intrinsic(i.op)) return false;
        auto it = uses.find(i.result);
        return it == uses.end() || it->second == 0;
      };
      auto n = std::count_if(bb.insts.begin(), bb.insts.end(), dead);
      if (n == 0) continue;
      std::erase_if(bb.insts, dead);
      removed += static_cast<int>(n);
      changed = true;
    }
  }
  return removed;
}

}  // namespace

// ---------------------------------------------------------------------------

PassCounts simplify_intrinsics(Function& f) {
  PassCounts c;
  for (bool changed = true; changed;) {
    changed = false;
    FunctionAnalysis fa(f);
    for (BasicBlock& bb : f.blocks) {
      for (Instruction& inst : bb.insts) {
        if (!is_ptr_intrinsic(inst.op)) continue;
        const Instruction* d = fa.def(inst.operands[0]);
        if (!d) continue;
        if (d->op == Opcode::kConstNull || d->op == Opcode::kConstUndef) {
          if (replace_all_uses(f, inst.result, inst.operands[0]) > 0) {
            ++c.intrinsic_rewrites;
            changed = true;
          }
        } else if (inst.op == Opcode::kStrip && d->op == Opcode::kStrip) {
          if (replace_all_uses(f, inst.result, d->result) > 0) {
            ++c.intrinsic_rewrites;
            changed = true;
          }
        } else if (is_ptr_intrinsic(d->op)) {
          // strip(launder x), launder(strip x), launder(launder x): apply
          // the outer operation to x.
          inst.operands[0] = d->operands[0];
          ++c.intrinsic_rewrites;
          changed = true;
        }
      }
    }
    // Strips are pure: a dominating strip of the same operand subsumes.
    DominatorTree dt(f);
    std::map<std::string, std::vector<InstRef>> strips;
    for (std::size_t b = 0; b < f.blocks.size(); ++b) {
      for (std::size_t i = 0; i < f.blocks[b].insts.size(); ++i) {
        const Instruction& inst = f.blocks[b].insts[i];
        if (inst.op == Opcode::kStrip) {
          strips[inst.operands[0]].push_back({static_cast<int>(b), static_cast<int>(i)});
        }
      }
    }
    for (auto& [operand, refs] : strips) {
      for (InstRef r : refs) {
        const std::string& name = f.blocks[r.block].insts[r.index].result;
        for (InstRef other : refs) {
          if (other == r || !dt.dominates(other, r)) continue;
          if (replace_all_uses(f, name, f.blocks[other.block].insts[other.index].result) > 0) {
            changed = true;
          }
          break;
        }
      }
    }
    c.removed_intrinsics += remove_unused_intrinsics(f);
  }
  return c;
}

PassCounts fold_pointer_comparisons(Function& f) {
  PassCounts c;
  FunctionAnalysis fa(f);
  auto strip_base = [&](std::string v) {
    for (const Instruction* d = fa.def(v); d && d->op == Opcode::kStrip; d = fa.def(v)) {
      v = d->operands[0];
    }
    return v;
  };
  for (BasicBlock& bb : f.blocks) {
    for (Instruction& inst : bb.insts) {
      if (inst.op != Opcode::kICmpEq && inst.op != Opcode::kICmpSlt) continue;
      std::string a = strip_base(inst.operands[0]);
      std::string b = strip_base(inst.operands[1]);
      const Instruction* da = fa.def(a);
      const Instruction* db = fa.def(b);
      std::optional<bool> r;
      if (inst.op == Opcode::kICmpSlt) {
        if (da && db && da->op == Opcode::kConstInt && db->op == Opcode::kConstInt) {
          r = da->imm < db->imm;
        }
      } else if (a == b) {
        r = true;
      } else if (da && db) {
        if (da->op == Opcode::kConstInt && db->op == Opcode::kConstInt) {
          r = da->imm == db->imm;
        } else if (da->op == Opcode::kConstNull && db->op == Opcode::kConstNull) {
          r = true;
        } else if (da->op == Opcode::kGlobalRef && db->op == Opcode::kGlobalRef) {
          r = da->symbol == db->symbol;
        }
      }
      if (!r && inst.op == Opcode::kICmpEq) {
        auto is_null = [](const Instruction* d) { return d && d->op == Opcode::kConstNull; };
        auto is_alloc = [&](const std::string& v) {
          const Instruction* root = fa.def(fa.decompose(v).root);
          return root && root->op == Opcode::kAlloc;
        };
        if ((is_null(da) && is_alloc(b)) || (is_null(db) && is_alloc(a))) r = false;
      }
      if (r) {
        make_bool(inst, *r);
        ++c.folded_comparisons;
      }
    }
  }
  return c;
}

PassCounts forward_invariant_loads(Function& f, const Module& m) {
  PassCounts c;
  DominatorTree dt(f);
  FunctionAnalysis fa(f);
  std::set<InstRef> dead;
  struct Facts {
    std::map<std::string, std::string> group;
    std::map<std::pair<std::string, std::int64_t>, std::string> invariant;
  };
  std::function<void(int, Facts)> walk = [&](int b, Facts facts) {
    auto& insts = f.blocks[b].insts;
    for (std::size_t i = 0; i < insts.size(); ++i) {
      Instruction& inst = insts[i];
      InstRef here{b, static_cast<int>(i)};
      if (inst.op == Opcode::kStore && inst.md.invariant_group) {
        InvariantGroupKey key = fa.invariant_group_key(inst.operands[1]);
        if (key.valid) facts.group[key.root] = inst.operands[0];
      } else if (inst.op == Opcode::kLoad && inst.md.invariant_group) {
        InvariantGroupKey key = fa.invariant_group_key(inst.operands[0]);
        if (!key.valid) continue;
        auto it = facts.group.find(key.root);
        if (it != facts.group.end()) {
          replace_all_uses(f, inst.result, it->second);
          dead.insert(here);
          ++c.forwarded_invariant_loads;
        } else {
          facts.group[key.root] = inst.result;
        }
      } else if (inst.op == Opcode::kLoad && inst.md.invariant_load) {
        if (auto sym = resolve_vtable_slot(inst, fa, m)) {
          inst.op = Opcode::kGlobalRef;
          inst.symbol = *sym;
          inst.operands.clear();
          inst.md = {};
          ++c.resolved_slot_loads;
          continue;
        }
        PointerBase pb = fa.decompose(inst.operands[0]);
        auto key = std::make_pair(pb.root, pb.offset);
        auto it = facts.invariant.find(key);
        if (it != facts.invariant.end()) {
          replace_all_uses(f, inst.result, it->second);
          dead.insert(here);
          ++c.forwarded_invariant_loads;
        } else {
          facts.invariant[key] = inst.result;
        }
      }
    }
    for (int child : dt.children(b)) walk(child, facts);
  };
  if (!f.blocks.empty()) walk(0, Facts{});
  erase_marked(f, dead);
  return c;
}

PassCounts fold_assumes(Function& f) {
  PassCounts c;
  DominatorTree dt(f);
  FunctionAnalysis fa(f);
  std::set<InstRef> dead;
  auto is_const = [&](const std::string& v) {
    const Instruction* d = fa.def(v);
    return d && (d->op == Opcode::kGlobalRef || d->op == Opcode::kConstInt ||
                 d->op == Opcode::kConstNull);
  };
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    for (std::size_t i = 0; i < f.blocks[b].insts.size(); ++i) {
      const Instruction& inst = f.blocks[b].insts[i];
      if (inst.op != Opcode::kAssume) continue;
      InstRef at{static_cast<int>(b), static_cast<int>(i)};
      const Instruction* cond = fa.def(inst.operands[0]);
      if (!cond) continue;
      if (cond->op == Opcode::kConstInt) {
        if (cond->imm != 0) {
          dead.insert(at);
          ++c.folded_assumes;
        }
        continue;
      }
      if (cond->op != Opcode::kICmpEq) continue;
      std::string var;
      std::string k;
      if (is_const(cond->operands[1]) && !is_const(cond->operands[0])) {
        var = cond->operands[0];
        k = cond->operands[1];
      } else if (is_const(cond->operands[0]) && !is_const(cond->operands[1])) {
        var = cond->operands[1];
        k = cond->operands[0];
      } else {
        continue;
      }
      int rewritten = 0;
      for (std::size_t ub = 0; ub < f.blocks.size(); ++ub) {
        for (std::size_t ui = 0; ui < f.blocks[ub].insts.size(); ++ui) {
          Instruction& user = f.blocks[ub].insts[ui];
          for (std::size_t k2 = 0; k2 < user.operands.size(); ++k2) {
            if (user.operands[k2] != var) continue;
            InstRef use{static_cast<int>(ub), static_cast<int>(ui)};
            if (user.op == Opcode::kPhi) {
              int pred = f.block_index(user.labels[k2]);
              if (pred < 0) continue;
              use = {pred, INT_MAX};
            }
            if (use == at || !dt.dominates(at, use)) continue;
            user.operands[k2] = k;
            ++rewritten;
          }
        }
      }
      if (rewritten > 0) ++c.folded_assumes;
    }
  }
  erase_marked(f, dead);
  remove_dead_instructions(f);
  return c;
}

PassCounts devirtualize_calls(Function& f, const Module& m) {
  PassCounts c;
  FunctionAnalysis fa(f);
  for (BasicBlock& bb : f.blocks) {
    for (Instruction& inst : bb.insts) {
      if (inst.op != Opcode::kCallIndirect) continue;
      const Instruction* d = fa.def(inst.operands[0]);
      if (!d || d->op != Opcode::kGlobalRef) continue;
      auto sig = m.signature(d->symbol);
      if (!sig || sig->params.size() + 1 != inst.operands.size() || sig->ret != inst.type) {
        continue;
      }
      inst.op = Opcode::kCallDirect;
      inst.symbol = d->symbol;
      inst.operands.erase(inst.operands.begin());
      ++c.devirtualized_calls;
    }
  }
  return c;
}

namespace {

// Returns the index of a block that is the unique entry into `loop`,
// creating one if needed, or -1 when the loop has several outside
// predecessors.
int ensure_preheader(Function& f, const DominatorTree& dt, const Loop& loop) {
  const Cfg& cfg = dt.cfg();
  std::vector<int> outside;
  for (int p : cfg.preds[loop.header]) {
    if (!loop.contains(p) && dt.reachable(p)) outside.push_back(p);
  }
  if (outside.size() != 1) return -1;
  int pred = outside[0];
  if (cfg.succs[pred].size() == 1) return pred;

  NameAllocator names(f);
  std::string header_label = f.blocks[loop.header].label;
  std::string pred_label = f.blocks[pred].label;
  BasicBlock pre{names.label(header_label + ".preheader"), {}};
  Instruction br;
  br.op = Opcode::kBr;
  br.labels = {header_label};
  pre.insts.push_back(br);
  for (std::string& l : f.blocks[pred].insts.back().labels) {
    if (l == header_label) l = pre.label;
  }
  for (Instruction& inst : f.blocks[loop.header].insts) {
    if (inst.op != Opcode::kPhi) continue;
    for (std::string& l : inst.labels) {
      if (l == pred_label) l = pre.label;
    }
  }
  f.blocks.insert(f.blocks.begin() + loop.header, std::move(pre));
  return loop.header;
}

bool calls_free(const Function& f) {
  for (const BasicBlock& bb : f.blocks) {
    for (const Instruction& inst : bb.insts) {
      if (inst.op == Opcode::kCallDirect && inst.symbol == "free") return true;
    }
  }
  return false;
}

}  // namespace

PassCounts hoist_invariant_loads(Function& f) {
  PassCounts c;
  // Hoisted loads execute even when the loop does not; a function that
  // frees memory could make them read a dead allocation.
  if (f.blocks.empty() || calls_free(f)) return c;
  std::set<std::string> done;
  while (true) {
    DominatorTree dt(f);
    std::vector<Loop> loops = find_natural_loops(f, dt);
    const Loop* loop = nullptr;
    for (const Loop& l : loops) {
      if (!done.contains(f.blocks[l.header].label)) {
        loop = &l;
        break;
      }
    }
    if (!loop) break;
    std::string header_label = f.blocks[loop->header].label;
    done.insert(header_label);
    std::set<std::string> in_loop;
    for (int b : loop->blocks) in_loop.insert(f.blocks[b].label);

    int pre = ensure_preheader(f, dt, *loop);
    if (pre < 0) continue;
    std::string pre_label = f.blocks[pre].label;

    std::set<std::string> group_stores;
    for (const BasicBlock& bb : f.blocks) {
      if (!in_loop.contains(bb.label)) continue;
      for (const Instruction& inst : bb.insts) {
        if (inst.op == Opcode::kStore && inst.md.invariant_group) {
          group_stores.insert(inst.operands[1]);
        }
      }
    }

    for (bool changed = true; changed;) {
      changed = false;
      FunctionAnalysis fa(f);
      std::map<std::string, std::string, std::less<>> def_block;
      for (const BasicBlock& bb : f.blocks) {
        for (const Instruction& inst : bb.insts) {
          if (inst.has_result()) def_block[inst.result] = bb.label;
        }
      }
      auto invariant = [&](const std::string& v) {
        auto it = def_block.find(v);
        return it == def_block.end() || !in_loop.contains(it->second);
      };
      std::optional<std::pair<int, int>> pick;
      for (std::size_t b = 0; b < f.blocks.size() && !pick; ++b) {
        if (!in_loop.contains(f.blocks[b].label)) continue;
        for (std::size_t i = 0; i < f.blocks[b].insts.size(); ++i) {
          const Instruction& inst = f.blocks[b].insts[i];
          bool ok = false;
          if (inst.op == Opcode::kLoad && inst.md.invariant_group) {
            const std::string& addr = inst.operands[0];
            ok = invariant(addr) && fa.known_dereferenceable(addr) &&
                 fa.invariant_group_key(addr).valid && !group_stores.contains(addr);
          } else if (inst.op == Opcode::kFieldAddr) {
            const Instruction* base = fa.def(inst.operands[0]);
            ok = invariant(inst.operands[0]) && base &&
                 (base->op == Opcode::kLoad || base->op == Opcode::kGlobalRef);
          } else if (inst.op == Opcode::kLoad && inst.md.invariant_load) {
            const Instruction* root = fa.def(fa.decompose(inst.operands[0]).root);
            ok = invariant(inst.operands[0]) && root &&
                 ((root->op == Opcode::kLoad && root->md.invariant_group) ||
                  root->op == Opcode::kGlobalRef);
          }
          if (ok) {
            pick = {static_cast<int>(b), static_cast<int>(i)};
            break;
          }
        }
      }
      if (!pick) break;
      Instruction moved = f.blocks[pick->first].insts[pick->second];
      auto& src = f.blocks[pick->first].insts;
      src.erase(src.begin() + pick->second);
      int p = f.block_index(pre_label);
      auto& dst = f.blocks[p].insts;
      dst.insert(dst.end() - 1, moved);
      if (moved.op == Opcode::kLoad) ++c.hoisted_loads;
      changed = true;
    }
  }
  return c;
}

PassCounts eliminate_dead_stores(Function& f) {
  PassCounts c;
  FunctionAnalysis fa(f);
  std::set<InstRef> dead;
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    const auto& insts = f.blocks[b].insts;
    for (std::size_t i = 0; i < insts.size(); ++i) {
      if (insts[i].op != Opcode::kStore) continue;
      const std::string& addr = insts[i].operands[1];
      for (std::size_t j = i + 1; j < insts.size(); ++j) {
        const Instruction& later = insts[j];
        if (later.op == Opcode::kStore) {
          if (fa.alias(later.operands[1], addr) == AliasResult::kMustAlias) {
            dead.insert({static_cast<int>(b), static_cast<int>(i)});
            break;
          }
          continue;
        }
        if (later.op == Opcode::kLoad) {
          if (later.md.invariant_load) continue;
          if (fa.alias(later.operands[0], addr) != AliasResult::kNoAlias) break;
          continue;
        }
        if (later.op == Opcode::kCallDirect || later.op == Opcode::kCallIndirect ||
            is_terminator(later.op)) {
          break;
        }
      }
    }
  }

  // Stores into allocations whose address never escapes and is never read.
  std::map<std::string, std::vector<std::pair<InstRef, std::size_t>>> users;
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    for (std::size_t i = 0; i < f.blocks[b].insts.size(); ++i) {
      const Instruction& inst = f.blocks[b].insts[i];
      for (std::size_t k = 0; k < inst.operands.size(); ++k) {
        users[inst.operands[k]].push_back({{static_cast<int>(b), static_cast<int>(i)}, k});
      }
    }
  }
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    for (const Instruction& inst : f.blocks[b].insts) {
      if (inst.op != Opcode::kAlloc) continue;
      std::vector<InstRef> stores;
      bool escapes = false;
      std::vector<std::string> work{inst.result};
      std::set<std::string> seen;
      while (!work.empty() && !escapes) {
        std::string v = work.back();
        work.pop_back();
        if (!seen.insert(v).second) continue;
        for (auto [ref, k] : users[v]) {
          const Instruction& u = f.blocks[ref.block].insts[ref.index];
          if (u.op == Opcode::kStore && k == 1) {
            stores.push_back(ref);
          } else if (u.op == Opcode::kICmpEq) {
          } else if (u.op == Opcode::kFieldAddr || is_ptr_intrinsic(u.op)) {
            work.push_back(u.result);
          } else {
            escapes = true;
            break;
          }
        }
      }
      if (!escapes) dead.insert(stores.begin(), stores.end());
    }
  }
  c.eliminated_stores = static_cast<int>(dead.size());
  erase_marked(f, dead);
  return c;
}

namespace {

std::set<std::string> recursive_functions(const Module& m) {
  std::map<std::string, std::set<std::string>> calls;
  for (const Function& f : m.functions) {
    auto& out = calls[f.name];
    for (const BasicBlock& bb : f.blocks) {
      for (const Instruction& inst : bb.insts) {
        if (inst.op == Opcode::kCallDirect) out.insert(inst.symbol);
      }
    }
  }
  std::set<std::string> rec;
  for (const auto& [name, direct] : calls) {
    std::set<std::string> seen;
    std::vector<std::string> work(direct.begin(), direct.end());
    while (!work.empty()) {
      std::string g = work.back();
      work.pop_back();
      if (g == name) {
        rec.insert(name);
        break;
      }
      if (!seen.insert(g).second) continue;
      auto it = calls.find(g);
      if (it != calls.end()) work.insert(work.end(), it->second.begin(), it->second.end());
    }
  }
  return rec;
}

bool entry_has_preds(const Function& g) {
  const std::string& entry = g.blocks[0].label;
  for (const BasicBlock& bb : g.blocks) {
    if (bb.insts.empty()) continue;
    for (const std::string& l : bb.insts.back().labels) {
      if (l == entry) return true;
    }
  }
  return false;
}

void inline_site(Function& f, int b, int i, const Function& callee) {
  NameAllocator names(f);
  Instruction call = f.blocks[b].insts[i];
  std::map<std::string, std::string> vmap;
  std::map<std::string, std::string> lmap;
  for (std::size_t k = 0; k < callee.params.size(); ++k) {
    vmap[callee.params[k].name] = call.operands[k];
  }
  for (const BasicBlock& bb : callee.blocks) {
    lmap[bb.label] = names.label(callee.name + "." + bb.label);
    for (const Instruction& inst : bb.insts) {
      if (inst.has_result()) vmap[inst.result] = names.value(inst.result);
    }
  }
  std::string cont_label = names.label(f.blocks[b].label + ".cont");
  std::vector<std::pair<std::string, std::string>> returns;
  std::vector<BasicBlock> body;
  for (const BasicBlock& bb : callee.blocks) {
    BasicBlock nb{lmap[bb.label], {}};
    for (Instruction inst : bb.insts) {
      for (std::string& op : inst.operands) op = vmap.at(op);
      for (std::string& l : inst.labels) l = lmap.at(l);
      if (inst.has_result()) inst.result = vmap.at(inst.result);
      if (inst.op == Opcode::kRet) {
        if (!inst.operands.empty()) returns.push_back({inst.operands[0], nb.label});
        Instruction br;
        br.op = Opcode::kBr;
        br.labels = {cont_label};
        inst = br;
      }
      nb.insts.push_back(std::move(inst));
    }
    body.push_back(std::move(nb));
  }

  BasicBlock cont{cont_label, {}};
  if (call.has_result()) {
    if (returns.size() == 1) {
      replace_all_uses(f, call.result, returns[0].first);
    } else {
      Instruction v;
      v.result = call.result;
      v.type = call.type;
      if (returns.empty()) {
        v.op = Opcode::kConstUndef;
      } else {
        v.op = Opcode::kPhi;
        for (auto& [val, label] : returns) {
          v.operands.push_back(val);
          v.labels.push_back(label);
        }
      }
      cont.insts.push_back(std::move(v));
    }
  }
  auto& insts = f.blocks[b].insts;
  cont.insts.insert(cont.insts.end(), insts.begin() + i + 1, insts.end());
  insts.erase(insts.begin() + i, insts.end());
  Instruction br;
  br.op = Opcode::kBr;
  br.labels = {body[0].label};
  insts.push_back(br);

  const std::string& old_label = f.blocks[b].label;
  for (BasicBlock& bb : f.blocks) {
    for (Instruction& inst : bb.insts) {
      if (inst.op != Opcode::kPhi) continue;
      for (std::string& l : inst.labels) {
        if (l == old_label) l = cont_label;
      }
    }
  }
  body.push_back(std::move(cont));
  f.blocks.insert(f.blocks.begin() + b + 1, std::make_move_iterator(body.begin()),
                  std::make_move_iterator(body.end()));
}

}  // namespace

PassCounts inline_calls(Function& f, const Module& m, const PipelineConfig& cfg) {
  PassCounts c;
  std::set<std::string> rec = recursive_functions(m);
  std::vector<std::pair<int, int>> sites;
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    for (std::size_t i = 0; i < f.blocks[b].insts.size(); ++i) {
      const Instruction& inst = f.blocks[b].insts[i];
      if (inst.op != Opcode::kCallDirect || inst.symbol == f.name || rec.contains(inst.symbol)) {
        continue;
      }
      const Function* g = m.find_function(inst.symbol);
      if (!g || g->blocks.empty() || entry_has_preds(*g) ||
          g->params.size() != inst.operands.size() ||
          g->instruction_count() > static_cast<std::size_t>(cfg.inline_threshold)) {
        continue;
      }
      sites.push_back({static_cast<int>(b), static_cast<int>(i)});
    }
  }
  for (auto it = sites.rbegin(); it != sites.rend(); ++it) {
    Function callee = *m.find_function(f.blocks[it->first].insts[it->second].symbol);
    inline_site(f, it->first, it->second, callee);
    ++c.inlined_calls;
  }
  return c;
}

PassCounts propagate_attributes(Function& f) {
  f = propagate_pointer_attributes(f);
  return {};
}

PassReport lower_for_codegen(Module& m) {
  PassReport report;
  for (Function& f : m.functions) {
    PassCounts c;
    for (BasicBlock& bb : f.blocks) {
      for (Instruction& inst : bb.insts) {
        if (is_ptr_intrinsic(inst.op)) replace_all_uses(f, inst.result, inst.operands[0]);
      }
    }
    for (BasicBlock& bb : f.blocks) {
      c.removed_intrinsics += static_cast<int>(std::erase_if(bb.insts, [](const Instruction& i) {
        return is_intrinsic(i.op);
      }));
      for (Instruction& inst : bb.insts) {
        inst.md = {};
        inst.result_attrs = {};
        inst.operand_nocapture = false;
      }
    }
    remove_dead_instructions(f);
    report.add(f.name, c);
  }
  for (VTableGlobal& vt : m.vtables) {
    if (vt.linkage == Linkage::kOptimizationOnly) vt.linkage = Linkage::kDeclaration;
  }
  return report;
}

namespace {

void merge(PassReport& into, const PassReport& from) {
  for (const auto& [fn, c] : from.functions) into.add(fn, c);
}

PassCounts run_function_pass(const std::string& pass, Function& f, const Module& m,
                             const PipelineConfig& cfg) {
  if (pass == "inline") return inline_calls(f, m, cfg);
  if (pass == "simplify-intrinsics") return simplify_intrinsics(f);
  if (pass == "forward-invariant-loads") return forward_invariant_loads(f, m);
  if (pass == "fold-assumes") return fold_assumes(f);
  if (pass == "fold-pointer-comparisons") return fold_pointer_comparisons(f);
  if (pass == "devirtualize") return devirtualize_calls(f, m);
  if (pass == "hoist-invariant-loads") return hoist_invariant_loads(f);
  if (pass == "dse") return eliminate_dead_stores(f);
  if (pass == "propagate-attributes") return propagate_attributes(f);
  throw Error("unknown pass '" + pass + "'");
}

}  // namespace

PassReport run_pipeline(Module& m, const PipelineConfig& cfg) {
  const auto& known = known_passes();
  for (std::size_t i = 0; i < cfg.passes.size(); ++i) {
    const std::string& p = cfg.passes[i];
    if (std::find(known.begin(), known.end(), p) == known.end()) {
      throw Error("unknown pass '" + p + "'");
    }
    if (p == "lower-for-codegen" && i + 1 != cfg.passes.size()) {
      throw Error("lower-for-codegen must be the last pass");
    }
  }
  bool lower = !cfg.passes.empty() && cfg.passes.back() == "lower-for-codegen";
  std::vector<std::string> core(cfg.passes.begin(), cfg.passes.end() - (lower ? 1 : 0));

  PassReport report;
  for (int iter = 0; iter < std::max(1, cfg.fixpoint_iterations) && !core.empty(); ++iter) {
    Module before = m;
    for (const std::string& pass : core) {
      for (std::size_t fi = 0; fi < m.functions.size(); ++fi) {
        Function f = m.functions[fi];
        PassCounts c = run_function_pass(pass, f, m, cfg);
        m.functions[fi] = std::move(f);
        report.add(m.functions[fi].name, c);
      }
    }
    if (m == before) break;
  }
  if (lower) merge(report, lower_for_codegen(m));
  std::vector<Diagnostic> diags = verify_module(m);
  if (!diags.empty()) {
    throw Error("pipeline produced an invalid module: " + diags.front().to_string());
  }
  return report;
}

}  // namespace invar
