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

#include "invar/verifier.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "invar/cfg.h"
#include "invar/ir_text.h"

namespace invar {

std::string Diagnostic::to_string() const {
  std::ostringstream os;
  if (!function.empty()) {
    os << '@' << function;
    if (!block.empty()) os << ':' << block;
    if (index >= 0) os << ':' << index;
    os << ": ";
  }
  os << message << " [" << rule << ']';
  return os.str();
}

namespace {

bool produces_value(const Instruction& inst) {
  switch (inst.op) {
    case Opcode::kStore:
    case Opcode::kAssume:
    case Opcode::kBr:
    case Opcode::kCondBr:
    case Opcode::kRet:
      return false;
    case Opcode::kCallDirect:
    case Opcode::kCallIndirect:
      return inst.type != Type::kVoid;
    default:
      return true;
  }
}

class FunctionVerifier {
 public:
  FunctionVerifier(const Module& m, const Function& f,
                   std::vector<Diagnostic>& out)
      : m_(m), f_(f), out_(out) {}

  void run() {
    if (f_.blocks.empty()) {
      report("", -1, "empty-function", "function has no blocks");
      return;
    }
    for (const Param& p : f_.params) {
      if (p.attrs.dereferenceable_bytes && *p.attrs.dereferenceable_bytes == 0) {
        report("", -1, "attribute",
               "dereferenceable(0) on parameter %" + p.name);
      }
      if (p.type != Type::kPtr && !p.attrs.empty()) {
        report("", -1, "attribute",
               "pointer attribute on non-pointer parameter %" + p.name);
      }
    }
    check_structure();
    if (!structure_ok_) return;
    check_definitions();
    DominatorTree dt(f_);
    Cfg cfg(f_);
    for (std::size_t b = 0; b < f_.blocks.size(); ++b) {
      const BasicBlock& bb = f_.blocks[b];
      for (std::size_t i = 0; i < bb.insts.size(); ++i) {
        check_instruction(static_cast<int>(b), static_cast<int>(i), dt, cfg);
      }
    }
  }

 private:
  void report(const std::string& block, int index, std::string rule,
              std::string message) {
    out_.push_back(
        Diagnostic{f_.name, block, index, std::move(rule), std::move(message)});
  }

  void report_at(int b, int i, std::string rule, std::string message) {
    const Instruction& inst = f_.blocks[b].insts[i];
    report(f_.blocks[b].label, i, std::move(rule),
           std::move(message) + " in '" + print_instruction(inst) + "'");
  }

  void check_structure() {
    std::set<std::string, std::less<>> labels;
    for (const BasicBlock& bb : f_.blocks) {
      if (!labels.insert(bb.label).second) {
        report(bb.label, -1, "duplicate-label", "duplicate block label");
        structure_ok_ = false;
      }
    }
    for (const BasicBlock& bb : f_.blocks) {
      if (bb.insts.empty() || !is_terminator(bb.insts.back().op)) {
        report(bb.label, -1, "missing-terminator",
               "block does not end in a terminator");
        structure_ok_ = false;
        continue;
      }
      for (std::size_t i = 0; i + 1 < bb.insts.size(); ++i) {
        if (is_terminator(bb.insts[i].op)) {
          report(bb.label, static_cast<int>(i), "terminator-not-last",
                 "terminator in the middle of a block");
          structure_ok_ = false;
        }
      }
      for (const std::string& l : bb.insts.back().labels) {
        if (!labels.contains(l)) {
          report(bb.label, static_cast<int>(bb.insts.size() - 1),
                 "unknown-label", "branch to unknown block '" + l + "'");
          structure_ok_ = false;
        }
      }
    }
  }

  void check_definitions() {
    std::set<std::string, std::less<>> seen;
    for (const Param& p : f_.params) {
      if (!seen.insert(p.name).second) {
        report("", -1, "duplicate-definition", "parameter %" + p.name +
                                                   " defined twice");
      }
    }
    for (std::size_t b = 0; b < f_.blocks.size(); ++b) {
      const auto& insts = f_.blocks[b].insts;
      for (std::size_t i = 0; i < insts.size(); ++i) {
        if (insts[i].has_result() && !seen.insert(insts[i].result).second) {
          report_at(static_cast<int>(b), static_cast<int>(i),
                    "duplicate-definition",
                    "value %" + insts[i].result + " defined twice");
        }
      }
    }
    defs_ = definition_map(f_);
    types_ = value_types(f_);
  }

  std::optional<Type> type_of(const std::string& v) const {
    auto it = types_.find(v);
    if (it == types_.end()) return std::nullopt;
    return it->second;
  }

  bool expect_type(int b, int i, const std::string& v, Type want,
                   std::string_view role) {
    auto t = type_of(v);
    if (!t) return false;  // reported as undefined
    if (*t != want) {
      report_at(b, i, "type-mismatch",
                std::string(role) + " %" + v + " must be " +
                    std::string(type_name(want)) + ", found " +
                    std::string(type_name(*t)));
      return false;
    }
    return true;
  }

  void check_call(int b, int i, const Instruction& inst,
                  const Signature& sig, std::size_t first_arg) {
    std::size_t nargs = inst.operands.size() - first_arg;
    if (nargs != sig.params.size()) {
      report_at(b, i, "call-arity",
                "call passes " + std::to_string(nargs) + " arguments, callee takes " +
                    std::to_string(sig.params.size()));
      return;
    }
    for (std::size_t k = 0; k < nargs; ++k) {
      expect_type(b, i, inst.operands[first_arg + k], sig.params[k], "argument");
    }
    if (inst.type != sig.ret) {
      report_at(b, i, "type-mismatch", "call result type differs from callee");
    }
  }

  void check_instruction(int b, int i, const DominatorTree& dt, const Cfg& cfg) {
    const Instruction& inst = f_.blocks[b].insts[i];
    const auto& ops = inst.operands;

    // Metadata placement.
    if (inst.md.invariant_group && inst.op != Opcode::kLoad &&
        inst.op != Opcode::kStore) {
      report_at(b, i, "metadata-placement",
                "metadata on non-memory instruction");
    }
    if (inst.md.invariant_load && inst.op != Opcode::kLoad) {
      report_at(b, i, "metadata-placement",
                inst.op == Opcode::kStore
                    ? "invariant.load metadata on a store"
                    : "metadata on non-memory instruction");
    }
    if ((inst.operand_nocapture || !inst.result_attrs.empty()) &&
        inst.op != Opcode::kLaunder && inst.op != Opcode::kStrip) {
      report_at(b, i, "attribute", "pointer attributes on a non-intrinsic");
    }
    if (inst.result_attrs.dereferenceable_bytes &&
        *inst.result_attrs.dereferenceable_bytes == 0) {
      report_at(b, i, "attribute", "dereferenceable(0)");
    }

    // Result presence.
    if (produces_value(inst) != inst.has_result()) {
      report_at(b, i, "result",
                inst.has_result() ? "instruction produces no value"
                                  : "instruction result is unnamed");
    }

    // Operand definitions and dominance.
    for (std::size_t k = 0; k < ops.size(); ++k) {
      if (inst.op != Opcode::kPhi &&
          std::find(ops.begin(), ops.begin() + static_cast<std::ptrdiff_t>(k), ops[k]) !=
              ops.begin() + static_cast<std::ptrdiff_t>(k)) {
        continue;
      }
      auto it = defs_.find(ops[k]);
      if (it == defs_.end()) {
        report_at(b, i, "undefined-value", "use of undefined value %" + ops[k]);
        continue;
      }
      if (inst.op == Opcode::kPhi) {
        int pred = f_.block_index(inst.labels[k]);
        if (pred < 0) continue;
        InstRef end{pred, static_cast<int>(f_.blocks[pred].insts.size())};
        if (!dt.dominates(it->second, end)) {
          report_at(b, i, "ssa-dominance",
                    "SSA dominance violated for %" + ops[k]);
        }
      } else if (!dt.dominates(it->second, InstRef{b, i})) {
        report_at(b, i, "ssa-dominance", "SSA dominance violated for %" + ops[k]);
      }
    }

    auto arity = [&](std::size_t n) {
      if (ops.size() != n) {
        report_at(b, i, "operand-count",
                  "expected " + std::to_string(n) + " operands");
        return false;
      }
      return true;
    };

    switch (inst.op) {
      case Opcode::kAlloc:
        if (arity(0) && inst.imm <= 0) {
          report_at(b, i, "alloc-size", "allocation size must be positive");
        }
        break;
      case Opcode::kLoad:
        if (arity(1)) expect_type(b, i, ops[0], Type::kPtr, "address");
        if (inst.type == Type::kVoid) report_at(b, i, "type-mismatch", "void load");
        break;
      case Opcode::kStore:
        if (arity(2)) expect_type(b, i, ops[1], Type::kPtr, "address");
        break;
      case Opcode::kFieldAddr:
        if (arity(1)) expect_type(b, i, ops[0], Type::kPtr, "base");
        if (inst.imm < 0) report_at(b, i, "field-offset", "negative field offset");
        break;
      case Opcode::kCallDirect: {
        auto sig = m_.signature(inst.symbol);
        if (!sig) {
          report_at(b, i, "unresolved-symbol",
                    "call to unknown function @" + inst.symbol);
        } else {
          check_call(b, i, inst, *sig, 0);
        }
        break;
      }
      case Opcode::kCallIndirect:
        if (ops.empty()) {
          report_at(b, i, "operand-count", "indirect call without callee");
        } else {
          expect_type(b, i, ops[0], Type::kPtr, "callee");
        }
        break;
      case Opcode::kLaunder:
      case Opcode::kStrip:
        if (arity(1)) expect_type(b, i, ops[0], Type::kPtr, "operand");
        if (inst.type != Type::kPtr) {
          report_at(b, i, "type-mismatch", "intrinsic result must be ptr");
        }
        break;
      case Opcode::kAssume:
        if (arity(1)) expect_type(b, i, ops[0], Type::kBool, "condition");
        break;
      case Opcode::kICmpEq:
        if (arity(2)) {
          auto a = type_of(ops[0]);
          auto c = type_of(ops[1]);
          if (a && c && (*a != *c || *a == Type::kVoid)) {
            report_at(b, i, "type-mismatch", "comparison of mismatched types");
          }
        }
        break;
      case Opcode::kICmpSlt:
      case Opcode::kAdd:
      case Opcode::kSub:
      case Opcode::kMul:
        if (arity(2)) {
          expect_type(b, i, ops[0], Type::kInt, "operand");
          expect_type(b, i, ops[1], Type::kInt, "operand");
        }
        break;
      case Opcode::kPtrToInt:
        if (arity(1)) expect_type(b, i, ops[0], Type::kPtr, "operand");
        break;
      case Opcode::kIntToPtr:
        if (arity(1)) expect_type(b, i, ops[0], Type::kInt, "operand");
        break;
      case Opcode::kBr:
        if (inst.labels.size() != 1) report_at(b, i, "operand-count", "br needs one label");
        arity(0);
        break;
      case Opcode::kCondBr:
        if (inst.labels.size() != 2) report_at(b, i, "operand-count", "condbr needs two labels");
        if (arity(1)) expect_type(b, i, ops[0], Type::kBool, "condition");
        break;
      case Opcode::kRet:
        if (f_.ret == Type::kVoid) {
          arity(0);
        } else if (arity(1)) {
          expect_type(b, i, ops[0], f_.ret, "return value");
        }
        break;
      case Opcode::kPhi: {
        for (int k = 0; k < i; ++k) {
          if (f_.blocks[b].insts[k].op != Opcode::kPhi) {
            report_at(b, i, "phi-placement", "phi after non-phi instruction");
            break;
          }
        }
        if (inst.labels.size() != ops.size()) {
          report_at(b, i, "phi-incoming", "phi operand/label count mismatch");
          break;
        }
        for (const std::string& v : ops) expect_type(b, i, v, inst.type, "incoming");
        std::set<int> incoming;
        for (const std::string& l : inst.labels) incoming.insert(f_.block_index(l));
        std::set<int> preds(cfg.preds[b].begin(), cfg.preds[b].end());
        if (incoming != preds || incoming.size() != inst.labels.size()) {
          report_at(b, i, "phi-incoming",
                    "phi incoming blocks do not match predecessors");
        }
        break;
      }
      case Opcode::kConstInt:
        if (inst.type != Type::kInt && inst.type != Type::kBool) {
          report_at(b, i, "type-mismatch", "const must be int or bool");
        }
        break;
      case Opcode::kConstNull:
        break;
      case Opcode::kConstUndef:
        if (inst.type == Type::kVoid) report_at(b, i, "type-mismatch", "void undef");
        break;
      case Opcode::kGlobalRef:
        if (!m_.signature(inst.symbol) && !m_.find_vtable(inst.symbol)) {
          report_at(b, i, "unresolved-symbol", "reference to unknown global @" +
                                                   inst.symbol);
        }
        break;
    }
  }

  const Module& m_;
  const Function& f_;
  std::vector<Diagnostic>& out_;
  bool structure_ok_ = true;
  std::map<std::string, InstRef, std::less<>> defs_;
  std::map<std::string, Type, std::less<>> types_;
};

}  // namespace

std::vector<Diagnostic> verify_module(const Module& m) {
  std::vector<Diagnostic> out;
  std::set<std::string, std::less<>> names;
  auto declare = [&](const std::string& name) {
    if (!names.insert(name).second) {
      out.push_back({"", "", -1, "duplicate-symbol",
                     "global @" + name + " defined more than once"});
    }
  };
  for (const VTableGlobal& v : m.vtables) declare(v.name);
  for (const Declaration& d : m.declarations) declare(d.name);
  for (const Function& f : m.functions) declare(f.name);

  for (const VTableGlobal& v : m.vtables) {
    for (const std::string& s : v.slots) {
      if (!m.signature(s)) {
        out.push_back({"", "", -1, "unresolved-symbol",
                       "vtable @" + v.name + " references unknown function @" + s});
      }
    }
  }
  for (const Function& f : m.functions) FunctionVerifier(m, f, out).run();
  return out;
}

}  // namespace invar
