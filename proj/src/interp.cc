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

#include "invar/interp.h"

#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace invar {

RuntimeValue RuntimeValue::Int(std::int64_t v) {
  RuntimeValue r;
  r.kind = Kind::kInt;
  r.i = v;
  return r;
}

RuntimeValue RuntimeValue::Bool(bool v) {
  RuntimeValue r;
  r.kind = Kind::kBool;
  r.i = v ? 1 : 0;
  return r;
}

RuntimeValue RuntimeValue::Null() { return Ptr(0, 0, 0); }

RuntimeValue RuntimeValue::Ptr(std::uint64_t alloc, std::int64_t offset, std::int64_t gen) {
  RuntimeValue r;
  r.kind = Kind::kPtr;
  r.alloc = alloc;
  r.offset = offset;
  r.gen = gen;
  return r;
}

RuntimeValue RuntimeValue::Func(std::string symbol) {
  RuntimeValue r;
  r.kind = Kind::kFunc;
  r.symbol = std::move(symbol);
  return r;
}

bool RuntimeValue::same_value(const RuntimeValue& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::kUndef:
      return true;
    case Kind::kInt:
    case Kind::kBool:
      return i == o.i;
    case Kind::kPtr:
      return alloc == o.alloc && (alloc == 0 || offset == o.offset);
    case Kind::kFunc:
      return symbol == o.symbol;
  }
  return false;
}

std::string RuntimeValue::to_string() const {
  switch (kind) {
    case Kind::kUndef:
      return "undef";
    case Kind::kInt:
      return std::to_string(i);
    case Kind::kBool:
      return i ? "true" : "false";
    case Kind::kPtr:
      return alloc == 0 ? "null" : "ptr+" + std::to_string(offset);
    case Kind::kFunc:
      return "@" + symbol;
  }
  return "?";
}

std::string_view ub_kind_name(UBKind k) {
  switch (k) {
    case UBKind::kStaleDynamicInfo:
      return "stale-dynamic-info";
    case UBKind::kUseAfterFree:
      return "use-after-free";
    case UBKind::kOutOfBounds:
      return "oob";
    case UBKind::kInvalidIndirectCallee:
      return "invalid-indirect-callee";
  }
  return "?";
}

std::string ExecTrace::to_text() const {
  std::ostringstream os;
  for (const std::string& e : events) os << e << "\n";
  for (const UBReport& u : ub_reports) {
    os << "ub " << ub_kind_name(u.kind) << " " << u.location << "\n";
  }
  return os.str();
}

namespace {

constexpr std::int64_t kPtrIntScale = 65536;

struct Allocation {
  std::vector<RuntimeValue> slots;
  bool live = true;
  bool readonly = false;
  std::int64_t next_gen = 0;
  std::uint64_t epoch = 0;
  std::map<std::int64_t, std::uint64_t> birth_epoch;
  // Value each generation last established for a slot through an
  // invariant.group store, or inherited when it was laundered.
  std::map<std::pair<std::int64_t, std::int64_t>, RuntimeValue> pins;
  std::set<std::int64_t> group_slots;
};

struct Halt {};

struct FunctionInfo {
  std::unordered_map<std::string, int> labels;
};

class Interpreter {
 public:
  Interpreter(const Module& m, ExecMode mode, const EvalOptions& opts)
      : m_(m), mode_(mode), opts_(opts) {
    allocs_.emplace_back();  // id 0: null
    allocs_[0].live = false;
    for (const VTableGlobal& vt : m.vtables) {
      Allocation a;
      a.readonly = true;
      for (const std::string& s : vt.slots) a.slots.push_back(RuntimeValue::Func(s));
      if (a.slots.empty()) a.slots.push_back(RuntimeValue());
      vtables_[vt.name] = allocs_.size();
      allocs_.push_back(std::move(a));
      ctor_vtable_[vt.class_name + ".ctor"] = vt.name;
    }
    for (const Function& f : m.functions) {
      FunctionInfo info;
      for (std::size_t b = 0; b < f.blocks.size(); ++b) {
        info.labels[f.blocks[b].label] = static_cast<int>(b);
      }
      infos_[&f] = std::move(info);
    }
  }

  ExecTrace run(std::string_view entry) {
    const Function* f = m_.find_function(entry);
    if (!f || f->blocks.empty()) throw Error("entry function @" + std::string(entry) + " not found");
    if (!f->params.empty()) throw Error("entry function @" + std::string(entry) + " takes parameters");
    try {
      execute(*f, {}, 0);
    } catch (const Halt&) {
    }
    return std::move(trace_);
  }

 private:
  [[noreturn]] void fail(UBKind kind, const std::string& loc, std::uint64_t alloc,
                         const std::string& detail) {
    if (mode_ == ExecMode::kChecked) {
      trace_.ub_reports.push_back({kind, loc, alloc, detail});
      throw Halt{};
    }
    throw TrapError(std::string(ub_kind_name(kind)) + " at " + loc + ": " + detail);
  }

  Allocation& access(const RuntimeValue& p, const std::string& loc, bool write) {
    if (p.kind != RuntimeValue::Kind::kPtr) {
      fail(UBKind::kOutOfBounds, loc, 0, "address is not a pointer");
    }
    if (p.alloc == 0) fail(UBKind::kOutOfBounds, loc, 0, "null dereference");
    if (p.alloc >= allocs_.size()) fail(UBKind::kOutOfBounds, loc, p.alloc, "wild pointer");
    Allocation& a = allocs_[p.alloc];
    if (!a.live) fail(UBKind::kUseAfterFree, loc, p.alloc, "allocation was freed");
    if (p.offset < 0 || p.offset % kSlotSize != 0 ||
        p.offset / kSlotSize >= static_cast<std::int64_t>(a.slots.size())) {
      fail(UBKind::kOutOfBounds, loc, p.alloc, "offset " + std::to_string(p.offset));
    }
    if (write && a.readonly) fail(UBKind::kOutOfBounds, loc, p.alloc, "store to constant");
    return a;
  }

  void group_store(const RuntimeValue& p, const RuntimeValue& v, const std::string& loc) {
    Allocation& a = access(p, loc, true);
    a.slots[p.offset / kSlotSize] = v;
    ++a.epoch;
    a.group_slots.insert(p.offset);
    if (p.gen != kStrippedGeneration) a.pins[{p.gen, p.offset}] = v;
  }

  RuntimeValue launder(const RuntimeValue& p) {
    ++trace_.stats.launders;
    if (p.kind != RuntimeValue::Kind::kPtr || p.alloc == 0 || p.alloc >= allocs_.size()) {
      return p;
    }
    Allocation& a = allocs_[p.alloc];
    std::int64_t gen = ++a.next_gen;
    a.birth_epoch[gen] = a.epoch;
    for (std::int64_t off : a.group_slots) a.pins[{gen, off}] = a.slots[off / kSlotSize];
    RuntimeValue r = p;
    r.gen = gen;
    return r;
  }

  static std::int64_t as_int(const RuntimeValue& v) {
    if (v.kind == RuntimeValue::Kind::kPtr || v.kind == RuntimeValue::Kind::kFunc) {
      throw TrapError("arithmetic on a pointer value");
    }
    return v.i;
  }

  static RuntimeValue default_value(Type t) {
    switch (t) {
      case Type::kInt:
        return RuntimeValue::Int(0);
      case Type::kBool:
        return RuntimeValue::Bool(false);
      case Type::kPtr:
        return RuntimeValue::Null();
      case Type::kVoid:
        break;
    }
    return RuntimeValue();
  }

  RuntimeValue invoke(const std::string& sym, std::vector<RuntimeValue> args, Type ret,
                      const std::string& loc, int depth) {
    if (const Function* g = m_.find_function(sym)) {
      return execute(*g, std::move(args), depth + 1);
    }
    if (sym == "print" && args.size() == 1) {
      trace_.prints.push_back(args[0].i);
      trace_.events.push_back("print " + args[0].to_string());
      return {};
    }
    if (sym == "free" && args.size() == 1) {
      const RuntimeValue& p = args[0];
      if (p.kind == RuntimeValue::Kind::kPtr && p.alloc != 0) {
        Allocation& a = access(p, loc, false);
        a.live = false;
      }
      return {};
    }
    ExternalCall call{sym, {}};
    for (const RuntimeValue& a : args) call.args.push_back(a.to_string());
    std::string event = "extcall @" + sym + "(";
    for (std::size_t k = 0; k < call.args.size(); ++k) {
      event += (k ? ", " : "") + call.args[k];
    }
    trace_.events.push_back(event + ")");
    trace_.external_calls.push_back(std::move(call));
    auto ctor = ctor_vtable_.find(sym);
    if (ctor != ctor_vtable_.end() && !args.empty()) {
      group_store(args[0], RuntimeValue::Ptr(vtables_.at(ctor->second), 0, 0), loc);
    }
    return default_value(ret);
  }

  RuntimeValue execute(const Function& f, std::vector<RuntimeValue> args, int depth) {
    if (depth > opts_.max_depth) throw LimitError("call depth limit exceeded");
    const FunctionInfo& info = infos_.at(&f);
    std::unordered_map<std::string, RuntimeValue> env;
    for (std::size_t k = 0; k < f.params.size() && k < args.size(); ++k) {
      env[f.params[k].name] = args[k];
    }
    auto get = [&](const std::string& v) -> const RuntimeValue& {
      auto it = env.find(v);
      if (it == env.end()) throw Error("use of unassigned value %" + v + " in @" + f.name);
      return it->second;
    };
    int b = 0;
    std::string prev;
    while (true) {
      const BasicBlock& bb = f.blocks[b];
      // Phis read their inputs simultaneously.
      std::vector<std::pair<std::string, RuntimeValue>> phis;
      std::size_t i = 0;
      for (; i < bb.insts.size() && bb.insts[i].op == Opcode::kPhi; ++i) {
        const Instruction& phi = bb.insts[i];
        for (std::size_t k = 0; k < phi.labels.size(); ++k) {
          if (phi.labels[k] == prev) {
            phis.push_back({phi.result, get(phi.operands[k])});
            break;
          }
        }
      }
      for (auto& [name, v] : phis) env[name] = std::move(v);
      for (; i < bb.insts.size(); ++i) {
        const Instruction& inst = bb.insts[i];
        if (++trace_.stats.instructions > opts_.max_steps) {
          throw LimitError("step limit exceeded");
        }
        auto loc = [&]() {
          return "@" + f.name + ":" + bb.label + ":" + std::to_string(i);
        };
        RuntimeValue out;
        switch (inst.op) {
          case Opcode::kAlloc: {
            Allocation a;
            a.slots.assign(static_cast<std::size_t>((inst.imm + kSlotSize - 1) / kSlotSize),
                           RuntimeValue::Int(0));
            out = RuntimeValue::Ptr(allocs_.size(), 0, 0);
            allocs_.push_back(std::move(a));
            break;
          }
          case Opcode::kLoad: {
            const RuntimeValue& p = get(inst.operands[0]);
            Allocation& a = access(p, loc(), false);
            out = a.slots[p.offset / kSlotSize];
            ++trace_.stats.loads;
            if (inst.md.invariant_load) ++trace_.stats.invariant_loads;
            if (inst.md.invariant_group) {
              ++trace_.stats.invariant_group_loads;
              if (mode_ == ExecMode::kChecked && p.gen != kStrippedGeneration) {
                auto pin = a.pins.find({p.gen, p.offset});
                if (pin != a.pins.end() && !pin->second.same_value(out)) {
                  std::uint64_t born = a.birth_epoch.count(p.gen) ? a.birth_epoch[p.gen] : 0;
                  fail(UBKind::kStaleDynamicInfo, loc(), p.alloc,
                       "generation " + std::to_string(p.gen) + " born at epoch " +
                           std::to_string(born) + " expects " + pin->second.to_string() +
                           ", memory holds " + out.to_string() + " at epoch " +
                           std::to_string(a.epoch));
                }
              }
            }
            break;
          }
          case Opcode::kStore: {
            const RuntimeValue& v = get(inst.operands[0]);
            const RuntimeValue& p = get(inst.operands[1]);
            ++trace_.stats.stores;
            if (inst.md.invariant_group) {
              group_store(p, v, loc());
            } else {
              Allocation& a = access(p, loc(), true);
              a.slots[p.offset / kSlotSize] = v;
            }
            break;
          }
          case Opcode::kFieldAddr: {
            out = get(inst.operands[0]);
            if (out.kind != RuntimeValue::Kind::kPtr) {
              fail(UBKind::kOutOfBounds, loc(), 0, "fieldaddr of a non-pointer");
            }
            out.offset += inst.imm;
            break;
          }
          case Opcode::kCallDirect:
          case Opcode::kCallIndirect: {
            std::size_t first = inst.op == Opcode::kCallIndirect ? 1 : 0;
            std::vector<RuntimeValue> call_args;
            for (std::size_t k = first; k < inst.operands.size(); ++k) {
              call_args.push_back(get(inst.operands[k]));
            }
            std::string sym = inst.symbol;
            if (inst.op == Opcode::kCallIndirect) {
              ++trace_.stats.indirect_calls;
              const RuntimeValue& callee = get(inst.operands[0]);
              if (callee.kind != RuntimeValue::Kind::kFunc) {
                fail(UBKind::kInvalidIndirectCallee, loc(), 0,
                     "callee is " + callee.to_string());
              }
              auto sig = m_.signature(callee.symbol);
              if (!sig || sig->params.size() != call_args.size()) {
                fail(UBKind::kInvalidIndirectCallee, loc(), 0,
                     "signature mismatch calling @" + callee.symbol);
              }
              sym = callee.symbol;
            } else {
              ++trace_.stats.direct_calls;
            }
            out = invoke(sym, std::move(call_args), inst.type, loc(), depth);
            break;
          }
          case Opcode::kLaunder:
            out = launder(get(inst.operands[0]));
            break;
          case Opcode::kStrip:
            ++trace_.stats.strips;
            out = get(inst.operands[0]);
            if (out.kind == RuntimeValue::Kind::kPtr && out.alloc != 0) {
              out.gen = kStrippedGeneration;
            }
            break;
          case Opcode::kAssume:
            break;
          case Opcode::kICmpEq:
            out = RuntimeValue::Bool(get(inst.operands[0]).same_value(get(inst.operands[1])));
            break;
          case Opcode::kICmpSlt:
            out = RuntimeValue::Bool(as_int(get(inst.operands[0])) <
                                     as_int(get(inst.operands[1])));
            break;
          case Opcode::kPtrToInt: {
            const RuntimeValue& p = get(inst.operands[0]);
            if (p.kind == RuntimeValue::Kind::kPtr) {
              out = RuntimeValue::Int(static_cast<std::int64_t>(p.alloc) * kPtrIntScale +
                                      (p.alloc == 0 ? 0 : p.offset));
            } else {
              out = RuntimeValue::Int(as_int(p));
            }
            break;
          }
          case Opcode::kIntToPtr: {
            std::int64_t v = as_int(get(inst.operands[0]));
            if (v == 0) {
              out = RuntimeValue::Null();
            } else {
              out = RuntimeValue::Ptr(static_cast<std::uint64_t>(v / kPtrIntScale),
                                      v % kPtrIntScale, kStrippedGeneration);
            }
            break;
          }
          case Opcode::kAdd:
          case Opcode::kSub:
          case Opcode::kMul: {
            auto x = static_cast<std::uint64_t>(as_int(get(inst.operands[0])));
            auto y = static_cast<std::uint64_t>(as_int(get(inst.operands[1])));
            std::uint64_t r = inst.op == Opcode::kAdd   ? x + y
                              : inst.op == Opcode::kSub ? x - y
                                                        : x * y;
            out = RuntimeValue::Int(static_cast<std::int64_t>(r));
            break;
          }
          case Opcode::kConstInt:
            out = inst.type == Type::kBool ? RuntimeValue::Bool(inst.imm != 0)
                                           : RuntimeValue::Int(inst.imm);
            break;
          case Opcode::kConstNull:
            out = RuntimeValue::Null();
            break;
          case Opcode::kConstUndef:
            out = RuntimeValue();
            break;
          case Opcode::kGlobalRef: {
            auto vt = vtables_.find(inst.symbol);
            out = vt != vtables_.end() ? RuntimeValue::Ptr(vt->second, 0, 0)
                                       : RuntimeValue::Func(inst.symbol);
            break;
          }
          case Opcode::kBr:
            prev = bb.label;
            b = info.labels.at(inst.labels[0]);
            goto next_block;
          case Opcode::kCondBr: {
            const RuntimeValue& c = get(inst.operands[0]);
            if (c.kind == RuntimeValue::Kind::kUndef) throw TrapError("branch on undef at " + loc());
            prev = bb.label;
            b = info.labels.at(inst.labels[c.i != 0 ? 0 : 1]);
            goto next_block;
          }
          case Opcode::kRet:
            if (inst.operands.empty()) return {};
            return get(inst.operands[0]);
          case Opcode::kPhi:
            break;
        }
        if (inst.has_result()) env[inst.result] = std::move(out);
      }
      throw Error("block " + bb.label + " in @" + f.name + " has no terminator");
    next_block:;
    }
  }

  const Module& m_;
  ExecMode mode_;
  EvalOptions opts_;
  ExecTrace trace_;
  std::vector<Allocation> allocs_;
  std::map<std::string, std::uint64_t, std::less<>> vtables_;
  std::map<std::string, std::string, std::less<>> ctor_vtable_;
  std::map<const Function*, FunctionInfo> infos_;
};

}  // namespace

ExecTrace eval_module(const Module& m, std::string_view entry, ExecMode mode,
                      const EvalOptions& opts) {
  return Interpreter(m, mode, opts).run(entry);
}

}  // namespace invar
