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

#include "invar/moo/lowering.h"

#include <algorithm>
#include <set>

#include "invar/diagnostic.h"

namespace invar::moo {

std::string ctor_symbol(const std::string& cls) { return cls + ".ctor"; }
std::string dtor_symbol(const std::string& cls) { return cls + ".dtor"; }
std::string method_symbol(const std::string& cls, const std::string& method) {
  return cls + "." + method;
}
std::string vtable_symbol(const std::string& cls) { return cls + ".vtable"; }

std::vector<VTableGlobal> emit_vtables(const SourceProgram& p,
                                       const LoweringOptions& opts) {
  std::vector<VTableGlobal> out;
  for (const ClassDecl& c : p.classes) {
    if (!c.dynamic) continue;
    VTableGlobal vt;
    vt.name = vtable_symbol(c.name);
    vt.class_name = c.name;
    bool all_available = true;
    for (const VTableSlot& s : c.vtable) {
      vt.slots.push_back(method_symbol(s.definer, s.method));
      const MethodDecl* m = p.find_method(s.definer, s.method);
      if (!m || !m->defined) all_available = false;
    }
    if (c.has_key_function) {
      vt.linkage = Linkage::kDefinition;
    } else if (all_available || opts.force_emit_vtables) {
      vt.linkage = Linkage::kOptimizationOnly;
    } else {
      vt.linkage = Linkage::kDeclaration;
    }
    out.push_back(std::move(vt));
  }
  return out;
}

namespace {

Type ir_type(const TypeRef& t) {
  switch (t.kind) {
    case TypeRef::Kind::kVoid:
      return Type::kVoid;
    case TypeRef::Kind::kInt:
      return Type::kInt;
    case TypeRef::Kind::kPtr:
    case TypeRef::Kind::kNull:
      return Type::kPtr;
  }
  return Type::kVoid;
}

class ModuleLowering;

class FunctionLowering {
 public:
  FunctionLowering(ModuleLowering& ml, const SourceProgram& p,
                   const LoweringOptions& opts, const ClassDecl* cls)
      : ml_(ml), p_(p), opts_(opts), cls_(cls) {}

  Function lower_free(const FunctionDecl& fd) {
    begin(fd.name, ir_type(fd.ret), fd.params, false);
    ret_type_ = fd.ret;
    lower_stmts(fd.body);
    return finish();
  }

  Function lower_method(const MethodDecl& md) {
    begin(method_symbol(cls_->name, md.name), ir_type(md.ret), md.params, true);
    ret_type_ = md.ret;
    lower_stmts(md.body);
    return finish();
  }

  // Base constructor first (through a laundered this), then the own vptr.
  Function lower_ctor(const SpecialMember* sm) {
    begin(ctor_symbol(cls_->name), Type::kVoid, {}, true);
    if (cls_->base) {
      std::string self = launder("this", "this.base");
      call_direct(ctor_symbol(*cls_->base), Type::kVoid, {self}, "");
    }
    store_vptr("this");
    if (sm && sm->defined) lower_stmts(sm->body);
    return finish();
  }

  // Own vptr first, then the body, then the base destructor through a
  // laundered this.
  Function lower_dtor(const SpecialMember* sm) {
    begin(dtor_symbol(cls_->name), Type::kVoid, {}, true);
    if (cls_->base) {
      if (const ClassDecl* owner = p_.dtor_owner(*cls_->base)) {
        base_dtor_ = dtor_symbol(owner->name);
      }
    }
    store_vptr("this");
    if (sm && sm->defined) lower_stmts(sm->body);
    return finish();
  }

 private:
  struct Var {
    std::string name;
    std::string value;
  };

  void begin(const std::string& name, Type ret, const std::vector<ParamDecl>& params,
             bool with_this) {
    f_.name = name;
    f_.ret = ret;
    scopes_.emplace_back();
    if (with_this) {
      Param self;
      self.name = "this";
      self.type = Type::kPtr;
      self.attrs.nonnull = true;
      self.attrs.dereferenceable_bytes = static_cast<std::uint64_t>(cls_->size);
      f_.params.push_back(self);
    }
    for (const ParamDecl& pd : params) {
      f_.params.push_back({pd.name, ir_type(pd.type), {}});
      declare_var(pd.name, pd.name);
    }
    names_ = NameAllocator(f_);
    start_block(names_.label("entry"));
  }

  Function finish() {
    if (!terminated()) emit_return(std::nullopt);
    remove_unreachable_blocks(f_);
    remove_trivial_phis(f_);
    return std::move(f_);
  }

  // --- block and instruction emission -------------------------------------

  void start_block(const std::string& label) {
    f_.blocks.push_back({label, {}});
    cur_ = static_cast<int>(f_.blocks.size()) - 1;
  }

  const std::string& cur_label() const { return f_.blocks[cur_].label; }

  bool terminated() const {
    const auto& insts = f_.blocks[cur_].insts;
    return !insts.empty() && is_terminator(insts.back().op);
  }

  std::string emit(Instruction inst, std::string_view hint) {
    if (!hint.empty()) inst.result = names_.value(hint);
    std::string r = inst.result;
    f_.blocks[cur_].insts.push_back(std::move(inst));
    return r;
  }

  static Instruction make(Opcode op, Type type, std::vector<std::string> operands = {}) {
    Instruction i;
    i.op = op;
    i.type = type;
    i.operands = std::move(operands);
    return i;
  }

  std::string const_int(std::int64_t v) {
    Instruction i = make(Opcode::kConstInt, Type::kInt);
    i.imm = v;
    return emit(std::move(i), "c");
  }

  std::string global_ref(const std::string& sym, std::string_view hint) {
    Instruction i = make(Opcode::kGlobalRef, Type::kPtr);
    i.symbol = sym;
    return emit(std::move(i), hint);
  }

  std::string launder(const std::string& v, std::string_view hint) {
    if (!opts_.strict_vtable_pointers) return v;
    return emit(make(Opcode::kLaunder, Type::kPtr, {v}), hint);
  }

  std::string strip(const std::string& v, std::string_view hint) {
    if (!opts_.strict_vtable_pointers) return v;
    return emit(make(Opcode::kStrip, Type::kPtr, {v}), hint);
  }

  std::string call_direct(const std::string& sym, Type ret,
                          std::vector<std::string> args, std::string_view hint) {
    Instruction i = make(Opcode::kCallDirect, ret, std::move(args));
    i.symbol = sym;
    return emit(std::move(i), ret == Type::kVoid ? std::string_view() : hint);
  }

  void store_vptr(const std::string& obj) {
    if (!cls_->dynamic) return;
    std::string vt = global_ref(vtable_symbol(cls_->name), "vtable");
    Instruction st = make(Opcode::kStore, Type::kVoid, {vt, obj});
    st.md.invariant_group = opts_.strict_vtable_pointers;
    emit(std::move(st), "");
  }

  void emit_return(std::optional<std::string> value) {
    if (!base_dtor_.empty()) {
      std::string self = launder("this", "this.base");
      call_direct(base_dtor_, Type::kVoid, {self}, "");
    }
    Instruction r = make(Opcode::kRet, Type::kVoid);
    if (f_.ret != Type::kVoid) {
      if (!value) {
        if (f_.ret == Type::kPtr) {
          value = emit(make(Opcode::kConstNull, Type::kPtr), "null");
        } else {
          value = const_int(0);
        }
      }
      r.operands.push_back(*value);
    }
    emit(std::move(r), "");
  }

  void branch(const std::string& label) {
    Instruction b = make(Opcode::kBr, Type::kVoid);
    b.labels = {label};
    emit(std::move(b), "");
  }

  // --- variables ------------------------------------------------------------

  void declare_var(const std::string& name, const std::string& value) {
    scopes_.back()[name] = static_cast<int>(vars_.size());
    vars_.push_back({name, value});
  }

  int var_id(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    throw Error("lowering: unresolved variable '" + name + "'");
  }

  std::vector<int> live_vars() const {
    std::vector<int> ids;
    for (const auto& s : scopes_) {
      for (const auto& [name, id] : s) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  std::vector<std::string> snapshot() const {
    std::vector<std::string> env;
    for (const Var& v : vars_) env.push_back(v.value);
    return env;
  }

  void restore(const std::vector<std::string>& env) {
    for (std::size_t i = 0; i < env.size() && i < vars_.size(); ++i) vars_[i].value = env[i];
  }

  // --- statements -----------------------------------------------------------

  void lower_stmts(const std::vector<Stmt>& stmts) {
    scopes_.emplace_back();
    for (const Stmt& s : stmts) {
      if (terminated()) start_block(names_.label("dead"));
      lower_stmt(s);
    }
    scopes_.pop_back();
  }

  void lower_stmt(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::kDecl:
        declare_var(s.name, lower_expr(s.exprs[0], s.name));
        break;
      case Stmt::Kind::kAssign: {
        std::string v = lower_expr(s.exprs[0], s.name);
        vars_[var_id(s.name)].value = v;
        break;
      }
      case Stmt::Kind::kFieldStore: {
        std::string addr = field_address(s.exprs[0], s.name);
        std::string v = lower_expr(s.exprs[1], "");
        emit(make(Opcode::kStore, Type::kVoid, {v, addr}), "");
        break;
      }
      case Stmt::Kind::kExpr:
        lower_expr(s.exprs[0], "");
        break;
      case Stmt::Kind::kIf:
        lower_if(s);
        break;
      case Stmt::Kind::kWhile:
        lower_while(s);
        break;
      case Stmt::Kind::kReturn:
        if (s.exprs.empty()) {
          emit_return(std::nullopt);
        } else {
          emit_return(lower_expr(s.exprs[0], ""));
        }
        break;
      case Stmt::Kind::kDelete: {
        std::string obj = lower_expr(s.exprs[0], "");
        if (const ClassDecl* owner = p_.dtor_owner(s.exprs[0].type.pointee)) {
          call_direct(dtor_symbol(owner->name), Type::kVoid, {obj}, "");
        }
        ml_need_free();
        call_direct(kFreeBuiltin, Type::kVoid, {obj}, "");
        break;
      }
    }
  }

  // Branches to `t` when `c` holds. !=, <= and >= swap the targets.
  void lower_cond(const Cond& c, const std::string& t, const std::string& f) {
    std::string a = lower_expr(c.lhs, "");
    std::string b = lower_expr(c.rhs, "");
    bool ptrs = c.lhs.type.is_pointer();
    Instruction cmp;
    bool swap = false;
    switch (c.op) {
      case Cond::Op::kEq:
      case Cond::Op::kNe:
        if (ptrs) {
          a = strip(a, "s");
          b = strip(b, "s");
        }
        cmp = make(Opcode::kICmpEq, Type::kBool, {a, b});
        swap = c.op == Cond::Op::kNe;
        break;
      case Cond::Op::kLt:
        cmp = make(Opcode::kICmpSlt, Type::kBool, {a, b});
        break;
      case Cond::Op::kGt:
        cmp = make(Opcode::kICmpSlt, Type::kBool, {b, a});
        break;
      case Cond::Op::kLe:
        cmp = make(Opcode::kICmpSlt, Type::kBool, {b, a});
        swap = true;
        break;
      case Cond::Op::kGe:
        cmp = make(Opcode::kICmpSlt, Type::kBool, {a, b});
        swap = true;
        break;
    }
    std::string cv = emit(std::move(cmp), "cmp");
    Instruction br = make(Opcode::kCondBr, Type::kVoid, {cv});
    br.labels = swap ? std::vector<std::string>{f, t} : std::vector<std::string>{t, f};
    emit(std::move(br), "");
  }

  struct Arm {
    bool reachable = false;
    std::string label;
    std::vector<std::string> env;
  };

  void lower_if(const Stmt& s) {
    std::size_t nvars = vars_.size();
    std::vector<std::string> before = snapshot();
    std::string then_l = names_.label("if.then");
    std::string else_l = s.else_body.empty() ? "" : names_.label("if.else");
    std::string end_l = names_.label("if.end");
    lower_cond(*s.cond, then_l, else_l.empty() ? end_l : else_l);

    std::vector<Arm> arms;
    if (else_l.empty()) arms.push_back({true, cur_label(), before});

    start_block(then_l);
    lower_stmts(s.body);
    if (!terminated()) {
      arms.push_back({true, cur_label(), snapshot()});
      branch(end_l);
    }
    restore(before);
    if (!else_l.empty()) {
      start_block(else_l);
      lower_stmts(s.else_body);
      if (!terminated()) {
        arms.push_back({true, cur_label(), snapshot()});
        branch(end_l);
      }
      restore(before);
    }

    start_block(end_l);
    vars_.resize(nvars);
    if (arms.empty()) return;
    for (std::size_t v = 0; v < nvars; ++v) {
      bool same = true;
      for (const Arm& a : arms) same = same && a.env[v] == arms[0].env[v];
      if (same) {
        vars_[v].value = arms[0].env[v];
        continue;
      }
      Instruction phi = make(Opcode::kPhi, value_type(arms[0].env[v]));
      for (const Arm& a : arms) {
        phi.operands.push_back(a.env[v]);
        phi.labels.push_back(a.label);
      }
      vars_[v].value = emit(std::move(phi), vars_[v].name);
    }
  }

  void lower_while(const Stmt& s) {
    std::size_t nvars = vars_.size();
    std::string cond_l = names_.label("while.cond");
    std::string body_l = names_.label("while.body");
    std::string end_l = names_.label("while.end");
    std::string pre_l = cur_label();
    branch(cond_l);

    start_block(cond_l);
    int header = cur_;
    std::vector<int> live = live_vars();
    std::vector<std::size_t> phi_index;
    for (int v : live) {
      Instruction phi = make(Opcode::kPhi, value_type(vars_[v].value));
      phi.operands.push_back(vars_[v].value);
      phi.labels.push_back(pre_l);
      phi_index.push_back(f_.blocks[header].insts.size());
      vars_[v].value = emit(std::move(phi), vars_[v].name);
    }
    std::vector<std::string> at_header = snapshot();
    lower_cond(*s.cond, body_l, end_l);

    start_block(body_l);
    lower_stmts(s.body);
    if (!terminated()) {
      std::string latch = cur_label();
      for (std::size_t k = 0; k < live.size(); ++k) {
        Instruction& phi = f_.blocks[header].insts[phi_index[k]];
        phi.operands.push_back(vars_[live[k]].value);
        phi.labels.push_back(latch);
      }
      branch(cond_l);
    }
    restore(at_header);
    vars_.resize(nvars);
    start_block(end_l);
  }

  Type value_type(const std::string& v) const {
    for (const Param& p : f_.params) {
      if (p.name == v) return p.type;
    }
    for (const BasicBlock& bb : f_.blocks) {
      for (const Instruction& i : bb.insts) {
        if (i.result == v) return i.type;
      }
    }
    return Type::kInt;
  }

  // --- expressions ----------------------------------------------------------

  std::string field_address(const Expr& obj, const std::string& field) {
    std::string base = lower_expr(obj, "");
    const ClassDecl* c = p_.find_class(obj.type.pointee);
    std::int64_t off = c->field_offsets.at(field);
    std::string addr_base = strip(base, "s");
    Instruction fa = make(Opcode::kFieldAddr, Type::kPtr, {addr_base});
    fa.imm = off;
    return emit(std::move(fa), field + ".addr");
  }

  std::string construct(const std::string& cls, const std::string& obj) {
    const ClassDecl* c = p_.find_class(cls);
    call_direct(ctor_symbol(cls), Type::kVoid, {obj}, "");
    bool outline = c->ctor && !c->ctor->defined;
    if (outline && c->dynamic && opts_.strict_vtable_pointers) {
      Instruction ld = make(Opcode::kLoad, Type::kPtr, {obj});
      ld.md.invariant_group = true;
      std::string vptr = emit(std::move(ld), "vptr");
      std::string vt = global_ref(vtable_symbol(cls), "vtable");
      std::string ok = emit(make(Opcode::kICmpEq, Type::kBool, {vptr, vt}), "vtable.ok");
      emit(make(Opcode::kAssume, Type::kVoid, {ok}), "");
    }
    return obj;
  }

  std::string lower_expr(const Expr& e, std::string_view hint) {
    std::string h = hint.empty() ? "" : std::string(hint);
    auto name_or = [&](std::string_view fallback) {
      return h.empty() ? std::string(fallback) : h;
    };
    switch (e.kind) {
      case Expr::Kind::kInt: {
        Instruction i = make(Opcode::kConstInt, Type::kInt);
        i.imm = e.value;
        return emit(std::move(i), name_or("c"));
      }
      case Expr::Kind::kNull:
        return emit(make(Opcode::kConstNull, Type::kPtr), name_or("null"));
      case Expr::Kind::kVar:
        return vars_[var_id(e.name)].value;
      case Expr::Kind::kThis:
        return "this";
      case Expr::Kind::kNew: {
        Instruction a = make(Opcode::kAlloc, Type::kPtr);
        if (const ClassDecl* c = p_.find_class(e.name)) {
          a.imm = c->size;
          return construct(e.name, emit(std::move(a), name_or("obj")));
        }
        a.imm = p_.find_union(e.name)->size;
        return emit(std::move(a), name_or("obj"));
      }
      case Expr::Kind::kPlacementNew: {
        std::string storage = lower_expr(e.args[0], "");
        return construct(e.name, launder(storage, name_or("obj")));
      }
      case Expr::Kind::kLaunder:
        return launder(lower_expr(e.args[0], ""), name_or("l"));
      case Expr::Kind::kPtrToInt: {
        std::string s = strip(lower_expr(e.args[0], ""), "s");
        return emit(make(Opcode::kPtrToInt, Type::kInt, {s}), name_or("i"));
      }
      case Expr::Kind::kIntToPtr: {
        std::string v = lower_expr(e.args[0], "");
        std::string p = emit(make(Opcode::kIntToPtr, Type::kPtr, {v}),
                             opts_.strict_vtable_pointers ? "p" : name_or("p"));
        return launder(p, name_or("p"));
      }
      case Expr::Kind::kAs:
        return launder(lower_expr(e.args[0], ""), name_or(e.name + ".view"));
      case Expr::Kind::kField: {
        std::string addr = field_address(e.args[0], e.name);
        return emit(make(Opcode::kLoad, Type::kInt, {addr}), name_or(e.name));
      }
      case Expr::Kind::kCall: {
        std::vector<std::string> args;
        for (const Expr& a : e.args) args.push_back(lower_expr(a, ""));
        return call_direct(e.name, ir_type(e.type), std::move(args), name_or("call"));
      }
      case Expr::Kind::kMethodCall:
        return lower_method_call(e, name_or("call"));
      case Expr::Kind::kPrint: {
        std::string v = lower_expr(e.args[0], "");
        ml_need_print();
        call_direct(kPrintBuiltin, Type::kVoid, {v}, "");
        return "";
      }
      case Expr::Kind::kBinary: {
        std::string a = lower_expr(e.args[0], "");
        std::string b = lower_expr(e.args[1], "");
        Opcode op = e.op == '+' ? Opcode::kAdd : e.op == '-' ? Opcode::kSub : Opcode::kMul;
        return emit(make(op, Type::kInt, {a, b}), name_or(e.op == '+'   ? "add"
                                                           : e.op == '-' ? "sub"
                                                                         : "mul"));
      }
      case Expr::Kind::kNeg: {
        std::string zero = const_int(0);
        std::string v = lower_expr(e.args[0], "");
        return emit(make(Opcode::kSub, Type::kInt, {zero, v}), name_or("neg"));
      }
    }
    return "";
  }

  std::string lower_method_call(const Expr& e, const std::string& hint) {
    std::string obj = lower_expr(e.args[0], "");
    std::vector<std::string> args = {obj};
    for (std::size_t i = 1; i < e.args.size(); ++i) args.push_back(lower_expr(e.args[i], ""));
    const std::string& cls = e.args[0].type.pointee;
    const ClassDecl* owner = nullptr;
    const MethodDecl* m = p_.find_method(cls, e.name, &owner);
    Type ret = ir_type(m->ret);
    if (!m->is_virtual) {
      return call_direct(method_symbol(owner->name, m->name), ret, std::move(args), hint);
    }
    const ClassDecl* c = p_.find_class(cls);
    std::int64_t slot = 0;
    for (std::size_t k = 0; k < c->vtable.size(); ++k) {
      if (c->vtable[k].method == e.name) slot = static_cast<std::int64_t>(k);
    }
    Instruction vl = make(Opcode::kLoad, Type::kPtr, {obj});
    vl.md.invariant_group = opts_.strict_vtable_pointers;
    std::string vptr = emit(std::move(vl), "vptr");
    Instruction fa = make(Opcode::kFieldAddr, Type::kPtr, {vptr});
    fa.imm = slot * kSlotSize;
    std::string slot_addr = emit(std::move(fa), "slot");
    Instruction fl = make(Opcode::kLoad, Type::kPtr, {slot_addr});
    fl.md.invariant_load = opts_.strict_vtable_pointers;
    std::string fn = emit(std::move(fl), "fn");
    args.insert(args.begin(), fn);
    Instruction call = make(Opcode::kCallIndirect, ret, std::move(args));
    return emit(std::move(call), ret == Type::kVoid ? std::string_view() : hint);
  }

  void ml_need_print();
  void ml_need_free();

  ModuleLowering& ml_;
  const SourceProgram& p_;
  const LoweringOptions& opts_;
  const ClassDecl* cls_;
  Function f_;
  NameAllocator names_{Function{}};
  int cur_ = 0;
  std::vector<std::map<std::string, int, std::less<>>> scopes_;
  std::vector<Var> vars_;
  TypeRef ret_type_;
  std::string base_dtor_;
};

class ModuleLowering {
 public:
  ModuleLowering(const SourceProgram& p, const LoweringOptions& opts) : p_(p), opts_(opts) {}

  Module run() {
    validate();
    m_.name = opts_.module_name;
    m_.vtables = emit_vtables(p_, opts_);
    for (const ClassDecl& c : p_.classes) lower_class(c);
    for (const FunctionDecl& x : p_.externals) {
      Declaration d;
      d.name = x.name;
      d.ret = ir_type(x.ret);
      for (const ParamDecl& pd : x.params) d.params.push_back({pd.name, ir_type(pd.type), {}});
      m_.declarations.push_back(std::move(d));
    }
    for (const FunctionDecl& fd : p_.functions) {
      m_.functions.push_back(FunctionLowering(*this, p_, opts_, nullptr).lower_free(fd));
    }
    if (need_print_) {
      m_.declarations.push_back({kPrintBuiltin, Type::kVoid, {{"v", Type::kInt, {}}}, {}});
    }
    if (need_free_) {
      m_.declarations.push_back({kFreeBuiltin, Type::kVoid, {{"p", Type::kPtr, {}}}, {}});
    }
    return std::move(m_);
  }

  void need_print() { need_print_ = true; }
  void need_free() { need_free_ = true; }

 private:
  void validate() const {
    for (const ClassDecl& c : p_.classes) {
      if (c.size <= 0) throw Error("lowering: class '" + c.name + "' is unresolved");
    }
    for (const UnionDecl& u : p_.unions) {
      if (u.size <= 0) throw Error("lowering: union '" + u.name + "' is unresolved");
    }
  }

  Declaration this_decl(const ClassDecl& c, const std::string& name, Type ret,
                        const std::vector<ParamDecl>& params) const {
    Declaration d;
    d.name = name;
    d.ret = ret;
    Param self{"this", Type::kPtr, {}};
    self.attrs.nonnull = true;
    self.attrs.dereferenceable_bytes = static_cast<std::uint64_t>(c.size);
    d.params.push_back(self);
    for (const ParamDecl& pd : params) d.params.push_back({pd.name, ir_type(pd.type), {}});
    return d;
  }

  void lower_class(const ClassDecl& c) {
    if (c.ctor && !c.ctor->defined) {
      m_.declarations.push_back(this_decl(c, ctor_symbol(c.name), Type::kVoid, {}));
    } else {
      m_.functions.push_back(
          FunctionLowering(*this, p_, opts_, &c).lower_ctor(c.ctor ? &*c.ctor : nullptr));
    }
    if (p_.dtor_owner(c.name)) {
      if (c.dtor && !c.dtor->defined) {
        m_.declarations.push_back(this_decl(c, dtor_symbol(c.name), Type::kVoid, {}));
      } else {
        m_.functions.push_back(
            FunctionLowering(*this, p_, opts_, &c).lower_dtor(c.dtor ? &*c.dtor : nullptr));
      }
    }
    for (const MethodDecl& md : c.methods) {
      if (md.defined) {
        m_.functions.push_back(FunctionLowering(*this, p_, opts_, &c).lower_method(md));
      } else {
        m_.declarations.push_back(
            this_decl(c, method_symbol(c.name, md.name), ir_type(md.ret), md.params));
      }
    }
  }

  const SourceProgram& p_;
  const LoweringOptions& opts_;
  Module m_;
  bool need_print_ = false;
  bool need_free_ = false;
};

void FunctionLowering::ml_need_print() { ml_.need_print(); }
void FunctionLowering::ml_need_free() { ml_.need_free(); }

bool is_vtable_pointer(const Instruction* def) {
  if (!def) return false;
  if (def->op == Opcode::kGlobalRef) return true;
  return def->op == Opcode::kLoad && def->md.invariant_group;
}

}  // namespace

Module lower_to_ir(const SourceProgram& p, const LoweringOptions& opts) {
  return ModuleLowering(p, opts).run();
}

std::vector<Diagnostic> check_strip_discipline(const Module& m) {
  std::vector<Diagnostic> out;
  for (const Function& f : m.functions) {
    auto defs = definition_map(f);
    auto types = value_types(f);
    auto def_of = [&](const std::string& v) -> const Instruction* {
      auto it = defs.find(v);
      if (it == defs.end() || it->second.block < 0) return nullptr;
      return &f.blocks[it->second.block].insts[it->second.index];
    };
    for (const BasicBlock& bb : f.blocks) {
      for (std::size_t i = 0; i < bb.insts.size(); ++i) {
        const Instruction& inst = bb.insts[i];
        if (inst.op != Opcode::kICmpEq && inst.op != Opcode::kPtrToInt) continue;
        bool vtable_cmp = inst.op == Opcode::kICmpEq &&
                          std::all_of(inst.operands.begin(), inst.operands.end(),
                                      [&](const std::string& v) {
                                        return is_vtable_pointer(def_of(v));
                                      });
        if (vtable_cmp) continue;
        for (const std::string& v : inst.operands) {
          auto t = types.find(v);
          if (t == types.end() || t->second != Type::kPtr) continue;
          const Instruction* d = def_of(v);
          if (d && d->op == Opcode::kStrip) continue;
          out.push_back({f.name, bb.label, static_cast<int>(i), "strip-discipline",
                         "pointer operand %" + v + " of " +
                             std::string(opcode_name(inst.op)) + " is not stripped"});
        }
      }
    }
  }
  return out;
}

}  // namespace invar::moo
