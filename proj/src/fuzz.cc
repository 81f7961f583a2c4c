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

#include "invar/fuzz.h"

#include <random>
#include <sstream>

namespace invar {

namespace {

struct ClassShape {
  std::string name;
  int base = -1;
  int size = 8;
  bool extra_field = false;
  bool overrides_f = true;
  bool overrides_g = false;
  bool g_external = false;
  bool has_ctor = false;
  bool ctor_external = false;
  bool has_dtor = false;
};

struct Storage {
  int size = 0;
  int cls = -1;  // dynamic class; -1 while unconstructed
  bool is_union = false;
  std::string union_var;
};

struct PtrVar {
  std::string name;
  int storage = 0;
  bool valid = false;
};

class Generator {
 public:
  Generator(std::uint64_t seed, std::uint64_t index, const FuzzOptions& opts)
      : rng_(seed * 0x9E3779B97F4A7C15ULL + index), opts_(opts) {
    stale_use_ = opts.stale_use_period > 0 &&
                 (index % static_cast<std::uint64_t>(opts.stale_use_period)) ==
                     static_cast<std::uint64_t>(opts.stale_use_period) - 1;
  }

  std::string run() {
    make_classes();
    emit_classes();
    emit_helpers();
    os_ << "void main() {\n";
    int n = opts_.min_statements + pick(opts_.max_statements - opts_.min_statements + 1);
    for (int k = 0; k < n; ++k) statement();
    if (stale_use_) stale_call();
    finish();
    os_ << "}\n";
    return os_.str();
  }

 private:
  int pick(int n) { return n <= 1 ? 0 : static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool coin(int percent) { return pick(100) < percent; }
  std::string fresh(const char* prefix) { return prefix + std::to_string(counter_++); }

  void make_classes() {
    int n = 2 + pick(2);
    for (int k = 0; k < n; ++k) {
      ClassShape c;
      c.name = std::string(1, static_cast<char>('A' + k));
      if (k > 0) c.base = pick(k);
      c.extra_field = k == 0 || coin(50);
      int base_size = c.base < 0 ? 8 : classes_[c.base].size;
      c.size = base_size + (c.extra_field ? 8 : 0);
      c.overrides_f = k == 0 || coin(75);
      c.overrides_g = k == 0 || coin(40);
      c.g_external = k > 0 && c.overrides_g && coin(15);
      c.has_ctor = coin(60);
      c.ctor_external = c.has_ctor && coin(20);
      c.has_dtor = k == 0 && coin(40);
      classes_.push_back(c);
    }
  }

  std::string field_of(int k) const { return "f" + classes_[k].name; }

  void emit_classes() {
    for (int k = 0; k < static_cast<int>(classes_.size()); ++k) {
      const ClassShape& c = classes_[k];
      os_ << "class " << c.name;
      if (c.base >= 0) os_ << " : " << classes_[c.base].name;
      os_ << " {\n";
      if (c.extra_field) os_ << "  int " << field_of(k) << ";\n";
      if (c.has_ctor) {
        if (c.ctor_external) {
          os_ << "  ctor();\n";
        } else if (c.extra_field) {
          os_ << "  ctor() { this->" << field_of(k) << " = " << pick(50) << "; }\n";
        } else if (coin(50)) {
          os_ << "  ctor() { print(" << 900 + k << "); }\n";
        } else {
          os_ << "  ctor() { print(this->f()); }\n";
        }
      }
      if (c.has_dtor) os_ << "  dtor() { print(" << 800 + k << "); }\n";
      if (c.overrides_f) {
        os_ << "  virtual int f() { print(" << 100 * (k + 1) + 1 << "); return this->fA + "
            << pick(20) << "; }\n";
      }
      if (c.overrides_g) {
        if (c.g_external) {
          os_ << "  virtual void g();\n";
        } else if (k > 0 && coin(50)) {
          os_ << "  virtual void g() { print(this->f() + " << 100 * (k + 1) + 2 << "); }\n";
        } else {
          os_ << "  virtual void g() { print(" << 100 * (k + 1) + 2 << "); }\n";
        }
      }
      os_ << "}\n";
    }
    if (coin(50)) {
      with_union_ = true;
      int a = pick(static_cast<int>(classes_.size()));
      int b = (a + 1 + pick(static_cast<int>(classes_.size()) - 1)) %
              static_cast<int>(classes_.size());
      union_alts_ = {a, b};
      union_size_ = std::max(classes_[a].size, classes_[b].size);
      os_ << "union U { " << classes_[a].name << "; " << classes_[b].name << "; }\n";
    }
  }

  void emit_helpers() {
    os_ << "extern void ext(A* p);\n";
    os_ << "int use(A* p) { return p->f() + " << pick(10) << "; }\n";
    os_ << "void twice(A* p) {\n  p->g();\n  if (p->fA < " << pick(40) << ") {\n"
        << "    p->g();\n  }\n}\n";
  }

  // Index into vars_ of a pointer that may be used for virtual calls.
  int valid_var() {
    std::vector<int> ok;
    for (int k = 0; k < static_cast<int>(vars_.size()); ++k) {
      if (vars_[k].valid) ok.push_back(k);
    }
    if (ok.empty()) return -1;
    return ok[pick(static_cast<int>(ok.size()))];
  }

  int any_var() {
    if (vars_.empty()) return -1;
    return pick(static_cast<int>(vars_.size()));
  }

  int pick_class(int max_size) {
    std::vector<int> ok;
    for (int k = 0; k < static_cast<int>(classes_.size()); ++k) {
      if (classes_[k].size <= max_size) ok.push_back(k);
    }
    return ok[pick(static_cast<int>(ok.size()))];
  }

  void indent() { os_ << std::string(static_cast<std::size_t>(depth_ * 2 + 2), ' '); }

  void new_object() {
    int k = pick_class(1 << 20);
    Storage s;
    s.size = classes_[k].size;
    s.cls = k;
    storages_.push_back(s);
    PtrVar v{fresh("p"), static_cast<int>(storages_.size()) - 1, true};
    indent();
    os_ << "A* " << v.name << " = new " << classes_[k].name << ";\n";
    vars_.push_back(v);
  }

  void new_union() {
    Storage s;
    s.size = union_size_;
    s.is_union = true;
    s.union_var = fresh("u");
    storages_.push_back(s);
    indent();
    os_ << "U* " << s.union_var << " = new U;\n";
  }

  // Constructs a new object over existing storage; returns the new var.
  // With `change_type`, the new object's class differs from the old one
  // whenever the storage admits another class.
  int placement(int storage, const std::string& where, bool change_type = false) {
    Storage& s = storages_[storage];
    int k;
    int tries = change_type ? 8 : 1;
    do {
      k = s.is_union ? union_alts_[pick(2)] : pick_class(s.size);
    } while (--tries > 0 && k == s.cls);
    s.cls = k;
    for (PtrVar& v : vars_) {
      if (v.storage == storage) v.valid = false;
    }
    PtrVar v{fresh("q"), storage, true};
    indent();
    os_ << "A* " << v.name << " = new(" << where << ") " << classes_[k].name << ";\n";
    vars_.push_back(v);
    return static_cast<int>(vars_.size()) - 1;
  }

  std::string call_expr(const std::string& p) {
    switch (pick(4)) {
      case 0:
        return "print(" + p + "->f())";
      case 1:
        return p + "->g()";
      case 2:
        return "print(use(" + p + "))";
      default:
        return "twice(" + p + ")";
    }
  }

  void statement() {
    if (vars_.empty() && !with_union_) {
      new_object();
      return;
    }
    int v = valid_var();
    switch (pick(16)) {
      case 0:
      case 1:
        new_object();
        return;
      case 2:
      case 3:
        if (v < 0) break;
        indent();
        os_ << call_expr(vars_[v].name) << ";\n";
        return;
      case 4: {
        int a = any_var();
        if (a < 0) break;
        indent();
        if (coin(50)) {
          os_ << vars_[a].name << "->fA = " << pick(100) << ";\n";
        } else {
          os_ << "print(" << vars_[a].name << "->fA);\n";
        }
        return;
      }
      case 5: {
        int a = any_var();
        if (a < 0) break;
        placement(vars_[a].storage, vars_[a].name);
        return;
      }
      case 6: {
        int a = any_var();
        if (a < 0 || storages_[vars_[a].storage].cls < 0) break;
        PtrVar r{fresh("r"), vars_[a].storage, true};
        indent();
        os_ << "A* " << r.name << " = launder(" << vars_[a].name << ");\n";
        vars_.push_back(r);
        return;
      }
      case 7: {
        int a = any_var();
        int b = any_var();
        if (a < 0) break;
        std::string rhs = coin(50) ? vars_[b].name : "launder(" + vars_[a].name + ")";
        if (coin(20)) rhs = "null";
        indent();
        os_ << "if (" << vars_[a].name << (coin(70) ? " == " : " != ") << rhs << ") {\n";
        ++depth_;
        indent();
        os_ << "print(" << pick(10) << ");\n";
        if (v >= 0 && coin(50)) {
          indent();
          os_ << call_expr(vars_[v].name) << ";\n";
        }
        --depth_;
        indent();
        os_ << "} else {\n";
        ++depth_;
        indent();
        os_ << "print(" << 10 + pick(10) << ");\n";
        --depth_;
        indent();
        os_ << "}\n";
        return;
      }
      case 8: {
        // Replace the object, then compare the old and new pointers and
        // call through the new one when they are equal.
        int a = any_var();
        if (a < 0) break;
        std::string old = vars_[a].name;
        int q = placement(vars_[a].storage, old);
        indent();
        os_ << "if (" << old << " == " << vars_[q].name << ") {\n";
        ++depth_;
        indent();
        os_ << call_expr(vars_[q].name) << ";\n";
        --depth_;
        indent();
        os_ << "}\n";
        return;
      }
      case 9: {
        int a = any_var();
        if (a < 0 || storages_[vars_[a].storage].cls < 0) break;
        std::string i = fresh("i");
        PtrVar s{fresh("s"), vars_[a].storage, true};
        indent();
        os_ << "int " << i << " = ptr2int(" << vars_[a].name << ");\n";
        indent();
        os_ << "A* " << s.name << " = int2ptr<A>(" << i << ");\n";
        vars_.push_back(s);
        return;
      }
      case 10:
        if (v < 0) break;
        indent();
        os_ << "ext(" << vars_[v].name << ");\n";
        return;
      case 11: {
        if (v < 0) break;
        std::string i = fresh("i");
        std::string acc = fresh("t");
        indent();
        os_ << "int " << i << " = 0;\n";
        indent();
        os_ << "int " << acc << " = 0;\n";
        indent();
        os_ << "while (" << i << " < " << 1 + pick(5) << ") {\n";
        ++depth_;
        indent();
        os_ << acc << " = " << acc << " + " << vars_[v].name << "->f();\n";
        if (coin(30)) {
          indent();
          os_ << vars_[v].name << "->g();\n";
        }
        indent();
        os_ << i << " = " << i << " + 1;\n";
        --depth_;
        indent();
        os_ << "}\n";
        indent();
        os_ << "print(" << acc << ");\n";
        return;
      }
      case 12: {
        if (v < 0) break;
        std::string k = fresh("k");
        indent();
        os_ << "int " << k << " = " << vars_[v].name << "->f() * " << pick(5) << " - "
            << pick(7) << ";\n";
        indent();
        os_ << "print(" << k << ");\n";
        return;
      }
      case 13:
        if (!with_union_) break;
        {
          int u = -1;
          for (int s = 0; s < static_cast<int>(storages_.size()); ++s) {
            if (storages_[s].is_union) u = s;
          }
          if (u < 0 || coin(30)) {
            new_union();
            u = static_cast<int>(storages_.size()) - 1;
          }
          placement(u, storages_[u].union_var);
          const Storage& s = storages_[u];
          indent();
          os_ << call_expr("(" + s.union_var + " as " + classes_[s.cls].name + ")") << ";\n";
        }
        return;
      case 14: {
        if (v < 0) break;
        indent();
        os_ << "if (" << vars_[v].name << "->fA < " << pick(60) << ") {\n";
        ++depth_;
        indent();
        os_ << call_expr(vars_[v].name) << ";\n";
        --depth_;
        indent();
        os_ << "} else {\n";
        ++depth_;
        indent();
        os_ << vars_[v].name << "->fA = " << pick(60) << ";\n";
        --depth_;
        indent();
        os_ << "}\n";
        return;
      }
      default:
        if (v < 0) break;
        indent();
        os_ << "if (" << vars_[v].name << " == launder(" << vars_[v].name << ")) {\n";
        ++depth_;
        indent();
        os_ << call_expr(vars_[v].name) << ";\n";
        --depth_;
        indent();
        os_ << "}\n";
        return;
    }
    new_object();
  }

  void stale_call() {
    int a = any_var();
    if (a < 0) {
      new_object();
      a = 0;
    }
    std::string old = vars_[a].name;
    placement(vars_[a].storage, old, true);
    indent();
    os_ << "print(" << old << "->f());\n";
  }

  void finish() {
    for (int s = 0; s < static_cast<int>(storages_.size()); ++s) {
      if (!coin(50)) continue;
      if (storages_[s].is_union) continue;
      std::string target;
      for (const PtrVar& v : vars_) {
        if (v.storage == s && v.valid) target = v.name;
      }
      if (target.empty()) {
        for (const PtrVar& v : vars_) {
          if (v.storage == s) target = "launder(" + v.name + ")";
        }
      }
      indent();
      os_ << "delete " << target << ";\n";
    }
  }

  std::mt19937_64 rng_;
  FuzzOptions opts_;
  bool stale_use_ = false;
  std::ostringstream os_;
  std::vector<ClassShape> classes_;
  std::vector<Storage> storages_;
  std::vector<PtrVar> vars_;
  bool with_union_ = false;
  std::vector<int> union_alts_;
  int union_size_ = 0;
  int counter_ = 0;
  int depth_ = 0;
};

}  // namespace

std::string generate_fuzz_program(std::uint64_t seed, std::uint64_t index,
                                  const FuzzOptions& opts) {
  return Generator(seed, index, opts).run();
}

std::vector<std::string> enumerate_fuzz_programs(std::uint64_t seed, int count,
                                                 const FuzzOptions& opts) {
  std::vector<std::string> out;
  for (int k = 0; k < count; ++k) {
    out.push_back(generate_fuzz_program(seed, static_cast<std::uint64_t>(k), opts));
  }
  return out;
}

}  // namespace invar
