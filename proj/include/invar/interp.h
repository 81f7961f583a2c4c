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

// Reference interpreter. Pointers are (allocation, offset, generation);
// launder mints a fresh generation, strip erases it. In checked mode every
// invariant.group load is validated against the value its generation last
// observed for that slot.

#ifndef INVAR_INTERP_H_
#define INVAR_INTERP_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "invar/diagnostic.h"
#include "invar/ir.h"

namespace invar {

inline constexpr std::int64_t kStrippedGeneration = -1;

struct RuntimeValue {
  enum class Kind { kUndef, kInt, kBool, kPtr, kFunc };
  Kind kind = Kind::kUndef;
  std::int64_t i = 0;       // kInt, kBool
  std::uint64_t alloc = 0;  // kPtr; 0 is null
  std::int64_t offset = 0;  // kPtr
  std::int64_t gen = 0;     // kPtr
  std::string symbol;       // kFunc

  static RuntimeValue Int(std::int64_t v);
  static RuntimeValue Bool(bool v);
  static RuntimeValue Null();
  static RuntimeValue Ptr(std::uint64_t alloc, std::int64_t offset, std::int64_t gen);
  static RuntimeValue Func(std::string symbol);

  // Same observable value; pointer generations are ignored.
  bool same_value(const RuntimeValue& o) const;
  // Rendering used in traces; allocation ids are omitted so that traces
  // do not depend on how many allocations an optimizer removed.
  std::string to_string() const;
};

enum class ExecMode { kChecked, kRaw };

enum class UBKind { kStaleDynamicInfo, kUseAfterFree, kOutOfBounds, kInvalidIndirectCallee };

std::string_view ub_kind_name(UBKind k);

struct UBReport {
  UBKind kind = UBKind::kStaleDynamicInfo;
  std::string location;  // @function:block:index
  std::uint64_t alloc = 0;
  std::string detail;
};

struct ExternalCall {
  std::string symbol;
  std::vector<std::string> args;

  bool operator==(const ExternalCall&) const = default;
};

struct ExecStats {
  std::uint64_t instructions = 0;
  std::uint64_t loads = 0;
  std::uint64_t invariant_group_loads = 0;
  std::uint64_t invariant_loads = 0;
  std::uint64_t stores = 0;
  std::uint64_t launders = 0;
  std::uint64_t strips = 0;
  std::uint64_t direct_calls = 0;
  std::uint64_t indirect_calls = 0;
};

struct ExecTrace {
  std::vector<std::int64_t> prints;
  std::vector<ExternalCall> external_calls;
  // Observable events in order: "print N" and "extcall @sym(args)".
  std::vector<std::string> events;
  std::vector<UBReport> ub_reports;
  ExecStats stats;

  std::string to_text() const;
};

// Hard failure of a raw-mode execution (out of bounds, use after free,
// calling a non-function).
class TrapError : public Error {
 public:
  using Error::Error;
};

// Step or recursion budget exhausted.
class LimitError : public Error {
 public:
  using Error::Error;
};

struct EvalOptions {
  std::uint64_t max_steps = 2'000'000;
  int max_depth = 256;
};

// Runs `entry` (which must take no parameters). Calls to declarations are
// external: they append to the trace and return 0/null. Builtins: @print
// records a value, @free ends an allocation's lifetime, and a declaration
// named `K.ctor` with a vtable for class K stores that vtable into the
// object's first slot.
ExecTrace eval_module(const Module& m, std::string_view entry, ExecMode mode,
                      const EvalOptions& opts = {});

}  // namespace invar

#endif  // INVAR_INTERP_H_
