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

// Random MiniOO programs for differential testing.

#ifndef INVAR_FUZZ_H_
#define INVAR_FUZZ_H_

#include <cstdint>
#include <string>
#include <vector>

namespace invar {

struct FuzzOptions {
  int min_statements = 6;
  int max_statements = 14;
  // One program in `stale_use_period` deliberately calls through a pointer
  // whose object was replaced. 0 disables.
  int stale_use_period = 8;
};

// Deterministic in (seed, count, options). Program k of a batch depends
// only on (seed, k).
std::vector<std::string> enumerate_fuzz_programs(std::uint64_t seed, int count,
                                                 const FuzzOptions& opts = {});

std::string generate_fuzz_program(std::uint64_t seed, std::uint64_t index,
                                  const FuzzOptions& opts = {});

}  // namespace invar

#endif  // INVAR_FUZZ_H_
