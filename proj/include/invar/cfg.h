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

#ifndef INVAR_CFG_H_
#define INVAR_CFG_H_

#include <vector>

#include "invar/ir.h"

namespace invar {

// Successor/predecessor lists by block index. Branches to unknown labels are
// ignored.
struct Cfg {
  std::vector<std::vector<int>> succs;
  std::vector<std::vector<int>> preds;

  explicit Cfg(const Function& f);
};

// Dominator tree over the blocks reachable from the entry block
// (Cooper/Harvey/Kennedy iterative algorithm).
class DominatorTree {
 public:
  explicit DominatorTree(const Function& f);

  bool reachable(int block) const { return idom_[block] != -1 || block == 0; }
  int idom(int block) const { return idom_[block]; }
  // Block-level dominance; unreachable blocks dominate nothing and are
  // dominated by everything.
  bool dominates(int a, int b) const;
  // Instruction-level dominance: `a` executes before `b` on every path.
  bool dominates(InstRef a, InstRef b) const;
  const std::vector<int>& children(int block) const { return children_[block]; }
  // Reachable blocks in dominator-tree preorder.
  const std::vector<int>& preorder() const { return preorder_; }
  const Cfg& cfg() const { return cfg_; }

 private:
  Cfg cfg_;
  std::vector<int> idom_;
  std::vector<int> depth_;
  std::vector<std::vector<int>> children_;
  std::vector<int> preorder_;
};

struct Loop {
  int header = -1;
  std::vector<int> latches;
  std::vector<int> blocks;  // sorted, includes header

  bool contains(int block) const;
};

// Natural loops keyed by header; loops sharing a header are merged.
std::vector<Loop> find_natural_loops(const Function& f,
                                     const DominatorTree& dt);

}  // namespace invar

#endif  // INVAR_CFG_H_
