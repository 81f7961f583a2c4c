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

#include "invar/cfg.h"

#include <algorithm>
#include <map>

namespace invar {

Cfg::Cfg(const Function& f)
    : succs(f.blocks.size()), preds(f.blocks.size()) {
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    const auto& insts = f.blocks[b].insts;
    if (insts.empty() || !is_terminator(insts.back().op)) continue;
    for (const std::string& l : insts.back().labels) {
      int s = f.block_index(l);
      if (s < 0) continue;
      if (std::find(succs[b].begin(), succs[b].end(), s) != succs[b].end()) {
        continue;
      }
      succs[b].push_back(s);
      preds[s].push_back(static_cast<int>(b));
    }
  }
}

DominatorTree::DominatorTree(const Function& f) : cfg_(f) {
  const int n = static_cast<int>(f.blocks.size());
  idom_.assign(n, -1);
  depth_.assign(n, 0);
  children_.assign(n, {});
  if (n == 0) return;

  // Reverse postorder from the entry.
  std::vector<int> postorder;
  std::vector<int> state(n, 0);
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  state[0] = 1;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    if (next < cfg_.succs[b].size()) {
      int s = cfg_.succs[b][next++];
      if (state[s] == 0) {
        state[s] = 1;
        stack.push_back({s, 0});
      }
    } else {
      postorder.push_back(b);
      stack.pop_back();
    }
  }
  std::vector<int> rpo_index(n, -1);
  std::vector<int> rpo(postorder.rbegin(), postorder.rend());
  for (std::size_t i = 0; i < rpo.size(); ++i) rpo_index[rpo[i]] = static_cast<int>(i);

  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (rpo_index[a] > rpo_index[b]) a = idom_[a];
      while (rpo_index[b] > rpo_index[a]) b = idom_[b];
    }
    return a;
  };

  idom_[0] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 1; i < rpo.size(); ++i) {
      int b = rpo[i];
      int new_idom = -1;
      for (int p : cfg_.preds[b]) {
        if (rpo_index[p] < 0 || idom_[p] == -1) continue;
        new_idom = new_idom == -1 ? p : intersect(p, new_idom);
      }
      if (new_idom != -1 && idom_[b] != new_idom) {
        idom_[b] = new_idom;
        changed = true;
      }
    }
  }
  idom_[0] = -1;

  for (int b : rpo) {
    if (b != 0 && idom_[b] != -1) children_[idom_[b]].push_back(b);
  }
  for (auto& c : children_) std::sort(c.begin(), c.end());
  std::vector<int> work{0};
  while (!work.empty()) {
    int b = work.back();
    work.pop_back();
    preorder_.push_back(b);
    for (auto it = children_[b].rbegin(); it != children_[b].rend(); ++it) {
      depth_[*it] = depth_[b] + 1;
      work.push_back(*it);
    }
  }
}

bool DominatorTree::dominates(int a, int b) const {
  if (!reachable(b)) return true;
  if (!reachable(a)) return false;
  while (depth_[b] > depth_[a]) b = idom_[b];
  return a == b;
}

bool DominatorTree::dominates(InstRef a, InstRef b) const {
  // Parameters dominate everything.
  if (a.block < 0) return true;
  if (b.block < 0) return false;
  if (a.block == b.block) return a.index < b.index;
  return dominates(a.block, b.block);
}

bool Loop::contains(int block) const {
  return std::binary_search(blocks.begin(), blocks.end(), block);
}

std::vector<Loop> find_natural_loops(const Function& f,
                                     const DominatorTree& dt) {
  (void)f;
  const Cfg& cfg = dt.cfg();
  std::map<int, Loop> by_header;
  for (std::size_t t = 0; t < cfg.succs.size(); ++t) {
    if (!dt.reachable(static_cast<int>(t))) continue;
    for (int h : cfg.succs[t]) {
      if (!dt.dominates(h, static_cast<int>(t))) continue;
      Loop& loop = by_header[h];
      loop.header = h;
      loop.latches.push_back(static_cast<int>(t));
      std::vector<int> work{static_cast<int>(t)};
      std::vector<int> body{h};
      while (!work.empty()) {
        int b = work.back();
        work.pop_back();
        if (std::find(body.begin(), body.end(), b) != body.end()) continue;
        body.push_back(b);
        for (int p : cfg.preds[b]) {
          if (dt.reachable(p)) work.push_back(p);
        }
      }
      loop.blocks.insert(loop.blocks.end(), body.begin(), body.end());
      std::sort(loop.blocks.begin(), loop.blocks.end());
      loop.blocks.erase(std::unique(loop.blocks.begin(), loop.blocks.end()),
                        loop.blocks.end());
    }
  }
  std::vector<Loop> loops;
  for (auto& [h, loop] : by_header) loops.push_back(std::move(loop));
  return loops;
}

}  // namespace invar
