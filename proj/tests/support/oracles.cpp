// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <algorithm>
#include <set>

namespace oracle {

std::optional<Dims> broadcast(const Dims& a, const Dims& b) {
  size_t rank = std::max(a.size(), b.size());
  Dims out(rank, 1);
  for (size_t i = 0; i < rank; ++i) {
    int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da == db) {
      out[i] = da;
    } else if (da == 1) {
      out[i] = db;
    } else if (db == 1) {
      out[i] = da;
    } else {
      return std::nullopt;
    }
  }
  return out;
}

std::optional<Dims> conv2d_nchw(const Dims& data, const Dims& weight, int64_t sh, int64_t sw,
                                int64_t ph, int64_t pw) {
  if (data.size() != 4 || weight.size() != 4) return std::nullopt;
  if (data[1] != weight[1]) return std::nullopt;
  int64_t oh = (data[2] - weight[2] + 2 * ph) / sh + 1;
  int64_t ow = (data[3] - weight[3] + 2 * pw) / sw + 1;
  if (oh < 1 || ow < 1) return std::nullopt;
  return Dims{data[0], weight[0], oh, ow};
}

std::optional<Dims> dense(const Dims& data, const Dims& weight) {
  if (data.size() != 2 || weight.size() != 2 || data[1] != weight[1]) return std::nullopt;
  return Dims{data[0], weight[0]};
}

Dims reduce(const Dims& in, const std::vector<int64_t>& axes, bool keepdims) {
  Dims out;
  for (size_t i = 0; i < in.size(); ++i) {
    bool hit = std::find(axes.begin(), axes.end(), static_cast<int64_t>(i)) != axes.end();
    if (hit) {
      if (keepdims) out.push_back(1);
    } else {
      out.push_back(in[i]);
    }
  }
  return out;
}

Dims transpose(const Dims& in, const std::vector<int64_t>& axes) {
  Dims out;
  for (int64_t ax : axes) out.push_back(in[ax]);
  return out;
}

Dims expand_dims(const Dims& in, int64_t axis) {
  Dims out = in;
  out.insert(out.begin() + axis, 1);
  return out;
}

std::optional<Dims> concat(const std::vector<Dims>& parts, int64_t axis) {
  Dims out = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].size() != out.size()) return std::nullopt;
    for (size_t d = 0; d < out.size(); ++d) {
      if (static_cast<int64_t>(d) == axis) continue;
      if (parts[i][d] != out[d]) return std::nullopt;
    }
    out[axis] += parts[i][axis];
  }
  return out;
}

Dims bias_add(const Dims& data) { return data; }

// ---- post-dominators by path enumeration -------------------------------------

namespace {

// Enumerates every path from `from` to the sink, intersecting the node sets
// seen along the way. A node's post-dominators are exactly the survivors.
void walk_paths(const Dag& dag, size_t at, std::vector<size_t>& path,
                std::set<size_t>* intersection, bool* first, int* paths_left) {
  if (*paths_left <= 0) return;
  std::vector<size_t> succs = dag.nodes[at].consumers;
  bool to_sink = dag.nodes[at].extern_output || succs.empty();
  if (to_sink) {
    --*paths_left;
    std::set<size_t> nodes_on_path(path.begin(), path.end());
    if (*first) {
      *intersection = nodes_on_path;
      *first = false;
    } else {
      std::set<size_t> keep;
      for (size_t n : *intersection)
        if (nodes_on_path.count(n)) keep.insert(n);
      *intersection = std::move(keep);
    }
    if (succs.empty()) return;  // no further continuation
  }
  for (size_t s : succs) {
    path.push_back(s);
    walk_paths(dag, s, path, intersection, first, paths_left);
    path.pop_back();
  }
}

// Set of post-dominators of n (excluding n itself).
std::set<size_t> postdominators(const Dag& dag, size_t n) {
  std::vector<size_t> path;
  std::set<size_t> inter;
  bool first = true;
  int budget = 1'000'000;  // DAGs in the tests are <= 12 nodes
  walk_paths(dag, n, path, &inter, &first, &budget);
  inter.erase(n);
  return inter;
}

}  // namespace

std::vector<size_t> brute_ipdom(const Dag& dag) {
  size_t n = dag.nodes.size();
  std::vector<std::set<size_t>> pdoms(n);
  for (size_t i = 0; i < n; ++i) pdoms[i] = postdominators(dag, i);
  std::vector<size_t> ipdom(n, kSink);
  for (size_t i = 0; i < n; ++i) {
    // d is the immediate post-dominator iff every other post-dominator of i
    // post-dominates d (the nearest one).
    for (size_t d : pdoms[i]) {
      bool immediate = true;
      for (size_t other : pdoms[i]) {
        if (other != d && !pdoms[d].count(other)) {
          immediate = false;
          break;
        }
      }
      if (immediate) {
        ipdom[i] = d;
        break;
      }
    }
  }
  return ipdom;
}

std::vector<size_t> brute_groups(const Dag& dag) {
  size_t n = dag.nodes.size();
  std::vector<size_t> ipdom = brute_ipdom(dag);

  // Plain union-find, written out again on purpose.
  std::vector<size_t> rep(n);
  for (size_t i = 0; i < n; ++i) rep[i] = i;
  auto find = [&](size_t x) {
    while (rep[x] != x) x = rep[x];
    return x;
  };
  std::vector<size_t> anchor(n);
  for (size_t i = 0; i < n; ++i) anchor[i] = i;

  auto nodes_between = [&](size_t src, size_t dom) {
    // Nodes reachable from src without passing through dom.
    std::set<size_t> seen;
    std::vector<size_t> work(dag.nodes[src].consumers.begin(), dag.nodes[src].consumers.end());
    while (!work.empty()) {
      size_t v = work.back();
      work.pop_back();
      if (v == dom || seen.count(v)) continue;
      seen.insert(v);
      for (size_t s : dag.nodes[v].consumers) work.push_back(s);
    }
    return seen;
  };

  for (size_t i = 0; i < n; ++i) {
    size_t dom = ipdom[i];
    if (dom == kSink) continue;
    int p = dag.nodes[i].pattern;
    if (p == 5 || p == 3) continue;  // Opaque never fuses; Reduction only anchors
    if (dag.nodes[dom].pattern == 5) continue;
    if (find(i) == find(dom)) continue;

    std::set<size_t> between = nodes_between(i, dom);
    bool ok = true;
    for (size_t mid : between)
      if (dag.nodes[mid].pattern > 2) ok = false;  // must be <= Injective
    if (!ok) continue;

    std::set<size_t> roots;
    roots.insert(find(i));
    roots.insert(find(dom));
    for (size_t mid : between) roots.insert(find(mid));
    int cof = 0;
    for (size_t r : roots)
      for (size_t v = 0; v < n; ++v)
        if (find(v) == r && dag.nodes[v].pattern == 4) ++cof;
    if (cof > 1) continue;

    size_t target = find(dom);
    for (size_t r : roots)
      if (r != target) rep[r] = target;
  }

  std::vector<size_t> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = anchor[find(i)];
  return out;
}

}  // namespace oracle
