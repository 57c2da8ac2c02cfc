// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Fusion extraction. Operator-call bindings of each ANF block form a
// dataflow DAG; an immediate post-dominator tree over that DAG (plus a
// virtual sink) drives group formation; each group is factored into a
// local function marked Primitive whose parameters are the group's free
// variables.

#include "microrelay/fuse.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "microrelay/analysis.hpp"

namespace microrelay {

namespace {

constexpr size_t kSink = FusionGroups::kSink;

struct PostDom {
  std::vector<size_t> ipdom;  // per node; kSink means the virtual sink
  std::vector<int> depth;     // depth in the post-dominator tree (sink = 0)
};

// Single reverse-topological pass: node indices are a topological order of
// the DAG (producers first), so every successor is already placed when a
// node is visited. The immediate post-dominator is the LCA of all
// successors in the tree built so far.
PostDom compute_postdom(const DataflowDag& dag) {
  size_t n = dag.nodes.size();
  PostDom pd;
  pd.ipdom.assign(n, kSink);
  pd.depth.assign(n, 0);
  auto depth_of = [&](size_t v) { return v == kSink ? 0 : pd.depth[v]; };
  auto parent_of = [&](size_t v) { return v == kSink ? kSink : pd.ipdom[v]; };
  auto lca = [&](size_t a, size_t b) {
    while (a != b) {
      if (a == kSink) return a;
      if (b == kSink) return b;
      if (depth_of(a) > depth_of(b)) {
        a = parent_of(a);
      } else if (depth_of(b) > depth_of(a)) {
        b = parent_of(b);
      } else {
        a = parent_of(a);
        b = parent_of(b);
      }
    }
    return a;
  };
  for (size_t i = n; i-- > 0;) {
    const auto& node = dag.nodes[i];
    std::vector<size_t> succs = node.consumers;
    if (node.extern_output || succs.empty()) succs.push_back(kSink);
    size_t d = succs[0];
    for (size_t k = 1; k < succs.size(); ++k) d = lca(d, succs[k]);
    pd.ipdom[i] = d;
    pd.depth[i] = depth_of(d) + 1;
  }
  return pd;
}

struct Groups {
  std::vector<size_t> parent;
  std::vector<size_t> size;
  std::vector<int> cof_count;   // ComplexOutFusable members per root
  std::vector<size_t> anchor;   // the member that post-dominates the group

  explicit Groups(const DataflowDag& dag) {
    size_t n = dag.nodes.size();
    parent.resize(n);
    size.assign(n, 1);
    cof_count.assign(n, 0);
    anchor.resize(n);
    for (size_t i = 0; i < n; ++i) {
      parent[i] = i;
      anchor[i] = i;
      cof_count[i] = dag.nodes[i].pattern == FusionPattern::ComplexOutFusable ? 1 : 0;
    }
  }

  size_t find(size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  void merge_into(size_t member, size_t target_root) {
    size_t a = find(member);
    if (a == target_root) return;
    parent[a] = target_root;
    size[target_root] += size[a];
    cof_count[target_root] += cof_count[a];
  }
};

// All nodes strictly between src and its post-dominator dom: DFS along
// consumer edges, stopping at dom.
void collect_between(const DataflowDag& dag, size_t src, size_t dom, std::set<size_t>* out) {
  for (size_t s : dag.nodes[src].consumers) {
    if (s == dom || out->count(s)) continue;
    out->insert(s);
    collect_between(dag, s, dom, out);
  }
}

}  // namespace

FusionGroups analyze_fusion_groups(const DataflowDag& dag, std::optional<int64_t> max_group_size) {
  PostDom pd = compute_postdom(dag);
  Groups g(dag);

  for (size_t i = 0; i < dag.nodes.size(); ++i) {
    size_t dom = pd.ipdom[i];
    if (dom == kSink) continue;
    FusionPattern p = dag.nodes[i].pattern;
    // Opaque never fuses; Reduction may anchor a group but never joins a
    // downstream one.
    if (p == FusionPattern::Opaque || p == FusionPattern::Reduction) continue;
    if (dag.nodes[dom].pattern == FusionPattern::Opaque) continue;
    size_t src_root = g.find(i);
    size_t dom_root = g.find(dom);
    if (src_root == dom_root) continue;

    std::set<size_t> between;
    collect_between(dag, i, dom, &between);
    bool ok = true;
    for (size_t mid : between) {
      if (dag.nodes[mid].pattern > FusionPattern::Injective) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    // At most one ComplexOutFusable op per group.
    std::set<size_t> roots{src_root, dom_root};
    for (size_t mid : between) roots.insert(g.find(mid));
    int cof = 0;
    size_t total = 0;
    for (size_t r : roots) {
      cof += g.cof_count[r];
      total += g.size[r];
    }
    if (cof > 1) continue;
    if (max_group_size && static_cast<int64_t>(total) > *max_group_size) continue;

    size_t target = dom_root;
    for (size_t r : roots) g.merge_into(r, target);
  }

  FusionGroups out;
  out.ipdom = pd.ipdom;
  out.group_of.resize(dag.nodes.size());
  for (size_t i = 0; i < dag.nodes.size(); ++i) out.group_of[i] = g.anchor[g.find(i)];
  return out;
}

// ---- the extraction rewrite ---------------------------------------------------

namespace {

struct BlockBinding {
  std::string name;
  TypeRef annotation;
  ExprRef value;
  SourceSpan span;
};

struct FuseRewriter {
  const ModuleEnv& m;
  NameSupply* names;
  std::optional<int64_t> max_depth;

  bool is_op_call(const ExprRef& e) const {
    return e->kind == ExprKind::Call && e->a->kind == ExprKind::OperatorRef &&
           m.registry->contains(e->a->name);
  }

  ExprRef rewrite_nested(const ExprRef& e) {
    switch (e->kind) {
      case ExprKind::Function: {
        if (fn_is_primitive(e)) return e;  // never fuse inside a fused unit
        return mk_fn(e->params, rewrite_block(e->a), e->ret_type, e->type_params, e->attrs,
                     e->span);
      }
      case ExprKind::If:
        return mk_if(e->a, rewrite_block(e->b), rewrite_block(e->c), e->span);
      case ExprKind::Match: {
        std::vector<MatchClause> clauses;
        for (const auto& clause : e->clauses)
          clauses.push_back({clause.pattern, rewrite_block(clause.body)});
        return mk_match(e->a, std::move(clauses), e->span);
      }
      default:
        return e;
    }
  }

  ExprRef rewrite_block(const ExprRef& block) {
    // Collect the let chain.
    std::vector<BlockBinding> binds;
    ExprRef cur = block;
    while (cur->kind == ExprKind::Let) {
      binds.push_back({cur->name, cur->annotation, rewrite_nested(cur->a), cur->span});
      cur = cur->b;
    }
    ExprRef tail = rewrite_nested(cur);

    // Operator-call bindings become DAG nodes.
    DataflowDag dag;
    std::map<std::string, size_t> node_of_var;
    std::vector<size_t> node_bind_index;
    for (size_t bi = 0; bi < binds.size(); ++bi) {
      if (!is_op_call(binds[bi].value)) continue;
      size_t id = dag.nodes.size();
      dag.nodes.push_back({});
      dag.nodes[id].pattern = m.registry->get(binds[bi].value->a->name).pattern;
      node_of_var[binds[bi].name] = id;
      node_bind_index.push_back(bi);
    }
    if (dag.nodes.empty()) {
      ExprRef out = tail;
      for (auto it = binds.rbegin(); it != binds.rend(); ++it)
        out = mk_let(it->name, it->value, out, it->annotation, it->span);
      return out;
    }

    // Edges: producer -> consumer through op arguments; anything else that
    // mentions a node's var makes it an extern output.
    auto mark_extern = [&](const ExprRef& e) {
      for (const auto& v : free_vars(e)) {
        auto it = node_of_var.find(v);
        if (it != node_of_var.end()) dag.nodes[it->second].extern_output = true;
      }
    };
    for (size_t bi = 0; bi < binds.size(); ++bi) {
      const ExprRef& value = binds[bi].value;
      if (is_op_call(value)) {
        size_t consumer = node_of_var.at(binds[bi].name);
        for (const auto& arg : value->elems) {
          if (arg->kind == ExprKind::LocalVar) {
            auto it = node_of_var.find(arg->name);
            if (it != node_of_var.end()) {
              dag.nodes[it->second].consumers.push_back(consumer);
              continue;
            }
          }
          mark_extern(arg);  // projections of node vars etc.
        }
      } else {
        mark_extern(value);
      }
    }
    mark_extern(tail);

    FusionGroups groups = analyze_fusion_groups(dag, max_depth);

    // Members per anchor, in binding order.
    std::map<size_t, std::vector<size_t>> members;  // anchor node -> node ids
    for (size_t id = 0; id < dag.nodes.size(); ++id) members[groups.group_of[id]].push_back(id);

    std::set<size_t> skip_binds;  // non-anchor member bindings move into groups
    for (const auto& [anchorid, ids] : members)
      for (size_t id : ids)
        if (id != anchorid) skip_binds.insert(node_bind_index[id]);

    // Rebuild the chain back-to-front.
    ExprRef out = tail;
    for (size_t bi = binds.size(); bi-- > 0;) {
      if (skip_binds.count(bi)) continue;
      const BlockBinding& b = binds[bi];
      if (!is_op_call(b.value) || !node_of_var.count(b.name) ||
          groups.group_of[node_of_var.at(b.name)] != node_of_var.at(b.name)) {
        out = mk_let(b.name, b.value, out, b.annotation, b.span);
        continue;
      }
      // This binding is a group anchor: emit the Primitive function and its
      // call in place of the member bindings.
      size_t anchor_id = node_of_var.at(b.name);
      const auto& ids = members.at(anchor_id);

      ExprRef group_body = binds[node_bind_index[ids.back()]].value;
      MREL_CHECK(ids.back() == anchor_id, "anchor is not the last group member");
      for (size_t k = ids.size() - 1; k-- > 0;) {
        const BlockBinding& mb = binds[node_bind_index[ids[k]]];
        group_body = mk_let(mb.name, mb.value, group_body, mb.annotation, mb.span);
      }

      std::vector<std::string> fvs = free_vars(group_body);
      std::vector<Param> params;
      std::vector<ExprRef> call_args;
      for (const auto& v : fvs) {
        params.push_back({v, nullptr});
        call_args.push_back(mk_var(v, b.span));
      }
      AttrMap fn_attrs;
      fn_attrs[kPrimitiveAttr] = true;
      ExprRef fused_fn =
          mk_fn(std::move(params), group_body, nullptr, {}, std::move(fn_attrs), b.span);
      std::string fn_var = names->fresh();
      out = mk_let(b.name, mk_call(mk_var(fn_var, b.span), std::move(call_args), {}, {}, b.span),
                   out, b.annotation, b.span);
      out = mk_let(fn_var, fused_fn, out, nullptr, b.span);
    }
    return out;
  }
};

}  // namespace

ModuleEnv fuse_ops(const ModuleEnv& m, std::optional<int64_t> max_depth) {
  ModuleEnv out = to_anf(m);
  for (auto& [name, fn] : out.globals) {
    if (fn_is_primitive(fn)) continue;
    NameSupply names({fn}, "fused");
    FuseRewriter rw{out, &names, max_depth};
    fn = mk_fn(fn->params, rw.rewrite_block(fn->a), fn->ret_type, fn->type_params, fn->attrs,
               fn->span);
  }
  return out;
}

}  // namespace microrelay
