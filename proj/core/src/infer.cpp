// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Type inference: one generation pass per definition collects unification
// constraints and operator relation instances, a deque-based solver runs
// relations to fixpoint over a bipartite variable/relation dependency
// graph, and solved types are written back onto every sub-expression.

#include "microrelay/infer.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

#include "microrelay/analysis.hpp"

namespace microrelay {

// ---- unifier --------------------------------------------------------------

struct TypeUnifier::Impl {
  struct HoleInfo {
    int parent;
    TypeRef resolved;  // only meaningful on roots
  };
  std::vector<HoleInfo> holes;
  std::map<std::string, Dim> dim_bind;
  int next_dim_var = 0;

  // Listeners used by the solver to drive queue re-prioritization.
  std::function<void(int)> on_assign_hole;
  std::function<void(const std::string&)> on_assign_dim;

  int make_hole() {
    int id = static_cast<int>(holes.size());
    holes.push_back({id, nullptr});
    return id;
  }

  int find(int id) {
    while (holes[id].parent != id) {
      holes[id].parent = holes[holes[id].parent].parent;
      id = holes[id].parent;
    }
    return id;
  }

  Dim resolve_dim(Dim d) const {
    int guard = 0;
    while (d.is_var()) {
      auto it = dim_bind.find(d.name);
      if (it == dim_bind.end()) return d;
      d = it->second;
      MREL_CHECK(++guard < 1'000'000, "dim binding cycle");
    }
    return d;
  }

  void bind_dim(const std::string& name, const Dim& to) {
    if (to.is_var() && to.name == name) return;
    dim_bind[name] = to;
    if (on_assign_dim) on_assign_dim(name);
  }

  Dim unify_dim(const Dim& da, const Dim& db, const SourceSpan& span) {
    Dim a = resolve_dim(da);
    Dim b = resolve_dim(db);
    if (a.is_any() || b.is_any()) {
      // Any absorbs; bind symbols so they stay dynamic.
      if (a.is_var()) bind_dim(a.name, Dim::any());
      if (b.is_var()) bind_dim(b.name, Dim::any());
      return Dim::any();
    }
    if (a.is_const() && b.is_const()) {
      if (a.value != b.value)
        diag_throw(DiagCode::UnificationError,
                   "dimension mismatch: " + a.str() + " vs " + b.str(), span);
      return a;
    }
    if (a.is_var()) {
      if (b.is_var() && a.name == b.name) return a;
      bind_dim(a.name, b);
      return b;
    }
    bind_dim(b.name, a);
    return a;
  }

  TypeRef shallow(TypeRef t) {
    while (t && t->kind == TypeKind::Hole) {
      int root = find(t->hole_id);
      const TypeRef& r = holes[root].resolved;
      if (!r) return t->hole_id == root ? t : type_hole(root);
      t = r;
    }
    return t;
  }

  bool occurs(int root, const TypeRef& t) {
    if (!t) return false;
    TypeRef s = t;
    if (s->kind == TypeKind::Hole) {
      int r = find(s->hole_id);
      if (r == root) return true;
      if (holes[r].resolved) return occurs(root, holes[r].resolved);
      return false;
    }
    for (const auto& f : s->fields)
      if (occurs(root, f)) return true;
    for (const auto& a : s->arg_types)
      if (occurs(root, a)) return true;
    if (s->ret_type && occurs(root, s->ret_type)) return true;
    return false;
  }

  void assign(int hole_id, const TypeRef& t, const SourceSpan& span) {
    int root = find(hole_id);
    TypeRef target = shallow(t);
    if (target->kind == TypeKind::Hole) {
      int other = find(target->hole_id);
      if (other == root) return;
      holes[root].parent = other;
      if (on_assign_hole) on_assign_hole(root);
      return;
    }
    if (occurs(root, target))
      diag_throw(DiagCode::UnificationError, "infinite type (occurs check)", span);
    holes[root].resolved = target;
    if (on_assign_hole) on_assign_hole(root);
  }

  TypeRef unify(const TypeRef& ta, const TypeRef& tb, const SourceSpan& span) {
    TypeRef a = shallow(ta);
    TypeRef b = shallow(tb);
    if (a.get() == b.get()) return a;
    if (a->kind == TypeKind::Hole) {
      assign(a->hole_id, b, span);
      return shallow(a);
    }
    if (b->kind == TypeKind::Hole) {
      assign(b->hole_id, a, span);
      return shallow(b);
    }
    if (a->kind != b->kind)
      diag_throw(DiagCode::UnificationError,
                 "cannot unify " + type_str(a) + " with " + type_str(b), span);
    switch (a->kind) {
      case TypeKind::Tensor: {
        if (a->dtype != b->dtype)
          diag_throw(DiagCode::UnificationError,
                     "dtype mismatch: " + a->dtype.str() + " vs " + b->dtype.str(), span);
        if (a->shape.rank() != b->shape.rank())
          diag_throw(DiagCode::UnificationError,
                     "rank mismatch: " + a->shape.str() + " vs " + b->shape.str(), span);
        Shape out;
        for (size_t i = 0; i < a->shape.rank(); ++i)
          out.dims.push_back(unify_dim(a->shape.dims[i], b->shape.dims[i], span));
        return tensor_type(std::move(out), a->dtype);
      }
      case TypeKind::Tuple: {
        if (a->fields.size() != b->fields.size())
          diag_throw(DiagCode::UnificationError,
                     "tuple arity mismatch: " + type_str(a) + " vs " + type_str(b), span);
        std::vector<TypeRef> fields;
        for (size_t i = 0; i < a->fields.size(); ++i)
          fields.push_back(unify(a->fields[i], b->fields[i], span));
        return tuple_type(std::move(fields));
      }
      case TypeKind::Func: {
        if (a->arg_types.size() != b->arg_types.size())
          diag_throw(DiagCode::UnificationError,
                     "function arity mismatch: " + type_str(a) + " vs " + type_str(b), span);
        if (!a->type_params.empty() || !b->type_params.empty()) {
          if (a->type_params != b->type_params)
            diag_throw(DiagCode::UnificationError,
                       "cannot unify differently quantified function types", span);
        }
        std::vector<TypeRef> args;
        for (size_t i = 0; i < a->arg_types.size(); ++i)
          args.push_back(unify(a->arg_types[i], b->arg_types[i], span));
        TypeRef ret = unify(a->ret_type, b->ret_type, span);
        auto rels = a->relations.empty() ? b->relations : a->relations;
        return func_type(std::move(args), ret, a->type_params, std::move(rels));
      }
      case TypeKind::Ref:
        return ref_type(unify(a->fields[0], b->fields[0], span));
      case TypeKind::TypeVar:
      case TypeKind::TypeName:
        if (a->name != b->name)
          diag_throw(DiagCode::UnificationError, a->name + " vs " + b->name, span);
        return a;
      case TypeKind::TypeCall: {
        if (a->name != b->name || a->fields.size() != b->fields.size())
          diag_throw(DiagCode::UnificationError,
                     "cannot unify " + type_str(a) + " with " + type_str(b), span);
        std::vector<TypeRef> args;
        for (size_t i = 0; i < a->fields.size(); ++i)
          args.push_back(unify(a->fields[i], b->fields[i], span));
        return type_call(a->name, std::move(args));
      }
      case TypeKind::Hole:
        break;
    }
    MREL_CHECK(false, "unify fell through");
  }

  TypeRef deep_resolve(const TypeRef& t, const std::map<int, TypeRef>* hole_subst = nullptr) {
    if (!t) return t;
    TypeRef s = shallow(t);
    if (s->kind == TypeKind::Hole) {
      int root = find(s->hole_id);
      if (hole_subst) {
        auto it = hole_subst->find(root);
        if (it != hole_subst->end()) return it->second;
      }
      return type_hole(root);
    }
    auto copy = std::make_shared<Type>(*s);
    for (auto& f : copy->fields) f = deep_resolve(f, hole_subst);
    for (auto& a : copy->arg_types) a = deep_resolve(a, hole_subst);
    if (copy->ret_type) copy->ret_type = deep_resolve(copy->ret_type, hole_subst);
    for (auto& rel : copy->relations)
      for (auto& a : rel.args) a = deep_resolve(a, hole_subst);
    if (copy->kind == TypeKind::Tensor)
      for (auto& d : copy->shape.dims) d = resolve_dim(d);
    return copy;
  }

  void collect_holes(const TypeRef& t, std::set<int>* out) {
    if (!t) return;
    TypeRef s = shallow(t);
    if (s->kind == TypeKind::Hole) {
      out->insert(find(s->hole_id));
      return;
    }
    for (const auto& f : s->fields) collect_holes(f, out);
    for (const auto& a : s->arg_types) collect_holes(a, out);
    if (s->ret_type) collect_holes(s->ret_type, out);
    for (const auto& rel : s->relations)
      for (const auto& a : rel.args) collect_holes(a, out);
  }

  void collect_dim_vars(const TypeRef& t, std::set<std::string>* out) {
    if (!t) return;
    TypeRef s = shallow(t);
    if (s->kind == TypeKind::Tensor) {
      for (const auto& d : s->shape.dims) {
        Dim r = resolve_dim(d);
        if (r.is_var()) out->insert(r.name);
      }
    }
    for (const auto& f : s->fields) collect_dim_vars(f, out);
    for (const auto& a : s->arg_types) collect_dim_vars(a, out);
    if (s->ret_type) collect_dim_vars(s->ret_type, out);
    for (const auto& rel : s->relations)
      for (const auto& a : rel.args) collect_dim_vars(a, out);
  }
};

TypeUnifier::TypeUnifier() : impl_(std::make_unique<Impl>()) {}
TypeUnifier::~TypeUnifier() = default;

TypeRef TypeUnifier::fresh_hole() { return type_hole(impl_->make_hole()); }

Dim TypeUnifier::fresh_dim_var() {
  return Dim::var("#d" + std::to_string(impl_->next_dim_var++));
}

TypeRef TypeUnifier::unify(const TypeRef& a, const TypeRef& b, const SourceSpan& span) {
  return impl_->unify(a, b, span);
}

TypeRef TypeUnifier::resolve(const TypeRef& t) const { return impl_->deep_resolve(t); }

std::vector<int> TypeUnifier::unresolved_holes(const TypeRef& t) const {
  std::set<int> s;
  impl_->collect_holes(t, &s);
  return {s.begin(), s.end()};
}

// ---- inference context -----------------------------------------------------

struct RelationInstRec {
  int id;
  std::string relation;
  std::vector<TypeRef> slots;  // arguments followed by result
  AttrMap attrs;
  SourceSpan span;
  bool discharged = false;
};

struct InferCtx {
  const ModuleEnv& m;
  TypeUnifier uf;
  TypeUnifier::Impl* u;

  std::map<std::string, TypeRef>* global_types;

  std::vector<RelationInstRec> rels;
  std::map<int, std::vector<int>> hole_adj;         // hole root -> relation ids
  std::map<std::string, std::vector<int>> dim_adj;  // dim var -> relation ids
  std::vector<std::pair<std::string, TypeRef>> scope;
  std::vector<const Expr*> annotated;
  SolverTrace* trace;
  int* rel_id_counter;
  int rel_id_base = 0;

  InferCtx(const ModuleEnv& mod, std::map<std::string, TypeRef>* globals, SolverTrace* tr,
           int* counter)
      : m(mod), global_types(globals), trace(tr), rel_id_counter(counter) {
    u = uf.impl_.get();
    rel_id_base = *counter;
  }

  TypeRef lookup_var(const std::string& name, const SourceSpan& span) {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == name) return it->second;
    diag_throw(DiagCode::UnboundVariable, "%" + name, span);
  }

  void note(const ExprRef& e, const TypeRef& t) {
    e->checked_type = t;
    annotated.push_back(e.get());
  }

  RelationInstRec& rel_by_id(int id) { return rels[id - rel_id_base]; }

  void index_relation(const RelationInstRec& inst) {
    std::set<int> hs;
    std::set<std::string> dvs;
    for (const auto& s : inst.slots) {
      u->collect_holes(s, &hs);
      u->collect_dim_vars(s, &dvs);
    }
    for (int h : hs) {
      auto& v = hole_adj[h];
      if (std::find(v.begin(), v.end(), inst.id) == v.end()) v.push_back(inst.id);
    }
    for (const auto& d : dvs) {
      auto& v = dim_adj[d];
      if (std::find(v.begin(), v.end(), inst.id) == v.end()) v.push_back(inst.id);
    }
  }

  int add_relation(std::string relation, std::vector<TypeRef> slots, AttrMap attrs,
                   SourceSpan span) {
    RelationInstRec inst;
    inst.id = (*rel_id_counter)++;
    inst.relation = std::move(relation);
    inst.slots = std::move(slots);
    inst.attrs = std::move(attrs);
    inst.span = std::move(span);
    int id = inst.id;
    index_relation(inst);
    rels.push_back(std::move(inst));
    return id;
  }

  // ---- instantiation ----

  TypeRef substitute(const TypeRef& t, const std::map<std::string, TypeRef>& tv,
                     const std::map<std::string, Dim>& dv) {
    if (!t) return t;
    if (t->kind == TypeKind::TypeVar) {
      auto it = tv.find(t->name);
      if (it != tv.end()) return it->second;
      return t;
    }
    auto copy = std::make_shared<Type>(*t);
    if (copy->kind == TypeKind::Tensor) {
      for (auto& d : copy->shape.dims) {
        if (d.is_var()) {
          auto it = dv.find(d.name);
          if (it != dv.end()) d = it->second;
        }
      }
      return copy;
    }
    if (copy->kind == TypeKind::Func) {
      std::map<std::string, TypeRef> tv2 = tv;  // inner quantifiers shadow
      for (const auto& p : copy->type_params) tv2.erase(p);
      for (auto& a : copy->arg_types) a = substitute(a, tv2, dv);
      if (copy->ret_type) copy->ret_type = substitute(copy->ret_type, tv2, dv);
      for (auto& rel : copy->relations)
        for (auto& a : rel.args) a = substitute(a, tv2, dv);
      for (auto& f : copy->fields) f = substitute(f, tv2, dv);
      return copy;
    }
    for (auto& f : copy->fields) f = substitute(f, tv, dv);
    for (auto& a : copy->arg_types) a = substitute(a, tv, dv);
    if (copy->ret_type) copy->ret_type = substitute(copy->ret_type, tv, dv);
    for (auto& rel : copy->relations)
      for (auto& a : rel.args) a = substitute(a, tv, dv);
    return copy;
  }

  /// Instantiates a (possibly polymorphic) type: fresh holes for type
  /// parameters, fresh dim vars for every symbolic dim, relation clauses
  /// enqueued as instances.
  TypeRef instantiate(const TypeRef& poly, const SourceSpan& span,
                      const std::vector<TypeRef>& explicit_args = {}) {
    std::map<std::string, TypeRef> tv;
    std::map<std::string, Dim> dv;
    if (poly->kind == TypeKind::Func) {
      if (!explicit_args.empty()) {
        if (explicit_args.size() != poly->type_params.size())
          diag_throw(DiagCode::ArityMismatch,
                     "expected " + std::to_string(poly->type_params.size()) +
                         " type arguments, got " + std::to_string(explicit_args.size()),
                     span);
        for (size_t i = 0; i < explicit_args.size(); ++i)
          tv[poly->type_params[i]] = explicit_args[i];
      } else {
        for (const auto& p : poly->type_params) tv[p] = uf.fresh_hole();
      }
    }
    std::set<std::string> dims;
    u->collect_dim_vars(poly, &dims);
    for (const auto& d : dims) dv[d] = uf.fresh_dim_var();
    // Strip the quantifier first: the top-level binders are exactly what is
    // being instantiated (inner quantified types still shadow).
    TypeRef source = poly;
    if (poly->kind == TypeKind::Func && !poly->type_params.empty()) {
      auto mono = std::make_shared<Type>(*poly);
      mono->type_params.clear();
      source = mono;
    }
    TypeRef inst = substitute(source, tv, dv);
    enqueue_clauses(inst, span);
    return inst;
  }

  void enqueue_clauses(const TypeRef& fn_type, const SourceSpan& span) {
    if (!fn_type || fn_type->kind != TypeKind::Func) return;
    for (const auto& clause : fn_type->relations) {
      if (!relation_exists(clause.relation))
        diag_throw(DiagCode::UnknownOperator, "unknown type relation " + clause.relation, span);
      add_relation(clause.relation, clause.args, {}, span);
    }
  }

  static TypeRef adt_result_type(const AdtDef& owner, std::vector<TypeRef> args) {
    if (owner.type_params.empty()) return type_name(owner.name);
    return type_call(owner.name, std::move(args));
  }

  TypeRef constructor_type(const std::string& ctor, const SourceSpan& span) {
    const AdtDef* owner = nullptr;
    const AdtConstructor* c = m.find_constructor(ctor, &owner);
    if (!c) diag_throw(DiagCode::UnknownConstructor, ctor, span);
    std::map<std::string, TypeRef> tv;
    std::vector<TypeRef> adt_args;
    for (const auto& p : owner->type_params) {
      tv[p] = uf.fresh_hole();
      adt_args.push_back(tv[p]);
    }
    TypeRef result = adt_result_type(*owner, std::move(adt_args));
    if (c->field_types.empty()) return result;
    std::vector<TypeRef> args;
    for (const auto& ft : c->field_types) args.push_back(substitute(ft, tv, {}));
    return func_type(std::move(args), result);
  }

  TypeRef operator_type(const std::string& op, const SourceSpan& span, const AttrMap& attrs) {
    const OperatorDecl& decl = m.registry->get(op, span);
    std::vector<TypeRef> args;
    std::vector<TypeRef> slots;
    for (size_t i = 0; i < decl.arity; ++i) {
      args.push_back(uf.fresh_hole());
      slots.push_back(args.back());
    }
    TypeRef ret = uf.fresh_hole();
    slots.push_back(ret);
    add_relation(decl.relation, std::move(slots), attrs, span);
    return func_type(std::move(args), ret);
  }

  // ---- constraint generation ----

  void gen_pattern(const PatternRef& pat, const TypeRef& scrut_t) {
    switch (pat->kind) {
      case PatternKind::Wildcard:
        return;
      case PatternKind::Var:
        scope.emplace_back(pat->name, scrut_t);
        return;
      case PatternKind::Tuple: {
        std::vector<TypeRef> holes;
        for (size_t i = 0; i < pat->subpats.size(); ++i) holes.push_back(uf.fresh_hole());
        uf.unify(scrut_t, tuple_type(holes), pat->span);
        for (size_t i = 0; i < pat->subpats.size(); ++i) gen_pattern(pat->subpats[i], holes[i]);
        return;
      }
      case PatternKind::Constructor: {
        const AdtDef* owner = nullptr;
        const AdtConstructor* c = m.find_constructor(pat->name, &owner);
        if (!c) diag_throw(DiagCode::UnknownConstructor, pat->name, pat->span);
        std::map<std::string, TypeRef> tv;
        std::vector<TypeRef> adt_args;
        for (const auto& p : owner->type_params) {
          tv[p] = uf.fresh_hole();
          adt_args.push_back(tv[p]);
        }
        uf.unify(scrut_t, adt_result_type(*owner, std::move(adt_args)), pat->span);
        for (size_t i = 0; i < pat->subpats.size(); ++i)
          gen_pattern(pat->subpats[i], substitute(c->field_types[i], tv, {}));
        return;
      }
    }
  }

  TypeRef gen(const ExprRef& e) {
    TypeRef t = gen_inner(e);
    note(e, t);
    return t;
  }

  TypeRef gen_inner(const ExprRef& e) {
    switch (e->kind) {
      case ExprKind::LocalVar:
        return lookup_var(e->name, e->span);
      case ExprKind::GlobalVar: {
        auto it = global_types->find(e->name);
        if (it == global_types->end())
          diag_throw(DiagCode::UnknownGlobal, "@" + e->name, e->span);
        return instantiate(it->second, e->span);
      }
      case ExprKind::Constant:
        return e->literal.type();
      case ExprKind::OperatorRef:
        return operator_type(e->name, e->span, {});
      case ExprKind::ConstructorRef:
        return constructor_type(e->name, e->span);
      case ExprKind::Call:
        return gen_call(e);
      case ExprKind::Let: {
        TypeRef vt = gen(e->a);
        if (e->annotation) {
          vt = uf.unify(vt, e->annotation, e->span);
          enqueue_clauses(u->shallow(e->annotation), e->span);
        }
        scope.emplace_back(e->name, vt);
        TypeRef bt = gen(e->b);
        scope.pop_back();
        return bt;
      }
      case ExprKind::Function: {
        size_t mark = scope.size();
        std::vector<TypeRef> arg_ts;
        for (const auto& p : e->params) {
          TypeRef pt = p.annotation ? p.annotation : uf.fresh_hole();
          if (p.annotation) enqueue_clauses(p.annotation, e->span);
          arg_ts.push_back(pt);
          scope.emplace_back(p.name, pt);
        }
        TypeRef bt = gen(e->a);
        if (e->ret_type) bt = uf.unify(bt, e->ret_type, e->span);
        scope.resize(mark);
        return func_type(std::move(arg_ts), bt, e->type_params);
      }
      case ExprKind::Tuple: {
        std::vector<TypeRef> fields;
        for (const auto& f : e->elems) fields.push_back(gen(f));
        return tuple_type(std::move(fields));
      }
      case ExprKind::Projection: {
        // Deferred through the relation queue so the tuple type may arrive
        // from a later-solved operator relation (e.g. split).
        TypeRef t = gen(e->a);
        TypeRef out = uf.fresh_hole();
        AttrMap attrs;
        attrs["index"] = e->index;
        add_relation("Proj", {t, out}, std::move(attrs), e->span);
        return out;
      }
      case ExprKind::If: {
        TypeRef ct = gen(e->a);
        uf.unify(ct, scalar_type(BaseType::boolean()), e->a->span);
        TypeRef tt = gen(e->b);
        TypeRef et = gen(e->c);
        return uf.unify(tt, et, e->span);
      }
      case ExprKind::Match: {
        TypeRef st = gen(e->a);
        TypeRef result = uf.fresh_hole();
        for (const auto& clause : e->clauses) {
          size_t mark = scope.size();
          gen_pattern(clause.pattern, st);
          TypeRef bt = gen(clause.body);
          scope.resize(mark);
          result = uf.unify(result, bt, clause.body->span);
        }
        return result;
      }
      case ExprKind::RefNew:
        return ref_type(gen(e->a));
      case ExprKind::RefRead: {
        TypeRef h = uf.fresh_hole();
        uf.unify(gen(e->a), ref_type(h), e->span);
        return h;
      }
      case ExprKind::RefWrite: {
        TypeRef h = uf.fresh_hole();
        uf.unify(gen(e->a), ref_type(h), e->span);
        uf.unify(gen(e->b), h, e->span);
        return unit_type();
      }
    }
    MREL_CHECK(false, "bad expr kind");
  }

  TypeRef gen_call(const ExprRef& e) {
    // Direct operator application: instantiate the operator's relation with
    // the argument types and a fresh result variable at this call site.
    if (e->a->kind == ExprKind::OperatorRef) {
      const OperatorDecl& decl = m.registry->get(e->a->name, e->a->span);
      std::vector<TypeRef> arg_ts;
      std::vector<TypeRef> slots;
      for (const auto& arg : e->elems) {
        arg_ts.push_back(gen(arg));
        slots.push_back(arg_ts.back());
      }
      TypeRef ret = uf.fresh_hole();
      slots.push_back(ret);
      add_relation(decl.relation, std::move(slots), e->attrs, e->span);
      note(e->a, func_type(std::move(arg_ts), ret));
      return ret;
    }
    // Constructor application.
    if (e->a->kind == ExprKind::ConstructorRef) {
      TypeRef ct = constructor_type(e->a->name, e->a->span);
      note(e->a, ct);
      if (ct->kind != TypeKind::Func) {
        if (!e->elems.empty())
          diag_throw(DiagCode::ArityMismatch, e->a->name + " takes no fields", e->span);
        return ct;
      }
      if (ct->arg_types.size() != e->elems.size())
        diag_throw(DiagCode::ArityMismatch,
                   e->a->name + " expects " + std::to_string(ct->arg_types.size()) + " fields",
                   e->span);
      for (size_t i = 0; i < e->elems.size(); ++i)
        uf.unify(gen(e->elems[i]), ct->arg_types[i], e->elems[i]->span);
      return ct->ret_type;
    }
    TypeRef callee_t;
    if (e->a->kind == ExprKind::GlobalVar && !e->type_args.empty()) {
      // Globals instantiate at the reference; explicit type arguments must
      // reach that instantiation rather than a second one.
      auto it = global_types->find(e->a->name);
      if (it == global_types->end())
        diag_throw(DiagCode::UnknownGlobal, "@" + e->a->name, e->a->span);
      callee_t = instantiate(it->second, e->span, e->type_args);
      note(e->a, callee_t);
    } else {
      callee_t = u->shallow(gen(e->a));
      if (callee_t->kind == TypeKind::Func &&
          (!callee_t->type_params.empty() || !e->type_args.empty())) {
        callee_t = instantiate(callee_t, e->span, e->type_args);
      }
    }
    std::vector<TypeRef> arg_ts;
    for (const auto& arg : e->elems) arg_ts.push_back(gen(arg));
    TypeRef ret = uf.fresh_hole();
    uf.unify(callee_t, func_type(std::move(arg_ts), ret), e->span);
    return ret;
  }

  // ---- solving ----

  void solve() {
    std::deque<int> queue;
    for (const auto& r : rels) queue.push_back(r.id);

    bool assignment_seen = false;
    int current_rel = -1;

    auto move_to_front = [&](const std::vector<int>& ids) {
      std::vector<int> moved;
      for (int id : ids) {
        RelationInstRec& r = rel_by_id(id);
        if (r.discharged) continue;
        auto it = std::find(queue.begin(), queue.end(), id);
        if (it != queue.end()) {
          queue.erase(it);
          moved.push_back(id);
        }
      }
      for (auto it = moved.rbegin(); it != moved.rend(); ++it) queue.push_front(*it);
      if (trace && !moved.empty()) trace->requeues.push_back(moved);
    };

    u->on_assign_hole = [&](int root) {
      assignment_seen = true;
      auto it = hole_adj.find(root);
      if (it == hole_adj.end()) return;
      std::vector<int> affected;
      for (int id : it->second)
        if (id != current_rel) affected.push_back(id);
      move_to_front(affected);
    };
    u->on_assign_dim = [&](const std::string& name) {
      assignment_seen = true;
      auto it = dim_adj.find(name);
      if (it == dim_adj.end()) return;
      std::vector<int> affected;
      for (int id : it->second)
        if (id != current_rel) affected.push_back(id);
      move_to_front(affected);
    };

    size_t since_progress = 0;
    while (!queue.empty()) {
      if (since_progress >= queue.size() && since_progress > 0) {
        if (trace) ++trace->stalled_rotations;
        u->on_assign_hole = nullptr;
        u->on_assign_dim = nullptr;
        report_underconstrained();
      }
      int id = queue.front();
      queue.pop_front();
      RelationInstRec& rel = rel_by_id(id);
      MREL_CHECK(!rel.discharged, "queue holds a discharged relation");
      current_rel = id;
      if (trace) {
        trace->dequeued.push_back(id);
        trace->events.emplace_back('q', id);
      }

      bool step_progress = false;
      for (;;) {
        std::vector<TypeRef> resolved;
        resolved.reserve(rel.slots.size());
        for (const auto& s : rel.slots) resolved.push_back(u->deep_resolve(s));
        RelationResult res = apply_relation(rel.relation, resolved, rel.attrs, rel.span);
        if (res.is_fails()) {
          std::string types;
          for (size_t i = 0; i + 1 < resolved.size(); ++i)
            types += (i ? ", " : "") + type_str(resolved[i]);
          u->on_assign_hole = nullptr;
          u->on_assign_dim = nullptr;
          diag_throw(DiagCode::RelationFailed,
                     rel.relation + "(" + types + "): " + res.fail_reason, rel.span);
        }
        if (res.is_holds()) {
          rel.discharged = true;
          step_progress = true;
          if (trace) {
            trace->discharged.push_back(id);
            trace->events.emplace_back('d', id);
          }
          break;
        }
        if (res.assignments.empty()) break;  // stuck for now
        assignment_seen = false;
        for (const auto& [slot, ty] : res.assignments)
          uf.unify(rel.slots[slot], ty, rel.span);
        if (!assignment_seen) break;  // redundant assignment; avoid spinning
        step_progress = true;
      }
      current_rel = -1;

      if (!rel.discharged) {
        index_relation(rel);  // refresh adjacency against the current state
        queue.push_back(id);
      }
      if (step_progress) {
        since_progress = 0;
      } else {
        ++since_progress;
      }
      if (trace) trace->queue_snapshots.emplace_back(queue.begin(), queue.end());
    }
    u->on_assign_hole = nullptr;
    u->on_assign_dim = nullptr;
  }

  [[noreturn]] void report_underconstrained() {
    std::set<int> holes;
    std::string spans;
    for (const auto& r : rels) {
      if (r.discharged) continue;
      for (const auto& s : r.slots) u->collect_holes(s, &holes);
      if (r.span.known()) spans += (spans.empty() ? "" : ", ") + r.span.str();
    }
    std::string vars;
    for (int h : holes) vars += (vars.empty() ? "" : ", ") + ("_" + std::to_string(h));
    diag_throw(DiagCode::Underconstrained,
               "no progress possible; unsolved type variables {" + vars + "} at " + spans);
  }
};

// ---- module-level driver ----------------------------------------------------

namespace {

void collect_global_refs(const ExprRef& e, std::set<std::string>* out) {
  if (!e) return;
  if (e->kind == ExprKind::GlobalVar) out->insert(e->name);
  collect_global_refs(e->a, out);
  collect_global_refs(e->b, out);
  collect_global_refs(e->c, out);
  for (const auto& x : e->elems) collect_global_refs(x, out);
  for (const auto& clause : e->clauses) collect_global_refs(clause.body, out);
}

// Tarjan SCC over the global reference graph; emits callees before callers.
std::vector<std::vector<std::string>> compute_sccs(const ModuleEnv& m) {
  std::map<std::string, std::set<std::string>> edges;
  for (const auto& [name, fn] : m.globals) {
    std::set<std::string> refs;
    collect_global_refs(fn, &refs);
    std::set<std::string> filtered;
    for (const auto& r : refs)
      if (m.globals.count(r)) filtered.insert(r);
    edges[name] = std::move(filtered);
  }
  std::vector<std::vector<std::string>> groups;
  std::map<std::string, int> index, low;
  std::vector<std::string> stack;
  std::set<std::string> on_stack;
  int counter = 0;
  std::function<void(const std::string&)> strongconnect = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : edges[v]) {
      if (!index.count(w)) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> group;
      for (;;) {
        std::string w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        group.push_back(w);
        if (w == v) break;
      }
      std::sort(group.begin(), group.end());
      groups.push_back(std::move(group));
    }
  };
  for (const auto& [name, fn] : m.globals)
    if (!index.count(name)) strongconnect(name);
  return groups;
}

bool group_recursive(const ModuleEnv& m, const std::vector<std::string>& group) {
  if (group.size() > 1) return true;
  std::set<std::string> refs;
  collect_global_refs(m.globals.at(group[0]), &refs);
  return refs.count(group[0]) > 0;
}

TypeRef declared_fn_type(const ExprRef& fn, const std::string& name, TypeUnifier& uf) {
  std::vector<TypeRef> args;
  for (const auto& p : fn->params) {
    if (!p.annotation)
      diag_throw(DiagCode::Underconstrained,
                 "recursive global @" + name + " has unannotated parameter %" + p.name, fn->span);
    args.push_back(p.annotation);
  }
  TypeRef ret = fn->ret_type ? fn->ret_type : uf.fresh_hole();
  return func_type(std::move(args), ret, fn->type_params);
}

}  // namespace

ModuleEnv infer(const ModuleEnv& m, SolverTrace* trace) {
  check_well_formed(m);
  ModuleEnv out = m;
  std::map<std::string, TypeRef> global_types;
  int rel_counter = 0;

  for (const auto& group : compute_sccs(out)) {
    InferCtx ctx(out, &global_types, trace, &rel_counter);
    bool recursive = group_recursive(out, group);

    if (recursive) {
      for (const auto& name : group)
        global_types[name] = declared_fn_type(out.globals.at(name), name, ctx.uf);
    }

    std::map<std::string, TypeRef> body_types;
    for (const auto& name : group) {
      const ExprRef& fn = out.globals.at(name);
      TypeRef t = ctx.gen(fn);
      if (recursive) t = ctx.uf.unify(t, global_types[name], fn->span);
      body_types[name] = t;
    }

    ctx.solve();

    // Generalize each member: unresolved holes reachable from the signature
    // become synthesized type parameters; everything else must be solved.
    std::map<int, TypeRef> hole_subst;
    for (const auto& name : group) {
      TypeRef solved = ctx.u->deep_resolve(body_types[name]);
      std::set<int> sig_holes;
      ctx.u->collect_holes(solved, &sig_holes);

      std::vector<std::string> params = solved->kind == TypeKind::Func
                                            ? solved->type_params
                                            : std::vector<std::string>{};
      int gensym = 0;
      for (int h : sig_holes) {
        auto it = hole_subst.find(h);
        std::string tp;
        if (it != hole_subst.end()) {
          tp = it->second->name;
        } else {
          do {
            tp = "t" + std::to_string(gensym++);
          } while (std::find(params.begin(), params.end(), tp) != params.end());
          hole_subst[h] = type_var(tp);
        }
        if (std::find(params.begin(), params.end(), tp) == params.end()) params.push_back(tp);
      }
      TypeRef final_t = ctx.u->deep_resolve(body_types[name], &hole_subst);
      if (final_t->kind == TypeKind::Func) {
        auto copy = std::make_shared<Type>(*final_t);
        copy->type_params = params;
        final_t = copy;
      }
      global_types[name] = final_t;
    }

    // Write back fully resolved annotations; leftover holes that did not
    // reach any signature are underconstrained.
    for (const Expr* node : ctx.annotated) {
      if (!node->checked_type) continue;
      TypeRef rt = ctx.u->deep_resolve(node->checked_type, &hole_subst);
      if (!type_resolved(rt)) {
        std::string vars;
        for (int h : ctx.uf.unresolved_holes(rt)) vars += " _" + std::to_string(h);
        diag_throw(DiagCode::Underconstrained,
                   "unsolved type variables{" + vars + " } in " + type_str(rt), node->span);
      }
      node->checked_type = rt;
    }
  }
  return out;
}

}  // namespace microrelay
