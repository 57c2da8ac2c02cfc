// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "support/generators.hpp"
#include "support/testutil.hpp"

using namespace microrelay;
using testutil::diag_code_of;

namespace {

TypeRef main_ret(const ModuleEnv& m) {
  const TypeRef& t = m.globals.at("main")->checked_type;
  REQUIRE(t);
  REQUIRE(t->kind == TypeKind::Func);
  return t->ret_type;
}

}  // namespace

TEST_SUITE_BEGIN("type_inference");

TEST_CASE("identity broadcast keeps the argument type") {
  ModuleEnv m = testutil::typed("def @main(%x: Tensor[(2, 3), float32]) { add(%x, %x) }");
  CHECK(type_equal(main_ret(m), tensor_type(Shape::of({2, 3}), BaseType::f32())));
}

TEST_CASE("conv2d output follows the shape formula") {
  ModuleEnv m = testutil::typed(
      "def @main(%x: Tensor[(1, 3, 32, 32), float32], %w: Tensor[(8, 3, 3, 3), float32]) {"
      " conv2d(%x, %w, strides=(1, 1), padding=(0, 0)) }");
  CHECK(type_equal(main_ret(m), tensor_type(Shape::of({1, 8, 30, 30}), BaseType::f32())));
}

TEST_CASE("broadcast violation is RelationFailed with a span") {
  try {
    testutil::typed(
        "def @main(%x: Tensor[(2, 3), float32], %y: Tensor[(4, 3), float32]) { add(%x, %y) }");
    FAIL("expected RelationFailed");
  } catch (const Diagnostic& d) {
    CHECK(d.code() == DiagCode::RelationFailed);
    CHECK(d.span().known());
    CHECK(d.message().find("Broadcast") != std::string::npos);
  }
}

TEST_CASE("unify binds symbolic dims") {
  TypeUnifier u;
  Shape partial;
  partial.dims = {Dim::constant(2), Dim::var("d")};
  TypeRef merged = u.unify(tensor_type(partial, BaseType::f32()),
                           tensor_type(Shape::of({2, 3}), BaseType::f32()));
  CHECK(type_equal(u.resolve(merged), tensor_type(Shape::of({2, 3}), BaseType::f32())));
  // the binding is global to the unifier: ?d resolves to 3 everywhere
  Shape just_d;
  just_d.dims = {Dim::var("d")};
  CHECK(type_equal(u.resolve(tensor_type(just_d, BaseType::f32())),
                   tensor_type(Shape::of({3}), BaseType::f32())));
}

TEST_CASE("unify rejects dtype conflicts") {
  TypeUnifier u;
  CHECK(diag_code_of([&] {
          u.unify(tensor_type(Shape::of({2}), BaseType::f32()),
                  tensor_type(Shape::of({2}), BaseType::i8()));
        }) == DiagCode::UnificationError);
}

TEST_CASE("Any absorbs concrete dims and stays Any") {
  TypeUnifier u;
  Shape any_s;
  any_s.dims = {Dim::any(), Dim::constant(3)};
  TypeRef merged = u.unify(tensor_type(any_s, BaseType::f32()),
                           tensor_type(Shape::of({7, 3}), BaseType::f32()));
  TypeRef r = u.resolve(merged);
  CHECK(r->shape.dims[0].is_any());
  CHECK(r->shape.dims[1] == Dim::constant(3));
}

TEST_CASE("occurs check rejects infinite types") {
  TypeUnifier u;
  TypeRef h = u.fresh_hole();
  CHECK(diag_code_of([&] { u.unify(h, tuple_type({h})); }) == DiagCode::UnificationError);
}

TEST_CASE("dense chain with a symbolic middle dim solves by propagation") {
  SolverTrace trace;
  ModuleEnv m = parse_module(
      "def @main(%x: Tensor[(4, 5), float32], %w1: Tensor[(?m, 5), float32],"
      " %w2: Tensor[(7, ?m), float32]) { dense(dense(%x, %w1), %w2) }");
  ModuleEnv typed = infer(m, &trace);
  TypeRef ret = main_ret(typed);
  CHECK(type_equal(ret, tensor_type(Shape::of({4, 7}), BaseType::f32())));
  // solved by propagation within two visits of any relation
  int max_visits = 0;
  for (int id : trace.dequeued) max_visits = std::max(max_visits, trace.visit_count(id));
  CHECK(max_visits <= 2);
}

TEST_CASE("an unconstrained variable in a relation is Underconstrained") {
  CHECK(diag_code_of([] {
          testutil::typed("def @main() { let %f = fn(%y) { sum(%y) }; const 0 }");
        }) == DiagCode::Underconstrained);
}

TEST_CASE("a solved relation is never revisited") {
  SolverTrace trace;
  ModuleEnv m = parse_module("def @main(%x: Tensor[(2), float32]) { add(%x, %x) }");
  infer(m, &trace);
  // exactly one relation, visited exactly once
  REQUIRE(!trace.dequeued.empty());
  CHECK(trace.visit_count(trace.dequeued[0]) == 1);
  // event order: no dequeue after discharge for any relation
  std::map<int, bool> done;
  for (const auto& [kind, id] : trace.events) {
    if (kind == 'q') CHECK_FALSE(done[id]);
    if (kind == 'd') done[id] = true;
  }
}

TEST_CASE("assignments move adjacent relations to the queue front") {
  SolverTrace trace;
  // The projection relation stays stuck until split's relation assigns the
  // tuple type; the requeue must put it at the front.
  ModuleEnv m = parse_module(
      "def @main(%x: Tensor[(4), float32]) {"
      " let %p = split(%x, indices=(2), axis=0); add(%p.0, %p.1) }");
  infer(m, &trace);
  CHECK(!trace.requeues.empty());
  bool found_prefix = false;
  for (size_t s = 0; s + 1 < trace.queue_snapshots.size(); ++s) {
    for (const auto& moved : trace.requeues) {
      const auto& snap = trace.queue_snapshots[s];
      if (snap.size() >= moved.size() &&
          std::equal(moved.begin(), moved.end(), snap.begin()))
        found_prefix = true;
    }
  }
  CHECK(found_prefix);
}

TEST_CASE("inference is deterministic") {
  std::mt19937 rng(29);
  for (int i = 0; i < 10; ++i) {
    auto prog = testgen::random_program(rng, 8);
    ModuleEnv a = testutil::typed(prog.text);
    ModuleEnv b = testutil::typed(prog.text);
    CHECK(print_type(a.globals.at("main")->checked_type) ==
          print_type(b.globals.at("main")->checked_type));
    CHECK(print_module(a) == print_module(b));
  }
}

TEST_CASE("interpreter results carry exactly the inferred type") {
  std::mt19937 rng(31);
  for (int i = 0; i < 30; ++i) {
    auto prog = testgen::random_program(rng, 8);
    ModuleEnv m = testutil::typed(prog.text);
    std::vector<ValueRef> args;
    REQUIRE(testutil::random_inputs_for(m, "main", rng, &args));
    ValueRef out = testutil::run_main(m, args);
    CHECK(type_equal(value_type(out), main_ret(m)));
  }
}

TEST_CASE("unannotated top-level definitions generalize") {
  ModuleEnv m = testutil::typed(
      "def @id(%x) { %x }\n"
      "def @main(%a: Tensor[(2), float32]) { let %u = @id(const 1); @id(%a) }");
  TypeRef id_t = m.globals.at("id")->checked_type;
  REQUIRE(id_t->kind == TypeKind::Func);
  CHECK(!id_t->type_params.empty());
  CHECK(type_equal(main_ret(m), tensor_type(Shape::of({2}), BaseType::f32())));
}

TEST_CASE("recursive globals require parameter annotations") {
  CHECK(diag_code_of([] {
          testutil::typed("def @loop(%x) { @loop(%x) }\ndef @main() { const 0 }");
        }) == DiagCode::Underconstrained);
}

TEST_CASE("if condition must be a scalar bool") {
  CHECK(diag_code_of([] {
          testutil::typed("def @main(%x: Tensor[(), float32]) { if (%x) { %x } else { %x } }");
        }) == DiagCode::UnificationError);
}

TEST_CASE("match clause results unify") {
  CHECK(diag_code_of([] {
          testutil::typed(R"(
type P { A, B }
def @main(%x: Tensor[(), float32], %p: Tensor[(), bool]) {
  match A {
    A => { %x },
    B => { %p },
  }
}
)");
        }) == DiagCode::UnificationError);
}

TEST_SUITE_END();
