// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "microrelay/interp.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace microrelay;
using testutil::diag_code_of;

namespace {

TypeRef t_f32(const std::vector<int64_t>& dims) {
  return tensor_type(Shape::of(dims), BaseType::f32());
}

std::shared_ptr<OpRegistry> registry_with_custom() {
  auto reg = std::make_shared<OpRegistry>(*builtin_registry());
  OperatorDecl decl;
  decl.name = "myop";
  decl.arity = 2;
  decl.relation = "Broadcast";
  decl.pattern = FusionPattern::Broadcast;
  decl.eval = builtin_registry()->get("add").eval;
  reg->register_op(decl);
  return reg;
}

}  // namespace

TEST_SUITE_BEGIN("op_registry");

TEST_CASE("a registered custom operator typechecks like add") {
  auto reg = registry_with_custom();
  ModuleEnv ta = infer(parse_module(
      "def @main(%x: Tensor[(2, 3), float32], %y: Tensor[(1, 3), float32]) { myop(%x, %y) }",
      "<custom>", reg));
  ModuleEnv tb = infer(parse_module(
      "def @main(%x: Tensor[(2, 3), float32], %y: Tensor[(1, 3), float32]) { add(%x, %y) }",
      "<add>", reg));
  CHECK(type_equal(ta.globals.at("main")->checked_type, tb.globals.at("main")->checked_type));
}

TEST_CASE("re-registering a builtin is DuplicateOperator") {
  auto reg = std::make_shared<OpRegistry>(*builtin_registry());
  OperatorDecl decl;
  decl.name = "add";
  decl.arity = 2;
  decl.relation = "Broadcast";
  CHECK(diag_code_of([&] { reg->register_op(decl); }) == DiagCode::DuplicateOperator);
}

TEST_CASE("register then parse a program using the operator") {
  auto reg = registry_with_custom();
  ModuleEnv m = parse_module("def @main(%x: Tensor[(2), float32]) { myop(%x, %x) }", "<t>", reg);
  CHECK_NOTHROW(infer(m));
}

TEST_CASE("builtin registry contents and patterns") {
  auto reg = builtin_registry();
  for (const char* name :
       {"add", "subtract", "multiply", "divide", "negative", "exp", "tanh", "sigmoid", "relu",
        "reshape", "transpose", "squeeze", "expand_dims", "sum", "max_reduce", "min_reduce",
        "argmax", "dense", "conv2d", "bias_add", "concat", "split", "equal", "less",
        "greater_equal", "not_equal", "logical_and", "min", "max", "round", "clip", "cast",
        "simulated_quantize"}) {
    CHECK_MESSAGE(reg->contains(name), name);
  }
  CHECK(reg->get("conv2d").pattern == FusionPattern::ComplexOutFusable);
  CHECK(reg->get("dense").pattern == FusionPattern::ComplexOutFusable);
  CHECK(reg->get("split").pattern == FusionPattern::Opaque);
  CHECK(reg->get("concat").pattern == FusionPattern::Injective);
  CHECK(reg->find("nonexistent") == nullptr);
}

TEST_CASE("split's relation produces a tuple type") {
  AttrMap attrs;
  attrs["indices"] = std::vector<int64_t>{2};
  attrs["axis"] = int64_t{0};
  auto res = apply_relation("Split", {t_f32({4}), type_hole(0)}, attrs);
  REQUIRE(res.is_progress());
  REQUIRE(res.assignments.size() == 1);
  const TypeRef& out = res.assignments[0].second;
  REQUIRE(out->kind == TypeKind::Tuple);
  REQUIRE(out->fields.size() == 2);
  CHECK(type_equal(out->fields[0], t_f32({2})));
  CHECK(type_equal(out->fields[1], t_f32({2})));
}

TEST_CASE("broadcast relation computes the output from concrete inputs") {
  auto res = apply_relation("Broadcast", {t_f32({2, 3}), t_f32({1, 3}), type_hole(0)});
  REQUIRE(res.is_progress());
  REQUIRE(res.assignments.size() == 1);
  CHECK(type_equal(res.assignments[0].second, t_f32({2, 3})));
}

TEST_CASE("conv2d relation follows (H - K + 2P)/S + 1") {
  AttrMap attrs;
  attrs["strides"] = std::vector<int64_t>{1, 1};
  attrs["padding"] = std::vector<int64_t>{0, 0};
  auto res = apply_relation("Conv2D", {t_f32({1, 3, 32, 32}), t_f32({8, 3, 3, 3}), type_hole(0)},
                            attrs);
  REQUIRE(res.is_progress());
  auto expected = oracle::conv2d_nchw({1, 3, 32, 32}, {8, 3, 3, 3}, 1, 1, 0, 0);
  REQUIRE(expected.has_value());
  CHECK(type_equal(res.assignments[0].second, t_f32(*expected)));
  CHECK(type_equal(res.assignments[0].second, t_f32({1, 8, 30, 30})));
}

TEST_CASE("incompatible broadcast fails as a value, not an exception") {
  auto res = apply_relation("Broadcast", {t_f32({2, 3}), t_f32({4, 3}), type_hole(0)});
  CHECK(res.is_fails());
}

TEST_CASE("broadcast compatibility is symmetric") {
  std::mt19937 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto dims = [&](int) {
      std::vector<int64_t> d(std::uniform_int_distribution<int>(1, 3)(rng));
      for (auto& x : d) x = std::uniform_int_distribution<int64_t>(1, 4)(rng);
      return d;
    };
    auto s1 = dims(0), s2 = dims(0);
    auto r12 = apply_relation("Broadcast", {t_f32(s1), t_f32(s2), type_hole(0)});
    auto r21 = apply_relation("Broadcast", {t_f32(s2), t_f32(s1), type_hole(0)});
    CHECK(r12.is_fails() == r21.is_fails());
  }
}

TEST_CASE("relations are pure: same inputs, same outcome") {
  AttrMap attrs;
  attrs["newshape"] = std::vector<int64_t>{4, 2};
  auto a = apply_relation("Reshape", {t_f32({2, 4}), type_hole(0)}, attrs);
  auto b = apply_relation("Reshape", {t_f32({2, 4}), type_hole(0)}, attrs);
  REQUIRE(a.is_progress());
  REQUIRE(b.is_progress());
  CHECK(type_equal(a.assignments[0].second, b.assignments[0].second));
}

TEST_CASE("Any propagates and never fails on that position") {
  Shape s;
  s.dims = {Dim::any(), Dim::constant(3)};
  TypeRef any_t = tensor_type(s, BaseType::f32());
  auto res = apply_relation("Broadcast", {any_t, t_f32({7, 3}), type_hole(0)});
  REQUIRE(res.is_progress());
  const TypeRef& out = res.assignments[0].second;
  CHECK(out->shape.dims[0].is_any());
  CHECK(out->shape.dims[1] == Dim::constant(3));
}

TEST_CASE("kernel output type equals the relation's prediction on random inputs") {
  std::mt19937 rng(9);
  auto reg = builtin_registry();
  int checked = 0;
  for (int i = 0; i < 120; ++i) {
    // random elementwise/broadcast/reduce/dense cases
    std::vector<int64_t> dims(std::uniform_int_distribution<int>(1, 3)(rng));
    for (auto& d : dims) d = std::uniform_int_distribution<int64_t>(1, 4)(rng);
    int64_t n = 1;
    for (int64_t d : dims) n *= d;
    TensorLiteral lit = TensorLiteral::zeros(Shape::of(dims), BaseType::f32());
    for (int64_t k = 0; k < n; ++k)
      lit.set_double(k, std::uniform_real_distribution<double>(0.1, 1.0)(rng));
    ValueRef v = make_tensor_value(lit);

    struct Case {
      const char* op;
      std::vector<ValueRef> args;
      AttrMap attrs;
    };
    std::vector<Case> cases = {
        {"relu", {v}, {}},
        {"exp", {v}, {}},
        {"add", {v, v}, {}},
        {"multiply", {v, v}, {}},
        {"sum", {v}, {{"axis", std::vector<int64_t>{0}}}},
        {"equal", {v, v}, {}},
    };
    for (auto& c : cases) {
      const OperatorDecl& decl = reg->get(c.op);
      std::vector<TypeRef> slots;
      for (const auto& a : c.args) slots.push_back(a->tensor.type());
      slots.push_back(type_hole(0));
      auto rel = apply_relation(decl.relation, slots, c.attrs);
      REQUIRE(rel.is_progress());
      ValueRef out = eval_kernel(decl, c.args, c.attrs);
      CHECK(type_equal(value_type(out), rel.assignments[0].second));
      ++checked;
    }
  }
  CHECK(checked >= 100);
}

TEST_SUITE_END();
