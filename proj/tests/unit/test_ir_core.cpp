// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "microrelay/analysis.hpp"
#include "support/generators.hpp"
#include "support/testutil.hpp"

using namespace microrelay;
using testutil::diag_code_of;

TEST_SUITE_BEGIN("ir_core");

TEST_CASE("free_vars of a closed function is empty") {
  ExprRef e = parse_expr("fn(%x) { %x }");
  CHECK(free_vars(e).empty());
}

TEST_CASE("free_vars reports unbound call arguments in first-use order") {
  ExprRef e = parse_expr("add(%x, %y)");
  CHECK(free_vars(e) == std::vector<std::string>{"x", "y"});
}

TEST_CASE("free_vars sees through let bindings") {
  ExprRef e = parse_expr("let %a = %x; add(%a, %x)");
  CHECK(free_vars(e) == std::vector<std::string>{"x"});
}

TEST_CASE("alpha_equal renames bound variables") {
  CHECK(alpha_equal(parse_expr("fn(%x) { %x }"), parse_expr("fn(%y) { %y }")));
  CHECK_FALSE(alpha_equal(parse_expr("fn(%x) { %x }"), parse_expr("fn(%x) { %z }")));
  CHECK(alpha_equal(parse_expr("let %a = const 1; %a"), parse_expr("let %b = const 1; %b")));
}

namespace {

// Tiny independent de Bruijn canonicalizer (vars, lets, fns, calls,
// constants) used as the oracle for alpha equivalence on simple terms.
std::string debruijn(const ExprRef& e, std::vector<std::string>& bound) {
  std::ostringstream os;
  switch (e->kind) {
    case ExprKind::LocalVar: {
      for (size_t i = bound.size(); i-- > 0;) {
        if (bound[i] == e->name) {
          os << "#" << bound.size() - 1 - i;
          return os.str();
        }
      }
      os << "free:" << e->name;
      return os.str();
    }
    case ExprKind::Constant:
      os << "const:" << e->literal.get_double(0);
      return os.str();
    case ExprKind::OperatorRef:
      return "op:" + e->name;
    case ExprKind::Call: {
      std::string s = "(" + debruijn(e->a, bound);
      for (const auto& arg : e->elems) s += " " + debruijn(arg, bound);
      return s + ")";
    }
    case ExprKind::Let: {
      std::string v = debruijn(e->a, bound);
      bound.push_back(e->name);
      std::string b = debruijn(e->b, bound);
      bound.pop_back();
      return "(let " + v + " " + b + ")";
    }
    case ExprKind::Function: {
      for (const auto& p : e->params) bound.push_back(p.name);
      std::string b = debruijn(e->a, bound);
      bound.resize(bound.size() - e->params.size());
      return "(fn/" + std::to_string(e->params.size()) + " " + b + ")";
    }
    default:
      return "?";
  }
}

std::string canon(const ExprRef& e) {
  std::vector<std::string> bound;
  return debruijn(e, bound);
}

}  // namespace

TEST_CASE("alpha_equal agrees with a de Bruijn canonicalization oracle") {
  const char* terms[] = {
      "let %a = const 1; %a",
      "let %b = const 1; %b",
      "let %a = const 2; %a",
      "fn(%x, %y) { add(%x, %y) }",
      "fn(%u, %v) { add(%u, %v) }",
      "fn(%u, %v) { add(%v, %u) }",
      "let %a = const 1; let %b = const 2; add(%a, %b)",
      "let %b = const 1; let %a = const 2; add(%b, %a)",
      "add(%free, const 1)",
      "add(%other, const 1)",
  };
  for (const char* sa : terms) {
    for (const char* sb : terms) {
      ExprRef a = parse_expr(sa);
      ExprRef b = parse_expr(sb);
      CHECK_MESSAGE(alpha_equal(a, b) == (canon(a) == canon(b)), sa, " vs ", sb);
    }
  }
}

TEST_CASE("alpha_equal is an equivalence relation on generated terms") {
  std::mt19937 rng(7);
  std::vector<ExprRef> terms;
  for (int i = 0; i < 20; ++i) {
    auto prog = testgen::random_program(rng, 6);
    ModuleEnv m = parse_module(prog.text);
    terms.push_back(m.globals.at("main"));
    // a printed-and-reparsed variant shares alpha structure
    ModuleEnv m2 = parse_module(print_module(m));
    terms.push_back(m2.globals.at("main"));
  }
  for (const auto& t : terms) CHECK(alpha_equal(t, t));  // reflexive
  for (size_t i = 0; i + 1 < terms.size(); i += 2) {
    CHECK(alpha_equal(terms[i], terms[i + 1]));  // print/reparse variant
    CHECK(alpha_equal(terms[i + 1], terms[i]));  // symmetric
  }
  // transitivity across three alpha-variants of one term
  ModuleEnv a = parse_module(testgen::random_program(rng, 5).text);
  ModuleEnv b = parse_module(print_module(a));
  ModuleEnv c = parse_module(print_module(b));
  CHECK(alpha_equal(a.globals.at("main"), b.globals.at("main")));
  CHECK(alpha_equal(b.globals.at("main"), c.globals.at("main")));
  CHECK(alpha_equal(a.globals.at("main"), c.globals.at("main")));
}

TEST_CASE("structural_hash is stable under alpha renaming") {
  CHECK(structural_hash(parse_expr("fn(%x) { add(%x, %x) }")) ==
        structural_hash(parse_expr("fn(%q) { add(%q, %q) }")));
  CHECK(structural_hash(parse_expr("fn(%x) { add(%x, %x) }")) !=
        structural_hash(parse_expr("fn(%x) { multiply(%x, %x) }")));
}

TEST_CASE("check_well_formed accepts the identity module") {
  ModuleEnv m = parse_module("def @main(%x: Tensor[(2), float32]) { %x }");
  CHECK_NOTHROW(check_well_formed(m));
}

TEST_CASE("check_well_formed rejects unbound variables with the offending name") {
  ModuleEnv m;
  m.set_global("main", mk_fn({{"x", nullptr}}, mk_var("q"), nullptr));
  try {
    check_well_formed(m);
    FAIL("expected UnboundVariable");
  } catch (const Diagnostic& d) {
    CHECK(d.code() == DiagCode::UnboundVariable);
    CHECK(d.message().find("q") != std::string::npos);
  }
}

TEST_CASE("check_well_formed rejects malformed literals") {
  TensorLiteral bad;
  bad.dtype = BaseType::i32();
  bad.shape = Shape::of({2, 2});
  bad.data = std::vector<int64_t>{1, 2, 3};
  ModuleEnv m;
  m.set_global("main", mk_fn({}, mk_const(bad), nullptr));
  CHECK(diag_code_of([&] { check_well_formed(m); }) == DiagCode::MalformedLiteral);
}

TEST_CASE("check_well_formed rejects unknown operators and constructors") {
  ModuleEnv m;
  m.set_global("main", mk_fn({}, mk_opcall("frobnicate", {}), nullptr));
  CHECK(diag_code_of([&] { check_well_formed(m); }) == DiagCode::UnknownOperator);

  ModuleEnv m2;
  m2.set_global("main", mk_fn({}, mk_ctor("Zilch"), nullptr));
  CHECK(diag_code_of([&] { check_well_formed(m2); }) == DiagCode::UnknownConstructor);
}

TEST_CASE("to_anf binds compound subexpressions before use") {
  ExprRef e = parse_expr("add(multiply(%a, %b), %c)");
  ExprRef anf = to_anf(e);
  CHECK(is_anf(anf));
  ExprRef expected =
      parse_expr("let %t0 = multiply(%a, %b); let %t1 = add(%t0, %c); %t1");
  CHECK(alpha_equal(anf, expected));
}

TEST_CASE("to_anf leaves atoms unchanged") {
  ExprRef e = parse_expr("%x");
  CHECK(alpha_equal(to_anf(e), e));
}

TEST_CASE("graph let desugars to an ordinary binding used twice") {
  ExprRef e = parse_expr("%g = add(%a, %b); multiply(%g, %g)");
  CHECK(e->kind == ExprKind::Let);
  ExprRef anf = to_anf(e);
  CHECK(is_anf(anf));
  ExprRef expected =
      parse_expr("let %g = add(%a, %b); let %t = multiply(%g, %g); %t");
  CHECK(alpha_equal(anf, expected));
}

TEST_CASE("to_anf flattening does not capture shadowed names") {
  // let y = 1; let x = (let y = 2; y); add(x, y)  must stay add(2, 1)
  ExprRef e = parse_expr(
      "let %y = const 1; let %x = { let %y = const 2; %y }; add(%x, %y)");
  ModuleEnv m;
  m.set_global("main", mk_fn({}, e, nullptr));
  ModuleEnv manf = m;
  manf.set_global("main", mk_fn({}, to_anf(e), nullptr));
  ValueRef v1 = testutil::run_main(infer(m));
  ValueRef v2 = testutil::run_main(infer(manf));
  CHECK(v1->tensor.get_int(0) == 3);
  CHECK(testutil::values_close(v1, v2, 0.0));
}

TEST_CASE("to_anf preserves free variables and interpreter results") {
  std::mt19937 rng(11);
  for (int i = 0; i < 40; ++i) {
    auto prog = testgen::random_program(rng, 8);
    ModuleEnv m = testutil::typed(prog.text);
    ExprRef fn = m.globals.at("main");
    ExprRef anf_fn = to_anf(fn);
    CHECK(is_anf(anf_fn));
    CHECK(free_vars(fn) == free_vars(anf_fn));

    ModuleEnv manf = m;
    manf.set_global("main", anf_fn);
    manf = infer(manf);
    std::vector<ValueRef> args;
    REQUIRE(testutil::random_inputs_for(m, "main", rng, &args));
    ValueRef a = testutil::run_main(m, args);
    ValueRef b = testutil::run_main(manf, args);
    CHECK(testutil::values_close(a, b, 1e-6));
  }
}

TEST_CASE("module invariants: globals resolve, mutual recursion allowed") {
  const char* src = R"(
def @even(%n: Tensor[(), int32]) -> Tensor[(), bool] {
  if (equal(%n, const 0)) { const true } else { @odd(subtract(%n, const 1)) }
}
def @odd(%n: Tensor[(), int32]) -> Tensor[(), bool] {
  if (equal(%n, const 0)) { const false } else { @even(subtract(%n, const 1)) }
}
def @main() { @even(const 6) }
)";
  ModuleEnv m = testutil::typed(src);
  ValueRef v = testutil::run_main(m);
  CHECK(v->tensor.get_int(0) == 1);
}

TEST_SUITE_END();
