// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "microrelay/analysis.hpp"
#include "support/generators.hpp"
#include "support/testutil.hpp"

using namespace microrelay;
using testutil::diag_code_of;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool modules_alpha_equal(const ModuleEnv& a, const ModuleEnv& b) {
  if (a.globals.size() != b.globals.size()) return false;
  for (const auto& [name, fn] : a.globals) {
    auto it = b.globals.find(name);
    if (it == b.globals.end() || !alpha_equal(fn, it->second)) return false;
  }
  return a.adts.size() == b.adts.size();
}

}  // namespace

TEST_SUITE_BEGIN("text_format");

TEST_CASE("parses a one-global module") {
  ModuleEnv m = parse_module("def @id(%x: Tensor[(2), float32]) { %x }");
  REQUIRE(m.globals.size() == 1);
  CHECK(m.globals.count("id") == 1);
  CHECK(m.globals.at("id")->params.size() == 1);
}

TEST_CASE("parses the recursive loop shape with if/else and a tail call") {
  const char* src = R"(
def @while_loop(%i: Tensor[(), int32], %j: Tensor[(), int32], %k: Tensor[(), int32]) -> (Tensor[(), int32], Tensor[(), int32], Tensor[(), int32]) {
  if (min_reduce(equal(not_equal(less(add(%i, %j), const 10), less(multiply(%j, %k), const 100)), greater_equal(%k, add(%i, %j))))) {
    @while_loop(add(%i, %j), add(%j, %k), add(%k, const 1))
  } else {
    (%i, %j, %k)
  }
}
)";
  ModuleEnv m = parse_module(src);
  CHECK(m.globals.count("while_loop") == 1);
  CHECK_NOTHROW(infer(m));
}

TEST_CASE("meta reference with empty pool is MetaIndexOutOfRange") {
  CHECK(diag_code_of([] {
          parse_module("def @main() { meta[Constant][0] }");
        }) == DiagCode::MetaIndexOutOfRange);
}

TEST_CASE("parse errors carry spans and an expected set") {
  try {
    parse_module("def @main( { %x }");
    FAIL("expected SyntaxError");
  } catch (const Diagnostic& d) {
    CHECK(d.code() == DiagCode::SyntaxError);
    CHECK(d.span().known());
    CHECK(d.message().find("expected") != std::string::npos);
  }
}

TEST_CASE("round trip over the corpus is alpha-equal") {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(MICRORELAY_CORPUS_DIR)) {
    if (entry.path().extension() != ".rly") continue;
    ++seen;
    std::string text = read_file(entry.path());
    ModuleEnv once = parse_module(text, entry.path().filename().string());
    std::string printed = print_module(once);
    ModuleEnv twice = parse_module(printed, "printed");
    CHECK_MESSAGE(modules_alpha_equal(once, twice), entry.path().filename().string());
  }
  CHECK(seen >= 30);
}

TEST_CASE("printing is deterministic") {
  std::mt19937 rng(3);
  auto prog = testgen::random_program(rng, 10);
  ModuleEnv m = parse_module(prog.text);
  CHECK(print_module(m) == print_module(m));
}

TEST_CASE("large constants round-trip through the metadata pool") {
  std::vector<float> data(32);
  for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(i) * 0.5f;
  ModuleEnv m;
  m.set_global("main",
               mk_fn({}, mk_opcall("relu", {mk_const(TensorLiteral::from_f32(Shape::of({32}), data))}),
                     nullptr));
  std::string printed = print_module(m);
  CHECK(printed.find("metadata {") != std::string::npos);
  CHECK(printed.find("meta[Constant][0]") != std::string::npos);
  ModuleEnv again = parse_module(printed);
  CHECK(modules_alpha_equal(m, again));
}

TEST_CASE("scalar float constant prints its value and dtype exactly once") {
  ModuleEnv m;
  m.set_global("main", mk_fn({}, mk_const(TensorLiteral::scalar_f32(1.5f)), nullptr));
  std::string printed = print_module(m);
  CHECK(printed.find("const 1.5") != std::string::npos);
  // scalar sugar leaves no explicit dtype token
  CHECK(printed.find("float32)") == std::string::npos);
}

TEST_CASE("Primitive function attribute survives the round trip") {
  const char* src = R"(
def @main(%x: Tensor[(2), float32]) {
  let %k = fn(%a: Tensor[(2), float32]) [Primitive=true] { relu(%a) };
  %k(%x)
}
)";
  ModuleEnv m = parse_module(src);
  ModuleEnv again = parse_module(print_module(m));
  CHECK(modules_alpha_equal(m, again));
  CHECK(print_module(again).find("Primitive=true") != std::string::npos);
}

TEST_CASE("round trip over random well-typed programs") {
  std::mt19937 rng(17);
  for (int i = 0; i < 60; ++i) {
    auto prog = testgen::random_program(rng, 10);
    ModuleEnv once = parse_module(prog.text);
    ModuleEnv twice = parse_module(print_module(once));
    CHECK(modules_alpha_equal(once, twice));
  }
}

TEST_CASE("float literals round-trip bit-exactly") {
  TensorLiteral lit = TensorLiteral::scalar_f32(0.1f);
  ModuleEnv m;
  m.set_global("main", mk_fn({}, mk_const(lit), nullptr));
  ModuleEnv again = parse_module(print_module(m));
  CHECK(again.globals.at("main")->a->literal.same_as(lit));
}

TEST_CASE("random token soup never crashes the parser") {
  static const char* tokens[] = {"def",  "@f",   "let",  "%x",  "=",     "(",    ")",
                                 "{",    "}",    "[",    "]",   "if",    "else", "match",
                                 "fn",   "const", "1",    "2.5", "add",  ",",    ";",
                                 ":",    "->",   ":=",   "!",   "Tensor", "float32", "ref",
                                 "Cons", "_",    "=>",   "<",   ">",     "meta", "where"};
  std::mt19937 rng(23);
  int parsed_ok = 0;
  for (int i = 0; i < 300; ++i) {
    std::ostringstream soup;
    int len = std::uniform_int_distribution<int>(1, 30)(rng);
    for (int k = 0; k < len; ++k)
      soup << tokens[std::uniform_int_distribution<size_t>(0, std::size(tokens) - 1)(rng)] << " ";
    try {
      parse_module(soup.str());
      ++parsed_ok;
    } catch (const Diagnostic&) {
      // errors are the expected outcome; crashes are not
    }
  }
  CHECK(parsed_ok >= 0);
}

TEST_CASE("comments and exponent literals parse") {
  ModuleEnv m = parse_module(R"(
// leading comment
def @main() {
  let %a = const 1.5e2; // trailing comment
  add(%a, const -2.5e-1)
}
)");
  CHECK_NOTHROW(infer(m));
}

TEST_CASE("input bindings sidecar parses named constants") {
  auto binds = parse_input_bindings("%x = const([1.0, 2.0], (2), float32)\n%n = const 7\n");
  REQUIRE(binds.size() == 2);
  CHECK(binds.at("x").num_elements() == 2);
  CHECK(binds.at("n").get_int(0) == 7);
}

TEST_SUITE_END();
