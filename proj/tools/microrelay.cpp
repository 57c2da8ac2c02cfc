// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: check / opt / run / fmt over .rly files.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "microrelay/analysis.hpp"
#include "microrelay/infer.hpp"
#include "microrelay/interp.hpp"
#include "microrelay/parser.hpp"
#include "microrelay/passes.hpp"
#include "microrelay/prelude.hpp"
#include "microrelay/printer.hpp"

namespace {

using namespace microrelay;

constexpr int kExitOk = 0;
constexpr int kExitDiagnostic = 1;
constexpr int kExitUsage = 2;

bool read_file(const std::string& path, std::string* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  *out = ss.str();
  return true;
}

ModuleEnv load_module(const std::string& path) {
  std::string text;
  if (!read_file(path, &text))
    throw std::ios_base::failure("cannot read " + path);
  ModuleEnv prelude = load_prelude(ModuleEnv{});
  return parse_module_with_base(text, path, prelude);
}

// The prelude is implicitly in scope; keep printed output focused on the
// user's definitions. Prelude names are reserved (shadowing them is an
// error), so filtering by name is sound even after passes rewrite bodies.
std::string print_user_module(const ModuleEnv& m) {
  ModuleEnv prelude = load_prelude(ModuleEnv{});
  ModuleEnv view = m;
  for (const auto& [name, fn] : prelude.globals) view.globals.erase(name);
  for (const auto& [name, def] : prelude.adts) view.adts.erase(name);
  return print_module(view);
}

int64_t fuel_from_env() {
  if (const char* s = std::getenv("MICRORELAY_FUEL")) {
    char* end = nullptr;
    long long v = std::strtoll(s, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return InterpOptions{}.fuel;
}

int cmd_check(const std::string& path) {
  ModuleEnv m = infer(load_module(path));
  ModuleEnv prelude = load_prelude(ModuleEnv{});
  for (const auto& [name, fn] : m.globals) {
    if (prelude.globals.count(name)) continue;
    std::cout << "@" << name << " : " << print_type(fn->checked_type) << "\n";
  }
  return kExitOk;
}

int cmd_fmt(const std::string& path) {
  std::cout << print_user_module(load_module(path));
  return kExitOk;
}

int cmd_opt(const std::string& path, const std::string& passes, const std::string& calib_path,
            const std::string& entry) {
  ModuleEnv m = load_module(path);
  PassContext ctx = PassContext::from_pass_list(passes);
  ctx.entry = entry;
  if (!calib_path.empty()) {
    std::string text;
    if (!read_file(calib_path, &text))
      throw std::ios_base::failure("cannot read " + calib_path);
    // Each line binds one calibration tensor; one input set per line, in
    // the entry function's parameter order for single-parameter entries.
    for (const auto& [name, lit] : parse_input_bindings(text, calib_path))
      ctx.calibration_inputs.push_back({make_tensor_value(lit)});
  }
  ModuleEnv optimized = run_pipeline(m, ctx);
  std::cout << print_user_module(optimized);
  return kExitOk;
}

int cmd_run(const std::string& path, const std::string& entry, const std::string& inputs_path) {
  ModuleEnv m = infer(load_module(path));
  ExprRef fn = m.global(entry);

  std::map<std::string, TensorLiteral> bindings;
  if (!inputs_path.empty()) {
    std::string text;
    if (!read_file(inputs_path, &text))
      throw std::ios_base::failure("cannot read " + inputs_path);
    bindings = parse_input_bindings(text, inputs_path);
  }

  std::vector<ValueRef> args;
  TypeUnifier checker;
  const TypeRef& fn_type = fn->checked_type;
  for (size_t i = 0; i < fn->params.size(); ++i) {
    auto it = bindings.find(fn->params[i].name);
    if (it == bindings.end())
      diag_throw(DiagCode::TypeMismatch,
                 "no input provided for parameter %" + fn->params[i].name);
    // Inputs must satisfy the declared parameter types before execution.
    if (fn_type && fn_type->kind == TypeKind::Func)
      checker.unify(it->second.type(), fn_type->arg_types[i]);
    args.push_back(make_tensor_value(it->second));
  }

  InterpOptions opts;
  opts.fuel = fuel_from_env();
  ValueRef result = interp(m, entry, args, opts);
  std::cout << print_value(result) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MicroRelay: a small tensor-program compiler and interpreter"};
  app.require_subcommand(1);

  std::string file, passes, entry = "main", inputs_path, calib_path;

  auto* check = app.add_subcommand("check", "Parse and typecheck a module");
  check->add_option("file", file, ".rly source file")->required();

  auto* opt = app.add_subcommand("opt", "Run optimization passes and print the module");
  opt->add_option("file", file, ".rly source file")->required();
  opt->add_option("--passes", passes, "comma-separated pass list, e.g. fuse,fold,layout=NHWC")
      ->required();
  opt->add_option("--calib", calib_path, "calibration inputs for the quantize pass");
  opt->add_option("--entry", entry, "entry function for calibration (default main)");

  auto* run = app.add_subcommand("run", "Interpret a module");
  run->add_option("file", file, ".rly source file")->required();
  run->add_option("--entry", entry, "entry global (default main)");
  run->add_option("--inputs", inputs_path, "sidecar file of named tensor inputs");

  auto* fmt = app.add_subcommand("fmt", "Parse and pretty-print a module");
  fmt->add_option("file", file, ".rly source file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check(file);
    if (opt->parsed()) return cmd_opt(file, passes, calib_path, entry);
    if (run->parsed()) return cmd_run(file, entry, inputs_path);
    if (fmt->parsed()) return cmd_fmt(file);
  } catch (const microrelay::Diagnostic& d) {
    std::cerr << d.what() << "\n";
    return kExitDiagnostic;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitDiagnostic;
  }
  return kExitUsage;
}
