// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/prelude.hpp"

#include "microrelay/analysis.hpp"
#include "microrelay/parser.hpp"

namespace microrelay {

const std::string& prelude_source() {
  static const std::string source = R"PRELUDE(
// Standard ADT library.

type List[a] {
  Nil,
  Cons(a, List[a]),
}

type Option[a] {
  None,
  Some(a),
}

type Tree[a] {
  Leaf,
  Node(Tree[a], a, Tree[a]),
}

def @map<a, b>(%f: fn(a) -> b, %xs: List[a]) -> List[b] {
  match %xs {
    Nil => { Nil },
    Cons(%h, %t) => { Cons(%f(%h), @map(%f, %t)) },
  }
}

def @foldl<a, b>(%f: fn(b, a) -> b, %init: b, %xs: List[a]) -> b {
  match %xs {
    Nil => { %init },
    Cons(%h, %t) => { @foldl(%f, %f(%init, %h), %t) },
  }
}

def @foldr<a, b>(%f: fn(a, b) -> b, %init: b, %xs: List[a]) -> b {
  match %xs {
    Nil => { %init },
    Cons(%h, %t) => { %f(%h, @foldr(%f, %init, %t)) },
  }
}

def @length<a>(%xs: List[a]) -> Tensor[(), int32] {
  match %xs {
    Nil => { const 0 },
    Cons(%h, %t) => { add(const 1, @length(%t)) },
  }
}

// Traps with a match failure past the end of the list.
def @nth<a>(%xs: List[a], %n: Tensor[(), int32]) -> a {
  match %xs {
    Cons(%h, %t) => {
      if (equal(%n, const 0)) { %h } else { @nth(%t, subtract(%n, const 1)) }
    },
  }
}

def @sum_list(%xs: List[Tensor[(), int32]]) -> Tensor[(), int32] {
  @foldl(add, const 0, %xs)
}
)PRELUDE";
  return source;
}

ModuleEnv load_prelude(const ModuleEnv& m) {
  ModuleEnv prelude = parse_module(prelude_source(), "<prelude>", m.registry);
  ModuleEnv out = m;
  for (const auto& [name, def] : prelude.adts) {
    auto it = out.adts.find(name);
    if (it != out.adts.end()) {
      // Same declaration again is an idempotent load; anything else shadows.
      if (it->second.constructors.size() == def.constructors.size()) continue;
      diag_throw(DiagCode::NameCollision, "user type shadows prelude type " + name);
    }
    for (const auto& ctor : def.constructors) {
      if (out.find_constructor(ctor.name))
        diag_throw(DiagCode::NameCollision,
                   "user constructor shadows prelude constructor " + ctor.name);
    }
    out.adts[name] = def;
  }
  for (const auto& [name, fn] : prelude.globals) {
    auto it = out.globals.find(name);
    if (it != out.globals.end()) {
      if (alpha_equal(it->second, fn)) continue;  // already loaded
      diag_throw(DiagCode::NameCollision, "user global shadows prelude @" + name);
    }
    out.globals[name] = fn;
  }
  check_well_formed(out);
  return out;
}

}  // namespace microrelay
