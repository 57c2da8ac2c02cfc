// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "microrelay/expr.hpp"
#include "microrelay/module.hpp"

namespace microrelay {

/// Variables occurring free in `e`, in first-use order.
std::vector<std::string> free_vars(const ExprRef& e);

/// Equality up to consistent renaming of bound variables. Spans and
/// checked types are ignored; literals compare bitwise.
bool alpha_equal(const ExprRef& a, const ExprRef& b);

/// Hash consistent with alpha_equal (bound variables hash by binding depth).
uint64_t structural_hash(const ExprRef& e);

/// Checks that every variable/operator/constructor/global reference in the
/// module resolves and that tensor literals satisfy the length invariant.
/// Throws Diagnostic on the first violation.
void check_well_formed(const ModuleEnv& m);

/// Well-formedness of a single expression under a set of pre-bound
/// variables (used for fragments).
void check_well_formed(const ModuleEnv& m, const ExprRef& e,
                       const std::vector<std::string>& bound = {});

/// A-normal form: every compound subexpression (Call, Tuple, If, Match,
/// ref operations) is let-bound to a fresh variable before use. Atoms and
/// projections of atoms stay inline. Evaluation order is preserved.
ExprRef to_anf(const ExprRef& e);
ModuleEnv to_anf(const ModuleEnv& m);

/// True iff the expression is in the form to_anf produces (used by tests
/// and pass preconditions).
bool is_anf(const ExprRef& e);

/// Fresh-name generator that avoids every name bound or used in the seeds.
class NameSupply {
 public:
  explicit NameSupply(const std::vector<ExprRef>& seeds = {}, std::string prefix = "t");
  std::string fresh();
  void reserve(const std::string& name) { used_.push_back(name); }

 private:
  bool taken(const std::string& name) const;
  std::vector<std::string> used_;
  std::string prefix_;
  int counter_ = 0;
};

/// All variable names bound or referenced anywhere in the expression.
std::vector<std::string> all_var_names(const ExprRef& e);

}  // namespace microrelay
