#pragma once

// Capture-avoiding substitution and beta reduction of definition
// applications. Reduction resolves every Apply node against an acyclic
// definition environment; free variables may remain (they are what template
// checking enumerates over).

#include <map>
#include <string>
#include <vector>

#include "pdlsl/ast.hpp"
#include "pdlsl/catalog.hpp"
#include "pdlsl/parser.hpp"

namespace pdlsl {

struct DefEnv {
  const Catalogs* catalogs = nullptr;
  std::vector<Definition> defs;

  const Definition* find(const std::string& name) const;
};

// Free variables (term-level and formula-level) with their sorts.
std::map<std::string, Sort> free_vars(const Expr& e);

// Simultaneous capture-avoiding substitution. Values follow the argument
// conventions: TermArg for catalog terms and variable passing, any formula
// expression for Posture positions. Binders whose name occurs free in a
// value are renamed to a fresh name first.
ExprPtr substitute(const ExprPtr& e,
                   const std::map<std::string, ExprPtr>& values);

// Resolves every Apply; result contains no Apply nodes. Arity and sorts of
// application arguments are checked against the lambda parameters; cyclic
// definition chains are an error. Idempotent.
ExprPtr beta_reduce(const ExprPtr& e, const DefEnv& defs);

}  // namespace pdlsl
