#pragma once

// Deterministic concrete syntax. parse_formula(print_formula(e)) is
// structurally equal to e for any tree the parser can produce.

#include <string>

#include "pdlsl/ast.hpp"

namespace pdlsl {

std::string print_formula(const Expr& e);
inline std::string print_formula(const ExprPtr& e) { return print_formula(*e); }

std::string print_program(const Program& p);
inline std::string print_program(const ProgramPtr& p) {
  return print_program(*p);
}

// Canonical string identity of ground atoms/actions; used as model-state
// keys and in the LTS JSON interchange format.
std::string atom_key(const AtomExpr& a);
std::string action_key(const ActionExpr& a);

}  // namespace pdlsl
