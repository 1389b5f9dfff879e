#pragma once

// Concrete syntax for formulas, programs and lambda templates.
//
//   formulas:  true, !f, f & f, f | f, f -> f (right-assoc, loosest),
//              [prog] f, <prog> f,
//              dir(b1,D,b2), cfg(b,C), at(b,P), touch(b1,b2)
//   programs:  skip, move(b,D), trill(b), moves(b) macro,
//              p;p (tightest), p & p, p + p (loosest), postfix p*
//   lambdas:   \x:Sort, y:Sort . ( f )      application: name(a1, a2)
//
// Identifiers resolve against the catalogs and the enclosing lambda scope;
// sorts are checked at parse time.

#include <string>
#include <vector>

#include "pdlsl/ast.hpp"
#include "pdlsl/catalog.hpp"
#include "pdlsl/errors.hpp"

namespace pdlsl {

// Parses a single template expression (which may be a ground formula).
// line_offset shifts reported positions when the text comes from inside a
// larger file.
ExprPtr parse_formula(const std::string& text, const Catalogs& catalogs,
                      int line_offset = 0);

// Parses a standalone program (the text between [ and ]).
ProgramPtr parse_program_text(const std::string& text,
                              const Catalogs& catalogs, int line_offset = 0);

// Parses a ground atom in canonical key form, e.g. "dir(RH,W,LH)".
AtomExpr parse_atom_key(const std::string& text, const Catalogs& catalogs);

// Parses a ground action in canonical key form, e.g. "move(LH,NE)".
ActionExpr parse_action_key(const std::string& text, const Catalogs& catalogs);

struct Definition {
  std::string name;
  ExprPtr value;
  int line = 0;
};

// Definition-file body: one `name = expr` per line, '#' comments, later
// definitions may reference earlier ones. Duplicate names are an error.
std::vector<Definition> parse_definitions(const std::string& text,
                                          const Catalogs& catalogs,
                                          const std::string& origin = "<db>");

}  // namespace pdlsl
