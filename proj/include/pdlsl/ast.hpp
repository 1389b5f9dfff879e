#pragma once

// Abstract syntax for the modal sign-description logic: atomic propositions
// and actions over catalog symbols, regular action programs, formulas, and
// the lambda-template layer on top of them.
//
// Formulas keep exactly five primitive forms (Top, Atom, Not, And, Box);
// Or/Implies/Diamond are constructor-level sugar and expand immediately.
// Template nodes (Var, TermArg, Lambda, Apply) live in the same tree and are
// eliminated by beta reduction; a tree without them is a ground formula the
// checker accepts.

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "pdlsl/catalog.hpp"

namespace pdlsl {

// One argument slot of an atom or action: a catalog constant or a
// lambda-bound variable of the slot's sort.
struct Term {
  enum class Kind { Const, Var };
  Kind kind = Kind::Const;
  std::string name;
  Sort sort = Sort::Articulator;

  static Term constant(std::string id, Sort s);
  static Term variable(std::string name, Sort s);
  bool is_var() const { return kind == Kind::Var; }
  bool operator==(const Term& o) const {
    return kind == o.kind && name == o.name && sort == o.sort;
  }
};

// Atomic propositions: relative direction, configuration, articulation
// place, touch. Touch arguments are kept in lexicographic order so that
// touch(a,b) and touch(b,a) are the same atom.
struct AtomExpr {
  enum class Kind { Dir, Cfg, At, Touch };
  Kind kind = Kind::Dir;
  Term a;    // first articulator
  Term b;    // second articulator (Dir/Touch), config (Cfg), place (At)
  Term dir;  // Dir only

  bool operator==(const AtomExpr& o) const {
    return kind == o.kind && a == o.a && b == o.b && dir == o.dir;
  }
};

AtomExpr make_dir_atom(Term b1, Term dir, Term b2);
AtomExpr make_cfg_atom(Term b, Term config);
AtomExpr make_at_atom(Term b, Term place);
AtomExpr make_touch_atom(Term b1, Term b2);

// Re-applies Touch canonicalization after substitution may have turned a
// variable argument into a constant.
AtomExpr canonicalize_atom(const AtomExpr& atom);

// Atomic actions: directed move, trill (rapid motion without direction),
// and skip, which matches any transition and carries no parameters.
struct ActionExpr {
  enum class Kind { Move, Trill, Skip };
  Kind kind = Kind::Skip;
  Term art;
  Term dir;  // Move only

  bool operator==(const ActionExpr& o) const {
    return kind == o.kind && art == o.art && dir == o.dir;
  }
};

ActionExpr make_move_action(Term art, Term dir);
ActionExpr make_trill_action(Term art);
ActionExpr make_skip_action();

// Regular programs over atomic actions.
struct Program;
using ProgramPtr = std::shared_ptr<const Program>;

struct Program {
  enum class Kind { Atomic, Intersect, Union, Seq, Star };
  Kind kind = Kind::Atomic;
  ActionExpr atom;          // Atomic
  ProgramPtr left, right;   // binary forms; Star uses left only
};

ProgramPtr make_atomic(ActionExpr a);
ProgramPtr make_intersect(ProgramPtr l, ProgramPtr r);
ProgramPtr make_union(ProgramPtr l, ProgramPtr r);
ProgramPtr make_seq(ProgramPtr l, ProgramPtr r);
ProgramPtr make_star(ProgramPtr p);

// Right-nested union of move(b, d) for each direction in canonical order
// (E, NE, N, NW, W, SW, S, SE) followed by trill(b). This is the whole
// meaning of the `moves(b)` macro; it is not an AST node of its own.
ProgramPtr expand_moves(const Term& articulator,
                        const std::vector<Direction>& dirs);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct LambdaParam {
  std::string name;
  Sort sort = Sort::Config;
  bool operator==(const LambdaParam& o) const {
    return name == o.name && sort == o.sort;
  }
};

struct Expr {
  enum class Kind {
    Top,      // true
    Atom,     // atomic proposition
    Not,      // !left
    And,      // left & right
    Box,      // [prog] left
    Var,      // formula-position variable (Posture-sorted)
    TermArg,  // a bare term; only valid as an application argument
    Lambda,   // \params.(left)
    Apply     // name(args)
  };
  Kind kind = Kind::Top;
  AtomExpr atom;                    // Atom
  ExprPtr left, right;              // Not/And/Box/Lambda children
  ProgramPtr prog;                  // Box
  std::string name;                 // Var / Apply
  Sort sort = Sort::Posture;        // Var
  Term term;                        // TermArg
  std::vector<LambdaParam> params;  // Lambda
  std::vector<ExprPtr> args;        // Apply
};

ExprPtr make_top();
ExprPtr make_prop(AtomExpr a);
ExprPtr make_not(ExprPtr e);
ExprPtr make_and(ExprPtr l, ExprPtr r);
ExprPtr make_box(ProgramPtr p, ExprPtr body);
ExprPtr make_var(std::string name, Sort sort);
ExprPtr make_term_arg(Term t);
ExprPtr make_lambda(std::vector<LambdaParam> params, ExprPtr body);
ExprPtr make_apply(std::string name, std::vector<ExprPtr> args);

// Derived forms; expansion happens here, the tree never stores them.
// or(a,b)      == !(!a & !b)
// implies(a,b) == !(a & !b)
// diamond(p,a) == ![p]!a
ExprPtr make_or(ExprPtr l, ExprPtr r);
ExprPtr make_implies(ExprPtr l, ExprPtr r);
ExprPtr make_diamond(ProgramPtr p, ExprPtr body);

bool equal(const Program& a, const Program& b);
bool equal(const Expr& a, const Expr& b);
inline bool equal(const ProgramPtr& a, const ProgramPtr& b) {
  return equal(*a, *b);
}
inline bool equal(const ExprPtr& a, const ExprPtr& b) { return equal(*a, *b); }

// Ground = no template machinery left: no Var/TermArg/Lambda/Apply nodes and
// no variable terms inside atoms or programs.
bool is_ground(const Program& p);
bool is_ground(const Expr& e);

// Collects every identifier occurring in the tree (variable names, constant
// ids, definition names); used to pick fresh binder names.
void collect_names(const Expr& e, std::set<std::string>& out);

}  // namespace pdlsl
