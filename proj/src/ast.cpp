#include "pdlsl/ast.hpp"

#include <stdexcept>
#include <utility>

#include "pdlsl/errors.hpp"

namespace pdlsl {

Term Term::constant(std::string id, Sort s) {
  Term t;
  t.kind = Kind::Const;
  t.name = std::move(id);
  t.sort = s;
  return t;
}

Term Term::variable(std::string name, Sort s) {
  Term t;
  t.kind = Kind::Var;
  t.name = std::move(name);
  t.sort = s;
  return t;
}

AtomExpr make_dir_atom(Term b1, Term dir, Term b2) {
  if (!b1.is_var() && !b2.is_var() && b1.name == b2.name)
    throw DataError("dir atom needs two distinct articulators, got '" +
                    b1.name + "' twice");
  AtomExpr a;
  a.kind = AtomExpr::Kind::Dir;
  a.a = std::move(b1);
  a.dir = std::move(dir);
  a.b = std::move(b2);
  return a;
}

AtomExpr make_cfg_atom(Term b, Term config) {
  AtomExpr a;
  a.kind = AtomExpr::Kind::Cfg;
  a.a = std::move(b);
  a.b = std::move(config);
  return a;
}

AtomExpr make_at_atom(Term b, Term place) {
  AtomExpr a;
  a.kind = AtomExpr::Kind::At;
  a.a = std::move(b);
  a.b = std::move(place);
  return a;
}

AtomExpr make_touch_atom(Term b1, Term b2) {
  if (!b1.is_var() && !b2.is_var() && b1.name == b2.name)
    throw DataError("touch atom needs two distinct articulators, got '" +
                    b1.name + "' twice");
  AtomExpr a;
  a.kind = AtomExpr::Kind::Touch;
  // Canonical argument order: touch(a,b) == touch(b,a).
  if (!b1.is_var() && !b2.is_var() && b2.name < b1.name) std::swap(b1, b2);
  a.a = std::move(b1);
  a.b = std::move(b2);
  return a;
}

AtomExpr canonicalize_atom(const AtomExpr& atom) {
  if (atom.kind == AtomExpr::Kind::Touch)
    return make_touch_atom(atom.a, atom.b);
  if (atom.kind == AtomExpr::Kind::Dir)
    return make_dir_atom(atom.a, atom.dir, atom.b);
  return atom;
}

ActionExpr make_move_action(Term art, Term dir) {
  ActionExpr a;
  a.kind = ActionExpr::Kind::Move;
  a.art = std::move(art);
  a.dir = std::move(dir);
  return a;
}

ActionExpr make_trill_action(Term art) {
  ActionExpr a;
  a.kind = ActionExpr::Kind::Trill;
  a.art = std::move(art);
  return a;
}

ActionExpr make_skip_action() { return ActionExpr{}; }

namespace {
ProgramPtr node(Program p) { return std::make_shared<Program>(std::move(p)); }
ExprPtr enode(Expr e) { return std::make_shared<Expr>(std::move(e)); }
}  // namespace

ProgramPtr make_atomic(ActionExpr a) {
  Program p;
  p.kind = Program::Kind::Atomic;
  p.atom = std::move(a);
  return node(std::move(p));
}

ProgramPtr make_intersect(ProgramPtr l, ProgramPtr r) {
  Program p;
  p.kind = Program::Kind::Intersect;
  p.left = std::move(l);
  p.right = std::move(r);
  return node(std::move(p));
}

ProgramPtr make_union(ProgramPtr l, ProgramPtr r) {
  Program p;
  p.kind = Program::Kind::Union;
  p.left = std::move(l);
  p.right = std::move(r);
  return node(std::move(p));
}

ProgramPtr make_seq(ProgramPtr l, ProgramPtr r) {
  Program p;
  p.kind = Program::Kind::Seq;
  p.left = std::move(l);
  p.right = std::move(r);
  return node(std::move(p));
}

ProgramPtr make_star(ProgramPtr inner) {
  Program p;
  p.kind = Program::Kind::Star;
  p.left = std::move(inner);
  return node(std::move(p));
}

ProgramPtr expand_moves(const Term& articulator,
                        const std::vector<Direction>& dirs) {
  if (dirs.empty()) throw DataError("moves expansion needs >= 1 direction");
  std::vector<Direction> ordered;
  for (int i = 0; i < kDirectionCount; ++i) {
    Direction d = static_cast<Direction>(i);
    for (Direction x : dirs)
      if (x == d) {
        ordered.push_back(d);
        break;
      }
  }
  ProgramPtr acc = make_atomic(make_trill_action(articulator));
  for (auto it = ordered.rbegin(); it != ordered.rend(); ++it) {
    Term dir = Term::constant(direction_name(*it), Sort::Direction);
    acc = make_union(make_atomic(make_move_action(articulator, dir)),
                     std::move(acc));
  }
  return acc;
}

ExprPtr make_top() { return enode(Expr{}); }

ExprPtr make_prop(AtomExpr a) {
  Expr e;
  e.kind = Expr::Kind::Atom;
  e.atom = std::move(a);
  return enode(std::move(e));
}

ExprPtr make_not(ExprPtr inner) {
  Expr e;
  e.kind = Expr::Kind::Not;
  e.left = std::move(inner);
  return enode(std::move(e));
}

ExprPtr make_and(ExprPtr l, ExprPtr r) {
  Expr e;
  e.kind = Expr::Kind::And;
  e.left = std::move(l);
  e.right = std::move(r);
  return enode(std::move(e));
}

ExprPtr make_box(ProgramPtr p, ExprPtr body) {
  Expr e;
  e.kind = Expr::Kind::Box;
  e.prog = std::move(p);
  e.left = std::move(body);
  return enode(std::move(e));
}

ExprPtr make_var(std::string name, Sort sort) {
  Expr e;
  e.kind = Expr::Kind::Var;
  e.name = std::move(name);
  e.sort = sort;
  return enode(std::move(e));
}

ExprPtr make_term_arg(Term t) {
  Expr e;
  e.kind = Expr::Kind::TermArg;
  e.term = std::move(t);
  return enode(std::move(e));
}

ExprPtr make_lambda(std::vector<LambdaParam> params, ExprPtr body) {
  if (params.empty()) throw DataError("lambda needs >= 1 parameter");
  Expr e;
  e.kind = Expr::Kind::Lambda;
  e.params = std::move(params);
  e.left = std::move(body);
  return enode(std::move(e));
}

ExprPtr make_apply(std::string name, std::vector<ExprPtr> args) {
  Expr e;
  e.kind = Expr::Kind::Apply;
  e.name = std::move(name);
  e.args = std::move(args);
  return enode(std::move(e));
}

ExprPtr make_or(ExprPtr l, ExprPtr r) {
  return make_not(make_and(make_not(std::move(l)), make_not(std::move(r))));
}

ExprPtr make_implies(ExprPtr l, ExprPtr r) {
  return make_not(make_and(std::move(l), make_not(std::move(r))));
}

ExprPtr make_diamond(ProgramPtr p, ExprPtr body) {
  return make_not(make_box(std::move(p), make_not(std::move(body))));
}

bool equal(const Program& a, const Program& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Program::Kind::Atomic:
      return a.atom == b.atom;
    case Program::Kind::Star:
      return equal(*a.left, *b.left);
    default:
      return equal(*a.left, *b.left) && equal(*a.right, *b.right);
  }
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Top:
      return true;
    case Expr::Kind::Atom:
      return a.atom == b.atom;
    case Expr::Kind::Not:
      return equal(*a.left, *b.left);
    case Expr::Kind::And:
      return equal(*a.left, *b.left) && equal(*a.right, *b.right);
    case Expr::Kind::Box:
      return equal(*a.prog, *b.prog) && equal(*a.left, *b.left);
    case Expr::Kind::Var:
      return a.name == b.name && a.sort == b.sort;
    case Expr::Kind::TermArg:
      return a.term == b.term;
    case Expr::Kind::Lambda:
      return a.params == b.params && equal(*a.left, *b.left);
    case Expr::Kind::Apply: {
      if (a.name != b.name || a.args.size() != b.args.size()) return false;
      for (size_t i = 0; i < a.args.size(); ++i)
        if (!equal(*a.args[i], *b.args[i])) return false;
      return true;
    }
  }
  return false;
}

namespace {

bool ground_term(const Term& t) { return !t.is_var(); }

bool ground_atom(const AtomExpr& a) {
  switch (a.kind) {
    case AtomExpr::Kind::Dir:
      return ground_term(a.a) && ground_term(a.dir) && ground_term(a.b);
    default:
      return ground_term(a.a) && ground_term(a.b);
  }
}

bool ground_action(const ActionExpr& a) {
  switch (a.kind) {
    case ActionExpr::Kind::Move:
      return ground_term(a.art) && ground_term(a.dir);
    case ActionExpr::Kind::Trill:
      return ground_term(a.art);
    case ActionExpr::Kind::Skip:
      return true;
  }
  return true;
}

}  // namespace

bool is_ground(const Program& p) {
  switch (p.kind) {
    case Program::Kind::Atomic:
      return ground_action(p.atom);
    case Program::Kind::Star:
      return is_ground(*p.left);
    default:
      return is_ground(*p.left) && is_ground(*p.right);
  }
}

bool is_ground(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Top:
      return true;
    case Expr::Kind::Atom:
      return ground_atom(e.atom);
    case Expr::Kind::Not:
      return is_ground(*e.left);
    case Expr::Kind::And:
      return is_ground(*e.left) && is_ground(*e.right);
    case Expr::Kind::Box:
      return is_ground(*e.prog) && is_ground(*e.left);
    default:
      return false;
  }
}

namespace {

void collect_names(const Program& p, std::set<std::string>& out) {
  switch (p.kind) {
    case Program::Kind::Atomic:
      if (p.atom.kind != ActionExpr::Kind::Skip) out.insert(p.atom.art.name);
      if (p.atom.kind == ActionExpr::Kind::Move) out.insert(p.atom.dir.name);
      break;
    case Program::Kind::Star:
      collect_names(*p.left, out);
      break;
    default:
      collect_names(*p.left, out);
      collect_names(*p.right, out);
  }
}

}  // namespace

void collect_names(const Expr& e, std::set<std::string>& out) {
  switch (e.kind) {
    case Expr::Kind::Top:
      break;
    case Expr::Kind::Atom:
      out.insert(e.atom.a.name);
      out.insert(e.atom.b.name);
      if (e.atom.kind == AtomExpr::Kind::Dir) out.insert(e.atom.dir.name);
      break;
    case Expr::Kind::Not:
      collect_names(*e.left, out);
      break;
    case Expr::Kind::And:
      collect_names(*e.left, out);
      collect_names(*e.right, out);
      break;
    case Expr::Kind::Box:
      collect_names(*e.prog, out);
      collect_names(*e.left, out);
      break;
    case Expr::Kind::Var:
      out.insert(e.name);
      break;
    case Expr::Kind::TermArg:
      out.insert(e.term.name);
      break;
    case Expr::Kind::Lambda:
      for (const auto& p : e.params) out.insert(p.name);
      collect_names(*e.left, out);
      break;
    case Expr::Kind::Apply:
      out.insert(e.name);
      for (const auto& a : e.args) collect_names(*a, out);
      break;
  }
}

}  // namespace pdlsl
