#include "pdlsl/printer.hpp"

namespace pdlsl {

namespace {

// Program precedence: union < intersect < seq < star/atomic.
enum { P_UNION = 0, P_INTER = 1, P_SEQ = 2, P_POST = 3 };

int prog_prec(const Program& p) {
  switch (p.kind) {
    case Program::Kind::Union:
      return P_UNION;
    case Program::Kind::Intersect:
      return P_INTER;
    case Program::Kind::Seq:
      return P_SEQ;
    default:
      return P_POST;
  }
}

std::string prog_str(const Program& p, int min_prec) {
  std::string s;
  switch (p.kind) {
    case Program::Kind::Atomic:
      return action_key(p.atom);
    case Program::Kind::Star:
      return prog_str(*p.left, P_POST) + "*";
    case Program::Kind::Seq:
      s = prog_str(*p.left, P_SEQ + 1) + ";" + prog_str(*p.right, P_SEQ);
      break;
    case Program::Kind::Intersect:
      s = prog_str(*p.left, P_INTER + 1) + " & " + prog_str(*p.right, P_INTER);
      break;
    case Program::Kind::Union:
      s = prog_str(*p.left, P_UNION + 1) + " + " + prog_str(*p.right, P_UNION);
      break;
  }
  if (prog_prec(p) < min_prec) return "(" + s + ")";
  return s;
}

// Formula precedence: -> < | < & < unary < atoms. All binary operators are
// right-associative, matching the parser.
enum { F_IMP = 0, F_OR = 1, F_AND = 2, F_UNARY = 3, F_ATOM = 4 };

// Sugar patterns recovered at print time; each reparses to the same tree
// because the derived constructors perform the identical expansion.
bool match_or(const Expr& e, ExprPtr& l, ExprPtr& r) {
  if (e.kind != Expr::Kind::Not || e.left->kind != Expr::Kind::And)
    return false;
  const Expr& a = *e.left;
  if (a.left->kind != Expr::Kind::Not || a.right->kind != Expr::Kind::Not)
    return false;
  l = a.left->left;
  r = a.right->left;
  return true;
}

bool match_implies(const Expr& e, ExprPtr& l, ExprPtr& r) {
  if (e.kind != Expr::Kind::Not || e.left->kind != Expr::Kind::And)
    return false;
  const Expr& a = *e.left;
  if (a.right->kind != Expr::Kind::Not) return false;
  l = a.left;
  r = a.right->left;
  return true;
}

bool match_diamond(const Expr& e, ProgramPtr& p, ExprPtr& body) {
  if (e.kind != Expr::Kind::Not || e.left->kind != Expr::Kind::Box)
    return false;
  const Expr& b = *e.left;
  if (b.left->kind != Expr::Kind::Not) return false;
  p = b.prog;
  body = b.left->left;
  return true;
}

std::string expr_str(const Expr& e, int min_prec);

std::string wrap(std::string s, int prec, int min_prec) {
  if (prec < min_prec) return "(" + std::move(s) + ")";
  return s;
}

std::string expr_str(const Expr& e, int min_prec) {
  ExprPtr l, r;
  ProgramPtr p;
  if (match_or(e, l, r))
    return wrap(expr_str(*l, F_OR + 1) + " | " + expr_str(*r, F_OR), F_OR,
                min_prec);
  if (match_implies(e, l, r))
    return wrap(expr_str(*l, F_IMP + 1) + " -> " + expr_str(*r, F_IMP), F_IMP,
                min_prec);
  if (match_diamond(e, p, l))
    return wrap("<" + prog_str(*p, 0) + "> " + expr_str(*l, F_UNARY), F_UNARY,
                min_prec);
  switch (e.kind) {
    case Expr::Kind::Top:
      return "true";
    case Expr::Kind::Atom:
      return atom_key(e.atom);
    case Expr::Kind::Not:
      return wrap("!" + expr_str(*e.left, F_UNARY), F_UNARY, min_prec);
    case Expr::Kind::And:
      return wrap(expr_str(*e.left, F_AND + 1) + " & " +
                      expr_str(*e.right, F_AND),
                  F_AND, min_prec);
    case Expr::Kind::Box:
      return wrap("[" + prog_str(*e.prog, 0) + "] " +
                      expr_str(*e.left, F_UNARY),
                  F_UNARY, min_prec);
    case Expr::Kind::Var:
    case Expr::Kind::TermArg:
      return e.kind == Expr::Kind::Var ? e.name : e.term.name;
    case Expr::Kind::Lambda: {
      std::string s = "\\";
      for (size_t i = 0; i < e.params.size(); ++i) {
        if (i) s += ", ";
        s += e.params[i].name;
        s += ":";
        s += sort_name(e.params[i].sort);
      }
      s += " . ( " + expr_str(*e.left, 0) + " )";
      return wrap(std::move(s), F_UNARY, min_prec);
    }
    case Expr::Kind::Apply: {
      std::string s = e.name + "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += expr_str(*e.args[i], 0);
      }
      s += ")";
      return s;
    }
  }
  return "";
}

}  // namespace

std::string print_formula(const Expr& e) { return expr_str(e, 0); }

std::string print_program(const Program& p) { return prog_str(p, 0); }

std::string atom_key(const AtomExpr& a) {
  switch (a.kind) {
    case AtomExpr::Kind::Dir:
      return "dir(" + a.a.name + "," + a.dir.name + "," + a.b.name + ")";
    case AtomExpr::Kind::Cfg:
      return "cfg(" + a.a.name + "," + a.b.name + ")";
    case AtomExpr::Kind::At:
      return "at(" + a.a.name + "," + a.b.name + ")";
    case AtomExpr::Kind::Touch:
      return "touch(" + a.a.name + "," + a.b.name + ")";
  }
  return "";
}

std::string action_key(const ActionExpr& a) {
  switch (a.kind) {
    case ActionExpr::Kind::Move:
      return "move(" + a.art.name + "," + a.dir.name + ")";
    case ActionExpr::Kind::Trill:
      return "trill(" + a.art.name + ")";
    case ActionExpr::Kind::Skip:
      return "skip";
  }
  return "";
}

}  // namespace pdlsl
