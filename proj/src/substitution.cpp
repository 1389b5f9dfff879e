#include "pdlsl/substitution.hpp"

#include <algorithm>
#include <set>

#include "pdlsl/errors.hpp"
#include "pdlsl/printer.hpp"

namespace pdlsl {

const Definition* DefEnv::find(const std::string& name) const {
  for (const auto& d : defs)
    if (d.name == name) return &d;
  return nullptr;
}

namespace {

void free_vars_term(const Term& t, std::map<std::string, Sort>& out) {
  if (t.is_var()) out.emplace(t.name, t.sort);
}

void free_vars_action(const ActionExpr& a, std::map<std::string, Sort>& out) {
  if (a.kind == ActionExpr::Kind::Skip) return;
  free_vars_term(a.art, out);
  if (a.kind == ActionExpr::Kind::Move) free_vars_term(a.dir, out);
}

void free_vars_prog(const Program& p, std::map<std::string, Sort>& out) {
  switch (p.kind) {
    case Program::Kind::Atomic:
      free_vars_action(p.atom, out);
      break;
    case Program::Kind::Star:
      free_vars_prog(*p.left, out);
      break;
    default:
      free_vars_prog(*p.left, out);
      free_vars_prog(*p.right, out);
  }
}

void free_vars_walk(const Expr& e, std::vector<std::string>& bound,
                    std::map<std::string, Sort>& out) {
  auto is_bound = [&](const std::string& n) {
    return std::find(bound.begin(), bound.end(), n) != bound.end();
  };
  switch (e.kind) {
    case Expr::Kind::Top:
      break;
    case Expr::Kind::Atom: {
      std::map<std::string, Sort> local;
      free_vars_term(e.atom.a, local);
      free_vars_term(e.atom.b, local);
      if (e.atom.kind == AtomExpr::Kind::Dir) free_vars_term(e.atom.dir, local);
      for (auto& [n, s] : local)
        if (!is_bound(n)) out.emplace(n, s);
      break;
    }
    case Expr::Kind::Not:
      free_vars_walk(*e.left, bound, out);
      break;
    case Expr::Kind::And:
      free_vars_walk(*e.left, bound, out);
      free_vars_walk(*e.right, bound, out);
      break;
    case Expr::Kind::Box: {
      std::map<std::string, Sort> local;
      free_vars_prog(*e.prog, local);
      for (auto& [n, s] : local)
        if (!is_bound(n)) out.emplace(n, s);
      free_vars_walk(*e.left, bound, out);
      break;
    }
    case Expr::Kind::Var:
      if (!is_bound(e.name)) out.emplace(e.name, e.sort);
      break;
    case Expr::Kind::TermArg:
      if (e.term.is_var() && !is_bound(e.term.name))
        out.emplace(e.term.name, e.term.sort);
      break;
    case Expr::Kind::Lambda: {
      size_t base = bound.size();
      for (const auto& p : e.params) bound.push_back(p.name);
      free_vars_walk(*e.left, bound, out);
      bound.resize(base);
      break;
    }
    case Expr::Kind::Apply:
      for (const auto& a : e.args) free_vars_walk(*a, bound, out);
      break;
  }
}

using Subst = std::map<std::string, ExprPtr>;

Term subst_term(const Term& t, const Subst& values, Sort slot) {
  if (!t.is_var()) return t;
  auto it = values.find(t.name);
  if (it == values.end()) return t;
  const Expr& v = *it->second;
  if (v.kind != Expr::Kind::TermArg)
    throw DataError("sort mismatch: formula '" + print_formula(v) +
                    "' substituted into a " + sort_name(slot) + " position");
  if (v.term.sort != slot)
    throw DataError("sort mismatch: " + std::string(sort_name(v.term.sort)) +
                    " term '" + v.term.name + "' substituted into a " +
                    sort_name(slot) + " position");
  return v.term;
}

ActionExpr subst_action(const ActionExpr& a, const Subst& values) {
  switch (a.kind) {
    case ActionExpr::Kind::Skip:
      return a;
    case ActionExpr::Kind::Trill:
      return make_trill_action(subst_term(a.art, values, Sort::Articulator));
    case ActionExpr::Kind::Move:
      return make_move_action(subst_term(a.art, values, Sort::Articulator),
                              subst_term(a.dir, values, Sort::Direction));
  }
  return a;
}

ProgramPtr subst_prog(const ProgramPtr& p, const Subst& values) {
  switch (p->kind) {
    case Program::Kind::Atomic:
      return make_atomic(subst_action(p->atom, values));
    case Program::Kind::Star:
      return make_star(subst_prog(p->left, values));
    case Program::Kind::Intersect:
      return make_intersect(subst_prog(p->left, values),
                            subst_prog(p->right, values));
    case Program::Kind::Union:
      return make_union(subst_prog(p->left, values),
                        subst_prog(p->right, values));
    case Program::Kind::Seq:
      return make_seq(subst_prog(p->left, values),
                      subst_prog(p->right, values));
  }
  return p;
}

std::string fresh_name(const std::string& base,
                       const std::set<std::string>& avoid) {
  for (int i = 1;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (!avoid.count(candidate)) return candidate;
  }
}

ExprPtr subst_walk(const ExprPtr& e, const Subst& values);

ExprPtr subst_lambda(const Expr& lam, const Subst& values) {
  // Drop substitutions shadowed by the binder.
  Subst inner = values;
  for (const auto& p : lam.params) inner.erase(p.name);

  // Rename binders that would capture a free variable of a pending value.
  std::set<std::string> pending_free;
  for (const auto& [n, v] : inner) {
    (void)n;
    for (const auto& [fn, fs] : free_vars(*v)) {
      (void)fs;
      pending_free.insert(fn);
    }
  }
  std::vector<LambdaParam> params = lam.params;
  ExprPtr body = lam.left;
  if (!inner.empty()) {
    std::set<std::string> avoid = pending_free;
    collect_names(*body, avoid);
    for (const auto& p : params) avoid.insert(p.name);
    Subst renames;
    for (auto& p : params) {
      if (!pending_free.count(p.name)) continue;
      std::string renamed = fresh_name(p.name, avoid);
      avoid.insert(renamed);
      renames[p.name] = make_term_arg(Term::variable(renamed, p.sort));
      p.name = renamed;
    }
    if (!renames.empty()) body = subst_walk(body, renames);
  }
  if (inner.empty()) return make_lambda(std::move(params), body);
  return make_lambda(std::move(params), subst_walk(body, inner));
}

ExprPtr subst_walk(const ExprPtr& e, const Subst& values) {
  switch (e->kind) {
    case Expr::Kind::Top:
      return e;
    case Expr::Kind::Atom: {
      AtomExpr a = e->atom;
      switch (a.kind) {
        case AtomExpr::Kind::Dir:
          a = make_dir_atom(subst_term(a.a, values, Sort::Articulator),
                            subst_term(a.dir, values, Sort::Direction),
                            subst_term(a.b, values, Sort::Articulator));
          break;
        case AtomExpr::Kind::Cfg:
          a = make_cfg_atom(subst_term(a.a, values, Sort::Articulator),
                            subst_term(a.b, values, Sort::Config));
          break;
        case AtomExpr::Kind::At:
          a = make_at_atom(subst_term(a.a, values, Sort::Articulator),
                           subst_term(a.b, values, Sort::Place));
          break;
        case AtomExpr::Kind::Touch:
          a = make_touch_atom(subst_term(a.a, values, Sort::Articulator),
                              subst_term(a.b, values, Sort::Articulator));
          break;
      }
      return make_prop(std::move(a));
    }
    case Expr::Kind::Not:
      return make_not(subst_walk(e->left, values));
    case Expr::Kind::And:
      return make_and(subst_walk(e->left, values),
                      subst_walk(e->right, values));
    case Expr::Kind::Box:
      return make_box(subst_prog(e->prog, values),
                      subst_walk(e->left, values));
    case Expr::Kind::Var: {
      auto it = values.find(e->name);
      if (it == values.end()) return e;
      const Expr& v = *it->second;
      if (v.kind == Expr::Kind::TermArg) {
        if (v.term.is_var() && v.term.sort == Sort::Posture)
          return make_var(v.term.name, Sort::Posture);
        throw DataError("sort mismatch: " +
                        std::string(sort_name(v.term.sort)) + " term '" +
                        v.term.name + "' substituted into a formula position");
      }
      return it->second;
    }
    case Expr::Kind::TermArg: {
      if (!e->term.is_var()) return e;
      auto it = values.find(e->term.name);
      if (it == values.end()) return e;
      return it->second;
    }
    case Expr::Kind::Lambda:
      return subst_lambda(*e, values);
    case Expr::Kind::Apply: {
      std::vector<ExprPtr> args;
      args.reserve(e->args.size());
      for (const auto& a : e->args) args.push_back(subst_walk(a, values));
      return make_apply(e->name, std::move(args));
    }
  }
  return e;
}

class Reducer {
 public:
  Reducer(const DefEnv& env) : env_(env) {}

  ExprPtr reduce(const ExprPtr& e) {
    switch (e->kind) {
      case Expr::Kind::Top:
      case Expr::Kind::Atom:
      case Expr::Kind::Var:
      case Expr::Kind::TermArg:
        return e;
      case Expr::Kind::Not:
        return make_not(reduce(e->left));
      case Expr::Kind::And:
        return make_and(reduce(e->left), reduce(e->right));
      case Expr::Kind::Box:
        return make_box(e->prog, reduce(e->left));
      case Expr::Kind::Lambda:
        return make_lambda(e->params, reduce(e->left));
      case Expr::Kind::Apply:
        return apply(*e);
    }
    return e;
  }

 private:
  const DefEnv& env_;
  std::map<std::string, ExprPtr> memo_;
  std::vector<std::string> stack_;

  ExprPtr reduce_def(const std::string& name) {
    auto hit = memo_.find(name);
    if (hit != memo_.end()) return hit->second;
    const Definition* def = env_.find(name);
    if (!def) throw DataError("unknown definition '" + name + "'");
    if (std::find(stack_.begin(), stack_.end(), name) != stack_.end()) {
      std::string chain;
      for (const auto& n : stack_) chain += n + " -> ";
      throw DataError("cyclic definitions: " + chain + name);
    }
    stack_.push_back(name);
    ExprPtr reduced = reduce(def->value);
    stack_.pop_back();
    memo_[name] = reduced;
    return reduced;
  }

  ExprPtr apply(const Expr& app) {
    ExprPtr callee = reduce_def(app.name);
    if (app.args.empty()) return callee;
    if (callee->kind != Expr::Kind::Lambda)
      throw DataError("arity mismatch: '" + app.name +
                      "' is not a lambda but is applied to " +
                      std::to_string(app.args.size()) + " argument(s)");
    const auto& params = callee->params;
    if (params.size() != app.args.size())
      throw DataError("arity mismatch: '" + app.name + "' takes " +
                      std::to_string(params.size()) + " argument(s), got " +
                      std::to_string(app.args.size()));
    Subst values;
    for (size_t i = 0; i < params.size(); ++i)
      values[params[i].name] = coerce_arg(reduce(app.args[i]), params[i],
                                          app.name);
    return subst_walk(callee->left, values);
  }

  // Checks an argument against the parameter sort. Constants that exist in
  // several catalogs (e.g. HEAD as articulator and place) are re-sorted to
  // the parameter's sort here.
  ExprPtr coerce_arg(const ExprPtr& arg, const LambdaParam& param,
                     const std::string& callee) {
    if (arg->kind == Expr::Kind::TermArg) {
      const Term& t = arg->term;
      if (t.is_var()) {
        if (t.sort != param.sort)
          throw DataError("sort mismatch applying '" + callee +
                          "': variable '" + t.name + "' has sort " +
                          sort_name(t.sort) + ", parameter '" + param.name +
                          "' wants " + sort_name(param.sort));
        return arg;
      }
      bool ok = false;
      const Catalogs* cat = env_.catalogs;
      switch (param.sort) {
        case Sort::Articulator:
          ok = cat && cat->has_articulator(t.name);
          break;
        case Sort::Place:
          ok = cat && cat->has_place(t.name);
          break;
        case Sort::Config:
          ok = cat && cat->has_config(t.name);
          break;
        case Sort::Direction:
          ok = direction_from_name(t.name).has_value();
          break;
        case Sort::Posture:
          ok = false;
          break;
      }
      if (!ok)
        throw DataError("sort mismatch applying '" + callee + "': '" +
                        t.name + "' is not a valid " + sort_name(param.sort) +
                        " for parameter '" + param.name + "'");
      return make_term_arg(Term::constant(t.name, param.sort));
    }
    // Formula-shaped argument: only Posture parameters accept one.
    if (param.sort != Sort::Posture)
      throw DataError("sort mismatch applying '" + callee +
                      "': formula argument given for " +
                      std::string(sort_name(param.sort)) + " parameter '" +
                      param.name + "'");
    return arg;
  }
};

}  // namespace

std::map<std::string, Sort> free_vars(const Expr& e) {
  std::map<std::string, Sort> out;
  std::vector<std::string> bound;
  free_vars_walk(e, bound, out);
  return out;
}

ExprPtr substitute(const ExprPtr& e,
                   const std::map<std::string, ExprPtr>& values) {
  if (values.empty()) return e;
  return subst_walk(e, values);
}

ExprPtr beta_reduce(const ExprPtr& e, const DefEnv& defs) {
  return Reducer(defs).reduce(e);
}

}  // namespace pdlsl
