#include "pdlsl/checker.hpp"

#include <algorithm>

#include "pdlsl/errors.hpp"
#include "pdlsl/parser.hpp"
#include "pdlsl/printer.hpp"

namespace pdlsl {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::True:
      return "true";
    case Verdict::False:
      return "false";
    case Verdict::Unknown:
      return "unknown";
  }
  return "";
}

namespace {

void sort_unique(Relation& r) {
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
}

Relation set_union(const Relation& a, const Relation& b) {
  Relation out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

Relation set_intersect(const Relation& a, const Relation& b) {
  Relation out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

// Relational composition a ; b.
Relation compose(const Relation& a, const Relation& b) {
  std::map<int, std::vector<int>> succ;
  for (const auto& [x, y] : b) succ[x].push_back(y);
  Relation out;
  for (const auto& [x, mid] : a) {
    auto it = succ.find(mid);
    if (it == succ.end()) continue;
    for (int y : it->second) out.emplace_back(x, y);
  }
  sort_unique(out);
  return out;
}

Relation denote(const Lts& m, const Program& prog) {
  switch (prog.kind) {
    case Program::Kind::Atomic: {
      Relation out;
      if (prog.atom.kind == ActionExpr::Kind::Skip) {
        for (const auto& e : m.edges) out.emplace_back(e.from, e.to);
      } else {
        std::string key = action_key(prog.atom);
        for (const auto& e : m.edges)
          if (e.actions.count(key)) out.emplace_back(e.from, e.to);
      }
      sort_unique(out);
      return out;
    }
    case Program::Kind::Union:
      return set_union(denote(m, *prog.left), denote(m, *prog.right));
    case Program::Kind::Intersect:
      return set_intersect(denote(m, *prog.left), denote(m, *prog.right));
    case Program::Kind::Seq:
      return compose(denote(m, *prog.left), denote(m, *prog.right));
    case Program::Kind::Star: {
      Relation base = denote(m, *prog.left);
      Relation closure;
      for (int s = 0; s < static_cast<int>(m.states.size()); ++s)
        closure.emplace_back(s, s);
      sort_unique(closure);
      // Semi-naive iteration: only newly discovered pairs are re-composed.
      Relation frontier = base;
      closure = set_union(closure, base);
      while (!frontier.empty()) {
        Relation next = compose(frontier, base);
        Relation fresh;
        std::set_difference(next.begin(), next.end(), closure.begin(),
                            closure.end(), std::back_inserter(fresh));
        closure = set_union(closure, fresh);
        frontier = std::move(fresh);
      }
      return closure;
    }
  }
  return {};
}

Verdict kleene_not(Verdict v) {
  if (v == Verdict::True) return Verdict::False;
  if (v == Verdict::False) return Verdict::True;
  return Verdict::Unknown;
}

Verdict kleene_and(Verdict a, Verdict b) {
  if (a == Verdict::False || b == Verdict::False) return Verdict::False;
  if (a == Verdict::True && b == Verdict::True) return Verdict::True;
  return Verdict::Unknown;
}

class Checker {
 public:
  Checker(const Lts& m, DenoteCache& cache) : m_(m), cache_(cache) {}

  const std::vector<Verdict>& run(const Expr& f) {
    auto hit = memo_.find(&f);
    if (hit != memo_.end()) return hit->second;
    std::vector<Verdict> v;
    const size_t n = m_.states.size();
    switch (f.kind) {
      case Expr::Kind::Top:
        v.assign(n, Verdict::True);
        break;
      case Expr::Kind::Atom: {
        std::string key = atom_key(f.atom);
        v.reserve(n);
        for (const auto& s : m_.states) {
          if (s.props_true.count(key))
            v.push_back(Verdict::True);
          else if (s.props_false.count(key))
            v.push_back(Verdict::False);
          else if (s.props_unknown.count(key))
            v.push_back(Verdict::Unknown);
          else
            throw DataError("atom '" + key +
                            "' is outside the model's universe");
        }
        break;
      }
      case Expr::Kind::Not: {
        const auto& inner = run(*f.left);
        v.reserve(n);
        for (Verdict x : inner) v.push_back(kleene_not(x));
        break;
      }
      case Expr::Kind::And: {
        const auto& l = run(*f.left);
        const auto& r = run(*f.right);
        v.reserve(n);
        for (size_t i = 0; i < n; ++i) v.push_back(kleene_and(l[i], r[i]));
        break;
      }
      case Expr::Kind::Box: {
        const Relation& rel = cache_.get(*f.prog);
        const auto& body = run(*f.left);
        v.assign(n, Verdict::True);  // vacuously true without successors
        for (const auto& [from, to] : rel) {
          Verdict at_succ = body[static_cast<size_t>(to)];
          Verdict& cur = v[static_cast<size_t>(from)];
          if (at_succ == Verdict::False)
            cur = Verdict::False;
          else if (at_succ == Verdict::Unknown && cur == Verdict::True)
            cur = Verdict::Unknown;
        }
        break;
      }
      default:
        throw DataError("check: formula is not ground (" +
                        print_formula(f) + ")");
    }
    return memo_.emplace(&f, std::move(v)).first->second;
  }

 private:
  const Lts& m_;
  DenoteCache& cache_;
  std::map<const Expr*, std::vector<Verdict>> memo_;
};

}  // namespace

Relation denote_program(const Lts& m, const Program& prog) {
  return denote(m, prog);
}

const Relation& DenoteCache::get(const Program& prog) {
  std::string key = print_program(prog);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  return memo_.emplace(key, denote(m_, prog)).first->second;
}

std::vector<Verdict> check(const Lts& m, const Expr& formula,
                           DenoteCache& cache) {
  if (!is_ground(formula))
    throw DataError("check: formula is not ground: " + print_formula(formula));
  Checker c(m, cache);
  return c.run(formula);
}

std::vector<Verdict> check(const Lts& m, const Expr& formula) {
  DenoteCache cache(m);
  return check(m, formula, cache);
}

ExprPtr posture_conjunction(const Lts& m, int state,
                            const std::string& articulator,
                            const Catalogs& catalogs) {
  const StateNode& s = m.state(state);
  std::vector<ExprPtr> atoms;
  for (const auto& key : s.props_true) {
    AtomExpr atom = parse_atom_key(key, catalogs);
    bool mentions = atom.a.name == articulator;
    if (atom.kind == AtomExpr::Kind::Dir || atom.kind == AtomExpr::Kind::Touch)
      mentions = mentions || atom.b.name == articulator;
    if (mentions) atoms.push_back(make_prop(std::move(atom)));
  }
  if (atoms.empty()) return nullptr;
  ExprPtr conj = atoms.back();
  for (auto it = atoms.rbegin() + 1; it != atoms.rend(); ++it)
    conj = make_and(*it, conj);
  return conj;
}

namespace {

struct EnumVar {
  std::string name;
  Sort sort = Sort::Config;
};

// Collects enumeration variables: top-level lambda parameters first (in
// declaration order), then any other free variables sorted by name.
std::vector<EnumVar> enumeration_vars(ExprPtr& body) {
  std::vector<EnumVar> vars;
  while (body->kind == Expr::Kind::Lambda) {
    for (const auto& p : body->params) vars.push_back({p.name, p.sort});
    body = body->left;
  }
  auto frees = free_vars(*body);
  for (const auto& [name, sort] : frees) {
    bool seen = false;
    for (const auto& v : vars)
      if (v.name == name) seen = true;
    if (!seen) vars.push_back({name, sort});
  }
  return vars;
}

std::vector<std::string> domain_of(const EnumVar& v, const Catalogs& cat) {
  switch (v.sort) {
    case Sort::Articulator:
      return cat.articulators;
    case Sort::Place:
      return cat.places;
    case Sort::Config:
      return cat.configs;
    case Sort::Direction: {
      std::vector<std::string> names;
      for (Direction d : cat.directions) names.push_back(direction_name(d));
      return names;
    }
    case Sort::Posture:
      return {};  // state-dependent, handled separately
  }
  return {};
}

std::string binding_key(const Binding& b) {
  std::string s;
  for (const auto& [k, v] : b) s += k + "=" + v + ";";
  return s;
}

// Collapses per-state Unknown rows: a variable whose entire domain is
// unknown against every combination of the other variables reports one row
// with a "*" wildcard instead of one row per value.
void collapse_unknown(std::vector<Binding>& rows,
                      const std::vector<EnumVar>& vars,
                      const std::map<std::string, std::vector<std::string>>&
                          domains) {
  for (const auto& v : vars) {
    auto dom_it = domains.find(v.name);
    if (dom_it == domains.end() || dom_it->second.size() < 2) continue;
    const auto& domain = dom_it->second;
    std::map<std::string, std::vector<size_t>> groups;
    for (size_t i = 0; i < rows.size(); ++i) {
      Binding rest = rows[i];
      rest.erase(v.name);
      groups[binding_key(rest)].push_back(i);
    }
    std::vector<Binding> next;
    std::vector<bool> consumed(rows.size(), false);
    for (auto& [key, idxs] : groups) {
      (void)key;
      std::set<std::string> values;
      for (size_t i : idxs) {
        auto it = rows[i].find(v.name);
        if (it != rows[i].end()) values.insert(it->second);
      }
      bool full = values.size() == domain.size();
      if (full) {
        Binding collapsed = rows[idxs.front()];
        collapsed[v.name] = "*";
        next.push_back(std::move(collapsed));
        for (size_t i : idxs) consumed[i] = true;
      }
    }
    for (size_t i = 0; i < rows.size(); ++i)
      if (!consumed[i]) next.push_back(rows[i]);
    rows = std::move(next);
  }
  std::sort(rows.begin(), rows.end(),
            [](const Binding& a, const Binding& b) {
              return binding_key(a) < binding_key(b);
            });
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

}  // namespace

std::vector<TemplateResult> check_template(const Lts& m, const ExprPtr& tmpl,
                                           const DefEnv& defs, CheckMode mode) {
  if (!defs.catalogs) throw DataError("check_template: missing catalogs");
  const Catalogs& cat = *defs.catalogs;
  ExprPtr body = beta_reduce(tmpl, defs);
  std::vector<EnumVar> vars = enumeration_vars(body);

  std::vector<EnumVar> catalog_vars, posture_vars;
  std::map<std::string, std::vector<std::string>> domains;
  for (const auto& v : vars) {
    if (v.sort == Sort::Posture) {
      posture_vars.push_back(v);
      continue;
    }
    auto dom = domain_of(v, cat);
    if (dom.empty())
      throw DataError("check_template: variable '" + v.name +
                      "' has sort " + sort_name(v.sort) +
                      " but its catalog is empty");
    domains[v.name] = std::move(dom);
    catalog_vars.push_back(v);
  }

  DenoteCache denote_cache(m);
  std::map<std::string, std::vector<Verdict>> verdict_cache;
  auto check_cached = [&](const ExprPtr& ground) -> const std::vector<Verdict>& {
    std::string key = print_formula(*ground);
    auto it = verdict_cache.find(key);
    if (it != verdict_cache.end()) return it->second;
    return verdict_cache.emplace(key, check(m, *ground, denote_cache))
        .first->second;
  };

  struct Row {
    int state;
    Binding binding;
    Verdict verdict;
    ExprPtr grounded;
  };
  std::vector<Row> rows;

  // Enumerate catalog-sorted assignments once; posture candidates are
  // state-local (the posture of some articulator at that state).
  std::vector<size_t> idx(catalog_vars.size(), 0);
  for (;;) {
    Binding base_binding;
    std::map<std::string, ExprPtr> base_subst;
    for (size_t i = 0; i < catalog_vars.size(); ++i) {
      const auto& v = catalog_vars[i];
      const std::string& value = domains[v.name][idx[i]];
      base_binding[v.name] = value;
      base_subst[v.name] = make_term_arg(Term::constant(value, v.sort));
    }

    if (posture_vars.empty()) {
      ExprPtr grounded;
      try {
        grounded = substitute(body, base_subst);
      } catch (const DataError&) {
        grounded = nullptr;  // ill-sorted combination, e.g. touch(b,b)
      }
      if (grounded) {
        const auto& verdicts = check_cached(grounded);
        for (size_t s = 0; s < verdicts.size(); ++s)
          if (verdicts[s] != Verdict::False)
            rows.push_back({static_cast<int>(s), base_binding, verdicts[s],
                            grounded});
      }
    } else {
      for (size_t s = 0; s < m.states.size(); ++s) {
        // Candidate postures at this state: one per articulator with a
        // nonempty true-atom restriction.
        std::vector<std::pair<std::string, ExprPtr>> candidates;
        for (const auto& art : cat.articulators) {
          ExprPtr conj =
              posture_conjunction(m, static_cast<int>(s), art, cat);
          if (conj) candidates.emplace_back(art, std::move(conj));
        }
        std::vector<size_t> pidx(posture_vars.size(), 0);
        if (candidates.empty()) continue;
        for (;;) {
          Binding binding = base_binding;
          std::map<std::string, ExprPtr> subst = base_subst;
          for (size_t i = 0; i < posture_vars.size(); ++i) {
            const auto& [art, conj] = candidates[pidx[i]];
            binding[posture_vars[i].name] =
                art + ": " + print_formula(*conj);
            subst[posture_vars[i].name] = conj;
          }
          ExprPtr grounded;
          try {
            grounded = substitute(body, subst);
          } catch (const DataError&) {
            grounded = nullptr;
          }
          if (grounded) {
            const auto& verdicts = check_cached(grounded);
            if (verdicts[s] != Verdict::False)
              rows.push_back({static_cast<int>(s), binding, verdicts[s],
                              grounded});
          }
          size_t k = 0;
          for (; k < pidx.size(); ++k) {
            if (++pidx[k] < candidates.size()) break;
            pidx[k] = 0;
          }
          if (k == pidx.size()) break;
        }
      }
    }

    size_t k = 0;
    for (; k < idx.size(); ++k) {
      if (++idx[k] < domains[catalog_vars[k].name].size()) break;
      idx[k] = 0;
    }
    if (k == idx.size()) break;
  }

  // Assemble results: True rows always; Unknown rows in optimistic mode,
  // wildcard-collapsed per state.
  std::vector<TemplateResult> out;
  for (size_t s = 0; s < m.states.size(); ++s) {
    std::vector<Binding> unknown;
    std::map<std::string, ExprPtr> unknown_grounded;
    for (const auto& r : rows) {
      if (r.state != static_cast<int>(s)) continue;
      if (r.verdict == Verdict::True)
        out.push_back({r.state, r.binding, Verdict::True, r.grounded});
      else if (mode == CheckMode::Optimistic) {
        unknown.push_back(r.binding);
        unknown_grounded[binding_key(r.binding)] = r.grounded;
      }
    }
    if (mode == CheckMode::Optimistic && !unknown.empty()) {
      std::vector<Binding> collapsed = unknown;
      collapse_unknown(collapsed, catalog_vars, domains);
      for (const auto& b : collapsed) {
        auto exact = unknown_grounded.find(binding_key(b));
        ExprPtr grounded =
            exact != unknown_grounded.end() ? exact->second : nullptr;
        if (!grounded) {
          // Wildcarded binding: keep a representative grounded formula.
          for (const auto& orig : unknown) {
            bool matches = true;
            for (const auto& [k, v] : b)
              if (v != "*" && orig.at(k) != v) matches = false;
            if (matches) {
              grounded = unknown_grounded.at(binding_key(orig));
              break;
            }
          }
        }
        out.push_back({static_cast<int>(s), b, Verdict::Unknown, grounded});
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const TemplateResult& a, const TemplateResult& b) {
              if (a.state != b.state) return a.state < b.state;
              if (a.verdict != b.verdict)
                return static_cast<int>(a.verdict) < static_cast<int>(b.verdict);
              return binding_key(a.binding) < binding_key(b.binding);
            });
  return out;
}

}  // namespace pdlsl
