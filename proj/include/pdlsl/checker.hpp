#pragma once

// Satisfaction of ground formulas and lambda templates on a finite LTS,
// under strong-Kleene three-valued semantics for unknown atoms. Programs
// denote relations over state ids; star is the reflexive-transitive closure
// computed by iterated composition to fixpoint.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pdlsl/ast.hpp"
#include "pdlsl/model.hpp"
#include "pdlsl/substitution.hpp"

namespace pdlsl {

enum class Verdict { True, False, Unknown };

const char* verdict_name(Verdict v);

// Sorted, duplicate-free set of (from, to) state-id pairs.
using Relation = std::vector<std::pair<int, int>>;

Relation denote_program(const Lts& m, const Program& prog);

// Per-call relation memo keyed by the program's printed form; lets template
// enumeration reuse star fixpoints across bindings.
class DenoteCache {
 public:
  explicit DenoteCache(const Lts& m) : m_(m) {}
  const Relation& get(const Program& prog);

 private:
  const Lts& m_;
  std::map<std::string, Relation> memo_;
};

// Verdict of a ground formula at every state. Top is true everywhere;
// Not/And follow strong Kleene; [a]f is true when f is true at every
// a-successor (vacuously true with none), false when f is false at some
// successor, unknown otherwise. Atoms outside the model's universe are an
// error.
std::vector<Verdict> check(const Lts& m, const Expr& formula);
std::vector<Verdict> check(const Lts& m, const Expr& formula,
                           DenoteCache& cache);

enum class CheckMode { Strict, Optimistic };

using Binding = std::map<std::string, std::string>;

struct TemplateResult {
  int state = 0;
  Binding binding;
  Verdict verdict = Verdict::True;
  ExprPtr grounded;  // the fully instantiated formula this row was checked on
};

// Conjunction of the state's true atoms that mention the articulator, in
// canonical atom order; nullptr when none do.
ExprPtr posture_conjunction(const Lts& m, int state,
                            const std::string& articulator,
                            const Catalogs& catalogs);

// Enumerates bindings of the template's lambda parameters and free
// variables over the catalog domains (Posture variables range over the
// per-state articulator-restricted true-atom conjunctions). Returns True
// rows; Optimistic mode adds Unknown rows, with bindings collapsed to a "*"
// wildcard for variables whose whole domain is uniformly unknown. Unknown is
// never promoted to True.
std::vector<TemplateResult> check_template(const Lts& m, const ExprPtr& tmpl,
                                           const DefEnv& defs, CheckMode mode);

}  // namespace pdlsl
