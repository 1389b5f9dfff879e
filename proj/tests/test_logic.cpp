#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "pdlsl/parser.hpp"
#include "pdlsl/printer.hpp"
#include "pdlsl/substitution.hpp"
#include "support/gen.hpp"

using namespace pdlsl;

namespace {

const Catalogs& cat() {
  static Catalogs c = Catalogs::defaults();
  return c;
}

Term art(const std::string& id) { return Term::constant(id, Sort::Articulator); }
Term cfg_t(const std::string& id) { return Term::constant(id, Sort::Config); }
Term dir_t(Direction d) {
  return Term::constant(direction_name(d), Sort::Direction);
}

// The expanded opposition body for a given configuration:
// dir(RH,W,LH) & (cfg(RH,c) & cfg(LH,c))
ExprPtr opposition_expanded(const std::string& config) {
  return make_and(
      make_prop(make_dir_atom(art("RH"), dir_t(Direction::W), art("LH"))),
      make_and(make_prop(make_cfg_atom(art("RH"), cfg_t(config))),
               make_prop(make_cfg_atom(art("LH"), cfg_t(config)))));
}

std::vector<Definition> sign_template_defs() {
  std::string text =
      "hands_config = \\c:Config . ( cfg(RH,c) & cfg(LH,c) )\n"
      "opposition = \\c:Config . ( dir(RH,W,LH) & hands_config(c) )\n";
  return parse_definitions(text, cat(), "<defs>");
}

}  // namespace

TEST_CASE("parse: nullary constant") {
  ExprPtr e = parse_formula("true", cat());
  CHECK(e->kind == Expr::Kind::Top);
}

TEST_CASE("parse: the opposition template") {
  ExprPtr e = parse_formula(
      "\\c:Config . ( dir(RH,W,LH) & cfg(RH,c) & cfg(LH,c) )", cat());
  REQUIRE(e->kind == Expr::Kind::Lambda);
  CHECK(e->params.size() == 1);
  CHECK(e->params[0].name == "c");
  CHECK(e->params[0].sort == Sort::Config);
  // body: dir & (cfg & cfg) under right-associative '&'
  const Expr& body = *e->left;
  REQUIRE(body.kind == Expr::Kind::And);
  CHECK(body.left->kind == Expr::Kind::Atom);
  CHECK(body.left->atom.kind == AtomExpr::Kind::Dir);
  REQUIRE(body.right->kind == Expr::Kind::And);
  CHECK(body.right->left->atom.kind == AtomExpr::Kind::Cfg);
  CHECK(body.right->left->atom.b.is_var());
}

TEST_CASE("parse: tap chains right-associatively") {
  ExprPtr e = parse_formula(
      "!touch(RH,LH) -> [moves(RH)+moves(LH)] touch(RH,LH) -> [skip;skip] "
      "!touch(RH,LH)",
      cat());
  ExprPtr touch = make_prop(make_touch_atom(art("RH"), art("LH")));
  ProgramPtr ms = make_union(expand_moves(art("RH"), cat().directions),
                             expand_moves(art("LH"), cat().directions));
  ProgramPtr ss = make_seq(make_atomic(make_skip_action()),
                           make_atomic(make_skip_action()));
  ExprPtr expected = make_implies(
      make_not(touch),
      make_implies(make_box(ms, touch), make_box(ss, make_not(touch))));
  CHECK(equal(*e, *expected));
}

TEST_CASE("parse: modalities bind tighter than '&'") {
  ExprPtr e = parse_formula("[skip] true & touch(RH,LH)", cat());
  REQUIRE(e->kind == Expr::Kind::And);
  CHECK(e->left->kind == Expr::Kind::Box);
}

TEST_CASE("parse: touch argument order is canonical") {
  CHECK(equal(*parse_formula("touch(LH,RH)", cat()),
              *parse_formula("touch(RH,LH)", cat())));
}

TEST_CASE("parse: derived forms expand at construction") {
  // There is no Or/Implies/Diamond node kind; confirm the expansions.
  ExprPtr a = make_prop(make_touch_atom(art("RH"), art("LH")));
  ExprPtr b = make_prop(make_cfg_atom(art("RH"), cfg_t("L_FORM")));
  CHECK(equal(*parse_formula("touch(RH,LH) | cfg(RH,L_FORM)", cat()),
              *make_not(make_and(make_not(a), make_not(b)))));
  CHECK(equal(*parse_formula("touch(RH,LH) -> cfg(RH,L_FORM)", cat()),
              *make_not(make_and(a, make_not(b)))));
  CHECK(equal(*parse_formula("<skip> touch(RH,LH)", cat()),
              *make_not(make_box(make_atomic(make_skip_action()),
                                 make_not(a)))));
}

TEST_CASE("parse errors carry line and column") {
  CHECK_THROWS_AS(parse_formula("touch(RH,XX)", cat()), ParseError);
  try {
    parse_formula("touch(RH,\n  XX)", cat());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.col == 3);
  }
  // sort mismatch: TORSE is a place, not a config
  CHECK_THROWS_WITH_AS(parse_formula("cfg(RH,TORSE)", cat()),
                       doctest::Contains("is a Place"), ParseError);
  // unbalanced bracket
  CHECK_THROWS_AS(parse_formula("[skip true", cat()), ParseError);
  // untyped lambda parameters are rejected
  CHECK_THROWS_AS(parse_formula("\\c . ( cfg(RH,c) )", cat()), ParseError);
  // arity error
  CHECK_THROWS_AS(parse_formula("dir(RH,LH)", cat()), ParseError);
  // program action in formula position
  CHECK_THROWS_AS(parse_formula("move(RH,E)", cat()), ParseError);
}

TEST_CASE("print: canonical forms") {
  CHECK(print_formula(*make_top()) == "true");
  CHECK(print_formula(*make_box(make_star(make_atomic(make_skip_action())),
                                make_top())) == "[skip*] true");
  ExprPtr opp = parse_formula(
      "\\c:Config . ( dir(RH,W,LH) & cfg(RH,c) & cfg(LH,c) )", cat());
  CHECK(print_formula(*opp) ==
        "\\c:Config . ( dir(RH,W,LH) & cfg(RH,c) & cfg(LH,c) )");
}

TEST_CASE("print/parse roundtrip on generated ASTs") {
  gen::Gen gen(20240117);
  for (int i = 0; i < 300; ++i) {
    ExprPtr e = gen.top_level(6);
    std::string text = print_formula(*e);
    CAPTURE(text);
    ExprPtr back = parse_formula(text, cat());
    CHECK(equal(*e, *back));
  }
}

TEST_CASE("expand_moves: canonical right-nested union") {
  SUBCASE("single direction") {
    ProgramPtr p = expand_moves(art("LH"), {Direction::W});
    ProgramPtr expected = make_union(
        make_atomic(make_move_action(art("LH"), dir_t(Direction::W))),
        make_atomic(make_trill_action(art("LH"))));
    CHECK(equal(*p, *expected));
  }
  SUBCASE("all eight directions ends in trill") {
    ProgramPtr p = expand_moves(art("RH"), cat().directions);
    int unions = 0;
    const Program* cur = p.get();
    while (cur->kind == Program::Kind::Union) {
      ++unions;
      CHECK(cur->left->kind == Program::Kind::Atomic);
      CHECK(cur->left->atom.kind == ActionExpr::Kind::Move);
      cur = cur->right.get();
    }
    CHECK(unions == 8);
    CHECK(cur->atom.kind == ActionExpr::Kind::Trill);
    CHECK(print_program(*p).rfind("move(RH,E) + ", 0) == 0);
  }
  SUBCASE("order is canonical regardless of input order") {
    ProgramPtr a = expand_moves(art("RH"), {Direction::N, Direction::E});
    ProgramPtr b = expand_moves(art("RH"), {Direction::E, Direction::N});
    CHECK(equal(*a, *b));
  }
}

TEST_CASE("beta_reduce: derived sign definitions") {
  DefEnv env{&cat(), sign_template_defs()};
  SUBCASE("opposition(L_FORM) is the SCREEN formula") {
    ExprPtr e = parse_formula("opposition(L_FORM)", cat());
    ExprPtr reduced = beta_reduce(e, env);
    CHECK(equal(*reduced, *opposition_expanded("L_FORM")));
    CHECK(is_ground(*reduced));
    CHECK(print_formula(*reduced) ==
          "dir(RH,W,LH) & cfg(RH,L_FORM) & cfg(LH,L_FORM)");
  }
  SUBCASE("opposition(FIST_FORM) is the DRIVE formula") {
    ExprPtr reduced =
        beta_reduce(parse_formula("opposition(FIST_FORM)", cat()), env);
    CHECK(equal(*reduced, *opposition_expanded("FIST_FORM")));
  }
  SUBCASE("unapplied template keeps its lambda") {
    ExprPtr reduced = beta_reduce(parse_formula("opposition", cat()), env);
    REQUIRE(reduced->kind == Expr::Kind::Lambda);
    CHECK(free_vars(*reduced).empty());  // the parameter is bound
  }
}

TEST_CASE("beta_reduce: errors") {
  DefEnv env{&cat(), sign_template_defs()};
  CHECK_THROWS_WITH_AS(
      beta_reduce(parse_formula("oppositio(L_FORM)", cat()), env),
      doctest::Contains("unknown definition"), DataError);
  CHECK_THROWS_WITH_AS(
      beta_reduce(parse_formula("opposition(L_FORM, FIST_FORM)", cat()), env),
      doctest::Contains("arity"), DataError);
  CHECK_THROWS_WITH_AS(beta_reduce(parse_formula("opposition(RH)", cat()), env),
                       doctest::Contains("sort mismatch"), DataError);
  DefEnv cyc_env{&cat(), {}};
  cyc_env.defs.push_back({"a", parse_formula("b(L_FORM)", cat()), 1});
  cyc_env.defs.push_back({"b", parse_formula("a(L_FORM)", cat()), 2});
  CHECK_THROWS_WITH_AS(beta_reduce(parse_formula("a(L_FORM)", cat()), cyc_env),
                       doctest::Contains("cyclic"), DataError);
}

TEST_CASE("beta_reduce is idempotent") {
  DefEnv env{&cat(), sign_template_defs()};
  gen::Gen gen(987123);
  for (int i = 0; i < 100; ++i) {
    ExprPtr e = gen.top_level(5);
    ExprPtr once = beta_reduce(e, env);
    ExprPtr twice = beta_reduce(once, env);
    CHECK(equal(*once, *twice));
  }
  ExprPtr opp = beta_reduce(parse_formula("opposition(L_FORM)", cat()), env);
  CHECK(equal(*opp, *beta_reduce(opp, env)));
}

TEST_CASE("substitution avoids capture by renaming the binder") {
  // \x:Config.( cfg(RH,x) & cfg(LH,y) ) with y := x must not capture.
  ExprPtr lam = make_lambda(
      {{"x", Sort::Config}},
      make_and(
          make_prop(make_cfg_atom(art("RH"), Term::variable("x", Sort::Config))),
          make_prop(
              make_cfg_atom(art("LH"), Term::variable("y", Sort::Config)))));
  std::map<std::string, ExprPtr> sub{
      {"y", make_term_arg(Term::variable("x", Sort::Config))}};
  ExprPtr out = substitute(lam, sub);
  REQUIRE(out->kind == Expr::Kind::Lambda);
  std::string renamed = out->params[0].name;
  CHECK(renamed != "x");
  // inner occurrences follow the binder; the substituted x stays free
  const Expr& body = *out->left;
  CHECK(body.left->atom.b.name == renamed);
  CHECK(body.right->atom.b.name == "x");
  CHECK(free_vars(*out).count("x") == 1);
}

TEST_CASE("substitution freshness under shadowing definitions") {
  DefEnv env{&cat(),
             parse_definitions("inner = \\x:Config . ( cfg(RH,x) )\n"
                               "outer = \\x:Config, y:Config . ( inner(y) & "
                               "cfg(LH,x) )\n",
                               cat(), "<defs>")};
  ExprPtr reduced =
      beta_reduce(parse_formula("outer(L_FORM, FIST_FORM)", cat()), env);
  CHECK(is_ground(*reduced));
  CHECK(equal(
      *reduced,
      *make_and(make_prop(make_cfg_atom(art("RH"), cfg_t("FIST_FORM"))),
                make_prop(make_cfg_atom(art("LH"), cfg_t("L_FORM"))))));
}

TEST_CASE("parse_definitions: duplicates, reserved names, chaining") {
  CHECK_THROWS_WITH_AS(parse_definitions("a = true\na = true\n", cat(), "<d>"),
                       doctest::Contains("duplicate"), ParseError);
  CHECK_THROWS_WITH_AS(parse_definitions("skip = true\n", cat(), "<d>"),
                       doctest::Contains("reserved"), ParseError);
  auto defs = parse_definitions("base = touch(RH,LH)\nderived = base & true\n",
                                cat(), "<d>");
  DefEnv env{&cat(), defs};
  ExprPtr reduced = beta_reduce(parse_formula("derived", cat()), env);
  CHECK(is_ground(*reduced));
}

TEST_CASE("direction algebra") {
  for (int i = 0; i < kDirectionCount; ++i) {
    Direction d = static_cast<Direction>(i);
    CHECK(opposite(opposite(d)) == d);
    CHECK(opposite(d) != d);
  }
  CHECK(opposite(Direction::E) == Direction::W);
  CHECK(opposite(Direction::NE) == Direction::SW);
  // y-down sectors from the annotator's viewpoint
  CHECK(*sector_of(1.0, 0.0) == Direction::E);
  CHECK(*sector_of(-2.0, 0.0) == Direction::W);
  CHECK(*sector_of(0.0, -3.0) == Direction::N);  // up on screen
  CHECK(*sector_of(0.0, 0.5) == Direction::S);
  CHECK(*sector_of(1.0, -1.0) == Direction::NE);
  CHECK(*sector_of(-1.0, 1.0) == Direction::SW);
  CHECK(!sector_of(0.0, 0.0).has_value());
}
