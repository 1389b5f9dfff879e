#include "pdlsl/parser.hpp"

#include <cctype>
#include <sstream>

namespace pdlsl {

namespace {

enum class Tok {
  Ident, LParen, RParen, LBracket, RBracket, LAngle, RAngle,
  Comma, Dot, Colon, Semi, Star, Plus, Amp, Pipe, Bang, Arrow,
  Lambda, Eof
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
bool ident_char(char c) { return std::isalnum((unsigned char)c) || c == '_'; }

std::vector<Token> lex(const std::string& text, int line_offset) {
  std::vector<Token> out;
  int line = 1 + line_offset, col = 1;
  size_t i = 0;
  auto push = [&](Tok k, std::string t) {
    out.push_back({k, std::move(t), line, col});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (ident_start(c)) {
      size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      push(Tok::Ident, text.substr(i, j - i));
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (c == '-') {
      if (i + 1 < text.size() && text[i + 1] == '>') {
        push(Tok::Arrow, "->");
        col += 2;
        i += 2;
        continue;
      }
      throw ParseError("stray '-' (expected '->')", line, col);
    }
    Tok k;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case '<': k = Tok::LAngle; break;
      case '>': k = Tok::RAngle; break;
      case ',': k = Tok::Comma; break;
      case '.': k = Tok::Dot; break;
      case ':': k = Tok::Colon; break;
      case ';': k = Tok::Semi; break;
      case '*': k = Tok::Star; break;
      case '+': k = Tok::Plus; break;
      case '&': k = Tok::Amp; break;
      case '|': k = Tok::Pipe; break;
      case '!': k = Tok::Bang; break;
      case '\\': k = Tok::Lambda; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'",
                         line, col);
    }
    push(k, std::string(1, c));
    ++col;
    ++i;
  }
  out.push_back({Tok::Eof, "", line, col});
  return out;
}

bool reserved_name(const std::string& s) {
  return s == "true" || s == "dir" || s == "cfg" || s == "at" ||
         s == "touch" || s == "move" || s == "trill" || s == "skip" ||
         s == "moves";
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const Catalogs& cat)
      : toks_(std::move(toks)), cat_(cat) {}

  ExprPtr formula_all() {
    ExprPtr e = formula();
    expect_eof();
    return e;
  }

  ProgramPtr program_all() {
    ProgramPtr p = program();
    expect_eof();
    return p;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  const Catalogs& cat_;
  std::vector<LambdaParam> scope_;

  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind == k) {
      next();
      return true;
    }
    return false;
  }
  Token expect(Tok k, const char* what) {
    if (peek().kind != k)
      throw ParseError(std::string("expected ") + what + ", got '" +
                           (peek().kind == Tok::Eof ? "end of input"
                                                    : peek().text) + "'",
                       peek().line, peek().col);
    return next();
  }
  void expect_eof() {
    if (peek().kind != Tok::Eof)
      throw ParseError("unexpected trailing input '" + peek().text + "'",
                       peek().line, peek().col);
  }
  [[noreturn]] void fail(const std::string& msg, const Token& t) {
    throw ParseError(msg, t.line, t.col);
  }

  const LambdaParam* lookup_var(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->name == name) return &*it;
    return nullptr;
  }

  // ---- formulas -------------------------------------------------------

  ExprPtr formula() {  // '->', right-associative, loosest
    ExprPtr l = or_level();
    if (accept(Tok::Arrow)) return make_implies(std::move(l), formula());
    return l;
  }

  ExprPtr or_level() {
    ExprPtr l = and_level();
    if (accept(Tok::Pipe)) return make_or(std::move(l), or_level());
    return l;
  }

  ExprPtr and_level() {
    ExprPtr l = unary();
    if (accept(Tok::Amp)) return make_and(std::move(l), and_level());
    return l;
  }

  ExprPtr unary() {
    if (accept(Tok::Bang)) return make_not(unary());
    if (peek().kind == Tok::LBracket) {
      next();
      ProgramPtr p = program();
      expect(Tok::RBracket, "']'");
      return make_box(std::move(p), unary());
    }
    if (peek().kind == Tok::LAngle) {
      next();
      ProgramPtr p = program();
      expect(Tok::RAngle, "'>'");
      return make_diamond(std::move(p), unary());
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::LParen: {
        next();
        ExprPtr e = formula();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Lambda:
        return lambda();
      case Tok::Ident:
        return ident_formula();
      default:
        fail("expected a formula, got '" +
                 (t.kind == Tok::Eof ? "end of input" : t.text) + "'",
             t);
    }
  }

  ExprPtr lambda() {
    next();  // '\'
    std::vector<LambdaParam> params;
    for (;;) {
      Token name = expect(Tok::Ident, "parameter name");
      expect(Tok::Colon, "':' and a sort (untyped parameters are rejected)");
      Token sort_tok = expect(Tok::Ident, "sort name");
      auto sort = sort_from_name(sort_tok.text);
      if (!sort) fail("unknown sort '" + sort_tok.text + "'", sort_tok);
      params.push_back({name.text, *sort});
      if (!accept(Tok::Comma)) break;
    }
    expect(Tok::Dot, "'.' after lambda parameters");
    expect(Tok::LParen, "'(' around lambda body");
    size_t shadow_base = scope_.size();
    for (const auto& p : params) scope_.push_back(p);
    ExprPtr body = formula();
    scope_.resize(shadow_base);
    expect(Tok::RParen, "')' closing lambda body");
    return make_lambda(std::move(params), std::move(body));
  }

  ExprPtr ident_formula() {
    Token t = next();
    const std::string& id = t.text;
    if (id == "true") return make_top();
    if (id == "dir" || id == "cfg" || id == "at" || id == "touch")
      return make_prop(atom_tail(id, t));
    if (id == "move" || id == "trill" || id == "skip" || id == "moves")
      fail("'" + id + "' is a program action and cannot stand as a formula",
           t);
    if (peek().kind == Tok::LParen) {
      next();
      std::vector<ExprPtr> args;
      if (peek().kind != Tok::RParen) {
        do {
          args.push_back(apply_arg());
        } while (accept(Tok::Comma));
      }
      expect(Tok::RParen, "')' closing argument list");
      return make_apply(id, std::move(args));
    }
    if (const LambdaParam* v = lookup_var(id)) {
      if (v->sort != Sort::Posture)
        fail("variable '" + id + "' has sort " + sort_name(v->sort) +
                 " and cannot stand as a formula (only Posture variables can)",
             t);
      return make_var(id, Sort::Posture);
    }
    if (cat_.has_articulator(id) || cat_.has_place(id) || cat_.has_config(id))
      fail("constant '" + id + "' cannot stand as a formula", t);
    // Bare reference to a definition; resolved during beta reduction.
    return make_apply(id, {});
  }

  // An application argument is either a single term (constant or variable)
  // or a full template expression.
  ExprPtr apply_arg() {
    if (peek().kind == Tok::Ident &&
        (peek(1).kind == Tok::Comma || peek(1).kind == Tok::RParen)) {
      Token t = next();
      const std::string& id = t.text;
      if (const LambdaParam* v = lookup_var(id))
        return make_term_arg(Term::variable(id, v->sort));
      if (auto d = direction_from_name(id))
        return make_term_arg(
            Term::constant(direction_name(*d), Sort::Direction));
      // An id present in several catalogs is re-sorted against the
      // parameter's sort when the application is reduced.
      if (cat_.has_articulator(id))
        return make_term_arg(Term::constant(id, Sort::Articulator));
      if (cat_.has_place(id))
        return make_term_arg(Term::constant(id, Sort::Place));
      if (cat_.has_config(id))
        return make_term_arg(Term::constant(id, Sort::Config));
      if (id == "true") return make_top();
      fail("unknown symbol '" + id + "' (not in any catalog, not bound)", t);
    }
    return formula();
  }

  AtomExpr atom_tail(const std::string& head, const Token& head_tok) {
    expect(Tok::LParen, "'('");
    AtomExpr atom;
    if (head == "dir") {
      Term b1 = term(Sort::Articulator);
      expect(Tok::Comma, "','");
      Term d = term(Sort::Direction);
      expect(Tok::Comma, "','");
      Term b2 = term(Sort::Articulator);
      check_distinct(b1, b2, head_tok);
      atom = make_dir_atom(std::move(b1), std::move(d), std::move(b2));
    } else if (head == "cfg") {
      Term b = term(Sort::Articulator);
      expect(Tok::Comma, "','");
      atom = make_cfg_atom(std::move(b), term(Sort::Config));
    } else if (head == "at") {
      Term b = term(Sort::Articulator);
      expect(Tok::Comma, "','");
      atom = make_at_atom(std::move(b), term(Sort::Place));
    } else {  // touch
      Term b1 = term(Sort::Articulator);
      expect(Tok::Comma, "','");
      Term b2 = term(Sort::Articulator);
      check_distinct(b1, b2, head_tok);
      atom = make_touch_atom(std::move(b1), std::move(b2));
    }
    expect(Tok::RParen, "')'");
    return atom;
  }

  void check_distinct(const Term& a, const Term& b, const Token& at) {
    if (!a.is_var() && !b.is_var() && a.name == b.name)
      fail("atom needs two distinct articulators, got '" + a.name + "' twice",
           at);
  }

  Term term(Sort want) {
    Token t = expect(Tok::Ident, "an identifier");
    const std::string& id = t.text;
    if (const LambdaParam* v = lookup_var(id)) {
      if (v->sort != want)
        fail("variable '" + id + "' has sort " + sort_name(v->sort) +
                 ", expected " + sort_name(want),
             t);
      return Term::variable(id, want);
    }
    switch (want) {
      case Sort::Direction:
        if (auto d = direction_from_name(id))
          return Term::constant(direction_name(*d), Sort::Direction);
        break;
      case Sort::Articulator:
        if (cat_.has_articulator(id))
          return Term::constant(id, Sort::Articulator);
        break;
      case Sort::Place:
        if (cat_.has_place(id)) return Term::constant(id, Sort::Place);
        break;
      case Sort::Config:
        if (cat_.has_config(id)) return Term::constant(id, Sort::Config);
        break;
      case Sort::Posture:
        break;
    }
    // Distinguish wrong-catalog ids from unknown ones for the error message.
    std::string actual;
    if (direction_from_name(id)) actual = "a Direction";
    else if (cat_.has_articulator(id)) actual = "an Articulator";
    else if (cat_.has_place(id)) actual = "a Place";
    else if (cat_.has_config(id)) actual = "a Config";
    if (!actual.empty())
      fail("'" + id + "' is " + actual + ", expected " + sort_name(want), t);
    fail("unknown symbol '" + id + "' (not in the " +
             std::string(sort_name(want)) + " catalog)",
         t);
  }

  // ---- programs -------------------------------------------------------

  ProgramPtr program() {  // '+', loosest
    ProgramPtr l = prog_inter();
    if (accept(Tok::Plus)) return make_union(std::move(l), program());
    return l;
  }

  ProgramPtr prog_inter() {
    ProgramPtr l = prog_seq();
    if (accept(Tok::Amp)) return make_intersect(std::move(l), prog_inter());
    return l;
  }

  ProgramPtr prog_seq() {  // ';', tightest
    ProgramPtr l = prog_post();
    if (accept(Tok::Semi)) return make_seq(std::move(l), prog_seq());
    return l;
  }

  ProgramPtr prog_post() {
    ProgramPtr p = prog_atom();
    while (accept(Tok::Star)) p = make_star(std::move(p));
    return p;
  }

  ProgramPtr prog_atom() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      next();
      ProgramPtr p = program();
      expect(Tok::RParen, "')'");
      return p;
    }
    Token head = expect(Tok::Ident, "a program action");
    const std::string& id = head.text;
    if (id == "skip") return make_atomic(make_skip_action());
    if (id == "move") {
      expect(Tok::LParen, "'('");
      Term b = term(Sort::Articulator);
      expect(Tok::Comma, "','");
      Term d = term(Sort::Direction);
      expect(Tok::RParen, "')'");
      return make_atomic(make_move_action(std::move(b), std::move(d)));
    }
    if (id == "trill") {
      expect(Tok::LParen, "'('");
      Term b = term(Sort::Articulator);
      expect(Tok::RParen, "')'");
      return make_atomic(make_trill_action(std::move(b)));
    }
    if (id == "moves") {
      expect(Tok::LParen, "'('");
      Term b = term(Sort::Articulator);
      expect(Tok::RParen, "')'");
      return expand_moves(b, cat_.directions);
    }
    fail("unknown program action '" + id + "'", head);
  }
};

}  // namespace

ExprPtr parse_formula(const std::string& text, const Catalogs& catalogs,
                      int line_offset) {
  Parser p(lex(text, line_offset), catalogs);
  return p.formula_all();
}

ProgramPtr parse_program_text(const std::string& text, const Catalogs& catalogs,
                              int line_offset) {
  Parser p(lex(text, line_offset), catalogs);
  return p.program_all();
}

AtomExpr parse_atom_key(const std::string& text, const Catalogs& catalogs) {
  ExprPtr e = parse_formula(text, catalogs);
  if (e->kind != Expr::Kind::Atom || !is_ground(*e))
    throw DataError("not a ground atom: '" + text + "'");
  return e->atom;
}

ActionExpr parse_action_key(const std::string& text, const Catalogs& catalogs) {
  ProgramPtr p = parse_program_text(text, catalogs);
  if (p->kind != Program::Kind::Atomic || !is_ground(*p))
    throw DataError("not a ground action: '" + text + "'");
  return p->atom;
}

std::vector<Definition> parse_definitions(const std::string& text,
                                          const Catalogs& catalogs,
                                          const std::string& origin) {
  std::vector<Definition> defs;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string stripped = line;
    auto hash_pos = stripped.find('#');
    if (hash_pos != std::string::npos) stripped = stripped.substr(0, hash_pos);
    auto begin = stripped.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ": expected 'name = expr'", lineno, 1);
    std::string name = stripped.substr(0, eq);
    auto name_end = name.find_last_not_of(" \t");
    name = name.substr(begin, name_end - begin + 1);
    if (name.empty() || !ident_start(name[0]))
      throw ParseError(origin + ": bad definition name '" + name + "'",
                       lineno, 1);
    for (char c : name)
      if (!ident_char(c))
        throw ParseError(origin + ": bad definition name '" + name + "'",
                         lineno, 1);
    if (reserved_name(name))
      throw ParseError(origin + ": '" + name + "' is a reserved name", lineno,
                       1);
    for (const auto& d : defs)
      if (d.name == name)
        throw ParseError(origin + ": duplicate definition '" + name + "'",
                         lineno, 1);
    // Pad so positions inside the expression stay file-accurate.
    ExprPtr value = parse_formula(
        std::string(eq + 1, ' ') + stripped.substr(eq + 1), catalogs,
        lineno - 1);
    defs.push_back({name, std::move(value), lineno});
  }
  return defs;
}

}  // namespace pdlsl
