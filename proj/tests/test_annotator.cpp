#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "pdlsl/annotator.hpp"
#include "pdlsl/errors.hpp"
#include "pdlsl/parser.hpp"
#include "pdlsl/segment.hpp"
#include "support/synthetic.hpp"

using namespace pdlsl;

namespace {

const Catalogs& cat() {
  static Catalogs c = Catalogs::defaults();
  return c;
}

PropertyDb db() {
  return parse_property_db(default_property_db_text("touch"), "<db>", cat());
}

Lts model_of(const Trace& t) {
  return build_lts(t, segment(t, SegParams{}), cat(),
                   RegionCatalog::defaults(), ModelParams{});
}

int count_property(const std::vector<Annotation>& anns,
                   const std::string& name, Verdict v = Verdict::True) {
  int n = 0;
  for (const auto& a : anns)
    if (a.property == name && a.verdict == v) ++n;
  return n;
}

const Annotation* find_property(const std::vector<Annotation>& anns,
                                const std::string& name) {
  for (const auto& a : anns)
    if (a.property == name) return &a;
  return nullptr;
}

}  // namespace

TEST_CASE("property db: shipped file layout") {
  PropertyDb shipped = load_property_db(
      std::string(PDLSL_DATA_DIR) + "/properties.pdlsl", cat());
  CHECK(shipped.defs.size() == 5);
  CHECK(shipped.properties ==
        std::vector<std::string>{"opposition", "tap", "buoy", "head_anchor"});
  // the shipped file matches the built-in default text
  PropertyDb builtin = db();
  REQUIRE(builtin.defs.size() == shipped.defs.size());
  for (size_t i = 0; i < shipped.defs.size(); ++i) {
    CHECK(shipped.defs[i].name == builtin.defs[i].name);
    CHECK(equal(*shipped.defs[i].value, *builtin.defs[i].value));
  }
}

TEST_CASE("property db: empty file, references, duplicates, pragma") {
  PropertyDb empty = parse_property_db("", "<db>", cat());
  CHECK(empty.properties.empty());
  Lts m = model_of(synth::constant_trace(20));
  CHECK(annotate(m, empty, AnnotateOptions{}).empty());

  PropertyDb with_ref = parse_property_db(
      default_property_db_text("touch") + "screen = opposition(L_FORM)\n",
      "<db>", cat());
  DefEnv env = with_ref.env();
  ExprPtr reduced = beta_reduce(env.find("screen")->value, env);
  CHECK(is_ground(*reduced));

  CHECK_THROWS_AS(parse_property_db("a = true\na = true\n", "<db>", cat()),
                  ParseError);
  CHECK_THROWS_WITH_AS(parse_property_db("#! helpers: nope\na = true\n",
                                         "<db>", cat()),
                       doctest::Contains("not defined"), DataError);
  CHECK_THROWS_WITH_AS(parse_property_db("#! frobnicate\n", "<db>", cat()),
                       doctest::Contains("unknown pragma"), DataError);
}

TEST_CASE("annotate: tap trace yields exactly one tap spanning the event") {
  Trace t = synth::tap_trace();
  Lts m = model_of(t);
  REQUIRE(m.states.size() == 3);
  auto anns = annotate(m, db(), AnnotateOptions{});
  CHECK(count_property(anns, "tap") == 1);
  const Annotation* tap = find_property(anns, "tap");
  REQUIRE(tap != nullptr);
  CHECK(tap->start == 0);
  CHECK(tap->end == static_cast<int>(t.frames.size()) - 1);
  CHECK(tap->witness_states == std::vector<int>{0, 1, 2});
  CHECK(tap->verdict == Verdict::True);
  // no opposition (configs differ) and no head anchor (hands away from head)
  CHECK(count_property(anns, "opposition") == 0);
  CHECK(count_property(anns, "head_anchor") == 0);
}

TEST_CASE("annotate: zero-edge opposition model") {
  synth::Builder b;
  b.set("HEAD", {0.0, 0.0});
  b.set("RH", {-2.0, 2.5});
  b.set("LH", {2.0, 2.8});
  b.label("RH", "L_FORM");
  b.label("LH", "L_FORM");
  b.hold(40);
  Trace t = b.take("<opp-still>");
  Lts m = model_of(t);
  REQUIRE(m.states.size() == 1);
  REQUIRE(m.edges.empty());
  auto anns = annotate(m, db(), AnnotateOptions{});
  REQUIRE(anns.size() == 1);
  CHECK(anns[0].property == "opposition");
  CHECK(anns[0].start == 0);
  CHECK(anns[0].end == 39);
  CHECK(anns[0].binding.at("c") == "L_FORM");
  CHECK(anns[0].witness_states == std::vector<int>{0});
}

TEST_CASE("annotate: vacuity guard on the always-touching trace") {
  Trace t = synth::always_touching_trace();
  Lts m = model_of(t);
  REQUIRE(m.states.size() == 1);
  auto strict = annotate(m, db(), AnnotateOptions{});
  CHECK(count_property(strict, "tap") == 0);
  AnnotateOptions vac;
  vac.allow_vacuous = true;
  auto loose = annotate(m, db(), vac);
  CHECK(count_property(loose, "tap") >= 1);
}

TEST_CASE("annotate: buoy needs at least one actual step") {
  // A single state with a stable posture must not produce a buoy through
  // the reflexive star alone.
  synth::Builder b;
  b.set("HEAD", {0.0, 0.0});
  b.set("RH", {-3.0, 3.0});
  b.set("LH", {2.5, 4.0});
  b.label("LH", "L_FORM");
  b.hold(40);
  Lts m = model_of(b.take("<still>"));
  REQUIRE(m.states.size() == 1);
  auto anns = annotate(m, db(), AnnotateOptions{});
  CHECK(count_property(anns, "buoy") == 0);
}

TEST_CASE("annotate: buoy trace yields exactly one buoy spanning the run") {
  Trace t = synth::buoy_trace();
  Lts m = model_of(t);
  REQUIRE(m.states.size() == 3);
  auto anns = annotate(m, db(), AnnotateOptions{});
  CHECK(count_property(anns, "buoy") == 1);
  const Annotation* buoy = find_property(anns, "buoy");
  REQUIRE(buoy != nullptr);
  CHECK(buoy->start == 0);
  CHECK(buoy->end == static_cast<int>(t.frames.size()) - 1);
  CHECK(buoy->binding.at("s") == "RH");
}

TEST_CASE("annotate: head anchor trace, touch and region variants") {
  Trace t = synth::head_anchor_trace();
  Lts m = model_of(t);
  auto anns = annotate(m, db(), AnnotateOptions{});
  CHECK(count_property(anns, "head_anchor") == 1);
  const Annotation* ha = find_property(anns, "head_anchor");
  REQUIRE(ha != nullptr);
  CHECK(ha->binding.at("w") == "LH");
  CHECK(ha->binding.at("s") == "RH");

  PropertyDb region_db = parse_property_db(
      default_property_db_text("region"), "<db>", cat());
  auto anns2 = annotate(m, region_db, AnnotateOptions{});
  CHECK(count_property(anns2, "head_anchor") == 1);
}

TEST_CASE("annotate: unknown verdicts in optimistic mode, never a false True") {
  Trace stripped = synth::strip_labels(synth::opposition_trace());
  Lts m = model_of(stripped);
  AnnotateOptions strict;
  auto s = annotate(m, db(), strict);
  CHECK(count_property(s, "opposition", Verdict::True) == 0);
  CHECK(count_property(s, "opposition", Verdict::Unknown) == 0);

  AnnotateOptions optimistic;
  optimistic.mode = CheckMode::Optimistic;
  auto o = annotate(m, db(), optimistic);
  CHECK(count_property(o, "opposition", Verdict::True) == 0);
  CHECK(count_property(o, "opposition", Verdict::Unknown) == 1);
  const Annotation* opp = find_property(o, "opposition");
  REQUIRE(opp != nullptr);
  CHECK(opp->binding.at("c") == "*");
}

TEST_CASE("annotate: determinism") {
  Trace t = synth::tap_trace();
  Lts m = model_of(t);
  auto a = annotate(m, db(), AnnotateOptions{});
  auto b = annotate(m, db(), AnnotateOptions{});
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK(annotations_to_jsonl(a, {}) == annotations_to_jsonl(b, {}));
}

TEST_CASE("annotation jsonl roundtrip skips the meta line") {
  Trace t = synth::tap_trace();
  auto anns = annotate(model_of(t), db(), AnnotateOptions{});
  nlohmann::json meta{{"note", "params"}};
  std::string text = annotations_to_jsonl(anns, meta);
  auto back = annotations_from_jsonl(text, "<jsonl>");
  REQUIRE(back.size() == anns.size());
  for (size_t i = 0; i < anns.size(); ++i) CHECK(back[i] == anns[i]);
}

TEST_CASE("gold file parsing: header, comments, malformed rows") {
  GoldFile g = parse_gold(
      "property,start,end\n"
      "tap,0,199\n"
      "# comment\n"
      "buoy,10\n"
      "opposition,20,10\n"
      "buoy,5,30\n",
      "<gold>");
  REQUIRE(g.rows.size() == 2);
  CHECK(g.rows[0].property == "tap");
  CHECK(g.rows[1].property == "buoy");
  CHECK(g.skipped_rows == 2);
  CHECK(g.warnings.size() == 2);
}

TEST_CASE("evaluate: perfect prediction is diagonal") {
  std::vector<Annotation> pred;
  Annotation a;
  a.property = "tap";
  a.start = 0;
  a.end = 10;
  a.witness_states = {0};
  pred.push_back(a);
  GoldFile gold;
  gold.rows.push_back({"tap", 0, 10});
  EvalReport r = evaluate(pred, gold, EvalOptions{});
  REQUIRE(r.table.gold_props == std::vector<std::string>{"tap"});
  REQUIRE(r.table.pred_props == std::vector<std::string>{"tap"});
  CHECK(r.table.counts[0][0] == 1);
  CHECK(r.table.false_positives[0] == 0);
  REQUIRE(r.summary.size() == 1);
  CHECK(r.summary[0].hits == 1);
  CHECK(r.summary[0].misses == 0);
  CHECK(r.summary[0].erroneous == 0);
}

TEST_CASE("evaluate: crafted pred/gold with hand-computed table") {
  // gold: opposition [10,20], buoy [15,30], tap [50,60]
  // pred: opposition [12,18]  -> overlaps gold opposition AND gold buoy
  //       opposition [25,30]  -> overlaps gold buoy only (erroneous)
  //       buoy       [100,110]-> overlaps nothing (false positive)
  //       tap        [55,58]  -> overlaps gold tap only
  GoldFile gold;
  gold.rows.push_back({"opposition", 10, 20});
  gold.rows.push_back({"buoy", 15, 30});
  gold.rows.push_back({"tap", 50, 60});
  auto mk = [](const std::string& p, int s, int e) {
    Annotation a;
    a.property = p;
    a.start = s;
    a.end = e;
    a.witness_states = {0};
    return a;
  };
  std::vector<Annotation> pred = {mk("opposition", 12, 18),
                                  mk("opposition", 25, 30),
                                  mk("buoy", 100, 110), mk("tap", 55, 58)};
  EvalReport r = evaluate(pred, gold, EvalOptions{});
  const MatchTable& t = r.table;
  REQUIRE(t.gold_props ==
          std::vector<std::string>{"buoy", "opposition", "tap"});
  REQUIRE(t.pred_props ==
          std::vector<std::string>{"buoy", "opposition", "tap"});
  auto cell = [&](const std::string& g, const std::string& p) {
    size_t gi = std::find(t.gold_props.begin(), t.gold_props.end(), g) -
                t.gold_props.begin();
    size_t pi = std::find(t.pred_props.begin(), t.pred_props.end(), p) -
                t.pred_props.begin();
    return t.counts[gi][pi];
  };
  CHECK(cell("opposition", "opposition") == 1);  // [12,18]
  CHECK(cell("buoy", "opposition") == 2);        // [12,18] and [25,30]
  CHECK(cell("tap", "tap") == 1);
  CHECK(cell("buoy", "buoy") == 0);
  CHECK(cell("tap", "opposition") == 0);
  CHECK(t.false_positives[0] == 1);  // buoy column
  CHECK(t.false_positives[1] == 0);
  CHECK(t.false_positives[2] == 0);

  auto row = [&](const std::string& name) {
    for (const auto& s : r.summary)
      if (s.property == name) return s;
    return SummaryRow{};
  };
  CHECK(row("opposition").hits == 1);
  CHECK(row("opposition").misses == 0);
  CHECK(row("opposition").erroneous == 1);  // [25,30] overlaps buoy only
  CHECK(row("buoy").hits == 0);
  CHECK(row("buoy").misses == 1);
  CHECK(row("buoy").erroneous == 0);  // its only prediction overlapped nothing
  CHECK(row("tap").hits == 1);
  CHECK(row("tap").misses == 0);
  // conservation: hits + misses = gold count per property
  for (const auto& s : r.summary) {
    int gold_count = 0;
    for (const auto& g : gold.rows)
      if (g.property == s.property) ++gold_count;
    CHECK(s.hits + s.misses == gold_count);
  }
}

TEST_CASE("evaluate: unknown property names warn and skip") {
  GoldFile gold;
  gold.rows.push_back({"tap", 0, 10});
  gold.rows.push_back({"mystery", 0, 10});
  EvalOptions opts;
  opts.known_properties = {"tap", "opposition", "buoy", "head_anchor"};
  EvalReport r = evaluate({}, gold, opts);
  CHECK(r.skipped_gold_rows == 1);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("mystery") != std::string::npos);
  CHECK(r.table.gold_props == std::vector<std::string>{"tap"});
}

TEST_CASE("evaluate: unknown-verdict predictions excluded unless requested") {
  Annotation u;
  u.property = "opposition";
  u.start = 0;
  u.end = 10;
  u.verdict = Verdict::Unknown;
  u.witness_states = {0};
  GoldFile gold;
  gold.rows.push_back({"opposition", 0, 10});
  EvalReport strict = evaluate({u}, gold, EvalOptions{});
  REQUIRE(strict.summary.size() == 1);
  CHECK(strict.summary[0].hits == 0);
  CHECK(strict.summary[0].misses == 1);
  EvalOptions inc;
  inc.count_unknown = true;
  EvalReport loose = evaluate({u}, gold, inc);
  CHECK(loose.summary[0].hits == 1);
}

TEST_CASE("evaluate: min_iou tightens matching") {
  Annotation a;
  a.property = "tap";
  a.start = 0;
  a.end = 99;
  a.witness_states = {0};
  GoldFile gold;
  gold.rows.push_back({"tap", 90, 99});  // IoU = 10/100
  EvalOptions any;
  CHECK(evaluate({a}, gold, any).summary[0].hits == 1);
  EvalOptions tight;
  tight.min_iou = 0.5;
  EvalReport r = evaluate({a}, gold, tight);
  CHECK(r.summary[0].hits == 0);
  CHECK(r.table.false_positives[0] == 1);
}

TEST_CASE("report rendering is deterministic and aligned") {
  GoldFile gold;
  gold.rows.push_back({"tap", 0, 10});
  Annotation a;
  a.property = "tap";
  a.start = 0;
  a.end = 10;
  a.witness_states = {0};
  EvalReport r = evaluate({a}, gold, EvalOptions{});
  std::string text = report_text(r);
  CHECK(text.find("gold\\predicted") != std::string::npos);
  CHECK(text.find("false_positives") != std::string::npos);
  CHECK(text == report_text(r));
  std::string csv = report_csv(r);
  CHECK(csv.find("property,hits,misses,erroneous") != std::string::npos);
  CHECK(csv == report_csv(r));
}

TEST_CASE("evaluate conservation: cells plus false positives cover predictions") {
  // Sum over a predicted property's column plus its false positives is at
  // least the number of predictions of that property (multi-class overlap
  // multi-counts).
  GoldFile gold;
  gold.rows.push_back({"opposition", 10, 20});
  gold.rows.push_back({"buoy", 15, 30});
  auto mk = [](const std::string& p, int s, int e) {
    Annotation a;
    a.property = p;
    a.start = s;
    a.end = e;
    a.witness_states = {0};
    return a;
  };
  std::vector<Annotation> pred = {mk("opposition", 12, 18),
                                  mk("opposition", 40, 50),
                                  mk("opposition", 16, 17)};
  EvalReport r = evaluate(pred, gold, EvalOptions{});
  size_t col = std::find(r.table.pred_props.begin(), r.table.pred_props.end(),
                         "opposition") -
               r.table.pred_props.begin();
  int column_sum = 0;
  for (size_t g = 0; g < r.table.gold_props.size(); ++g)
    column_sum += r.table.counts[g][col];
  CHECK(column_sum + r.table.false_positives[col] >= 3);
}
