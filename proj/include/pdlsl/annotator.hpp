#pragma once

// Runs the property database over a model, maps satisfying states to
// frame-interval annotation proposals, and scores proposals against gold
// annotations with an overlap matching table.

#include <string>
#include <vector>

#include "json.hpp"
#include "pdlsl/checker.hpp"
#include "pdlsl/model.hpp"

namespace pdlsl {

struct PropertyDb {
  Catalogs catalogs;
  std::vector<Definition> defs;          // file order
  std::vector<std::string> properties;   // non-helper names, file order

  DefEnv env() const { return DefEnv{&catalogs, defs}; }
};

// Property database text: `name = expr` lines per the formula grammar,
// '#' comments. A `#! helpers: a, b` pragma marks definitions that are only
// referenced by others and are not annotated themselves.
PropertyDb parse_property_db(const std::string& text, const std::string& origin,
                             const Catalogs& catalogs);
PropertyDb load_property_db(const std::string& path, const Catalogs& catalogs);

// The shipped database: opposition, tap, buoy, head_anchor plus the
// hands_config helper. The head-anchor touch atom can instead read
// at(w,HEAD) via the "region" variant.
std::string default_property_db_text(const std::string& head_anchor_mode);

struct AnnotateOptions {
  CheckMode mode = CheckMode::Strict;
  // Emit annotations for vacuously satisfied formulas too (implications
  // whose antecedents never realize, boxes that traverse no step).
  bool allow_vacuous = false;
};

struct Annotation {
  std::string property;
  int start = 0;
  int end = 0;
  Binding binding;
  Verdict verdict = Verdict::True;  // True or Unknown, never False
  std::vector<int> witness_states;  // time-ordered, nonempty

  bool operator==(const Annotation& o) const {
    return property == o.property && start == o.start && end == o.end &&
           binding == o.binding && verdict == o.verdict &&
           witness_states == o.witness_states;
  }
};

// For each template and satisfying state s, the annotation spans from
// s's interval start to the end of the last witness state, witnesses being
// the states reached through the modalities. Implication-shaped formulas
// annotate only when non-vacuously satisfied: every top-level antecedent
// must be true at s and every traversed box must take at least one step
// (for starred programs, one non-reflexive step). Same-property proposals
// with identical intervals are deduplicated; proposals whose interval lies
// inside a longer same-property proposal are dropped.
std::vector<Annotation> annotate(const Lts& m, const PropertyDb& db,
                                 const AnnotateOptions& opts);

nlohmann::json annotation_to_json(const Annotation& a);
Annotation annotation_from_json(const nlohmann::json& j);

// JSON-lines serialization; lines without a "property" key (e.g. the meta
// header) are ignored on read.
std::string annotations_to_jsonl(const std::vector<Annotation>& anns,
                                 const nlohmann::json& meta);
std::vector<Annotation> annotations_from_jsonl(const std::string& text,
                                               const std::string& origin);

struct GoldRow {
  std::string property;
  int start = 0;
  int end = 0;
};

struct GoldFile {
  std::vector<GoldRow> rows;
  std::vector<std::string> warnings;
  int skipped_rows = 0;
};

// CSV `property,start,end`; malformed rows warn and are skipped.
GoldFile parse_gold(const std::string& text, const std::string& origin);
GoldFile load_gold(const std::string& path);

struct MatchTable {
  std::vector<std::string> gold_props;       // rows
  std::vector<std::string> pred_props;       // columns
  std::vector<std::vector<int>> counts;      // counts[row][col]
  std::vector<int> false_positives;          // per column
};

struct SummaryRow {
  std::string property;
  int hits = 0;
  int misses = 0;
  int erroneous = 0;
};

struct EvalReport {
  MatchTable table;
  std::vector<SummaryRow> summary;
  int skipped_gold_rows = 0;
  std::vector<std::string> warnings;
};

struct EvalOptions {
  double min_iou = 0.0;       // 0 = any shared frame counts as overlap
  bool count_unknown = false; // include Unknown-verdict predictions
  // When nonempty, gold rows with names outside this set warn and skip.
  std::vector<std::string> known_properties;
};

// Overlap = sharing at least one frame (or IoU >= min_iou when set). A
// prediction overlapping gold of several properties counts in each cell; a
// prediction overlapping no gold at all counts as a false positive of its
// property.
EvalReport evaluate(const std::vector<Annotation>& pred, const GoldFile& gold,
                    const EvalOptions& opts);

std::string report_text(const EvalReport& r);
std::string report_csv(const EvalReport& r);

}  // namespace pdlsl
