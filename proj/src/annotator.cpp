#include "pdlsl/annotator.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "pdlsl/errors.hpp"
#include "pdlsl/parser.hpp"
#include "pdlsl/printer.hpp"

namespace pdlsl {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

PropertyDb parse_property_db(const std::string& text, const std::string& origin,
                             const Catalogs& catalogs) {
  PropertyDb db;
  db.catalogs = catalogs;
  std::set<std::string> helpers;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::string t = trim(line);
    if (t.rfind("#!", 0) == 0) {
      std::string pragma = trim(t.substr(2));
      if (pragma.rfind("helpers:", 0) == 0)
        for (const auto& name : split_list(pragma.substr(8)))
          helpers.insert(name);
      else
        throw DataError(origin + ": unknown pragma '" + pragma + "'");
    }
  }
  db.defs = parse_definitions(text, catalogs, origin);
  for (const auto& h : helpers) {
    bool found = false;
    for (const auto& d : db.defs)
      if (d.name == h) found = true;
    if (!found)
      throw DataError(origin + ": helper '" + h + "' is not defined");
  }
  for (const auto& d : db.defs)
    if (!helpers.count(d.name)) db.properties.push_back(d.name);
  return db;
}

PropertyDb load_property_db(const std::string& path, const Catalogs& catalogs) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open property database: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_property_db(buf.str(), path, catalogs);
}

std::string default_property_db_text(const std::string& head_anchor_mode) {
  std::string anchor_atom;
  if (head_anchor_mode == "touch")
    anchor_atom = "touch(HEAD,w)";
  else if (head_anchor_mode == "region")
    anchor_atom = "at(w,HEAD)";
  else
    throw DataError("head_anchor mode must be 'touch' or 'region', got '" +
                    head_anchor_mode + "'");
  return
      "# Lexical-structure property database for 2D hand tracking.\n"
      "#! helpers: hands_config\n"
      "\n"
      "hands_config = \\c:Config . ( cfg(RH,c) & cfg(LH,c) )\n"
      "opposition = \\c:Config . ( dir(RH,W,LH) & hands_config(c) )\n"
      "tap = \\s:Articulator, w:Articulator . ( !touch(s,w) -> "
      "[moves(s)+moves(w)] touch(s,w) -> [skip;skip] !touch(s,w) )\n"
      "buoy = \\s:Articulator, posture:Posture . ( posture & [moves(s)*] "
      "posture )\n"
      "head_anchor = \\s:Articulator, w:Articulator, posture:Posture . ( "
      "buoy(s, posture) & " + anchor_atom + " )\n";
}

namespace {

// ---- witness traversal ---------------------------------------------------

struct Walk {
  std::set<int> finals;
  std::set<int> alongs;  // every state touched along the traversed paths
};

Walk prog_walk(const Lts& m, DenoteCache& cache, int from, const Program& p) {
  Walk w;
  switch (p.kind) {
    case Program::Kind::Atomic:
    case Program::Kind::Intersect: {
      for (const auto& [a, b] : cache.get(p))
        if (a == from) w.finals.insert(b);
      w.alongs = w.finals;
      break;
    }
    case Program::Kind::Union: {
      Walk l = prog_walk(m, cache, from, *p.left);
      Walk r = prog_walk(m, cache, from, *p.right);
      w.finals.insert(l.finals.begin(), l.finals.end());
      w.finals.insert(r.finals.begin(), r.finals.end());
      w.alongs.insert(l.alongs.begin(), l.alongs.end());
      w.alongs.insert(r.alongs.begin(), r.alongs.end());
      break;
    }
    case Program::Kind::Seq: {
      Walk first = prog_walk(m, cache, from, *p.left);
      w.alongs = first.alongs;
      for (int mid : first.finals) {
        Walk second = prog_walk(m, cache, mid, *p.right);
        w.finals.insert(second.finals.begin(), second.finals.end());
        w.alongs.insert(second.alongs.begin(), second.alongs.end());
      }
      break;
    }
    case Program::Kind::Star: {
      for (const auto& [a, b] : cache.get(p))
        if (a == from) w.finals.insert(b);
      w.alongs = w.finals;
      break;
    }
  }
  return w;
}

bool match_implies(const Expr& e, ExprPtr& l, ExprPtr& r) {
  if (e.kind != Expr::Kind::Not || e.left->kind != Expr::Kind::And)
    return false;
  if (e.left->right->kind != Expr::Kind::Not) return false;
  l = e.left->left;
  r = e.left->right->left;
  return true;
}

// Walks the positive structure of a formula from a set of states, gathering
// witness states reached through boxes. When `require_steps` is set, every
// traversed box must have at least one successor — for starred programs at
// least one actual (single-step) transition — otherwise the satisfaction is
// vacuous and the walk fails. Negations are not traversed.
bool traverse_positive(const Lts& m, DenoteCache& cache, const Expr& f,
                       const std::set<int>& states, bool require_steps,
                       std::set<int>& witnesses) {
  switch (f.kind) {
    case Expr::Kind::And:
      return traverse_positive(m, cache, *f.left, states, require_steps,
                               witnesses) &&
             traverse_positive(m, cache, *f.right, states, require_steps,
                               witnesses);
    case Expr::Kind::Box: {
      for (int s : states) {
        Walk w = prog_walk(m, cache, s, *f.prog);
        if (require_steps) {
          if (f.prog->kind == Program::Kind::Star) {
            bool step = false;
            for (const auto& [a, b] : cache.get(*f.prog->left))
              if (a == s) {
                (void)b;
                step = true;
                break;
              }
            if (!step) return false;
          } else if (w.finals.empty()) {
            return false;
          }
        }
        witnesses.insert(w.alongs.begin(), w.alongs.end());
        witnesses.insert(w.finals.begin(), w.finals.end());
        if (!traverse_positive(m, cache, *f.left, w.finals, require_steps,
                               witnesses))
          return false;
      }
      return true;
    }
    default:
      return true;  // atoms, Top, negations: nothing to traverse
  }
}

struct VerdictCache {
  const Lts& m;
  DenoteCache& denote;
  std::map<std::string, std::vector<Verdict>> memo;

  const std::vector<Verdict>& get(const Expr& f) {
    std::string key = print_formula(f);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    return memo.emplace(key, check(m, f, denote)).first->second;
  }
};

// Builds one annotation from a satisfying (state, grounded formula) pair, or
// nothing when satisfaction is vacuous.
std::optional<Annotation> build_annotation(
    const Lts& m, DenoteCache& cache, VerdictCache& verdicts,
    const std::string& property, const TemplateResult& r,
    const AnnotateOptions& opts) {
  std::set<int> witnesses{r.state};
  const bool require = !opts.allow_vacuous;

  // Unfold the right-associated implication chain at the top level.
  std::vector<ExprPtr> antecedents;
  ExprPtr consequent = r.grounded;
  ExprPtr l, rr;
  while (match_implies(*consequent, l, rr)) {
    antecedents.push_back(l);
    consequent = rr;
  }
  if (require) {
    for (const auto& a : antecedents)
      if (verdicts.get(*a)[static_cast<size_t>(r.state)] != Verdict::True)
        return std::nullopt;  // antecedent not realized here
  }
  for (const auto& a : antecedents)
    if (!traverse_positive(m, cache, *a, {r.state}, require, witnesses))
      return std::nullopt;
  if (!traverse_positive(m, cache, *consequent, {r.state}, require, witnesses))
    return std::nullopt;

  Annotation ann;
  ann.property = property;
  ann.binding = r.binding;
  ann.verdict = r.verdict;
  ann.witness_states.assign(witnesses.begin(), witnesses.end());
  ann.start = m.state(r.state).start;
  int end = m.state(r.state).end;
  for (int w : ann.witness_states) end = std::max(end, m.state(w).end);
  ann.end = end;
  return ann;
}

std::string binding_text(const Binding& b) {
  std::string s;
  for (const auto& [k, v] : b) s += k + "=" + v + ";";
  return s;
}

}  // namespace

std::vector<Annotation> annotate(const Lts& m, const PropertyDb& db,
                                 const AnnotateOptions& opts) {
  DefEnv env = db.env();
  DenoteCache cache(m);
  VerdictCache verdicts{m, cache, {}};

  std::vector<Annotation> out;
  for (const auto& property : db.properties) {
    const Definition* def = env.find(property);
    if (!def) throw DataError("property '" + property + "' is not defined");
    auto results = check_template(m, def->value, env, opts.mode);
    for (const auto& r : results) {
      if (!r.grounded) continue;
      if (auto ann =
              build_annotation(m, cache, verdicts, property, r, opts))
        out.push_back(std::move(*ann));
    }
  }

  // Deduplicate identical (property, interval, verdict) proposals that come
  // from symmetric bindings, keeping the smallest binding.
  std::sort(out.begin(), out.end(), [](const Annotation& a,
                                       const Annotation& b) {
    if (a.property != b.property) return a.property < b.property;
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    if (a.verdict != b.verdict)
      return static_cast<int>(a.verdict) < static_cast<int>(b.verdict);
    return binding_text(a.binding) < binding_text(b.binding);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Annotation& a, const Annotation& b) {
                          return a.property == b.property &&
                                 a.start == b.start && a.end == b.end &&
                                 a.verdict == b.verdict;
                        }),
            out.end());

  // A proposal strictly contained in a longer same-property proposal of the
  // same verdict restates part of it; keep the maximal span.
  std::vector<Annotation> kept;
  for (const auto& a : out) {
    bool subsumed = false;
    for (const auto& b : out) {
      if (&a == &b || a.property != b.property || a.verdict != b.verdict)
        continue;
      if (b.start <= a.start && a.end <= b.end &&
          (b.start != a.start || b.end != a.end)) {
        subsumed = true;
        break;
      }
    }
    if (!subsumed) kept.push_back(a);
  }

  std::sort(kept.begin(), kept.end(), [](const Annotation& a,
                                         const Annotation& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    if (a.property != b.property) return a.property < b.property;
    return binding_text(a.binding) < binding_text(b.binding);
  });
  return kept;
}

nlohmann::json annotation_to_json(const Annotation& a) {
  nlohmann::json j;
  j["property"] = a.property;
  j["start"] = a.start;
  j["end"] = a.end;
  j["binding"] = a.binding;
  j["verdict"] = verdict_name(a.verdict);
  j["states"] = a.witness_states;
  return j;
}

Annotation annotation_from_json(const nlohmann::json& j) {
  Annotation a;
  a.property = j.at("property").get<std::string>();
  a.start = j.at("start").get<int>();
  a.end = j.at("end").get<int>();
  if (j.contains("binding"))
    for (auto it = j["binding"].begin(); it != j["binding"].end(); ++it)
      a.binding[it.key()] = it.value().get<std::string>();
  std::string v = j.value("verdict", "true");
  a.verdict = v == "unknown" ? Verdict::Unknown : Verdict::True;
  if (j.contains("states"))
    for (const auto& s : j["states"]) a.witness_states.push_back(s.get<int>());
  return a;
}

std::string annotations_to_jsonl(const std::vector<Annotation>& anns,
                                 const nlohmann::json& meta) {
  std::string out;
  if (!meta.is_null() && !meta.empty()) {
    nlohmann::json header;
    header["meta"] = meta;
    out += header.dump() + "\n";
  }
  for (const auto& a : anns) out += annotation_to_json(a).dump() + "\n";
  return out;
}

std::vector<Annotation> annotations_from_jsonl(const std::string& text,
                                               const std::string& origin) {
  std::vector<Annotation> out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": bad JSON line: " + e.what());
    }
    if (!j.contains("property")) continue;  // meta line
    out.push_back(annotation_from_json(j));
  }
  return out;
}

GoldFile parse_gold(const std::string& text, const std::string& origin) {
  GoldFile g;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(t);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (lineno == 1 && cells.size() == 3 && cells[0] == "property") continue;
    if (cells.size() != 3) {
      g.warnings.push_back(origin + ":" + std::to_string(lineno) +
                           ": malformed gold row (need property,start,end)");
      ++g.skipped_rows;
      continue;
    }
    try {
      GoldRow row{cells[0], std::stoi(cells[1]), std::stoi(cells[2])};
      if (row.start > row.end) throw std::invalid_argument("inverted");
      g.rows.push_back(std::move(row));
    } catch (const std::exception&) {
      g.warnings.push_back(origin + ":" + std::to_string(lineno) +
                           ": malformed gold row '" + t + "'");
      ++g.skipped_rows;
    }
  }
  return g;
}

GoldFile load_gold(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open gold file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_gold(buf.str(), path);
}

namespace {

bool overlaps(int a0, int a1, int b0, int b1, double min_iou) {
  if (a0 > b1 || b0 > a1) return false;
  if (min_iou <= 0.0) return true;
  double inter = std::min(a1, b1) - std::max(a0, b0) + 1;
  double uni = std::max(a1, b1) - std::min(a0, b0) + 1;
  return inter / uni >= min_iou;
}

}  // namespace

EvalReport evaluate(const std::vector<Annotation>& pred_in,
                    const GoldFile& gold_in, const EvalOptions& opts) {
  EvalReport report;
  report.warnings = gold_in.warnings;
  report.skipped_gold_rows = gold_in.skipped_rows;

  std::vector<GoldRow> gold;
  for (const auto& row : gold_in.rows) {
    if (!opts.known_properties.empty() &&
        std::find(opts.known_properties.begin(), opts.known_properties.end(),
                  row.property) == opts.known_properties.end()) {
      report.warnings.push_back("unknown gold property '" + row.property +
                                "' (skipped)");
      ++report.skipped_gold_rows;
      continue;
    }
    gold.push_back(row);
  }

  std::vector<Annotation> pred;
  for (const auto& a : pred_in)
    if (a.verdict == Verdict::True || opts.count_unknown) pred.push_back(a);

  std::set<std::string> gold_names, pred_names;
  for (const auto& g : gold) gold_names.insert(g.property);
  for (const auto& p : pred) pred_names.insert(p.property);
  std::set<std::string> all_names = gold_names;
  all_names.insert(pred_names.begin(), pred_names.end());

  MatchTable& t = report.table;
  t.gold_props.assign(gold_names.begin(), gold_names.end());
  t.pred_props.assign(all_names.begin(), all_names.end());
  t.counts.assign(t.gold_props.size(),
                  std::vector<int>(t.pred_props.size(), 0));
  t.false_positives.assign(t.pred_props.size(), 0);

  auto row_of = [&](const std::string& name) {
    return std::find(t.gold_props.begin(), t.gold_props.end(), name) -
           t.gold_props.begin();
  };
  auto col_of = [&](const std::string& name) {
    return std::find(t.pred_props.begin(), t.pred_props.end(), name) -
           t.pred_props.begin();
  };

  // Matching table: cell (g,p) counts predicted-p annotations overlapping
  // >= 1 gold-g annotation; one prediction may increment several rows.
  std::map<std::string, std::set<size_t>> gold_hit_by_own;  // property -> gold idx
  for (const auto& p : pred) {
    std::set<std::string> overlapped;
    for (size_t gi = 0; gi < gold.size(); ++gi) {
      const auto& g = gold[gi];
      if (!overlaps(p.start, p.end, g.start, g.end, opts.min_iou)) continue;
      overlapped.insert(g.property);
      if (g.property == p.property) gold_hit_by_own[g.property].insert(gi);
    }
    if (overlapped.empty()) {
      ++t.false_positives[col_of(p.property)];
    } else {
      for (const auto& gname : overlapped)
        ++t.counts[row_of(gname)][col_of(p.property)];
    }
  }

  for (const auto& name : all_names) {
    SummaryRow row;
    row.property = name;
    int gold_count = 0;
    for (const auto& g : gold)
      if (g.property == name) ++gold_count;
    row.hits = static_cast<int>(gold_hit_by_own[name].size());
    row.misses = gold_count - row.hits;
    for (const auto& p : pred) {
      if (p.property != name) continue;
      bool any = false, own = false;
      for (const auto& g : gold) {
        if (!overlaps(p.start, p.end, g.start, g.end, opts.min_iou)) continue;
        any = true;
        if (g.property == name) own = true;
      }
      if (any && !own) ++row.erroneous;
    }
    report.summary.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string pad(const std::string& s, size_t width) {
  if (s.size() >= width) return s;
  return s + std::string(width - s.size(), ' ');
}

std::string lpad(const std::string& s, size_t width) {
  if (s.size() >= width) return s;
  return std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string report_text(const EvalReport& r) {
  const MatchTable& t = r.table;
  std::ostringstream out;
  size_t name_w = 15;  // fits "false_positives"
  for (const auto& n : t.gold_props) name_w = std::max(name_w, n.size());
  std::vector<size_t> col_w;
  for (const auto& n : t.pred_props) col_w.push_back(std::max<size_t>(6, n.size()));

  out << pad("gold\\predicted", name_w + 2);
  for (size_t c = 0; c < t.pred_props.size(); ++c)
    out << lpad(t.pred_props[c], col_w[c] + 2);
  out << "\n";
  for (size_t g = 0; g < t.gold_props.size(); ++g) {
    out << pad(t.gold_props[g], name_w + 2);
    for (size_t c = 0; c < t.pred_props.size(); ++c)
      out << lpad(std::to_string(t.counts[g][c]), col_w[c] + 2);
    out << "\n";
  }
  out << pad("false_positives", name_w + 2);
  for (size_t c = 0; c < t.pred_props.size(); ++c)
    out << lpad(std::to_string(t.false_positives[c]), col_w[c] + 2);
  out << "\n\n";

  out << pad("property", name_w + 2) << lpad("hits", 8) << lpad("misses", 8)
      << lpad("erroneous", 11) << "\n";
  for (const auto& s : r.summary)
    out << pad(s.property, name_w + 2) << lpad(std::to_string(s.hits), 8)
        << lpad(std::to_string(s.misses), 8)
        << lpad(std::to_string(s.erroneous), 11) << "\n";
  if (r.skipped_gold_rows > 0)
    out << "\nskipped_gold_rows: " << r.skipped_gold_rows << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  return out.str();
}

std::string report_csv(const EvalReport& r) {
  const MatchTable& t = r.table;
  std::ostringstream out;
  out << "gold\\predicted";
  for (const auto& c : t.pred_props) out << "," << c;
  out << "\n";
  for (size_t g = 0; g < t.gold_props.size(); ++g) {
    out << t.gold_props[g];
    for (size_t c = 0; c < t.pred_props.size(); ++c)
      out << "," << t.counts[g][c];
    out << "\n";
  }
  out << "false_positives";
  for (size_t c = 0; c < t.pred_props.size(); ++c)
    out << "," << t.false_positives[c];
  out << "\n\n";
  out << "property,hits,misses,erroneous\n";
  for (const auto& s : r.summary)
    out << s.property << "," << s.hits << "," << s.misses << ","
        << s.erroneous << "\n";
  if (r.skipped_gold_rows > 0)
    out << "\nskipped_gold_rows," << r.skipped_gold_rows << "\n";
  return out.str();
}

}  // namespace pdlsl
