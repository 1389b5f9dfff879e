#include "pdlsl/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pdlsl/errors.hpp"
#include "pdlsl/printer.hpp"

namespace pdlsl {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string RegionCatalog::canonical_text() const {
  std::ostringstream out;
  for (const auto& [place, r] : regions)
    out << place << "=" << r.xmin << " " << r.ymin << " " << r.xmax << " "
        << r.ymax << "\n";
  return out.str();
}

std::uint64_t RegionCatalog::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical_text()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

RegionCatalog RegionCatalog::defaults() {
  // Head-origin body-scale units, y down, annotator's viewpoint. L_/R_
  // places are the signer's left/right, so R_* sits on the annotator's
  // left (negative x).
  RegionCatalog rc;
  rc.regions["HEAD"] = {-1.0, -1.0, 1.0, 1.0};
  rc.regions["R_SIDEOFHEAD"] = {-3.0, -1.5, -1.0, 1.5};
  rc.regions["L_SIDEOFHEAD"] = {1.0, -1.5, 3.0, 1.5};
  rc.regions["TORSE"] = {-2.0, 1.0, 2.0, 6.0};
  rc.regions["CENTEROFBODY"] = {-1.0, 2.0, 1.0, 4.5};
  rc.regions["R_SIDEOFBODY"] = {-4.5, 1.0, -1.0, 6.0};
  rc.regions["L_SIDEOFBODY"] = {1.0, 1.0, 4.5, 6.0};
  return rc;
}

RegionCatalog RegionCatalog::parse(const std::string& text,
                                   const std::string& origin) {
  RegionCatalog rc;
  std::string body = trim(text);
  if (!body.empty() && body[0] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(origin + ": bad JSON regions: " + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& arr = it.value();
      if (!arr.is_array() || arr.size() != 4)
        throw DataError(origin + ": region '" + it.key() +
                        "' needs [xmin,ymin,xmax,ymax]");
      rc.regions[it.key()] = {arr[0].get<double>(), arr[1].get<double>(),
                              arr[2].get<double>(), arr[3].get<double>()};
    }
  } else {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      auto hash_pos = line.find('#');
      if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw DataError(origin + ": expected 'PLACE = xmin ymin xmax ymax'");
      std::string place = trim(line.substr(0, eq));
      std::string rest = line.substr(eq + 1);
      for (auto& c : rest)
        if (c == ',') c = ' ';
      std::stringstream nums(rest);
      RegionRect r;
      if (!(nums >> r.xmin >> r.ymin >> r.xmax >> r.ymax))
        throw DataError(origin + ": region '" + place +
                        "' needs four numbers");
      rc.regions[place] = r;
    }
  }
  for (const auto& [place, r] : rc.regions)
    if (r.xmin > r.xmax || r.ymin > r.ymax)
      throw DataError(origin + ": region '" + place + "' is inverted");
  return rc;
}

RegionCatalog RegionCatalog::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open regions file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

std::vector<AtomExpr> atom_universe(const Catalogs& cat) {
  std::vector<AtomExpr> universe;
  auto art = [](const std::string& id) {
    return Term::constant(id, Sort::Articulator);
  };
  for (const auto& b1 : cat.articulators)
    for (const auto& b2 : cat.articulators) {
      if (b1 == b2) continue;
      for (Direction d : cat.directions)
        universe.push_back(make_dir_atom(
            art(b1), Term::constant(direction_name(d), Sort::Direction),
            art(b2)));
    }
  for (const auto& b : cat.articulators)
    for (const auto& c : cat.configs)
      universe.push_back(
          make_cfg_atom(art(b), Term::constant(c, Sort::Config)));
  for (const auto& b : cat.articulators)
    for (const auto& p : cat.places)
      universe.push_back(make_at_atom(art(b), Term::constant(p, Sort::Place)));
  for (size_t i = 0; i < cat.articulators.size(); ++i)
    for (size_t j = i + 1; j < cat.articulators.size(); ++j)
      universe.push_back(
          make_touch_atom(art(cat.articulators[i]), art(cat.articulators[j])));
  std::sort(universe.begin(), universe.end(),
            [](const AtomExpr& a, const AtomExpr& b) {
              return atom_key(a) < atom_key(b);
            });
  return universe;
}

namespace {

// Median frame of [start, end], preferring frames where every catalog
// articulator is tracked, else frames where at least one is.
int representative_frame(const Trace& t, int start, int end,
                         const Catalogs& cat) {
  std::vector<int> all_tracked, any_tracked;
  for (int i = start; i <= end; ++i) {
    const Frame& f = t.frames[static_cast<size_t>(i)];
    size_t present = 0;
    for (const auto& a : cat.articulators)
      if (f.position_of(a)) ++present;
    if (present == cat.articulators.size()) all_tracked.push_back(i);
    if (present > 0) any_tracked.push_back(i);
  }
  const std::vector<int>& pool =
      !all_tracked.empty() ? all_tracked
                           : (!any_tracked.empty() ? any_tracked
                                                   : std::vector<int>{});
  if (pool.empty()) return start + (end - start) / 2;
  return pool[(pool.size() - 1) / 2];
}

enum class Truth { True, False, Unknown };

Truth eval_atom(const AtomExpr& atom, const Frame& f,
                const RegionCatalog& regions, const ModelParams& params) {
  switch (atom.kind) {
    case AtomExpr::Kind::Dir: {
      const Position* p1 = f.position_of(atom.a.name);
      const Position* p2 = f.position_of(atom.b.name);
      if (!p1 || !p2) return Truth::Unknown;
      auto sector = sector_of(p1->x - p2->x, p1->y - p2->y);
      if (!sector) return Truth::False;  // zero vector has no sector
      return direction_name(*sector) == atom.dir.name ? Truth::True
                                                      : Truth::False;
    }
    case AtomExpr::Kind::Touch: {
      const Position* p1 = f.position_of(atom.a.name);
      const Position* p2 = f.position_of(atom.b.name);
      if (!p1 || !p2) return Truth::Unknown;
      double dx = p1->x - p2->x, dy = p1->y - p2->y, dz = p1->z - p2->z;
      double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
      return dist < params.tau_touch * f.scale ? Truth::True : Truth::False;
    }
    case AtomExpr::Kind::At: {
      const Position* p = f.position_of(atom.a.name);
      const Position* head = f.position_of("HEAD");
      if (!p || !head) return Truth::Unknown;  // body frame needs the head
      auto it = regions.regions.find(atom.b.name);
      if (it == regions.regions.end()) return Truth::Unknown;
      double rx = (p->x - head->x) / f.scale;
      double ry = (p->y - head->y) / f.scale;
      return it->second.contains(rx, ry) ? Truth::True : Truth::False;
    }
    case AtomExpr::Kind::Cfg: {
      // Label-driven: configuration labels are annotations, independent of
      // whether the articulator's position is tracked in this frame.
      auto it = f.config_labels.find(atom.a.name);
      if (it == f.config_labels.end()) return Truth::Unknown;
      return it->second == atom.b.name ? Truth::True : Truth::False;
    }
  }
  return Truth::Unknown;
}

AtomPartition eval_props_at(const Trace& t, int rep, const Catalogs& cat,
                            const RegionCatalog& regions,
                            const ModelParams& params) {
  AtomPartition out;
  const Frame& f = t.frames[static_cast<size_t>(rep)];
  for (const AtomExpr& atom : atom_universe(cat)) {
    switch (eval_atom(atom, f, regions, params)) {
      case Truth::True:
        out.props_true.insert(atom_key(atom));
        break;
      case Truth::False:
        out.props_false.insert(atom_key(atom));
        break;
      case Truth::Unknown:
        out.props_unknown.insert(atom_key(atom));
        break;
    }
  }
  return out;
}

}  // namespace

AtomPartition eval_props(const Trace& t, const Segment& hold,
                         const Catalogs& catalogs, const RegionCatalog& regions,
                         const ModelParams& params) {
  if (hold.kind != SegKind::Hold)
    throw DataError("eval_props: segment is not a hold");
  if (hold.start > hold.end) throw DataError("eval_props: hold interval empty");
  int rep = representative_frame(t, hold.start, hold.end, catalogs);
  return eval_props_at(t, rep, catalogs, regions, params);
}

std::set<std::string> eval_actions(const Trace& t, const Segment& movement,
                                   const Catalogs& catalogs,
                                   const ModelParams& params) {
  if (movement.kind != SegKind::Movement)
    throw DataError("eval_actions: segment is not a movement");
  std::set<std::string> actions;
  const int start = movement.start;
  const int end = movement.end;
  double scale = 0.0;
  for (int i = start; i <= end; ++i)
    scale += t.frames[static_cast<size_t>(i)].scale;
  scale /= static_cast<double>(end - start + 1);

  for (const auto& art : catalogs.articulators) {
    const Position* first = t.frames[static_cast<size_t>(start)].position_of(art);
    const Position* last = t.frames[static_cast<size_t>(end)].position_of(art);
    if (!first || !last) continue;
    double nx = last->x - first->x;
    double ny = last->y - first->y;
    double net = std::sqrt(nx * nx + ny * ny);
    double path = 0.0;
    for (int i = start + 1; i <= end; ++i) {
      const Position* a = t.frames[static_cast<size_t>(i - 1)].position_of(art);
      const Position* b = t.frames[static_cast<size_t>(i)].position_of(art);
      if (!a || !b) continue;
      double dx = b->x - a->x, dy = b->y - a->y;
      path += std::sqrt(dx * dx + dy * dy);
    }
    Term art_term = Term::constant(art, Sort::Articulator);
    if (net >= params.theta_move * scale) {
      auto sector = sector_of(nx, ny);
      actions.insert(action_key(make_move_action(
          art_term,
          Term::constant(direction_name(*sector), Sort::Direction))));
    } else if (path >= params.theta_trill * scale) {
      actions.insert(action_key(make_trill_action(art_term)));
    }
  }
  return actions;
}

namespace {

bool all_trill(const std::set<std::string>& actions) {
  for (const auto& a : actions)
    if (a.rfind("trill(", 0) != 0) return false;
  return !actions.empty();
}

}  // namespace

Lts build_lts(const Trace& t, const std::vector<Segment>& segs,
              const Catalogs& catalogs, const RegionCatalog& regions,
              const ModelParams& params) {
  if (segs.empty()) throw DataError("build_lts: empty segmentation");
  const int last_frame = static_cast<int>(t.frames.size()) - 1;
  for (size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].start > segs[i].end)
      throw DataError("build_lts: empty segment");
    if (i > 0 && (segs[i].start != segs[i - 1].end + 1 ||
                  segs[i].kind == segs[i - 1].kind))
      throw DataError("build_lts: segments must alternate and be contiguous");
  }
  if (segs.front().start != 0 || segs.back().end != last_frame)
    throw DataError("build_lts: segments must cover the whole trace");

  // Normalize into alternating hold/movement pieces, synthesizing a
  // one-frame hold when the trace starts or ends mid-movement. The movement
  // keeps its original interval for action evaluation.
  struct Hold {
    int start, end;
  };
  struct Move {
    int eval_start, eval_end;
  };
  std::vector<Hold> holds;
  std::vector<Move> moves;
  int synthetic_holds = 0;
  for (const Segment& s : segs) {
    if (s.kind == SegKind::Hold) {
      holds.push_back({s.start, s.end});
    } else {
      if (holds.empty()) {
        holds.push_back({s.start, s.start});
        ++synthetic_holds;
      }
      moves.push_back({s.start, s.end});
    }
  }
  if (holds.size() == moves.size()) {
    holds.push_back({segs.back().end, segs.back().end});
    ++synthetic_holds;
  }

  struct Pending {
    int start, end;
    AtomPartition atoms;
    std::vector<std::set<std::string>> loops;
  };
  auto eval_hold = [&](int start, int end) {
    return eval_props(t, Segment{SegKind::Hold, start, end}, catalogs, regions,
                      params);
  };

  Lts m;
  int empty_merges = 0;
  Pending cur{holds[0].start, holds[0].end, eval_hold(holds[0].start, holds[0].end), {}};

  auto finalize = [&](Pending& p) {
    StateNode s;
    s.id = static_cast<int>(m.states.size());
    s.start = p.start;
    s.end = p.end;
    s.props_true = std::move(p.atoms.props_true);
    s.props_false = std::move(p.atoms.props_false);
    s.props_unknown = std::move(p.atoms.props_unknown);
    m.states.push_back(std::move(s));
    std::vector<std::set<std::string>> unique_loops;
    for (auto& acts : p.loops) {
      bool seen = false;
      for (const auto& u : unique_loops)
        if (u == acts) {
          seen = true;
          break;
        }
      if (!seen) unique_loops.push_back(acts);
    }
    for (auto& acts : unique_loops)
      m.edges.push_back({m.states.back().id, m.states.back().id, acts});
    return m.states.back().id;
  };

  for (size_t i = 0; i < moves.size(); ++i) {
    std::set<std::string> acts =
        eval_actions(t, Segment{SegKind::Movement, moves[i].eval_start,
                                moves[i].eval_end},
                     catalogs, params);
    const Hold& next = holds[i + 1];
    if (acts.empty()) {
      // Unobservable movement: absorb it and the next hold into the current
      // state and re-evaluate at the merged representative frame.
      cur.end = next.end;
      cur.atoms = eval_hold(cur.start, cur.end);
      ++empty_merges;
      continue;
    }
    AtomPartition next_atoms = eval_hold(next.start, next.end);
    if (all_trill(acts) && next_atoms.props_true == cur.atoms.props_true &&
        next_atoms.props_false == cur.atoms.props_false) {
      cur.end = next.end;
      cur.loops.push_back(std::move(acts));
      continue;
    }
    int from_id = finalize(cur);
    cur = Pending{next.start, next.end, std::move(next_atoms), {}};
    // The chain edge targets the state the next finalize creates; finalize
    // assigns ids sequentially, so that is always from_id + 1.
    m.edges.push_back({from_id, from_id + 1, std::move(acts)});
  }
  finalize(cur);

  m.metadata["params"] = {{"tau_touch", params.tau_touch},
                          {"theta_move", params.theta_move},
                          {"theta_trill", params.theta_trill}};
  m.metadata["catalogs_hash"] = catalogs.hash();
  m.metadata["regions_hash"] = regions.hash();
  m.metadata["source"] = t.source;
  m.metadata["dims"] = t.dims;
  m.metadata["empty_action_merges"] = empty_merges;
  m.metadata["synthetic_boundary_holds"] = synthetic_holds;
  return m;
}

nlohmann::json lts_to_json(const Lts& m) {
  nlohmann::json j;
  j["states"] = nlohmann::json::array();
  for (const auto& s : m.states) {
    nlohmann::json js;
    js["id"] = s.id;
    js["interval"] = {s.start, s.end};
    js["true"] = s.props_true;
    js["false"] = s.props_false;
    js["unknown"] = s.props_unknown;
    j["states"].push_back(std::move(js));
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : m.edges) {
    nlohmann::json je;
    je["from"] = e.from;
    je["to"] = e.to;
    je["actions"] = e.actions;
    j["edges"].push_back(std::move(je));
  }
  j["metadata"] = m.metadata;
  return j;
}

Lts lts_from_json(const nlohmann::json& j) {
  Lts m;
  if (!j.contains("states") || !j.contains("edges"))
    throw DataError("LTS JSON needs 'states' and 'edges'");
  for (const auto& js : j["states"]) {
    StateNode s;
    s.id = js.at("id").get<int>();
    s.start = js.at("interval").at(0).get<int>();
    s.end = js.at("interval").at(1).get<int>();
    for (const auto& a : js.at("true")) s.props_true.insert(a.get<std::string>());
    for (const auto& a : js.at("false"))
      s.props_false.insert(a.get<std::string>());
    for (const auto& a : js.at("unknown"))
      s.props_unknown.insert(a.get<std::string>());
    if (s.id != static_cast<int>(m.states.size()))
      throw DataError("LTS JSON: state ids must be 0..n-1 in order");
    m.states.push_back(std::move(s));
  }
  if (m.states.empty()) throw DataError("LTS JSON: no states");
  for (const auto& je : j["edges"]) {
    LtsEdge e;
    e.from = je.at("from").get<int>();
    e.to = je.at("to").get<int>();
    for (const auto& a : je.at("actions"))
      e.actions.insert(a.get<std::string>());
    if (e.from < 0 || e.from >= static_cast<int>(m.states.size()) ||
        e.to < 0 || e.to >= static_cast<int>(m.states.size()))
      throw DataError("LTS JSON: edge endpoint out of range");
    if (e.actions.empty()) throw DataError("LTS JSON: edge with no actions");
    m.edges.push_back(std::move(e));
  }
  if (j.contains("metadata")) m.metadata = j["metadata"];
  return m;
}

Lts load_lts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": bad model JSON: " + e.what());
  }
  return lts_from_json(j);
}

}  // namespace pdlsl
