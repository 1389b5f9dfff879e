#pragma once

// Model extraction: evaluates atomic propositions on holds and atomic
// actions on movements and assembles the time-ordered labeled transition
// system. States carry a three-way atom partition (true/false/unknown over
// the catalog-generated universe); edges carry nonempty action sets and
// never contain skip.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdlsl/ast.hpp"
#include "pdlsl/catalog.hpp"
#include "pdlsl/segment.hpp"
#include "pdlsl/trace.hpp"

namespace pdlsl {

// Axis-aligned articulation-place regions in body-centric coordinates:
// origin at the HEAD position, y down, units of body scale. Regions may
// overlap.
struct RegionRect {
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
  bool contains(double x, double y) const {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }
};

struct RegionCatalog {
  std::map<std::string, RegionRect> regions;  // place id -> rectangle

  std::string canonical_text() const;
  std::uint64_t hash() const;

  static RegionCatalog defaults();
  // Text lines `PLACE = xmin ymin xmax ymax` (or commas), '#' comments; or a
  // JSON object {place: [xmin,ymin,xmax,ymax]}.
  static RegionCatalog parse(const std::string& text,
                             const std::string& origin = "<regions>");
  static RegionCatalog load_file(const std::string& path);
};

struct ModelParams {
  double tau_touch = 0.35;   // touch distance, body scales
  double theta_move = 0.5;   // net displacement for a directed move
  double theta_trill = 1.0;  // path length for a trill
};

struct StateNode {
  int id = 0;
  int start = 0;  // inclusive frame interval
  int end = 0;
  std::set<std::string> props_true;
  std::set<std::string> props_false;
  std::set<std::string> props_unknown;
};

struct LtsEdge {
  int from = 0;
  int to = 0;
  std::set<std::string> actions;  // canonical action keys, nonempty, no skip
};

struct Lts {
  std::vector<StateNode> states;  // time-ordered chain
  std::vector<LtsEdge> edges;     // chain edges plus self-loops
  nlohmann::json metadata = nlohmann::json::object();

  const StateNode& state(int id) const { return states.at(id); }
};

// Every atom the catalogs generate, in canonical key order.
std::vector<AtomExpr> atom_universe(const Catalogs& catalogs);

struct AtomPartition {
  std::set<std::string> props_true, props_false, props_unknown;
};

// Evaluates the atom universe at the hold's representative frame (median
// index among frames with every articulator tracked, else median among
// frames with any tracked).
AtomPartition eval_props(const Trace& t, const Segment& hold,
                         const Catalogs& catalogs, const RegionCatalog& regions,
                         const ModelParams& params);

// Actions observed during a movement: move(b, sector(net)) when the net
// displacement reaches theta_move, else trill(b) when the path length
// reaches theta_trill. May be empty.
std::set<std::string> eval_actions(const Trace& t, const Segment& movement,
                                   const Catalogs& catalogs,
                                   const ModelParams& params);

// Builds the chain LTS: one state per hold, one edge per movement. Empty
// action sets merge their flanking holds; all-trill movements between
// identically-labeled holds become self-loops. A trace starting or ending in
// a movement gets a synthetic one-frame hold at the boundary.
Lts build_lts(const Trace& t, const std::vector<Segment>& segs,
              const Catalogs& catalogs, const RegionCatalog& regions,
              const ModelParams& params);

// Interchange format consumed by the checker and external tools.
nlohmann::json lts_to_json(const Lts& m);
Lts lts_from_json(const nlohmann::json& j);
Lts load_lts(const std::string& path);

}  // namespace pdlsl
