#pragma once

// Tracking-trace ingestion: per-frame articulator positions with optional
// configuration labels, gap filling, and 3D-to-2D projection.
//
// Coordinates are y-down image coordinates from the annotator's viewpoint;
// z, when present, is the camera-axis depth that project_2d drops. scale is
// the body-scale length (e.g. head width) in the same units; speeds and
// distance thresholds are expressed in body-scales.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdlsl/catalog.hpp"

namespace pdlsl {

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Frame {
  int index = 0;
  double t_ms = 0.0;
  std::map<std::string, Position> positions;      // present articulators only
  std::map<std::string, std::string> config_labels;
  double scale = 1.0;

  const Position* position_of(const std::string& articulator) const {
    auto it = positions.find(articulator);
    return it == positions.end() ? nullptr : &it->second;
  }
};

struct Trace {
  std::vector<Frame> frames;
  double frame_rate = 0.0;  // Hz, derived from timestamps
  std::string source;
  int dims = 2;
};

struct TraceLoadOptions {
  std::string format = "auto";  // csv | json | auto (sniff extension/content)
  double default_scale = 1.0;   // used when the file has no scale column
};

// CSV columns: frame,t_ms[,scale] plus <ART>_x,<ART>_y[,<ART>_z][,<ART>_cfg]
// per articulator; HEAD_w is accepted as an alias for scale. JSON: an array
// of frame objects with the same field names. Empty or unparseable
// coordinate cells become absent positions.
Trace load_trace(const std::string& path, const TraceLoadOptions& opts,
                 const Catalogs& catalogs);
Trace parse_trace_csv(const std::string& text, const std::string& origin,
                      const TraceLoadOptions& opts, const Catalogs& catalogs);
Trace parse_trace_json(const std::string& text, const std::string& origin,
                       const TraceLoadOptions& opts, const Catalogs& catalogs);

// Drops the camera-axis component of a 3D trace. Frame count, times and
// labels are unchanged; calling it on a 2D trace is an error.
Trace project_2d(const Trace& t);

// Linearly interpolates interior runs of absent positions of length
// <= max_gap between known flanking positions. Longer runs and
// leading/trailing absences stay absent. Idempotent.
Trace fill_gaps(const Trace& t, int max_gap);

}  // namespace pdlsl
