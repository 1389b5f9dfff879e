#include "pdlsl/segment.hpp"

#include <algorithm>
#include <cmath>

#include "pdlsl/errors.hpp"

namespace pdlsl {

namespace {

void validate(const Trace& t, const SegParams& p) {
  if (t.frames.empty()) throw DataError("segment: trace has no frames");
  if (p.v_hold <= 0.0) throw DataError("segment: v_hold must be > 0");
  if (p.min_hold < 1) throw DataError("segment: min_hold must be >= 1");
  if (p.smooth_w < 1 || p.smooth_w % 2 == 0)
    throw DataError("segment: smooth_w must be odd and >= 1");
  for (const auto& f : t.frames)
    if (!f.positions.empty()) return;
  throw DataError("segment: all articulators absent for the entire trace");
}

std::vector<double> raw_speeds(const Trace& t) {
  const int n = static_cast<int>(t.frames.size());
  std::vector<double> v(n, 0.0);
  for (int i = 1; i < n; ++i) {
    const Frame& prev = t.frames[i - 1];
    const Frame& cur = t.frames[i];
    double dt = (cur.t_ms - prev.t_ms) / 1000.0;
    double best = 0.0;
    for (const auto& [art, pos] : cur.positions) {
      const Position* before = prev.position_of(art);
      if (!before) continue;  // absent positions contribute nothing
      double dx = pos.x - before->x;
      double dy = pos.y - before->y;
      double dz = pos.z - before->z;
      double speed = std::sqrt(dx * dx + dy * dy + dz * dz) / dt / cur.scale;
      if (speed > best) best = speed;
    }
    v[i] = best;
  }
  return v;
}

}  // namespace

std::vector<double> speed_profile(const Trace& t, const SegParams& params) {
  validate(t, params);
  std::vector<double> raw = raw_speeds(t);
  const int n = static_cast<int>(raw.size());
  const int h = params.smooth_w / 2;
  std::vector<double> smooth(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Shrunken window at the trace edges; no padding.
    int lo = std::max(0, i - h);
    int hi = std::min(n - 1, i + h);
    double sum = 0.0;
    for (int k = lo; k <= hi; ++k) sum += raw[k];
    smooth[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return smooth;
}

std::vector<Segment> segment(const Trace& t, const SegParams& params) {
  std::vector<double> speed = speed_profile(t, params);
  const int n = static_cast<int>(speed.size());

  std::vector<Segment> runs;
  for (int i = 0; i < n; ++i) {
    SegKind kind =
        speed[i] < params.v_hold ? SegKind::Hold : SegKind::Movement;
    if (!runs.empty() && runs.back().kind == kind)
      runs.back().end = i;
    else
      runs.push_back({kind, i, i});
  }

  // Hold candidates shorter than min_hold are absorbed into the surrounding
  // movement; a lone short hold with no movement around it stays a hold.
  std::vector<Segment> out;
  for (size_t i = 0; i < runs.size(); ++i) {
    Segment seg = runs[i];
    if (seg.kind == SegKind::Hold && seg.end - seg.start + 1 < params.min_hold &&
        runs.size() > 1)
      seg.kind = SegKind::Movement;
    if (!out.empty() && out.back().kind == seg.kind)
      out.back().end = seg.end;
    else
      out.push_back(seg);
  }
  return out;
}

}  // namespace pdlsl
