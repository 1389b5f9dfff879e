#pragma once

// Hold/movement segmentation by speed thresholding. Per-frame speed is the
// maximum over tracked articulators of |delta position| / delta t, in
// body-scales per second, smoothed with a centred moving average. Frames
// below v_hold form hold candidates; candidates shorter than min_hold are
// absorbed into the surrounding movement. Output alternates and covers the
// whole trace.

#include <vector>

#include "pdlsl/trace.hpp"

namespace pdlsl {

enum class SegKind { Hold, Movement };

struct Segment {
  SegKind kind = SegKind::Hold;
  int start = 0;  // inclusive frame indices
  int end = 0;

  bool operator==(const Segment& o) const {
    return kind == o.kind && start == o.start && end == o.end;
  }
};

struct SegParams {
  double v_hold = 0.5;  // body-scales per second
  int min_hold = 3;     // frames
  int smooth_w = 5;     // frames, odd
};

// Smoothed per-frame speed profile; exposed for diagnostics.
std::vector<double> speed_profile(const Trace& t, const SegParams& params);

std::vector<Segment> segment(const Trace& t, const SegParams& params);

}  // namespace pdlsl
