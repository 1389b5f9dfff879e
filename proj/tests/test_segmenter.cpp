#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "pdlsl/errors.hpp"
#include "pdlsl/segment.hpp"
#include "support/synthetic.hpp"

using namespace pdlsl;

namespace {

void check_cover_and_alternate(const std::vector<Segment>& segs, int frames) {
  REQUIRE(!segs.empty());
  CHECK(segs.front().start == 0);
  CHECK(segs.back().end == frames - 1);
  for (size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].start <= segs[i].end);
    if (i > 0) {
      CHECK(segs[i].start == segs[i - 1].end + 1);
      CHECK(segs[i].kind != segs[i - 1].kind);
    }
  }
}

int hold_frames(const std::vector<Segment>& segs) {
  int n = 0;
  for (const auto& s : segs)
    if (s.kind == SegKind::Hold) n += s.end - s.start + 1;
  return n;
}

// A jittery random trace exercising the absorption logic.
Trace random_trace(std::mt19937& rng, int frames) {
  synth::Builder b;
  std::uniform_real_distribution<double> jump(0.0, 1.0);
  b.set("RH", {0.0, 0.0});
  double x = 0.0;
  Trace t;
  for (int i = 0; i < frames; ++i) {
    if (jump(rng) < 0.3) x += jump(rng) * 0.6 - 0.3;
    b.set("RH", {x, 0.0});
    b.hold(1);
  }
  return b.take("<random>");
}

}  // namespace

TEST_CASE("constant trace is a single hold") {
  Trace t = synth::constant_trace(50);
  auto segs = segment(t, SegParams{});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0] == Segment{SegKind::Hold, 0, 49});
}

TEST_CASE("single-frame trace is one hold") {
  Trace t = synth::constant_trace(1);
  auto segs = segment(t, SegParams{});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0] == Segment{SegKind::Hold, 0, 0});
}

TEST_CASE("three-phase trace: hold / movement / hold within smear tolerance") {
  SegParams params;  // v_hold 0.5, min_hold 3, smooth_w 5
  Trace t = synth::three_phase_trace();
  auto segs = segment(t, params);
  check_cover_and_alternate(segs, 50);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].kind == SegKind::Hold);
  CHECK(segs[1].kind == SegKind::Movement);
  CHECK(segs[2].kind == SegKind::Hold);
  const int tol = (params.smooth_w + 1) / 2;  // ceil(smooth_w / 2)
  CHECK(std::abs(segs[1].start - 20) <= tol);
  CHECK(std::abs(segs[1].end - 29) <= tol);
}

TEST_CASE("short dip below v_hold inside a movement is absorbed") {
  // Build speeds directly: strong motion, a 2-frame lull, strong motion.
  synth::Builder b;
  b.set("RH", {0.0, 0.0});
  b.hold(10);
  b.move_to(8, {{"RH", {4.0, 0.0}}});
  b.hold(2);  // the dip: shorter than min_hold=4
  b.move_to(8, {{"RH", {8.0, 0.0}}});
  b.hold(10);
  Trace t = b.take("<dip>");
  SegParams params;
  params.min_hold = 4;
  params.smooth_w = 1;  // keep the dip visible to the classifier
  auto segs = segment(t, params);
  check_cover_and_alternate(segs, static_cast<int>(t.frames.size()));
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].kind == SegKind::Hold);
  CHECK(segs[1].kind == SegKind::Movement);  // single movement, dip absorbed
  CHECK(segs[2].kind == SegKind::Hold);
}

TEST_CASE("speed uses the max over articulators") {
  // LH is perfectly still; RH moves. One still hand must not fake a hold.
  synth::Builder b;
  b.set("RH", {0.0, 0.0});
  b.set("LH", {5.0, 5.0});
  b.hold(10);
  b.move_to(10, {{"RH", {4.0, 0.0}}});
  b.hold(10);
  Trace t = b.take("<max>");
  auto segs = segment(t, SegParams{});
  REQUIRE(segs.size() == 3);
  CHECK(segs[1].kind == SegKind::Movement);
}

TEST_CASE("absent positions contribute nothing to speed") {
  synth::Builder b;
  b.set("RH", {0.0, 0.0});
  b.hold(30);
  Trace t = b.take("<absent>");
  // Periodically drop RH; remaining frames pair up across the gap is not
  // required — missing pairs simply yield zero evidence.
  for (size_t i = 10; i < 15; ++i) t.frames[i].positions.clear();
  auto segs = segment(t, SegParams{});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].kind == SegKind::Hold);
}

TEST_CASE("a trace with no positions at all is an error") {
  Trace t = synth::constant_trace(10);
  for (auto& f : t.frames) f.positions.clear();
  CHECK_THROWS_WITH_AS(segment(t, SegParams{}),
                       doctest::Contains("absent for the entire trace"),
                       DataError);
}

TEST_CASE("parameter preconditions") {
  Trace t = synth::constant_trace(10);
  SegParams p;
  p.v_hold = 0.0;
  CHECK_THROWS_AS(segment(t, p), DataError);
  p = SegParams{};
  p.min_hold = 0;
  CHECK_THROWS_AS(segment(t, p), DataError);
  p = SegParams{};
  p.smooth_w = 4;  // even
  CHECK_THROWS_AS(segment(t, p), DataError);
}

TEST_CASE("coverage and alternation on random traces") {
  std::mt19937 rng(7);
  for (int round = 0; round < 25; ++round) {
    Trace t = random_trace(rng, 120);
    auto segs = segment(t, SegParams{});
    check_cover_and_alternate(segs, 120);
  }
}

TEST_CASE("raising v_hold never decreases total hold frames") {
  std::mt19937 rng(11);
  for (int round = 0; round < 25; ++round) {
    Trace t = random_trace(rng, 120);
    SegParams lo, hi;
    lo.v_hold = 0.4;
    hi.v_hold = 1.2;
    CHECK(hold_frames(segment(t, lo)) <= hold_frames(segment(t, hi)));
  }
}

TEST_CASE("determinism") {
  std::mt19937 rng(13);
  Trace t = random_trace(rng, 200);
  auto a = segment(t, SegParams{});
  auto b = segment(t, SegParams{});
  CHECK(a == b);
}
