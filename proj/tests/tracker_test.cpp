#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "test_support.hpp"

using namespace curio;
using namespace curio::testing;

namespace {

std::vector<Discontinuity> of_kind(const std::vector<Discontinuity>& all, DiscontinuityKind k) {
  std::vector<Discontinuity> out;
  std::copy_if(all.begin(), all.end(), std::back_inserter(out), [k](const Discontinuity& d) { return d.kind == k; });
  return out;
}

// Oracle for presence gaps: every maximal run of absent frames.
std::vector<std::pair<std::int64_t, std::int64_t>> absent_runs(const std::vector<bool>& present) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::size_t t = 0; t < present.size(); ++t) {
    if (present[t]) continue;
    if (!out.empty() && out.back().second == static_cast<std::int64_t>(t) - 1) {
      out.back().second = static_cast<std::int64_t>(t);
    } else {
      out.emplace_back(t, t);
    }
  }
  return out;
}

}  // namespace

TEST(Tracker, ResidualSmallAfterBurnIn) {
  const auto tracks = track_event(constant_velocity_trace(90, {20, 180}, {3, 0}));
  ASSERT_EQ(tracks.size(), 1u);
  const auto& tr = tracks[0];
  EXPECT_FALSE(tr.samples[0].predicted);
  for (std::size_t t = 5; t < tr.samples.size(); ++t) {
    ASSERT_TRUE(tr.samples[t].residual);
    EXPECT_LT(*tr.samples[t].residual, 0.5) << "frame " << t;
  }
  EXPECT_NEAR(tr.final_velocity.x, 3.0, 1e-3);
  EXPECT_TRUE(detect_discontinuities(tracks).empty());
}

TEST(Tracker, SingleFrameObject) {
  std::vector<std::vector<Placement>> frames(10);
  frames[4].push_back({ObjectClass::Cube, Point{100, 100}});
  const auto tracks = track_event(trace_from_frames(frames));
  ASSERT_EQ(tracks.size(), 1u);
  EXPECT_EQ(tracks[0].detected_frames, 1);
  EXPECT_EQ(tracks[0].resolved_class(), ObjectClass::Cube);
  const auto d = detect_discontinuities(tracks);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0], (Discontinuity{0, DiscontinuityKind::Appear, 0, 3, 4}));
  EXPECT_EQ(d[1], (Discontinuity{0, DiscontinuityKind::Vanish, 5, 9, 5}));
}

TEST(Tracker, CoastsThroughOcclusion) {
  const auto t = generate_event(scenario(ScenarioKind::PossibleOccluded));
  const auto tracks = track_event(t);
  ASSERT_EQ(tracks.size(), 2u);
  const auto& obj = tracks[0].occluder ? tracks[1] : tracks[0];
  EXPECT_EQ(obj.detected_frames, 90 - 16);
  for (int f = 40; f <= 55; ++f) {
    const auto& s = obj.samples[static_cast<std::size_t>(f)];
    EXPECT_FALSE(s.present());
    ASSERT_TRUE(s.predicted);
  }
  // Reacquired without a jump: the coasted prediction lands on the object.
  EXPECT_FALSE(obj.samples[56].jump);
  EXPECT_LT(*obj.samples[56].residual, 1.0);
  const auto d = detect_discontinuities(tracks);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].kind, DiscontinuityKind::Vanish);
  EXPECT_EQ(d[0].start, 40);
  EXPECT_EQ(d[0].end, 55);
}

TEST(Tracker, ScenarioDiscontinuities) {
  const auto dis = detect_discontinuities(track_event(generate_event(scenario(ScenarioKind::ImpossibleDisappear))));
  ASSERT_EQ(dis.size(), 1u);
  EXPECT_EQ(dis[0], (Discontinuity{0, DiscontinuityKind::Vanish, 45, 89, 45}));

  const auto tel = detect_discontinuities(track_event(generate_event(scenario(ScenarioKind::ImpossibleTeleport))));
  ASSERT_EQ(tel.size(), 1u);
  EXPECT_EQ(tel[0].kind, DiscontinuityKind::Jump);
  EXPECT_EQ(tel[0].start, 45);
  EXPECT_GT(tel[0].magnitude, 25.0);

  const auto sc = detect_discontinuities(track_event(generate_event(scenario(ScenarioKind::ImpossibleShapeChange))));
  ASSERT_EQ(sc.size(), 1u);
  EXPECT_EQ(sc[0].kind, DiscontinuityKind::ShapeSwitch);
  EXPECT_EQ(sc[0].start, 45);
  EXPECT_GT(sc[0].magnitude, 0.0);
}

// A cone that enters late and leaves early next to a steadily visible sphere.
TEST(Tracker, LateEntryAndEarlyExit) {
  std::vector<std::vector<Placement>> frames(60);
  for (std::size_t t = 0; t < 60; ++t) {
    frames[t].push_back({ObjectClass::Sphere, Point{50.0 + 2.0 * t, 100}});
    if (t >= 20 && t < 40) frames[t].push_back({ObjectClass::Cone, Point{600.0 - 3.0 * t, 250}});
  }
  const auto tracks = track_event(trace_from_frames(frames));
  ASSERT_EQ(tracks.size(), 2u);
  const auto d = detect_discontinuities(tracks);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].kind, DiscontinuityKind::Appear);
  EXPECT_EQ(d[0].start, 0);
  EXPECT_EQ(d[0].end, 19);
  EXPECT_EQ(d[1].kind, DiscontinuityKind::Vanish);
  EXPECT_EQ(d[1].start, 40);
  EXPECT_EQ(d[1].end, 59);
  EXPECT_EQ(d[0].track_id, d[1].track_id);
  EXPECT_EQ(focus_track(tracks)->resolved_class(), ObjectClass::Sphere);
}

TEST(Tracker, ShapeSwitchNeedsPersistence) {
  // A two-frame mislabel is noise; a lasting change is a switch.
  std::vector<std::vector<Placement>> frames(30);
  for (std::size_t t = 0; t < 30; ++t) {
    ObjectClass c = ObjectClass::Sphere;
    if (t == 10 || t == 11) c = ObjectClass::Cube;
    if (t >= 20) c = ObjectClass::Cone;
    frames[t].push_back({c, Point{50.0 + 3.0 * t, 100}});
  }
  const auto d = detect_discontinuities(track_event(trace_from_frames(frames)));
  const auto sw = of_kind(d, DiscontinuityKind::ShapeSwitch);
  ASSERT_EQ(sw.size(), 1u);
  EXPECT_EQ(sw[0].start, 20);
}

TEST(Tracker, PermutationInvariant) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<Placement>> frames(40);
    for (std::size_t t = 0; t < 40; ++t) {
      frames[t].push_back({ObjectClass::Sphere, Point{40.0 + 3.0 * t, 80}});
      frames[t].push_back({ObjectClass::Cube, Point{500.0 - 2.0 * t, 200}});
      if (t % 7 != 3) frames[t].push_back({ObjectClass::Cone, Point{200.0, 40.0 + 4.0 * t}});
    }
    auto trace = trace_from_frames(frames);
    auto shuffled = trace;
    for (auto& f : shuffled.frames) std::shuffle(f.detections.begin(), f.detections.end(), rng);
    const auto a = track_event(trace), b = track_event(shuffled);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].presence(), b[i].presence());
      EXPECT_EQ(a[i].resolved_class(), b[i].resolved_class());
    }
    EXPECT_EQ(detect_discontinuities(a), detect_discontinuities(b));
  }
}

// Every absence of a detected object is covered by exactly one Appear or Vanish.
TEST(Tracker, GapsAreComplete) {
  std::mt19937_64 rng(21);
  std::bernoulli_distribution seen(0.7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<Placement>> frames(30);
    for (std::size_t t = 0; t < 30; ++t) {
      if (seen(rng)) frames[t].push_back({ObjectClass::Sphere, Point{100.0 + 2.0 * t, 150}});
    }
    const auto tracks = track_event(trace_from_frames(frames));
    if (tracks.empty()) continue;
    ASSERT_EQ(tracks.size(), 1u);
    const auto runs = absent_runs(tracks[0].presence());
    std::vector<std::pair<std::int64_t, std::int64_t>> spans;
    for (const auto& d : detect_discontinuities(tracks)) {
      if (d.kind == DiscontinuityKind::Appear || d.kind == DiscontinuityKind::Vanish) spans.emplace_back(d.start, d.end);
    }
    std::sort(spans.begin(), spans.end());
    EXPECT_EQ(spans, runs);
  }
}

TEST(Tracker, WallsFormOccluderTracks) {
  const auto tracks = track_event(generate_event(scenario(ScenarioKind::PossibleOccluded, ObjectClass::Cube)));
  const auto walls = std::count_if(tracks.begin(), tracks.end(), [](const Track& t) { return t.occluder; });
  EXPECT_EQ(walls, 1);
  for (const auto& t : tracks) {
    if (t.occluder) {
      EXPECT_EQ(t.detected_frames, 90);
    }
  }
}

TEST(Tracker, CsvHasOneRowPerFrame) {
  const auto tracks = track_event(constant_velocity_trace(4, {10, 20}, {1, 0}));
  std::ostringstream os;
  write_track_csv(os, tracks[0]);
  const std::string expected_head = "frame,observed_x,observed_y,predicted_x,predicted_y,residual,present\n0,10,20,,,,1\n";
  const auto csv = os.str();
  EXPECT_EQ(csv.substr(0, expected_head.size()), expected_head);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}
