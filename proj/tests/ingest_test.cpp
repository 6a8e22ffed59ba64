#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "test_support.hpp"

using namespace curio;
using curio::testing::scenario;

namespace {

std::optional<Point> object_center(const FrameRecord& f) {
  for (const auto& d : f.detections) {
    if (!is_occluder(d.object_class)) return Point{d.bbox.cx(), d.bbox.cy()};
  }
  return std::nullopt;
}

bool has_wall(const FrameRecord& f) {
  return std::any_of(f.detections.begin(), f.detections.end(),
                     [](const Detection& d) { return is_occluder(d.object_class); });
}

}  // namespace

TEST(ParseTrace, HeaderAndTwoFrames) {
  const std::string text =
      R"({"event_id":"e1","frame_count":2,"ground_truth":{"possible":true,"object_classes":["sphere"]}})"
      "\n"
      R"({"frame_index":0,"detections":[{"class":"sphere","confidence":0.6,"bbox":[10,20,30,30]}]})"
      "\n"
      R"({"frame_index":1,"detections":[],"extra_field":42})"
      "\n";
  const auto t = decode_trace(text);
  EXPECT_EQ(t.event_id, "e1");
  EXPECT_EQ(t.frame_count, 2);
  ASSERT_EQ(t.frames.size(), 2u);
  ASSERT_EQ(t.frames[0].detections.size(), 1u);
  const auto& d = t.frames[0].detections[0];
  EXPECT_EQ(d.object_class, ObjectClass::Sphere);
  EXPECT_EQ(d.bbox, (BBox{10, 20, 30, 30}));
  // Descriptor derived from the box when the trace has none.
  ASSERT_EQ(d.shape_descriptor.size(), 2u);
  EXPECT_DOUBLE_EQ(d.shape_descriptor[0], 1.0);
  EXPECT_DOUBLE_EQ(d.shape_descriptor[1], 900.0 / (640.0 * 360.0));
  ASSERT_TRUE(t.ground_truth);
  EXPECT_TRUE(t.ground_truth->possible);
}

TEST(ParseTrace, DuplicateFrameIndexIsValidationError) {
  const std::string text =
      "{\"event_id\":\"e\",\"frame_count\":2}\n"
      "{\"frame_index\":0,\"detections\":[]}\n"
      "{\"frame_index\":0,\"detections\":[]}\n";
  EXPECT_THROW(decode_trace(text), ValidationError);
}

TEST(ParseTrace, MalformedRecordNamesLine) {
  const std::string text =
      "{\"event_id\":\"e\",\"frame_count\":2}\n"
      "{\"frame_index\":0,\"detections\":[]}\n"
      "{\"frame_index\":1,\"detections\":[{\"class\":\"sphere\"\n";
  try {
    decode_trace(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(decode_trace(""), ParseError);
  EXPECT_THROW(decode_trace("{\"event_id\":\"e\",\"frame_count\":1}\n{\"frame_index\":0,\"detections\":[{\"class\":\"blob\",\"confidence\":1,\"bbox\":[0,0,1,1]}]}\n"),
               ParseError);
}

TEST(ParseTrace, GeneratedScenarioRoundTrips) {
  const auto t = generate_event(scenario(ScenarioKind::PossibleVisible));
  const auto text = encode_trace(t);
  EXPECT_EQ(decode_trace(text), t);
  EXPECT_EQ(encode_trace(decode_trace(text)), text);
}

TEST(ParseTrace, RandomTracesRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto t = curio::testing::random_trace(rng);
    ASSERT_TRUE(validate_trace(t).empty());
    EXPECT_EQ(decode_trace(encode_trace(t)), t);
  }
}

TEST(GenerateEvent, PossibleVisibleIsCollinearAndComplete) {
  auto spec = scenario(ScenarioKind::PossibleVisible);
  spec.velocity = {3, 0};
  const auto t = generate_event(spec);
  ASSERT_EQ(t.frame_count, 90);
  EXPECT_TRUE(validate_trace(t).empty());
  std::vector<Point> c;
  for (const auto& f : t.frames) {
    auto p = object_center(f);
    ASSERT_TRUE(p) << "frame " << f.frame_index;
    EXPECT_EQ(f.detections[0].object_class, ObjectClass::Sphere);
    c.push_back(*p);
  }
  for (std::size_t i = 1; i < c.size(); ++i) {
    EXPECT_NEAR(c[i].x - c[i - 1].x, 3.0, 1e-9);
    EXPECT_NEAR(c[i].y, c[0].y, 1e-9);
  }
  EXPECT_TRUE(t.ground_truth->possible);
}

TEST(GenerateEvent, OccludedGapMatchesGeometry) {
  const auto spec = scenario(ScenarioKind::PossibleOccluded);
  const auto t = generate_event(spec);
  // Oracle: the scripted path intersected with the occluder rectangle.
  const auto path = scripted_path(spec);
  std::vector<std::int64_t> hidden_by_geometry, hidden;
  for (std::size_t f = 0; f < path.size(); ++f) {
    if (spec.occluder->contains(path[f].x, path[f].y)) hidden_by_geometry.push_back(static_cast<std::int64_t>(f));
  }
  for (const auto& f : t.frames) {
    if (!object_center(f)) hidden.push_back(f.frame_index);
    EXPECT_TRUE(has_wall(f)) << "wall missing at frame " << f.frame_index;
  }
  EXPECT_EQ(hidden, hidden_by_geometry);
  ASSERT_EQ(hidden.size(), 16u);
  EXPECT_EQ(hidden.front(), 40);
  EXPECT_EQ(hidden.back(), 55);
  EXPECT_TRUE(t.ground_truth->possible);
}

TEST(GenerateEvent, TeleportDisplacementExceedsTenTimesMedian) {
  const auto t = generate_event(scenario(ScenarioKind::ImpossibleTeleport));
  std::vector<double> disp;
  for (std::size_t f = 1; f < t.frames.size(); ++f) {
    const auto a = object_center(t.frames[f - 1]), b = object_center(t.frames[f]);
    disp.push_back(std::hypot(b->x - a->x, b->y - a->y));
  }
  auto sorted = disp;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  EXPECT_GT(disp[44], 10.0 * median);  // displacement into frame 45
  for (std::size_t i = 0; i < disp.size(); ++i) {
    if (i != 44) {
      EXPECT_NEAR(disp[i], 3.0, 1e-9);
    }
  }
  EXPECT_FALSE(t.ground_truth->possible);
}

TEST(GenerateEvent, DisappearAndShapeChange) {
  const auto d = generate_event(scenario(ScenarioKind::ImpossibleDisappear, ObjectClass::Cone));
  for (const auto& f : d.frames) {
    EXPECT_EQ(object_center(f).has_value(), f.frame_index < 45);
    EXPECT_FALSE(has_wall(f));
  }

  const auto s = generate_event(scenario(ScenarioKind::ImpossibleShapeChange, ObjectClass::Sphere));
  for (std::size_t f = 1; f < s.frames.size(); ++f) {
    const auto& det = s.frames[f].detections.at(0);
    EXPECT_EQ(det.object_class, f < 45 ? ObjectClass::Sphere : ObjectClass::Cone);
    const auto a = object_center(s.frames[f - 1]), b = object_center(s.frames[f]);
    EXPECT_NEAR(b->x - a->x, 3.0, 1e-9);  // trajectory stays continuous
  }
  EXPECT_NE(s.frames[44].detections[0].shape_descriptor, s.frames[45].detections[0].shape_descriptor);
  EXPECT_FALSE(s.ground_truth->possible);
}

TEST(GenerateEvent, DeterministicForSeed) {
  for (auto kind : kAllScenarioKinds) {
    auto spec = scenario(kind, ObjectClass::Cube, 17);
    spec.noise_sigma = 1.5;
    EXPECT_EQ(encode_trace(generate_event(spec)), encode_trace(generate_event(spec)));
  }
  auto a = scenario(ScenarioKind::PossibleVisible, ObjectClass::Cube, 1);
  auto b = scenario(ScenarioKind::PossibleVisible, ObjectClass::Cube, 2);
  a.noise_sigma = b.noise_sigma = 1.0;
  EXPECT_NE(encode_trace(generate_event(a)), encode_trace(generate_event(b)));
}

TEST(GenerateEvent, RejectsContradictorySpecs) {
  auto s = scenario(ScenarioKind::ImpossibleTeleport);
  s.frame_count = 5;
  EXPECT_THROW(generate_event(s), ScenarioError);

  auto occ = scenario(ScenarioKind::PossibleVisible);
  occ.kind = ScenarioKind::PossibleOccluded;
  EXPECT_THROW(generate_event(occ), ScenarioError);  // no occluder

  occ.occluder = BBox{0, 0, 5, 5};  // never on the path
  EXPECT_THROW(generate_event(occ), ScenarioError);

  auto dis = scenario(ScenarioKind::ImpossibleDisappear);
  dis.occluder = default_occluder(dis);  // would cover the disappearance
  dis.occluder->x += 30;
  EXPECT_THROW(generate_event(dis), ScenarioError);

  auto wall = scenario(ScenarioKind::PossibleVisible, ObjectClass::Wall);
  EXPECT_THROW(generate_event(wall), ScenarioError);

  auto noisy = scenario(ScenarioKind::PossibleVisible);
  noisy.noise_sigma = -1;
  EXPECT_THROW(generate_event(noisy), ScenarioError);
}

// Every Possible* trace: each object gap lies under the wall. Every
// Impossible* trace: exactly one body-budget property is broken.
TEST(GenerateEvent, LabelSoundness) {
  for (auto kind : kAllScenarioKinds) {
    for (auto cls : kScoredClasses) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto spec = scenario(kind, cls, seed);
        const auto t = generate_event(spec);
        const auto path = scripted_path(spec);
        int gaps = 0, class_changes = 0, jumps = 0;
        std::optional<ObjectClass> prev_class;
        for (std::size_t f = 0; f < t.frames.size(); ++f) {
          const auto c = object_center(t.frames[f]);
          if (!c) {
            ++gaps;
            if (is_possible(kind)) {
              ASSERT_TRUE(spec.occluder);
              EXPECT_TRUE(spec.occluder->contains(path[f].x, path[f].y));
            }
            continue;
          }
          const auto cls_here = t.frames[f].detections[0].object_class;
          if (prev_class && *prev_class != cls_here) ++class_changes;
          prev_class = cls_here;
          if (f > 0) {
            const double step = std::hypot(path[f].x - path[f - 1].x, path[f].y - path[f - 1].y);
            if (step > 10 * speed(spec.velocity)) ++jumps;
          }
        }
        const int broken = (kind == ScenarioKind::ImpossibleDisappear && gaps > 0) + (class_changes > 0) + (jumps > 0);
        EXPECT_EQ(broken, is_possible(kind) ? 0 : 1) << to_string(kind) << ' ' << to_string(cls) << ' ' << seed;
      }
    }
  }
}

TEST(GenerateEvent, KindNamesRoundTrip) {
  for (auto k : kAllScenarioKinds) EXPECT_EQ(parse_scenario_kind(to_string(k)), k);
  EXPECT_FALSE(parse_scenario_kind("possible"));
}
