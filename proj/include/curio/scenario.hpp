#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curio/trace_model.hpp"

namespace curio {

enum class ScenarioKind {
  PossibleVisible,
  PossibleOccluded,
  ImpossibleDisappear,
  ImpossibleTeleport,
  ImpossibleShapeChange,
};

inline constexpr std::array<ScenarioKind, 5> kAllScenarioKinds = {
    ScenarioKind::PossibleVisible, ScenarioKind::PossibleOccluded,
    ScenarioKind::ImpossibleDisappear, ScenarioKind::ImpossibleTeleport,
    ScenarioKind::ImpossibleShapeChange};

inline constexpr std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::PossibleVisible: return "possible-visible";
    case ScenarioKind::PossibleOccluded: return "possible-occluded";
    case ScenarioKind::ImpossibleDisappear: return "impossible-disappear";
    case ScenarioKind::ImpossibleTeleport: return "impossible-teleport";
    case ScenarioKind::ImpossibleShapeChange: return "impossible-shape-change";
  }
  return "";
}

inline std::optional<ScenarioKind> parse_scenario_kind(std::string_view s) {
  for (auto k : kAllScenarioKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline constexpr bool is_possible(ScenarioKind k) {
  return k == ScenarioKind::PossibleVisible || k == ScenarioKind::PossibleOccluded;
}

struct Velocity {
  double vx = 3.0;
  double vy = 0.0;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::PossibleVisible;
  ObjectClass object_class = ObjectClass::Sphere;
  std::int64_t frame_count = 90;
  std::optional<BBox> occluder;
  Velocity velocity;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  double confidence = 0.6;
  double wall_confidence = 0.9;
  SceneBounds scene;
  std::string event_id;  // empty: derived from kind, class and seed
};

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Nominal on-screen size of each class, pixels.
inline BBox class_extent(ObjectClass c) {
  switch (c) {
    case ObjectClass::Sphere: return {0, 0, 30, 30};
    case ObjectClass::Cone: return {0, 0, 30, 40};
    case ObjectClass::Cube: return {0, 0, 36, 36};
    default: return {0, 0, 32, 32};
  }
}

// Class the object turns into in a shape-change event.
inline ObjectClass shape_change_target(ObjectClass c) {
  switch (c) {
    case ObjectClass::Sphere: return ObjectClass::Cone;
    case ObjectClass::Cone: return ObjectClass::Cube;
    default: return ObjectClass::Sphere;
  }
}

// Frame at which Impossible* kinds break a body-budget property.
inline std::int64_t violation_frame(const ScenarioSpec& spec) { return spec.frame_count / 2; }

inline double speed(const Velocity& v) { return std::hypot(v.vx, v.vy); }

// Teleport offset: along the motion direction (or +x when static), at least
// twelve per-frame displacements and never less than 40 px.
inline Point teleport_offset(const ScenarioSpec& spec) {
  const double s = speed(spec.velocity);
  const double mag = std::max(12.0 * s, 40.0);
  if (s == 0.0) return {mag, 0.0};
  return {spec.velocity.vx / s * mag, spec.velocity.vy / s * mag};
}

// Noiseless object centers for every frame. The path is centered in the scene
// and shifted by a seed-dependent offset of at most 20 px per axis.
inline std::vector<Point> scripted_path(const ScenarioSpec& spec) {
  const auto n = static_cast<std::size_t>(std::max<std::int64_t>(spec.frame_count, 0));
  std::vector<Point> rel(n);
  const Point jump = teleport_offset(spec);
  const auto s = violation_frame(spec);
  for (std::size_t t = 0; t < n; ++t) {
    rel[t] = {spec.velocity.vx * static_cast<double>(t), spec.velocity.vy * static_cast<double>(t)};
    if (spec.kind == ScenarioKind::ImpossibleTeleport && static_cast<std::int64_t>(t) >= s) {
      rel[t].x += jump.x;
      rel[t].y += jump.y;
    }
  }
  if (n == 0) return rel;

  auto [xmin, xmax] = std::minmax_element(rel.begin(), rel.end(), [](auto a, auto b) { return a.x < b.x; });
  auto [ymin, ymax] = std::minmax_element(rel.begin(), rel.end(), [](auto a, auto b) { return a.y < b.y; });
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(-20.0, 20.0);
  const double ox = spec.scene.width / 2.0 - (xmin->x + xmax->x) / 2.0 + jitter(rng);
  const double oy = spec.scene.height / 2.0 - (ymin->y + ymax->y) / 2.0 + jitter(rng);
  for (auto& p : rel) {
    p.x += ox;
    p.y += oy;
  }
  return rel;
}

// Wall that hides the object from frame floor(4N/9) through floor(11N/18)
// (40..55 for N = 90). Axes without motion get a fixed 120 px extent.
inline BBox default_occluder(const ScenarioSpec& spec) {
  const auto path = scripted_path(spec);
  if (path.empty()) throw ScenarioError("frame_count must be positive");
  const auto n = spec.frame_count;
  const auto first = static_cast<std::size_t>(4 * n / 9);
  const auto last = static_cast<std::size_t>(std::min<std::int64_t>(11 * n / 18, n - 1));
  double x0 = path[first].x, x1 = path[first].x, y0 = path[first].y, y1 = path[first].y;
  for (std::size_t t = first; t <= last; ++t) {
    x0 = std::min(x0, path[t].x);
    x1 = std::max(x1, path[t].x);
    y0 = std::min(y0, path[t].y);
    y1 = std::max(y1, path[t].y);
  }
  const double hx = std::abs(spec.velocity.vx) / 2.0;
  const double hy = std::abs(spec.velocity.vy) / 2.0;
  x0 -= hx;
  x1 += hx;
  y0 -= hy;
  y1 += hy;
  if (spec.velocity.vx == 0.0) {
    x0 = (x0 + x1) / 2.0 - 60.0;
    x1 = x0 + 120.0;
  }
  if (spec.velocity.vy == 0.0) {
    y0 = (y0 + y1) / 2.0 - 60.0;
    y1 = y0 + 120.0;
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

inline std::string default_event_id(const ScenarioSpec& spec) {
  return std::string(to_string(spec.kind)) + "-" + std::string(to_string(spec.object_class)) + "-s" +
         std::to_string(spec.seed);
}

// Reasons the scenario cannot be generated; empty when it is consistent.
inline std::vector<std::string> check_scenario(const ScenarioSpec& spec) {
  std::vector<std::string> out;
  if (spec.frame_count < 10) out.emplace_back("frame_count must be >= 10");
  if (!(spec.noise_sigma >= 0.0)) out.emplace_back("noise_sigma must be >= 0");
  if (!(spec.confidence >= 0.0 && spec.confidence <= 1.0)) out.emplace_back("confidence must be in [0,1]");
  if (!(spec.wall_confidence >= 0.0 && spec.wall_confidence <= 1.0)) {
    out.emplace_back("wall_confidence must be in [0,1]");
  }
  if (spec.object_class == ObjectClass::Wall || spec.object_class == ObjectClass::Unknown) {
    out.emplace_back("object_class must be sphere, cone or cube");
  }
  if (spec.occluder && !(spec.occluder->w > 0.0 && spec.occluder->h > 0.0)) {
    out.emplace_back("occluder must have positive size");
  }
  if (!out.empty()) return out;

  const auto path = scripted_path(spec);
  if (spec.kind == ScenarioKind::PossibleOccluded) {
    if (!spec.occluder) {
      out.emplace_back("possible-occluded requires an occluder");
    } else if (std::none_of(path.begin(), path.end(),
                            [&](Point p) { return spec.occluder->contains(p.x, p.y); })) {
      out.emplace_back("occluder never hides the object");
    }
  }
  if (spec.kind == ScenarioKind::ImpossibleDisappear && spec.occluder) {
    for (auto t = violation_frame(spec); t < spec.frame_count; ++t) {
      const auto p = path[static_cast<std::size_t>(t)];
      if (spec.occluder->contains(p.x, p.y)) {
        out.emplace_back("impossible-disappear requires no occluder along the disappearance interval");
        break;
      }
    }
  }
  return out;
}

// Deterministic synthetic event. Object detections are dropped while the
// true center is outside the scene, hidden by the occluder, or after the
// scripted disappearance.
inline EventTrace generate_event(const ScenarioSpec& spec) {
  if (auto problems = check_scenario(spec); !problems.empty()) {
    std::string msg = "invalid scenario";
    for (const auto& p : problems) msg += "; " + p;
    throw ScenarioError(msg);
  }

  const auto path = scripted_path(spec);
  const auto s = violation_frame(spec);
  const ObjectClass changed = shape_change_target(spec.object_class);

  // Noise draws use their own stream so the jitter in scripted_path stays put.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, 1.0);

  EventTrace trace;
  trace.event_id = spec.event_id.empty() ? default_event_id(spec) : spec.event_id;
  trace.frame_count = spec.frame_count;
  trace.frames.reserve(static_cast<std::size_t>(spec.frame_count));

  for (std::int64_t t = 0; t < spec.frame_count; ++t) {
    FrameRecord frame{t, {}};
    const Point c = path[static_cast<std::size_t>(t)];

    bool visible = spec.scene.contains(c.x, c.y);
    if (spec.occluder && spec.kind == ScenarioKind::PossibleOccluded && spec.occluder->contains(c.x, c.y)) {
      visible = false;
    }
    if (spec.kind == ScenarioKind::ImpossibleDisappear && t >= s) visible = false;

    if (visible) {
      ObjectClass cls = spec.object_class;
      if (spec.kind == ScenarioKind::ImpossibleShapeChange && t >= s) cls = changed;
      const BBox ext = class_extent(cls);
      double cx = c.x, cy = c.y;
      if (spec.noise_sigma > 0.0) {
        cx += spec.noise_sigma * noise(rng);
        cy += spec.noise_sigma * noise(rng);
      }
      BBox box{cx - ext.w / 2.0, cy - ext.h / 2.0, ext.w, ext.h};
      frame.detections.push_back(
          {cls, spec.confidence, box, default_shape_descriptor(ext, spec.scene)});
    }
    if (spec.occluder) {
      frame.detections.push_back({ObjectClass::Wall, spec.wall_confidence, *spec.occluder,
                                  default_shape_descriptor(*spec.occluder, spec.scene)});
    }
    trace.frames.push_back(std::move(frame));
  }

  GroundTruth gt;
  gt.possible = is_possible(spec.kind);
  gt.object_classes.push_back(spec.object_class);
  if (spec.kind == ScenarioKind::ImpossibleShapeChange) gt.object_classes.push_back(changed);
  if (spec.occluder) gt.object_classes.push_back(ObjectClass::Wall);
  trace.ground_truth = gt;
  return trace;
}

}  // namespace curio
