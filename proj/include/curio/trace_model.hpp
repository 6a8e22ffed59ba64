#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace curio {

// Object classes seen in an event. Wall is the only occluder; Unknown is an
// inference input and never part of ground truth.
enum class ObjectClass { Sphere, Cone, Cube, Wall, Unknown };

// Fixed order used for deterministic tie-breaks during inference.
inline constexpr std::array<ObjectClass, 3> kScoredClasses = {
    ObjectClass::Sphere, ObjectClass::Cone, ObjectClass::Cube};

inline constexpr std::string_view to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::Sphere: return "sphere";
    case ObjectClass::Cone: return "cone";
    case ObjectClass::Cube: return "cube";
    case ObjectClass::Wall: return "wall";
    case ObjectClass::Unknown: return "unknown";
  }
  return "unknown";
}

inline std::optional<ObjectClass> parse_object_class(std::string_view s) {
  if (s == "sphere") return ObjectClass::Sphere;
  if (s == "cone") return ObjectClass::Cone;
  if (s == "cube") return ObjectClass::Cube;
  if (s == "wall") return ObjectClass::Wall;
  if (s == "unknown") return ObjectClass::Unknown;
  return std::nullopt;
}

inline constexpr bool is_occluder(ObjectClass c) { return c == ObjectClass::Wall; }

// Position of a class in the tie-break order; Wall and Unknown sort last.
inline constexpr int class_rank(ObjectClass c) {
  switch (c) {
    case ObjectClass::Sphere: return 0;
    case ObjectClass::Cone: return 1;
    case ObjectClass::Cube: return 2;
    case ObjectClass::Wall: return 3;
    case ObjectClass::Unknown: return 4;
  }
  return 5;
}

struct ClassProfile {
  ObjectClass object_class = ObjectClass::Sphere;
  double impact_value = 10.0;
};

// Default impact values: sphere 10, cone 100, cube 1000. Walls are never scored.
inline std::optional<ClassProfile> default_profile(ObjectClass c) {
  switch (c) {
    case ObjectClass::Sphere: return ClassProfile{c, 10.0};
    case ObjectClass::Cone: return ClassProfile{c, 100.0};
    case ObjectClass::Cube: return ClassProfile{c, 1000.0};
    default: return std::nullopt;
  }
}

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box, top-left origin, pixels, y grows downward.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double cx() const { return x + w / 2.0; }
  double cy() const { return y + h / 2.0; }

  bool contains(double px, double py) const {
    return px >= x && px <= x + w && py >= y && py <= y + h;
  }

  BBox inflated(double margin) const {
    return {x - margin, y - margin, w + 2.0 * margin, h + 2.0 * margin};
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct SceneBounds {
  double width = 640.0;
  double height = 360.0;

  bool contains(double px, double py) const {
    return px >= 0.0 && px <= width && py >= 0.0 && py <= height;
  }
  double area() const { return width * height; }
};

// Default appearance stand-in when a trace carries none: (w/h, w*h/scene area).
inline std::vector<double> default_shape_descriptor(const BBox& b,
                                                    const SceneBounds& scene = {}) {
  return {b.w / b.h, (b.w * b.h) / scene.area()};
}

// Euclidean distance scaled by the sum of norms, so it lies in [0,1]: 0 for
// identical descriptors, 1 when one is zero or the two are antiparallel.
inline double descriptor_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("descriptor dimension mismatch");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  if (denom == 0.0) return 0.0;
  return std::min(1.0, std::sqrt(diff) / denom);
}

struct Detection {
  ObjectClass object_class = ObjectClass::Unknown;
  double confidence = 0.0;
  BBox bbox;
  std::vector<double> shape_descriptor;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct FrameRecord {
  std::int64_t frame_index = 0;
  std::vector<Detection> detections;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct GroundTruth {
  bool possible = true;
  std::vector<ObjectClass> object_classes;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct EventTrace {
  std::string event_id;
  std::int64_t frame_count = 0;
  std::vector<FrameRecord> frames;
  std::optional<GroundTruth> ground_truth;

  friend bool operator==(const EventTrace&, const EventTrace&) = default;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "trace validation failed";
    for (const auto& s : v) out += "; " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

// Lists every invariant violation in the trace. Empty means valid.
inline std::vector<std::string> validate_trace(const EventTrace& trace) {
  std::vector<std::string> out;
  auto at = [](std::int64_t frame) { return "frame " + std::to_string(frame) + ": "; };

  if (trace.frames.empty()) out.emplace_back("trace: frames is empty (need N >= 1)");
  if (trace.frame_count != static_cast<std::int64_t>(trace.frames.size())) {
    out.push_back("trace: frame_count " + std::to_string(trace.frame_count) +
                  " != number of frame records " + std::to_string(trace.frames.size()));
  }

  std::optional<std::size_t> descriptor_dim;
  std::int64_t expected = 0;
  for (const auto& f : trace.frames) {
    if (f.frame_index < expected) {
      out.push_back(at(f.frame_index) + "frame_index not strictly increasing (expected " +
                    std::to_string(expected) + ")");
    } else if (f.frame_index > expected) {
      out.push_back(at(f.frame_index) + "frame_index gap, missing " + std::to_string(expected) +
                    (f.frame_index - 1 > expected ? ".." + std::to_string(f.frame_index - 1) : ""));
    }
    expected = std::max(expected, f.frame_index + 1);

    for (std::size_t i = 0; i < f.detections.size(); ++i) {
      const auto& d = f.detections[i];
      const std::string where = at(f.frame_index) + "detection " + std::to_string(i) + ": ";
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
        out.push_back(where + "confidence " + std::to_string(d.confidence) + " outside [0,1]");
      }
      if (!(d.bbox.w > 0.0)) out.push_back(where + "bbox w must be > 0");
      if (!(d.bbox.h > 0.0)) out.push_back(where + "bbox h must be > 0");
      if (d.shape_descriptor.empty()) {
        out.push_back(where + "shape_descriptor is empty");
      } else if (!descriptor_dim) {
        descriptor_dim = d.shape_descriptor.size();
      } else if (*descriptor_dim != d.shape_descriptor.size()) {
        out.push_back(where + "shape_descriptor dimension " +
                      std::to_string(d.shape_descriptor.size()) + " != " +
                      std::to_string(*descriptor_dim));
      }
    }
  }

  if (trace.ground_truth) {
    if (trace.ground_truth->object_classes.empty()) {
      out.emplace_back("ground_truth: object_classes is empty");
    }
    for (auto c : trace.ground_truth->object_classes) {
      if (c == ObjectClass::Unknown) out.emplace_back("ground_truth: object_classes contains unknown");
    }
  }
  return out;
}

}  // namespace curio
