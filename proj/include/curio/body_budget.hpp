#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curio/kalman.hpp"
#include "curio/tracker.hpp"
#include "curio/trace_model.hpp"

namespace curio {

// Priorities of the three body-budget scores, each in [0,1].
struct WeightConfig {
  double alpha = 0.33;
  double beta = 0.33;
  double gamma = 0.33;

  bool valid() const {
    auto in01 = [](double w) { return w >= 0.0 && w <= 1.0; };
    return in01(alpha) && in01(beta) && in01(gamma);
  }

  friend bool operator==(const WeightConfig&, const WeightConfig&) = default;
};

enum class ShapeConstancyMode {
  Descriptor,      // 1 - mean normalized distance between consecutive descriptors
  MeanConfidence,  // mean detector confidence over detected frames
};

inline constexpr std::string_view to_string(ShapeConstancyMode m) {
  return m == ShapeConstancyMode::Descriptor ? "descriptor" : "confidence";
}

inline std::optional<ShapeConstancyMode> parse_shape_constancy_mode(std::string_view s) {
  if (s == "descriptor") return ShapeConstancyMode::Descriptor;
  if (s == "confidence") return ShapeConstancyMode::MeanConfidence;
  return std::nullopt;
}

struct BodyBudgetScores {
  double s_op = 0.0;
  double s_sc = 0.0;
  double s_stc = 0.0;
  double a = 0.0;
  WeightConfig weights;
};

// Impact value per scorable class.
class ImpactTable {
 public:
  ImpactTable() {
    for (auto c : kScoredClasses) values_[c] = default_profile(c)->impact_value;
  }

  void set(ObjectClass c, double impact) {
    if (c == ObjectClass::Wall) throw std::invalid_argument("walls have no impact value");
    if (!(impact > 0.0)) throw std::invalid_argument("impact value must be > 0");
    values_[c] = impact;
  }

  std::optional<ClassProfile> profile(ObjectClass c) const {
    if (auto it = values_.find(c); it != values_.end()) return ClassProfile{c, it->second};
    return std::nullopt;
  }

  const std::map<ObjectClass, double>& values() const { return values_; }

 private:
  std::map<ObjectClass, double> values_;
};

// Sum over detected frames of confidence * impact value, divided by 1000.
inline double score_object_permanence(const Track& track, const ClassProfile& profile) {
  if (track.occluder || is_occluder(profile.object_class)) {
    throw std::invalid_argument("occluder tracks are not scored");
  }
  double sum = 0.0;
  for (const auto& s : track.samples) {
    if (s.present()) sum += s.detection->confidence * profile.impact_value;
  }
  return sum / 1000.0;
}

// 1 - (N - detected)/N, i.e. the fraction of frames with a detection.
inline double score_spatial_temporal(int detected_frames, std::int64_t n) {
  if (n < 1) throw ContractViolation("frame count must be >= 1");
  if (detected_frames < 0 || detected_frames > n) {
    throw ContractViolation("detected_frames must lie in [0, N]");
  }
  const auto nd = static_cast<double>(n);
  return 1.0 - (nd - detected_frames) / nd;
}

inline double score_spatial_temporal(const Track& track, std::int64_t n) {
  return score_spatial_temporal(track.detected_frames, n);
}

inline double score_shape_constancy(const Track& track,
                                    ShapeConstancyMode mode = ShapeConstancyMode::Descriptor) {
  std::vector<const Detection*> dets;
  for (const auto& s : track.samples) {
    if (s.present()) dets.push_back(&*s.detection);
  }
  if (dets.empty()) throw std::invalid_argument("shape constancy needs at least one detection");
  if (dets.size() == 1) return dets.front()->confidence;

  if (mode == ShapeConstancyMode::MeanConfidence) {
    double sum = 0.0;
    for (const auto* d : dets) sum += d->confidence;
    return sum / static_cast<double>(dets.size());
  }
  double sum = 0.0;
  for (std::size_t i = 1; i < dets.size(); ++i) {
    sum += descriptor_distance(dets[i - 1]->shape_descriptor, dets[i]->shape_descriptor);
  }
  const double score = 1.0 - sum / static_cast<double>(dets.size() - 1);
  return std::clamp(score, 0.0, 1.0);
}

inline double composite_score(double s_op, double s_sc, double s_stc, const WeightConfig& w) {
  return w.alpha * s_op + w.beta * s_sc + w.gamma * s_stc;
}

inline BodyBudgetScores score_track(const Track& track, const ClassProfile& profile, std::int64_t n,
                                    const WeightConfig& weights,
                                    ShapeConstancyMode mode = ShapeConstancyMode::Descriptor) {
  if (!weights.valid()) throw std::invalid_argument("weights must lie in [0,1]");
  BodyBudgetScores s;
  s.weights = weights;
  s.s_op = score_object_permanence(track, profile);
  s.s_sc = score_shape_constancy(track, mode);
  s.s_stc = score_spatial_temporal(track, n);
  s.a = composite_score(s.s_op, s.s_sc, s.s_stc, weights);
  return s;
}

// The event's subject: the non-wall track with the most detections, lowest
// id on ties. Returns nullptr when the event has no non-wall track.
inline const Track* focus_track(const std::vector<Track>& tracks) {
  const Track* best = nullptr;
  for (const auto& t : tracks) {
    if (t.occluder || t.detected_frames == 0) continue;
    if (!best || t.detected_frames > best->detected_frames) best = &t;
  }
  return best;
}

}  // namespace curio
