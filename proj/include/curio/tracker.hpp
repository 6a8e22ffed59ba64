#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "curio/kalman.hpp"
#include "curio/trace_model.hpp"

namespace curio {

struct TrackerParams {
  FilterParams filter;
  double assoc_gate = 50.0;       // px, nearest-neighbor association radius
  double jump_gate = 25.0;        // px, residual above which a detection is a jump
  int shape_switch_min_frames = 3;
};

// One frame of a track. `predicted` is the filter prior for that frame (set
// from the frame after the track starts, including coasted frames);
// `residual` exists exactly where both observation and prediction exist.
struct TrackSample {
  std::optional<Detection> detection;
  std::optional<Point> observed;
  std::optional<Point> predicted;
  std::optional<double> residual;
  bool jump = false;  // residual exceeded jump_gate; filter was re-anchored

  bool present() const { return detection.has_value(); }
};

struct Track {
  int track_id = 0;
  bool occluder = false;
  std::map<ObjectClass, int> class_votes;
  std::vector<TrackSample> samples;  // one per frame, length N
  int detected_frames = 0;
  Point final_velocity;              // filter velocity after the last frame

  // Majority class; ties go to the earlier class in the fixed order.
  ObjectClass resolved_class() const {
    ObjectClass best = ObjectClass::Unknown;
    int votes = -1;
    for (const auto& [c, n] : class_votes) {
      if (n > votes || (n == votes && class_rank(c) < class_rank(best))) {
        best = c;
        votes = n;
      }
    }
    return best;
  }

  std::optional<std::int64_t> first_present() const {
    for (std::size_t t = 0; t < samples.size(); ++t) {
      if (samples[t].present()) return static_cast<std::int64_t>(t);
    }
    return std::nullopt;
  }

  std::vector<bool> presence() const {
    std::vector<bool> out(samples.size());
    for (std::size_t t = 0; t < samples.size(); ++t) out[t] = samples[t].present();
    return out;
  }
};

enum class DiscontinuityKind { Vanish, Appear, Jump, ShapeSwitch };

inline constexpr std::string_view to_string(DiscontinuityKind k) {
  switch (k) {
    case DiscontinuityKind::Vanish: return "vanish";
    case DiscontinuityKind::Appear: return "appear";
    case DiscontinuityKind::Jump: return "jump";
    case DiscontinuityKind::ShapeSwitch: return "shape_switch";
  }
  return "";
}

inline std::optional<DiscontinuityKind> parse_discontinuity_kind(std::string_view s) {
  for (auto k : {DiscontinuityKind::Vanish, DiscontinuityKind::Appear, DiscontinuityKind::Jump,
                 DiscontinuityKind::ShapeSwitch}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

struct Discontinuity {
  int track_id = 0;
  DiscontinuityKind kind = DiscontinuityKind::Vanish;
  std::int64_t start = 0;  // inclusive frame span
  std::int64_t end = 0;
  double magnitude = 0.0;

  std::int64_t length() const { return end - start + 1; }

  friend bool operator==(const Discontinuity&, const Discontinuity&) = default;
};

namespace detail {

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Canonical detection order, so association does not depend on the order
// detections are listed within a frame.
inline bool canonical_less(const Detection& a, const Detection& b) {
  const int ra = class_rank(a.object_class);
  const int rb = class_rank(b.object_class);
  return std::tie(a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h, ra, a.confidence, a.shape_descriptor) <
         std::tie(b.bbox.x, b.bbox.y, b.bbox.w, b.bbox.h, rb, b.confidence, b.shape_descriptor);
}

struct LiveTrack {
  Track track;
  FilterState state;
  int updates = 0;
  ObjectClass last_label = ObjectClass::Unknown;
  Point last_observed;
};

struct Candidate {
  double dist;
  int mismatch;
  std::size_t track;
  std::size_t det;

  bool operator<(const Candidate& o) const {
    return std::tie(dist, mismatch, track, det) < std::tie(o.dist, o.mismatch, o.track, o.det);
  }
};

inline Point center_of(const Detection& d) { return {d.bbox.cx(), d.bbox.cy()}; }

inline void observe(LiveTrack& lt, std::size_t t, const Detection& d) {
  auto& s = lt.track.samples[t];
  s.detection = d;
  s.observed = center_of(d);
  lt.track.class_votes[d.object_class] += 1;
  lt.track.detected_frames += 1;
  lt.last_label = d.object_class;
  lt.last_observed = *s.observed;
}

}  // namespace detail

// Builds tracks for every object in the event. Non-wall detections are
// associated greedily to the nearest predicted center within assoc_gate
// (same class preferred on equal distance); a detection left over after that
// pass is matched to a same-class track that was seen in the previous frame
// before a new track is opened. Tracks coast through missing frames until
// the end of the event. Wall detections form occluder tracks matched on
// their last observed center.
inline std::vector<Track> track_event(const EventTrace& trace, const TrackerParams& params = {}) {
  const auto n = static_cast<std::size_t>(trace.frame_count);
  std::vector<detail::LiveTrack> objects;
  std::vector<detail::LiveTrack> walls;
  int next_id = 0;

  auto open_track = [&](std::vector<detail::LiveTrack>& into, std::size_t t, const Detection& d,
                        bool occluder) {
    detail::LiveTrack lt;
    lt.track.track_id = next_id++;
    lt.track.occluder = occluder;
    lt.track.samples.resize(n);
    const auto c = detail::center_of(d);
    lt.state = initial_state(Eigen::Vector2d(c.x, c.y), params.filter);
    detail::observe(lt, t, d);
    lt.updates = 1;
    into.push_back(std::move(lt));
  };

  for (std::size_t t = 0; t < n && t < trace.frames.size(); ++t) {
    std::vector<Detection> dets;
    std::vector<Detection> wall_dets;
    for (const auto& d : trace.frames[t].detections) {
      (is_occluder(d.object_class) ? wall_dets : dets).push_back(d);
    }
    std::sort(dets.begin(), dets.end(), detail::canonical_less);
    std::sort(wall_dets.begin(), wall_dets.end(), detail::canonical_less);

    // Predict every existing object track into this frame.
    const std::size_t existing = objects.size();
    for (std::size_t i = 0; i < existing; ++i) {
      auto& lt = objects[i];
      lt.state = predict_step(lt.state, params.filter);
      lt.track.samples[t].predicted = Point{lt.state.mean(0), lt.state.mean(1)};
    }

    std::vector<detail::Candidate> cands;
    for (std::size_t i = 0; i < existing; ++i) {
      const Point p = *objects[i].track.samples[t].predicted;
      for (std::size_t j = 0; j < dets.size(); ++j) {
        const double dist = detail::distance(p, detail::center_of(dets[j]));
        if (dist <= params.assoc_gate) {
          cands.push_back({dist, dets[j].object_class == objects[i].last_label ? 0 : 1, i, j});
        }
      }
    }
    std::sort(cands.begin(), cands.end());
    std::vector<bool> track_used(existing, false);
    std::vector<std::optional<std::size_t>> det_track(dets.size());
    for (const auto& c : cands) {
      if (track_used[c.track] || det_track[c.det]) continue;
      track_used[c.track] = true;
      det_track[c.det] = c.track;
    }

    // Recovery pass: a same-class track seen last frame claims an otherwise
    // unmatched detection even beyond the gate (a positional jump).
    if (t > 0) {
      std::vector<detail::Candidate> far;
      for (std::size_t i = 0; i < existing; ++i) {
        if (track_used[i] || !objects[i].track.samples[t - 1].present()) continue;
        const Point p = *objects[i].track.samples[t].predicted;
        for (std::size_t j = 0; j < dets.size(); ++j) {
          if (det_track[j] || dets[j].object_class != objects[i].last_label) continue;
          far.push_back({detail::distance(p, detail::center_of(dets[j])), 0, i, j});
        }
      }
      std::sort(far.begin(), far.end());
      for (const auto& c : far) {
        if (track_used[c.track] || det_track[c.det]) continue;
        track_used[c.track] = true;
        det_track[c.det] = c.track;
      }
    }

    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (!det_track[j]) {
        open_track(objects, t, dets[j], false);
        continue;
      }
      auto& lt = objects[*det_track[j]];
      auto& s = lt.track.samples[t];
      const Point obs = detail::center_of(dets[j]);
      const double residual = detail::distance(*s.predicted, obs);
      detail::observe(lt, t, dets[j]);
      s.residual = residual;
      // The gate only applies once a velocity has been observed (two updates).
      if (lt.updates >= 2 && residual > params.jump_gate) {
        s.jump = true;
        const Eigen::Vector2d vel = lt.state.velocity();
        lt.state = initial_state(Eigen::Vector2d(obs.x, obs.y), params.filter);
        lt.state.mean.tail<2>() = vel;
      } else {
        lt.state = update_step(lt.state, Eigen::Vector2d(obs.x, obs.y), params.filter);
      }
      lt.updates += 1;
    }

    // Occluders: nearest last-seen center within the gate.
    std::vector<bool> wall_used(walls.size(), false);
    for (const auto& d : wall_dets) {
      std::optional<std::size_t> best;
      double best_dist = params.assoc_gate;
      for (std::size_t i = 0; i < walls.size(); ++i) {
        if (wall_used[i]) continue;
        const double dist = detail::distance(walls[i].last_observed, detail::center_of(d));
        if (dist <= best_dist) {
          best = i;
          best_dist = dist;
        }
      }
      if (best) {
        wall_used[*best] = true;
        detail::observe(walls[*best], t, d);
      } else {
        open_track(walls, t, d, true);
        wall_used.push_back(true);
      }
    }
  }

  std::vector<Track> out;
  out.reserve(objects.size() + walls.size());
  for (auto& lt : objects) {
    lt.track.final_velocity = {lt.state.mean(2), lt.state.mean(3)};
    out.push_back(std::move(lt.track));
  }
  for (auto& lt : walls) out.push_back(std::move(lt.track));
  std::sort(out.begin(), out.end(), [](const Track& a, const Track& b) { return a.track_id < b.track_id; });
  return out;
}

// Breaks in each object track: Appear for a track that starts after frame 0
// (span = the frames before it appears), Vanish for every maximal absence
// after the first detection, Jump where the residual exceeded jump_gate, and
// ShapeSwitch where a new class label persists for shape_switch_min_frames
// detections. Sorted by start frame.
inline std::vector<Discontinuity> detect_discontinuities(const std::vector<Track>& tracks,
                                                         const TrackerParams& params = {}) {
  std::vector<Discontinuity> out;
  for (const auto& tr : tracks) {
    if (tr.occluder) continue;
    const auto first = tr.first_present();
    if (!first) continue;
    const auto n = static_cast<std::int64_t>(tr.samples.size());
    if (*first > 0) {
      out.push_back({tr.track_id, DiscontinuityKind::Appear, 0, *first - 1, static_cast<double>(*first)});
    }

    for (std::int64_t t = *first; t < n;) {
      if (tr.samples[static_cast<std::size_t>(t)].present()) {
        ++t;
        continue;
      }
      std::int64_t end = t;
      while (end + 1 < n && !tr.samples[static_cast<std::size_t>(end + 1)].present()) ++end;
      out.push_back({tr.track_id, DiscontinuityKind::Vanish, t, end, static_cast<double>(end - t + 1)});
      t = end + 1;
    }

    for (std::int64_t t = 0; t < n; ++t) {
      const auto& s = tr.samples[static_cast<std::size_t>(t)];
      if (s.jump && s.residual) out.push_back({tr.track_id, DiscontinuityKind::Jump, t, t, *s.residual});
    }

    // Runs of identical labels over the detected frames.
    struct Run {
      ObjectClass label;
      std::int64_t start;
      int length;
      std::size_t first_sample;
    };
    std::vector<Run> runs;
    for (std::int64_t t = 0; t < n; ++t) {
      const auto& s = tr.samples[static_cast<std::size_t>(t)];
      if (!s.present()) continue;
      if (runs.empty() || runs.back().label != s.detection->object_class) {
        runs.push_back({s.detection->object_class, t, 0, static_cast<std::size_t>(t)});
      }
      runs.back().length += 1;
    }
    std::optional<std::size_t> established;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (runs[i].length >= params.shape_switch_min_frames) {
        established = i;
        break;
      }
    }
    if (established) {
      std::size_t cur = *established;
      std::int64_t last_of_cur = runs[cur].start;
      for (std::size_t i = cur + 1; i < runs.size(); ++i) {
        if (runs[i].label == runs[cur].label || runs[i].length < params.shape_switch_min_frames) {
          continue;
        }
        // Last detection before the switch carrying the established label.
        for (std::int64_t t = runs[i].start - 1; t >= runs[cur].start; --t) {
          const auto& s = tr.samples[static_cast<std::size_t>(t)];
          if (s.present() && s.detection->object_class == runs[cur].label) {
            last_of_cur = t;
            break;
          }
        }
        const auto& before = tr.samples[static_cast<std::size_t>(last_of_cur)].detection->shape_descriptor;
        const auto& after = tr.samples[runs[i].first_sample].detection->shape_descriptor;
        const double mag = before.size() == after.size() ? descriptor_distance(before, after) : 1.0;
        out.push_back({tr.track_id, DiscontinuityKind::ShapeSwitch, runs[i].start, runs[i].start, mag});
        cur = i;
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Discontinuity& a, const Discontinuity& b) {
    return std::tie(a.start, a.track_id) < std::tie(b.start, b.track_id);
  });
  return out;
}

// Per-frame series of one track:
// frame,observed_x,observed_y,predicted_x,predicted_y,residual,present
inline void write_track_csv(std::ostream& os, const Track& track) {
  const auto old_precision = os.precision(10);
  os << "frame,observed_x,observed_y,predicted_x,predicted_y,residual,present\n";
  auto num = [&](const std::optional<double>& v) {
    if (v) os << *v;
  };
  for (std::size_t t = 0; t < track.samples.size(); ++t) {
    const auto& s = track.samples[t];
    os << t << ',';
    num(s.observed ? std::optional(s.observed->x) : std::nullopt);
    os << ',';
    num(s.observed ? std::optional(s.observed->y) : std::nullopt);
    os << ',';
    num(s.predicted ? std::optional(s.predicted->x) : std::nullopt);
    os << ',';
    num(s.predicted ? std::optional(s.predicted->y) : std::nullopt);
    os << ',';
    num(s.residual);
    os << ',' << (s.present() ? 1 : 0) << '\n';
  }
  os.precision(old_precision);
}

}  // namespace curio
