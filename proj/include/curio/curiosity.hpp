#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curio/body_budget.hpp"
#include "curio/knowledge.hpp"
#include "curio/tracker.hpp"
#include "curio/trace_model.hpp"

namespace curio {

struct CuriosityParams {
  TrackerParams tracker;
  WeightConfig weights;
  std::optional<WeightConfig> occluder_weights;  // used instead of `weights` when a wall is seen
  ImpactTable impacts;
  ShapeConstancyMode sc_mode = ShapeConstancyMode::Descriptor;
  double occlusion_coverage_min = 0.7;
  double occluder_margin = 5.0;  // px added around wall boxes for containment
  SceneBounds scene;
};

inline constexpr std::string_view kPromotedRule = "promoted rule";

// Evidence gathered while re-examining one gap. countwall counts gap frames
// whose estimated object center lies inside a wall box.
struct CuriosityContext {
  int countwall = 0;
  int gap_frames = 0;
  double coverage = 0.0;       // countwall / gap_frames, 0 for an empty gap
  int outside_scene = 0;       // gap frames with the center outside the scene (entry/exit gaps only)
};

struct Explanation {
  Discontinuity discontinuity;
  bool explained = false;
  bool explained_by_occluder = false;
  bool explained_by_scene_exit = false;
  CuriosityContext context;
};

struct TrackReport {
  int track_id = 0;
  ObjectClass object_class = ObjectClass::Unknown;
  bool occluder = false;
  int detected_frames = 0;
  std::optional<BodyBudgetScores> scores;
};

struct EventVerdict {
  std::string event_id;
  EventFlag flag = EventFlag::Possible;
  EventFlag agent_flag = EventFlag::Possible;  // before comparison with ground truth
  std::vector<Explanation> explanations;
  std::vector<TrackReport> tracks;
  std::optional<int> focus_track_id;
  bool occluder_present = false;
  std::optional<bool> ground_truth_match;
  std::optional<ZNumber> z;
  std::optional<ExceptionRecord> exception;
  std::optional<std::string> rule;  // "promoted rule" when an accepted exception decided the flag
};

class ClassificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool inside_any_wall(const std::vector<const Track*>& walls, std::size_t frame, Point p, double margin) {
  for (const auto* w : walls) {
    const auto& s = w->samples[frame];
    if (s.present() && s.detection->bbox.inflated(margin).contains(p.x, p.y)) return true;
  }
  return false;
}

// Where the object is believed to be during a gap: the coasted prediction,
// or for frames before a track starts, its first observation back-projected
// with the final velocity estimate.
inline std::optional<Point> estimated_center(const Track& tr, std::int64_t frame) {
  const auto& s = tr.samples[static_cast<std::size_t>(frame)];
  if (s.predicted) return s.predicted;
  const auto first = tr.first_present();
  if (!first || frame >= *first) return std::nullopt;
  const Point p0 = *tr.samples[static_cast<std::size_t>(*first)].observed;
  const auto dt = static_cast<double>(*first - frame);
  return Point{p0.x - tr.final_velocity.x * dt, p0.y - tr.final_velocity.y * dt};
}

}  // namespace detail

// Re-examines every discontinuity for an external cause.
//
// The source procedure accepts an event when "countwall in range
// (0.7 x count O(x_t) + count O(x_t), count O(x_t))", which is not a
// well-formed interval. It is read here as: a Vanish/Appear gap is explained
// when the object's estimated center lies inside a wall box on at least
// occlusion_coverage_min (0.7) of the gap frames. Gaps that touch the start
// or end of the event may also count frames where the center is outside the
// scene (entry/exit). Jumps and shape switches are never explained by an
// occluder. The event is Possible only if every discontinuity is explained.
inline std::pair<EventFlag, std::vector<Explanation>> explain_discontinuities(
    const std::vector<Discontinuity>& discs, const std::vector<Track>& tracks,
    const CuriosityParams& params = {}) {
  std::vector<const Track*> walls;
  for (const auto& t : tracks) {
    if (t.occluder) walls.push_back(&t);
  }

  std::vector<Explanation> out;
  bool all_explained = true;
  for (const auto& d : discs) {
    Explanation e{d, false, false, false, {}};
    const bool gap_kind = d.kind == DiscontinuityKind::Vanish || d.kind == DiscontinuityKind::Appear;
    auto it = std::find_if(tracks.begin(), tracks.end(), [&](const Track& t) { return t.track_id == d.track_id; });
    if (gap_kind && it != tracks.end()) {
      const Track& tr = *it;
      const auto n = static_cast<std::int64_t>(tr.samples.size());
      const bool boundary = d.kind == DiscontinuityKind::Appear || d.end == n - 1;
      int outside = 0;
      for (auto f = d.start; f <= d.end; ++f) {
        e.context.gap_frames += 1;
        const auto p = detail::estimated_center(tr, f);
        if (!p) continue;
        if (detail::inside_any_wall(walls, static_cast<std::size_t>(f), *p, params.occluder_margin)) {
          e.context.countwall += 1;
        } else if (boundary && !params.scene.contains(p->x, p->y)) {
          outside += 1;
        }
      }
      e.context.outside_scene = outside;
      const double gap = e.context.gap_frames;
      e.context.coverage = gap > 0 ? e.context.countwall / gap : 0.0;
      if (e.context.coverage >= params.occlusion_coverage_min) {
        e.explained = e.explained_by_occluder = true;
      } else if (gap > 0 && (e.context.countwall + outside) / gap >= params.occlusion_coverage_min) {
        e.explained = true;
        e.explained_by_scene_exit = true;
        e.explained_by_occluder = e.context.countwall > 0;
      }
    }
    all_explained = all_explained && e.explained;
    out.push_back(std::move(e));
  }
  return {all_explained ? EventFlag::Possible : EventFlag::Impossible, std::move(out)};
}

// Everything about an event that does not depend on the knowledge base.
struct EventAnalysis {
  std::string event_id;
  std::vector<Track> tracks;
  std::vector<Discontinuity> discontinuities;
  std::vector<Explanation> explanations;
  EventFlag agent_flag = EventFlag::Possible;
  std::vector<TrackReport> reports;
  std::optional<int> focus_track_id;
  bool occluder_present = false;
};

inline EventAnalysis analyze_event(const EventTrace& trace, const CuriosityParams& params = {}) {
  EventAnalysis an;
  an.event_id = trace.event_id;
  an.tracks = track_event(trace, params.tracker);
  const Track* focus = focus_track(an.tracks);
  if (!focus) throw ClassificationError("event '" + trace.event_id + "' has no non-wall objects");
  an.focus_track_id = focus->track_id;
  an.occluder_present = std::any_of(an.tracks.begin(), an.tracks.end(), [](const Track& t) { return t.occluder; });

  an.discontinuities = detect_discontinuities(an.tracks, params.tracker);
  if (an.discontinuities.empty()) {
    an.agent_flag = EventFlag::Possible;
  } else {
    std::tie(an.agent_flag, an.explanations) = explain_discontinuities(an.discontinuities, an.tracks, params);
  }

  const WeightConfig& w = an.occluder_present && params.occluder_weights ? *params.occluder_weights : params.weights;
  for (const auto& t : an.tracks) {
    TrackReport r{t.track_id, t.occluder ? ObjectClass::Wall : t.resolved_class(), t.occluder, t.detected_frames, {}};
    if (!t.occluder) {
      if (auto profile = params.impacts.profile(r.object_class)) {
        r.scores = score_track(t, *profile, trace.frame_count, w, params.sc_mode);
      }
    }
    an.reports.push_back(std::move(r));
  }
  return an;
}

namespace detail {

inline const TrackReport* report_for(const EventAnalysis& an, std::optional<int> id) {
  if (!id) return nullptr;
  for (const auto& r : an.reports) {
    if (r.track_id == *id) return &r;
  }
  return nullptr;
}

// Z-number for the focus object against the current class statistics. A
// subject without an impact value of its own is scored once per class
// hypothesis.
inline std::optional<ZNumber> focus_znumber(const EventAnalysis& an, const EventTrace& trace,
                                            const KnowledgeBase& kb, const CuriosityParams& params) {
  const auto stats = kb.inference_stats();
  const TrackReport* focus = report_for(an, an.focus_track_id);
  if (stats.empty() || !focus) return std::nullopt;
  if (focus->scores) return make_znumber(focus->scores->a, stats);

  const auto& track = *std::find_if(an.tracks.begin(), an.tracks.end(),
                                    [&](const Track& t) { return t.track_id == focus->track_id; });
  const WeightConfig& w = an.occluder_present && params.occluder_weights ? *params.occluder_weights : params.weights;
  std::map<ObjectClass, double> a_by_class;
  for (const auto& s : stats) {
    if (auto profile = params.impacts.profile(s.object_class)) {
      a_by_class[s.object_class] = score_track(track, *profile, trace.frame_count, w, params.sc_mode).a;
    }
  }
  std::vector<ClassStats> usable;
  for (const auto& s : stats) {
    if (a_by_class.count(s.object_class)) usable.push_back(s);
  }
  if (usable.empty()) return std::nullopt;
  ZNumber z;
  z.b = confidence_per_hypothesis(a_by_class, usable);
  z.x = argmin_confidence(z.b);
  z.a = a_by_class.at(*z.x);
  for (const auto& s : usable) z.raw_distance[s.object_class] = std::abs(s.mean - a_by_class.at(s.object_class));
  return z;
}

}  // namespace detail

// Compares the agent's flag with ground truth and threads the knowledge base.
// Match: the flag stands and the focus class statistics absorb its score.
// Mismatch: the event becomes an Exception and is recorded, unless its
// signature is already a promoted rule, in which case the ground-truth label
// is adopted.
inline EventVerdict adjudicate(const EventAnalysis& an, const EventTrace& trace, KnowledgeBase& kb,
                               const CuriosityParams& params = {}) {
  EventVerdict v;
  v.event_id = an.event_id;
  v.agent_flag = an.agent_flag;
  v.flag = an.agent_flag;
  v.explanations = an.explanations;
  v.tracks = an.reports;
  v.focus_track_id = an.focus_track_id;
  v.occluder_present = an.occluder_present;
  v.z = detail::focus_znumber(an, trace, kb, params);

  if (!trace.ground_truth) return v;
  const auto& gt = *trace.ground_truth;

  auto absorb_scores = [&] {
    const TrackReport* focus = detail::report_for(an, an.focus_track_id);
    if (!focus || !focus->scores || focus->object_class == ObjectClass::Unknown) return;
    if (std::find(gt.object_classes.begin(), gt.object_classes.end(), focus->object_class) ==
        gt.object_classes.end()) {
      return;
    }
    kb.update_stats(focus->object_class, focus->scores->a);
  };

  const bool agent_possible = an.agent_flag == EventFlag::Possible;
  if (agent_possible == gt.possible) {
    v.ground_truth_match = true;
    absorb_scores();
    return v;
  }

  std::vector<DiscontinuityKind> kinds;
  for (const auto& d : an.discontinuities) kinds.push_back(d.kind);
  const auto sig = make_signature(std::move(kinds), an.occluder_present, an.agent_flag, gt.possible);
  if (kb.is_promoted(sig)) {
    v.flag = gt.possible ? EventFlag::Possible : EventFlag::Impossible;
    v.ground_truth_match = true;
    v.rule = std::string(kPromotedRule);
    v.exception = kb.record_exception(sig);
    absorb_scores();
    return v;
  }
  v.flag = EventFlag::Exception;
  v.ground_truth_match = false;
  v.exception = kb.record_exception(sig);
  return v;
}

inline std::pair<EventVerdict, KnowledgeBase> classify_event(const EventTrace& trace, KnowledgeBase kb,
                                                             const CuriosityParams& params = {}) {
  const auto an = analyze_event(trace, params);
  auto verdict = adjudicate(an, trace, kb, params);
  return {std::move(verdict), std::move(kb)};
}

struct EventOutcome {
  std::string event_id;
  std::optional<EventVerdict> verdict;
  std::optional<std::string> error;
};

// Classifies events in order, threading the knowledge base. The KB-independent
// analysis may run on `workers` threads; adjudication is always sequential in
// input order, so the result does not depend on the worker count.
inline std::pair<std::vector<EventOutcome>, KnowledgeBase> process_stream(
    const std::vector<EventTrace>& traces, KnowledgeBase kb, const CuriosityParams& params = {},
    unsigned workers = 1) {
  using Analysis = std::pair<std::optional<EventAnalysis>, std::optional<std::string>>;
  auto analyze = [&](std::size_t i) -> Analysis {
    try {
      return {analyze_event(traces[i], params), std::nullopt};
    } catch (const std::exception& e) {
      return {std::nullopt, std::string(e.what())};
    }
  };

  std::vector<Analysis> analyses(traces.size());
  workers = std::max(1u, workers);
  if (workers == 1 || traces.size() < 2) {
    for (std::size_t i = 0; i < traces.size(); ++i) analyses[i] = analyze(i);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < traces.size(); i += workers) analyses[i] = analyze(i);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  std::vector<EventOutcome> out;
  out.reserve(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    EventOutcome o{traces[i].event_id, std::nullopt, analyses[i].second};
    if (analyses[i].first) {
      try {
        o.verdict = adjudicate(*analyses[i].first, traces[i], kb, params);
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
    out.push_back(std::move(o));
  }
  return {std::move(out), std::move(kb)};
}

}  // namespace curio
