#pragma once

#include <string>

#include "json.hpp"
#include "curio/curiosity.hpp"

namespace curio {

namespace detail {

inline nlohmann::json class_map_json(const std::map<ObjectClass, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [c, v] : m) j[std::string(to_string(c))] = v;
  return j;
}

inline nlohmann::json optional_bool(const std::optional<bool>& b) {
  return b ? nlohmann::json(*b) : nlohmann::json(nullptr);
}

}  // namespace detail

inline nlohmann::json znumber_to_json(const ZNumber& z) {
  return {{"x", z.x ? nlohmann::json(std::string(to_string(*z.x))) : nlohmann::json(nullptr)},
          {"a", z.a},
          {"b", detail::class_map_json(z.b)},
          {"raw_distance", detail::class_map_json(z.raw_distance)}};
}

inline nlohmann::json verdict_to_json(const EventVerdict& v) {
  nlohmann::json expl = nlohmann::json::array();
  for (const auto& e : v.explanations) {
    const auto& d = e.discontinuity;
    expl.push_back({{"track_id", d.track_id},
                    {"kind", std::string(to_string(d.kind))},
                    {"frame_span", {d.start, d.end}},
                    {"magnitude", d.magnitude},
                    {"explained", e.explained},
                    {"explained_by_occluder", e.explained_by_occluder},
                    {"explained_by_scene_exit", e.explained_by_scene_exit},
                    {"countwall", e.context.countwall},
                    {"gap_frames", e.context.gap_frames},
                    {"coverage", e.context.coverage}});
  }
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& t : v.tracks) {
    nlohmann::json s = {{"track_id", t.track_id},
                        {"class", std::string(to_string(t.object_class))},
                        {"occluder", t.occluder},
                        {"detected_frames", t.detected_frames}};
    if (t.scores) {
      s["s_op"] = t.scores->s_op;
      s["s_sc"] = t.scores->s_sc;
      s["s_stc"] = t.scores->s_stc;
      s["a"] = t.scores->a;
    }
    scores.push_back(std::move(s));
  }
  nlohmann::json j = {
      {"event_id", v.event_id},
      {"flag", std::string(to_string(v.flag))},
      {"agent_flag", std::string(to_string(v.agent_flag))},
      {"explanations", std::move(expl)},
      {"scores", std::move(scores)},
      {"focus_track_id", v.focus_track_id ? nlohmann::json(*v.focus_track_id) : nlohmann::json(nullptr)},
      {"occluder_present", v.occluder_present},
      {"z_number", v.z ? znumber_to_json(*v.z) : nlohmann::json(nullptr)},
      {"ground_truth_match", detail::optional_bool(v.ground_truth_match)},
      {"rule", v.rule ? nlohmann::json(*v.rule) : nlohmann::json(nullptr)},
  };
  if (v.exception) {
    nlohmann::json kinds = nlohmann::json::array();
    for (auto k : v.exception->signature.violation_kinds) kinds.push_back(std::string(to_string(k)));
    j["exception"] = {{"violation_kinds", std::move(kinds)},
                      {"occluder_present", v.exception->signature.occluder_present},
                      {"verdict_agent", std::string(to_string(v.exception->signature.verdict_agent))},
                      {"verdict_ground_truth", v.exception->signature.ground_truth_possible ? "possible" : "impossible"},
                      {"occurrences", v.exception->occurrences},
                      {"promoted", v.exception->promoted}};
  } else {
    j["exception"] = nullptr;
  }
  return j;
}

// One line of the verdict report stream.
inline std::string encode_outcome(const EventOutcome& o) {
  if (o.verdict) return verdict_to_json(*o.verdict).dump();
  return nlohmann::json{{"event_id", o.event_id}, {"error", o.error.value_or("unknown error")}}.dump();
}

}  // namespace curio
