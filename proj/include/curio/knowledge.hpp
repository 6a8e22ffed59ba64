#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "curio/tracker.hpp"
#include "curio/trace_model.hpp"

namespace curio {

enum class EventFlag { Possible, Impossible, Exception };

inline constexpr std::string_view to_string(EventFlag f) {
  switch (f) {
    case EventFlag::Possible: return "possible";
    case EventFlag::Impossible: return "impossible";
    case EventFlag::Exception: return "exception";
  }
  return "";
}

inline std::optional<EventFlag> parse_event_flag(std::string_view s) {
  if (s == "possible") return EventFlag::Possible;
  if (s == "impossible") return EventFlag::Impossible;
  if (s == "exception") return EventFlag::Exception;
  return std::nullopt;
}

struct ClassStats {
  ObjectClass object_class = ObjectClass::Sphere;
  double mean = 0.0;  // running mean of composite scores; meaningful when count >= 1
  long long count = 0;

  friend bool operator==(const ClassStats&, const ClassStats&) = default;
};

// <X, A, B>: class hypothesis, composite score of the subject and the
// per-class confidence. Lower B means closer to that class.
struct ZNumber {
  std::optional<ObjectClass> x;
  double a = 0.0;
  std::map<ObjectClass, double> b;
  std::map<ObjectClass, double> raw_distance;  // |mean_c - A|, for reports
};

struct ExceptionSignature {
  std::vector<DiscontinuityKind> violation_kinds;  // sorted, unique
  bool occluder_present = false;
  EventFlag verdict_agent = EventFlag::Possible;
  bool ground_truth_possible = true;

  friend bool operator==(const ExceptionSignature&, const ExceptionSignature&) = default;
};

inline ExceptionSignature make_signature(std::vector<DiscontinuityKind> kinds, bool occluder_present,
                                         EventFlag agent, bool ground_truth_possible) {
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  return {std::move(kinds), occluder_present, agent, ground_truth_possible};
}

struct ExceptionRecord {
  ExceptionSignature signature;
  long long occurrences = 0;
  bool promoted = false;

  friend bool operator==(const ExceptionRecord&, const ExceptionRecord&) = default;
};

class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KbLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_stats(const std::vector<ClassStats>& stats) {
  if (stats.empty()) throw InferenceError("no class statistics available");
  for (const auto& s : stats) {
    if (s.count < 1 || !(s.mean > 0.0)) {
      throw InferenceError("degenerate statistics for class " + std::string(to_string(s.object_class)));
    }
  }
}

inline std::map<ObjectClass, double> normalize(const std::map<ObjectClass, double>& rel) {
  double sum = 0.0;
  for (const auto& [c, v] : rel) sum += v;
  std::map<ObjectClass, double> out;
  for (const auto& [c, v] : rel) {
    // Every class mean equals the subject's score: uniform confidence, and
    // infer() falls back to the fixed class order.
    out[c] = sum > 0.0 ? v / sum : 1.0 / static_cast<double>(rel.size());
  }
  return out;
}

}  // namespace detail

// B_c = (|mean_c - A_c| / mean_c) / sum_k (|mean_k - A_k| / mean_k), where
// A_c is the subject's score under the hypothesis that it belongs to class c.
inline std::map<ObjectClass, double> confidence_per_hypothesis(
    const std::map<ObjectClass, double>& a_by_class, const std::vector<ClassStats>& stats) {
  detail::check_stats(stats);
  std::map<ObjectClass, double> rel;
  for (const auto& s : stats) {
    auto it = a_by_class.find(s.object_class);
    if (it == a_by_class.end()) {
      throw InferenceError("no score for hypothesis " + std::string(to_string(s.object_class)));
    }
    if (!(it->second >= 0.0)) throw InferenceError("score must be >= 0");
    rel[s.object_class] = std::abs(s.mean - it->second) / s.mean;
  }
  return detail::normalize(rel);
}

// Same score for every hypothesis.
inline std::map<ObjectClass, double> confidence(double a_u, const std::vector<ClassStats>& stats) {
  std::map<ObjectClass, double> a;
  for (const auto& s : stats) a[s.object_class] = a_u;
  return confidence_per_hypothesis(a, stats);
}

inline std::map<ObjectClass, double> raw_distances(double a_u, const std::vector<ClassStats>& stats) {
  std::map<ObjectClass, double> out;
  for (const auto& s : stats) out[s.object_class] = std::abs(s.mean - a_u);
  return out;
}

// Class with the smallest B; exact ties go to the fixed order sphere, cone, cube.
inline ObjectClass argmin_confidence(const std::map<ObjectClass, double>& b) {
  if (b.empty()) throw InferenceError("empty confidence map");
  auto best = b.begin();
  for (auto it = b.begin(); it != b.end(); ++it) {
    if (it->second < best->second ||
        (it->second == best->second && class_rank(it->first) < class_rank(best->first))) {
      best = it;
    }
  }
  return best->first;
}

inline ObjectClass infer(double a_u, const std::vector<ClassStats>& stats) {
  return argmin_confidence(confidence(a_u, stats));
}

inline ZNumber make_znumber(double a_u, const std::vector<ClassStats>& stats) {
  ZNumber z;
  z.a = a_u;
  z.b = confidence(a_u, stats);
  z.x = argmin_confidence(z.b);
  z.raw_distance = raw_distances(a_u, stats);
  return z;
}

inline constexpr int kKbVersion = 1;

// Class statistics plus exception records. A plain value: copy it to branch,
// serialize writers externally.
class KnowledgeBase {
 public:
  explicit KnowledgeBase(int promotion_threshold = 3) { set_promotion_threshold(promotion_threshold); }

  int promotion_threshold() const { return promotion_threshold_; }

  // Raising the threshold leaves already promoted rules promoted.
  void set_promotion_threshold(int threshold) {
    if (threshold < 1) throw std::invalid_argument("promotion threshold must be >= 1");
    promotion_threshold_ = threshold;
  }

  void update_stats(ObjectClass c, double a) {
    if (c == ObjectClass::Unknown) throw std::invalid_argument("cannot record statistics for unknown class");
    if (!(a >= 0.0)) throw std::invalid_argument("composite score must be >= 0");
    auto& s = stats_[c];
    s.object_class = c;
    s.count += 1;
    s.mean += (a - s.mean) / static_cast<double>(s.count);
  }

  std::optional<ClassStats> stats(ObjectClass c) const {
    if (auto it = stats_.find(c); it != stats_.end()) return it->second;
    return std::nullopt;
  }

  std::vector<ClassStats> all_stats() const {
    std::vector<ClassStats> out;
    for (const auto& [c, s] : stats_) out.push_back(s);
    std::sort(out.begin(), out.end(), [](const ClassStats& a, const ClassStats& b) {
      return class_rank(a.object_class) < class_rank(b.object_class);
    });
    return out;
  }

  // Statistics usable for inference: scorable classes with count >= 1 and mean > 0.
  std::vector<ClassStats> inference_stats() const {
    std::vector<ClassStats> out;
    for (const auto& s : all_stats()) {
      if (s.count >= 1 && s.mean > 0.0 && !is_occluder(s.object_class)) out.push_back(s);
    }
    return out;
  }

  const ExceptionRecord& record_exception(const ExceptionSignature& sig) {
    auto* rec = find(sig);
    if (!rec) {
      exceptions_.push_back({sig, 0, false});
      rec = &exceptions_.back();
    }
    rec->occurrences += 1;
    if (rec->occurrences >= promotion_threshold_) rec->promoted = true;
    return *rec;
  }

  bool is_promoted(const ExceptionSignature& sig) const {
    const auto* rec = find(sig);
    return rec && rec->promoted;
  }

  const ExceptionRecord* find(const ExceptionSignature& sig) const {
    for (const auto& r : exceptions_) {
      if (r.signature == sig) return &r;
    }
    return nullptr;
  }

  const std::vector<ExceptionRecord>& exceptions() const { return exceptions_; }

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

 private:
  ExceptionRecord* find(const ExceptionSignature& sig) {
    for (auto& r : exceptions_) {
      if (r.signature == sig) return &r;
    }
    return nullptr;
  }

  friend KnowledgeBase kb_from_json(const nlohmann::json& j);

  int promotion_threshold_ = 3;
  std::map<ObjectClass, ClassStats> stats_;
  std::vector<ExceptionRecord> exceptions_;
};

inline nlohmann::json kb_to_json(const KnowledgeBase& kb) {
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& s : kb.all_stats()) {
    stats.push_back({{"class", std::string(to_string(s.object_class))}, {"mean", s.mean}, {"count", s.count}});
  }
  nlohmann::json exc = nlohmann::json::array();
  for (const auto& e : kb.exceptions()) {
    nlohmann::json kinds = nlohmann::json::array();
    for (auto k : e.signature.violation_kinds) kinds.push_back(std::string(to_string(k)));
    exc.push_back({{"violation_kinds", std::move(kinds)},
                   {"occluder_present", e.signature.occluder_present},
                   {"verdict_agent", std::string(to_string(e.signature.verdict_agent))},
                   {"verdict_ground_truth", e.signature.ground_truth_possible ? "possible" : "impossible"},
                   {"occurrences", e.occurrences},
                   {"promoted", e.promoted}});
  }
  return {{"version", kKbVersion},
          {"promotion_threshold", kb.promotion_threshold()},
          {"class_stats", std::move(stats)},
          {"exceptions", std::move(exc)}};
}

inline KnowledgeBase kb_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw KbLoadError("knowledge base is not an object");
    const auto version = j.at("version").get<int>();
    if (version != kKbVersion) {
      throw KbLoadError("unsupported knowledge base version " + std::to_string(version));
    }
    KnowledgeBase kb(j.at("promotion_threshold").get<int>());
    for (const auto& s : j.at("class_stats")) {
      const auto c = parse_object_class(s.at("class").get<std::string>());
      if (!c || *c == ObjectClass::Unknown) throw KbLoadError("bad class in class_stats");
      ClassStats cs{*c, s.at("mean").get<double>(), s.at("count").get<long long>()};
      if (cs.count < 1 || !(cs.mean >= 0.0)) throw KbLoadError("bad statistics for class " + std::string(to_string(*c)));
      if (kb.stats_.count(*c)) throw KbLoadError("duplicate class in class_stats");
      kb.stats_[*c] = cs;
    }
    for (const auto& e : j.at("exceptions")) {
      ExceptionRecord rec;
      for (const auto& k : e.at("violation_kinds")) {
        const auto kind = parse_discontinuity_kind(k.get<std::string>());
        if (!kind) throw KbLoadError("bad violation kind");
        rec.signature.violation_kinds.push_back(*kind);
      }
      rec.signature.occluder_present = e.at("occluder_present").get<bool>();
      const auto agent = parse_event_flag(e.at("verdict_agent").get<std::string>());
      if (!agent) throw KbLoadError("bad verdict_agent");
      rec.signature.verdict_agent = *agent;
      const auto gt = e.at("verdict_ground_truth").get<std::string>();
      if (gt != "possible" && gt != "impossible") throw KbLoadError("bad verdict_ground_truth");
      rec.signature.ground_truth_possible = gt == "possible";
      rec.occurrences = e.at("occurrences").get<long long>();
      rec.promoted = e.at("promoted").get<bool>();
      if (rec.occurrences < 1) throw KbLoadError("exception occurrences must be >= 1");
      kb.exceptions_.push_back(std::move(rec));
    }
    return kb;
  } catch (const KbLoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw KbLoadError(std::string("corrupt knowledge base: ") + e.what());
  }
}

inline std::string save_kb(const KnowledgeBase& kb) { return kb_to_json(kb).dump(2) + "\n"; }

inline KnowledgeBase load_kb(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw KbLoadError(std::string("corrupt knowledge base: ") + e.what());
  }
  return kb_from_json(j);
}

inline KnowledgeBase load_kb_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw KbLoadError("cannot open knowledge base " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_kb(ss.str());
}

// Writes to a sibling temp file, then renames over the target.
inline void save_kb_file(const KnowledgeBase& kb, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << save_kb(kb);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot replace " + path.string() + ": " + ec.message());
  }
}

}  // namespace curio
