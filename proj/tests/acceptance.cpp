// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "test_support.hpp"

using namespace curio;
using namespace curio::testing;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(const char* id, const char* title, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << " [exception: " << e.what() << "]";
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (!c.ok) ++failures;
  std::printf("[%s] %s %s:%s (%.2f ms)\n", c.ok ? "PASS" : "FAIL", id, title, c.detail.str().c_str(), ms);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// 48 detections at confidence 0.6 out of 90 frames.
Track table_track() { return synthetic_track(90, 48, 0.6); }

}  // namespace

int main() {
  report("AC1", "object permanence 48 x 0.6 x 10", [](Check& c) {
    const double s = score_object_permanence(table_track(), {ObjectClass::Sphere, 10});
    c.detail << " S_op=" << s;
    c.expect(near(s, 0.288, 1e-9), "|S_op - 0.288| <= 1e-9");
  });

  report("AC2", "spatial-temporal continuity 48/90", [](Check& c) {
    const double s = score_spatial_temporal(table_track(), 90);
    c.detail << " S_stc=" << s;
    c.expect(near(s, 0.5333, 0.005), "|S_stc - 0.5333| <= 0.005");
  });

  report("AC3", "composite of (0.288, 0.68, 0.533)", [](Check& c) {
    const double a = composite_score(0.288, 0.68, 0.533, WeightConfig{0.33, 0.33, 0.33});
    c.detail << " A=" << a;
    c.expect(near(a, 0.494, 0.01), "|A - 0.494| <= 0.01");
  });

  report("AC4", "inference against {sphere 1.57, other 17.88}", [](Check& c) {
    const std::vector<ClassStats> stats{{ObjectClass::Sphere, 1.57, 1}, {ObjectClass::Cone, 17.88, 1}};
    const double a_u = 0.494;
    // Table scores per hypothesis: the subject's 0.494, the other row's 2.78.
    const std::map<ObjectClass, double> a_rows{{ObjectClass::Sphere, a_u}, {ObjectClass::Cone, 2.78}};

    const auto x = infer(a_u, stats);
    c.detail << " X=" << to_string(x);
    c.expect(x == ObjectClass::Sphere, "infers sphere");

    const auto single = confidence(a_u, stats);
    const auto rows = confidence_per_hypothesis(a_rows, stats);
    c.detail << " B(single A)={" << single.at(ObjectClass::Sphere) << ", " << single.at(ObjectClass::Cone) << "}"
             << " B(per-row A)={" << rows.at(ObjectClass::Sphere) << ", " << rows.at(ObjectClass::Cone) << "}";
    c.expect(argmin_confidence(rows) == ObjectClass::Sphere, "per-row inference is sphere");
    c.expect(near(rows.at(ObjectClass::Sphere), 0.448, 0.005) && near(rows.at(ObjectClass::Cone), 0.552, 0.005),
             "B = {0.448, 0.552} +- 0.005");

    const double raw_sphere = std::abs(stats[0].mean - a_rows.at(ObjectClass::Sphere));
    const double raw_other = std::abs(stats[1].mean - a_rows.at(ObjectClass::Cone));
    const auto raw_single = raw_distances(a_u, stats);
    c.detail << " raw(per-row)={" << raw_sphere << ", " << raw_other << "}"
             << " raw(single A)={" << raw_single.at(ObjectClass::Sphere) << ", " << raw_single.at(ObjectClass::Cone)
             << "}";
    c.expect(near(raw_sphere, 1.076, 0.01), "raw sphere = 1.076 +- 0.01");
    c.expect(near(raw_other, 15.08, 0.01) || near(raw_single.at(ObjectClass::Cone), 15.08, 0.01),
             "raw other = 15.08 +- 0.01");
  });

  report("AC5", "generator soundness, 5 kinds x 3 classes x 5 seeds", [](Check& c) {
    std::vector<EventTrace> corpus;
    for (auto kind : kAllScenarioKinds) {
      for (auto cls : kScoredClasses) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) corpus.push_back(generate_event(scenario(kind, cls, seed)));
      }
    }
    KnowledgeBase kb;
    int matched = 0;
    for (const auto& t : corpus) {
      auto [v, next] = classify_event(t, kb);
      kb = std::move(next);
      if (v.ground_truth_match == true) {
        ++matched;
      } else {
        c.detail << " miss=" << t.event_id;
      }
    }
    c.detail << " matched=" << matched << "/" << corpus.size();
    c.expect(matched == static_cast<int>(corpus.size()), "100% match");
  });

  report("AC6", "filter on noiseless constant-velocity traces", [](Check& c) {
    double worst_residual = 0, worst_velocity = 0;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> v(-6, 6), p(100, 300);
    for (int i = 0; i < 200; ++i) {
      const Point vel{v(rng), v(rng)};
      const auto tracks = track_event(constant_velocity_trace(90, {p(rng), p(rng)}, vel));
      if (tracks.size() != 1) {
        c.expect(false, "single track");
        return;
      }
      for (std::size_t t = 5; t < 90; ++t) worst_residual = std::max(worst_residual, *tracks[0].samples[t].residual);
      // Velocity after 20 frames: rerun on the 20-frame prefix.
      const auto short_tracks = track_event(constant_velocity_trace(20, {p(rng), p(rng)}, vel));
      const auto fv = short_tracks[0].final_velocity;
      worst_velocity = std::max(worst_velocity, std::hypot(fv.x - vel.x, fv.y - vel.y));
    }
    c.detail << " max_residual=" << worst_residual << " max_velocity_error=" << worst_velocity;
    c.expect(worst_residual < 0.5, "residual < 0.5 px after burn-in");
    c.expect(worst_velocity < 1e-3, "velocity error < 1e-3 after 20 frames");
  });

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mean_d(0.01, 100), a_d(0, 120);
  auto random_stats = [&] {
    std::vector<ClassStats> s;
    const auto n = 1 + rng() % 3;
    for (std::size_t i = 0; i < n; ++i) s.push_back({kScoredClasses[i], mean_d(rng), 1});
    return s;
  };

  report("AC7", "confidence normalization, 1000 instances", [&](Check& c) {
    double worst = 0, min_b = 1;
    for (int i = 0; i < 1000; ++i) {
      const auto b = confidence(a_d(rng), random_stats());
      double sum = 0;
      for (const auto& [k, v] : b) sum += v, min_b = std::min(min_b, v);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    c.detail << " max|sum-1|=" << worst << " min B=" << min_b;
    c.expect(worst <= 1e-9, "sum = 1 +- 1e-9");
    c.expect(min_b >= 0, "B >= 0");
  });

  report("AC8", "argmin invariance, 1000 instances", [&](Check& c) {
    int agree = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto stats = random_stats();
      const double a = a_d(rng);
      const ClassStats* best = &stats[0];
      for (const auto& s : stats) {
        if (std::abs(s.mean - a) / s.mean < std::abs(best->mean - a) / best->mean) best = &s;
      }
      agree += infer(a, stats) == best->object_class;
    }
    c.detail << " agree=" << agree << "/1000";
    c.expect(agree == 1000, "all agree");
  });

  report("AC9", "exception promotion at threshold 3", [](Check& c) {
    std::vector<EventTrace> traces;
    for (std::uint64_t s = 0; s < 4; ++s) {
      auto t = generate_event(scenario(ScenarioKind::ImpossibleDisappear, ObjectClass::Cone, s));
      t.ground_truth->possible = true;
      traces.push_back(std::move(t));
    }
    const auto [out, kb] = process_stream(traces, KnowledgeBase(3));
    for (int i = 0; i < 3; ++i) {
      c.expect(out[static_cast<std::size_t>(i)].verdict->flag == EventFlag::Exception, "first three are exceptions");
    }
    c.expect(out[2].verdict->exception->promoted, "third occurrence promotes");
    const auto& fourth = *out[3].verdict;
    c.detail << " fourth flag=" << to_string(fourth.flag) << " rule=" << fourth.rule.value_or("none");
    c.expect(fourth.rule == std::string(kPromotedRule), "fourth cites promoted rule");
  });

  report("AC10", "round trips, 100 traces and 100 knowledge bases", [](Check& c) {
    std::mt19937_64 r(10);
    int traces_ok = 0, kbs_ok = 0;
    std::uniform_real_distribution<double> a(0, 500);
    for (int i = 0; i < 100; ++i) {
      const auto t = random_trace(r);
      traces_ok += decode_trace(encode_trace(t)) == t;

      KnowledgeBase kb(1 + static_cast<int>(r() % 5));
      for (int j = static_cast<int>(r() % 30); j > 0; --j) kb.update_stats(kScoredClasses[r() % 3], a(r) / 3.0);
      for (int j = static_cast<int>(r() % 10); j > 0; --j) {
        std::vector<DiscontinuityKind> kinds{static_cast<DiscontinuityKind>(r() % 4)};
        kb.record_exception(make_signature(kinds, r() % 2 == 0, EventFlag::Impossible, r() % 2 == 0));
      }
      kbs_ok += load_kb(save_kb(kb)) == kb;
    }
    c.detail << " traces=" << traces_ok << "/100 kbs=" << kbs_ok << "/100";
    c.expect(traces_ok == 100 && kbs_ok == 100, "all lossless");
  });

  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}
