// curio: generate synthetic events, classify them, plot tracks, manage the
// knowledge base.
//
// Exit codes: 0 success, 1 I/O or configuration error, 2 some events failed.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "curio/curio.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitPartial = 2;

struct GlobalOptions {
  std::string config;
  std::uint64_t seed = 0;
  std::string kb;
  std::string out;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* kb_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

struct GenerateOptions {
  std::string kind = "possible-visible";
  std::string object_class = "sphere";
  std::int64_t frames = 90;
  double vx = 3.0;
  double vy = 0.0;
  double noise = 0.0;
  double confidence = 0.6;
  std::vector<double> occluder;
  std::string event_id;
  int count = 1;
};

struct ClassifyOptions {
  std::vector<std::string> inputs;
  double alpha = 0.33, beta = 0.33, gamma = 0.33;
  double coverage_min = 0.7;
  int promotion_threshold = 3;
  std::string sc_mode = "descriptor";
  unsigned workers = 1;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* coverage_opt = nullptr;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* sc_mode_opt = nullptr;
};

// Defaults, then the config file, then explicit flags.
curio::RunConfig load_config(const GlobalOptions& g, const ClassifyOptions* c = nullptr) {
  curio::RunConfig cfg;
  if (!g.config.empty()) curio::apply_config_file(cfg, g.config);
  if (g.seed_opt->count()) cfg.seed = g.seed;
  if (g.kb_opt->count()) cfg.kb_path = g.kb;
  if (g.out_opt->count()) cfg.out_dir = g.out;
  if (c) {
    if (c->alpha_opt->count()) cfg.params.weights.alpha = c->alpha;
    if (c->beta_opt->count()) cfg.params.weights.beta = c->beta;
    if (c->gamma_opt->count()) cfg.params.weights.gamma = c->gamma;
    if (c->coverage_opt->count()) cfg.params.occlusion_coverage_min = c->coverage_min;
    if (c->threshold_opt->count()) cfg.promotion_threshold = c->promotion_threshold;
    if (c->sc_mode_opt->count()) {
      const auto m = curio::parse_shape_constancy_mode(c->sc_mode);
      if (!m) throw curio::ConfigError("--sc-mode must be 'descriptor' or 'confidence'");
      cfg.params.sc_mode = *m;
    }
  }
  cfg.validate();
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

int run_generate(const GlobalOptions& g, const GenerateOptions& o) {
  const auto cfg = load_config(g);
  const fs::path out_dir = cfg.out_dir.value_or(".");

  std::vector<curio::ScenarioKind> kinds;
  if (o.kind == "all") {
    kinds.assign(curio::kAllScenarioKinds.begin(), curio::kAllScenarioKinds.end());
  } else if (auto k = curio::parse_scenario_kind(o.kind)) {
    kinds.push_back(*k);
  } else {
    std::cerr << "error: unknown --kind '" << o.kind << "'\n";
    return kExitIo;
  }
  std::vector<curio::ObjectClass> classes;
  if (o.object_class == "all") {
    classes.assign(curio::kScoredClasses.begin(), curio::kScoredClasses.end());
  } else if (auto c = curio::parse_object_class(o.object_class)) {
    classes.push_back(*c);
  } else {
    std::cerr << "error: unknown --class '" << o.object_class << "'\n";
    return kExitIo;
  }
  if (!o.occluder.empty() && o.occluder.size() != 4) {
    std::cerr << "error: --occluder takes x,y,w,h\n";
    return kExitIo;
  }
  if (o.count < 1) {
    std::cerr << "error: --count must be >= 1\n";
    return kExitIo;
  }

  std::vector<std::pair<fs::path, std::string>> files;
  std::vector<std::string> ids;
  for (auto kind : kinds) {
    for (auto cls : classes) {
      for (int i = 0; i < o.count; ++i) {
        curio::ScenarioSpec spec;
        spec.kind = kind;
        spec.object_class = cls;
        spec.frame_count = o.frames;
        spec.velocity = {o.vx, o.vy};
        spec.seed = cfg.seed + static_cast<std::uint64_t>(i);
        spec.noise_sigma = o.noise;
        spec.confidence = o.confidence;
        if (kinds.size() == 1 && classes.size() == 1 && o.count == 1) spec.event_id = o.event_id;
        if (o.occluder.size() == 4) {
          spec.occluder = curio::BBox{o.occluder[0], o.occluder[1], o.occluder[2], o.occluder[3]};
        } else if (kind == curio::ScenarioKind::PossibleOccluded && spec.frame_count >= 10) {
          spec.occluder = curio::default_occluder(spec);
        }
        const auto trace = curio::generate_event(spec);
        files.emplace_back(out_dir / (trace.event_id + ".jsonl"), curio::encode_trace(trace));
        ids.push_back(trace.event_id);
      }
    }
  }
  for (const auto& [path, text] : files) write_file(path, text);
  for (const auto& id : ids) std::cout << id << '\n';
  return kExitOk;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

int run_classify(const GlobalOptions& g, const ClassifyOptions& o) {
  const auto cfg = load_config(g, &o);
  const auto paths = expand_inputs(o.inputs);
  if (paths.empty()) return kExitOk;

  curio::KnowledgeBase kb(cfg.promotion_threshold);
  if (cfg.kb_path && fs::exists(*cfg.kb_path)) {
    kb = curio::load_kb_file(*cfg.kb_path);
    if (o.threshold_opt->count()) kb.set_promotion_threshold(cfg.promotion_threshold);
  }

  // Parse everything up front; unreadable files abort before the KB is touched.
  std::vector<curio::EventTrace> traces;
  std::vector<std::optional<std::string>> parse_errors;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) {
      std::cerr << "error: cannot read " << p.string() << '\n';
      return kExitIo;
    }
    try {
      traces.push_back(curio::parse_trace(in, cfg.params.scene));
      parse_errors.emplace_back();
    } catch (const std::exception& e) {
      curio::EventTrace placeholder;
      placeholder.event_id = p.stem().string();
      traces.push_back(std::move(placeholder));
      parse_errors.emplace_back(p.string() + ": " + e.what());
    }
  }

  std::vector<curio::EventTrace> good;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (!parse_errors[i]) good.push_back(traces[i]);
  }
  auto [outcomes, next_kb] = curio::process_stream(good, std::move(kb), cfg.params, o.workers);

  std::ostringstream report;
  bool any_error = false;
  for (std::size_t i = 0, k = 0; i < traces.size(); ++i) {
    curio::EventOutcome oc;
    if (parse_errors[i]) {
      oc.event_id = traces[i].event_id;
      oc.error = *parse_errors[i];
    } else {
      oc = outcomes[k++];
    }
    if (oc.error) {
      any_error = true;
      std::cerr << "error: " << oc.event_id << ": " << *oc.error << '\n';
    }
    report << curio::encode_outcome(oc) << '\n';
  }

  if (cfg.out_dir) {
    write_file(*cfg.out_dir / "verdicts.jsonl", report.str());
  } else {
    std::cout << report.str();
  }
  if (cfg.kb_path) curio::save_kb_file(next_kb, *cfg.kb_path);
  return any_error ? kExitPartial : kExitOk;
}

int run_plot(const GlobalOptions& g, const std::string& input) {
  const auto cfg = load_config(g);
  std::ifstream in(input);
  if (!in) {
    std::cerr << "error: cannot read " << input << '\n';
    return kExitIo;
  }
  const auto trace = curio::parse_trace(in, cfg.params.scene);
  const auto tracks = curio::track_event(trace, cfg.params.tracker);
  const auto discs = curio::detect_discontinuities(tracks, cfg.params.tracker);
  const fs::path out_dir = cfg.out_dir.value_or(".");

  for (const auto& t : tracks) {
    if (t.occluder) continue;
    std::ostringstream csv;
    curio::write_track_csv(csv, t);
    const auto path = out_dir / (trace.event_id + ".track" + std::to_string(t.track_id) + ".csv");
    write_file(path, csv.str());
    std::cout << path.string() << '\n';
  }
  const auto svg_path = out_dir / (trace.event_id + ".svg");
  write_file(svg_path, curio::render_svg(trace.event_id, tracks, discs));
  std::cout << svg_path.string() << '\n';
  return kExitOk;
}

fs::path require_kb_path(const curio::RunConfig& cfg) {
  if (!cfg.kb_path) throw curio::ConfigError("--kb is required");
  return *cfg.kb_path;
}

int run_kb_show(const GlobalOptions& g) {
  const auto cfg = load_config(g);
  const auto path = require_kb_path(cfg);
  if (!fs::exists(path)) {
    std::cerr << "error: knowledge base " << path.string() << " does not exist\n";
    return kExitIo;
  }
  const auto kb = curio::load_kb_file(path);
  const auto stats = kb.all_stats();
  std::cout << stats.size() << " classes, " << kb.exceptions().size() << " exceptions\n";
  std::cout << "promotion_threshold " << kb.promotion_threshold() << '\n';
  for (const auto& s : stats) {
    std::cout << "class " << curio::to_string(s.object_class) << " mean " << s.mean << " count " << s.count << '\n';
  }
  for (const auto& e : kb.exceptions()) {
    std::cout << "exception [";
    for (std::size_t i = 0; i < e.signature.violation_kinds.size(); ++i) {
      std::cout << (i ? "," : "") << curio::to_string(e.signature.violation_kinds[i]);
    }
    std::cout << "] occluder=" << (e.signature.occluder_present ? "yes" : "no")
              << " agent=" << curio::to_string(e.signature.verdict_agent)
              << " ground_truth=" << (e.signature.ground_truth_possible ? "possible" : "impossible")
              << " occurrences=" << e.occurrences << (e.promoted ? " promoted" : "") << '\n';
  }
  return kExitOk;
}

int run_kb_reset(const GlobalOptions& g) {
  const auto cfg = load_config(g);
  curio::save_kb_file(curio::KnowledgeBase(cfg.promotion_threshold), require_kb_path(cfg));
  return kExitOk;
}

int run_kb_threshold(const GlobalOptions& g, int threshold) {
  const auto cfg = load_config(g);
  const auto path = require_kb_path(cfg);
  auto kb = fs::exists(path) ? curio::load_kb_file(path) : curio::KnowledgeBase(cfg.promotion_threshold);
  kb.set_promotion_threshold(threshold);
  curio::save_kb_file(kb, path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curiosity-driven intuitive physics: event tracking, body-budget scores, Z-number inference"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  g.seed_opt = app.add_option("--seed", g.seed, "Seed for all randomness");
  g.kb_opt = app.add_option("--kb", g.kb, "Knowledge base file");
  g.out_opt = app.add_option("--out", g.out, "Output directory");

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write synthetic event traces");
  generate->add_option("--kind", gen.kind, "Scenario kind, or 'all'");
  generate->add_option("--class", gen.object_class, "sphere | cone | cube | all");
  generate->add_option("--frames", gen.frames, "Frame count (>= 10)");
  generate->add_option("--vx", gen.vx, "Velocity x, px/frame");
  generate->add_option("--vy", gen.vy, "Velocity y, px/frame");
  generate->add_option("--noise", gen.noise, "Gaussian center jitter sigma, px");
  generate->add_option("--confidence", gen.confidence, "Detector confidence of the object");
  generate->add_option("--occluder", gen.occluder, "Wall box x,y,w,h")->delimiter(',')->expected(4);
  generate->add_option("--event-id", gen.event_id, "Event id (single event only)");
  generate->add_option("--count", gen.count, "Events per kind/class, seeds seed..seed+count-1");

  ClassifyOptions cls;
  auto* classify = app.add_subcommand("classify", "Classify traces and update the knowledge base");
  classify->add_option("inputs", cls.inputs, "Trace files or directories of *.jsonl");
  cls.alpha_opt = classify->add_option("--alpha", cls.alpha, "Weight of object permanence");
  cls.beta_opt = classify->add_option("--beta", cls.beta, "Weight of shape constancy");
  cls.gamma_opt = classify->add_option("--gamma", cls.gamma, "Weight of spatial-temporal continuity");
  cls.coverage_opt = classify->add_option("--coverage-min", cls.coverage_min, "Occluder coverage needed to explain a gap");
  cls.threshold_opt = classify->add_option("--promotion-threshold", cls.promotion_threshold, "Repeats before an exception becomes a rule");
  cls.sc_mode_opt = classify->add_option("--sc-mode", cls.sc_mode, "descriptor | confidence");
  classify->add_option("--workers", cls.workers, "Analysis threads");

  std::string plot_input;
  auto* plot = app.add_subcommand("plot", "Write per-track CSV series and an SVG plot");
  plot->add_option("input", plot_input, "Trace file")->required();

  auto* kb = app.add_subcommand("kb", "Inspect or edit the knowledge base");
  kb->require_subcommand(1);
  auto* kb_show = kb->add_subcommand("show", "Print statistics and exceptions");
  auto* kb_reset = kb->add_subcommand("reset", "Write an empty knowledge base");
  int threshold = 3;
  auto* kb_threshold = kb->add_subcommand("promote-threshold", "Set the exception promotion threshold");
  kb_threshold->add_option("n", threshold, "Threshold (>= 1)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitIo;
  }

  try {
    if (*generate) return run_generate(g, gen);
    if (*classify) return run_classify(g, cls);
    if (*plot) return run_plot(g, plot_input);
    if (*kb_show) return run_kb_show(g);
    if (*kb_reset) return run_kb_reset(g);
    if (*kb_threshold) return run_kb_threshold(g, threshold);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitIo;
}
