#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "curio/curiosity.hpp"

namespace curio {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every tunable of a run. Built from defaults, then a config file, then flags.
struct RunConfig {
  CuriosityParams params;
  int promotion_threshold = 3;
  std::optional<std::filesystem::path> kb_path;
  std::optional<std::filesystem::path> input;
  std::optional<std::filesystem::path> out_dir;
  std::uint64_t seed = 0;

  std::vector<std::string> problems() const {
    std::vector<std::string> out;
    if (!params.weights.valid()) out.emplace_back("weights must lie in [0,1]");
    if (params.occluder_weights && !params.occluder_weights->valid()) {
      out.emplace_back("occluder_weights must lie in [0,1]");
    }
    const auto& t = params.tracker;
    if (!(t.assoc_gate > 0)) out.emplace_back("assoc_gate must be > 0");
    if (!(t.jump_gate > 0)) out.emplace_back("jump_gate must be > 0");
    if (!(t.filter.q > 0)) out.emplace_back("q must be > 0");
    if (!(t.filter.r > 0)) out.emplace_back("r must be > 0");
    if (!(t.filter.p0 > 0)) out.emplace_back("p0 must be > 0");
    if (t.shape_switch_min_frames < 1) out.emplace_back("shape_switch_min_frames must be >= 1");
    if (!(params.occlusion_coverage_min > 0 && params.occlusion_coverage_min <= 1)) {
      out.emplace_back("occlusion_coverage_min must lie in (0,1]");
    }
    if (promotion_threshold < 1) out.emplace_back("promotion_threshold must be >= 1");
    return out;
  }

  void validate() const {
    if (auto p = problems(); !p.empty()) {
      std::string msg = "invalid configuration";
      for (const auto& s : p) msg += "; " + s;
      throw ConfigError(msg);
    }
  }
};

namespace detail {

inline WeightConfig weights_from_json(const nlohmann::json& j, WeightConfig w) {
  w.alpha = j.value("alpha", w.alpha);
  w.beta = j.value("beta", w.beta);
  w.gamma = j.value("gamma", w.gamma);
  return w;
}

}  // namespace detail

// Overlays the fields present in `j` onto `cfg`. Unknown fields are ignored.
inline void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto& p = cfg.params;
    if (j.contains("weights")) p.weights = detail::weights_from_json(j.at("weights"), p.weights);
    if (j.contains("occluder_weights")) {
      p.occluder_weights = detail::weights_from_json(j.at("occluder_weights"), p.weights);
    }
    p.tracker.assoc_gate = j.value("assoc_gate", p.tracker.assoc_gate);
    p.tracker.jump_gate = j.value("jump_gate", p.tracker.jump_gate);
    p.tracker.filter.q = j.value("q", p.tracker.filter.q);
    p.tracker.filter.r = j.value("r", p.tracker.filter.r);
    p.tracker.filter.p0 = j.value("p0", p.tracker.filter.p0);
    p.tracker.shape_switch_min_frames = j.value("shape_switch_min_frames", p.tracker.shape_switch_min_frames);
    p.occlusion_coverage_min = j.value("occlusion_coverage_min", p.occlusion_coverage_min);
    p.occluder_margin = j.value("occluder_margin", p.occluder_margin);
    cfg.promotion_threshold = j.value("promotion_threshold", cfg.promotion_threshold);
    if (j.contains("impact_values")) {
      for (const auto& [name, value] : j.at("impact_values").items()) {
        const auto c = parse_object_class(name);
        if (!c) throw ConfigError("unknown class '" + name + "' in impact_values");
        p.impacts.set(*c, value.get<double>());
      }
    }
    if (j.contains("s_sc_mode")) {
      const auto m = parse_shape_constancy_mode(j.at("s_sc_mode").get<std::string>());
      if (!m) throw ConfigError("s_sc_mode must be 'descriptor' or 'confidence'");
      p.sc_mode = *m;
    }
    if (j.contains("kb")) cfg.kb_path = j.at("kb").get<std::string>();
    if (j.contains("input")) cfg.input = j.at("input").get<std::string>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
}

inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("bad config " + path.string() + ": " + e.what());
  }
  apply_config_json(cfg, j);
}

}  // namespace curio
