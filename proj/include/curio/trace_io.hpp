#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "curio/trace_model.hpp"

namespace curio {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline ObjectClass class_from_json(const nlohmann::json& j) {
  auto c = parse_object_class(j.get<std::string>());
  if (!c) throw std::invalid_argument("unknown class '" + j.get<std::string>() + "'");
  return *c;
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& gt) {
  nlohmann::json classes = nlohmann::json::array();
  for (auto c : gt.object_classes) classes.push_back(std::string(to_string(c)));
  return {{"possible", gt.possible}, {"object_classes", std::move(classes)}};
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  GroundTruth gt;
  gt.possible = j.at("possible").get<bool>();
  for (const auto& c : j.at("object_classes")) gt.object_classes.push_back(class_from_json(c));
  return gt;
}

inline nlohmann::json detection_to_json(const Detection& d) {
  return {{"class", std::string(to_string(d.object_class))},
          {"confidence", d.confidence},
          {"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}},
          {"shape_descriptor", d.shape_descriptor}};
}

inline Detection detection_from_json(const nlohmann::json& j, const SceneBounds& scene) {
  Detection d;
  d.object_class = class_from_json(j.at("class"));
  d.confidence = j.at("confidence").get<double>();
  const auto& b = j.at("bbox");
  if (!b.is_array() || b.size() != 4) throw std::invalid_argument("bbox must be [x,y,w,h]");
  d.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
  if (auto it = j.find("shape_descriptor"); it != j.end() && !it->is_null()) {
    d.shape_descriptor = it->get<std::vector<double>>();
  } else if (d.bbox.h > 0.0) {
    d.shape_descriptor = default_shape_descriptor(d.bbox, scene);
  }
  return d;
}

}  // namespace detail

inline std::string encode_header(const EventTrace& trace) {
  nlohmann::json h = {{"event_id", trace.event_id}, {"frame_count", trace.frame_count}};
  if (trace.ground_truth) h["ground_truth"] = detail::ground_truth_to_json(*trace.ground_truth);
  return h.dump();
}

inline std::string encode_frame(const FrameRecord& frame) {
  nlohmann::json dets = nlohmann::json::array();
  for (const auto& d : frame.detections) dets.push_back(detail::detection_to_json(d));
  nlohmann::json f = {{"frame_index", frame.frame_index}, {"detections", std::move(dets)}};
  return f.dump();
}

inline void write_trace(std::ostream& os, const EventTrace& trace) {
  os << encode_header(trace) << '\n';
  for (const auto& f : trace.frames) os << encode_frame(f) << '\n';
}

inline std::string encode_trace(const EventTrace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

// Reads one trace: a header line followed by one line per frame. Blank lines
// are skipped. Throws ParseError for malformed records and ValidationError
// when the decoded trace breaks an invariant.
inline EventTrace parse_trace(std::istream& is, const SceneBounds& scene = {}) {
  EventTrace trace;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record is not an object");
    try {
      if (!have_header) {
        trace.event_id = j.at("event_id").get<std::string>();
        trace.frame_count = j.at("frame_count").get<std::int64_t>();
        if (auto it = j.find("ground_truth"); it != j.end() && !it->is_null()) {
          trace.ground_truth = detail::ground_truth_from_json(*it);
        }
        have_header = true;
        continue;
      }
      FrameRecord f;
      f.frame_index = j.at("frame_index").get<std::int64_t>();
      for (const auto& d : j.at("detections")) f.detections.push_back(detail::detection_from_json(d, scene));
      trace.frames.push_back(std::move(f));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!have_header) throw ParseError(line_no, "missing header record");

  if (auto v = validate_trace(trace); !v.empty()) throw ValidationError(std::move(v));
  return trace;
}

inline EventTrace decode_trace(const std::string& text, const SceneBounds& scene = {}) {
  std::istringstream is(text);
  return parse_trace(is, scene);
}

}  // namespace curio
