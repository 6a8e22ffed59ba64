#pragma once

#include <algorithm>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "curio/tracker.hpp"

namespace curio {

inline std::string class_color(ObjectClass c) {
  switch (c) {
    case ObjectClass::Sphere: return "#1f77b4";
    case ObjectClass::Cone: return "#ff7f0e";
    case ObjectClass::Cube: return "#2ca02c";
    case ObjectClass::Wall: return "#8c564b";
    case ObjectClass::Unknown: return "#7f7f7f";
  }
  return "#000000";
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct PlotStyle {
  double width = 800.0;
  double height = 400.0;
  double margin = 50.0;
};

// Horizontal object position against frame index: solid observed path, dashed
// predicted path, one series pair per object track, shaded discontinuity spans.
inline std::string render_svg(const std::string& title, const std::vector<Track>& tracks,
                              const std::vector<Discontinuity>& discs, const PlotStyle& style = {}) {
  std::size_t n = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& t : tracks) {
    if (t.occluder) continue;
    n = std::max(n, t.samples.size());
    for (const auto& s : t.samples) {
      if (s.observed) lo = std::min(lo, s.observed->x), hi = std::max(hi, s.observed->x);
      if (s.predicted) lo = std::min(lo, s.predicted->x), hi = std::max(hi, s.predicted->x);
    }
  }
  if (!(lo <= hi)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-9) lo -= 1.0, hi += 1.0;

  const double plot_w = style.width - 2 * style.margin;
  const double plot_h = style.height - 2 * style.margin;
  const double frames = n > 1 ? static_cast<double>(n - 1) : 1.0;
  auto sx = [&](double frame) { return style.margin + plot_w * frame / frames; };
  auto sy = [&](double v) { return style.margin + plot_h * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << style.height
     << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
  os << "<title>" << xml_escape(title) << "</title>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height
     << "\" fill=\"white\"/>\n";

  const double slot = plot_w / (frames + 1.0);
  for (const auto& d : discs) {
    const double x0 = n > 1 ? sx(static_cast<double>(d.start)) - slot / 2 : style.margin;
    const double x1 = n > 1 ? sx(static_cast<double>(d.end)) + slot / 2 : style.margin + plot_w;
    os << "<rect class=\"discontinuity\" data-kind=\"" << to_string(d.kind) << "\" data-track=\"" << d.track_id
       << "\" data-start=\"" << d.start << "\" data-end=\"" << d.end << "\" x=\"" << x0 << "\" y=\""
       << style.margin << "\" width=\"" << (x1 - x0) << "\" height=\"" << plot_h
       << "\" fill=\"#d62728\" fill-opacity=\"0.15\"/>\n";
  }

  os << "<line x1=\"" << style.margin << "\" y1=\"" << style.margin + plot_h << "\" x2=\"" << style.margin + plot_w
     << "\" y2=\"" << style.margin + plot_h << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << style.margin << "\" y1=\"" << style.margin << "\" x2=\"" << style.margin
     << "\" y2=\"" << style.margin + plot_h << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << style.margin + plot_w / 2 << "\" y=\"" << style.height - 10
     << "\" text-anchor=\"middle\" font-size=\"12\">frame</text>\n";
  os << "<text x=\"12\" y=\"" << style.margin + plot_h / 2
     << "\" font-size=\"12\" transform=\"rotate(-90 12 " << style.margin + plot_h / 2
     << ")\" text-anchor=\"middle\">x (px)</text>\n";

  auto emit_series = [&](const Track& t, bool predicted) {
    const std::string color = class_color(t.resolved_class());
    const std::string kind = predicted ? "predicted" : "observed";
    os << "<g class=\"series " << kind << "\" data-track=\"" << t.track_id << "\" data-class=\""
       << to_string(t.resolved_class()) << "\">\n";
    std::vector<std::pair<double, double>> run;
    auto flush = [&] {
      if (run.size() == 1) {
        os << "<circle cx=\"" << run[0].first << "\" cy=\"" << run[0].second << "\" r=\"3\" fill=\"" << color
           << "\"/>\n";
      } else if (run.size() > 1) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
        if (predicted) os << " stroke-dasharray=\"6 4\"";
        os << " points=\"";
        for (std::size_t i = 0; i < run.size(); ++i) os << (i ? " " : "") << run[i].first << ',' << run[i].second;
        os << "\"/>\n";
      }
      run.clear();
    };
    for (std::size_t f = 0; f < t.samples.size(); ++f) {
      const auto& p = predicted ? t.samples[f].predicted : t.samples[f].observed;
      if (p) {
        run.emplace_back(sx(static_cast<double>(f)), sy(p->x));
      } else {
        flush();
      }
    }
    flush();
    os << "</g>\n";
  };
  for (const auto& t : tracks) {
    if (t.occluder) continue;
    emit_series(t, false);
    emit_series(t, true);
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace curio
