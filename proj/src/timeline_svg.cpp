#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "cadence/pipeline.hpp"

namespace cadence {

namespace {

constexpr double kWidth = 1200.0;
constexpr double kHeight = 260.0;
constexpr double kLeft = 50.0;
constexpr double kRight = 20.0;
constexpr double kPlotWidth = kWidth - kLeft - kRight;
constexpr double kAxisY = 220.0;
constexpr double kBarTop = 40.0;
constexpr double kBarBottom = 160.0;
constexpr double kFrameTop = 172.0;
constexpr double kFrameHeight = 30.0;

constexpr const char* kAudioColor = "#3b7dd8";
constexpr const char* kTextColor = "#e0852b";
constexpr const char* kBlendColor = "#8e44ad";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(std::string_view s) {
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

Modality modality_of(const std::string& id, const EmbeddingStore* store) {
  if (store) {
    if (const auto* e = store->find(id)) return e->modality;
  }
  return id.starts_with("lyric:") ? Modality::kText : Modality::kAudio;
}

const char* color_of(Modality m) {
  switch (m) {
    case Modality::kText: return kTextColor;
    case Modality::kBlend: return kBlendColor;
    case Modality::kAudio: break;
  }
  return kAudioColor;
}

struct SegmentSpan {
  double start = 0.0;
  double end = 0.0;
  std::size_t frames = 0;
  std::string lyric;
};

std::vector<SegmentSpan> segment_spans(const Plan& plan, const EmbeddingStore* store) {
  std::vector<SegmentSpan> spans;
  for (const auto& e : plan.entries) {
    if (spans.empty() || e.segment_index != spans.size() - 1) {
      if (!spans.empty()) spans.back().end = e.time_s;
      spans.push_back({e.time_s, plan.meta.duration_s, 0, {}});
    }
    auto& span = spans.back();
    ++span.frames;
    if (span.lyric.empty()) {
      for (const auto& g : e.guidance) {
        if (modality_of(g.id, store) == Modality::kText) {
          span.lyric = g.id.starts_with("lyric:") ? g.id.substr(6) : g.id;
          break;
        }
      }
    }
  }
  return spans;
}

}  // namespace

std::string render_timeline_svg(const Plan& plan, const EmbeddingStore* store) {
  const double duration = plan.meta.duration_s > 0.0 ? plan.meta.duration_s : 1.0;
  const auto x = [&](double t) { return kLeft + std::clamp(t / duration, 0.0, 1.0) * kPlotWidth; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  // Time axis with ticks at a 1/2/5 step giving roughly ten labels.
  svg += "<g class=\"axis\" stroke=\"#333\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kAxisY) + "\" x2=\"" + num(kLeft + kPlotWidth) +
         "\" y2=\"" + num(kAxisY) + "\"/>\n";
  const double raw = duration / 10.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double tick = raw / mag < 2.0 ? mag : raw / mag < 5.0 ? 2.0 * mag : 5.0 * mag;
  for (int i = 0; i * tick <= duration + 1e-9; ++i) {
    const double t = i * tick;
    svg += "<line x1=\"" + num(x(t)) + "\" y1=\"" + num(kAxisY) + "\" x2=\"" + num(x(t)) + "\" y2=\"" +
           num(kAxisY + 5) + "\"/>";
    svg += "<text x=\"" + num(x(t)) + "\" y=\"" + num(kAxisY + 17) + "\" text-anchor=\"middle\" stroke=\"none\">" +
           num(t) + "s</text>\n";
  }
  svg += "</g>\n";

  const auto spans = segment_spans(plan, store);
  const double fps_scale = std::max(plan.meta.fps_max, 1e-9);

  svg += "<g class=\"density\">\n";
  for (const auto& s : spans) {
    const double fps = s.end > s.start ? static_cast<double>(s.frames) / (s.end - s.start) : 0.0;
    const double h = std::min(1.0, fps / fps_scale) * (kBarBottom - kBarTop);
    svg += "<rect class=\"density-bar\" x=\"" + num(x(s.start)) + "\" y=\"" + num(kBarBottom - h) +
           "\" width=\"" + num(std::max(0.0, x(s.end) - x(s.start))) + "\" height=\"" + num(h) +
           "\" fill=\"#cfd8e3\"/>\n";
  }
  svg += "</g>\n";

  svg += "<g class=\"frames\">\n";
  for (const auto& e : plan.entries) {
    Modality m = Modality::kBlend;
    if (!e.transition_flag && !e.guidance.empty()) m = modality_of(e.guidance.front().id, store);
    svg += "<rect class=\"frame frame-" + std::string(to_string(m)) + "\" x=\"" + num(x(e.time_s)) + "\" y=\"" +
           num(kFrameTop) + "\" width=\"1.50\" height=\"" + num(kFrameHeight) + "\" fill=\"" + color_of(m) +
           "\"/>\n";
  }
  svg += "</g>\n";

  svg += "<g class=\"boundaries\" stroke=\"#555\" stroke-width=\"0.6\">\n";
  for (std::size_t i = 0; i <= spans.size() && !spans.empty(); ++i) {
    const double t = i < spans.size() ? spans[i].start : spans.back().end;
    svg += "<line class=\"boundary\" x1=\"" + num(x(t)) + "\" y1=\"" + num(kBarTop - 10) + "\" x2=\"" +
           num(x(t)) + "\" y2=\"" + num(kFrameTop + kFrameHeight) + "\"/>\n";
  }
  svg += "</g>\n";

  svg += "<g class=\"lyrics\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + std::string(kTextColor) +
         "\">\n";
  for (const auto& s : spans) {
    if (s.lyric.empty()) continue;
    svg += "<text class=\"lyric\" x=\"" + num(x(s.start) + 2) + "\" y=\"" + num(kBarTop - 14) + "\">" +
           escape_xml(s.lyric) + "</text>\n";
  }
  svg += "</g>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace cadence
