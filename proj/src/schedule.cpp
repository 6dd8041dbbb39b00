#include "cadence/schedule.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cadence/error.hpp"

namespace cadence {

using nlohmann::json;

std::string_view to_string(GuidanceMode m) {
  return m == GuidanceMode::kSegmentLocked ? "segment_locked" : "alternating";
}

std::optional<GuidanceMode> guidance_mode_from_string(std::string_view s) {
  if (s == "segment_locked" || s == "segment-locked") return GuidanceMode::kSegmentLocked;
  if (s == "alternating") return GuidanceMode::kAlternating;
  return std::nullopt;
}

std::string to_string(const BlendScope& s) {
  switch (s.kind) {
    case BlendScope::Kind::kFullSegment:
      return "full";
    case BlendScope::Kind::kNone:
      return "none";
    case BlendScope::Kind::kFirstFrames:
      return "first:" + std::to_string(s.frames);
  }
  return "full";
}

std::optional<BlendScope> blend_scope_from_string(std::string_view s) {
  if (s == "full") return BlendScope::full();
  if (s == "none") return BlendScope::none();
  if (s.starts_with("first:")) {
    const auto digits = s.substr(6);
    int k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || k < 1) return std::nullopt;
    return BlendScope::first(k);
  }
  return std::nullopt;
}

std::string lyric_embedding_id(std::string_view lyric) { return "lyric:" + std::string(lyric); }

std::string audio_embedding_id(std::size_t segment_index) {
  return "audio:" + std::to_string(segment_index);
}

void normalize_intensities(SegmentList& segments) {
  if (segments.empty()) return;
  const auto [lo, hi] = std::minmax_element(
      segments.begin(), segments.end(),
      [](const Segment& a, const Segment& b) { return a.mean_intensity_db < b.mean_intensity_db; });
  const double min = lo->mean_intensity_db;
  const double range = hi->mean_intensity_db - min;
  for (auto& s : segments) {
    s.normalized_intensity = range > 0.0 ? (s.mean_intensity_db - min) / range : 0.5;
  }
}

int allocate_frames(const Segment& segment, double fps_min, double fps_max) {
  if (!(fps_min > 0.0)) throw ConfigError("fps_min must be positive");
  if (!(fps_min <= fps_max)) throw ConfigError("fps_min must not exceed fps_max");
  const double fps = fps_min + segment.normalized_intensity * (fps_max - fps_min);
  const auto frames = std::llround(fps * segment.duration_s());
  return static_cast<int>(std::max<long long>(1, frames));
}

const std::string& SegmentGuidance::frame_id(GuidanceMode mode, int k) const {
  if (!text_id) return audio_id;
  if (mode == GuidanceMode::kSegmentLocked) return *text_id;
  return k % 2 == 0 ? audio_id : *text_id;
}

std::vector<SegmentGuidance> assign_guidance(SegmentList& segments,
                                             const std::vector<std::optional<std::string>>& lyrics,
                                             const std::vector<std::string>& audio_ids) {
  if (lyrics.size() != segments.size()) {
    throw CompileError("lyric map covers " + std::to_string(lyrics.size()) + " segments, track has " +
                       std::to_string(segments.size()));
  }
  std::vector<SegmentGuidance> out(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i >= audio_ids.size() || audio_ids[i].empty()) {
      throw CompileError("segment " + std::to_string(i) + " has no audio embedding");
    }
    out[i].audio_id = audio_ids[i];
    if (lyrics[i]) out[i].text_id = lyric_embedding_id(*lyrics[i]);
    segments[i].guidance_id = out[i].locked_id();
  }
  return out;
}

Plan expand_plan(const SegmentList& segments, const std::vector<SegmentGuidance>& guidance,
                 const PlanMeta& meta) {
  if (guidance.size() != segments.size()) throw CompileError("guidance does not cover every segment");
  Plan plan;
  plan.meta = meta;
  std::size_t frame = 0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (seg.frame_count < 1) throw CompileError("segment " + std::to_string(s) + " has no frames");
    const double step = seg.duration_s() / seg.frame_count;
    for (int k = 0; k < seg.frame_count; ++k) {
      PlanEntry e;
      e.frame_index = frame++;
      e.time_s = seg.start_s + k * step;
      e.segment_index = s;
      e.guidance.push_back({guidance[s].frame_id(meta.guidance_mode, k), 1.0});
      plan.entries.push_back(std::move(e));
    }
  }
  return plan;
}

Plan apply_transition_blend(Plan plan, const BlendScope& scope) {
  plan.meta.blend_scope = scope;
  if (scope.kind == BlendScope::Kind::kNone) return plan;

  auto& entries = plan.entries;
  std::size_t i = 0;
  std::optional<std::string> prev_id;  // own guidance of the previous segment's last frame
  while (i < entries.size()) {
    const std::size_t seg = entries[i].segment_index;
    std::size_t end = i;
    while (end < entries.size() && entries[end].segment_index == seg) ++end;
    const std::string last_own = entries[end - 1].guidance.front().id;

    if (prev_id) {
      const std::size_t limit =
          scope.kind == BlendScope::Kind::kFirstFrames ? std::min(end, i + static_cast<std::size_t>(scope.frames)) : end;
      for (std::size_t f = i; f < limit; ++f) {
        auto& e = entries[f];
        const std::string own = e.guidance.front().id;
        if (own == *prev_id) continue;
        e.guidance = {{*prev_id, 0.5}, {own, 0.5}};
        e.transition_flag = true;
      }
    }
    prev_id = last_own;
    i = end;
  }
  return plan;
}

std::string to_string(const PlanViolation& v) {
  if (v.frame_index) return "frame " + std::to_string(*v.frame_index) + ": " + v.message;
  return v.message;
}

std::vector<PlanViolation> validate_plan(const Plan& plan, const EmbeddingStore& store) {
  std::vector<PlanViolation> out;
  const auto& m = plan.meta;
  if (m.schema_version != kPlanSchemaVersion) {
    out.push_back({std::nullopt, "unsupported schema version '" + m.schema_version + "'"});
  }
  if (!(m.duration_s > 0.0) || !std::isfinite(m.duration_s)) {
    out.push_back({std::nullopt, "duration must be positive and finite"});
  }
  if (!(m.fps_min > 0.0 && m.fps_min <= m.fps_max)) {
    out.push_back({std::nullopt, "fps bounds must satisfy 0 < fps_min <= fps_max"});
  }

  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    const auto& e = plan.entries[i];
    const auto at = std::optional<std::size_t>(i);
    if (e.frame_index != i) {
      out.push_back({at, "frame_index " + std::to_string(e.frame_index) + " out of order"});
    }
    if (!std::isfinite(e.time_s) || e.time_s < 0.0 || e.time_s > m.duration_s) {
      out.push_back({at, "timestamp outside [0, duration]"});
    }
    if (i > 0) {
      const auto& prev = plan.entries[i - 1];
      if (e.time_s < prev.time_s) out.push_back({at, "timestamp decreases"});
      if (e.segment_index < prev.segment_index) out.push_back({at, "segment index decreases"});
      if (e.segment_index > prev.segment_index + 1) out.push_back({at, "segment index skips a segment"});
    } else if (e.segment_index != 0) {
      out.push_back({at, "first entry must belong to segment 0"});
    }

    if (e.guidance.empty()) {
      out.push_back({at, "entry has no guidance"});
      continue;
    }
    double sum = 0.0;
    std::set<std::string> seen;
    for (const auto& g : e.guidance) {
      if (!(g.weight > 0.0) || !std::isfinite(g.weight)) {
        out.push_back({at, "non-positive weight for '" + g.id + "'"});
      }
      sum += g.weight;
      if (!seen.insert(g.id).second) out.push_back({at, "guidance id '" + g.id + "' repeated"});
      if (!store.contains(g.id)) out.push_back({at, "guidance id '" + g.id + "' not in embedding store"});
    }
    if (std::abs(sum - 1.0) > 1e-9) out.push_back({at, "guidance weights do not sum to 1"});
  }
  return out;
}

std::string plan_to_json(const Plan& plan) {
  const auto& m = plan.meta;
  json meta = {{"schema_version", m.schema_version},
               {"audio_source", m.audio_source},
               {"duration_s", m.duration_s},
               {"fps_min", m.fps_min},
               {"fps_max", m.fps_max},
               {"guidance_mode", to_string(m.guidance_mode)},
               {"blend_scope", to_string(m.blend_scope)},
               {"seed", m.seed}};
  json entries = json::array();
  for (const auto& e : plan.entries) {
    json guidance = json::array();
    for (const auto& g : e.guidance) guidance.push_back({{"id", g.id}, {"weight", g.weight}});
    entries.push_back({{"frame_index", e.frame_index},
                       {"time_s", e.time_s},
                       {"guidance", std::move(guidance)},
                       {"segment_index", e.segment_index},
                       {"transition_flag", e.transition_flag}});
  }
  json doc = {{"meta", std::move(meta)}, {"entries", std::move(entries)}};
  return doc.dump(1) + "\n";
}

Plan plan_from_json(std::string_view json_text) {
  Plan plan;
  try {
    const json doc = json::parse(json_text);
    const auto& meta = doc.at("meta");
    auto& m = plan.meta;
    m.schema_version = meta.at("schema_version").get<std::string>();
    m.audio_source = meta.value("audio_source", std::string());
    m.duration_s = meta.at("duration_s").get<double>();
    m.fps_min = meta.at("fps_min").get<double>();
    m.fps_max = meta.at("fps_max").get<double>();
    const auto mode_name = meta.at("guidance_mode").get<std::string>();
    const auto mode = guidance_mode_from_string(mode_name);
    if (!mode) throw ArgumentError("unknown guidance mode '" + mode_name + "'");
    m.guidance_mode = *mode;
    const auto scope_name = meta.value("blend_scope", std::string("full"));
    const auto scope = blend_scope_from_string(scope_name);
    if (!scope) throw ArgumentError("unknown blend scope '" + scope_name + "'");
    m.blend_scope = *scope;
    m.seed = meta.at("seed").get<std::uint64_t>();

    for (const auto& item : doc.at("entries")) {
      PlanEntry e;
      e.frame_index = item.at("frame_index").get<std::size_t>();
      e.time_s = item.at("time_s").get<double>();
      e.segment_index = item.at("segment_index").get<std::size_t>();
      e.transition_flag = item.at("transition_flag").get<bool>();
      for (const auto& g : item.at("guidance")) {
        e.guidance.push_back({g.at("id").get<std::string>(), g.at("weight").get<double>()});
      }
      plan.entries.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw ArgumentError(std::string("malformed plan: ") + ex.what());
  }
  return plan;
}

Plan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open plan " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return plan_from_json(ss.str());
}

void save_plan(const std::filesystem::path& path, const Plan& plan) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << plan_to_json(plan);
}

std::size_t plan_segment_count(const Plan& plan) {
  std::size_t n = 0;
  for (const auto& e : plan.entries) n = std::max(n, e.segment_index + 1);
  return n;
}

}  // namespace cadence
