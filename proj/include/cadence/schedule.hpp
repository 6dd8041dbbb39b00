#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cadence/embed.hpp"
#include "cadence/segment.hpp"

namespace cadence {

inline constexpr std::string_view kPlanSchemaVersion = "1";

enum class GuidanceMode { kSegmentLocked, kAlternating };

std::string_view to_string(GuidanceMode m);
std::optional<GuidanceMode> guidance_mode_from_string(std::string_view s);

/// Which frames of a transitioned segment receive the averaged guidance.
struct BlendScope {
  enum class Kind { kFullSegment, kFirstFrames, kNone };
  Kind kind = Kind::kFullSegment;
  int frames = 0;  // used by kFirstFrames

  static BlendScope full() { return {Kind::kFullSegment, 0}; }
  static BlendScope first(int k) { return {Kind::kFirstFrames, k}; }
  static BlendScope none() { return {Kind::kNone, 0}; }
};

/// "full", "none" or "first:K".
std::string to_string(const BlendScope& s);
std::optional<BlendScope> blend_scope_from_string(std::string_view s);

struct GuidanceTerm {
  std::string id;
  double weight = 1.0;

  bool operator==(const GuidanceTerm&) const = default;
};

struct PlanEntry {
  std::size_t frame_index = 0;
  double time_s = 0.0;
  std::vector<GuidanceTerm> guidance;
  std::size_t segment_index = 0;
  bool transition_flag = false;

  bool operator==(const PlanEntry&) const = default;
};

struct PlanMeta {
  std::string schema_version{kPlanSchemaVersion};
  std::string audio_source;
  double duration_s = 0.0;
  double fps_min = 1.0;
  double fps_max = 10.0;
  GuidanceMode guidance_mode = GuidanceMode::kSegmentLocked;
  BlendScope blend_scope = BlendScope::full();
  std::uint64_t seed = 0;
};

struct Plan {
  PlanMeta meta;
  std::vector<PlanEntry> entries;
};

/// Embedding id under which the text guidance for a lyric is stored.
std::string lyric_embedding_id(std::string_view lyric);
/// Embedding id of segment i's audio guidance.
std::string audio_embedding_id(std::size_t segment_index);

/// Per-track min-max: (x - min) / (max - min); all 0.5 when max == min.
void normalize_intensities(SegmentList& segments);

/// max(1, round(fps * duration)) with fps = fps_min + intensity * (fps_max - fps_min).
/// Throws ConfigError unless 0 < fps_min <= fps_max.
int allocate_frames(const Segment& segment, double fps_min, double fps_max);

/// Resolved guidance of one segment.
struct SegmentGuidance {
  std::string audio_id;
  std::optional<std::string> text_id;

  /// Guidance id of the k-th frame of the segment under `mode`.
  const std::string& frame_id(GuidanceMode mode, int k) const;
  /// Id used in segment-locked mode: the text if present, else the audio.
  const std::string& locked_id() const { return text_id ? *text_id : audio_id; }
};

/// Pairs each segment with its audio id and, when it carries a lyric, the
/// lyric's text embedding id. Sets Segment::guidance_id to the locked id.
/// Throws CompileError when a segment has no audio embedding id.
std::vector<SegmentGuidance> assign_guidance(SegmentList& segments,
                                             const std::vector<std::optional<std::string>>& lyrics,
                                             const std::vector<std::string>& audio_ids);

/// Expands allocated segments into frame entries with single-id guidance.
/// Frame k of a segment with n frames sits at start + k * duration / n.
Plan expand_plan(const SegmentList& segments, const std::vector<SegmentGuidance>& guidance,
                 const PlanMeta& meta);

/// Transition averaging of consecutive prompts with weight 1/2 each. For
/// every segment t > 0, an in-scope frame whose own guidance differs from
/// the last frame of segment t - 1 becomes [(prev, 0.5), (own, 0.5)] with
/// transition_flag set.
Plan apply_transition_blend(Plan plan, const BlendScope& scope);

struct PlanViolation {
  std::optional<std::size_t> frame_index;
  std::string message;
};

std::string to_string(const PlanViolation& v);

/// Checks every Plan invariant against the store; returns the violations.
std::vector<PlanViolation> validate_plan(const Plan& plan, const EmbeddingStore& store);

/// Serialization (schema version "1"): {"meta": {...}, "entries": [...]}.
/// Doubles are written in shortest round-trip form, so reading a plan back
/// reproduces every value bit for bit.
std::string plan_to_json(const Plan& plan);
/// Throws ArgumentError for structurally malformed documents.
Plan plan_from_json(std::string_view json_text);
Plan load_plan(const std::filesystem::path& path);
void save_plan(const std::filesystem::path& path, const Plan& plan);

/// Number of segments covered by the plan (max segment_index + 1).
std::size_t plan_segment_count(const Plan& plan);

}  // namespace cadence
