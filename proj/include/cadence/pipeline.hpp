#pragma once

#include <string>
#include <vector>

#include "cadence/audio_io.hpp"
#include "cadence/beat.hpp"
#include "cadence/dsp.hpp"
#include "cadence/embed.hpp"
#include "cadence/lyrics.hpp"
#include "cadence/schedule.hpp"

namespace cadence {

struct AnalysisConfig {
  int sample_rate = kAnalysisSampleRate;
  StftConfig stft;
  MelConfig mel;
  TempoConfig tempo;
  double tightness = 100.0;
  double min_segment_s = 0.1;
};

/// Everything the plan compiler needs from the audio.
struct TrackAnalysis {
  double duration_s = 0.0;
  MelSpectrogram mel;
  OnsetEnvelope onset;
  TempoEstimate tempo;
  BeatGrid beats;
  SegmentList segments;  // mean_intensity_db filled in
};

/// Resample -> STFT -> mel dB -> onset -> tempo -> beats -> segments ->
/// per-segment mean intensity. Throws InsufficientDataError for tracks too
/// short to estimate a tempo.
TrackAnalysis analyze_track(const AudioBuffer& audio, const AnalysisConfig& cfg = {});

/// {tempo_bpm, beats[], segments[{start, end, mean_db}], onset{frame_rate, values[]}}
std::string analysis_to_json(const TrackAnalysis& analysis);

struct PlanConfig {
  double fps_min = 1.0;
  double fps_max = 10.0;
  GuidanceMode mode = GuidanceMode::kSegmentLocked;
  BlendScope blend_scope = BlendScope::full();
  std::uint64_t seed = 0;
  /// Dimension of derived embeddings when no manifest is supplied.
  std::size_t embed_dim = 512;
  std::string audio_source;
};

struct CompiledPlan {
  Plan plan;
  /// Input store plus any derived stub embeddings.
  EmbeddingStore store;
  SegmentList segments;
  LyricAssignment lyrics;
  std::size_t derived_embeddings = 0;
  std::vector<PlanViolation> violations;

  std::size_t lyric_segments() const;
};

/// normalize -> allocate -> assign lyrics and guidance -> expand -> blend ->
/// validate. Audio ("audio:<i>") and lyric ("lyric:<text>") embeddings
/// missing from `base` are derived with the stub encoders. Throws
/// ConfigError for bad fps bounds; validation failures are reported in
/// `violations`.
CompiledPlan compile_plan(const TrackAnalysis& analysis, const LyricsTrack& lyrics,
                          const EmbeddingStore* base, const PlanConfig& cfg);

/// SVG timeline of a plan. Modality colors come from `store` when given,
/// otherwise from the id prefix ("lyric:" is text, anything else audio).
std::string render_timeline_svg(const Plan& plan, const EmbeddingStore* store = nullptr);

}  // namespace cadence
