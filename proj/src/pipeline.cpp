#include "cadence/pipeline.hpp"

#include <algorithm>

#include <json.hpp>

#include "cadence/error.hpp"

namespace cadence {

using nlohmann::json;

TrackAnalysis analyze_track(const AudioBuffer& audio, const AnalysisConfig& cfg) {
  if (audio.samples.empty()) throw InsufficientDataError("audio has no samples");
  const AudioBuffer buf = resample(audio, cfg.sample_rate);

  TrackAnalysis out;
  out.duration_s = buf.duration_s();
  const auto power = stft(buf, cfg.stft.n_fft, cfg.stft.hop);
  const double fmax = std::min(cfg.mel.fmax, buf.sample_rate / 2.0);
  out.mel = mel_spectrogram(power, cfg.mel.n_mels, cfg.mel.fmin, fmax);
  if (out.mel.frames < 2) throw InsufficientDataError("audio shorter than two analysis frames");
  out.onset = onset_strength(out.mel);
  out.tempo = estimate_tempo(out.onset, cfg.tempo);
  out.beats = track_beats(out.onset, out.tempo, cfg.tightness);
  out.segments = segments_from_beats(out.beats, out.duration_s, cfg.min_segment_s);
  for (auto& s : out.segments) s.mean_intensity_db = segment_mean_intensity(out.mel, s.start_s, s.end_s);
  return out;
}

std::string analysis_to_json(const TrackAnalysis& a) {
  json segments = json::array();
  for (const auto& s : a.segments) {
    segments.push_back({{"start", s.start_s}, {"end", s.end_s}, {"mean_db", s.mean_intensity_db}});
  }
  json doc = {{"tempo_bpm", a.tempo.bpm},
              {"duration_s", a.duration_s},
              {"beats", a.beats.beat_times_s},
              {"segments", std::move(segments)},
              {"onset", {{"frame_rate", a.onset.frame_rate},
                         {"time_offset_s", a.onset.time_offset_s},
                         {"values", a.onset.values}}}};
  return doc.dump(1) + "\n";
}

std::size_t CompiledPlan::lyric_segments() const {
  return static_cast<std::size_t>(
      std::count_if(lyrics.texts.begin(), lyrics.texts.end(), [](const auto& t) { return t.has_value(); }));
}

CompiledPlan compile_plan(const TrackAnalysis& analysis, const LyricsTrack& lyrics,
                          const EmbeddingStore* base, const PlanConfig& cfg) {
  if (!(cfg.fps_min > 0.0)) throw ConfigError("fps_min must be positive");
  if (!(cfg.fps_min <= cfg.fps_max)) throw ConfigError("fps_min must not exceed fps_max");

  CompiledPlan out{{}, base ? *base : EmbeddingStore(cfg.embed_dim), {}, {}, 0, {}};
  out.segments = analysis.segments;
  normalize_intensities(out.segments);
  for (auto& s : out.segments) s.frame_count = allocate_frames(s, cfg.fps_min, cfg.fps_max);
  out.lyrics = assign_lyrics(lyrics, out.segments);

  const std::size_t dim = out.store.dim();
  std::vector<std::string> audio_ids;
  for (const auto& s : out.segments) {
    auto id = audio_embedding_id(s.index);
    if (!out.store.contains(id)) {
      auto e = stub_audio_embedding(segment_band_means(analysis.mel, s.start_s, s.end_s), dim, cfg.seed);
      e.id = id;
      out.store.add(std::move(e));
      ++out.derived_embeddings;
    }
    audio_ids.push_back(std::move(id));
  }
  for (const auto& text : out.lyrics.texts) {
    if (!text || out.store.contains(lyric_embedding_id(*text))) continue;
    out.store.add(stub_text_embedding(*text, dim, cfg.seed));
    ++out.derived_embeddings;
  }

  const auto guidance = assign_guidance(out.segments, out.lyrics.texts, audio_ids);
  PlanMeta meta;
  meta.audio_source = cfg.audio_source;
  meta.duration_s = analysis.duration_s;
  meta.fps_min = cfg.fps_min;
  meta.fps_max = cfg.fps_max;
  meta.guidance_mode = cfg.mode;
  meta.seed = cfg.seed;
  out.plan = apply_transition_blend(expand_plan(out.segments, guidance, meta), cfg.blend_scope);
  out.violations = validate_plan(out.plan, out.store);
  return out;
}

}  // namespace cadence
