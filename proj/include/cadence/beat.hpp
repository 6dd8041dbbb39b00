#pragma once

#include <vector>

#include "cadence/dsp.hpp"
#include "cadence/segment.hpp"

namespace cadence {

struct TempoConfig {
  double bpm_min = 40.0;
  double bpm_max = 220.0;
  double bpm_prior = 120.0;
  double prior_spread_octaves = 1.0;
};

struct TempoEstimate {
  double bpm = 0.0;
  /// Onset frames per beat, frame_rate * 60 / bpm.
  double period_frames = 0.0;
};

struct BeatGrid {
  std::vector<double> beat_times_s;
};

/// Minimum envelope length accepted by estimate_tempo.
inline constexpr double kMinTempoSeconds = 4.0;

/// Global tempo from the autocorrelation of the (mean-removed) onset envelope,
/// weighted by a log2-Gaussian prior around cfg.bpm_prior. The winning integer
/// lag is refined to a fractional lag by the centroid of the raw
/// autocorrelation over its two neighbours. A flat objective (no periodic
/// energy) returns the prior exactly.
///
/// Throws InsufficientDataError for envelopes shorter than 4 s.
TempoEstimate estimate_tempo(const OnsetEnvelope& env, const TempoConfig& cfg = {});

/// Dynamic-programming beat tracker. Maximizes
///   sum O(b_i) - tightness * sum log(delta_i / period)^2
/// over beat sequences whose gaps lie in [period / 2, 2 * period], where O
/// is the onset envelope scaled to unit standard deviation. A beat may open
/// a fresh chain, so the best sequence never scores below the empty one.
/// Returns an empty grid for all-zero or shorter-than-one-period envelopes.
BeatGrid track_beats(const OnsetEnvelope& env, const TempoEstimate& tempo, double tightness = 100.0);

/// Same as track_beats, but returns beat positions as envelope frame indices.
std::vector<std::size_t> track_beat_frames(const OnsetEnvelope& env, const TempoEstimate& tempo,
                                           double tightness = 100.0);

/// One segment per inter-beat interval plus a leading [0, first) and a
/// trailing [last, duration) segment. Segments shorter than min_segment_s are
/// merged into their predecessor (the successor for the first one).
SegmentList segments_from_beats(const BeatGrid& beats, double duration_s, double min_segment_s = 0.1);

}  // namespace cadence
