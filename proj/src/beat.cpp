#include "cadence/beat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cadence/error.hpp"

namespace cadence {

namespace {

double prior_weight(double bpm, const TempoConfig& cfg) {
  const double octaves = std::log2(bpm / cfg.bpm_prior) / cfg.prior_spread_octaves;
  return std::exp(-0.5 * octaves * octaves);
}

TempoEstimate from_bpm(double bpm, double frame_rate) { return {bpm, frame_rate * 60.0 / bpm}; }

}  // namespace

TempoEstimate estimate_tempo(const OnsetEnvelope& env, const TempoConfig& cfg) {
  if (!(cfg.bpm_min > 0.0 && cfg.bpm_min < cfg.bpm_max)) {
    throw ArgumentError("tempo range requires 0 < bpm_min < bpm_max");
  }
  if (!(cfg.prior_spread_octaves > 0.0)) throw ArgumentError("prior spread must be positive");
  if (env.frame_rate <= 0.0) throw ArgumentError("onset envelope has no frame rate");
  if (env.duration_s() < kMinTempoSeconds) {
    throw InsufficientDataError("tempo estimation needs at least 4 s of onset envelope");
  }

  const double fr = env.frame_rate;
  const double prior_bpm = std::clamp(cfg.bpm_prior, cfg.bpm_min, cfg.bpm_max);
  const std::size_t n = env.values.size();
  const double mean = std::accumulate(env.values.begin(), env.values.end(), 0.0) / n;

  const auto lag_lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fr * 60.0 / cfg.bpm_max)));
  const auto lag_hi = std::min(n - 1, static_cast<std::size_t>(std::floor(fr * 60.0 / cfg.bpm_min)));
  if (lag_lo > lag_hi) return from_bpm(prior_bpm, fr);

  // Unbiased autocorrelation over [lag_lo - 1, lag_hi + 1] for the refinement step.
  const std::size_t ac_lo = lag_lo - 1;
  const std::size_t ac_hi = std::min(n - 1, lag_hi + 1);
  std::vector<double> ac(ac_hi + 1, 0.0);
  for (std::size_t lag = std::max<std::size_t>(ac_lo, 1); lag <= ac_hi; ++lag) {
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += (env.values[t] - mean) * (env.values[t + lag] - mean);
    ac[lag] = acc / static_cast<double>(n - lag);
  }

  const double prior_lag = fr * 60.0 / prior_bpm;
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t lag = lag_lo; lag <= lag_hi; ++lag) {
    const double score = ac[lag] * prior_weight(fr * 60.0 / static_cast<double>(lag), cfg);
    const bool better = score > best_score;
    const bool tie_closer = score == best_score && std::abs(static_cast<double>(lag) - prior_lag) <
                                                       std::abs(static_cast<double>(best) - prior_lag);
    if (better || tie_closer) {
      best = lag;
      best_score = score;
    }
  }
  if (!(best_score > 0.0)) return from_bpm(prior_bpm, fr);

  double num = 0.0, den = 0.0;
  for (std::size_t lag = best - 1; lag <= std::min(best + 1, ac_hi); ++lag) {
    if (lag == 0) continue;
    const double w = std::max(0.0, ac[lag]);
    num += w * static_cast<double>(lag);
    den += w;
  }
  const double lag = den > 0.0 ? num / den : static_cast<double>(best);
  const double bpm = std::clamp(fr * 60.0 / lag, cfg.bpm_min, cfg.bpm_max);
  return from_bpm(bpm, fr);
}

std::vector<std::size_t> track_beat_frames(const OnsetEnvelope& env, const TempoEstimate& tempo,
                                           double tightness) {
  if (!(tightness > 0.0)) throw ArgumentError("tightness must be positive");
  if (!(tempo.period_frames > 0.0)) throw ArgumentError("tempo period must be positive");

  const std::size_t n = env.values.size();
  const double period = tempo.period_frames;
  if (static_cast<double>(n) < period) return {};

  const double mean = std::accumulate(env.values.begin(), env.values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : env.values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (!(sd > 0.0)) return {};

  const auto gap_min = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(period / 2.0)));
  const auto gap_max = std::max(gap_min, static_cast<std::size_t>(std::lround(2.0 * period)));

  std::vector<double> penalty(gap_max + 1, 0.0);
  for (std::size_t d = gap_min; d <= gap_max; ++d) {
    const double l = std::log(static_cast<double>(d) / period);
    penalty[d] = tightness * l * l;
  }

  std::vector<double> cum(n, 0.0);
  std::vector<std::ptrdiff_t> back(n, -1);
  for (std::size_t t = 0; t < n; ++t) {
    double best = 0.0;
    std::ptrdiff_t from = -1;
    for (std::size_t d = gap_min; d <= gap_max && d <= t; ++d) {
      const double cand = cum[t - d] - penalty[d];
      if (cand > best) {
        best = cand;
        from = static_cast<std::ptrdiff_t>(t - d);
      }
    }
    cum[t] = env.values[t] / sd + best;
    back[t] = from;
  }

  const auto end = static_cast<std::size_t>(std::distance(cum.begin(), std::max_element(cum.begin(), cum.end())));
  if (!(cum[end] > 0.0)) return {};

  std::vector<std::size_t> frames;
  for (auto t = static_cast<std::ptrdiff_t>(end); t >= 0; t = back[static_cast<std::size_t>(t)]) {
    frames.push_back(static_cast<std::size_t>(t));
  }
  std::reverse(frames.begin(), frames.end());
  return frames;
}

BeatGrid track_beats(const OnsetEnvelope& env, const TempoEstimate& tempo, double tightness) {
  BeatGrid grid;
  for (std::size_t f : track_beat_frames(env, tempo, tightness)) grid.beat_times_s.push_back(env.time_s(f));
  return grid;
}

SegmentList segments_from_beats(const BeatGrid& beats, double duration_s, double min_segment_s) {
  if (!(duration_s > 0.0)) throw ArgumentError("track duration must be positive");

  std::vector<double> bounds{0.0};
  for (double b : beats.beat_times_s) {
    if (b > bounds.back() && b < duration_s) bounds.push_back(b);
  }
  bounds.push_back(duration_s);

  SegmentList out;
  double carry_start = -1.0;  // start of a leading run still waiting for a successor
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double start = carry_start >= 0.0 ? carry_start : bounds[i];
    const double end = bounds[i + 1];
    if (end - start < min_segment_s) {
      if (!out.empty()) {
        out.back().end_s = end;
      } else {
        carry_start = start;
      }
      continue;
    }
    carry_start = -1.0;
    Segment s;
    s.start_s = start;
    s.end_s = end;
    out.push_back(s);
  }
  if (out.empty()) {
    Segment s;
    s.start_s = 0.0;
    s.end_s = duration_s;
    out.push_back(s);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i;
  return out;
}

}  // namespace cadence
