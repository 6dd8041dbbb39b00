#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cadence/audio_io.hpp"

namespace cadence {

struct StftConfig {
  int n_fft = 2048;
  int hop = 512;
};

struct MelConfig {
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 11025.0;
};

/// Power spectrogram, time-major: frame t occupies
/// data[t * bins .. (t + 1) * bins) with bins = n_fft / 2 + 1.
/// Frame t covers samples [t * hop, t * hop + n_fft).
struct PowerSpectrogram {
  std::vector<double> data;
  std::size_t frames = 0;
  std::size_t bins = 0;
  int n_fft = 0;
  int hop = 0;
  int sample_rate = 0;

  std::span<const double> frame(std::size_t t) const {
    return std::span<const double>(data).subspan(t * bins, bins);
  }
};

/// Mel-band levels in dB, time-major (frames x n_mels), shifted so the
/// global maximum sits at 0 dB. `reference_db` is the shift that was
/// subtracted, so raw dB = db + reference_db.
struct MelSpectrogram {
  std::vector<double> db;
  std::size_t frames = 0;
  int n_mels = 0;
  int n_fft = 0;
  int hop = 0;
  int sample_rate = 0;
  double reference_db = 0.0;

  double hop_s() const { return static_cast<double>(hop) / sample_rate; }
  double frame_rate() const { return static_cast<double>(sample_rate) / hop; }
  /// Center of frame t in seconds: (t * hop + n_fft / 2) / sample_rate.
  double frame_center_s(std::size_t t) const {
    return (static_cast<double>(t) * hop + n_fft / 2.0) / sample_rate;
  }
  double at(std::size_t t, int band) const { return db[t * static_cast<std::size_t>(n_mels) + band]; }
  std::span<const double> frame(std::size_t t) const {
    return std::span<const double>(db).subspan(t * static_cast<std::size_t>(n_mels),
                                               static_cast<std::size_t>(n_mels));
  }
};

/// Half-wave rectified spectral flux, one value per mel frame.
///
/// An onset first registers in the frame whose window newly admits the
/// attack, i.e. in the last `hop` samples of that frame. Value t is
/// therefore stamped at the middle of that newest hop:
/// time_s(t) = (t * hop + n_fft - hop / 2) / sample_rate.
struct OnsetEnvelope {
  std::vector<double> values;
  double frame_rate = 0.0;
  double time_offset_s = 0.0;

  double time_s(std::size_t t) const { return time_offset_s + static_cast<double>(t) / frame_rate; }
  double duration_s() const { return static_cast<double>(values.size()) / frame_rate; }
};

/// Hann-windowed STFT power (squared DFT magnitude). n_fft must be a power
/// of two and 0 < hop <= n_fft. Buffers shorter than n_fft yield a single
/// zero-padded frame; an empty buffer is an ArgumentError.
PowerSpectrogram stft(const AudioBuffer& buffer, int n_fft, int hop);

/// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

/// Triangular mel filterbank (HTK mel scale, unit-peak triangles), row-major
/// n_mels x (n_fft / 2 + 1).
std::vector<double> mel_filterbank(int n_mels, int n_fft, int sample_rate, double fmin, double fmax);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Applies the mel filterbank and converts to dB via 10*log10(max(x, 1e-10)),
/// then shifts so the global maximum is 0 dB.
MelSpectrogram mel_spectrogram(const PowerSpectrogram& spec, int n_mels, double fmin, double fmax);

/// value[t] = mean_m max(0, db[t][m] - db[t-1][m]); value[0] = 0.
OnsetEnvelope onset_strength(const MelSpectrogram& mel);

/// Mean of every dB entry whose frame center lies in [start_s, end_s). When
/// no center falls inside, the frame nearest the interval midpoint is used.
double segment_mean_intensity(const MelSpectrogram& mel, double start_s, double end_s);

/// Per-band mean dB over the same frame selection as segment_mean_intensity.
std::vector<double> segment_band_means(const MelSpectrogram& mel, double start_s, double end_s);

}  // namespace cadence
