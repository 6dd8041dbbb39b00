#include "cadence/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

#include "cadence/error.hpp"

namespace cadence {

namespace {

constexpr double kPowerFloor = 1e-10;

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(int n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }
  const fftw_complex* output() const { return out_.get(); }
  void execute() { fftw_execute(plan_); }
  int size() const { return n_; }

 private:
  int n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_ = nullptr;
};

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct FrameRange {
  std::size_t first = 0;
  std::size_t last = 0;  // exclusive
};

FrameRange frames_in(const MelSpectrogram& mel, double start_s, double end_s) {
  if (!(start_s < end_s)) throw ArgumentError("interval start must precede its end");
  if (start_s < 0.0) throw ArgumentError("interval start must be non-negative");
  if (mel.frames == 0) throw ArgumentError("mel spectrogram has no frames");

  // Centers are increasing in t, so the selection is a contiguous run.
  FrameRange r{mel.frames, mel.frames};
  for (std::size_t t = 0; t < mel.frames; ++t) {
    const double c = mel.frame_center_s(t);
    if (c >= start_s && r.first == mel.frames) r.first = t;
    if (c >= end_s) {
      r.last = t;
      break;
    }
  }
  if (r.first < r.last) return r;

  const double mid = 0.5 * (start_s + end_s);
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mel.frames; ++t) {
    const double d = std::abs(mel.frame_center_s(t) - mid);
    if (d < best_dist) {
      best_dist = d;
      best = t;
    }
  }
  return {best, best + 1};
}

}  // namespace

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

PowerSpectrogram stft(const AudioBuffer& buffer, int n_fft, int hop) {
  if (buffer.samples.empty()) throw ArgumentError("stft of an empty buffer");
  if (!is_power_of_two(n_fft)) throw ArgumentError("n_fft must be a power of two");
  if (hop <= 0 || hop > n_fft) throw ArgumentError("hop must lie in (0, n_fft]");

  const std::size_t len = buffer.samples.size();
  const auto nfft = static_cast<std::size_t>(n_fft);
  PowerSpectrogram spec;
  spec.n_fft = n_fft;
  spec.hop = hop;
  spec.sample_rate = buffer.sample_rate;
  spec.bins = nfft / 2 + 1;
  spec.frames = len >= nfft ? (len - nfft) / static_cast<std::size_t>(hop) + 1 : 1;
  spec.data.assign(spec.frames * spec.bins, 0.0);

  const auto window = hann_window(n_fft);
  RealFft fft(n_fft);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const std::size_t start = t * static_cast<std::size_t>(hop);
    double* in = fft.input();
    for (std::size_t i = 0; i < nfft; ++i) {
      const std::size_t k = start + i;
      in[i] = k < len ? buffer.samples[k] * window[i] : 0.0;
    }
    fft.execute();
    const fftw_complex* out = fft.output();
    double* row = spec.data.data() + t * spec.bins;
    for (std::size_t b = 0; b < spec.bins; ++b) row[b] = out[b][0] * out[b][0] + out[b][1] * out[b][1];
  }
  return spec;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_filterbank(int n_mels, int n_fft, int sample_rate, double fmin, double fmax) {
  if (n_mels <= 0) throw ArgumentError("n_mels must be positive");
  if (!(fmin >= 0.0 && fmin < fmax)) throw ArgumentError("mel range requires 0 <= fmin < fmax");
  if (fmax > sample_rate / 2.0 + 1e-9) throw ArgumentError("fmax exceeds the Nyquist frequency");

  const int bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (n_mels + 1));
  }

  std::vector<double> fb(static_cast<std::size_t>(n_mels) * bins, 0.0);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      double w = 0.0;
      if (f > lo && f < center) {
        w = (f - lo) / (center - lo);
      } else if (f >= center && f < hi) {
        w = (hi - f) / (hi - center);
      }
      fb[static_cast<std::size_t>(m) * bins + k] = w;
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const PowerSpectrogram& spec, int n_mels, double fmin, double fmax) {
  const auto fb = mel_filterbank(n_mels, spec.n_fft, spec.sample_rate, fmin, fmax);

  MelSpectrogram mel;
  mel.frames = spec.frames;
  mel.n_mels = n_mels;
  mel.n_fft = spec.n_fft;
  mel.hop = spec.hop;
  mel.sample_rate = spec.sample_rate;
  mel.db.resize(spec.frames * static_cast<std::size_t>(n_mels));

  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const auto power = spec.frame(t);
    for (int m = 0; m < n_mels; ++m) {
      const double* row = fb.data() + static_cast<std::size_t>(m) * spec.bins;
      double acc = 0.0;
      for (std::size_t k = 0; k < spec.bins; ++k) acc += row[k] * power[k];
      const double db = 10.0 * std::log10(std::max(acc, kPowerFloor));
      mel.db[t * static_cast<std::size_t>(n_mels) + m] = db;
      peak = std::max(peak, db);
    }
  }
  if (mel.db.empty()) peak = 0.0;
  mel.reference_db = peak;
  for (double& v : mel.db) v -= peak;
  return mel;
}

OnsetEnvelope onset_strength(const MelSpectrogram& mel) {
  if (mel.frames < 2) throw ArgumentError("onset strength needs at least two mel frames");
  OnsetEnvelope env;
  env.frame_rate = mel.frame_rate();
  env.time_offset_s = (mel.n_fft - mel.hop / 2.0) / mel.sample_rate;
  env.values.assign(mel.frames, 0.0);
  for (std::size_t t = 1; t < mel.frames; ++t) {
    const auto cur = mel.frame(t);
    const auto prev = mel.frame(t - 1);
    double acc = 0.0;
    for (int m = 0; m < mel.n_mels; ++m) acc += std::max(0.0, cur[m] - prev[m]);
    env.values[t] = acc / mel.n_mels;
  }
  return env;
}

double segment_mean_intensity(const MelSpectrogram& mel, double start_s, double end_s) {
  const auto r = frames_in(mel, start_s, end_s);
  double acc = 0.0;
  for (std::size_t t = r.first; t < r.last; ++t) {
    for (double v : mel.frame(t)) acc += v;
  }
  return acc / (static_cast<double>(r.last - r.first) * mel.n_mels);
}

std::vector<double> segment_band_means(const MelSpectrogram& mel, double start_s, double end_s) {
  const auto r = frames_in(mel, start_s, end_s);
  std::vector<double> means(static_cast<std::size_t>(mel.n_mels), 0.0);
  for (std::size_t t = r.first; t < r.last; ++t) {
    const auto row = mel.frame(t);
    for (int m = 0; m < mel.n_mels; ++m) means[m] += row[m];
  }
  for (double& v : means) v /= static_cast<double>(r.last - r.first);
  return means;
}

}  // namespace cadence
