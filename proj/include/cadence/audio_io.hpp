#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cadence {

/// Default rate every analysis stage assumes.
inline constexpr int kAnalysisSampleRate = 22050;

/// Mono floating-point audio at a known sample rate. Samples lie in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kAnalysisSampleRate;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class SampleFormat { kPcm16, kPcm24, kFloat32 };

/// Decodes a RIFF/WAVE byte stream (PCM16, PCM24 or float32; 1 or 2
/// channels) into a mono buffer. Channels are averaged per sample frame and
/// integer PCM is scaled by 1/2^(bits-1).
///
/// Throws DecodeError for malformed or truncated data and
/// UnsupportedFormatError for other codecs, bit depths or channel counts.
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

/// Reads and decodes a WAV file. I/O failures surface as DecodeError at offset 0.
AudioBuffer load_wav(const std::filesystem::path& path);

/// Encodes interleaved frames as a canonical 44-byte-header WAV. `channels`
/// must divide the sample count. Integer formats round and clip.
std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, int sample_rate,
                                     int channels, SampleFormat format);

void save_wav(const std::filesystem::path& path, const AudioBuffer& buffer, SampleFormat format);

/// Linear-interpolation resampling. Output length is
/// round(len * target_rate / sample_rate); identical rates return a copy.
AudioBuffer resample(const AudioBuffer& buffer, int target_rate);

}  // namespace cadence
