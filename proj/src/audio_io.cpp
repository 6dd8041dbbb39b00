#include "cadence/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "cadence/error.hpp"

namespace cadence {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

struct FormatChunk {
  std::uint16_t format = 0;
  int channels = 0;
  int sample_rate = 0;
  int block_align = 0;
  int bits = 0;
};

FormatChunk parse_fmt(std::span<const std::uint8_t> b, std::size_t at, std::size_t size) {
  if (size < 16) throw DecodeError("fmt chunk shorter than 16 bytes", at);
  FormatChunk f;
  f.format = read_u16(b, at);
  f.channels = read_u16(b, at + 2);
  f.sample_rate = static_cast<int>(read_u32(b, at + 4));
  f.block_align = read_u16(b, at + 12);
  f.bits = read_u16(b, at + 14);
  if (f.format == kFormatExtensible) {
    if (size < 40) throw DecodeError("extensible fmt chunk shorter than 40 bytes", at);
    // The first two bytes of the sub-format GUID carry the plain format tag.
    f.format = read_u16(b, at + 24);
  }
  if (f.channels == 0) throw DecodeError("fmt chunk declares zero channels", at + 2);
  if (f.sample_rate <= 0) throw DecodeError("fmt chunk declares a zero sample rate", at + 4);
  return f;
}

void check_supported(const FormatChunk& f) {
  const bool pcm = f.format == kFormatPcm && (f.bits == 16 || f.bits == 24);
  const bool flt = f.format == kFormatFloat && f.bits == 32;
  if (!pcm && !flt) {
    throw UnsupportedFormatError("unsupported WAV encoding: format tag " +
                                 std::to_string(f.format) + ", " + std::to_string(f.bits) +
                                 " bits per sample");
  }
  if (f.channels > 2) {
    throw UnsupportedFormatError("unsupported channel count " + std::to_string(f.channels));
  }
}

double read_sample(std::span<const std::uint8_t> b, std::size_t at, const FormatChunk& f) {
  switch (f.bits) {
    case 16: {
      const auto v = static_cast<std::int16_t>(read_u16(b, at));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = b[at] | (b[at + 1] << 8) | (b[at + 2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default: {
      const float v = std::bit_cast<float>(read_u32(b, at));
      if (!std::isfinite(v)) throw DecodeError("non-finite float sample", at);
      return std::clamp(static_cast<double>(v), -1.0, 1.0);
    }
  }
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw DecodeError("file shorter than a RIFF header", bytes.size());
  if (!tag_is(bytes, 0, "RIFF")) throw DecodeError("missing RIFF tag", 0);
  if (!tag_is(bytes, 8, "WAVE")) throw DecodeError("missing WAVE tag", 8);

  std::optional<FormatChunk> fmt;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::size_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;

    if (tag_is(bytes, pos, "fmt ")) {
      if (size > bytes.size() - body) throw DecodeError("fmt chunk runs past end of file", pos);
      fmt = parse_fmt(bytes, body, size);
      check_supported(*fmt);
    } else if (tag_is(bytes, pos, "data")) {
      if (!fmt) throw DecodeError("data chunk before fmt chunk", pos);
      if (size > bytes.size() - body) throw DecodeError("truncated data chunk", pos);
      const std::size_t bytes_per_sample = static_cast<std::size_t>(fmt->bits / 8);
      const std::size_t frame_bytes = bytes_per_sample * fmt->channels;
      if (fmt->block_align != 0 && static_cast<std::size_t>(fmt->block_align) != frame_bytes) {
        throw DecodeError("block align disagrees with channels and bit depth", pos);
      }
      if (size % frame_bytes != 0) throw DecodeError("data chunk ends mid-frame", body + size);

      AudioBuffer out;
      out.sample_rate = fmt->sample_rate;
      const std::size_t frames = size / frame_bytes;
      out.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < fmt->channels; ++c) {
          acc += read_sample(bytes, body + i * frame_bytes + c * bytes_per_sample, *fmt);
        }
        out.samples[i] = acc / fmt->channels;
      }
      return out;
    }
    pos = body + size + (size & 1);
  }
  throw DecodeError(fmt ? "missing data chunk" : "missing fmt chunk", std::min(pos, bytes.size()));
}

AudioBuffer load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open " + path.string(), 0);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, int sample_rate,
                                     int channels, SampleFormat format) {
  if (channels < 1 || channels > 2) throw ArgumentError("encode_wav supports 1 or 2 channels");
  if (sample_rate <= 0) throw ArgumentError("sample rate must be positive");
  if (interleaved.size() % static_cast<std::size_t>(channels) != 0) {
    throw ArgumentError("sample count is not a multiple of the channel count");
  }
  const int bits = format == SampleFormat::kPcm16 ? 16 : format == SampleFormat::kPcm24 ? 24 : 32;
  const std::uint16_t tag = format == SampleFormat::kFloat32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t block = static_cast<std::uint32_t>(channels * bits / 8);
  const std::uint32_t data_size = static_cast<std::uint32_t>(interleaved.size() * (bits / 8));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size + 1);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size + (data_size & 1));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * block);
  put_u16(out, static_cast<std::uint16_t>(block));
  put_u16(out, static_cast<std::uint16_t>(bits));
  put_tag(out, "data");
  put_u32(out, data_size);

  for (double s : interleaved) {
    if (format == SampleFormat::kFloat32) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
      continue;
    }
    const double scale = bits == 16 ? 32768.0 : 8388608.0;
    const double v = std::clamp(std::round(s * scale), -scale, scale - 1.0);
    const auto q = static_cast<std::int32_t>(v);
    out.push_back(static_cast<std::uint8_t>(q & 0xFF));
    out.push_back(static_cast<std::uint8_t>((q >> 8) & 0xFF));
    if (bits == 24) out.push_back(static_cast<std::uint8_t>((q >> 16) & 0xFF));
  }
  if (data_size & 1) out.push_back(0);
  return out;
}

void save_wav(const std::filesystem::path& path, const AudioBuffer& buffer, SampleFormat format) {
  const auto bytes = encode_wav(buffer.samples, buffer.sample_rate, 1, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

AudioBuffer resample(const AudioBuffer& buffer, int target_rate) {
  if (target_rate <= 0) throw ArgumentError("resample target rate must be positive");
  if (buffer.sample_rate <= 0) throw ArgumentError("source sample rate must be positive");
  if (target_rate == buffer.sample_rate) return buffer;

  AudioBuffer out;
  out.sample_rate = target_rate;
  const std::size_t n_in = buffer.samples.size();
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_in) * target_rate / buffer.sample_rate));
  out.samples.resize(n_out);
  if (n_in == 0) return out;

  const double step = static_cast<double>(buffer.sample_rate) / target_rate;
  for (std::size_t i = 0; i < n_out; ++i) {
    const double pos = i * step;
    const auto left = static_cast<std::size_t>(pos);
    if (left + 1 >= n_in) {
      out.samples[i] = buffer.samples[n_in - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(left);
    const double a = buffer.samples[left];
    const double b = buffer.samples[left + 1];
    out.samples[i] = a + frac * (b - a);
  }
  return out;
}

}  // namespace cadence
