#include "cadence/lyrics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "cadence/error.hpp"

namespace cadence {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// [ar:Artist], [offset:+250], [#:comment] ...
bool is_metadata_tag(std::string_view tag) {
  const auto colon = tag.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  const auto key = tag.substr(0, colon);
  if (!(std::isalpha(static_cast<unsigned char>(key.front())) || key.front() == '#')) return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '#' || c == '_' || c == '-';
  });
}

// mm:ss, mm:ss.f+, mm:ss:f+
std::optional<double> parse_timestamp(std::string_view tag) {
  const auto colon = tag.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const auto minutes = tag.substr(0, colon);
  auto rest = tag.substr(colon + 1);
  std::string_view seconds = rest, fraction;
  const auto sep = rest.find_first_of(".:");
  if (sep != std::string_view::npos) {
    seconds = rest.substr(0, sep);
    fraction = rest.substr(sep + 1);
    if (!all_digits(fraction)) return std::nullopt;
  }
  if (!all_digits(minutes) || !all_digits(seconds) || seconds.size() > 2) return std::nullopt;
  if (minutes.empty() || seconds.empty() || minutes.size() > 9) return std::nullopt;
  const long long sec = std::stoll(std::string(seconds));
  if (sec >= 60) return std::nullopt;
  // One decimal literal so "01:02.345" parses to the double nearest 62.345.
  const long long whole = std::stoll(std::string(minutes)) * 60 + sec;
  return std::stod(std::to_string(whole) + (fraction.empty() ? "" : "." + std::string(fraction)));
}

}  // namespace

LyricsTrack parse_lrc(std::string_view text) {
  LyricsTrack track;
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (line.empty() || line.front() != '[') continue;

    std::vector<double> stamps;
    while (!line.empty() && line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos) {
        throw ParseError("unterminated tag '" + std::string(line) + "'", line_no);
      }
      const auto tag = trim(line.substr(1, close - 1));
      if (stamps.empty() && is_metadata_tag(tag)) break;
      if (auto t = parse_timestamp(tag)) {
        stamps.push_back(*t);
        line = line.substr(close + 1);
        continue;
      }
      // A bracketed word after valid timestamps is lyric text; anything
      // else that opens like a time is a broken timestamp.
      const bool looks_like_time = !tag.empty() && std::isdigit(static_cast<unsigned char>(tag.front()));
      if (stamps.empty() || looks_like_time) {
        throw ParseError("malformed timestamp '[" + std::string(tag) + "]'", line_no);
      }
      break;
    }
    if (stamps.empty()) continue;

    const auto lyric = trim(line);
    if (lyric.empty()) continue;
    for (double t : stamps) track.lines.push_back({t, std::string(lyric)});
  }

  std::stable_sort(track.lines.begin(), track.lines.end(),
                   [](const LyricLine& a, const LyricLine& b) { return a.time_s < b.time_s; });
  return track;
}

LyricsTrack load_lrc(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open lyrics file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_lrc(ss.str());
}

LyricAssignment assign_lyrics(const LyricsTrack& track, const SegmentList& segments) {
  if (segments.empty()) throw ArgumentError("no segments to assign lyrics to");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!(segments[i].start_s < segments[i].end_s)) throw ArgumentError("segment with empty interval");
    if (i > 0 && segments[i].start_s != segments[i - 1].end_s) {
      throw ArgumentError("segments are not contiguous");
    }
  }

  auto lines = track.lines;
  std::sort(lines.begin(), lines.end(), [](const LyricLine& a, const LyricLine& b) {
    return a.time_s != b.time_s ? a.time_s < b.time_s : a.text < b.text;
  });

  LyricAssignment out;
  out.texts.resize(segments.size());
  for (const auto& line : lines) {
    auto it = std::upper_bound(segments.begin(), segments.end(), line.time_s,
                               [](double t, const Segment& s) { return t < s.start_s; });
    std::size_t idx = it == segments.begin() ? 0 : static_cast<std::size_t>(it - segments.begin()) - 1;
    if (line.time_s >= segments.back().end_s) {
      idx = segments.size() - 1;
      out.beyond_duration = true;
    }
    auto& slot = out.texts[idx];
    slot = slot ? *slot + " " + line.text : line.text;
  }
  return out;
}

}  // namespace cadence
