#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cadence/segment.hpp"

namespace cadence {

struct LyricLine {
  double time_s = 0.0;
  std::string text;

  bool operator==(const LyricLine&) const = default;
};

/// Lines sorted ascending by time (stable for equal times).
struct LyricsTrack {
  std::vector<LyricLine> lines;
};

/// Parses LRC text. Supports [mm:ss], [mm:ss.xx] (any number of fraction
/// digits) and several leading timestamps per line. Metadata tags such as
/// [ar:...] or [offset:...], blank lines, untagged lines and timestamps
/// with empty text are skipped. A malformed timestamp on a non-metadata line
/// throws ParseError carrying the 1-based line number.
LyricsTrack parse_lrc(std::string_view text);

LyricsTrack load_lrc(const std::string& path);

struct LyricAssignment {
  /// One entry per segment: the concatenated lyric text, or nullopt.
  std::vector<std::optional<std::string>> texts;
  /// Set when some lyric lay at or beyond the end of the final segment and
  /// was folded into it.
  bool beyond_duration = false;
};

/// Maps each lyric to the segment whose half-open [start, end) holds its
/// timestamp. Several lyrics in one segment join in time order with a single
/// space. Segments must be contiguous and non-empty.
LyricAssignment assign_lyrics(const LyricsTrack& track, const SegmentList& segments);

}  // namespace cadence
