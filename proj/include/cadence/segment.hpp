#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cadence {

/// A beat-delimited interval [start_s, end_s) of the track.
struct Segment {
  std::size_t index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double mean_intensity_db = 0.0;
  double normalized_intensity = 0.0;
  int frame_count = 1;
  std::string guidance_id;

  double duration_s() const { return end_s - start_s; }
};

using SegmentList = std::vector<Segment>;

}  // namespace cadence
