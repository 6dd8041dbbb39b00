#include <doctest.h>

#include <cmath>
#include <string>

#include <json.hpp>

#include "cadence/error.hpp"
#include "cadence/pipeline.hpp"
#include "support/synth.hpp"

using namespace cadence;

namespace {

const TrackAnalysis& analysis_60s() {
  static const TrackAnalysis a = analyze_track(testing::modulated_beat_track(120.0, 60.0));
  return a;
}

std::size_t count_of(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

Plan hand_plan(const std::vector<std::vector<std::string>>& segment_ids, double seg_len = 1.0) {
  Plan plan;
  plan.meta.duration_s = seg_len * static_cast<double>(segment_ids.size());
  std::size_t frame = 0;
  for (std::size_t s = 0; s < segment_ids.size(); ++s) {
    const auto& ids = segment_ids[s];
    for (std::size_t k = 0; k < ids.size(); ++k) {
      PlanEntry e;
      e.frame_index = frame++;
      e.time_s = seg_len * (static_cast<double>(s) + static_cast<double>(k) / static_cast<double>(ids.size()));
      e.segment_index = s;
      e.guidance = {{ids[k], 1.0}};
      plan.entries.push_back(e);
    }
  }
  return plan;
}

}  // namespace

TEST_CASE("compiled plan frame count equals the per-segment allocation sum") {
  const auto& a = analysis_60s();
  PlanConfig cfg;
  cfg.fps_min = 2.0;
  cfg.fps_max = 12.0;
  cfg.seed = 9;
  cfg.embed_dim = 16;
  const auto compiled = compile_plan(a, {}, nullptr, cfg);
  CHECK(compiled.violations.empty());

  // Brute force from the raw dB means.
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : a.segments) {
    lo = std::min(lo, s.mean_intensity_db);
    hi = std::max(hi, s.mean_intensity_db);
  }
  long long expected = 0;
  for (const auto& s : a.segments) {
    const double x = hi > lo ? (s.mean_intensity_db - lo) / (hi - lo) : 0.5;
    const double fps = cfg.fps_min + x * (cfg.fps_max - cfg.fps_min);
    expected += std::max(1LL, std::llround(fps * s.duration_s()));
  }
  CHECK(static_cast<long long>(compiled.plan.entries.size()) == expected);
  CHECK(plan_segment_count(compiled.plan) == a.segments.size());
  CHECK(compiled.derived_embeddings == a.segments.size());
  CHECK(compiled.store.dim() == 16);
  CHECK(compiled.lyric_segments() == 0);
}

TEST_CASE("lyrics become text guidance in their segments") {
  const auto& a = analysis_60s();
  LyricsTrack lyrics;
  lyrics.lines = {{10.2, "one"}, {30.7, "two"}, {45.1, "three"}};
  PlanConfig cfg;
  cfg.seed = 1;
  cfg.embed_dim = 8;
  const auto compiled = compile_plan(a, lyrics, nullptr, cfg);
  CHECK(compiled.violations.empty());
  CHECK(compiled.lyric_segments() == 3);
  CHECK(compiled.derived_embeddings == a.segments.size() + 3);
  std::size_t text_segments = 0;
  std::size_t last_segment = SIZE_MAX;
  for (const auto& e : compiled.plan.entries) {
    if (e.segment_index == last_segment) continue;
    last_segment = e.segment_index;
    if (e.guidance.back().id.starts_with("lyric:")) ++text_segments;
  }
  CHECK(text_segments == 3);
  CHECK(compiled.store.contains("lyric:two"));
}

TEST_CASE("supplied embeddings are used instead of derived ones") {
  const auto& a = analysis_60s();
  EmbeddingStore base(4);
  base.add({"audio:0", Modality::kAudio, {1.0, 0.0, 0.0, 0.0}, "hand"});
  PlanConfig cfg;
  cfg.embed_dim = 99;  // ignored when a store is given
  const auto compiled = compile_plan(a, {}, &base, cfg);
  CHECK(compiled.store.dim() == 4);
  CHECK(compiled.store.at("audio:0").source == "hand");
  CHECK(compiled.derived_embeddings == a.segments.size() - 1);
}

TEST_CASE("compile_plan rejects bad fps bounds") {
  PlanConfig cfg;
  cfg.fps_min = 5.0;
  cfg.fps_max = 2.0;
  CHECK_THROWS_AS(compile_plan(analysis_60s(), {}, nullptr, cfg), ConfigError);
  cfg.fps_min = 0.0;
  CHECK_THROWS_AS(compile_plan(analysis_60s(), {}, nullptr, cfg), ConfigError);
}

TEST_CASE("recompiling gives byte-identical plan and store") {
  PlanConfig cfg;
  cfg.seed = 3;
  cfg.embed_dim = 12;
  cfg.mode = GuidanceMode::kAlternating;
  LyricsTrack lyrics;
  lyrics.lines = {{5.0, "hey"}};
  const auto a = compile_plan(analysis_60s(), lyrics, nullptr, cfg);
  const auto b = compile_plan(analysis_60s(), lyrics, nullptr, cfg);
  CHECK(plan_to_json(a.plan) == plan_to_json(b.plan));
  CHECK(store_to_json(a.store) == store_to_json(b.store));
  cfg.seed = 4;
  const auto c = compile_plan(analysis_60s(), lyrics, nullptr, cfg);
  CHECK(store_to_json(a.store) != store_to_json(c.store));
}

TEST_CASE("analysis JSON carries the expected keys") {
  const auto doc = nlohmann::json::parse(analysis_to_json(analysis_60s()));
  for (const char* key : {"tempo_bpm", "duration_s", "beats", "segments", "onset"}) CHECK(doc.contains(key));
  CHECK(doc["onset"].contains("frame_rate"));
  CHECK(doc["onset"]["values"].size() == analysis_60s().onset.values.size());
  const auto& seg = doc["segments"].at(0);
  CHECK(seg.contains("start"));
  CHECK(seg.contains("end"));
  CHECK(seg.contains("mean_db"));
  CHECK(doc["tempo_bpm"].get<double>() == doctest::Approx(120.0).epsilon(0.02));
}

TEST_CASE("timeline SVG draws one boundary per segment edge") {
  const auto plan = hand_plan({{"audio:0", "audio:0"}, {"lyric:hi"}, {"audio:2", "audio:2", "audio:2"}, {"audio:3"}});
  const auto svg = render_timeline_svg(plan);
  CHECK(svg.starts_with("<svg"));
  CHECK(count_of(svg, "class=\"boundary\"") == 5);
  CHECK(count_of(svg, "class=\"frame ") == plan.entries.size());
  CHECK(count_of(svg, "frame-text") == 1);
  CHECK(count_of(svg, "class=\"lyric\"") == 1);
}

TEST_CASE("blended frames use the blend color") {
  auto plan = hand_plan({{"audio:0"}, {"lyric:x", "lyric:x"}});
  plan = apply_transition_blend(plan, BlendScope::first(1));
  const auto svg = render_timeline_svg(plan);
  CHECK(count_of(svg, "frame-blend") == 1);
  CHECK(count_of(svg, "class=\"frame frame-blend\" x=\"") == 1);
  const auto pos = svg.find("frame-blend");
  const auto end = svg.find('\n', pos);
  CHECK(svg.substr(pos, end - pos).find("fill=\"#8e44ad\"") != std::string::npos);
}

TEST_CASE("store modality overrides the id prefix") {
  EmbeddingStore store(2);
  store.add({"custom", Modality::kText, {1.0, 0.0}, "hand"});
  const auto svg = render_timeline_svg(hand_plan({{"custom"}}), &store);
  CHECK(count_of(svg, "frame-text") == 1);
}

TEST_CASE("empty plan renders just the axis") {
  const auto svg = render_timeline_svg(Plan{});
  CHECK(count_of(svg, "class=\"boundary\"") == 0);
  CHECK(count_of(svg, "class=\"frame ") == 0);
  CHECK(svg.find("class=\"axis\"") != std::string::npos);
  CHECK(svg.ends_with("</svg>\n"));
}

TEST_CASE("lyric labels are XML escaped") {
  const auto svg = render_timeline_svg(hand_plan({{"lyric:rock & <roll>"}}));
  CHECK(svg.find("rock &amp; &lt;roll&gt;") != std::string::npos);
  CHECK(svg.find("<roll>") == std::string::npos);
}
