/// @file cadence.cpp
/// @brief Command-line front end: analyze, plan, viz and simulate.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cadence/error.hpp"
#include "cadence/optim.hpp"
#include "cadence/pipeline.hpp"
#include "cadence/rng.hpp"

namespace fs = std::filesystem;
using namespace cadence;

namespace {

enum ExitCode : int { kOk = 0, kIoError = 2, kInsufficient = 3, kInvalid = 4 };

/// Raised for I/O problems the library does not model (missing inputs, unwritable outputs).
struct IoFailure : Error {
  using Error::Error;
};

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw IoFailure(std::string(what) + " not found: " + path);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << text;
  if (!out) throw IoFailure("failed writing " + path.string());
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("cadence");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("CADENCE_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string audio;
  std::string out;
  double min_segment_s = 0.1;
  double tightness = 100.0;
  double bpm_prior = 120.0;
};

int cmd_analyze(const AnalyzeArgs& args) {
  require_file(args.audio, "audio file");
  AnalysisConfig cfg;
  cfg.min_segment_s = args.min_segment_s;
  cfg.tightness = args.tightness;
  cfg.tempo.bpm_prior = args.bpm_prior;

  const auto audio = load_wav(args.audio);
  spdlog::info("decoded {} samples at {} Hz", audio.size(), audio.sample_rate);
  const auto analysis = analyze_track(audio, cfg);
  write_text(args.out, analysis_to_json(analysis));
  std::cout << "tempo " << analysis.tempo.bpm << " bpm, " << analysis.beats.beat_times_s.size() << " beats, "
            << analysis.segments.size() << " segments\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct PlanArgs {
  std::string audio;
  std::string lyrics;
  std::string embeddings;
  std::string out;
  std::string store_out;
  double fps_min = 1.0;
  double fps_max = 10.0;
  std::string mode = "segment-locked";
  std::string blend_scope = "full";
  std::uint64_t seed = 0;
  std::size_t dim = 512;
};

fs::path default_store_path(const fs::path& plan_path) {
  auto p = plan_path;
  p.replace_extension();
  return p.string() + ".embeddings.json";
}

int cmd_plan(const PlanArgs& args) {
  require_file(args.audio, "audio file");
  if (!args.lyrics.empty()) require_file(args.lyrics, "lyrics file");
  if (!args.embeddings.empty()) require_file(args.embeddings, "embedding manifest");

  PlanConfig cfg;
  cfg.fps_min = args.fps_min;
  cfg.fps_max = args.fps_max;
  const auto mode = guidance_mode_from_string(args.mode);
  if (!mode) throw ConfigError("unknown guidance mode '" + args.mode + "'");
  cfg.mode = *mode;
  const auto scope = blend_scope_from_string(args.blend_scope);
  if (!scope) throw ConfigError("unknown blend scope '" + args.blend_scope + "'");
  cfg.blend_scope = *scope;
  cfg.seed = args.seed;
  cfg.embed_dim = args.dim;
  cfg.audio_source = fs::path(args.audio).filename().string();
  if (!(cfg.fps_min > 0.0 && cfg.fps_min <= cfg.fps_max)) {
    throw ConfigError("fps bounds must satisfy 0 < fps_min <= fps_max");
  }

  const auto lyrics = args.lyrics.empty() ? LyricsTrack{} : load_lrc(args.lyrics);
  std::optional<EmbeddingStore> base;
  if (!args.embeddings.empty()) base = load_store(args.embeddings);

  const auto analysis = analyze_track(load_wav(args.audio));
  const auto compiled = compile_plan(analysis, lyrics, base ? &*base : nullptr, cfg);
  if (compiled.lyrics.beyond_duration) spdlog::warn("lyrics past the end of the track were folded into the last segment");
  if (!compiled.violations.empty()) {
    for (const auto& v : compiled.violations) std::cerr << "violation: " << to_string(v) << "\n";
    return kInvalid;
  }

  const fs::path store_path = args.store_out.empty() ? default_store_path(args.out) : fs::path(args.store_out);
  write_text(args.out, plan_to_json(compiled.plan));
  write_text(store_path, store_to_json(compiled.store));
  std::cout << "segments " << compiled.segments.size() << ", total frames " << compiled.plan.entries.size()
            << ", lyric segments " << compiled.lyric_segments() << ", derived embeddings "
            << compiled.derived_embeddings << "\n"
            << "plan written to " << args.out << ", embeddings to " << store_path.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct VizArgs {
  std::string plan;
  std::string embeddings;
  std::string out;
};

int cmd_viz(const VizArgs& args) {
  require_file(args.plan, "plan file");
  std::optional<EmbeddingStore> store;
  if (!args.embeddings.empty()) {
    require_file(args.embeddings, "embedding manifest");
    store = load_store(args.embeddings);
  }
  const auto plan = load_plan(args.plan);
  write_text(args.out, render_timeline_svg(plan, store ? &*store : nullptr));
  return kOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string plan;
  std::string embeddings;
  std::string out;
  double lambda_l1 = 0.0;
  double lr = 0.1;
  int iters_per_frame = 1;
  std::uint64_t seed = 0;
  std::size_t latent_dim = 0;
  std::size_t image_dim = 0;
  double init_std = 1.0;
  bool check_grad = false;
  bool write_latents = false;
};

double gradient_check(const Backend& backend, std::uint64_t seed, int points) {
  SplitMix64 rng(derive_seed(seed, 'g'));
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    std::vector<double> z(backend.latent_dim()), g(backend.embed_dim());
    for (double& v : z) v = rng.normal();
    for (double& v : g) v = rng.normal();
    worst = std::max(worst, finite_diff_check(backend, z, normalized(g)));
  }
  return worst;
}

int cmd_simulate(const SimulateArgs& args) {
  require_file(args.plan, "plan file");
  require_file(args.embeddings, "embedding manifest");
  const auto plan = load_plan(args.plan);
  const auto store = load_store(args.embeddings);

  StepConfig cfg;
  cfg.learning_rate = args.lr;
  cfg.iterations_per_frame = args.iters_per_frame;
  cfg.lambda_l1 = args.lambda_l1;
  cfg.seed = args.seed;
  cfg.latent_dim = args.latent_dim ? args.latent_dim : 2 * store.dim();
  cfg.init_std = args.init_std;
  validate_config(cfg);
  const std::size_t image_dim = args.image_dim ? args.image_dim : 2 * store.dim();
  const auto backend = make_stub_backend(cfg.latent_dim, image_dim, store.dim(), args.seed);

  int status = kOk;
  if (args.check_grad) {
    constexpr int kPoints = 20;
    const double err = gradient_check(*backend, args.seed, kPoints);
    std::cout << "finite-difference check: max relative error " << err << " over " << kPoints << " points\n";
    if (!(err < 1e-4)) status = kInvalid;
  }

  const auto result = run_plan(plan, store, *backend, cfg);

  std::string lines;
  double cos_sum = 0.0, drift = 0.0, wall = 0.0;
  for (const auto& f : result.frames) {
    lines += nlohmann::json{{"frame_index", f.frame_index},
                            {"final_loss", f.final_loss},
                            {"cosine_to_guidance", f.cosine_to_guidance},
                            {"l1_drift", f.l1_drift}}
                 .dump() +
             "\n";
    cos_sum += f.cosine_to_guidance;
    drift += f.l1_drift;
    wall += f.wall_time_s;
  }
  const double mean_cos = result.frames.empty() ? 0.0 : cos_sum / static_cast<double>(result.frames.size());
  const nlohmann::json summary = {{"frames", result.frames.size()},
                                  {"mean_cosine", mean_cos},
                                  {"total_l1_drift", drift},
                                  {"seed", args.seed},
                                  {"lambda_l1", cfg.lambda_l1},
                                  {"learning_rate", cfg.learning_rate},
                                  {"iterations_per_frame", cfg.iterations_per_frame},
                                  {"latent_dim", cfg.latent_dim},
                                  {"image_dim", image_dim},
                                  {"embed_dim", store.dim()}};

  const fs::path dir(args.out);
  write_text(dir / "metrics.jsonl", lines);
  write_text(dir / "summary.json", summary.dump(1) + "\n");
  if (args.write_latents) {
    EmbeddingStore latents(cfg.latent_dim);
    for (std::size_t i = 0; i < result.latents.size(); ++i) {
      latents.add({"frame:" + std::to_string(result.frames[i].frame_index), Modality::kBlend, result.latents[i],
                   "latent snapshot"});
    }
    write_text(dir / "latents.json", store_to_json(latents));
  }
  std::cout << "frames " << result.frames.size() << ", mean cosine " << mean_cos << ", total l1 drift " << drift
            << ", wall time " << wall << " s\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"cadence: music + lyrics to a guided video-generation plan"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* a = app.add_subcommand("analyze", "Onset envelope, tempo, beats and segments of a WAV file");
  a->add_option("--audio", analyze.audio, "Input WAV")->required();
  a->add_option("--out", analyze.out, "Analysis JSON output")->required();
  a->add_option("--min-segment", analyze.min_segment_s, "Shortest segment in seconds");
  a->add_option("--tightness", analyze.tightness, "Beat tracker tightness");
  a->add_option("--bpm-prior", analyze.bpm_prior, "Tempo prior center");

  PlanArgs plan;
  auto* p = app.add_subcommand("plan", "Compile a frame plan from audio, lyrics and embeddings");
  p->add_option("--audio", plan.audio, "Input WAV")->required();
  p->add_option("--lyrics", plan.lyrics, "LRC lyrics");
  p->add_option("--embeddings", plan.embeddings, "Embedding manifest JSON");
  p->add_option("--out", plan.out, "Plan JSON output")->required();
  p->add_option("--store-out", plan.store_out, "Companion embedding manifest (default <out>.embeddings.json)");
  p->add_option("--fps-min", plan.fps_min, "Frames per second at the quietest segment");
  p->add_option("--fps-max", plan.fps_max, "Frames per second at the loudest segment");
  p->add_option("--mode", plan.mode, "segment-locked | alternating");
  p->add_option("--blend-scope", plan.blend_scope, "full | first:K | none");
  p->add_option("--seed", plan.seed, "Seed for derived embeddings")->required();
  p->add_option("--dim", plan.dim, "Dimension of derived embeddings without a manifest");

  VizArgs viz;
  auto* v = app.add_subcommand("viz", "Render a plan as an SVG timeline");
  v->add_option("--plan", viz.plan, "Plan JSON")->required();
  v->add_option("--embeddings", viz.embeddings, "Embedding manifest for modality colors");
  v->add_option("--out", viz.out, "SVG output")->required();

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run a plan through the stub optimization backend");
  s->add_option("--plan", sim.plan, "Plan JSON")->required();
  s->add_option("--embeddings", sim.embeddings, "Embedding manifest")->required();
  s->add_option("--out", sim.out, "Output directory")->required();
  s->add_option("--lambda-l1", sim.lambda_l1, "Weight of the L1 latent drift penalty");
  s->add_option("--lr", sim.lr, "Learning rate");
  s->add_option("--iters-per-frame", sim.iters_per_frame, "Optimization steps per frame");
  s->add_option("--seed", sim.seed, "Run seed")->required();
  s->add_option("--latent-dim", sim.latent_dim, "Latent dimension (default 2 x embedding dim)");
  s->add_option("--image-dim", sim.image_dim, "Stub image dimension (default 2 x embedding dim)");
  s->add_option("--init-std", sim.init_std, "Standard deviation of the initial latent");
  s->add_flag("--check-grad", sim.check_grad, "Run the finite-difference gradient check first");
  s->add_flag("--latents", sim.write_latents, "Also write per-frame latent snapshots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*a) return cmd_analyze(analyze);
    if (*p) return cmd_plan(plan);
    if (*v) return cmd_viz(viz);
    if (*s) return cmd_simulate(sim);
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInsufficient;
  } catch (const DecodeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const UnsupportedFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kOk;
}
