#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cadence/embed.hpp"
#include "cadence/schedule.hpp"

namespace cadence {

/// Generator + image encoder behind the optimization loop.
///
/// encode() must return a unit vector and every method must be
/// deterministic. Implementations are expected to be safe for concurrent
/// read-only use unless documented otherwise.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::size_t latent_dim() const = 0;
  virtual std::size_t image_dim() const = 0;
  virtual std::size_t embed_dim() const = 0;

  virtual std::vector<double> render(std::span<const double> z) const = 0;
  virtual std::vector<double> encode(std::span<const double> image) const = 0;
  /// Gradient with respect to z of 1 - cosine(encode(render(z)), g).
  virtual std::vector<double> gradient(std::span<const double> z, std::span<const double> g) const = 0;
};

/// render(z) = A z, encode(x) = B x / ||B x|| with seed-derived A (P x M) and
/// B (D x P), entries uniform in [-1, 1) scaled by 1/sqrt(columns). The zero
/// image encodes to e_1. The gradient is the closed form of the composition.
class StubBackend final : public Backend {
 public:
  StubBackend(std::size_t latent_dim, std::size_t image_dim, std::size_t embed_dim, std::uint64_t seed);

  std::size_t latent_dim() const override { return m_; }
  std::size_t image_dim() const override { return p_; }
  std::size_t embed_dim() const override { return d_; }

  std::vector<double> render(std::span<const double> z) const override;
  std::vector<double> encode(std::span<const double> image) const override;
  std::vector<double> gradient(std::span<const double> z, std::span<const double> g) const override;

  const std::vector<double>& render_matrix() const { return a_; }
  const std::vector<double>& encode_matrix() const { return b_; }

 private:
  std::size_t m_, p_, d_;
  std::vector<double> a_;  // P x M, row-major
  std::vector<double> b_;  // D x P, row-major
  std::vector<double> c_;  // B A, D x M, row-major
};

std::unique_ptr<Backend> make_stub_backend(std::size_t latent_dim, std::size_t image_dim,
                                           std::size_t embed_dim, std::uint64_t seed);

struct StepConfig {
  double learning_rate = 0.1;
  int iterations_per_frame = 1;
  double lambda_l1 = 0.0;
  std::uint64_t seed = 0;
  std::size_t latent_dim = 64;
  /// Standard deviation of the initial latent draw.
  double init_std = 1.0;
};

/// Throws ConfigError when any StepConfig invariant fails.
void validate_config(const StepConfig& cfg);

struct LatentState {
  std::vector<double> z;
  std::size_t frame_index = 0;
};

struct FrameResult {
  std::size_t frame_index = 0;
  double final_loss = 0.0;
  double cosine_to_guidance = 0.0;
  double l1_drift = 0.0;
  double wall_time_s = 0.0;
};

double l1_distance(std::span<const double> a, std::span<const double> b);

/// cosine(encode(render(z)), g / ||g||).
double guidance_cosine(std::span<const double> z, std::span<const double> g, const Backend& backend);

/// (1 - cosine(encode(render(z)), g)) + lambda_l1 * ||z - z_prev||_1.
/// Throws NumericError when any intermediate is non-finite.
double loss(std::span<const double> z, std::span<const double> g, std::span<const double> z_prev,
            double lambda_l1, const Backend& backend);

struct StepResult {
  double loss = 0.0;    // after the update
  double cosine = 0.0;  // after the update
};

/// One gradient-descent update z <- z - lr * (grad_cos + lambda * sign(z - z_prev)),
/// sign(0) = 0.
StepResult step(LatentState& state, std::span<const double> g, std::span<const double> z_prev,
                const StepConfig& cfg, const Backend& backend);

/// Unit guidance vector of a plan entry: normalize(sum weight_i * g_i).
std::vector<double> resolve_guidance(const PlanEntry& entry, const EmbeddingStore& store);

/// i.i.d. normal latent (std cfg.init_std) drawn from cfg.seed.
std::vector<double> initial_latent(const StepConfig& cfg);

struct RunResult {
  std::vector<FrameResult> frames;
  std::vector<std::vector<double>> latents;  // final z of every frame
};

/// Runs every plan entry in order for iterations_per_frame steps. z carries
/// across frames; the L1 anchor is the previous frame's final latent (the
/// initial draw for frame 0). Validates the plan against the store before
/// any step and throws CompileError listing the violations.
RunResult run_plan(const Plan& plan, const EmbeddingStore& store, const Backend& backend,
                   const StepConfig& cfg);

/// Central-difference check of backend.gradient against the lambda = 0 loss.
/// Returns max_i |a_i - n_i| / max(|a_i|, |n_i|, 1e-12).
double finite_diff_check(const Backend& backend, std::span<const double> z, std::span<const double> g,
                         double h = 1e-5);

}  // namespace cadence
