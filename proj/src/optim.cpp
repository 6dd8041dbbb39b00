#include "cadence/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "cadence/error.hpp"
#include "cadence/rng.hpp"

namespace cadence {

namespace {

std::vector<double> random_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng) {
  std::vector<double> m(rows * cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (double& v : m) v = rng.symmetric() * scale;
  return m;
}

// y = M x with M rows x cols, row-major.
std::vector<double> matvec(const std::vector<double>& m, std::size_t rows, std::size_t cols,
                           std::span<const double> x) {
  std::vector<double> y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

double norm2(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string("non-finite value in ") + what);
  }
}

// 1 - u.g computed as ||u - g||^2 / 2, which is exact algebra for unit u, g
// and keeps full relative precision near the optimum.
double cosine_loss(std::span<const double> u, std::span<const double> g) {
  double sq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - g[i];
    sq += d * d;
  }
  return 0.5 * sq;
}

}  // namespace

StubBackend::StubBackend(std::size_t latent_dim, std::size_t image_dim, std::size_t embed_dim,
                         std::uint64_t seed)
    : m_(latent_dim), p_(image_dim), d_(embed_dim) {
  if (m_ == 0 || p_ == 0 || d_ == 0) throw ArgumentError("stub backend dimensions must be positive");
  SplitMix64 rng(derive_seed(seed, 'b'));
  a_ = random_matrix(p_, m_, rng);
  b_ = random_matrix(d_, p_, rng);
  c_.assign(d_ * m_, 0.0);
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t k = 0; k < p_; ++k) {
      const double bik = b_[i * p_ + k];
      const double* arow = a_.data() + k * m_;
      double* crow = c_.data() + i * m_;
      for (std::size_t j = 0; j < m_; ++j) crow[j] += bik * arow[j];
    }
  }
}

std::vector<double> StubBackend::render(std::span<const double> z) const {
  if (z.size() != m_) throw ArgumentError("latent has the wrong dimension");
  return matvec(a_, p_, m_, z);
}

std::vector<double> StubBackend::encode(std::span<const double> image) const {
  if (image.size() != p_) throw ArgumentError("image has the wrong dimension");
  auto y = matvec(b_, d_, p_, image);
  const double n = norm2(y);
  if (!(n > 0.0)) {
    std::vector<double> e1(d_, 0.0);
    e1[0] = 1.0;
    return e1;
  }
  for (double& v : y) v /= n;
  return y;
}

std::vector<double> StubBackend::gradient(std::span<const double> z, std::span<const double> g) const {
  if (z.size() != m_ || g.size() != d_) throw ArgumentError("gradient arguments have the wrong dimension");
  const auto y = matvec(c_, d_, m_, z);
  const double n = norm2(y);
  std::vector<double> grad(m_, 0.0);
  if (!(n > 0.0)) return grad;

  const double gn = norm2(g);
  double ug = 0.0;
  for (std::size_t i = 0; i < d_; ++i) ug += y[i] / n * g[i] / gn;
  // d/dy (1 - u.g) = -(g - (u.g) u) / ||y||
  std::vector<double> dy(d_);
  for (std::size_t i = 0; i < d_; ++i) dy[i] = -(g[i] / gn - ug * y[i] / n) / n;
  for (std::size_t i = 0; i < d_; ++i) {
    const double* crow = c_.data() + i * m_;
    for (std::size_t j = 0; j < m_; ++j) grad[j] += crow[j] * dy[i];
  }
  return grad;
}

std::unique_ptr<Backend> make_stub_backend(std::size_t latent_dim, std::size_t image_dim,
                                           std::size_t embed_dim, std::uint64_t seed) {
  return std::make_unique<StubBackend>(latent_dim, image_dim, embed_dim, seed);
}

void validate_config(const StepConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (cfg.iterations_per_frame < 1) throw ConfigError("iterations per frame must be at least 1");
  if (!(cfg.lambda_l1 >= 0.0) || !std::isfinite(cfg.lambda_l1)) throw ConfigError("lambda_l1 must be >= 0");
  if (cfg.latent_dim == 0) throw ConfigError("latent dimension must be positive");
  if (!(cfg.init_std > 0.0) || !std::isfinite(cfg.init_std)) throw ConfigError("init_std must be positive");
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("l1 distance of vectors with different dimensions");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

double guidance_cosine(std::span<const double> z, std::span<const double> g, const Backend& backend) {
  const auto u = backend.encode(backend.render(z));
  const auto gu = normalized(g);
  return cosine(u, gu);
}

double loss(std::span<const double> z, std::span<const double> g, std::span<const double> z_prev,
            double lambda_l1, const Backend& backend) {
  if (g.size() != backend.embed_dim()) throw ArgumentError("guidance has the wrong dimension");
  const auto image = backend.render(z);
  require_finite(image, "rendered image");
  const auto u = backend.encode(image);
  require_finite(u, "image encoding");
  require_finite(g, "guidance");
  const auto gu = normalized(g);
  double value = cosine_loss(u, gu);
  if (lambda_l1 != 0.0) value += lambda_l1 * l1_distance(z, z_prev);
  if (!std::isfinite(value)) throw NumericError("non-finite loss");
  return value;
}

StepResult step(LatentState& state, std::span<const double> g, std::span<const double> z_prev,
                const StepConfig& cfg, const Backend& backend) {
  const auto grad = backend.gradient(state.z, g);
  require_finite(grad, "gradient");
  for (std::size_t i = 0; i < state.z.size(); ++i) {
    double gi = grad[i];
    if (cfg.lambda_l1 != 0.0) {
      const double d = state.z[i] - z_prev[i];
      gi += cfg.lambda_l1 * static_cast<double>((d > 0.0) - (d < 0.0));
    }
    state.z[i] -= cfg.learning_rate * gi;
  }
  require_finite(state.z, "latent");
  StepResult r;
  r.loss = loss(state.z, g, z_prev, cfg.lambda_l1, backend);
  r.cosine = guidance_cosine(state.z, g, backend);
  return r;
}

std::vector<double> resolve_guidance(const PlanEntry& entry, const EmbeddingStore& store) {
  std::vector<double> g(store.dim(), 0.0);
  for (const auto& term : entry.guidance) {
    const auto& v = store.at(term.id).vector;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += term.weight * v[i];
  }
  return normalized(g);
}

std::vector<double> initial_latent(const StepConfig& cfg) {
  SplitMix64 rng(derive_seed(cfg.seed, 'z'));
  std::vector<double> z(cfg.latent_dim);
  for (double& v : z) v = cfg.init_std * rng.normal();
  return z;
}

RunResult run_plan(const Plan& plan, const EmbeddingStore& store, const Backend& backend,
                   const StepConfig& cfg) {
  validate_config(cfg);
  if (cfg.latent_dim != backend.latent_dim()) throw ConfigError("latent dimension disagrees with backend");
  if (store.dim() != backend.embed_dim()) throw ConfigError("embedding dimension disagrees with backend");
  const auto violations = validate_plan(plan, store);
  if (!violations.empty()) {
    std::string msg = "plan does not validate against the embedding store:";
    for (const auto& v : violations) msg += "\n  " + to_string(v);
    throw CompileError(msg);
  }

  std::vector<std::vector<double>> targets;
  targets.reserve(plan.entries.size());
  for (const auto& e : plan.entries) targets.push_back(resolve_guidance(e, store));

  RunResult out;
  LatentState state{initial_latent(cfg), 0};
  for (std::size_t f = 0; f < plan.entries.size(); ++f) {
    const auto started = std::chrono::steady_clock::now();
    const std::vector<double> anchor = state.z;
    state.frame_index = plan.entries[f].frame_index;
    StepResult last;
    for (int it = 0; it < cfg.iterations_per_frame; ++it) {
      try {
        last = step(state, targets[f], anchor, cfg, backend);
      } catch (const NumericError& ex) {
        throw NumericError("frame " + std::to_string(f) + ": " + ex.what());
      }
    }
    FrameResult r;
    r.frame_index = plan.entries[f].frame_index;
    r.final_loss = last.loss;
    r.cosine_to_guidance = last.cosine;
    r.l1_drift = l1_distance(state.z, anchor);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out.frames.push_back(r);
    out.latents.push_back(state.z);
  }
  return out;
}

double finite_diff_check(const Backend& backend, std::span<const double> z, std::span<const double> g,
                         double h) {
  if (!(h > 0.0)) throw ArgumentError("finite-difference step must be positive");
  const auto analytic = backend.gradient(z, g);
  std::vector<double> probe(z.begin(), z.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = loss(probe, g, probe, 0.0, backend);
    probe[i] = orig - h;
    const double down = loss(probe, g, probe, 0.0, backend);
    probe[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace cadence
