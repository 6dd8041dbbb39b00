#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cadence {

enum class Modality { kText, kAudio, kBlend };

std::string_view to_string(Modality m);
std::optional<Modality> modality_from_string(std::string_view s);

/// A unit-norm guidance vector in the shared text/audio/image space.
struct PromptEmbedding {
  std::string id;
  Modality modality = Modality::kText;
  std::vector<double> vector;
  std::string source;
};

/// Immutable-after-load collection of embeddings sharing one dimension.
/// Iteration follows insertion order.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool contains(std::string_view id) const { return index_.contains(std::string(id)); }
  const PromptEmbedding* find(std::string_view id) const;
  const PromptEmbedding& at(std::string_view id) const;
  const std::vector<PromptEmbedding>& items() const noexcept { return items_; }

  /// Validates and inserts, normalizing the vector. Throws LoadError naming
  /// the id on duplicate id, dimension mismatch, non-finite or zero vector.
  void add(PromptEmbedding e);

 private:
  std::size_t dim_;
  std::vector<PromptEmbedding> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Parses a manifest {"dim": D, "embeddings": [{"id", "modality", "vector", "source"}]}.
EmbeddingStore parse_store(std::string_view json_text);
EmbeddingStore load_store(const std::filesystem::path& path);
std::string store_to_json(const EmbeddingStore& store);
void save_store(const std::filesystem::path& path, const EmbeddingStore& store);

/// v / ||v||_2. Throws ArgumentError for a zero or non-finite vector.
std::vector<double> normalized(std::span<const double> v);

/// Dot product of two unit vectors. Throws ArgumentError on dimension mismatch.
double cosine(const PromptEmbedding& a, const PromptEmbedding& b);
double cosine(std::span<const double> a, std::span<const double> b);

/// normalize((a + b) / 2), modality blend, id "blend(a.id,b.id)". Throws
/// ArgumentError when a = -b.
PromptEmbedding blend(const PromptEmbedding& a, const PromptEmbedding& b);

/// Number of hashed text-feature buckets used by stub_text_embedding.
inline constexpr std::size_t kTextFeatureBuckets = 64;

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);

/// Deterministic stand-in for a text encoder: byte 1/2/3-grams are hashed
/// (FNV-1a) into kTextFeatureBuckets signed buckets, a constant bias
/// feature is appended, and the result is multiplied by a D x 65 matrix of
/// uniform [-1, 1) entries drawn row-major from SplitMix64(seed), then
/// normalized.
PromptEmbedding stub_text_embedding(std::string_view text, std::size_t dim, std::uint64_t seed);

/// Deterministic stand-in for an audio encoder: the per-band mean dB vector
/// plus a bias feature, projected by a D x (bands + 1) uniform matrix drawn
/// from SplitMix64(derive_seed(seed, 'a')), then normalized.
PromptEmbedding stub_audio_embedding(std::span<const double> band_means_db, std::size_t dim,
                                     std::uint64_t seed);

}  // namespace cadence
