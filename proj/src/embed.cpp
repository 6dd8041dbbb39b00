#include "cadence/embed.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cadence/error.hpp"
#include "cadence/rng.hpp"

namespace cadence {

using nlohmann::json;

namespace {

std::vector<double> project(std::span<const double> features, std::size_t dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> out(dim, 0.0);
  for (std::size_t d = 0; d < dim; ++d) {
    double acc = 0.0;
    for (double f : features) acc += rng.symmetric() * f;
    out[d] = acc;
  }
  return out;
}

}  // namespace

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::kText:
      return "text";
    case Modality::kAudio:
      return "audio";
    case Modality::kBlend:
      return "blend";
  }
  return "text";
}

std::optional<Modality> modality_from_string(std::string_view s) {
  if (s == "text") return Modality::kText;
  if (s == "audio") return Modality::kAudio;
  if (s == "blend") return Modality::kBlend;
  return std::nullopt;
}

const PromptEmbedding* EmbeddingStore::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &items_[it->second];
}

const PromptEmbedding& EmbeddingStore::at(std::string_view id) const {
  if (const auto* e = find(id)) return *e;
  throw ArgumentError("unknown embedding id '" + std::string(id) + "'");
}

void EmbeddingStore::add(PromptEmbedding e) {
  if (e.id.empty()) throw LoadError("embedding with empty id");
  if (index_.contains(e.id)) throw LoadError("duplicate embedding id '" + e.id + "'");
  if (e.vector.size() != dim_) {
    throw LoadError("embedding '" + e.id + "' has dimension " + std::to_string(e.vector.size()) +
                    ", store dimension is " + std::to_string(dim_));
  }
  double sq = 0.0;
  for (double v : e.vector) {
    if (!std::isfinite(v)) throw LoadError("embedding '" + e.id + "' has a non-finite component");
    sq += v * v;
  }
  if (!(sq > 0.0)) throw LoadError("embedding '" + e.id + "' is the zero vector");
  // Vectors already unit length to rounding are kept as is so that a saved
  // store reloads bit for bit.
  if (std::abs(sq - 1.0) > 8.0 * std::numeric_limits<double>::epsilon()) e.vector = normalized(e.vector);
  index_.emplace(e.id, items_.size());
  items_.push_back(std::move(e));
}

EmbeddingStore parse_store(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw LoadError(std::string("embedding manifest is not valid JSON: ") + ex.what());
  }
  if (!doc.is_object() || !doc.contains("dim") || !doc["dim"].is_number_unsigned()) {
    throw LoadError("embedding manifest needs an unsigned integer 'dim'");
  }
  const auto dim = doc["dim"].get<std::size_t>();
  if (dim == 0) throw LoadError("embedding manifest 'dim' must be positive");
  EmbeddingStore store(dim);
  if (!doc.contains("embeddings")) return store;
  if (!doc["embeddings"].is_array()) throw LoadError("'embeddings' must be an array");

  std::size_t pos = 0;
  for (const auto& item : doc["embeddings"]) {
    const std::string where = "embeddings[" + std::to_string(pos++) + "]";
    if (!item.is_object() || !item.contains("id") || !item["id"].is_string()) {
      throw LoadError(where + " lacks a string 'id'");
    }
    PromptEmbedding e;
    e.id = item["id"].get<std::string>();
    const auto mod = item.value("modality", std::string());
    const auto parsed = modality_from_string(mod);
    if (!parsed) throw LoadError("embedding '" + e.id + "' has unknown modality '" + mod + "'");
    e.modality = *parsed;
    if (!item.contains("vector") || !item["vector"].is_array()) {
      throw LoadError("embedding '" + e.id + "' lacks a 'vector' array");
    }
    for (const auto& v : item["vector"]) {
      if (!v.is_number()) throw LoadError("embedding '" + e.id + "' has a non-numeric component");
      e.vector.push_back(v.get<double>());
    }
    e.source = item.value("source", std::string());
    store.add(std::move(e));
  }
  return store;
}

EmbeddingStore load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open embedding manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_store(ss.str());
}

std::string store_to_json(const EmbeddingStore& store) {
  json doc;
  doc["dim"] = store.dim();
  doc["embeddings"] = json::array();
  for (const auto& e : store.items()) {
    doc["embeddings"].push_back(
        {{"id", e.id}, {"modality", to_string(e.modality)}, {"vector", e.vector}, {"source", e.source}});
  }
  return doc.dump(1) + "\n";
}

void save_store(const std::filesystem::path& path, const EmbeddingStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << store_to_json(store);
}

std::vector<double> normalized(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ArgumentError("cannot normalize a zero or non-finite vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("cosine of vectors with different dimensions");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double cosine(const PromptEmbedding& a, const PromptEmbedding& b) { return cosine(a.vector, b.vector); }

PromptEmbedding blend(const PromptEmbedding& a, const PromptEmbedding& b) {
  if (a.vector.size() != b.vector.size()) throw ArgumentError("blend of vectors with different dimensions");
  std::vector<double> mid(a.vector.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = (a.vector[i] + b.vector[i]) / 2.0;
  double sq = 0.0;
  for (double x : mid) sq += x * x;
  if (!(sq > 0.0)) {
    throw ArgumentError("degenerate blend of '" + a.id + "' and '" + b.id + "' (opposite vectors)");
  }
  PromptEmbedding out;
  out.id = "blend(" + a.id + "," + b.id + ")";
  out.modality = Modality::kBlend;
  out.vector = normalized(mid);
  out.source = "blend";
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

PromptEmbedding stub_text_embedding(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ArgumentError("embedding dimension must be positive");
  std::vector<double> features(kTextFeatureBuckets + 1, 0.0);
  for (std::size_t i = 0; i < text.size(); ++i) {
    for (std::size_t n = 1; n <= 3 && i + n <= text.size(); ++n) {
      const std::uint64_t h = fnv1a64(text.substr(i, n));
      features[h % kTextFeatureBuckets] += (h >> 63) ? -1.0 : 1.0;
    }
  }
  features.back() = 1.0;

  PromptEmbedding e;
  e.id = "lyric:" + std::string(text);
  e.modality = Modality::kText;
  e.vector = normalized(project(features, dim, seed));
  e.source = "stub-text seed=" + std::to_string(seed);
  return e;
}

PromptEmbedding stub_audio_embedding(std::span<const double> band_means_db, std::size_t dim,
                                     std::uint64_t seed) {
  if (dim == 0) throw ArgumentError("embedding dimension must be positive");
  std::vector<double> features(band_means_db.begin(), band_means_db.end());
  features.push_back(1.0);

  PromptEmbedding e;
  e.id = "audio";
  e.modality = Modality::kAudio;
  e.vector = normalized(project(features, dim, derive_seed(seed, 'a')));
  e.source = "stub-audio seed=" + std::to_string(seed);
  return e;
}

}  // namespace cadence
