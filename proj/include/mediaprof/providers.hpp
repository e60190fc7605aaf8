#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mediaprof/errors.hpp"
#include "mediaprof/vtt.hpp"

namespace mediaprof {

constexpr int kEncoderTokenLimit = 510;
constexpr int kEmbeddingDim = 768;

struct EmbeddingRequest {
    std::string encoder_id;
    std::string text;
    int max_tokens = kEncoderTokenLimit;
};

struct EmbeddingResponse {
    std::vector<double> embedding;
    std::optional<std::vector<double>> posterior;
};

// External text encoder behind a fixed dimension contract. Task-tuned
// encoders additionally return class posteriors.
class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    virtual EmbeddingResponse encode(const EmbeddingRequest& request) const = 0;
    virtual std::string id() const = 0;
    virtual int dim() const = 0;
    virtual int posterior_classes() const { return 0; } // 0: plain encoder
};

// External linguistic-feature toolkit behind a dimension contract; the same
// provider backs the article set and the video title/description set, which
// carry different contract dims.
class NelaProvider {
public:
    virtual ~NelaProvider() = default;
    virtual std::vector<double> features(const std::string& text, int dim) const = 0;
};

struct Episode; // features.hpp

// External acoustic toolkit: low-level descriptors per speech episode.
class AcousticProvider {
public:
    virtual ~AcousticProvider() = default;
    virtual std::vector<double> lld(const std::string& video_id, std::int64_t start_ms,
                                    std::int64_t end_ms) const = 0;
    virtual int dim() const = 0;
};

// ---------------------------------------------------------------- builtin
// Deterministic hashed-feature providers. They satisfy every contract
// (dimensions, finiteness, posterior normalization) without any external
// service, which makes the whole pipeline runnable offline; they carry no
// semantic signal.

std::unique_ptr<TextEncoder> make_hashing_encoder(const std::string& id, int dim = kEmbeddingDim,
                                                  int posterior_classes = 0);
std::unique_ptr<NelaProvider> make_hashing_nela();
std::unique_ptr<AcousticProvider> make_hashing_acoustic(int dim = 385);

// ---------------------------------------------------------------- cached
// File-backed providers reading batch caches (JSON-lines of
// {"key": ..., "embedding"/"vector": [...], "posterior": [...]}) keyed by
// content hash. Missing keys raise NotFoundError.

std::string embedding_cache_key(const std::string& encoder_id, const std::string& text);
std::string nela_cache_key(int dim, const std::string& text);
std::string lld_cache_key(const std::string& video_id, std::int64_t start_ms, std::int64_t end_ms);

std::unique_ptr<TextEncoder> make_cached_encoder(const std::string& id,
                                                 const std::filesystem::path& cache_file,
                                                 int dim = kEmbeddingDim, int posterior_classes = 0);
std::unique_ptr<NelaProvider> make_cached_nela(const std::filesystem::path& cache_file);
std::unique_ptr<AcousticProvider> make_cached_acoustic(const std::filesystem::path& cache_file,
                                                       int dim = 385);

// ---------------------------------------------------------------- http
// POST {base_url}/embed with {"encoder_id","text"}; response mirrors
// EmbeddingResponse. NELA and LLD use /nela and /lld.

struct ProviderHttpOptions {
    std::string base_url;
    int retries = 2;
    int backoff_ms = 200;
};

std::unique_ptr<TextEncoder> make_http_encoder(const std::string& id, const ProviderHttpOptions& opts,
                                               int dim = kEmbeddingDim, int posterior_classes = 0);

// The provider bundle featurization runs against.
struct ProviderSet {
    std::shared_ptr<TextEncoder> document;  // pre-trained document encoder
    std::shared_ptr<TextEncoder> sentence;  // sentence encoder
    std::shared_ptr<TextEncoder> article;   // task-tuned article encoder with posterior head
    std::shared_ptr<NelaProvider> nela;
    std::shared_ptr<AcousticProvider> acoustic;

    // Hash-backed set for demos and tests; article head with `classes` outputs.
    static ProviderSet hashing(int article_classes = 3);
};

} // namespace mediaprof
