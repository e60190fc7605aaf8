#include "mediaprof/providers.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "mediaprof/util.hpp"

namespace mediaprof {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- hashing

// Token-hashed bag of features: deterministic, roughly unit-scale, zero for
// empty text.
std::vector<double> hashed_vector(const std::string& salt, const std::string& text, int dim) {
    std::vector<double> v(dim, 0.0);
    const auto tokens = tokenize(text);
    if (tokens.empty()) return v;
    for (const auto& tok : tokens) {
        const std::uint64_t h = fnv1a64(tok, fnv1a64(salt));
        const std::size_t slot = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim));
        const double val = static_cast<double>((h >> 32) & 0xffff) / 65535.0 - 0.5;
        v[slot] += val;
    }
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (double& x : v) x *= inv;
    return v;
}

std::vector<double> softmax(const std::vector<double>& z) {
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    std::vector<double> out(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

class HashingEncoder : public TextEncoder {
public:
    HashingEncoder(std::string id, int dim, int classes)
        : id_(std::move(id)), dim_(dim), classes_(classes) {}

    EmbeddingResponse encode(const EmbeddingRequest& request) const override {
        EmbeddingResponse resp;
        resp.embedding = hashed_vector(id_, request.text, dim_);
        if (classes_ > 0) {
            if (tokenize(request.text).empty()) {
                resp.posterior = std::vector<double>(classes_, 1.0 / classes_);
            } else {
                std::vector<double> logits(classes_);
                for (int c = 0; c < classes_; ++c) {
                    const std::uint64_t h =
                        fnv1a64(request.text, fnv1a64(id_ + "#head" + std::to_string(c)));
                    logits[c] = static_cast<double>(h % 1000) / 250.0;
                }
                resp.posterior = softmax(logits);
            }
        }
        return resp;
    }

    std::string id() const override { return id_; }
    int dim() const override { return dim_; }
    int posterior_classes() const override { return classes_; }

private:
    std::string id_;
    int dim_;
    int classes_;
};

class HashingNela : public NelaProvider {
public:
    std::vector<double> features(const std::string& text, int dim) const override {
        return hashed_vector("nela" + std::to_string(dim), text, dim);
    }
};

class HashingAcoustic : public AcousticProvider {
public:
    explicit HashingAcoustic(int dim) : dim_(dim) {}

    std::vector<double> lld(const std::string& video_id, std::int64_t start_ms,
                            std::int64_t end_ms) const override {
        const std::string key =
            video_id + ":" + std::to_string(start_ms) + "-" + std::to_string(end_ms);
        std::vector<double> v(dim_);
        for (int i = 0; i < dim_; ++i) {
            const std::uint64_t h = fnv1a64(key, fnv1a64("lld" + std::to_string(i)));
            v[i] = static_cast<double>(h % 20001) / 10000.0 - 1.0;
        }
        return v;
    }

    int dim() const override { return dim_; }

private:
    int dim_;
};

// ---------------------------------------------------------------- cached

struct CacheEntry {
    std::vector<double> vec;
    std::optional<std::vector<double>> posterior;
};

std::unordered_map<std::string, CacheEntry> load_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open provider cache: " + path.string());
    std::unordered_map<std::string, CacheEntry> out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("provider cache " + path.string() + ": " + e.what(), lineno);
        }
        CacheEntry e;
        if (j.contains("embedding")) e.vec = j["embedding"].get<std::vector<double>>();
        else e.vec = j.at("vector").get<std::vector<double>>();
        if (j.contains("posterior")) e.posterior = j["posterior"].get<std::vector<double>>();
        out[j.at("key").get<std::string>()] = std::move(e);
    }
    return out;
}

class CachedEncoder : public TextEncoder {
public:
    CachedEncoder(std::string id, const std::filesystem::path& path, int dim, int classes)
        : id_(std::move(id)), cache_(load_cache(path)), dim_(dim), classes_(classes),
          path_(path.string()) {}

    EmbeddingResponse encode(const EmbeddingRequest& request) const override {
        const std::string key = embedding_cache_key(id_, request.text);
        auto it = cache_.find(key);
        if (it == cache_.end())
            throw NotFoundError("no cached embedding for key " + key + " (encoder " + id_ +
                                ") in " + path_);
        return {it->second.vec, it->second.posterior};
    }

    std::string id() const override { return id_; }
    int dim() const override { return dim_; }
    int posterior_classes() const override { return classes_; }

private:
    std::string id_;
    std::unordered_map<std::string, CacheEntry> cache_;
    int dim_;
    int classes_;
    std::string path_;
};

class CachedNela : public NelaProvider {
public:
    explicit CachedNela(const std::filesystem::path& path)
        : cache_(load_cache(path)), path_(path.string()) {}

    std::vector<double> features(const std::string& text, int dim) const override {
        const std::string key = nela_cache_key(dim, text);
        auto it = cache_.find(key);
        if (it == cache_.end())
            throw NotFoundError("no cached nela vector for key " + key + " in " + path_);
        return it->second.vec;
    }

private:
    std::unordered_map<std::string, CacheEntry> cache_;
    std::string path_;
};

class CachedAcoustic : public AcousticProvider {
public:
    CachedAcoustic(const std::filesystem::path& path, int dim)
        : cache_(load_cache(path)), dim_(dim), path_(path.string()) {}

    std::vector<double> lld(const std::string& video_id, std::int64_t start_ms,
                            std::int64_t end_ms) const override {
        const std::string key = lld_cache_key(video_id, start_ms, end_ms);
        auto it = cache_.find(key);
        if (it == cache_.end())
            throw NotFoundError("no cached lld vector for key " + key + " in " + path_);
        return it->second.vec;
    }

    int dim() const override { return dim_; }

private:
    std::unordered_map<std::string, CacheEntry> cache_;
    int dim_;
    std::string path_;
};

// ---------------------------------------------------------------- http

class HttpEncoder : public TextEncoder {
public:
    HttpEncoder(std::string id, ProviderHttpOptions opts, int dim, int classes)
        : id_(std::move(id)), opts_(std::move(opts)), dim_(dim), classes_(classes) {}

    EmbeddingResponse encode(const EmbeddingRequest& request) const override {
        std::string host = opts_.base_url;
        if (host.rfind("http://", 0) == 0) host = host.substr(7);
        while (!host.empty() && host.back() == '/') host.pop_back();
        const json body{{"encoder_id", id_}, {"text", request.text}};
        std::string last_error;
        for (int attempt = 0; attempt <= opts_.retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(opts_.backoff_ms * attempt));
            httplib::Client client(host);
            client.set_connection_timeout(5, 0);
            auto res = client.Post("/embed", body.dump(), "application/json");
            if (!res) {
                last_error = "connection failed to " + host + "/embed";
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw NetworkError("embedding provider returned status " +
                                   std::to_string(res->status));
            try {
                const json j = json::parse(res->body);
                EmbeddingResponse resp;
                resp.embedding = j.at("embedding").get<std::vector<double>>();
                if (j.contains("posterior") && !j["posterior"].is_null())
                    resp.posterior = j["posterior"].get<std::vector<double>>();
                return resp;
            } catch (const json::exception& e) {
                throw ParseError(std::string("embedding provider response: ") + e.what());
            }
        }
        throw NetworkError(last_error + " after " + std::to_string(opts_.retries + 1) +
                           " attempts");
    }

    std::string id() const override { return id_; }
    int dim() const override { return dim_; }
    int posterior_classes() const override { return classes_; }

private:
    std::string id_;
    ProviderHttpOptions opts_;
    int dim_;
    int classes_;
};

} // namespace

std::string embedding_cache_key(const std::string& encoder_id, const std::string& text) {
    return content_key(encoder_id + "\x1f" + text);
}

std::string nela_cache_key(int dim, const std::string& text) {
    return content_key("nela" + std::to_string(dim) + "\x1f" + text);
}

std::string lld_cache_key(const std::string& video_id, std::int64_t start_ms,
                          std::int64_t end_ms) {
    return content_key("lld\x1f" + video_id + "\x1f" + std::to_string(start_ms) + "-" +
                       std::to_string(end_ms));
}

std::unique_ptr<TextEncoder> make_hashing_encoder(const std::string& id, int dim,
                                                  int posterior_classes) {
    return std::make_unique<HashingEncoder>(id, dim, posterior_classes);
}

std::unique_ptr<NelaProvider> make_hashing_nela() { return std::make_unique<HashingNela>(); }

std::unique_ptr<AcousticProvider> make_hashing_acoustic(int dim) {
    return std::make_unique<HashingAcoustic>(dim);
}

std::unique_ptr<TextEncoder> make_cached_encoder(const std::string& id,
                                                 const std::filesystem::path& cache_file, int dim,
                                                 int posterior_classes) {
    return std::make_unique<CachedEncoder>(id, cache_file, dim, posterior_classes);
}

std::unique_ptr<NelaProvider> make_cached_nela(const std::filesystem::path& cache_file) {
    return std::make_unique<CachedNela>(cache_file);
}

std::unique_ptr<AcousticProvider> make_cached_acoustic(const std::filesystem::path& cache_file,
                                                       int dim) {
    return std::make_unique<CachedAcoustic>(cache_file, dim);
}

std::unique_ptr<TextEncoder> make_http_encoder(const std::string& id,
                                               const ProviderHttpOptions& opts, int dim,
                                               int posterior_classes) {
    return std::make_unique<HttpEncoder>(id, opts, dim, posterior_classes);
}

ProviderSet ProviderSet::hashing(int article_classes) {
    ProviderSet s;
    s.document = make_hashing_encoder("doc-enc");
    s.sentence = make_hashing_encoder("sent-enc");
    s.article = make_hashing_encoder("article-enc", kEmbeddingDim, article_classes);
    s.nela = make_hashing_nela();
    s.acoustic = make_hashing_acoustic();
    return s;
}

} // namespace mediaprof
