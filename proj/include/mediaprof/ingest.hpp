#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mediaprof/domain.hpp"
#include "mediaprof/errors.hpp"
#include "mediaprof/langid.hpp"
#include "mediaprof/vtt.hpp"

namespace mediaprof {

// ------------------------------------------------------------ raw records

struct ArticleRecord {
    std::string medium_id;
    std::string article_id;
    std::string title;
    std::string body_text;
    std::string fetched_at;

    nlohmann::json to_json() const;
    static ArticleRecord from_json(const nlohmann::json& j);
    bool operator==(const ArticleRecord&) const = default;
};

struct TwitterProfileRecord {
    std::string medium_id;
    bool exists = false;
    bool verified = false;
    std::optional<int> created_year;
    bool has_location = false;
    std::string description;
    std::int64_t followers_count = 0;
    std::int64_t friends_count = 0;
    std::int64_t statuses_count = 0;
    std::int64_t favourites_count = 0;
    std::int64_t listed_count = 0;
    bool has_url = false;
    bool default_profile = false;

    nlohmann::json to_json() const;
    static TwitterProfileRecord from_json(const nlohmann::json& j);
    bool operator==(const TwitterProfileRecord&) const = default;
};

struct FollowerBioRecord {
    std::string medium_id;
    std::string follower_id;
    std::string bio_text;
    std::string language; // ISO-639-1, filled by the language detector

    nlohmann::json to_json() const;
    static FollowerBioRecord from_json(const nlohmann::json& j);
    bool operator==(const FollowerBioRecord&) const = default;
};

struct YouTubeVideoRecord {
    std::string medium_id;
    std::string video_id;
    std::string title;
    std::string description;
    std::vector<std::string> tags;
    std::vector<CaptionCue> captions;
    std::int64_t views = 0;
    std::int64_t likes = 0;
    std::int64_t dislikes = 0;
    std::int64_t comments = 0;
    bool dislikes_stale = false; // absent from the API response, recorded as 0

    std::int64_t speech_ms() const { return total_cue_span_ms(captions); }
    nlohmann::json to_json() const;
    static YouTubeVideoRecord from_json(const nlohmann::json& j);
    bool operator==(const YouTubeVideoRecord&) const = default;
};

struct FacebookAudienceRecord {
    std::string medium_id;
    bool exists = false;
    std::int64_t very_conservative = 0;
    std::int64_t conservative = 0;
    std::int64_t moderate = 0;
    std::int64_t liberal = 0;
    std::int64_t very_liberal = 0;
    std::int64_t total_audience = 0;

    void validate() const; // buckets non-negative, none above the total
    nlohmann::json to_json() const;
    static FacebookAudienceRecord from_json(const nlohmann::json& j);
    bool operator==(const FacebookAudienceRecord&) const = default;
};

struct WikipediaPageRecord {
    std::string medium_id;
    bool exists = false;
    std::string page_text;

    nlohmann::json to_json() const;
    static WikipediaPageRecord from_json(const nlohmann::json& j);
    bool operator==(const WikipediaPageRecord&) const = default;
};

// List-shaped fetches carry an explicit missing-source flag; single-record
// sources carry `exists` instead.
template <typename T>
struct FetchResult {
    std::vector<T> records;
    bool source_missing = false;
};

// ------------------------------------------------------------ rate limiting

// Token bucket shared by the HTTP clients of one backend.
class RateLimiter {
public:
    RateLimiter(double capacity, double refill_per_second);
    void acquire(); // blocks until a token is available

private:
    double capacity_;
    double refill_per_second_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mutex_;
};

// ------------------------------------------------------------ source clients

constexpr int kDefaultFollowerCount = 5000;
constexpr int kDefaultMaxVideos = 25;
constexpr std::int64_t kMinSpeechMs = 15000;

class ArticleSource {
public:
    virtual ~ArticleSource() = default;
    virtual FetchResult<ArticleRecord> fetch(const MediumRecord& medium, int limit) = 0;
};

class TwitterSource {
public:
    virtual ~TwitterSource() = default;
    virtual TwitterProfileRecord profile(const MediumRecord& medium) = 0;
    virtual FetchResult<FollowerBioRecord> followers(const MediumRecord& medium,
                                                     int n = kDefaultFollowerCount) = 0;
};

class YouTubeSource {
public:
    virtual ~YouTubeSource() = default;
    virtual FetchResult<YouTubeVideoRecord> channel(const MediumRecord& medium,
                                                    int max_videos = kDefaultMaxVideos) = 0;
};

class FacebookSource {
public:
    virtual ~FacebookSource() = default;
    virtual FacebookAudienceRecord audience(const MediumRecord& medium) = 0;
};

class WikipediaSource {
public:
    virtual ~WikipediaSource() = default;
    virtual WikipediaPageRecord page(const MediumRecord& medium) = 0;
};

// Directory-backed clients; the test and demo backend. Layout:
//   <root>/articles/<medium_id>/<article_id>.json
//   <root>/twitter/<medium_id>/profile.json
//   <root>/twitter/<medium_id>/followers.jsonl
//   <root>/youtube/<medium_id>/<video_id>.json + <video_id>.vtt
//   <root>/facebook/<medium_id>/audience.json
//   <root>/wikipedia/<medium_id>/page.txt
class FixtureBackend {
public:
    FixtureBackend(std::filesystem::path root, std::shared_ptr<const LanguageDetector> detector);

    std::unique_ptr<ArticleSource> articles() const;
    std::unique_ptr<TwitterSource> twitter() const;
    std::unique_ptr<YouTubeSource> youtube() const;
    std::unique_ptr<FacebookSource> facebook() const;
    std::unique_ptr<WikipediaSource> wikipedia() const;

private:
    std::filesystem::path root_;
    std::shared_ptr<const LanguageDetector> detector_;
};

struct HttpBackendOptions {
    std::string base_url; // http://host:port
    std::string auth_token;
    int retries = 2;
    int backoff_ms = 200;
    double rate_capacity = 8;
    double rate_refill_per_second = 8;
};

// JSON-gateway clients: every source family is a GET returning JSON.
class HttpBackend {
public:
    HttpBackend(HttpBackendOptions opts, std::shared_ptr<const LanguageDetector> detector);

    std::unique_ptr<ArticleSource> articles() const;
    std::unique_ptr<TwitterSource> twitter() const;
    std::unique_ptr<YouTubeSource> youtube() const;
    std::unique_ptr<FacebookSource> facebook() const;
    std::unique_ptr<WikipediaSource> wikipedia() const;

private:
    std::shared_ptr<HttpBackendOptions> opts_;
    std::shared_ptr<RateLimiter> limiter_;
    std::shared_ptr<const LanguageDetector> detector_;
};

// All five source clients behind one handle.
struct IngestClients {
    std::unique_ptr<ArticleSource> articles;
    std::unique_ptr<TwitterSource> twitter;
    std::unique_ptr<YouTubeSource> youtube;
    std::unique_ptr<FacebookSource> facebook;
    std::unique_ptr<WikipediaSource> wikipedia;

    static IngestClients from_fixtures(const std::filesystem::path& root,
                                       std::shared_ptr<const LanguageDetector> detector = nullptr);
    static IngestClients from_http(const HttpBackendOptions& opts,
                                   std::shared_ptr<const LanguageDetector> detector = nullptr);
};

// ------------------------------------------------------------ raw store

// Content-addressed persistence for fetched records:
//   <root>/objects/<hash>.jsonl       one object per distinct content
//   <root>/refs/<source>/<medium_id>  hash of the current object
// Re-ingesting identical content is a no-op.
class RawStore {
public:
    explicit RawStore(std::filesystem::path root);

    std::filesystem::path put(const std::string& source, const std::string& medium_id,
                              const std::string& jsonl);
    std::optional<std::string> read(const std::string& source, const std::string& medium_id) const;
    bool has(const std::string& source, const std::string& medium_id) const;
    std::vector<std::string> media(const std::string& source) const;
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
};

// jsonl helpers for the record lists kept in the raw store
template <typename T>
std::string records_to_jsonl(const std::vector<T>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.to_json().dump();
        out += "\n";
    }
    return out;
}

template <typename T>
std::vector<T> records_from_jsonl(const std::string& text) {
    std::vector<T> out;
    std::size_t pos = 0;
    long lineno = 0;
    while (pos < text.size()) {
        std::size_t next = text.find('\n', pos);
        if (next == std::string::npos) next = text.size();
        ++lineno;
        std::string line = text.substr(pos, next - pos);
        pos = next + 1;
        if (line.empty()) continue;
        try {
            out.push_back(T::from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("raw record: ") + e.what(), lineno);
        }
    }
    return out;
}

} // namespace mediaprof
