#include "mediaprof/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include <httplib.h>

#include "mediaprof/util.hpp"

namespace mediaprof {

namespace fs = std::filesystem;
using nlohmann::json;

// ------------------------------------------------------------ record json

namespace {

std::int64_t non_negative(const json& j, const char* key, std::int64_t fallback = 0) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    const std::int64_t v = it->get<std::int64_t>();
    if (v < 0) throw ParseError(std::string(key) + " must be non-negative");
    return v;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, p);
}

} // namespace

json ArticleRecord::to_json() const {
    return {{"medium_id", medium_id},
            {"article_id", article_id},
            {"title", title},
            {"body_text", body_text},
            {"fetched_at", fetched_at}};
}

ArticleRecord ArticleRecord::from_json(const json& j) {
    ArticleRecord r;
    r.medium_id = j.value("medium_id", "");
    r.article_id = j.at("article_id").get<std::string>();
    r.title = j.value("title", "");
    r.body_text = j.at("body_text").get<std::string>();
    r.fetched_at = j.value("fetched_at", "");
    return r;
}

json TwitterProfileRecord::to_json() const {
    json j{{"medium_id", medium_id}, {"exists", exists}};
    if (!exists) return j;
    j["verified"] = verified;
    if (created_year) j["created_year"] = *created_year;
    j["has_location"] = has_location;
    j["description"] = description;
    j["followers_count"] = followers_count;
    j["friends_count"] = friends_count;
    j["statuses_count"] = statuses_count;
    j["favourites_count"] = favourites_count;
    j["listed_count"] = listed_count;
    j["has_url"] = has_url;
    j["default_profile"] = default_profile;
    return j;
}

TwitterProfileRecord TwitterProfileRecord::from_json(const json& j) {
    TwitterProfileRecord r;
    r.medium_id = j.value("medium_id", "");
    r.exists = j.value("exists", true);
    if (!r.exists) return r;
    r.verified = j.value("verified", false);
    if (auto it = j.find("created_year"); it != j.end() && !it->is_null())
        r.created_year = it->get<int>();
    r.has_location = j.value("has_location", false);
    r.description = j.value("description", "");
    r.followers_count = non_negative(j, "followers_count");
    r.friends_count = non_negative(j, "friends_count");
    r.statuses_count = non_negative(j, "statuses_count");
    r.favourites_count = non_negative(j, "favourites_count");
    r.listed_count = non_negative(j, "listed_count");
    r.has_url = j.value("has_url", false);
    r.default_profile = j.value("default_profile", false);
    return r;
}

json FollowerBioRecord::to_json() const {
    return {{"medium_id", medium_id},
            {"follower_id", follower_id},
            {"bio_text", bio_text},
            {"language", language}};
}

FollowerBioRecord FollowerBioRecord::from_json(const json& j) {
    FollowerBioRecord r;
    r.medium_id = j.value("medium_id", "");
    r.follower_id = j.at("follower_id").get<std::string>();
    r.bio_text = j.value("bio_text", "");
    r.language = j.value("language", "");
    return r;
}

json YouTubeVideoRecord::to_json() const {
    json cues = json::array();
    for (const auto& c : captions)
        cues.push_back({{"start_ms", c.start_ms}, {"end_ms", c.end_ms}, {"text", c.text}});
    return {{"medium_id", medium_id}, {"video_id", video_id},
            {"title", title},         {"description", description},
            {"tags", tags},           {"captions", cues},
            {"views", views},         {"likes", likes},
            {"dislikes", dislikes},   {"comments", comments},
            {"dislikes_stale", dislikes_stale}};
}

YouTubeVideoRecord YouTubeVideoRecord::from_json(const json& j) {
    YouTubeVideoRecord r;
    r.medium_id = j.value("medium_id", "");
    r.video_id = j.at("video_id").get<std::string>();
    r.title = j.value("title", "");
    r.description = j.value("description", "");
    if (auto it = j.find("tags"); it != j.end() && it->is_array())
        r.tags = it->get<std::vector<std::string>>();
    if (auto it = j.find("captions"); it != j.end() && it->is_array())
        for (const auto& c : *it)
            r.captions.push_back({c.at("start_ms").get<std::int64_t>(),
                                  c.at("end_ms").get<std::int64_t>(),
                                  c.value("text", "")});
    r.views = non_negative(j, "views");
    r.likes = non_negative(j, "likes");
    if (j.contains("dislikes") && !j["dislikes"].is_null()) {
        r.dislikes = non_negative(j, "dislikes");
    } else {
        r.dislikes = 0;
        r.dislikes_stale = true;
    }
    if (j.contains("dislikes_stale")) r.dislikes_stale = j["dislikes_stale"].get<bool>();
    r.comments = non_negative(j, "comments");
    validate_cues(r.captions);
    return r;
}

void FacebookAudienceRecord::validate() const {
    if (!exists) return;
    const std::int64_t buckets[] = {very_conservative, conservative, moderate, liberal,
                                    very_liberal};
    for (std::int64_t b : buckets) {
        if (b < 0) throw ValidationError("facebook audience: negative bucket");
        if (b > total_audience)
            throw ValidationError("facebook audience: bucket count exceeds total for '" +
                                  medium_id + "'");
    }
    if (total_audience < 0) throw ValidationError("facebook audience: negative total");
}

json FacebookAudienceRecord::to_json() const {
    json j{{"medium_id", medium_id}, {"exists", exists}};
    if (!exists) return j;
    j["very_conservative"] = very_conservative;
    j["conservative"] = conservative;
    j["moderate"] = moderate;
    j["liberal"] = liberal;
    j["very_liberal"] = very_liberal;
    j["total_audience"] = total_audience;
    return j;
}

FacebookAudienceRecord FacebookAudienceRecord::from_json(const json& j) {
    FacebookAudienceRecord r;
    r.medium_id = j.value("medium_id", "");
    r.exists = j.value("exists", true);
    if (!r.exists) return r;
    r.very_conservative = non_negative(j, "very_conservative");
    r.conservative = non_negative(j, "conservative");
    r.moderate = non_negative(j, "moderate");
    r.liberal = non_negative(j, "liberal");
    r.very_liberal = non_negative(j, "very_liberal");
    r.total_audience = non_negative(j, "total_audience");
    r.validate();
    return r;
}

json WikipediaPageRecord::to_json() const {
    json j{{"medium_id", medium_id}, {"exists", exists}};
    if (exists) j["page_text"] = page_text;
    return j;
}

WikipediaPageRecord WikipediaPageRecord::from_json(const json& j) {
    WikipediaPageRecord r;
    r.medium_id = j.value("medium_id", "");
    r.exists = j.value("exists", true);
    if (r.exists) {
        r.page_text = j.at("page_text").get<std::string>();
        if (r.page_text.empty()) throw ParseError("wikipedia page_text empty but exists=true");
    }
    return r;
}

// ------------------------------------------------------------ rate limiter

RateLimiter::RateLimiter(double capacity, double refill_per_second)
    : capacity_(capacity),
      refill_per_second_(refill_per_second),
      tokens_(capacity),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    for (;;) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            const auto now = std::chrono::steady_clock::now();
            const double elapsed = std::chrono::duration<double>(now - last_).count();
            last_ = now;
            tokens_ = std::min(capacity_, tokens_ + elapsed * refill_per_second_);
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
}

// ------------------------------------------------------------ fixtures

namespace {

bool is_disambiguation(const std::string& text) {
    const std::string head = lower(text.substr(0, std::min<std::size_t>(text.size(), 400)));
    return head.find("may refer to") != std::string::npos;
}

class FixtureArticleSource : public ArticleSource {
public:
    FixtureArticleSource(fs::path root) : root_(std::move(root)) {}

    FetchResult<ArticleRecord> fetch(const MediumRecord& medium, int limit) override {
        const fs::path dir = root_ / "articles" / medium.medium_id;
        if (!fs::is_directory(dir)) {
            log_info("articles: no fixture directory for " + medium.medium_id);
            return {{}, true};
        }
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        FetchResult<ArticleRecord> out;
        for (const auto& f : files) {
            if (static_cast<int>(out.records.size()) >= limit) break;
            json j;
            try {
                j = json::parse(read_file(f));
            } catch (const json::exception& e) {
                throw ParseError("article fixture " + f.string() + ": " + e.what());
            }
            if (!j.contains("article_id")) j["article_id"] = f.stem().string();
            ArticleRecord r = ArticleRecord::from_json(j);
            r.medium_id = medium.medium_id;
            if (trim(r.body_text).empty()) {
                log_warn("articles: skipping empty body " + f.string());
                continue;
            }
            out.records.push_back(std::move(r));
        }
        if (out.records.empty()) log_info("articles: empty source for " + medium.medium_id);
        return out;
    }

private:
    fs::path root_;
};

class FixtureTwitterSource : public TwitterSource {
public:
    FixtureTwitterSource(fs::path root, std::shared_ptr<const LanguageDetector> detector)
        : root_(std::move(root)), detector_(std::move(detector)) {}

    TwitterProfileRecord profile(const MediumRecord& medium) override {
        TwitterProfileRecord missing;
        missing.medium_id = medium.medium_id;
        if (!medium.handles.twitter_handle) return missing;
        const fs::path file = root_ / "twitter" / medium.medium_id / "profile.json";
        if (!fs::exists(file)) return missing;
        json j;
        try {
            j = json::parse(read_file(file));
        } catch (const json::exception& e) {
            throw ParseError("twitter fixture " + file.string() + ": " + e.what());
        }
        TwitterProfileRecord r = TwitterProfileRecord::from_json(j);
        r.medium_id = medium.medium_id;
        return r;
    }

    FetchResult<FollowerBioRecord> followers(const MediumRecord& medium, int n) override {
        if (!medium.handles.twitter_handle) return {{}, true};
        const fs::path file = root_ / "twitter" / medium.medium_id / "followers.jsonl";
        if (!fs::exists(file)) return {{}, true};
        auto records = records_from_jsonl<FollowerBioRecord>(read_file(file));
        std::sort(records.begin(), records.end(),
                  [](const auto& a, const auto& b) { return a.follower_id < b.follower_id; });
        if (static_cast<int>(records.size()) > n) records.resize(n);
        for (auto& r : records) {
            r.medium_id = medium.medium_id;
            if (r.language.empty()) r.language = detector_->detect(r.bio_text);
        }
        return {std::move(records), false};
    }

private:
    fs::path root_;
    std::shared_ptr<const LanguageDetector> detector_;
};

class FixtureYouTubeSource : public YouTubeSource {
public:
    FixtureYouTubeSource(fs::path root) : root_(std::move(root)) {}

    FetchResult<YouTubeVideoRecord> channel(const MediumRecord& medium, int max_videos) override {
        if (!medium.handles.youtube_channel_id) return {{}, true};
        const fs::path dir = root_ / "youtube" / medium.medium_id;
        if (!fs::is_directory(dir)) return {{}, true};
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        FetchResult<YouTubeVideoRecord> out;
        for (const auto& f : files) {
            if (static_cast<int>(out.records.size()) >= max_videos) break;
            try {
                json j = json::parse(read_file(f));
                if (!j.contains("video_id")) j["video_id"] = f.stem().string();
                const fs::path vtt = f.parent_path() / (f.stem().string() + ".vtt");
                if (fs::exists(vtt) && !j.contains("captions")) {
                    auto cues = parse_vtt(read_file(vtt));
                    validate_cues(cues);
                    json cj = json::array();
                    for (const auto& c : cues)
                        cj.push_back({{"start_ms", c.start_ms},
                                      {"end_ms", c.end_ms},
                                      {"text", c.text}});
                    j["captions"] = cj;
                }
                YouTubeVideoRecord r = YouTubeVideoRecord::from_json(j);
                r.medium_id = medium.medium_id;
                if (r.speech_ms() < kMinSpeechMs) continue; // below the speech threshold
                out.records.push_back(std::move(r));
            } catch (const Error& e) {
                log_warn("youtube: skipping malformed video " + f.string() + ": " + e.what());
            }
        }
        return out;
    }

private:
    fs::path root_;
};

class FixtureFacebookSource : public FacebookSource {
public:
    FixtureFacebookSource(fs::path root) : root_(std::move(root)) {}

    FacebookAudienceRecord audience(const MediumRecord& medium) override {
        FacebookAudienceRecord missing;
        missing.medium_id = medium.medium_id;
        if (!medium.handles.facebook_interest_id) return missing;
        const fs::path file = root_ / "facebook" / medium.medium_id / "audience.json";
        if (!fs::exists(file)) return missing;
        json j;
        try {
            j = json::parse(read_file(file));
        } catch (const json::exception& e) {
            throw ParseError("facebook fixture " + file.string() + ": " + e.what());
        }
        FacebookAudienceRecord r = FacebookAudienceRecord::from_json(j);
        r.medium_id = medium.medium_id;
        return r;
    }

private:
    fs::path root_;
};

class FixtureWikipediaSource : public WikipediaSource {
public:
    FixtureWikipediaSource(fs::path root) : root_(std::move(root)) {}

    WikipediaPageRecord page(const MediumRecord& medium) override {
        WikipediaPageRecord r;
        r.medium_id = medium.medium_id;
        const fs::path file = root_ / "wikipedia" / medium.medium_id / "page.txt";
        if (!fs::exists(file)) return r;
        std::string text = read_file(file);
        if (trim(text).empty()) return r;
        if (is_disambiguation(text)) {
            log_info("wikipedia: disambiguation page for " + medium.medium_id +
                     ", treated as not found");
            return r;
        }
        r.exists = true;
        r.page_text = std::move(text);
        return r;
    }

private:
    fs::path root_;
};

} // namespace

FixtureBackend::FixtureBackend(fs::path root, std::shared_ptr<const LanguageDetector> detector)
    : root_(std::move(root)), detector_(std::move(detector)) {
    if (!detector_) detector_ = std::make_shared<TrigramLanguageDetector>();
}

std::unique_ptr<ArticleSource> FixtureBackend::articles() const {
    return std::make_unique<FixtureArticleSource>(root_);
}
std::unique_ptr<TwitterSource> FixtureBackend::twitter() const {
    return std::make_unique<FixtureTwitterSource>(root_, detector_);
}
std::unique_ptr<YouTubeSource> FixtureBackend::youtube() const {
    return std::make_unique<FixtureYouTubeSource>(root_);
}
std::unique_ptr<FacebookSource> FixtureBackend::facebook() const {
    return std::make_unique<FixtureFacebookSource>(root_);
}
std::unique_ptr<WikipediaSource> FixtureBackend::wikipedia() const {
    return std::make_unique<FixtureWikipediaSource>(root_);
}

// ------------------------------------------------------------ http backend

namespace {

std::string url_encode_segment(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xf]);
        }
    }
    return out;
}

// GET with retries and rate limiting; retries cover connection failures,
// 5xx responses and 429 throttling.
json http_get_json(const HttpBackendOptions& opts, RateLimiter& limiter, const std::string& path) {
    std::string host = opts.base_url;
    if (host.rfind("http://", 0) == 0) host = host.substr(7);
    while (!host.empty() && host.back() == '/') host.pop_back();

    std::string last_error;
    for (int attempt = 0; attempt <= opts.retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(opts.backoff_ms * attempt));
        limiter.acquire();
        httplib::Client client(host);
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(10, 0);
        httplib::Headers headers;
        if (!opts.auth_token.empty())
            headers.emplace("Authorization", "Bearer " + opts.auth_token);
        auto res = client.Get(path, headers);
        if (!res) {
            last_error = "connection failed to " + host + path;
            continue;
        }
        if (res->status >= 500 || res->status == 429) {
            last_error = "server error " + std::to_string(res->status) + " from " + path;
            continue;
        }
        if (res->status == 404) throw NotFoundError("404 from " + path);
        if (res->status != 200)
            throw NetworkError("unexpected status " + std::to_string(res->status) + " from " + path);
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw ParseError("response from " + path + ": " + e.what());
        }
    }
    throw NetworkError(last_error + " after " + std::to_string(opts.retries + 1) + " attempts");
}

class HttpArticleSource : public ArticleSource {
public:
    HttpArticleSource(std::shared_ptr<HttpBackendOptions> opts, std::shared_ptr<RateLimiter> limiter)
        : opts_(std::move(opts)), limiter_(std::move(limiter)) {}

    FetchResult<ArticleRecord> fetch(const MediumRecord& medium, int limit) override {
        const json j = http_get_json(*opts_, *limiter_,
                                     "/articles/" + url_encode_segment(medium.medium_id) +
                                         "?limit=" + std::to_string(limit));
        FetchResult<ArticleRecord> out;
        for (const auto& aj : j) {
            if (static_cast<int>(out.records.size()) >= limit) break;
            ArticleRecord r = ArticleRecord::from_json(aj);
            r.medium_id = medium.medium_id;
            if (trim(r.body_text).empty()) continue;
            out.records.push_back(std::move(r));
        }
        return out;
    }

private:
    std::shared_ptr<HttpBackendOptions> opts_;
    std::shared_ptr<RateLimiter> limiter_;
};

class HttpTwitterSource : public TwitterSource {
public:
    HttpTwitterSource(std::shared_ptr<HttpBackendOptions> opts, std::shared_ptr<RateLimiter> limiter,
                      std::shared_ptr<const LanguageDetector> detector)
        : opts_(std::move(opts)), limiter_(std::move(limiter)), detector_(std::move(detector)) {}

    TwitterProfileRecord profile(const MediumRecord& medium) override {
        TwitterProfileRecord missing;
        missing.medium_id = medium.medium_id;
        if (!medium.handles.twitter_handle) return missing;
        try {
            json j = http_get_json(*opts_, *limiter_,
                                   "/twitter/profile/" + url_encode_segment(*medium.handles.twitter_handle));
            TwitterProfileRecord r = TwitterProfileRecord::from_json(j);
            r.medium_id = medium.medium_id;
            return r;
        } catch (const NotFoundError&) {
            return missing;
        }
    }

    FetchResult<FollowerBioRecord> followers(const MediumRecord& medium, int n) override {
        if (!medium.handles.twitter_handle) return {{}, true};
        try {
            json j = http_get_json(*opts_, *limiter_,
                                   "/twitter/followers/" + url_encode_segment(*medium.handles.twitter_handle) +
                                       "?count=" + std::to_string(n));
            FetchResult<FollowerBioRecord> out;
            for (const auto& fj : j) {
                if (static_cast<int>(out.records.size()) >= n) break;
                FollowerBioRecord r = FollowerBioRecord::from_json(fj);
                r.medium_id = medium.medium_id;
                if (r.language.empty()) r.language = detector_->detect(r.bio_text);
                out.records.push_back(std::move(r));
            }
            return out;
        } catch (const NotFoundError&) {
            return {{}, true};
        }
    }

private:
    std::shared_ptr<HttpBackendOptions> opts_;
    std::shared_ptr<RateLimiter> limiter_;
    std::shared_ptr<const LanguageDetector> detector_;
};

class HttpYouTubeSource : public YouTubeSource {
public:
    HttpYouTubeSource(std::shared_ptr<HttpBackendOptions> opts, std::shared_ptr<RateLimiter> limiter)
        : opts_(std::move(opts)), limiter_(std::move(limiter)) {}

    FetchResult<YouTubeVideoRecord> channel(const MediumRecord& medium, int max_videos) override {
        if (!medium.handles.youtube_channel_id) return {{}, true};
        try {
            json j = http_get_json(*opts_, *limiter_,
                                   "/youtube/channel/" + url_encode_segment(*medium.handles.youtube_channel_id) +
                                       "?max=" + std::to_string(max_videos));
            FetchResult<YouTubeVideoRecord> out;
            for (const auto& vj : j) {
                if (static_cast<int>(out.records.size()) >= max_videos) break;
                try {
                    json vjc = vj;
                    if (vj.contains("captions_vtt")) {
                        auto cues = parse_vtt(vj["captions_vtt"].get<std::string>());
                        validate_cues(cues);
                        json cj = json::array();
                        for (const auto& c : cues)
                            cj.push_back({{"start_ms", c.start_ms},
                                          {"end_ms", c.end_ms},
                                          {"text", c.text}});
                        vjc.erase("captions_vtt");
                        vjc["captions"] = cj;
                    }
                    YouTubeVideoRecord r = YouTubeVideoRecord::from_json(vjc);
                    r.medium_id = medium.medium_id;
                    if (r.speech_ms() < kMinSpeechMs) continue;
                    out.records.push_back(std::move(r));
                } catch (const Error& e) {
                    log_warn("youtube: skipping malformed video: " + std::string(e.what()));
                }
            }
            return out;
        } catch (const NotFoundError&) {
            return {{}, true};
        }
    }

private:
    std::shared_ptr<HttpBackendOptions> opts_;
    std::shared_ptr<RateLimiter> limiter_;
};

class HttpFacebookSource : public FacebookSource {
public:
    HttpFacebookSource(std::shared_ptr<HttpBackendOptions> opts, std::shared_ptr<RateLimiter> limiter)
        : opts_(std::move(opts)), limiter_(std::move(limiter)) {}

    FacebookAudienceRecord audience(const MediumRecord& medium) override {
        FacebookAudienceRecord missing;
        missing.medium_id = medium.medium_id;
        if (!medium.handles.facebook_interest_id) return missing;
        try {
            json j = http_get_json(*opts_, *limiter_,
                                   "/facebook/audience/" + url_encode_segment(*medium.handles.facebook_interest_id));
            FacebookAudienceRecord r = FacebookAudienceRecord::from_json(j);
            r.medium_id = medium.medium_id;
            return r;
        } catch (const NotFoundError&) {
            return missing;
        }
    }

private:
    std::shared_ptr<HttpBackendOptions> opts_;
    std::shared_ptr<RateLimiter> limiter_;
};

class HttpWikipediaSource : public WikipediaSource {
public:
    HttpWikipediaSource(std::shared_ptr<HttpBackendOptions> opts, std::shared_ptr<RateLimiter> limiter)
        : opts_(std::move(opts)), limiter_(std::move(limiter)) {}

    WikipediaPageRecord page(const MediumRecord& medium) override {
        WikipediaPageRecord r;
        r.medium_id = medium.medium_id;
        const std::string title = medium.handles.wikipedia_title
                                      ? *medium.handles.wikipedia_title
                                      : medium.domain_url;
        try {
            json j = http_get_json(*opts_, *limiter_, "/wikipedia/page/" + url_encode_segment(title));
            if (!j.value("exists", false)) return r;
            std::string text = j.value("text", "");
            if (trim(text).empty() || is_disambiguation(text)) {
                log_info("wikipedia: no usable page for " + medium.medium_id);
                return r;
            }
            r.exists = true;
            r.page_text = std::move(text);
            return r;
        } catch (const NotFoundError&) {
            return r;
        }
    }

private:
    std::shared_ptr<HttpBackendOptions> opts_;
    std::shared_ptr<RateLimiter> limiter_;
};

} // namespace

HttpBackend::HttpBackend(HttpBackendOptions opts, std::shared_ptr<const LanguageDetector> detector)
    : opts_(std::make_shared<HttpBackendOptions>(std::move(opts))),
      limiter_(std::make_shared<RateLimiter>(opts_->rate_capacity, opts_->rate_refill_per_second)),
      detector_(std::move(detector)) {
    if (!detector_) detector_ = std::make_shared<TrigramLanguageDetector>();
}

std::unique_ptr<ArticleSource> HttpBackend::articles() const {
    return std::make_unique<HttpArticleSource>(opts_, limiter_);
}
std::unique_ptr<TwitterSource> HttpBackend::twitter() const {
    return std::make_unique<HttpTwitterSource>(opts_, limiter_, detector_);
}
std::unique_ptr<YouTubeSource> HttpBackend::youtube() const {
    return std::make_unique<HttpYouTubeSource>(opts_, limiter_);
}
std::unique_ptr<FacebookSource> HttpBackend::facebook() const {
    return std::make_unique<HttpFacebookSource>(opts_, limiter_);
}
std::unique_ptr<WikipediaSource> HttpBackend::wikipedia() const {
    return std::make_unique<HttpWikipediaSource>(opts_, limiter_);
}

IngestClients IngestClients::from_fixtures(const fs::path& root,
                                           std::shared_ptr<const LanguageDetector> detector) {
    FixtureBackend backend(root, std::move(detector));
    return {backend.articles(), backend.twitter(), backend.youtube(), backend.facebook(),
            backend.wikipedia()};
}

IngestClients IngestClients::from_http(const HttpBackendOptions& opts,
                                       std::shared_ptr<const LanguageDetector> detector) {
    HttpBackend backend(opts, std::move(detector));
    return {backend.articles(), backend.twitter(), backend.youtube(), backend.facebook(),
            backend.wikipedia()};
}

// ------------------------------------------------------------ raw store

RawStore::RawStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "objects");
    fs::create_directories(root_ / "refs");
}

fs::path RawStore::put(const std::string& source, const std::string& medium_id,
                       const std::string& jsonl) {
    const std::string hash = content_key(jsonl);
    const fs::path object = root_ / "objects" / (hash + ".jsonl");
    if (!fs::exists(object)) {
        // Unique temp name: concurrent writers of the same content (empty
        // record lists hash identically) must not share a staging file. The
        // rename is atomic and any winner wrote the same bytes.
        static std::atomic<unsigned long> counter{0};
        std::ostringstream suffix;
        suffix << ".tmp-" << ::getpid() << "-" << counter.fetch_add(1);
        const fs::path tmp = object.string() + suffix.str();
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot write " + tmp.string());
            out << jsonl;
        }
        fs::rename(tmp, object);
    }
    write_file(root_ / "refs" / source / medium_id, hash + "\n");
    return object;
}

std::optional<std::string> RawStore::read(const std::string& source,
                                          const std::string& medium_id) const {
    const fs::path ref = root_ / "refs" / source / medium_id;
    if (!fs::exists(ref)) return std::nullopt;
    const std::string hash = trim(read_file(ref));
    const fs::path object = root_ / "objects" / (hash + ".jsonl");
    if (!fs::exists(object))
        throw NotFoundError("raw store: dangling ref " + ref.string());
    return read_file(object);
}

bool RawStore::has(const std::string& source, const std::string& medium_id) const {
    return fs::exists(root_ / "refs" / source / medium_id);
}

std::vector<std::string> RawStore::media(const std::string& source) const {
    std::vector<std::string> out;
    const fs::path dir = root_ / "refs" / source;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) out.push_back(entry.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace mediaprof
