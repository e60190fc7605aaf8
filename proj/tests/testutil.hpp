#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mediaprof/domain.hpp"
#include "mediaprof/util.hpp"

namespace mediaprof::test {

class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("mediaprof-test-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& sub) const { return path_ / sub; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Deterministic gaussians: Box-Muller over the raw engine, stdlib-independent.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    double uniform() {
        return static_cast<double>(rng_() >> 11) * (1.0 / 9007199254740992.0);
    }

    std::uint64_t raw() { return rng_(); }

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct Blobs {
    Matrix x;
    std::vector<int> y;
    std::vector<std::string> ids;
};

// `k` well-separated gaussian clusters in `dim` dimensions.
inline Blobs make_blobs(int k, int per_class, int dim, double separation, double sigma,
                        std::uint64_t seed) {
    Blobs b;
    b.x = Matrix(static_cast<std::size_t>(k) * per_class, dim);
    Gaussian g(seed);
    std::size_t row = 0;
    for (int c = 0; c < k; ++c) {
        for (int i = 0; i < per_class; ++i, ++row) {
            for (int d = 0; d < dim; ++d) {
                const double center = (d % k == c) ? separation : 0.0;
                b.x.at(row, d) = center + sigma * g();
            }
            b.y.push_back(c);
            b.ids.push_back("row" + std::to_string(row));
        }
    }
    return b;
}

// A complete miniature project on disk: dataset snapshot, fixture tree for
// all five sources, offline config with hashing providers. Media cycle
// through the three classes of both tasks.
inline std::filesystem::path make_demo_project(const std::filesystem::path& root, int n_media,
                                               int trailing_unlabeled = 0) {
    namespace fs = std::filesystem;
    const char* bias_labels[] = {"left", "center", "right"};
    const char* fact_labels[] = {"low", "mixed", "high"};

    std::string dataset;
    for (int i = 0; i < n_media + trailing_unlabeled; ++i) {
        const std::string id = "m" + std::to_string(100 + i);
        nlohmann::json j{{"medium_id", id}, {"domain_url", "https://" + id + ".example"}};
        if (i < n_media) {
            j["raw_bias"] = bias_labels[i % 3];
            j["factuality"] = fact_labels[(i / 3) % 3];
        }
        j["handles"] = {{"twitter_handle", id + "_tw"},
                        {"youtube_channel_id", "UC_" + id},
                        {"facebook_interest_id", "606" + id},
                        {"wikipedia_title", id + " (site)"}};
        dataset += j.dump() + "\n";
    }
    write_file(root / "dataset.jsonl", dataset);

    for (int i = 0; i < n_media + trailing_unlabeled; ++i) {
        const std::string id = "m" + std::to_string(100 + i);
        const fs::path fx = root / "fixtures";
        for (int a = 0; a < 2; ++a) {
            nlohmann::json art{{"title", "story " + std::to_string(a) + " from " + id},
                               {"body_text", "reported words w" + std::to_string(i) + " w" +
                                                 std::to_string(i * 7 + a) + " about the town"}};
            write_file(fx / "articles" / id / ("a" + std::to_string(a) + ".json"), art.dump());
        }
        nlohmann::json profile{{"exists", true},
                               {"verified", i % 2 == 0},
                               {"created_year", 2008 + (i % 10)},
                               {"has_location", true},
                               {"description", "newsroom of " + id + " covering topic " +
                                                   std::to_string(i % 5)},
                               {"followers_count", 1000 + 37 * i},
                               {"friends_count", 50 + i},
                               {"statuses_count", 2000 + 11 * i},
                               {"favourites_count", 5 * i},
                               {"listed_count", i},
                               {"has_url", true},
                               {"default_profile", false}};
        write_file(fx / "twitter" / id / "profile.json", profile.dump());
        std::string followers;
        for (int f = 0; f < 6; ++f)
            followers += nlohmann::json{{"follower_id", "f" + std::to_string(f)},
                                        {"bio_text", "reader number " + std::to_string(f) +
                                                         " who follows the news from " + id}}
                             .dump() +
                         "\n";
        write_file(fx / "twitter" / id / "followers.jsonl", followers);

        nlohmann::json video{{"title", "weekly update " + id},
                             {"description", "talking about subject " + std::to_string(i % 4)},
                             {"tags", {"news", "update"}},
                             {"views", 500 + 13 * i},
                             {"likes", 40 + i},
                             {"comments", 7 + (i % 3)}};
        write_file(fx / "youtube" / id / "v0.json", video.dump());
        std::string vtt = "WEBVTT\n\n";
        for (int s = 0; s < 20; s += 5) {
            char buf[96];
            std::snprintf(buf, sizeof(buf),
                          "00:00:%02d.000 --> 00:00:%02d.000\nspoken segment %d of %s\n\n", s,
                          s + 5, s / 5, id.c_str());
            vtt += buf;
        }
        write_file(fx / "youtube" / id / "v0.vtt", vtt);

        nlohmann::json audience{{"very_conservative", 1000 + 10 * i},
                                {"conservative", 2000},
                                {"moderate", 4000},
                                {"liberal", 2000},
                                {"very_liberal", 1000 + 5 * i},
                                {"total_audience", 30000 + 15 * i}};
        write_file(fx / "facebook" / id / "audience.json", audience.dump());
        write_file(fx / "wikipedia" / id / "page.txt",
                   id + " is a news website covering region " + std::to_string(i % 6) +
                       ". It was launched to report daily events and publishes articles.");
    }

    nlohmann::json config{
        {"paths",
         {{"dataset", "dataset.jsonl"},
          {"fixtures", "fixtures"},
          {"raw_store", "work/raw"},
          {"feature_store", "work/features"},
          {"reports", "work/reports"},
          {"models", "work/models"}}},
        {"ingest", {{"backend", "fixtures"}}},
        {"providers",
         {{"document_encoder", {{"kind", "hash"}, {"id", "doc-enc"}}},
          {"sentence_encoder", {{"kind", "hash"}, {"id", "sent-enc"}}},
          {"article_encoders",
           {{"bias", {{"kind", "hash"}, {"id", "article-bias"}, {"classes", 3}}},
            {"factuality", {{"kind", "hash"}, {"id", "article-fact"}, {"classes", 2}}}}},
          {"nela", {{"kind", "hash"}}},
          {"acoustic", {{"kind", "hash"}}},
          {"language", "trigram"}}},
        {"grid", {{"c", {1.0}}, {"gamma", {0.1}}}},
        {"seed", 13},
        {"jobs", 2},
        {"reference_year", 2020}};
    write_file(root / "mediaprof.json", config.dump(2));
    return root / "mediaprof.json";
}

// Dataset with the reference label counts: bias 243/272/349, factuality
// 162/249/453 over 864 media.
inline Dataset table1_dataset() {
    std::vector<std::string> bias;
    bias.insert(bias.end(), 243, "left");
    bias.insert(bias.end(), 272, "center");
    bias.insert(bias.end(), 349, "right");
    std::vector<std::string> fact;
    fact.insert(fact.end(), 162, "low");
    fact.insert(fact.end(), 249, "mixed");
    fact.insert(fact.end(), 453, "high");

    std::vector<MediumRecord> media;
    for (std::size_t i = 0; i < bias.size(); ++i) {
        MediumRecord m;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "m%04zu", i);
        m.medium_id = buf;
        m.domain_url = "https://" + m.medium_id + ".example";
        m.raw_bias = parse_raw_bias(bias[i]);
        m.bias = normalize_bias(*m.raw_bias);
        m.factuality = parse_factuality(fact[i]);
        media.push_back(std::move(m));
    }
    return Dataset(std::move(media), Provenance{"table1", ""});
}

} // namespace mediaprof::test
