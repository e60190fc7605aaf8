#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "mediaprof/domain.hpp"
#include "mediaprof/features.hpp"
#include "mediaprof/providers.hpp"
#include "mediaprof/selection.hpp"

namespace mediaprof {

struct ProviderSpec {
    std::string kind = "hash"; // hash | cache | http
    std::string id;
    std::string path; // cache file
    std::string url;  // http base
    int classes = 0;  // task heads
    int dim = 0;      // 0: kind default
};

struct ConfigPaths {
    std::filesystem::path dataset;
    std::filesystem::path fixtures;
    std::filesystem::path raw_store;
    std::filesystem::path feature_store;
    std::filesystem::path reports;
    std::filesystem::path models;
};

struct IngestConfig {
    std::string backend = "fixtures"; // fixtures | http
    std::string gateway_url;
    std::map<std::string, std::string> token_env; // source -> env var name
    int retries = 2;
    int backoff_ms = 200;
    int article_limit = 100;
    int follower_count = 5000;
    int max_videos = 25;
};

struct Config {
    ConfigPaths paths;
    IngestConfig ingest;
    ProviderSpec document_encoder{"hash", "doc-enc"};
    ProviderSpec sentence_encoder{"hash", "sent-enc"};
    std::map<std::string, ProviderSpec> article_encoders; // per task name
    ProviderSpec nela{"hash"};
    ProviderSpec acoustic{"hash"};
    std::string language_detector = "trigram";
    Grid grid = Grid::default_grid();
    unsigned seed = 13;
    int jobs = 1;
    int reference_year = 2020;
    std::string feature_format = "jsonl"; // jsonl | packed

    static Config load(const std::filesystem::path& path);
    static Config from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    nlohmann::json to_json() const;

    // Task-head class count; the posterior feature's registry dim.
    int article_classes(Task task) const;
    FeatureRegistry registry(Task task) const;
    ProviderSet providers(Task task) const;
    std::string token_for(const std::string& source) const; // resolves env var, may be empty
};

} // namespace mediaprof
