#include "mediaprof/config.hpp"

#include <cstdlib>
#include <fstream>

#include "mediaprof/features.hpp"

namespace mediaprof {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ProviderSpec spec_from_json(const json& j, const fs::path& base) {
    ProviderSpec s;
    if (j.is_string()) {
        s.kind = j.get<std::string>();
        return s;
    }
    s.kind = j.value("kind", "hash");
    s.id = j.value("id", "");
    if (j.contains("path")) {
        fs::path p = j["path"].get<std::string>();
        s.path = (p.is_absolute() ? p : base / p).string();
    }
    s.url = j.value("url", "");
    s.classes = j.value("classes", 0);
    s.dim = j.value("dim", 0);
    return s;
}

json spec_to_json(const ProviderSpec& s) {
    json j{{"kind", s.kind}};
    if (!s.id.empty()) j["id"] = s.id;
    if (!s.path.empty()) j["path"] = s.path;
    if (!s.url.empty()) j["url"] = s.url;
    if (s.classes > 0) j["classes"] = s.classes;
    if (s.dim > 0) j["dim"] = s.dim;
    return j;
}

fs::path resolve(const json& paths, const char* key, const fs::path& base,
                 const std::string& fallback) {
    fs::path p = paths.value(key, fallback);
    return p.is_absolute() ? p : base / p;
}

std::shared_ptr<TextEncoder> build_encoder(const ProviderSpec& s, const std::string& default_id,
                                           int classes) {
    const std::string id = s.id.empty() ? default_id : s.id;
    const int dim = s.dim > 0 ? s.dim : kEmbeddingDim;
    if (s.kind == "hash") return make_hashing_encoder(id, dim, classes);
    if (s.kind == "cache") {
        if (s.path.empty()) throw ValidationError("cache provider '" + id + "' needs a path");
        return make_cached_encoder(id, s.path, dim, classes);
    }
    if (s.kind == "http") {
        if (s.url.empty()) throw ValidationError("http provider '" + id + "' needs a url");
        ProviderHttpOptions opts;
        opts.base_url = s.url;
        return make_http_encoder(id, opts, dim, classes);
    }
    throw ValidationError("unknown provider kind '" + s.kind + "'");
}

} // namespace

Config Config::from_json(const json& j, const fs::path& base_dir) {
    Config c;
    const json paths = j.value("paths", json::object());
    c.paths.dataset = resolve(paths, "dataset", base_dir, "dataset.jsonl");
    c.paths.fixtures = resolve(paths, "fixtures", base_dir, "fixtures");
    c.paths.raw_store = resolve(paths, "raw_store", base_dir, "work/raw");
    c.paths.feature_store = resolve(paths, "feature_store", base_dir, "work/features");
    c.paths.reports = resolve(paths, "reports", base_dir, "work/reports");
    c.paths.models = resolve(paths, "models", base_dir, "work/models");

    const json ing = j.value("ingest", json::object());
    c.ingest.backend = ing.value("backend", "fixtures");
    if (c.ingest.backend != "fixtures" && c.ingest.backend != "http")
        throw ValidationError("config: ingest.backend must be fixtures|http");
    c.ingest.gateway_url = ing.value("gateway_url", "");
    if (ing.contains("token_env"))
        c.ingest.token_env = ing["token_env"].get<std::map<std::string, std::string>>();
    c.ingest.retries = ing.value("retries", 2);
    c.ingest.backoff_ms = ing.value("backoff_ms", 200);
    c.ingest.article_limit = ing.value("article_limit", 100);
    c.ingest.follower_count = ing.value("follower_count", 5000);
    c.ingest.max_videos = ing.value("max_videos", 25);

    const json prov = j.value("providers", json::object());
    if (prov.contains("document_encoder"))
        c.document_encoder = spec_from_json(prov["document_encoder"], base_dir);
    if (prov.contains("sentence_encoder"))
        c.sentence_encoder = spec_from_json(prov["sentence_encoder"], base_dir);
    if (prov.contains("article_encoders"))
        for (auto it = prov["article_encoders"].begin(); it != prov["article_encoders"].end(); ++it)
            c.article_encoders[it.key()] = spec_from_json(it.value(), base_dir);
    if (prov.contains("nela")) c.nela = spec_from_json(prov["nela"], base_dir);
    if (prov.contains("acoustic")) c.acoustic = spec_from_json(prov["acoustic"], base_dir);
    if (prov.contains("language")) c.language_detector = prov["language"].get<std::string>();

    if (j.contains("grid")) c.grid = Grid::from_json(j["grid"]);
    c.seed = j.value("seed", 13u);
    c.jobs = j.value("jobs", 1);
    c.reference_year = j.value("reference_year", 2020);
    c.feature_format = j.value("feature_format", "jsonl");
    if (c.feature_format != "jsonl" && c.feature_format != "packed")
        throw ValidationError("config: feature_format must be jsonl|packed");
    return c;
}

Config Config::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }
    return from_json(j, fs::absolute(path).parent_path());
}

json Config::to_json() const {
    json token_env = json::object();
    for (const auto& [k, v] : ingest.token_env) token_env[k] = v;
    json article_encoders_json = json::object();
    for (const auto& [task, spec] : article_encoders) article_encoders_json[task] = spec_to_json(spec);
    return json{
        {"paths",
         {{"dataset", paths.dataset.string()},
          {"fixtures", paths.fixtures.string()},
          {"raw_store", paths.raw_store.string()},
          {"feature_store", paths.feature_store.string()},
          {"reports", paths.reports.string()},
          {"models", paths.models.string()}}},
        {"ingest",
         {{"backend", ingest.backend},
          {"gateway_url", ingest.gateway_url},
          {"token_env", token_env},
          {"retries", ingest.retries},
          {"backoff_ms", ingest.backoff_ms},
          {"article_limit", ingest.article_limit},
          {"follower_count", ingest.follower_count},
          {"max_videos", ingest.max_videos}}},
        {"providers",
         {{"document_encoder", spec_to_json(document_encoder)},
          {"sentence_encoder", spec_to_json(sentence_encoder)},
          {"article_encoders", article_encoders_json},
          {"nela", spec_to_json(nela)},
          {"acoustic", spec_to_json(acoustic)},
          {"language", language_detector}}},
        {"grid", grid.to_json()},
        {"seed", seed},
        {"jobs", jobs},
        {"reference_year", reference_year},
        {"feature_format", feature_format}};
}

int Config::article_classes(Task task) const {
    auto it = article_encoders.find(to_string(task));
    if (it != article_encoders.end() && it->second.classes > 0) return it->second.classes;
    // default head: one class per task label for bias, low/high for factuality
    return task == Task::Bias ? 3 : 2;
}

FeatureRegistry Config::registry(Task task) const {
    return FeatureRegistry::standard(article_classes(task));
}

ProviderSet Config::providers(Task task) const {
    ProviderSet set;
    set.document = build_encoder(document_encoder, "doc-enc", 0);
    set.sentence = build_encoder(sentence_encoder, "sent-enc", 0);
    ProviderSpec article;
    auto it = article_encoders.find(to_string(task));
    if (it != article_encoders.end()) article = it->second;
    set.article = build_encoder(article, "article-" + to_string(task), article_classes(task));

    if (nela.kind == "hash") set.nela = make_hashing_nela();
    else if (nela.kind == "cache") set.nela = make_cached_nela(nela.path);
    else throw ValidationError("unknown nela provider kind '" + nela.kind + "'");

    const int lld_dim = acoustic.dim > 0 ? acoustic.dim : 385;
    if (acoustic.kind == "hash") set.acoustic = make_hashing_acoustic(lld_dim);
    else if (acoustic.kind == "cache") set.acoustic = make_cached_acoustic(acoustic.path, lld_dim);
    else throw ValidationError("unknown acoustic provider kind '" + acoustic.kind + "'");
    return set;
}

std::string Config::token_for(const std::string& source) const {
    auto it = ingest.token_env.find(source);
    if (it == ingest.token_env.end()) return "";
    const char* value = std::getenv(it->second.c_str());
    return value ? value : "";
}

} // namespace mediaprof
