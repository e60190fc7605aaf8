#include "mediaprof/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>

#include "mediaprof/feature_store.hpp"
#include "mediaprof/features.hpp"
#include "mediaprof/ingest.hpp"
#include "mediaprof/util.hpp"

namespace mediaprof {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& all_sources() {
    static const std::vector<std::string> sources = {"articles", "twitter", "youtube", "facebook",
                                                     "wikipedia"};
    return sources;
}

bool is_known_source(const std::string& source) {
    const auto& s = all_sources();
    return std::find(s.begin(), s.end(), source) != s.end();
}

namespace {

IngestClients build_clients(const Config& config) {
    auto detector = std::shared_ptr<const LanguageDetector>(
        make_language_detector(config.language_detector));
    if (config.ingest.backend == "fixtures")
        return IngestClients::from_fixtures(config.paths.fixtures, detector);
    HttpBackendOptions opts;
    opts.base_url = config.ingest.gateway_url;
    opts.retries = config.ingest.retries;
    opts.backoff_ms = config.ingest.backoff_ms;
    opts.auth_token = config.token_for("gateway");
    return IngestClients::from_http(opts, detector);
}

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::string run_stamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%S", std::gmtime(&t));
    return buf;
}

FeatureFileFormat feature_format(const Config& config) {
    return config.feature_format == "packed" ? FeatureFileFormat::PackedBinary
                                             : FeatureFileFormat::JsonLines;
}

FeatureStore task_store(const Config& config, Task task) {
    return FeatureStore(config.paths.feature_store / to_string(task), feature_format(config));
}

} // namespace

json run_ingest(const Config& config, const Dataset& dataset,
                const std::vector<std::string>& sources, const RunOverrides& ov) {
    for (const auto& s : sources)
        if (!is_known_source(s)) throw ValidationError("unknown source '" + s + "'");
    const int jobs = ov.jobs.value_or(config.jobs);

    IngestClients clients = build_clients(config);
    RawStore store(config.paths.raw_store);

    struct Counters {
        std::atomic<long> retrieved{0};
        std::atomic<long> missing{0};
        std::atomic<long> failures{0};
    };
    std::map<std::string, Counters> counters;
    for (const auto& s : sources) counters[s];
    std::mutex failures_mutex;
    std::vector<std::string> failure_notes;

    const auto& media = dataset.media();
    parallel_for(media.size(), jobs, [&](std::size_t i) {
        const MediumRecord& medium = media[i];
        for (const auto& source : sources) {
            auto& count = counters[source];
            try {
                if (source == "articles") {
                    auto result = clients.articles->fetch(medium, config.ingest.article_limit);
                    store.put("articles", medium.medium_id, records_to_jsonl(result.records));
                    result.records.empty() ? ++count.missing : ++count.retrieved;
                } else if (source == "twitter") {
                    auto profile = clients.twitter->profile(medium);
                    store.put("twitter_profile", medium.medium_id,
                              profile.to_json().dump() + "\n");
                    auto followers =
                        clients.twitter->followers(medium, config.ingest.follower_count);
                    store.put("twitter_followers", medium.medium_id,
                              records_to_jsonl(followers.records));
                    profile.exists ? ++count.retrieved : ++count.missing;
                } else if (source == "youtube") {
                    auto result = clients.youtube->channel(medium, config.ingest.max_videos);
                    store.put("youtube", medium.medium_id, records_to_jsonl(result.records));
                    result.records.empty() ? ++count.missing : ++count.retrieved;
                } else if (source == "facebook") {
                    auto audience = clients.facebook->audience(medium);
                    store.put("facebook", medium.medium_id, audience.to_json().dump() + "\n");
                    audience.exists ? ++count.retrieved : ++count.missing;
                } else if (source == "wikipedia") {
                    auto page = clients.wikipedia->page(medium);
                    store.put("wikipedia", medium.medium_id, page.to_json().dump() + "\n");
                    page.exists ? ++count.retrieved : ++count.missing;
                }
            } catch (const Error& e) {
                ++count.failures;
                std::lock_guard<std::mutex> lock(failures_mutex);
                failure_notes.push_back(source + "/" + medium.medium_id + ": " + e.what());
            }
        }
    });

    json summary{{"media_total", media.size()}, {"sources", json::array()}};
    long total_failures = 0;
    for (const auto& source : sources) {
        const auto& c = counters[source];
        total_failures += c.failures.load();
        const double coverage =
            media.empty() ? 0.0
                          : 100.0 * static_cast<double>(c.retrieved.load()) /
                                static_cast<double>(media.size());
        summary["sources"].push_back({{"source", source},
                                      {"retrieved", c.retrieved.load()},
                                      {"missing", c.missing.load()},
                                      {"failures", c.failures.load()},
                                      {"coverage_pct", coverage}});
    }
    std::sort(failure_notes.begin(), failure_notes.end());
    summary["failures"] = failure_notes;
    summary["ok"] = total_failures == 0;
    return summary;
}

json run_featurize(const Config& config, const Dataset& dataset, Task task,
                   const RunOverrides& ov) {
    const int jobs = ov.jobs.value_or(config.jobs);
    RawStore raw(config.paths.raw_store);
    bool any_source = false;
    for (const auto& s : {"articles", "twitter_profile", "twitter_followers", "youtube",
                          "facebook", "wikipedia"})
        if (!raw.media(s).empty()) any_source = true;
    if (!any_source)
        throw NotFoundError("raw store at " + config.paths.raw_store.string() +
                            " is empty; run ingest first");

    const FeatureRegistry registry = config.registry(task);
    const ProviderSet providers = config.providers(task);
    Featurizer featurizer(registry, providers, config.reference_year);
    FeatureStore store = task_store(config, task);

    const auto& media = dataset.media();
    std::map<std::string, std::atomic<long>> missing_counts;
    for (const auto& entry : registry.entries()) missing_counts[entry.id];

    parallel_for(media.size(), jobs, [&](std::size_t i) {
        const MediumRecord& medium = media[i];
        const std::string& id = medium.medium_id;

        std::vector<ArticleRecord> articles;
        if (auto text = raw.read("articles", id))
            articles = records_from_jsonl<ArticleRecord>(*text);
        TwitterProfileRecord profile;
        profile.medium_id = id;
        if (auto text = raw.read("twitter_profile", id)) {
            auto rs = records_from_jsonl<TwitterProfileRecord>(*text);
            if (!rs.empty()) profile = rs.front();
        }
        std::vector<FollowerBioRecord> bios;
        if (auto text = raw.read("twitter_followers", id))
            bios = records_from_jsonl<FollowerBioRecord>(*text);
        std::vector<YouTubeVideoRecord> videos;
        if (auto text = raw.read("youtube", id))
            videos = records_from_jsonl<YouTubeVideoRecord>(*text);
        FacebookAudienceRecord audience;
        audience.medium_id = id;
        if (auto text = raw.read("facebook", id)) {
            auto rs = records_from_jsonl<FacebookAudienceRecord>(*text);
            if (!rs.empty()) audience = rs.front();
        }
        WikipediaPageRecord page;
        page.medium_id = id;
        if (auto text = raw.read("wikipedia", id)) {
            auto rs = records_from_jsonl<WikipediaPageRecord>(*text);
            if (!rs.empty()) page = rs.front();
        }

        ArticleFeatures af = featurizer.featurize_articles(articles);
        YouTubeFeatures yf = featurizer.featurize_youtube(videos);
        std::vector<FeatureVector> parts;
        parts.push_back(std::move(af.nela));
        parts.push_back(std::move(af.enc));
        parts.push_back(std::move(af.prob));
        parts.push_back(featurizer.featurize_twitter_profile(profile));
        parts.push_back(std::move(yf.nela));
        parts.push_back(std::move(yf.lld));
        parts.push_back(std::move(yf.enc_meta));
        parts.push_back(std::move(yf.enc_cap));
        parts.push_back(std::move(yf.stats));
        parts.push_back(featurizer.featurize_followers(bios));
        parts.push_back(featurizer.featurize_facebook(audience));
        parts.push_back(featurizer.featurize_wikipedia(page));
        parts.push_back(featurizer.featurize_articles_basic(articles));

        FeatureBundle bundle = assemble_bundle(registry, id, std::move(parts));
        for (const auto& [fid, v] : bundle.vectors)
            if (v.missing) ++missing_counts[fid];
        store.save(bundle);
    });

    json missing = json::object();
    for (const auto& [fid, count] : missing_counts) missing[fid] = count.load();
    return json{{"task", to_string(task)},
                {"media", media.size()},
                {"store", store.root().string()},
                {"missing_by_feature", missing}};
}

namespace {

LabeledMatrix labeled_matrix(const Config& config, const Dataset& dataset, Task task,
                             const std::vector<std::string>& feature_ids,
                             const FeatureRegistry& registry) {
    FeatureStore store = task_store(config, task);
    LabeledMatrix data;
    const std::size_t dim = registry.concat_dim(feature_ids);
    std::vector<std::vector<double>> rows;
    for (const auto& medium : dataset.media()) {
        const auto code = medium.label_code(task);
        if (!code) continue;
        auto bundle = store.load(medium.medium_id);
        if (!bundle)
            throw NotFoundError("no feature bundle for '" + medium.medium_id +
                                "' under " + store.root().string() + "; run featurize first");
        FeatureVector v = concat(registry, *bundle, feature_ids);
        data.ids.push_back(medium.medium_id);
        data.y.push_back(*code);
        rows.push_back(std::move(v.values));
    }
    if (rows.empty())
        throw ValidationError("no media carry the " + to_string(task) + " label");
    data.x = Matrix(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), data.x.row(i).begin());
    return data;
}

} // namespace

json run_train(const Config& config, const Dataset& dataset, Task task,
               const std::vector<std::string>& feature_ids, int folds,
               const std::optional<std::string>& model_out, const RunOverrides& ov) {
    const unsigned seed = ov.seed.value_or(config.seed);
    const int jobs = ov.jobs.value_or(config.jobs);
    const FeatureRegistry registry = config.registry(task);
    LabeledMatrix data = labeled_matrix(config, dataset, task, feature_ids, registry);

    FoldPlan plan = make_folds(data.ids, data.y, folds, seed,
                               [task](int code) { return class_name(task, code); });
    CvOptions opts;
    opts.jobs = jobs;
    const GridChoice choice = select_hyperparams(data, config.grid, plan, opts);

    TrainedModel model;
    model.task = to_string(task);
    model.feature_ids = feature_ids;
    model.cost = choice.c;
    model.kernel = KernelSpec{choice.gamma};
    model.scaler = StandardScaler::fit(data.x);
    const Matrix z = model.scaler.transform(data.x);
    MulticlassOptions mo;
    mo.calibrate = true;
    mo.seed = seed;
    mo.jobs = jobs;
    model.svm = train_multiclass(z, data.y, choice.c, model.kernel, mo);

    fs::path out = model_out ? fs::path(*model_out)
                             : config.paths.models / (to_string(task) + ".model.json");
    fs::create_directories(out.parent_path());
    model.save(out);

    return json{{"task", to_string(task)},
                {"feature_ids", feature_ids},
                {"chosen_c", choice.c},
                {"chosen_gamma", choice.gamma},
                {"cv_macro_f1", choice.macro_f1},
                {"training_rows", data.ids.size()},
                {"model", out.string()}};
}

json run_evaluate(const Config& config, const Dataset& dataset, Task task,
                  const std::vector<std::string>& feature_ids, int folds, const RunOverrides& ov) {
    const unsigned seed = ov.seed.value_or(config.seed);
    const int jobs = ov.jobs.value_or(config.jobs);
    const FeatureRegistry registry = config.registry(task);
    LabeledMatrix data = labeled_matrix(config, dataset, task, feature_ids, registry);
    FoldPlan plan = make_folds(data.ids, data.y, folds, seed,
                               [task](int code) { return class_name(task, code); });
    CvOptions opts;
    opts.jobs = jobs;
    CvResult result = cross_validate(data, config.grid, plan, opts);

    const std::string set_name = concat_id(registry, feature_ids);
    const fs::path dir = config.paths.reports / "evaluate" / (to_string(task) + "-" + run_stamp());
    write_text(dir / "eval.json", result.eval.to_json().dump(2) + "\n");
    write_text(dir / "oof_posteriors.json", result.out_of_fold.to_json().dump(2) + "\n");

    json out = result.eval.to_json();
    out["task"] = to_string(task);
    out["features"] = feature_ids;
    out["feature_set"] = set_name;
    out["dim"] = registry.concat_dim(feature_ids);
    out["seed"] = seed;
    out["report_dir"] = dir.string();
    return out;
}

ExperimentPlan resolve_plan(const std::string& name_or_path) {
    if (auto bundled = ExperimentPlan::bundled(name_or_path)) return *bundled;
    return ExperimentPlan::load(name_or_path);
}

ExperimentReport run_ablate(const Config& config, const Dataset& dataset,
                            const std::string& plan_name_or_path,
                            const std::optional<std::string>& out_dir, const RunOverrides& ov) {
    ExperimentPlan plan = resolve_plan(plan_name_or_path);
    if (ov.seed) plan.seed = *ov.seed;
    if (!plan.grid) plan.grid = config.grid;

    const FeatureRegistry registry = config.registry(plan.task);
    FeatureStore store = task_store(config, plan.task);
    RunPlanOptions opts;
    opts.jobs = ov.jobs.value_or(config.jobs);

    ExperimentReport report = run_plan(plan, dataset, store, registry, opts);

    const fs::path dir = out_dir ? fs::path(*out_dir)
                                 : config.paths.reports / plan.name / run_stamp();
    write_text(dir / "report.json", render_report(report, ReportFormat::Json));
    write_text(dir / "report.md", render_report(report, ReportFormat::Markdown));
    write_text(dir / "report.csv", render_report(report, ReportFormat::Csv));
    return report;
}

json run_predict(const Config& config, const std::map<Task, std::string>& model_paths,
                 const std::string& medium_id) {
    if (model_paths.empty()) throw ValidationError("predict: no model given");
    std::vector<std::unique_ptr<TrainedModel>> owned;
    std::map<Task, const TrainedModel*> models;
    for (const auto& [task, path] : model_paths) {
        owned.push_back(std::make_unique<TrainedModel>(TrainedModel::load(path)));
        if (owned.back()->task != to_string(task))
            throw ValidationError("model at " + path + " is for task '" + owned.back()->task +
                                  "', not '" + to_string(task) + "'");
        models[task] = owned.back().get();
    }
    return run_predict_models(config, models, medium_id);
}

json run_predict_models(const Config& config, const std::map<Task, const TrainedModel*>& models,
                        const std::string& medium_id) {
    if (models.empty()) throw ValidationError("predict: no model given");
    json tasks = json::object();
    for (const auto& [task, model_ptr] : models) {
        const TrainedModel& model = *model_ptr;
        if (model.task != to_string(task))
            throw ValidationError("model is for task '" + model.task + "', not '" +
                                  to_string(task) + "'");
        const FeatureRegistry registry = config.registry(task);
        FeatureStore store = task_store(config, task);
        auto bundle = store.load(medium_id);
        if (!bundle)
            throw NotFoundError("no feature bundle for '" + medium_id + "' under " +
                                store.root().string() + "; run featurize first");
        FeatureVector x = concat(registry, *bundle, model.feature_ids);
        const auto posterior = model.predict_probabilities(x.values);
        const int pred = model.predict(x.values);

        json classes = json::array();
        for (int code : model.svm.classes()) classes.push_back(class_name(task, code));
        tasks[to_string(task)] = {{"classes", classes},
                                  {"posterior", posterior},
                                  {"prediction", class_name(task, pred)},
                                  {"low_evidence", x.missing}};
    }
    return json{{"medium_id", medium_id}, {"tasks", tasks}};
}

} // namespace mediaprof
