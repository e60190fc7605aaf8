// Command-line front end; everything goes through the C API in mediaprof.h.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mediaprof.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct StringGuard {
    char* value = nullptr;
    ~StringGuard() { mp_string_free(value); }
};

int fail(const char* what, mp_status status) {
    std::fprintf(stderr, "mediaprof: %s failed (status %d): %s\n", what, static_cast<int>(status),
                 mp_last_error());
    return kExitRuntime;
}

const std::vector<std::string>& known_sources() {
    static const std::vector<std::string> sources = {"articles", "twitter", "youtube", "facebook",
                                                     "wikipedia"};
    return sources;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

void print_pretty_json(const char* text) {
    try {
        std::printf("%s\n", nlohmann::json::parse(text).dump(2).c_str());
    } catch (const nlohmann::json::exception&) {
        std::printf("%s\n", text);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mediaprof - news media political-bias and factuality profiling"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string config_path = "mediaprof.json";
    std::uint32_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    std::string format = "json";
    app.add_option("--config", config_path, "configuration file")->capture_default_str();
    app.add_option("--seed", seed, "override the configured seed")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--jobs", jobs, "worker threads");
    app.add_option("--format", format, "report output format")
        ->check(CLI::IsMember({"json", "markdown", "csv"}));

    auto* cmd_ingest = app.add_subcommand("ingest", "fetch raw evidence into the raw store");
    std::vector<std::string> sources;
    cmd_ingest->add_option("--sources", sources, "subset of sources (default: all)")->delimiter(',');

    auto* cmd_featurize = app.add_subcommand("featurize", "build medium-level feature bundles");
    std::string feat_task = "both";
    cmd_featurize->add_option("--task", feat_task, "bias|factuality|both");

    auto* cmd_train = app.add_subcommand("train", "select hyper-parameters and train a model");
    std::string train_task = "bias";
    std::vector<std::string> train_features;
    int train_folds = 5;
    std::string model_out;
    cmd_train->add_option("--task", train_task, "bias|factuality");
    cmd_train->add_option("--features", train_features, "feature ids")->delimiter(',')->required();
    cmd_train->add_option("--folds", train_folds, "cross-validation folds");
    cmd_train->add_option("--out", model_out, "model output path");

    auto* cmd_evaluate = app.add_subcommand("evaluate", "nested cross-validation for a feature set");
    std::string eval_task = "bias";
    std::vector<std::string> eval_features;
    int eval_folds = 5;
    cmd_evaluate->add_option("--task", eval_task, "bias|factuality");
    cmd_evaluate->add_option("--features", eval_features, "feature ids")->delimiter(',')->required();
    cmd_evaluate->add_option("--folds", eval_folds, "cross-validation folds");

    auto* cmd_ablate = app.add_subcommand("ablate", "run an ablation plan and write reports");
    std::string plan;
    std::string out_dir;
    cmd_ablate->add_option("--plan", plan, "bundled plan name or plan file")->required();
    cmd_ablate->add_option("--out", out_dir, "report output directory");

    auto* cmd_predict = app.add_subcommand("predict", "calibrated posteriors for one medium");
    std::string medium_id;
    std::string bias_model_path;
    std::string fact_model_path;
    cmd_predict->add_option("--medium", medium_id, "medium id")->required();
    cmd_predict->add_option("--model-bias", bias_model_path, "bias model path");
    cmd_predict->add_option("--model-factuality", fact_model_path, "factuality model path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    for (const auto& s : sources) {
        bool known = false;
        for (const auto& k : known_sources()) known = known || k == s;
        if (!known) {
            std::fprintf(stderr, "mediaprof: unknown source '%s' (expected %s)\n", s.c_str(),
                         join(known_sources(), "|").c_str());
            return kExitUsage;
        }
    }
    auto valid_task = [](const std::string& t, bool allow_both) {
        return t == "bias" || t == "factuality" || (allow_both && t == "both");
    };
    if (cmd_featurize->parsed() && !valid_task(feat_task, true)) {
        std::fprintf(stderr, "mediaprof: unknown task '%s'\n", feat_task.c_str());
        return kExitUsage;
    }
    for (const auto& [parsed, t] : {std::pair{cmd_train->parsed(), train_task},
                                    std::pair{cmd_evaluate->parsed(), eval_task}}) {
        if (parsed && !valid_task(t, false)) {
            std::fprintf(stderr, "mediaprof: unknown task '%s'\n", t.c_str());
            return kExitUsage;
        }
    }

    mp_config* config = nullptr;
    if (mp_status s = mp_config_load(config_path.c_str(), &config)) return fail("config", s);
    std::unique_ptr<mp_config, decltype(&mp_config_free)> config_guard(config, mp_config_free);
    if (seed_set) mp_config_set_seed(config, seed);
    if (jobs > 0)
        if (mp_status s = mp_config_set_jobs(config, jobs)) return fail("jobs", s);

    if (cmd_predict->parsed()) {
        if (bias_model_path.empty() && fact_model_path.empty()) {
            std::fprintf(stderr,
                         "mediaprof: predict needs --model-bias and/or --model-factuality\n");
            return kExitUsage;
        }
        mp_model* bias_model = nullptr;
        mp_model* fact_model = nullptr;
        if (!bias_model_path.empty())
            if (mp_status s = mp_model_open(bias_model_path.c_str(), &bias_model))
                return fail("model open", s);
        std::unique_ptr<mp_model, decltype(&mp_model_free)> bias_guard(bias_model, mp_model_free);
        if (!fact_model_path.empty())
            if (mp_status s = mp_model_open(fact_model_path.c_str(), &fact_model))
                return fail("model open", s);
        std::unique_ptr<mp_model, decltype(&mp_model_free)> fact_guard(fact_model, mp_model_free);
        StringGuard out;
        if (mp_status s = mp_predict(config, bias_model, fact_model, medium_id.c_str(), &out.value))
            return fail("predict", s);
        print_pretty_json(out.value);
        return kExitOk;
    }

    StringGuard dataset_path;
    if (mp_status s = mp_config_dataset_path(config, &dataset_path.value))
        return fail("config", s);
    mp_dataset* dataset = nullptr;
    if (mp_status s = mp_dataset_load(dataset_path.value, &dataset)) return fail("dataset", s);
    std::unique_ptr<mp_dataset, decltype(&mp_dataset_free)> dataset_guard(dataset, mp_dataset_free);

    if (cmd_ingest->parsed()) {
        StringGuard summary;
        const std::string csv = join(sources, ",");
        if (mp_status s = mp_ingest(config, dataset, csv.empty() ? nullptr : csv.c_str(),
                                    &summary.value))
            return fail("ingest", s);
        print_pretty_json(summary.value);
        const auto j = nlohmann::json::parse(summary.value);
        if (!j.value("ok", true)) {
            std::fprintf(stderr, "mediaprof: ingest finished with failures (see summary above)\n");
            return kExitRuntime;
        }
        return kExitOk;
    }

    if (cmd_featurize->parsed()) {
        std::vector<std::string> tasks =
            feat_task == "both" ? std::vector<std::string>{"bias", "factuality"}
                                : std::vector<std::string>{feat_task};
        for (const auto& t : tasks) {
            StringGuard summary;
            if (mp_status s = mp_featurize(config, dataset, t.c_str(), &summary.value))
                return fail("featurize", s);
            print_pretty_json(summary.value);
        }
        return kExitOk;
    }

    if (cmd_train->parsed()) {
        StringGuard summary;
        const std::string csv = join(train_features, ",");
        if (mp_status s = mp_train(config, dataset, train_task.c_str(), csv.c_str(), train_folds,
                                   model_out.empty() ? nullptr : model_out.c_str(), &summary.value))
            return fail("train", s);
        print_pretty_json(summary.value);
        return kExitOk;
    }

    if (cmd_evaluate->parsed()) {
        StringGuard eval;
        const std::string csv = join(eval_features, ",");
        if (mp_status s = mp_evaluate(config, dataset, eval_task.c_str(), csv.c_str(), eval_folds,
                                      &eval.value))
            return fail("evaluate", s);
        print_pretty_json(eval.value);
        return kExitOk;
    }

    if (cmd_ablate->parsed()) {
        StringGuard report;
        if (mp_status s = mp_ablate(config, dataset, plan.c_str(),
                                    out_dir.empty() ? nullptr : out_dir.c_str(), &report.value))
            return fail("ablate", s);
        if (format == "json") {
            print_pretty_json(report.value);
        } else {
            StringGuard text;
            if (mp_status s = mp_render_report(report.value, format.c_str(), &text.value))
                return fail("render", s);
            std::printf("%s", text.value);
        }
        return kExitOk;
    }

    return kExitUsage;
}
