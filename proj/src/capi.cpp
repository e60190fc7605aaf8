#include "mediaprof.h"

#include <cstring>
#include <new>
#include <string>

#include "mediaprof/pipeline.hpp"
#include "mediaprof/util.hpp"

using namespace mediaprof;

struct mp_config {
    Config config;
    RunOverrides overrides;
};

struct mp_dataset {
    Dataset dataset;
};

struct mp_model {
    TrainedModel model;
};

namespace {

thread_local std::string t_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::vector<std::string> split_csv(const char* csv) {
    std::vector<std::string> out;
    if (!csv) return out;
    std::string cur;
    for (const char* p = csv;; ++p) {
        if (*p == ',' || *p == '\0') {
            const std::string item = trim(cur);
            if (!item.empty()) out.push_back(item);
            cur.clear();
            if (*p == '\0') break;
        } else {
            cur.push_back(*p);
        }
    }
    return out;
}

template <typename F>
mp_status wrap(F&& body) noexcept {
    try {
        body();
        t_last_error.clear();
        return MP_OK;
    } catch (const ParseError& e) {
        t_last_error = e.what();
        return MP_ERR_PARSE;
    } catch (const NotFoundError& e) {
        t_last_error = e.what();
        return MP_ERR_NOT_FOUND;
    } catch (const NetworkError& e) {
        t_last_error = e.what();
        return MP_ERR_NETWORK;
    } catch (const ConvergenceError& e) {
        t_last_error = e.what();
        return MP_ERR_NO_CONVERGENCE;
    } catch (const ValidationError& e) {
        t_last_error = e.what();
        return MP_ERR_INVALID;
    } catch (const Error& e) {
        t_last_error = e.what();
        return MP_ERR_RUNTIME;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return MP_ERR_RUNTIME;
    } catch (...) {
        t_last_error = "unknown error";
        return MP_ERR_RUNTIME;
    }
}

mp_status require(bool ok, const char* message) {
    if (ok) return MP_OK;
    t_last_error = message;
    return MP_ERR_INVALID;
}

} // namespace

extern "C" {

const char* mp_version(void) { return "0.1.0"; }

const char* mp_last_error(void) { return t_last_error.c_str(); }

void mp_string_free(char* s) { delete[] s; }

mp_status mp_config_load(const char* path, mp_config** out) {
    if (mp_status s = require(path && out, "mp_config_load: null argument")) return s;
    return wrap([&] {
        auto handle = std::make_unique<mp_config>();
        handle->config = Config::load(path);
        *out = handle.release();
    });
}

mp_status mp_config_set_seed(mp_config* config, uint32_t seed) {
    if (mp_status s = require(config != nullptr, "mp_config_set_seed: null config")) return s;
    config->overrides.seed = seed;
    t_last_error.clear();
    return MP_OK;
}

mp_status mp_config_set_jobs(mp_config* config, int jobs) {
    if (mp_status s = require(config && jobs > 0, "mp_config_set_jobs: jobs must be positive"))
        return s;
    config->overrides.jobs = jobs;
    t_last_error.clear();
    return MP_OK;
}

mp_status mp_config_dataset_path(const mp_config* config, char** path_out) {
    if (mp_status s = require(config && path_out, "mp_config_dataset_path: null argument"))
        return s;
    *path_out = dup_string(config->config.paths.dataset.string());
    t_last_error.clear();
    return MP_OK;
}

void mp_config_free(mp_config* config) { delete config; }

mp_status mp_dataset_load(const char* path, mp_dataset** out) {
    if (mp_status s = require(path && out, "mp_dataset_load: null argument")) return s;
    return wrap([&] {
        auto handle = std::make_unique<mp_dataset>();
        handle->dataset = load_dataset(path);
        *out = handle.release();
    });
}

int64_t mp_dataset_size(const mp_dataset* dataset) {
    return dataset ? static_cast<int64_t>(dataset->dataset.size()) : -1;
}

mp_status mp_dataset_label_counts(const mp_dataset* dataset, const char* task, char** json_out) {
    if (mp_status s =
            require(dataset && task && json_out, "mp_dataset_label_counts: null argument"))
        return s;
    return wrap([&] {
        const Task t = parse_task(task);
        const auto counts = label_counts(dataset->dataset, t);
        nlohmann::json j = nlohmann::json::object();
        for (int c = 0; c < kNumClasses; ++c) j[class_name(t, c)] = counts[c];
        *json_out = dup_string(j.dump());
    });
}

void mp_dataset_free(mp_dataset* dataset) { delete dataset; }

mp_status mp_ingest(const mp_config* config, const mp_dataset* dataset, const char* sources_csv,
                    char** summary_json_out) {
    if (mp_status s =
            require(config && dataset && summary_json_out, "mp_ingest: null argument"))
        return s;
    return wrap([&] {
        std::vector<std::string> sources = split_csv(sources_csv);
        if (sources.empty()) sources = all_sources();
        const nlohmann::json summary =
            run_ingest(config->config, dataset->dataset, sources, config->overrides);
        *summary_json_out = dup_string(summary.dump());
    });
}

mp_status mp_featurize(const mp_config* config, const mp_dataset* dataset, const char* task,
                       char** summary_json_out) {
    if (mp_status s =
            require(config && dataset && task && summary_json_out, "mp_featurize: null argument"))
        return s;
    return wrap([&] {
        const nlohmann::json summary =
            run_featurize(config->config, dataset->dataset, parse_task(task), config->overrides);
        *summary_json_out = dup_string(summary.dump());
    });
}

mp_status mp_train(const mp_config* config, const mp_dataset* dataset, const char* task,
                   const char* features_csv, int folds, const char* model_out,
                   char** summary_json_out) {
    if (mp_status s = require(config && dataset && task && features_csv && summary_json_out,
                              "mp_train: null argument"))
        return s;
    return wrap([&] {
        std::optional<std::string> out_path;
        if (model_out && *model_out) out_path = model_out;
        const nlohmann::json summary =
            run_train(config->config, dataset->dataset, parse_task(task), split_csv(features_csv),
                      folds, out_path, config->overrides);
        *summary_json_out = dup_string(summary.dump());
    });
}

mp_status mp_evaluate(const mp_config* config, const mp_dataset* dataset, const char* task,
                      const char* features_csv, int folds, char** eval_json_out) {
    if (mp_status s = require(config && dataset && task && features_csv && eval_json_out,
                              "mp_evaluate: null argument"))
        return s;
    return wrap([&] {
        const nlohmann::json eval =
            run_evaluate(config->config, dataset->dataset, parse_task(task),
                         split_csv(features_csv), folds, config->overrides);
        *eval_json_out = dup_string(eval.dump());
    });
}

mp_status mp_ablate(const mp_config* config, const mp_dataset* dataset, const char* plan,
                    const char* out_dir, char** report_json_out) {
    if (mp_status s =
            require(config && dataset && plan && report_json_out, "mp_ablate: null argument"))
        return s;
    return wrap([&] {
        std::optional<std::string> dir;
        if (out_dir && *out_dir) dir = out_dir;
        const ExperimentReport report =
            run_ablate(config->config, dataset->dataset, plan, dir, config->overrides);
        *report_json_out = dup_string(report.to_json().dump());
    });
}

mp_status mp_render_report(const char* report_json, const char* format, char** text_out) {
    if (mp_status s =
            require(report_json && format && text_out, "mp_render_report: null argument"))
        return s;
    return wrap([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(report_json);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("report json: ") + e.what());
        }
        const ExperimentReport report = ExperimentReport::from_json(j);
        *text_out = dup_string(render_report(report, parse_report_format(format)));
    });
}

mp_status mp_model_open(const char* path, mp_model** out) {
    if (mp_status s = require(path && out, "mp_model_open: null argument")) return s;
    return wrap([&] {
        auto handle = std::make_unique<mp_model>();
        handle->model = TrainedModel::load(path);
        *out = handle.release();
    });
}

mp_status mp_model_task(const mp_model* model, char** task_out) {
    if (mp_status s = require(model && task_out, "mp_model_task: null argument")) return s;
    *task_out = dup_string(model->model.task);
    t_last_error.clear();
    return MP_OK;
}

void mp_model_free(mp_model* model) { delete model; }

mp_status mp_predict(const mp_config* config, const mp_model* bias_model,
                     const mp_model* factuality_model, const char* medium_id,
                     char** prediction_json_out) {
    if (mp_status s = require(config && medium_id && prediction_json_out,
                              "mp_predict: null argument"))
        return s;
    if (mp_status s = require(bias_model || factuality_model, "mp_predict: no model given"))
        return s;
    return wrap([&] {
        std::map<Task, const TrainedModel*> models;
        if (bias_model) models[Task::Bias] = &bias_model->model;
        if (factuality_model) models[Task::Factuality] = &factuality_model->model;
        const nlohmann::json prediction = run_predict_models(config->config, models, medium_id);
        *prediction_json_out = dup_string(prediction.dump());
    });
}

} // extern "C"
