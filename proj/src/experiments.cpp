#include "mediaprof/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mediaprof/ensemble.hpp"
#include "mediaprof/util.hpp"

namespace mediaprof {

using nlohmann::json;

std::string to_string(CombineMode m) {
    switch (m) {
        case CombineMode::Single: return "single";
        case CombineMode::Concat: return "concat";
        case CombineMode::Ensemble: return "ensemble";
    }
    return "?";
}

CombineMode parse_combine_mode(const std::string& s) {
    if (s == "single") return CombineMode::Single;
    if (s == "concat" || s == "c") return CombineMode::Concat;
    if (s == "ensemble" || s == "en") return CombineMode::Ensemble;
    throw ParseError("unknown combine mode '" + s + "'");
}

void ExperimentPlan::validate(const FeatureRegistry& registry) const {
    if (rows.empty() && name.empty()) throw ValidationError("plan: unnamed empty plan");
    if (folds < 2) throw ValidationError("plan: folds must be at least 2");
    std::set<std::string> seen;
    for (const auto& row : rows) {
        if (row.row_id.empty()) throw ValidationError("plan: row without id");
        if (!seen.insert(row.row_id).second)
            throw ValidationError("plan: duplicate row id '" + row.row_id + "'");
        if (row.feature_ids.empty())
            throw ValidationError("plan row '" + row.row_id + "': no feature ids");
        for (const auto& id : row.feature_ids) registry.entry(id); // throws on unknown
        if (row.mode == CombineMode::Single && row.feature_ids.size() != 1)
            throw ValidationError("plan row '" + row.row_id + "': single mode takes one id");
        if (row.mode == CombineMode::Ensemble && row.feature_ids.size() < 2)
            throw ValidationError("plan row '" + row.row_id +
                                  "': ensemble mode needs at least two feature sets");
    }
    if (grid) grid->validate();
}

json ExperimentPlan::to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"id", r.row_id},
                             {"group", r.group},
                             {"label", r.label},
                             {"features", r.feature_ids},
                             {"mode", to_string(r.mode)}});
    json j{{"schema_version", 1},
           {"name", name},
           {"task", to_string(task)},
           {"seed", seed},
           {"folds", folds},
           {"rows", rows_json}};
    if (grid) j["grid"] = grid->to_json();
    return j;
}

ExperimentPlan ExperimentPlan::from_json(const json& j) {
    ExperimentPlan p;
    p.name = j.value("name", "plan");
    p.task = parse_task(j.at("task").get<std::string>());
    p.seed = j.value("seed", 13u);
    p.folds = j.value("folds", 5);
    if (j.contains("grid")) p.grid = Grid::from_json(j["grid"]);
    for (const auto& rj : j.value("rows", json::array())) {
        PlanRow row;
        row.row_id = rj.at("id").is_string() ? rj["id"].get<std::string>()
                                             : std::to_string(rj["id"].get<long>());
        row.group = rj.value("group", "");
        row.label = rj.value("label", "");
        row.feature_ids = rj.at("features").get<std::vector<std::string>>();
        row.mode = parse_combine_mode(rj.value("mode", "single"));
        p.rows.push_back(std::move(row));
    }
    return p;
}

ExperimentPlan ExperimentPlan::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open plan: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("plan file " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

namespace {

const std::vector<std::string> kArticlesAll = {"articles.nela", "articles.enc", "articles.prob"};

void add_row(ExperimentPlan& p, const std::string& id, const std::string& group,
             const std::string& label, std::vector<std::string> ids, CombineMode mode) {
    p.rows.push_back({id, group, label, std::move(ids), mode});
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// The two canonical ablations. Groups: A = what the medium wrote, B = who
// read it, C = what was written about it.
ExperimentPlan make_bias_plan() {
    ExperimentPlan p;
    p.name = "bias_table2";
    p.task = Task::Bias;
    const std::string A = "A. what was written";
    const std::string B = "B. who read it";
    const std::string C = "C. written about the medium";
    const std::string X = "combinations";
    add_row(p, "3", A, "Articles: linguistic toolkit", {"articles.nela"}, CombineMode::Single);
    add_row(p, "4", A, "Articles: encoder", {"articles.enc"}, CombineMode::Single);
    add_row(p, "5", A, "Articles: class probabilities", {"articles.prob"}, CombineMode::Single);
    add_row(p, "6", A, "Twitter profile: sentence encoder", {"twitter.profile"},
            CombineMode::Single);
    add_row(p, "7", A, "YouTube: linguistic toolkit (title, description)", {"yt.nela"},
            CombineMode::Single);
    add_row(p, "8", A, "YouTube: acoustic descriptors", {"yt.lld"}, CombineMode::Single);
    add_row(p, "9", A, "YouTube: encoder (title, description, tags)", {"yt.enc.meta"},
            CombineMode::Single);
    add_row(p, "10", A, "YouTube: encoder (captions)", {"yt.enc.cap"}, CombineMode::Single);
    add_row(p, "11", A, "Articles: all (c)", kArticlesAll, CombineMode::Concat);
    add_row(p, "12", A, "Articles: all (en)", kArticlesAll, CombineMode::Ensemble);
    add_row(p, "13", A, "Articles + Twitter profile (c)", cat(kArticlesAll, {"twitter.profile"}),
            CombineMode::Concat);
    add_row(p, "14", A, "Articles + Twitter profile (en)", cat(kArticlesAll, {"twitter.profile"}),
            CombineMode::Ensemble);
    add_row(p, "15", A, "Articles + Twitter profile + YouTube captions (c)",
            cat(kArticlesAll, {"twitter.profile", "yt.enc.cap"}), CombineMode::Concat);
    add_row(p, "16", A, "Articles + Twitter profile + YouTube captions (en)",
            cat(kArticlesAll, {"twitter.profile", "yt.enc.cap"}), CombineMode::Ensemble);
    add_row(p, "17", B, "Twitter followers: sentence encoder", {"twitter.followers"},
            CombineMode::Single);
    add_row(p, "18", B, "YouTube: audience statistics", {"yt.stats"}, CombineMode::Single);
    add_row(p, "19", B, "Facebook: audience leanings", {"fb.audience"}, CombineMode::Single);
    add_row(p, "20", B, "Twitter followers + YouTube stats (c)",
            {"twitter.followers", "yt.stats"}, CombineMode::Concat);
    add_row(p, "21", B, "Twitter followers + YouTube stats (en)",
            {"twitter.followers", "yt.stats"}, CombineMode::Ensemble);
    add_row(p, "22", B, "Twitter followers + YouTube stats + Facebook (c)",
            {"twitter.followers", "yt.stats", "fb.audience"}, CombineMode::Concat);
    add_row(p, "23", B, "Twitter followers + YouTube stats + Facebook (en)",
            {"twitter.followers", "yt.stats", "fb.audience"}, CombineMode::Ensemble);
    add_row(p, "24", C, "Wikipedia: encoder", {"wiki.enc"}, CombineMode::Single);
    const std::vector<std::string> all12 = {
        "articles.nela", "articles.enc",  "articles.prob", "twitter.profile",
        "yt.nela",       "yt.lld",        "yt.enc.meta",   "yt.enc.cap",
        "yt.stats",      "twitter.followers", "fb.audience", "wiki.enc"};
    add_row(p, "25", X, "All feature sets (c)", all12, CombineMode::Concat);
    add_row(p, "26", X, "All feature sets (en)", all12, CombineMode::Ensemble);
    const std::vector<std::string> a_best = kArticlesAll;
    const std::vector<std::string> b_best = {"twitter.followers", "yt.stats"};
    add_row(p, "27", X, "A best + B best (c)", cat(a_best, b_best), CombineMode::Concat);
    add_row(p, "28", X, "A best + B best (en)", cat(a_best, b_best), CombineMode::Ensemble);
    add_row(p, "29", X, "A best + C (c)", cat(a_best, {"wiki.enc"}), CombineMode::Concat);
    add_row(p, "30", X, "A best + C (en)", cat(a_best, {"wiki.enc"}), CombineMode::Ensemble);
    add_row(p, "31", X, "A best + B best + C (c)", cat(cat(a_best, b_best), {"wiki.enc"}),
            CombineMode::Concat);
    add_row(p, "32", X, "A best + B best + C (en)", cat(cat(a_best, b_best), {"wiki.enc"}),
            CombineMode::Ensemble);
    return p;
}

ExperimentPlan make_factuality_plan() {
    ExperimentPlan p;
    p.name = "fact_table3";
    p.task = Task::Factuality;
    const std::string A = "A. what was written";
    const std::string B = "B. who read it";
    const std::string C = "C. written about the medium";
    const std::string X = "combinations";
    add_row(p, "3", A, "Articles: linguistic toolkit", {"articles.nela"}, CombineMode::Single);
    add_row(p, "4", A, "Articles: encoder", {"articles.enc"}, CombineMode::Single);
    add_row(p, "5", A, "Articles: class probabilities", {"articles.prob"}, CombineMode::Single);
    add_row(p, "6", A, "Twitter profile: sentence encoder", {"twitter.profile"},
            CombineMode::Single);
    add_row(p, "7", A, "YouTube: linguistic toolkit (title, description)", {"yt.nela"},
            CombineMode::Single);
    add_row(p, "8", A, "YouTube: acoustic descriptors", {"yt.lld"}, CombineMode::Single);
    add_row(p, "9", A, "YouTube: encoder (title, description, tags)", {"yt.enc.meta"},
            CombineMode::Single);
    add_row(p, "10", A, "YouTube: encoder (captions)", {"yt.enc.cap"}, CombineMode::Single);
    add_row(p, "11", A, "Articles: all (c)", kArticlesAll, CombineMode::Concat);
    add_row(p, "12", A, "Articles: all (en)", kArticlesAll, CombineMode::Ensemble);
    add_row(p, "13", A, "Articles encoder + Twitter profile (c)",
            {"articles.enc", "twitter.profile"}, CombineMode::Concat);
    add_row(p, "14", A, "Articles encoder + Twitter profile (en)",
            {"articles.enc", "twitter.profile"}, CombineMode::Ensemble);
    add_row(p, "15", A, "Articles encoder + Twitter profile + YouTube captions (c)",
            {"articles.enc", "twitter.profile", "yt.enc.cap"}, CombineMode::Concat);
    add_row(p, "16", A, "Articles encoder + Twitter profile + YouTube captions (en)",
            {"articles.enc", "twitter.profile", "yt.enc.cap"}, CombineMode::Ensemble);
    add_row(p, "17", B, "Twitter followers: sentence encoder", {"twitter.followers"},
            CombineMode::Single);
    add_row(p, "18", B, "YouTube: audience statistics", {"yt.stats"}, CombineMode::Single);
    add_row(p, "19", B, "Facebook: audience leanings", {"fb.audience"}, CombineMode::Single);
    add_row(p, "20", B, "Twitter followers + YouTube stats (c)",
            {"twitter.followers", "yt.stats"}, CombineMode::Concat);
    add_row(p, "21", B, "Twitter followers + YouTube stats (en)",
            {"twitter.followers", "yt.stats"}, CombineMode::Ensemble);
    add_row(p, "22", B, "Twitter followers + YouTube stats + Facebook (c)",
            {"twitter.followers", "yt.stats", "fb.audience"}, CombineMode::Concat);
    add_row(p, "23", B, "Twitter followers + YouTube stats + Facebook (en)",
            {"twitter.followers", "yt.stats", "fb.audience"}, CombineMode::Ensemble);
    add_row(p, "24", C, "Wikipedia: encoder", {"wiki.enc"}, CombineMode::Single);
    const std::vector<std::string> all12 = {
        "articles.nela", "articles.enc",  "articles.prob", "twitter.profile",
        "yt.nela",       "yt.lld",        "yt.enc.meta",   "yt.enc.cap",
        "yt.stats",      "twitter.followers", "fb.audience", "wiki.enc"};
    add_row(p, "25", X, "All feature sets (c)", all12, CombineMode::Concat);
    add_row(p, "26", X, "All feature sets (en)", all12, CombineMode::Ensemble);
    const std::vector<std::string> a_best = {"articles.enc", "twitter.profile"};
    const std::vector<std::string> b_best = {"twitter.followers", "yt.stats"};
    add_row(p, "27", X, "A best + B best (c)", cat(a_best, b_best), CombineMode::Concat);
    add_row(p, "28", X, "A best + B best (en)", cat(a_best, b_best), CombineMode::Ensemble);
    add_row(p, "29", X, "A best + C (c)", cat(a_best, {"wiki.enc"}), CombineMode::Concat);
    add_row(p, "30", X, "A best + C (en)", cat(a_best, {"wiki.enc"}), CombineMode::Ensemble);
    add_row(p, "31", X, "A best + B best + C (c)", cat(cat(a_best, b_best), {"wiki.enc"}),
            CombineMode::Concat);
    add_row(p, "32", X, "A best + B best + C (en)", cat(cat(a_best, b_best), {"wiki.enc"}),
            CombineMode::Ensemble);
    return p;
}

} // namespace

std::optional<ExperimentPlan> ExperimentPlan::bundled(const std::string& name) {
    if (name == "bias_table2") return make_bias_plan();
    if (name == "fact_table3") return make_factuality_plan();
    return std::nullopt;
}

std::vector<std::string> ExperimentPlan::bundled_names() { return {"bias_table2", "fact_table3"}; }

// ------------------------------------------------------------ report

json ExperimentReport::to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows) {
        json rj{{"id", r.row_id},
                {"group", r.group},
                {"label", r.label},
                {"features", r.feature_ids},
                {"mode", r.mode},
                {"macro_f1", r.macro_f1},
                {"accuracy", r.accuracy}};
        if (r.dim) rj["dim"] = *r.dim;
        else rj["dim"] = nullptr;
        if (!r.weights.empty()) rj["weights"] = r.weights;
        if (!r.constituents.empty()) {
            json cj = json::object();
            for (const auto& [id, score] : r.constituents)
                cj[id] = {{"macro_f1", score.macro_f1}, {"accuracy", score.accuracy}};
            rj["constituent_scores"] = std::move(cj);
        }
        json folds = json::array();
        for (const auto& f : r.folds)
            folds.push_back({{"fold", f.fold},
                             {"macro_f1", f.macro_f1},
                             {"accuracy", f.accuracy},
                             {"chosen_c", f.chosen_c},
                             {"chosen_gamma", f.chosen_gamma}});
        if (!folds.empty()) rj["folds"] = folds;
        rows_json.push_back(std::move(rj));
    }
    return json{{"schema_version", 1},
                {"plan", plan_name},
                {"task", to_string(task)},
                {"seed", seed},
                {"snapshot_id", snapshot_id},
                {"grid", grid.to_json()},
                {"rows", rows_json}};
}

ExperimentReport ExperimentReport::from_json(const json& j) {
    ExperimentReport r;
    r.plan_name = j.at("plan").get<std::string>();
    r.task = parse_task(j.at("task").get<std::string>());
    r.seed = j.value("seed", 13u);
    r.snapshot_id = j.value("snapshot_id", "");
    r.grid = Grid::from_json(j.at("grid"));
    for (const auto& rj : j.at("rows")) {
        ReportRow row;
        row.row_id = rj.at("id").get<std::string>();
        row.group = rj.value("group", "");
        row.label = rj.value("label", "");
        row.feature_ids = rj.value("features", std::vector<std::string>{});
        row.mode = rj.value("mode", "single");
        if (rj.contains("dim") && !rj["dim"].is_null()) row.dim = rj["dim"].get<std::size_t>();
        row.macro_f1 = rj.at("macro_f1").get<double>();
        row.accuracy = rj.at("accuracy").get<double>();
        if (rj.contains("weights"))
            row.weights = rj["weights"].get<std::map<std::string, double>>();
        if (rj.contains("constituent_scores"))
            for (auto it = rj["constituent_scores"].begin(); it != rj["constituent_scores"].end();
                 ++it)
                row.constituents[it.key()] = {it.value().at("macro_f1").get<double>(),
                                              it.value().at("accuracy").get<double>()};
        r.rows.push_back(std::move(row));
    }
    return r;
}

ReportFormat parse_report_format(const std::string& s) {
    if (s == "json") return ReportFormat::Json;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    if (s == "csv") return ReportFormat::Csv;
    throw ParseError("unknown report format '" + s + "' (expected json|markdown|csv)");
}

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return buf;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
    std::string out;
    for (const auto& s : v) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

} // namespace

std::string render_report(const ExperimentReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) return report.to_json().dump(2) + "\n";
    std::ostringstream out;
    if (format == ReportFormat::Markdown) {
        out << "# " << report.plan_name << " (" << to_string(report.task) << ")\n\n";
        out << "| Group | # | Features | Dim. | Macro F1 | Accuracy |\n";
        out << "|---|---|---|---|---|---|\n";
        for (const auto& r : report.rows) {
            out << "| " << r.group << " | " << r.row_id << " | "
                << (r.label.empty() ? join(r.feature_ids, ", ") : r.label) << " | "
                << (r.dim ? std::to_string(*r.dim) : std::string("--")) << " | " << pct(r.macro_f1)
                << " | " << pct(r.accuracy) << " |\n";
        }
        return out.str();
    }
    out << "group,id,features,mode,dim,macro_f1,accuracy\n";
    for (const auto& r : report.rows) {
        out << '"' << r.group << "\"," << r.row_id << ",\"" << join(r.feature_ids, "+") << "\","
            << r.mode << "," << (r.dim ? std::to_string(*r.dim) : std::string()) << ","
            << pct(r.macro_f1) << "," << pct(r.accuracy) << "\n";
    }
    return out.str();
}

// ------------------------------------------------------------ run_plan

namespace {

// Design matrix for a feature-id list, rows restricted to labeled media in
// dataset order.
LabeledMatrix build_matrix(const Dataset& dataset, Task task, const FeatureStore& store,
                           const FeatureRegistry& registry, const std::vector<std::string>& ids) {
    LabeledMatrix data;
    const std::size_t dim = registry.concat_dim(ids);
    std::vector<std::vector<double>> rows;
    for (const auto& medium : dataset.media()) {
        const auto code = medium.label_code(task);
        if (!code) continue;
        auto bundle = store.load(medium.medium_id);
        if (!bundle)
            throw NotFoundError("no feature bundle for '" + medium.medium_id +
                                "'; run featurize first");
        FeatureVector v = concat(registry, *bundle, ids);
        data.ids.push_back(medium.medium_id);
        data.y.push_back(*code);
        rows.push_back(std::move(v.values));
    }
    data.x = Matrix(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), data.x.row(i).begin());
    return data;
}

std::string id_set_key(std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end());
    return join(ids, "|");
}

} // namespace

ExperimentReport run_plan(const ExperimentPlan& plan, const Dataset& dataset,
                          const FeatureStore& store, const FeatureRegistry& registry,
                          const RunPlanOptions& opts) {
    plan.validate(registry);
    const Grid grid = plan.grid ? *plan.grid : Grid::default_grid();

    ExperimentReport report;
    report.plan_name = plan.name;
    report.task = plan.task;
    report.seed = plan.seed;
    report.snapshot_id = dataset.provenance().snapshot_id;
    report.grid = grid;

    std::vector<std::string> ids;
    std::vector<int> labels;
    for (const auto& medium : dataset.media())
        if (auto code = medium.label_code(plan.task)) {
            ids.push_back(medium.medium_id);
            labels.push_back(*code);
        }
    if (ids.empty())
        throw ValidationError("run_plan: no media carry the " + to_string(plan.task) + " label");

    // Baseline row is always present.
    {
        EvalResult baseline = majority_baseline(labels);
        ReportRow row;
        row.row_id = "1";
        row.group = "baselines";
        row.label = "majority class";
        row.mode = "baseline";
        row.macro_f1 = baseline.macro_f1;
        row.accuracy = baseline.accuracy;
        report.rows.push_back(std::move(row));
    }
    if (plan.rows.empty()) return report;

    FoldPlan folds = make_folds(dataset, plan.task, plan.folds, plan.seed);

    CvOptions cv_opts = opts.cv;
    cv_opts.jobs = opts.jobs;

    // Cross-validation results per feature-id set, shared between concat rows
    // and the ensembles that reference the same sets.
    std::map<std::string, CvResult> cv_cache;
    auto cv_for = [&](const std::vector<std::string>& feature_ids) -> const CvResult& {
        const std::string key = id_set_key(feature_ids);
        auto it = cv_cache.find(key);
        if (it != cv_cache.end()) return it->second;
        LabeledMatrix data = build_matrix(dataset, plan.task, store, registry, feature_ids);
        CvResult result = cross_validate(data, grid, folds, cv_opts);
        return cv_cache.emplace(key, std::move(result)).first->second;
    };

    for (const auto& plan_row : plan.rows) {
        ReportRow row;
        row.row_id = plan_row.row_id;
        row.group = plan_row.group;
        row.label = plan_row.label;
        row.feature_ids = plan_row.feature_ids;
        row.mode = to_string(plan_row.mode);
        row.dim = registry.concat_dim(plan_row.feature_ids);
        try {
            if (plan_row.mode != CombineMode::Ensemble) {
                const CvResult& cv = cv_for(plan_row.feature_ids);
                row.macro_f1 = cv.eval.macro_f1;
                row.accuracy = cv.eval.accuracy;
                row.folds = cv.eval.folds;
            } else {
                std::vector<PosteriorMatrix> mats;
                for (const auto& id : plan_row.feature_ids) {
                    const CvResult& constituent = cv_for({id});
                    row.constituents[id] = {constituent.eval.macro_f1, constituent.eval.accuracy};
                    PosteriorMatrix m = constituent.out_of_fold;
                    m.model_id = id;
                    mats.push_back(std::move(m));
                }
                const std::vector<int>& classes = mats[0].classes;
                const std::size_t k = classes.size();
                auto class_pos = [&](int code) {
                    return static_cast<std::size_t>(
                        std::lower_bound(classes.begin(), classes.end(), code) - classes.begin());
                };
                Confusion total(k, std::vector<long>(k, 0));
                std::vector<FoldResult> fold_results;
                for (int f = 0; f < folds.k; ++f) {
                    std::vector<std::size_t> fit_rows, test_rows;
                    for (std::size_t i = 0; i < ids.size(); ++i)
                        (folds.fold_of[i] == f ? test_rows : fit_rows).push_back(i);
                    std::vector<PosteriorMatrix> fit_mats(mats.size());
                    std::vector<int> fit_gold;
                    for (std::size_t m = 0; m < mats.size(); ++m) {
                        fit_mats[m].model_id = mats[m].model_id;
                        fit_mats[m].classes = classes;
                        fit_mats[m].probs = Matrix(fit_rows.size(), k);
                        for (std::size_t r = 0; r < fit_rows.size(); ++r) {
                            fit_mats[m].ids.push_back(ids[fit_rows[r]]);
                            auto src = mats[m].probs.row(fit_rows[r]);
                            std::copy(src.begin(), src.end(), fit_mats[m].probs.row(r).begin());
                        }
                    }
                    for (std::size_t r : fit_rows) fit_gold.push_back(labels[r]);
                    LearnWeightsOptions lw;
                    lw.step = opts.ensemble_step;
                    EnsembleWeights w = learn_weights(fit_mats, fit_gold, lw);

                    Confusion fold_confusion(k, std::vector<long>(k, 0));
                    std::vector<double> acc(k);
                    for (std::size_t r : test_rows) {
                        std::fill(acc.begin(), acc.end(), 0.0);
                        for (std::size_t m = 0; m < mats.size(); ++m) {
                            auto src = mats[m].probs.row(r);
                            for (std::size_t c = 0; c < k; ++c) acc[c] += w.values[m] * src[c];
                        }
                        const int pred = argmax_class(acc, classes);
                        ++fold_confusion[class_pos(labels[r])][class_pos(pred)];
                    }
                    for (std::size_t a = 0; a < k; ++a)
                        for (std::size_t b = 0; b < k; ++b) total[a][b] += fold_confusion[a][b];
                    fold_results.push_back({f, macro_f1(fold_confusion), accuracy(fold_confusion),
                                            fold_confusion, 0.0, 0.0});
                }
                row.macro_f1 = macro_f1(total);
                row.accuracy = accuracy(total);
                row.folds = std::move(fold_results);

                // Deployment weights, learned on the full out-of-fold matrix.
                LearnWeightsOptions lw;
                lw.step = opts.ensemble_step;
                EnsembleWeights final_w = learn_weights(mats, labels, lw);
                for (std::size_t m = 0; m < mats.size(); ++m)
                    row.weights[mats[m].model_id] = final_w.values[m];
            }
        } catch (const Error& e) {
            throw Error("plan row '" + plan_row.row_id + "': " + e.what());
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace mediaprof
