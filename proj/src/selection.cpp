#include "mediaprof/selection.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "mediaprof/calibration.hpp"

namespace mediaprof {

int FoldPlan::fold(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return fold_of[i];
    throw NotFoundError("FoldPlan: id '" + id + "' not in plan");
}

std::vector<long> FoldPlan::fold_sizes() const {
    std::vector<long> sizes(k, 0);
    for (int f : fold_of) ++sizes[f];
    return sizes;
}

FoldPlan make_folds(const std::vector<std::string>& ids, const std::vector<int>& labels, int k,
                    unsigned seed, const std::function<std::string(int)>& class_namer) {
    if (ids.size() != labels.size()) throw ValidationError("make_folds: ids/labels misaligned");
    if (k < 2) throw ValidationError("make_folds: k must be at least 2");
    if (ids.empty()) throw ValidationError("make_folds: empty id set");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < ids.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [code, members] : by_class) {
        if (members.size() < static_cast<std::size_t>(k)) {
            const std::string name = class_namer ? class_namer(code) : std::to_string(code);
            throw ValidationError("make_folds: class '" + name + "' has " +
                                  std::to_string(members.size()) + " members, fewer than k=" +
                                  std::to_string(k));
        }
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.ids = ids;
    plan.fold_of.assign(ids.size(), 0);

    std::mt19937_64 rng(seed);
    // Classes are dealt in code order; the remainder of each class starts
    // where the previous class left off, which keeps total fold sizes within
    // one of each other as well.
    int offset = 0;
    for (auto& [code, members] : by_class) {
        deterministic_shuffle(members, rng);
        const std::size_t base = members.size() / static_cast<std::size_t>(k);
        const int rem = static_cast<int>(members.size() % static_cast<std::size_t>(k));
        std::vector<std::size_t> fold_count(k, base);
        for (int r = 0; r < rem; ++r) ++fold_count[(offset + r) % k];
        offset = (offset + rem) % k;
        std::size_t next = 0;
        for (int f = 0; f < k; ++f)
            for (std::size_t c = 0; c < fold_count[f]; ++c) plan.fold_of[members[next++]] = f;
    }
    return plan;
}

FoldPlan make_folds(const Dataset& ds, Task task, int k, unsigned seed) {
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (const auto& m : ds.media())
        if (auto code = m.label_code(task)) {
            ids.push_back(m.medium_id);
            labels.push_back(*code);
        }
    return make_folds(ids, labels, k, seed, [task](int code) { return class_name(task, code); });
}

void Grid::validate() const {
    if (c_values.empty() || gamma_values.empty()) throw ValidationError("Grid: empty axis");
    for (const auto& axis : {c_values, gamma_values}) {
        for (double v : axis)
            if (v <= 0.0) throw ValidationError("Grid: values must be positive");
        if (!std::is_sorted(axis.begin(), axis.end()))
            throw ValidationError("Grid: values must be sorted ascending");
    }
}

nlohmann::json Grid::to_json() const { return {{"c", c_values}, {"gamma", gamma_values}}; }

Grid Grid::from_json(const nlohmann::json& j) {
    Grid g;
    g.c_values = j.at("c").get<std::vector<double>>();
    g.gamma_values = j.at("gamma").get<std::vector<double>>();
    g.validate();
    return g;
}

Grid Grid::default_grid() {
    return Grid{{0.1, 1.0, 10.0, 100.0, 1000.0}, {1e-4, 1e-3, 1e-2, 1e-1, 1.0}};
}

namespace {

void check_confusion(const Confusion& confusion) {
    if (confusion.empty()) throw ValidationError("metrics: empty confusion matrix");
    for (const auto& row : confusion) {
        if (row.size() != confusion.size())
            throw ValidationError("metrics: confusion matrix must be square");
        for (long v : row)
            if (v < 0) throw ValidationError("metrics: negative count");
    }
}

} // namespace

double accuracy(const Confusion& confusion) {
    check_confusion(confusion);
    long correct = 0, total = 0;
    for (std::size_t i = 0; i < confusion.size(); ++i)
        for (std::size_t j = 0; j < confusion.size(); ++j) {
            total += confusion[i][j];
            if (i == j) correct += confusion[i][j];
        }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

double macro_f1(const Confusion& confusion) {
    check_confusion(confusion);
    const std::size_t k = confusion.size();
    double sum_f1 = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        long tp = confusion[c][c];
        long pred_c = 0, true_c = 0;
        for (std::size_t i = 0; i < k; ++i) {
            pred_c += confusion[i][c];
            true_c += confusion[c][i];
        }
        const double precision = pred_c > 0 ? static_cast<double>(tp) / pred_c : 0.0;
        const double recall = true_c > 0 ? static_cast<double>(tp) / true_c : 0.0;
        sum_f1 += (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    return sum_f1 / static_cast<double>(k);
}

nlohmann::json EvalResult::to_json() const {
    nlohmann::json folds_json = nlohmann::json::array();
    for (const auto& f : folds)
        folds_json.push_back({{"fold", f.fold},
                              {"macro_f1", f.macro_f1},
                              {"accuracy", f.accuracy},
                              {"confusion", f.confusion},
                              {"chosen_c", f.chosen_c},
                              {"chosen_gamma", f.chosen_gamma}});
    return {{"macro_f1", macro_f1},
            {"accuracy", accuracy},
            {"classes", classes},
            {"confusion", confusion},
            {"folds", folds_json}};
}

EvalResult eval_from_confusion(std::vector<int> classes, Confusion confusion,
                               std::vector<FoldResult> folds) {
    EvalResult r;
    r.classes = std::move(classes);
    r.confusion = std::move(confusion);
    r.macro_f1 = mediaprof::macro_f1(r.confusion);
    r.accuracy = mediaprof::accuracy(r.confusion);
    r.folds = std::move(folds);
    return r;
}

void LabeledMatrix::validate() const {
    if (ids.size() != x.rows || y.size() != x.rows)
        throw ValidationError("LabeledMatrix: misaligned ids/rows/labels");
}

namespace {

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), x.cols);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        auto src = x.row(rows[k]);
        std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
}

template <typename T>
std::vector<T> take(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
}

} // namespace

GridChoice select_hyperparams(const LabeledMatrix& data, const Grid& grid, const FoldPlan& plan,
                              const CvOptions& opts) {
    data.validate();
    grid.validate();
    std::set<int> class_set(data.y.begin(), data.y.end());
    std::vector<int> classes(class_set.begin(), class_set.end());
    const std::size_t k_classes = classes.size();
    auto class_pos = [&](int code) {
        return static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), code) - classes.begin());
    };

    struct Split {
        Matrix x_tr, x_val;
        std::vector<int> y_tr, y_val;
    };
    std::vector<Split> splits(plan.k);
    for (int g = 0; g < plan.k; ++g) {
        std::vector<std::size_t> tr, val;
        for (std::size_t i = 0; i < data.ids.size(); ++i)
            (plan.fold_of[i] == g ? val : tr).push_back(i);
        splits[g] = {take_rows(data.x, tr), take_rows(data.x, val), take(data.y, tr),
                     take(data.y, val)};
    }

    struct GridPoint {
        double c, gamma;
    };
    std::vector<GridPoint> points;
    for (double c : grid.c_values)
        for (double g : grid.gamma_values) points.push_back({c, g});

    std::vector<double> scores(points.size(), -1.0);
    parallel_for(points.size(), opts.jobs, [&](std::size_t p) {
        try {
            Confusion confusion(k_classes, std::vector<long>(k_classes, 0));
            for (const auto& split : splits) {
                StandardScaler scaler = StandardScaler::fit(split.x_tr);
                const Matrix z_tr = scaler.transform(split.x_tr);
                MulticlassOptions mo;
                mo.smo = opts.smo;
                mo.calibrate = false;
                MulticlassSvm model =
                    train_multiclass(z_tr, split.y_tr, points[p].c, KernelSpec{points[p].gamma}, mo);
                for (std::size_t i = 0; i < split.y_val.size(); ++i) {
                    const int pred = model.predict(scaler.transform(split.x_val.row(i)));
                    ++confusion[class_pos(split.y_val[i])][class_pos(pred)];
                }
            }
            scores[p] = macro_f1(confusion);
        } catch (const Error& e) {
            throw Error("grid point (C=" + std::to_string(points[p].c) +
                        ", gamma=" + std::to_string(points[p].gamma) + "): " + e.what());
        }
    });

    // points iterate (C asc, gamma asc); the first strict maximum realizes the
    // smaller-C-then-smaller-gamma tie rule.
    std::size_t best = 0;
    for (std::size_t p = 1; p < points.size(); ++p)
        if (scores[p] > scores[best]) best = p;
    return {points[best].c, points[best].gamma, scores[best]};
}

CvResult cross_validate(const LabeledMatrix& data, const Grid& grid, const FoldPlan& plan,
                        const CvOptions& opts) {
    data.validate();
    grid.validate();
    if (plan.ids.size() != data.ids.size())
        throw ValidationError("cross_validate: fold plan does not cover the data");
    for (std::size_t i = 0; i < data.ids.size(); ++i)
        if (plan.ids[i] != data.ids[i])
            throw ValidationError("cross_validate: fold plan row order differs from data");

    std::set<int> class_set(data.y.begin(), data.y.end());
    std::vector<int> classes(class_set.begin(), class_set.end());
    const std::size_t k_classes = classes.size();
    auto class_pos = [&](int code) {
        return static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), code) - classes.begin());
    };

    std::vector<FoldResult> fold_results(plan.k);
    PosteriorMatrix oof;
    oof.model_id = "oof";
    oof.ids = data.ids;
    oof.classes = classes;
    oof.probs = Matrix(data.ids.size(), k_classes);

    for (int f = 0; f < plan.k; ++f) {
      try {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < data.ids.size(); ++i)
            (plan.fold_of[i] == f ? test_rows : train_rows).push_back(i);
        if (test_rows.empty())
            throw ValidationError("cross_validate: fold " + std::to_string(f) + " is empty");

        LabeledMatrix train;
        train.x = take_rows(data.x, train_rows);
        train.y = take(data.y, train_rows);
        train.ids = take(data.ids, train_rows);

        // Inner stratified split for hyper-parameter selection; held-out
        // rows are invisible from here on.
        const unsigned inner_seed = plan.seed * 31u + static_cast<unsigned>(f) + 1u;
        FoldPlan inner = make_folds(train.ids, train.y, opts.inner_folds, inner_seed);
        const GridChoice choice = select_hyperparams(train, grid, inner, opts);

        StandardScaler scaler = StandardScaler::fit(train.x);
        const Matrix z_train = scaler.transform(train.x);
        MulticlassOptions mo;
        mo.smo = opts.smo;
        mo.calibrate = true;
        mo.calibration_folds = opts.calibration_folds;
        mo.seed = plan.seed * 131u + static_cast<unsigned>(f);
        mo.jobs = opts.jobs;
        MulticlassSvm model =
            train_multiclass(z_train, train.y, choice.c, KernelSpec{choice.gamma}, mo);

        Confusion confusion(k_classes, std::vector<long>(k_classes, 0));
        for (std::size_t i : test_rows) {
            const auto z = scaler.transform(data.x.row(i));
            const int pred = model.predict(z);
            ++confusion[class_pos(data.y[i])][class_pos(pred)];
            const auto proba = predict_proba(model, z);
            std::copy(proba.begin(), proba.end(), oof.probs.row(i).begin());
        }
        fold_results[f] = {f,      macro_f1(confusion), accuracy(confusion),
                           confusion, choice.c,         choice.gamma};
      } catch (const Error& e) {
          throw Error("fold " + std::to_string(f) + ": " + e.what());
      }
    }

    Confusion total(k_classes, std::vector<long>(k_classes, 0));
    for (const auto& fr : fold_results)
        for (std::size_t i = 0; i < k_classes; ++i)
            for (std::size_t j = 0; j < k_classes; ++j) total[i][j] += fr.confusion[i][j];

    CvResult result;
    result.eval = eval_from_confusion(classes, std::move(total), std::move(fold_results));
    oof.validate();
    result.out_of_fold = std::move(oof);
    return result;
}

EvalResult majority_baseline(std::span<const int> labels) {
    if (labels.empty()) throw ValidationError("majority_baseline: no labels");
    std::map<int, long> counts;
    for (int y : labels) ++counts[y];
    std::vector<int> classes;
    for (const auto& [code, n] : counts) classes.push_back(code);
    // majority class; ties resolve to the smallest code
    int majority = classes[0];
    long best = 0;
    for (const auto& [code, n] : counts)
        if (n > best) {
            best = n;
            majority = code;
        }
    const std::size_t k = classes.size();
    Confusion confusion(k, std::vector<long>(k, 0));
    auto pos = [&](int code) {
        return static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), code) - classes.begin());
    };
    for (int y : labels) ++confusion[pos(y)][pos(majority)];
    return eval_from_confusion(std::move(classes), std::move(confusion));
}

} // namespace mediaprof
