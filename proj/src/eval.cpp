#include "biomlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <filesystem>

#include "biomlab/csv.hpp"
#include "biomlab/parallel.hpp"
#include "biomlab/rng.hpp"

namespace biomlab::eval {

PreparedTraining prepare_training(const Matrix& x_train, const std::vector<int>& y_train, int n_classes,
                                  bool scale, const PreprocessConfig& cfg, std::uint64_t smote_seed) {
    PreparedTraining out;
    out.plans.impute = preprocess::fit_impute(x_train);
    Matrix imputed = preprocess::apply_impute(out.plans.impute, x_train);
    std::vector<int> labels = y_train;

    if (cfg.zscore_enabled && imputed.n_rows() >= 3) {
        const auto z = preprocess::zscore_filter(imputed, cfg.zscore_threshold);
        if (z.kept_rows.size() < imputed.n_rows()) {
            out.rows_dropped = imputed.n_rows() - z.kept_rows.size();
            Matrix kept = imputed.select_rows(z.kept_rows);
            std::vector<int> kept_y;
            kept_y.reserve(z.kept_rows.size());
            for (std::size_t i : z.kept_rows) kept_y.push_back(labels[i]);
            imputed = std::move(kept);
            labels = std::move(kept_y);
        }
    }

    out.plans.scaled = scale;
    if (scale) {
        out.plans.scaler.fit(imputed);
        imputed = out.plans.scaler.transform(std::move(imputed));
    }

    if (cfg.smote_enabled) {
        std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
        for (int label : labels) ++counts[static_cast<std::size_t>(label)];
        std::size_t majority = 0;
        bool undersized = false;
        for (std::size_t c : counts) majority = std::max(majority, c);
        for (std::size_t c : counts) {
            if (c == 1 && c < majority) undersized = true;
        }
        if (undersized) {
            out.smote_skipped = true;  // a filtered fold can leave a singleton class
        } else {
            auto balanced = preprocess::smote(imputed, labels, n_classes, cfg.smote_k, smote_seed);
            out.synthetic_rows = balanced.synthetic_count;
            out.x = std::move(balanced.x);
            out.y = std::move(balanced.y);
            return out;
        }
    }
    out.x = std::move(imputed);
    out.y = std::move(labels);
    return out;
}

std::vector<double> transform_row(const FoldPlans& plans, std::vector<double> row) {
    Matrix m;
    m.col_names = plans.impute.col_names;
    m.data.push_back(std::move(row));
    m = preprocess::apply_impute(plans.impute, std::move(m));
    if (plans.scaled) m = plans.scaler.transform(std::move(m));
    return m.data.front();
}

SearchSpace expand_grid(const std::map<std::string, std::vector<double>>& grid) {
    SearchSpace out;
    out.points.push_back({});
    for (const auto& [key, values] : grid) {
        if (values.empty()) continue;
        std::vector<models::Hyper> next;
        next.reserve(out.points.size() * values.size());
        for (const auto& point : out.points) {
            for (double v : values) {
                auto p = point;
                p[key] = v;
                next.push_back(std::move(p));
            }
        }
        out.points = std::move(next);
    }
    return out;
}

namespace {

// Round-robin fold assignment, stratified per class after a seeded shuffle.
// Degrades to unstratified when any class has a single member.
std::vector<int> assign_inner_folds(const std::vector<int>& y, int k, Rng& rng, bool& degraded) {
    std::vector<std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto c = static_cast<std::size_t>(y[i]);
        if (by_class.size() <= c) by_class.resize(c + 1);
        by_class[c].push_back(i);
    }
    degraded = false;
    for (const auto& members : by_class) {
        if (members.size() == 1) degraded = true;
    }
    std::vector<int> fold(y.size(), 0);
    if (degraded) {
        std::vector<std::size_t> all(y.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        rng.shuffle(all);
        for (std::size_t i = 0; i < all.size(); ++i) fold[all[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        return fold;
    }
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i) {
            fold[members[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        }
    }
    return fold;
}

struct InnerEval {
    models::Hyper chosen;
    bool degraded = false;
};

InnerEval select_hyperparameters(const Matrix& x, const std::vector<int>& y, int n_classes,
                                 const std::string& model_name, const SearchSpace& space,
                                 const LoocvConfig& cfg, std::uint64_t fold_seed, bool scale) {
    InnerEval out;
    if (space.points.size() <= 1) {
        out.chosen = space.points.empty() ? models::Hyper{} : space.points.front();
        return out;
    }

    // candidate subset under the random-search budget, grid order preserved
    std::vector<std::size_t> candidates(space.points.size());
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    if (candidates.size() > cfg.search_budget) {
        Rng rng = derive_rng(fold_seed, {0x5EA4C4u});
        rng.shuffle(candidates);
        candidates.resize(cfg.search_budget);
        std::sort(candidates.begin(), candidates.end());
    }

    const int k = cfg.inner_folds;
    Rng strat_rng = derive_rng(fold_seed, {0x57A7Fu});
    const auto fold_of = assign_inner_folds(y, k, strat_rng, out.degraded);

    double best_f1 = -1.0;
    std::size_t best_idx = candidates.front();
    for (const std::size_t idx : candidates) {
        const auto& hp = space.points[idx];
        std::vector<std::vector<std::size_t>> confusion(
            static_cast<std::size_t>(n_classes), std::vector<std::size_t>(static_cast<std::size_t>(n_classes), 0));
        for (int f = 0; f < k; ++f) {
            std::vector<std::size_t> train_idx, val_idx;
            for (std::size_t i = 0; i < y.size(); ++i) {
                (fold_of[i] == f ? val_idx : train_idx).push_back(i);
            }
            if (train_idx.empty() || val_idx.empty()) continue;
            Matrix x_tr = x.select_rows(train_idx);
            std::vector<int> y_tr;
            y_tr.reserve(train_idx.size());
            for (std::size_t i : train_idx) y_tr.push_back(y[i]);

            const auto prepared = prepare_training(x_tr, y_tr, n_classes, scale, cfg.prep,
                                                   derive_seed(fold_seed, {0x5307Eu, idx, static_cast<std::uint64_t>(f)}));
            auto model = models::make_classifier(model_name);
            model->fit(prepared.x, prepared.y, n_classes, hp,
                       derive_seed(fold_seed, {0x30DE1u, idx, static_cast<std::uint64_t>(f)}));

            Matrix x_val;
            x_val.col_names = x.col_names;
            for (std::size_t i : val_idx) x_val.data.push_back(transform_row(prepared.plans, x.data[i]));
            const auto pred = model->predict(x_val);
            for (std::size_t i = 0; i < val_idx.size(); ++i) {
                ++confusion[static_cast<std::size_t>(y[val_idx[i]])][static_cast<std::size_t>(pred[i])];
            }
        }
        const double f1 = macro_f1(confusion);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_idx = idx;
        }
    }
    out.chosen = space.points[best_idx];
    return out;
}

}  // namespace

std::vector<FoldResult> loocv(const Matrix& x, const std::vector<int>& y, int n_classes,
                              const std::string& model_name, const SearchSpace& space, const LoocvConfig& cfg,
                              std::uint64_t seed, unsigned jobs,
                              const std::map<std::size_t, std::vector<double>>* test_overrides) {
    const std::size_t n = x.n_rows();
    if (n != y.size()) throw std::logic_error("loocv: X/y size mismatch");
    if (n < static_cast<std::size_t>(n_classes) + 1) {
        throw ValidationError("loocv requires at least C+1 participants");
    }
    {
        std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
        for (int label : y) ++counts[static_cast<std::size_t>(label)];
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] > 0 && counts[c] < 2) {
                throw ValidationError("loocv: class " + std::to_string(c) +
                                      " has fewer than 2 participants and can never be trained and tested");
            }
        }
    }

    LoocvConfig effective_cfg = cfg;
    {
        const auto probe = models::make_classifier(model_name);
        if (probe->models_class_prior()) effective_cfg.prep.smote_enabled = false;
    }
    const bool scale = models::make_classifier(model_name)->needs_scaled_features();

    std::vector<FoldResult> results(n);
    parallel_for(n, jobs, [&](std::size_t p) {
        const std::uint64_t fold_seed = derive_seed(seed, {0xF01Du, p});
        std::vector<std::size_t> train_idx;
        train_idx.reserve(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (i != p) train_idx.push_back(i);
        }
        Matrix x_tr = x.select_rows(train_idx);
        std::vector<int> y_tr;
        y_tr.reserve(train_idx.size());
        for (std::size_t i : train_idx) y_tr.push_back(y[i]);

        const auto inner =
            select_hyperparameters(x_tr, y_tr, n_classes, model_name, space, effective_cfg, fold_seed, scale);

        const auto prepared =
            prepare_training(x_tr, y_tr, n_classes, scale, effective_cfg.prep, derive_seed(fold_seed, {0x5307Eu}));
        auto model = models::make_classifier(model_name);
        model->fit(prepared.x, prepared.y, n_classes, inner.chosen, derive_seed(fold_seed, {0x30DE1u}));

        if (!effective_cfg.dump_dir.empty()) {
            const auto dir = std::filesystem::path(effective_cfg.dump_dir) / model_name;
            std::filesystem::create_directories(dir);
            std::vector<std::string> header = {"row_id", "label"};
            for (const auto& name : prepared.x.col_names) header.push_back(name);
            CsvWriter w((dir / ("fold_" + std::to_string(p) + ".csv")).string(), header);
            std::vector<std::string> fields;
            for (std::size_t r = 0; r < prepared.x.n_rows(); ++r) {
                fields.clear();
                fields.push_back(r < prepared.x.row_ids.size() ? prepared.x.row_ids[r] : "");
                fields.push_back(format_int(prepared.y[r]));
                for (double v : prepared.x.data[r]) fields.push_back(format_double(v));
                w.write_row(fields);
            }
            w.close();
        }

        std::vector<double> test_row = x.data[p];
        if (test_overrides) {
            const auto it = test_overrides->find(p);
            if (it != test_overrides->end()) test_row = it->second;
        }
        Matrix x_test;
        x_test.col_names = x.col_names;
        x_test.data.push_back(transform_row(prepared.plans, std::move(test_row)));
        const auto scores = model->predict_scores(x_test);

        FoldResult fr;
        fr.participant_id = p < x.row_ids.size() ? x.row_ids[p] : std::to_string(p);
        fr.true_label = y[p];
        fr.scores = scores.front();
        fr.predicted = models::argmax_class(fr.scores);
        fr.chosen = inner.chosen;
        fr.fold_seed = fold_seed;
        fr.stratification_degraded = inner.degraded;
        results[p] = std::move(fr);
    });
    return results;
}

double macro_f1(const std::vector<std::vector<std::size_t>>& confusion) {
    const std::size_t c = confusion.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        std::size_t tp = confusion[i][i], fp = 0, fn = 0;
        for (std::size_t j = 0; j < c; ++j) {
            if (j != i) {
                fn += confusion[i][j];
                fp += confusion[j][i];
            }
        }
        const double precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        sum += (precision + recall > 0.0) ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    return sum / static_cast<double>(c);
}

MetricsReport compute_metrics(const std::vector<FoldResult>& folds, int n_classes) {
    if (folds.empty()) throw ValidationError("compute_metrics requires at least one fold result");
    MetricsReport out;
    out.n = folds.size();
    const auto nc = static_cast<std::size_t>(n_classes);
    out.confusion.assign(nc, std::vector<std::size_t>(nc, 0));
    std::size_t correct = 0;
    for (const auto& f : folds) {
        ++out.confusion[static_cast<std::size_t>(f.true_label)][static_cast<std::size_t>(f.predicted)];
        if (f.true_label == f.predicted) ++correct;
    }
    out.accuracy_pct = round_half_up(100.0 * static_cast<double>(correct) / static_cast<double>(out.n), 2);
    out.per_class.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        std::size_t tp = out.confusion[c][c], fp = 0, fn = 0, support = 0;
        for (std::size_t j = 0; j < nc; ++j) {
            support += out.confusion[c][j];
            if (j != c) {
                fn += out.confusion[c][j];
                fp += out.confusion[j][c];
            }
        }
        const double precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        const double f1 = (precision + recall > 0.0) ? 2.0 * precision * recall / (precision + recall) : 0.0;
        out.per_class[c] = {round_half_up(100.0 * precision, 2), round_half_up(100.0 * recall, 2),
                            round_half_up(100.0 * f1, 2), support};
    }
    return out;
}

std::vector<BenchmarkEntry> run_benchmark(const Matrix& x, const std::vector<int>& y, int n_classes,
                                          const std::vector<RosterEntry>& roster, const LoocvConfig& cfg,
                                          std::uint64_t seed, unsigned jobs) {
    if (roster.empty()) throw ValidationError("run_benchmark: empty model roster");
    std::vector<BenchmarkEntry> out;
    out.reserve(roster.size());
    for (const auto& entry : roster) {
        BenchmarkEntry bench;
        bench.model = entry.model;
        bench.folds = loocv(x, y, n_classes, entry.model, expand_grid(entry.grid), cfg, seed, jobs);
        bench.metrics = compute_metrics(bench.folds, n_classes);
        bench.metrics.model_name = entry.model;
        out.push_back(std::move(bench));
    }
    return out;
}

const char* display_name(const std::string& model_name) {
    if (model_name == "bl1_majority") return "BL1:MC";
    if (model_name == "bl2_decision_tree") return "BL2:DT";
    if (model_name == "bl3_weighted_random") return "BL3:RWC";
    if (model_name == "decision_tree") return "DT";
    if (model_name == "knn") return "KNN";
    if (model_name == "svm_linear") return "SVM";
    if (model_name == "random_forest") return "RF";
    if (model_name == "gbt") return "GBT";
    return model_name.c_str();
}

namespace {

std::string fmt_pct(double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string classification_table_markdown(const std::vector<BenchmarkEntry>& entries,
                                          const std::vector<std::string>& class_names) {
    std::string md = "| Model | Accuracy |";
    for (const auto& c : class_names) md += " " + c + " P | " + c + " R | " + c + " F1 |";
    md += "\n|---|---:|";
    for (std::size_t c = 0; c < class_names.size(); ++c) md += "---:|---:|---:|";
    md += "\n";
    for (const auto& e : entries) {
        md += std::string("| ") + display_name(e.model) + " | " + fmt_pct(e.metrics.accuracy_pct) + " |";
        for (const auto& cm : e.metrics.per_class) {
            md += " " + fmt_pct(cm.precision_pct) + " | " + fmt_pct(cm.recall_pct) + " | " + fmt_pct(cm.f1_pct) +
                  " |";
        }
        md += "\n";
    }
    return md;
}

}  // namespace biomlab::eval
