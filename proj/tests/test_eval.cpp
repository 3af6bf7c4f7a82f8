#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "biomlab/eval.hpp"
#include "biomlab/rng.hpp"

using namespace biomlab;
using namespace biomlab::eval;

namespace {

Matrix matrix_of(std::vector<std::vector<double>> rows) {
    Matrix m;
    if (!rows.empty()) {
        for (std::size_t c = 0; c < rows.front().size(); ++c) m.col_names.push_back("f" + std::to_string(c));
    }
    for (std::size_t r = 0; r < rows.size(); ++r) m.row_ids.push_back("p" + std::to_string(r));
    m.data = std::move(rows);
    return m;
}

// separable 4-class cohort
void make_cohort(Rng& rng, const std::vector<int>& counts, Matrix& x, std::vector<int>& y) {
    std::vector<std::vector<double>> rows;
    y.clear();
    for (int cls = 0; cls < static_cast<int>(counts.size()); ++cls) {
        for (int i = 0; i < counts[static_cast<std::size_t>(cls)]; ++i) {
            rows.push_back({rng.normal(cls * 4.0, 1.0), rng.normal(-cls * 3.0, 1.0), rng.normal(0, 1)});
            y.push_back(cls);
        }
    }
    x = matrix_of(std::move(rows));
}

}  // namespace

TEST_CASE("expand_grid is a deterministic cartesian product") {
    const auto space = expand_grid({{"a", {1, 2}}, {"b", {10, 20, 30}}});
    REQUIRE(space.points.size() == 6);
    CHECK(space.points.front().at("a") == 1);
    CHECK(space.points.front().at("b") == 10);
    CHECK(space.points.back().at("a") == 2);
    CHECK(space.points.back().at("b") == 30);
    CHECK(expand_grid({}).points.size() == 1);
}

TEST_CASE("prepare_training pipeline order and plans") {
    Rng rng(3);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 30; ++i) {
        rows.push_back({rng.normal(0, 1), i == 5 ? kMissing : rng.normal(10, 2)});
        y.push_back(i < 20 ? 0 : 1);
    }
    const auto m = matrix_of(rows);
    PreprocessConfig cfg;
    const auto prepared = prepare_training(m, y, 2, true, cfg, 7);
    // SMOTE equalized
    std::array<int, 2> counts{};
    for (int label : prepared.y) ++counts[static_cast<std::size_t>(label)];
    CHECK(counts[0] == counts[1]);
    // no missing values remain
    for (const auto& row : prepared.x.data) {
        for (double v : row) CHECK_FALSE(is_missing(v));
    }
    // transform_row applies the same plans to a fresh row
    const auto t = transform_row(prepared.plans, {kMissing, 10.0});
    CHECK_FALSE(is_missing(t[0]));
}

TEST_CASE("loocv: one fold per participant, each held out once, deterministic") {
    Rng rng(17);
    Matrix x;
    std::vector<int> y;
    make_cohort(rng, {3, 2}, x, y);
    LoocvConfig cfg;
    cfg.prep.zscore_enabled = false;  // tiny cohort
    cfg.prep.smote_enabled = false;
    const auto folds = loocv(x, y, 2, "decision_tree", expand_grid({}), cfg, 1, 1);
    REQUIRE(folds.size() == 5);
    std::set<std::string> held;
    for (const auto& f : folds) held.insert(f.participant_id);
    CHECK(held.size() == 5);

    const auto again = loocv(x, y, 2, "decision_tree", expand_grid({}), cfg, 1, 2);
    for (std::size_t i = 0; i < folds.size(); ++i) {
        CHECK(folds[i].predicted == again[i].predicted);
        CHECK(folds[i].scores == again[i].scores);
        CHECK(folds[i].fold_seed == again[i].fold_seed);
    }
}

TEST_CASE("loocv preconditions") {
    Rng rng(23);
    Matrix x;
    std::vector<int> y;
    make_cohort(rng, {3, 1}, x, y);  // class with a single participant
    LoocvConfig cfg;
    CHECK_THROWS_AS(loocv(x, y, 2, "bl1_majority", expand_grid({}), cfg, 1, 1), ValidationError);
}

TEST_CASE("leakage guard: poisoning a held-out row changes only that fold") {
    Rng rng(29);
    Matrix x;
    std::vector<int> y;
    make_cohort(rng, {6, 6, 5}, x, y);
    LoocvConfig cfg;
    cfg.inner_folds = 3;
    const auto grid = expand_grid({{"max_depth", {2, 4}}});

    const auto clean = loocv(x, y, 3, "decision_tree", grid, cfg, 5, 2);

    const std::size_t victim = 4;
    std::map<std::size_t, std::vector<double>> overrides;
    overrides[victim] = {1e9, 1e9, 1e9};
    const auto poisoned = loocv(x, y, 3, "decision_tree", grid, cfg, 5, 2, &overrides);

    for (std::size_t p = 0; p < clean.size(); ++p) {
        CHECK(clean[p].chosen == poisoned[p].chosen);  // hyperparameter choices never see test rows
        if (p != victim) {
            CHECK(clean[p].predicted == poisoned[p].predicted);
            CHECK(clean[p].scores == poisoned[p].scores);
        }
    }
}

TEST_CASE("no synthetic row reaches a test fold") {
    Rng rng(31);
    Matrix x;
    std::vector<int> y;
    make_cohort(rng, {10, 4}, x, y);
    PreprocessConfig cfg;
    const auto prepared = prepare_training(x, y, 2, false, cfg, 3);
    CHECK(prepared.synthetic_rows > 0);
    std::size_t synthetic_named = 0;
    for (const auto& id : prepared.x.row_ids) {
        if (id.rfind("synthetic_", 0) == 0) ++synthetic_named;
    }
    CHECK(synthetic_named == prepared.synthetic_rows);
    // training rows precede synthetic rows; a test view is a single original row
    for (std::size_t i = 0; i < x.n_rows() - (prepared.rows_dropped); ++i) {
        CHECK(prepared.x.row_ids[i].rfind("synthetic_", 0) != 0);
    }
}

TEST_CASE("inner search picks the obviously better hyperparameter") {
    // depth-1 CART cannot represent this target; depth-3 can
    Rng rng(41);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
        rows.push_back({a, b, rng.normal(0, 0.1)});
        y.push_back((a > 0) == (b > 0) ? 1 : 0);  // XOR-ish
    }
    Matrix x = matrix_of(rows);
    LoocvConfig cfg;
    cfg.prep.smote_enabled = false;
    cfg.prep.zscore_enabled = false;
    const auto grid = expand_grid({{"max_depth", {1, 4}}});
    const auto folds = loocv(x, y, 2, "decision_tree", grid, cfg, 9, 2);
    std::size_t deep = 0;
    for (const auto& f : folds) {
        if (f.chosen.at("max_depth") == 4) ++deep;
    }
    CHECK(deep > folds.size() / 2);
}

TEST_CASE("stratification degrades with a warning when a class has one member in outer-train") {
    Rng rng(47);
    Matrix x;
    std::vector<int> y;
    make_cohort(rng, {8, 2}, x, y);
    LoocvConfig cfg;
    cfg.prep.smote_enabled = false;
    cfg.prep.zscore_enabled = false;
    const auto grid = expand_grid({{"max_depth", {1, 2}}});
    const auto folds = loocv(x, y, 2, "decision_tree", grid, cfg, 3, 1);
    // when one of the two class-1 members is held out, the other is alone
    std::size_t degraded = 0;
    for (const auto& f : folds) degraded += f.stratification_degraded ? 1 : 0;
    CHECK(degraded == 2);
}

TEST_CASE("compute_metrics: perfect and degenerate confusions") {
    std::vector<FoldResult> folds;
    const auto push = [&](int t, int p) {
        FoldResult f;
        f.true_label = t;
        f.predicted = p;
        folds.push_back(f);
    };
    push(0, 0);
    push(0, 0);
    push(1, 1);
    push(1, 1);
    auto report = compute_metrics(folds, 2);
    CHECK(report.accuracy_pct == doctest::Approx(100.0));
    for (const auto& cm : report.per_class) {
        CHECK(cm.precision_pct == doctest::Approx(100.0));
        CHECK(cm.recall_pct == doctest::Approx(100.0));
        CHECK(cm.f1_pct == doctest::Approx(100.0));
    }

    folds.clear();
    push(0, 0);
    push(1, 0);  // everything predicted class 0
    report = compute_metrics(folds, 2);
    CHECK(report.accuracy_pct == doctest::Approx(50.0));
    CHECK(report.per_class[1].precision_pct == doctest::Approx(0.0));
    CHECK(report.per_class[1].recall_pct == doctest::Approx(0.0));
    CHECK(report.per_class[1].f1_pct == doctest::Approx(0.0));
}

TEST_CASE("compute_metrics: two-decimal half-up rounding on a 77/87 recall") {
    std::vector<FoldResult> folds;
    for (int i = 0; i < 87; ++i) {
        FoldResult f;
        f.true_label = 1;
        f.predicted = i < 77 ? 1 : 0;
        folds.push_back(f);
    }
    // some class-0 truths so precision is defined
    for (int i = 0; i < 13; ++i) {
        FoldResult f;
        f.true_label = 0;
        f.predicted = 0;
        folds.push_back(f);
    }
    const auto report = compute_metrics(folds, 2);
    CHECK(report.per_class[1].recall_pct == doctest::Approx(88.51));  // 77/87 = 88.5057...
    CHECK(report.per_class[1].support == 87);
}

TEST_CASE("macro-F1 is invariant to class index permutation") {
    const std::vector<std::vector<std::size_t>> confusion = {{5, 2, 1}, {1, 7, 2}, {0, 3, 9}};
    std::vector<std::vector<std::size_t>> permuted(3, std::vector<std::size_t>(3));
    const std::array<std::size_t, 3> perm = {2, 0, 1};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) permuted[perm[i]][perm[j]] = confusion[i][j];
    }
    CHECK(macro_f1(confusion) == doctest::Approx(macro_f1(permuted)).epsilon(1e-12));
}

TEST_CASE("majority baseline LOOCV accuracy on the 87/24/19/75 cohort is exactly 87/205") {
    Rng rng(53);
    Matrix x;
    std::vector<int> y;
    make_cohort(rng, {24, 19, 87, 75}, x, y);
    LoocvConfig cfg;
    const auto folds = loocv(x, y, 4, "bl1_majority", expand_grid({}), cfg, 1, 2);
    const auto report = compute_metrics(folds, 4);
    CHECK(report.accuracy_pct == doctest::Approx(42.44));
    std::size_t correct = 0;
    for (const auto& f : folds) correct += f.predicted == f.true_label ? 1 : 0;
    CHECK(correct == 87);
}

TEST_CASE("run_benchmark pairs folds across models and repeats identically") {
    Rng rng(59);
    Matrix x;
    std::vector<int> y;
    make_cohort(rng, {8, 7}, x, y);
    LoocvConfig cfg;
    cfg.prep.smote_enabled = true;
    std::vector<RosterEntry> roster = {{"bl1_majority", {}}, {"bl1_majority", {}}, {"knn", {{"k", {1, 3}}}}};
    const auto entries = run_benchmark(x, y, 2, roster, cfg, 11, 2);
    REQUIRE(entries.size() == 3);
    // identical model listed twice: identical rows
    CHECK(entries[0].metrics.accuracy_pct == entries[1].metrics.accuracy_pct);
    CHECK(entries[0].metrics.confusion == entries[1].metrics.confusion);
    // paired folds: same fold seeds across models
    for (std::size_t p = 0; p < entries[0].folds.size(); ++p) {
        CHECK(entries[0].folds[p].fold_seed == entries[2].folds[p].fold_seed);
    }
    const auto md = classification_table_markdown(entries, {"a", "b"});
    CHECK(md.find("BL1:MC") != std::string::npos);
    CHECK(md.find("KNN") != std::string::npos);
}
