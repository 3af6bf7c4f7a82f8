#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "biomlab/matrix.hpp"
#include "biomlab/models.hpp"
#include "biomlab/preprocess.hpp"

namespace biomlab::eval {

struct PreprocessConfig {
    bool zscore_enabled = true;
    double zscore_threshold = 3.0;
    bool smote_enabled = true;
    int smote_k = 5;
};

// Transformations fitted on one fold's training rows; test rows are imputed
// and scaled with these plans but never filtered or oversampled.
struct FoldPlans {
    preprocess::ImputePlan impute;
    preprocess::StandardScaler scaler;
    bool scaled = false;
};

struct PreparedTraining {
    Matrix x;  // impute -> z-score filter -> (scale) -> SMOTE
    std::vector<int> y;
    FoldPlans plans;
    std::size_t rows_dropped = 0;
    std::size_t synthetic_rows = 0;
    bool smote_skipped = false;  // a surviving class was too small to oversample
};

PreparedTraining prepare_training(const Matrix& x_train, const std::vector<int>& y_train, int n_classes,
                                  bool scale, const PreprocessConfig& cfg, std::uint64_t smote_seed);

std::vector<double> transform_row(const FoldPlans& plans, std::vector<double> row);

// Deterministic cartesian expansion of a named grid (keys sorted).
struct SearchSpace {
    std::vector<models::Hyper> points;  // empty => single default point
};
SearchSpace expand_grid(const std::map<std::string, std::vector<double>>& grid);

struct FoldResult {
    std::string participant_id;
    int true_label = 0;
    int predicted = 0;
    std::vector<double> scores;
    models::Hyper chosen;
    std::uint64_t fold_seed = 0;
    bool stratification_degraded = false;
};

struct LoocvConfig {
    int inner_folds = 3;
    std::size_t search_budget = 24;  // random search when the grid is larger
    PreprocessConfig prep;
    std::string dump_dir;  // when set, per-fold prepared training matrices land here as CSV
};

// Leave-one-person-out with an inner stratified k-fold hyperparameter search
// maximizing macro-F1 (pooled inner confusion). Every seed derives from
// (seed, participant index); the fold structure is model-independent so a
// shared run seed pairs folds across a model roster.
//
// `test_overrides` substitutes a participant's feature row only in its
// held-out role; training views always use the original matrix. The audit
// hook behind the leakage guard: a poisoned test row must change nothing but
// its own fold's prediction.
std::vector<FoldResult> loocv(const Matrix& x, const std::vector<int>& y, int n_classes,
                              const std::string& model_name, const SearchSpace& space, const LoocvConfig& cfg,
                              std::uint64_t seed, unsigned jobs,
                              const std::map<std::size_t, std::vector<double>>* test_overrides = nullptr);

struct ClassMetrics {
    double precision_pct = 0.0;  // two decimals, half-up
    double recall_pct = 0.0;
    double f1_pct = 0.0;
    std::size_t support = 0;
};

struct MetricsReport {
    std::string model_name;
    std::size_t n = 0;
    double accuracy_pct = 0.0;
    std::vector<ClassMetrics> per_class;
    std::vector<std::vector<std::size_t>> confusion;  // confusion[true][pred]
};

MetricsReport compute_metrics(const std::vector<FoldResult>& folds, int n_classes);
double macro_f1(const std::vector<std::vector<std::size_t>>& confusion);  // unrounded fraction

struct RosterEntry {
    std::string model;
    std::map<std::string, std::vector<double>> grid;
};

struct BenchmarkEntry {
    std::string model;
    std::vector<FoldResult> folds;
    MetricsReport metrics;
};

std::vector<BenchmarkEntry> run_benchmark(const Matrix& x, const std::vector<int>& y, int n_classes,
                                          const std::vector<RosterEntry>& roster, const LoocvConfig& cfg,
                                          std::uint64_t seed, unsigned jobs);

// Figure-style table: one row per model, accuracy plus per-class P/R/F1.
std::string classification_table_markdown(const std::vector<BenchmarkEntry>& entries,
                                          const std::vector<std::string>& class_names);
const char* display_name(const std::string& model_name);

}  // namespace biomlab::eval
