#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biomlab/matrix.hpp"

namespace biomlab::preprocess {

struct ZscoreDrop {
    std::size_t row = 0;
    std::size_t col = 0;
    double z = 0.0;
};

struct ZscoreResult {
    std::vector<std::size_t> kept_rows;
    std::vector<ZscoreDrop> drops;  // one entry per triggering (row, feature)
};

// Drops a row iff any feature has |z| strictly above threshold, with column
// mean and population SD over the non-missing entries of the input matrix.
// Constant columns never trigger. Throws when fewer than 3 rows are given or
// when every row would be dropped.
ZscoreResult zscore_filter(const Matrix& m, double threshold = 3.0);

struct ImputePlan {
    std::vector<std::string> col_names;
    std::vector<double> medians;  // linear-interpolation medians of training rows
};

// Throws listing any feature with no non-missing training value.
ImputePlan fit_impute(const Matrix& train);
Matrix apply_impute(const ImputePlan& plan, Matrix m);

// Mode imputation for categorical columns, ties broken by the
// lexicographically smallest value.
std::string fit_impute_mode(const std::vector<std::optional<std::string>>& column);
std::vector<std::string> apply_impute_mode(const std::string& mode,
                                           const std::vector<std::optional<std::string>>& column);

class StandardScaler {
public:
    // Per-column mean and population SD from training rows; SDs below the
    // floor mark the column constant, which transforms to exactly 0.
    void fit(const Matrix& train);
    Matrix transform(Matrix m) const;
    Matrix inverse_transform(Matrix m) const;
    bool fitted() const { return !means_.empty(); }

    static constexpr double kStdFloor = 1e-12;

private:
    std::vector<double> means_;
    std::vector<double> stds_;
    std::vector<bool> constant_;
};

struct SmoteResult {
    Matrix x;                  // originals verbatim first, then synthetic rows
    std::vector<int> y;
    std::size_t synthetic_count = 0;
};

// Equalizes every class count to the majority count by interpolating between
// a class member and one of its k nearest same-class neighbors (Euclidean);
// k is clamped to class_size - 1. Throws for a minority class of size 1.
SmoteResult smote(const Matrix& x, const std::vector<int>& y, int n_classes, int k, std::uint64_t seed);

}  // namespace biomlab::preprocess
