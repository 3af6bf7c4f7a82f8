#include "biomlab/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "biomlab/rng.hpp"

namespace biomlab::preprocess {

ZscoreResult zscore_filter(const Matrix& m, double threshold) {
    if (m.n_rows() < 3) throw ValidationError("zscore_filter requires at least 3 rows");
    if (!(threshold > 0.0)) throw ValidationError("zscore_filter threshold must be positive");

    const std::size_t cols = m.n_cols();
    std::vector<double> mu(cols, 0.0), sigma(cols, 0.0);
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<double> vals;
        for (const auto& row : m.data) {
            if (!is_missing(row[c])) vals.push_back(row[c]);
        }
        if (vals.empty()) continue;
        mu[c] = mean_of(vals);
        sigma[c] = population_stddev(vals);
    }

    ZscoreResult out;
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        bool drop = false;
        for (std::size_t c = 0; c < cols; ++c) {
            const double x = m.data[r][c];
            if (is_missing(x) || sigma[c] <= 0.0) continue;
            const double z = (x - mu[c]) / sigma[c];
            if (std::abs(z) > threshold) {
                out.drops.push_back({r, c, z});
                drop = true;
            }
        }
        if (!drop) out.kept_rows.push_back(r);
    }
    if (out.kept_rows.empty()) {
        throw ValidationError("zscore_filter dropped every row; threshold misconfigured");
    }
    return out;
}

ImputePlan fit_impute(const Matrix& train) {
    ImputePlan plan;
    plan.col_names = train.col_names;
    plan.medians.resize(train.n_cols(), kMissing);
    std::string empty_features;
    for (std::size_t c = 0; c < train.n_cols(); ++c) {
        std::vector<double> vals;
        for (const auto& row : train.data) {
            if (!is_missing(row[c])) vals.push_back(row[c]);
        }
        if (vals.empty()) {
            if (!empty_features.empty()) empty_features += ", ";
            empty_features += train.col_names[c];
            continue;
        }
        plan.medians[c] = quantile(vals, 0.5);
    }
    if (!empty_features.empty()) {
        throw ValidationError("fit_impute: features entirely missing in training data: " + empty_features);
    }
    return plan;
}

Matrix apply_impute(const ImputePlan& plan, Matrix m) {
    if (plan.medians.size() != m.n_cols()) {
        throw std::logic_error("apply_impute: column count mismatch");
    }
    for (auto& row : m.data) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (is_missing(row[c])) row[c] = plan.medians[c];
        }
    }
    return m;
}

std::string fit_impute_mode(const std::vector<std::optional<std::string>>& column) {
    std::map<std::string, std::size_t> counts;
    for (const auto& v : column) {
        if (v) ++counts[*v];
    }
    if (counts.empty()) throw ValidationError("fit_impute_mode: column entirely missing");
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [value, count] : counts) {  // map order = lexicographic, first max wins ties
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    }
    return best;
}

std::vector<std::string> apply_impute_mode(const std::string& mode,
                                           const std::vector<std::optional<std::string>>& column) {
    std::vector<std::string> out;
    out.reserve(column.size());
    for (const auto& v : column) out.push_back(v ? *v : mode);
    return out;
}

void StandardScaler::fit(const Matrix& train) {
    const std::size_t cols = train.n_cols();
    means_.assign(cols, 0.0);
    stds_.assign(cols, 1.0);
    constant_.assign(cols, false);
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<double> vals;
        for (const auto& row : train.data) {
            if (!is_missing(row[c])) vals.push_back(row[c]);
        }
        if (vals.empty()) {
            constant_[c] = true;
            continue;
        }
        means_[c] = mean_of(vals);
        const double sd = population_stddev(vals);
        if (sd <= kStdFloor) {
            constant_[c] = true;
        } else {
            stds_[c] = sd;
        }
    }
}

Matrix StandardScaler::transform(Matrix m) const {
    if (means_.size() != m.n_cols()) throw std::logic_error("scaler: column count mismatch");
    for (auto& row : m.data) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (is_missing(row[c])) continue;
            row[c] = constant_[c] ? 0.0 : (row[c] - means_[c]) / stds_[c];
        }
    }
    return m;
}

Matrix StandardScaler::inverse_transform(Matrix m) const {
    if (means_.size() != m.n_cols()) throw std::logic_error("scaler: column count mismatch");
    for (auto& row : m.data) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (is_missing(row[c])) continue;
            row[c] = constant_[c] ? means_[c] : row[c] * stds_[c] + means_[c];
        }
    }
    return m;
}

SmoteResult smote(const Matrix& x, const std::vector<int>& y, int n_classes, int k, std::uint64_t seed) {
    if (x.n_rows() != y.size()) throw std::logic_error("smote: X/y size mismatch");
    if (k < 1) throw ValidationError("smote requires k >= 1");

    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] >= n_classes) throw std::logic_error("smote: label out of range");
        by_class[static_cast<std::size_t>(y[i])].push_back(i);
    }
    std::size_t majority = 0;
    for (const auto& members : by_class) majority = std::max(majority, members.size());

    SmoteResult out;
    out.x = x;
    out.y = y;

    for (int c = 0; c < n_classes; ++c) {
        const auto& members = by_class[static_cast<std::size_t>(c)];
        const std::size_t m = members.size();
        if (m == 0 || m == majority) continue;
        if (m == 1) {
            throw ValidationError("smote: class " + std::to_string(c) +
                                  " has a single sample; no neighbor to interpolate");
        }
        const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), m - 1);

        // k nearest same-class neighbors per member, ties by original row index
        std::vector<std::vector<std::size_t>> neighbors(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<std::pair<double, std::size_t>> dist;
            dist.reserve(m - 1);
            const auto& xi = x.data[members[i]];
            for (std::size_t j = 0; j < m; ++j) {
                if (j == i) continue;
                const auto& xj = x.data[members[j]];
                double d2 = 0.0;
                for (std::size_t f = 0; f < xi.size(); ++f) {
                    const double diff = xi[f] - xj[f];
                    d2 += diff * diff;
                }
                dist.emplace_back(d2, j);
            }
            std::sort(dist.begin(), dist.end());
            neighbors[i].reserve(k_eff);
            for (std::size_t t = 0; t < k_eff; ++t) neighbors[i].push_back(dist[t].second);
        }

        Rng rng = derive_rng(seed, {0x5407Eu, static_cast<std::uint64_t>(c)});
        for (std::size_t s = m; s < majority; ++s) {
            const std::size_t i = rng.uniform_index(m);
            const std::size_t nn = neighbors[i][rng.uniform_index(k_eff)];
            const double u = rng.uniform();
            const auto& xi = x.data[members[i]];
            const auto& xn = x.data[members[nn]];
            std::vector<double> synth(xi.size());
            for (std::size_t f = 0; f < xi.size(); ++f) synth[f] = xi[f] + u * (xn[f] - xi[f]);
            out.x.data.push_back(std::move(synth));
            out.x.row_ids.push_back("synthetic_" + std::to_string(c) + "_" + std::to_string(s - m));
            out.y.push_back(c);
            ++out.synthetic_count;
        }
    }
    return out;
}

}  // namespace biomlab::preprocess
