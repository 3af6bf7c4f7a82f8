#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biomlab/common.hpp"

namespace biomlab::stats {

// Standard normal helpers (erfc-based, ~machine precision).
double normal_cdf(double x);
double normal_sf(double x);
// Quantile by Newton refinement of a rational starting guess; |err| < 1e-13.
double normal_quantile(double p);

struct ShapiroWilkResult {
    double w = 0.0;
    double p = 0.0;
};

// Royston's 1995 algorithm (AS R94) for complete samples, 3 <= n <= 5000.
// Throws ValidationError for out-of-range n or a zero-range sample.
ShapiroWilkResult shapiro_wilk(std::vector<double> sample);

struct MannWhitneyResult {
    double u = 0.0;  // min(U_a, U_b), midranks for ties
    double p = 0.0;  // two-sided
};

// Routing: exact rank-count distribution when min(n) < 8 and there are no
// ties; exact full enumeration when ties are present and n_a+n_b <= 12;
// otherwise the normal approximation with tie and continuity corrections.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

// Pooled-SD standardized mean difference, sample variances.
double cohens_d(const std::vector<double>& a, const std::vector<double>& b);

struct BootstrapEffect {
    double d_point = 0.0;
    double d_ci_low = 0.0;
    double d_ci_high = 0.0;
    double mean_a = 0.0;
    double mean_a_ci_low = 0.0;
    double mean_a_ci_high = 0.0;
    double mean_b = 0.0;
    double mean_b_ci_low = 0.0;
    double mean_b_ci_high = 0.0;
    std::size_t degenerate_replicates = 0;
};

// Percentile bootstrap of Cohen's d and group means. Replicate r draws from
// the substream (seed, r), so results do not depend on execution order.
// Throws when more than 10% of replicates have zero pooled SD.
BootstrapEffect bootstrap_effect(const std::vector<double>& a, const std::vector<double>& b,
                                 std::size_t resamples, std::uint64_t seed);

struct GroupComparisonRow {
    std::string feature_name;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double mean_a = kMissing;
    double ci_a_low = kMissing;
    double ci_a_high = kMissing;
    double mean_b = kMissing;
    double ci_b_low = kMissing;
    double ci_b_high = kMissing;
    double mean_diff = kMissing;
    double cohens_d = kMissing;
    double d_ci_low = kMissing;
    double d_ci_high = kMissing;
    double u_statistic = kMissing;
    double p_value = 1.0;
    bool significant = false;
    bool degenerate = false;  // constant/insufficient data; p pinned to 1
};

struct CompareOptions {
    std::size_t resamples = 10000;
    std::uint64_t seed = 1;
    bool bonferroni = false;
    double alpha = 0.05;
};

// One row per feature column comparing group A vs group B values, ordered by
// ascending p (ties by feature name). Missing entries are dropped per group.
std::vector<GroupComparisonRow> compare_groups(const std::vector<std::string>& feature_names,
                                               const std::vector<std::vector<double>>& rows,
                                               const std::vector<bool>& in_group_a,
                                               const std::vector<bool>& in_group_b,
                                               const CompareOptions& opts);

void write_group_comparison_csv(const std::string& path, const std::vector<GroupComparisonRow>& rows);

}  // namespace biomlab::stats
