#include "biomlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "biomlab/csv.hpp"
#include "biomlab/rng.hpp"

namespace biomlab::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }
double normal_sf(double x) { return 0.5 * std::erfc(x * 0.7071067811865475244); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::invalid_argument("normal_quantile p outside [0,1]");
    }
    // Beasley-Springer rational start, then Newton on the erfc-based CDF.
    double x;
    const double q = p - 0.5;
    if (std::abs(q) <= 0.42) {
        const double r = q * q;
        x = q * (((-25.44106049637 * r + 41.39119773534) * r - 18.61500062529) * r + 2.50662823884) /
            ((((3.13082909833 * r - 21.06224101826) * r + 23.08336743743) * r - 8.47351093090) * r + 1.0);
    } else {
        double r = q > 0.0 ? 1.0 - p : p;
        r = std::sqrt(-std::log(r));
        x = (((2.32121276858 * r + 4.85014127135) * r - 2.29796479134) * r - 2.78718931138) /
            ((1.63706781897 * r + 3.54388924762) * r + 1.0);
        if (q < 0.0) x = -x;
    }
    for (int it = 0; it < 4; ++it) {
        const double err = normal_cdf(x) - p;
        const double pdf = 0.3989422804014326779 * std::exp(-0.5 * x * x);
        if (pdf <= 0.0) break;
        const double step = err / pdf;
        x -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    return x;
}

namespace {

double poly(const double* c, int n, double x) {
    double r = c[0];
    double xp = 1.0;
    for (int i = 1; i < n; ++i) {
        xp *= x;
        r += c[i] * xp;
    }
    return r;
}

}  // namespace

ShapiroWilkResult shapiro_wilk(std::vector<double> x) {
    const int n = static_cast<int>(x.size());
    if (n < 3) throw ValidationError("shapiro_wilk requires n >= 3");
    if (n > 5000) throw ValidationError("shapiro_wilk supports n <= 5000");
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 0.0)) throw ValidationError("shapiro_wilk: zero variance sample");

    // AS R94 constants (Royston 1995).
    static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static const double c3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static const double c6[3] = {-0.4803, -0.082676, 0.0030302};
    static const double g[2] = {-2.273, 0.459};

    const double an = static_cast<double>(n);
    const int n2 = n / 2;
    std::vector<double> a(static_cast<std::size_t>(n2));

    if (n == 3) {
        a[0] = 0.70710678118654752440;  // sqrt(1/2)
    } else {
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (int i = 0; i < n2; ++i) {
            a[static_cast<std::size_t>(i)] = normal_quantile((static_cast<double>(i + 1) - 0.375) / an25);
            summ2 += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, 6, rsn) - a[0] / ssumm2;
        int i1;
        double fac;
        if (n > 5) {
            i1 = 2;
            const double a2 = -a[1] / ssumm2 + poly(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[0] = a1;
            a[1] = a2;
        } else {
            i1 = 1;
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
            a[0] = a1;
        }
        for (int i = i1; i < n2; ++i) a[static_cast<std::size_t>(i)] = -a[static_cast<std::size_t>(i)] / fac;
    }

    // W as the squared correlation between range-scaled data and the
    // antisymmetric coefficient vector; w1 = 1 - W carries the precision.
    double sa = 0.0, sx = 0.0;
    {
        int j = n - 1;
        for (int i = 0; i < n; ++i) {
            sx += x[static_cast<std::size_t>(i)] / range;
            if (i != j) {
                const int sign = i < j ? -1 : 1;
                sa += sign * a[static_cast<std::size_t>(std::min(i, j))];
            }
            --j;
        }
        sa /= an;
        sx /= an;
    }
    double ssa = 0.0, ssx = 0.0, sax = 0.0;
    {
        int j = n - 1;
        for (int i = 0; i < n; ++i) {
            double asa;
            if (i != j) {
                const int sign = i < j ? -1 : 1;
                asa = sign * a[static_cast<std::size_t>(std::min(i, j))] - sa;
            } else {
                asa = -sa;
            }
            const double xsx = x[static_cast<std::size_t>(i)] / range - sx;
            ssa += asa * asa;
            ssx += xsx * xsx;
            sax += asa * xsx;
            --j;
        }
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);

    ShapiroWilkResult out;
    out.w = 1.0 - w1;

    if (n == 3) {
        const double pi6 = 1.90985931710274;   // 6/pi
        const double stqr = 1.04719755119660;  // asin(sqrt(3/4))
        out.p = std::clamp(pi6 * (std::asin(std::sqrt(out.w)) - stqr), 0.0, 1.0);
        return out;
    }

    const double y = std::log(w1);
    const double lx = std::log(an);
    double m, s;
    if (n <= 11) {
        const double gamma = poly(g, 2, an);
        if (y >= gamma) {
            out.p = 1e-99;
            return out;
        }
        const double y2 = -std::log(gamma - y);
        m = poly(c3, 4, an);
        s = std::exp(poly(c4, 4, an));
        out.p = std::clamp(normal_sf((y2 - m) / s), 0.0, 1.0);
        return out;
    }
    m = poly(c5, 4, lx);
    s = std::exp(poly(c6, 3, lx));
    out.p = std::clamp(normal_sf((y - m) / s), 0.0, 1.0);
    return out;
}

namespace {

// Midranks of the pooled sample; returns (ranks for a, ranks for b, tie term
// sum(t^3 - t)) in pooled order.
struct PooledRanks {
    std::vector<double> rank_a;
    std::vector<double> rank_b;
    double tie_term = 0.0;
    bool has_ties = false;
};

PooledRanks midranks(const std::vector<double>& a, const std::vector<double>& b) {
    struct Entry {
        double value;
        bool from_a;
        std::size_t idx;
    };
    std::vector<Entry> pooled;
    pooled.reserve(a.size() + b.size());
    for (std::size_t i = 0; i < a.size(); ++i) pooled.push_back({a[i], true, i});
    for (std::size_t i = 0; i < b.size(); ++i) pooled.push_back({b[i], false, i});
    std::sort(pooled.begin(), pooled.end(),
              [](const Entry& x, const Entry& y) { return x.value < y.value; });

    PooledRanks out;
    out.rank_a.resize(a.size());
    out.rank_b.resize(b.size());
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
        const double t = static_cast<double>(j - i);
        if (t > 1.0) {
            out.has_ties = true;
            out.tie_term += t * t * t - t;
        }
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].from_a) out.rank_a[pooled[k].idx] = rank;
            else out.rank_b[pooled[k].idx] = rank;
        }
        i = j;
    }
    return out;
}

// Null distribution of U without ties: counts[u] = #subsets of size n1 from
// ranks 1..n1+n2 whose U statistic equals u, via the classic recurrence
// N(i, j, u) = N(i, j-1, u) + N(i-1, j, u-j).
std::vector<double> exact_u_counts(std::size_t n1, std::size_t n2) {
    const std::size_t umax = n1 * n2;
    std::vector<std::vector<std::vector<double>>> N(
        n1 + 1, std::vector<std::vector<double>>(n2 + 1, std::vector<double>(umax + 1, 0.0)));
    for (std::size_t i = 0; i <= n1; ++i) {
        for (std::size_t j = 0; j <= n2; ++j) {
            for (std::size_t u = 0; u <= i * j; ++u) {
                if (i == 0 || j == 0) {
                    N[i][j][u] = (u == 0) ? 1.0 : 0.0;
                    continue;
                }
                double v = N[i][j - 1][u];
                if (u >= j) v += N[i - 1][j][u - j];
                N[i][j][u] = v;
            }
        }
    }
    return N[n1][n2];
}

double binom(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return r;
}

// Exact two-sided p with ties: enumerate all C(N, n_a) group assignments of
// the pooled midranks; p = P(min(U_a, U_b) <= observed).
double exact_p_enumerate(const std::vector<double>& pooled_ranks, std::size_t n_a, double u_obs) {
    const std::size_t n = pooled_ranks.size();
    std::vector<std::size_t> comb(n_a);
    for (std::size_t i = 0; i < n_a; ++i) comb[i] = i;
    const double full = static_cast<double>(n_a) * static_cast<double>(n - n_a);
    double hits = 0.0, total = 0.0;
    while (true) {
        double rank_sum = 0.0;
        for (std::size_t i : comb) rank_sum += pooled_ranks[i];
        const double ua = rank_sum - static_cast<double>(n_a) * static_cast<double>(n_a + 1) / 2.0;
        if (std::min(ua, full - ua) <= u_obs + 1e-9) hits += 1.0;
        total += 1.0;
        std::ptrdiff_t i = static_cast<std::ptrdiff_t>(n_a) - 1;
        while (i >= 0 &&
               comb[static_cast<std::size_t>(i)] == static_cast<std::size_t>(i) + n - n_a) {
            --i;
        }
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n_a; ++j) comb[j] = comb[j - 1] + 1;
    }
    return hits / total;
}

}  // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw ValidationError("mann_whitney_u requires non-empty samples");
    const std::size_t n_a = a.size(), n_b = b.size();
    const auto ranks = midranks(a, b);
    double rank_sum_a = 0.0;
    for (double r : ranks.rank_a) rank_sum_a += r;
    const double ua = rank_sum_a - static_cast<double>(n_a) * static_cast<double>(n_a + 1) / 2.0;
    const double nab = static_cast<double>(n_a) * static_cast<double>(n_b);
    const double ub = nab - ua;

    MannWhitneyResult out;
    out.u = std::min(ua, ub);

    const std::size_t min_n = std::min(n_a, n_b);
    const std::size_t total_n = n_a + n_b;

    if (min_n < 8 && !ranks.has_ties) {
        const auto counts = exact_u_counts(n_a, n_b);
        const double total = binom(total_n, n_a);
        double cdf = 0.0;
        const auto u_int = static_cast<std::size_t>(std::llround(out.u));
        for (std::size_t u = 0; u <= u_int && u < counts.size(); ++u) cdf += counts[u];
        out.p = std::min(1.0, 2.0 * cdf / total);
        return out;
    }
    if (min_n < 8 && ranks.has_ties && total_n <= 12) {
        std::vector<double> pooled;
        pooled.reserve(total_n);
        for (double r : ranks.rank_a) pooled.push_back(r);
        for (double r : ranks.rank_b) pooled.push_back(r);
        std::sort(pooled.begin(), pooled.end());
        out.p = exact_p_enumerate(pooled, n_a, out.u);
        return out;
    }

    // Normal approximation with tie and continuity corrections.
    const double n = static_cast<double>(total_n);
    const double var = nab / 12.0 * ((n + 1.0) - ranks.tie_term / (n * (n - 1.0)));
    if (var <= 0.0) {
        out.p = 1.0;
        return out;
    }
    const double z = (out.u - nab / 2.0 + 0.5) / std::sqrt(var);
    out.p = std::clamp(2.0 * normal_cdf(z), 0.0, 1.0);
    return out;
}

double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw ValidationError("cohens_d requires n >= 2 per group");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = sample_variance(a);
    const double vb = sample_variance(b);
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    if (!(pooled > 0.0)) throw ValidationError("cohens_d: degenerate samples (zero pooled SD)");
    return (mean_of(a) - mean_of(b)) / std::sqrt(pooled);
}

BootstrapEffect bootstrap_effect(const std::vector<double>& a, const std::vector<double>& b,
                                 std::size_t resamples, std::uint64_t seed) {
    BootstrapEffect out;
    out.d_point = cohens_d(a, b);  // validates sizes and pooled SD
    out.mean_a = mean_of(a);
    out.mean_b = mean_of(b);

    std::vector<double> ds, mas, mbs;
    ds.reserve(resamples);
    mas.reserve(resamples);
    mbs.reserve(resamples);
    std::vector<double> ra(a.size()), rb(b.size());
    for (std::size_t r = 0; r < resamples; ++r) {
        Rng rng = derive_rng(seed, {0xB007u, r});
        for (auto& x : ra) x = a[rng.uniform_index(a.size())];
        for (auto& x : rb) x = b[rng.uniform_index(b.size())];
        const double na = static_cast<double>(ra.size());
        const double nb = static_cast<double>(rb.size());
        const double pooled =
            ((na - 1.0) * sample_variance(ra) + (nb - 1.0) * sample_variance(rb)) / (na + nb - 2.0);
        if (!(pooled > 0.0)) {
            ++out.degenerate_replicates;
            continue;
        }
        const double ma = mean_of(ra), mb = mean_of(rb);
        ds.push_back((ma - mb) / std::sqrt(pooled));
        mas.push_back(ma);
        mbs.push_back(mb);
    }
    if (out.degenerate_replicates * 10 > resamples) {
        throw ValidationError("bootstrap_effect: more than 10% degenerate replicates; samples too small");
    }
    out.d_ci_low = quantile(ds, 0.025);
    out.d_ci_high = quantile(ds, 0.975);
    out.mean_a_ci_low = quantile(mas, 0.025);
    out.mean_a_ci_high = quantile(mas, 0.975);
    out.mean_b_ci_low = quantile(mbs, 0.025);
    out.mean_b_ci_high = quantile(mbs, 0.975);
    return out;
}

std::vector<GroupComparisonRow> compare_groups(const std::vector<std::string>& feature_names,
                                               const std::vector<std::vector<double>>& rows,
                                               const std::vector<bool>& in_group_a,
                                               const std::vector<bool>& in_group_b,
                                               const CompareOptions& opts) {
    std::size_t count_a = 0, count_b = 0;
    for (bool g : in_group_a) count_a += g ? 1 : 0;
    for (bool g : in_group_b) count_b += g ? 1 : 0;
    if (count_a == 0 || count_b == 0) throw ValidationError("compare_groups: both groups must be non-empty");

    std::vector<GroupComparisonRow> out;
    out.reserve(feature_names.size());
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        GroupComparisonRow row;
        row.feature_name = feature_names[f];
        std::vector<double> va, vb;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double x = rows[i][f];
            if (is_missing(x)) continue;
            if (in_group_a[i]) va.push_back(x);
            else if (in_group_b[i]) vb.push_back(x);
        }
        row.n_a = va.size();
        row.n_b = vb.size();
        if (!va.empty()) row.mean_a = mean_of(va);
        if (!vb.empty()) row.mean_b = mean_of(vb);
        if (!va.empty() && !vb.empty()) row.mean_diff = row.mean_a - row.mean_b;

        const bool enough = va.size() >= 2 && vb.size() >= 2;
        double pooled = 0.0;
        if (enough) {
            const double na = static_cast<double>(va.size()), nb = static_cast<double>(vb.size());
            pooled = ((na - 1.0) * sample_variance(va) + (nb - 1.0) * sample_variance(vb)) / (na + nb - 2.0);
        }
        if (!enough || !(pooled > 0.0)) {
            row.degenerate = true;
            row.p_value = 1.0;
            row.ci_a_low = row.ci_a_high = row.mean_a;
            row.ci_b_low = row.ci_b_high = row.mean_b;
            out.push_back(std::move(row));
            continue;
        }

        BootstrapEffect boot;
        try {
            boot = bootstrap_effect(va, vb, opts.resamples, derive_seed(opts.seed, {0x57A7u, f}));
        } catch (const ValidationError&) {
            // near-constant feature: too many zero-SD replicates; degrade the
            // row instead of failing the whole comparison table
            row.degenerate = true;
            row.p_value = 1.0;
            row.ci_a_low = row.ci_a_high = row.mean_a;
            row.ci_b_low = row.ci_b_high = row.mean_b;
            out.push_back(std::move(row));
            continue;
        }
        row.cohens_d = boot.d_point;
        row.d_ci_low = boot.d_ci_low;
        row.d_ci_high = boot.d_ci_high;
        row.ci_a_low = boot.mean_a_ci_low;
        row.ci_a_high = boot.mean_a_ci_high;
        row.ci_b_low = boot.mean_b_ci_low;
        row.ci_b_high = boot.mean_b_ci_high;
        const auto mw = mann_whitney_u(va, vb);
        row.u_statistic = mw.u;
        row.p_value = mw.p;
        if (opts.bonferroni) {
            row.p_value = std::min(1.0, row.p_value * static_cast<double>(feature_names.size()));
        }
        row.significant = row.p_value < opts.alpha;
        out.push_back(std::move(row));
    }

    std::stable_sort(out.begin(), out.end(), [](const GroupComparisonRow& x, const GroupComparisonRow& y) {
        if (x.p_value != y.p_value) return x.p_value < y.p_value;
        return x.feature_name < y.feature_name;
    });
    return out;
}

void write_group_comparison_csv(const std::string& path, const std::vector<GroupComparisonRow>& rows) {
    CsvWriter w(path, {"feature", "mean_a", "ci_a_low", "ci_a_high", "mean_b", "ci_b_low", "ci_b_high",
                       "mean_diff", "cohens_d", "d_ci_low", "d_ci_high", "u", "p", "significant"});
    for (const auto& r : rows) {
        w.write_row({r.feature_name, format_double(r.mean_a), format_double(r.ci_a_low),
                     format_double(r.ci_a_high), format_double(r.mean_b), format_double(r.ci_b_low),
                     format_double(r.ci_b_high), format_double(r.mean_diff), format_double(r.cohens_d),
                     format_double(r.d_ci_low), format_double(r.d_ci_high), format_double(r.u_statistic),
                     format_double(r.p_value), r.significant ? "true" : "false"});
    }
    w.close();
}

}  // namespace biomlab::stats
