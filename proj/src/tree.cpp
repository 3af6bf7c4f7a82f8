#include "biomlab/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace biomlab::tree {

int Tree::descend(const std::vector<double>& x) const {
    int n = 0;
    while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
        const Node& node = nodes[static_cast<std::size_t>(n)];
        const double v = x[static_cast<std::size_t>(node.feature)];
        if (std::isnan(v)) {
            n = node.default_left ? node.left : node.right;
        } else {
            n = v < node.threshold ? node.left : node.right;
        }
    }
    return n;
}

const std::vector<double>& Tree::leaf_value(const std::vector<double>& x) const {
    return nodes[static_cast<std::size_t>(descend(x))].value;
}

ColumnIndex::ColumnIndex(const Matrix& m) : x(&m) {
    const int n = static_cast<int>(m.n_rows());
    order.resize(m.n_cols());
    for (std::size_t f = 0; f < m.n_cols(); ++f) {
        auto& ord = order[f];
        ord.resize(static_cast<std::size_t>(n));
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](int a, int b) {
            const double va = m.data[static_cast<std::size_t>(a)][f];
            const double vb = m.data[static_cast<std::size_t>(b)][f];
            if (va != vb) return va < vb;
            return a < b;
        });
    }
}

namespace {

struct SlotBest {
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
};

// Shared level-wise growth loop. The two modes differ only in how per-slot
// statistics accumulate and how candidate gains / leaf values are computed,
// captured by the Mode policy.
template <typename Mode>
Tree grow_impl(const ColumnIndex& cols, const GrowConfig& cfg, Mode& mode, Rng* feature_rng,
               int max_features, std::vector<int>* leaf_of_row) {
    const Matrix& x = *cols.x;
    const int n = static_cast<int>(x.n_rows());
    const int d = static_cast<int>(x.n_cols());

    Tree t;
    t.value_dim = mode.value_dim();

    std::vector<int> node_of_row(static_cast<std::size_t>(n), -1);
    for (int r = 0; r < n; ++r) {
        if (mode.row_active(r)) node_of_row[static_cast<std::size_t>(r)] = 0;
    }
    t.nodes.emplace_back();
    std::vector<int> active = {0};

    const bool subsample = max_features > 0 && max_features < d;
    std::vector<int> feature_pool(static_cast<std::size_t>(d));
    std::iota(feature_pool.begin(), feature_pool.end(), 0);

    // per-slot feature permission mask, slots laid out contiguously
    std::vector<char> allowed;

    for (int depth = 0; !active.empty(); ++depth) {
        const int n_slots = static_cast<int>(active.size());
        std::vector<int> slot_of_node(t.nodes.size(), -1);
        for (int s = 0; s < n_slots; ++s) slot_of_node[static_cast<std::size_t>(active[s])] = s;

        mode.begin_level(n_slots);
        for (int r = 0; r < n; ++r) {
            const int node = node_of_row[static_cast<std::size_t>(r)];
            if (node < 0) continue;
            const int s = slot_of_node[static_cast<std::size_t>(node)];
            if (s >= 0) mode.add_to_totals(s, r);
        }

        std::vector<char> splittable(static_cast<std::size_t>(n_slots), 0);
        bool any = false;
        if (depth < cfg.max_depth) {
            for (int s = 0; s < n_slots; ++s) {
                if (mode.slot_splittable(s, cfg)) {
                    splittable[static_cast<std::size_t>(s)] = 1;
                    any = true;
                }
            }
        }

        if (any && subsample) {
            allowed.assign(static_cast<std::size_t>(n_slots) * static_cast<std::size_t>(d), 0);
            for (int s = 0; s < n_slots; ++s) {
                if (!splittable[static_cast<std::size_t>(s)]) continue;
                // partial Fisher-Yates draw of max_features distinct features
                std::vector<int> pool = feature_pool;
                for (int k = 0; k < max_features; ++k) {
                    const auto pick =
                        k + static_cast<int>(feature_rng->uniform_index(pool.size() - static_cast<std::size_t>(k)));
                    std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick)]);
                    allowed[static_cast<std::size_t>(s) * static_cast<std::size_t>(d) +
                            static_cast<std::size_t>(pool[static_cast<std::size_t>(k)])] = 1;
                }
            }
        }

        std::vector<SlotBest> best(static_cast<std::size_t>(n_slots));
        if (any) {
            for (int f = 0; f < d; ++f) {
                mode.begin_feature(n_slots);
                for (int r : cols.order[static_cast<std::size_t>(f)]) {
                    const int node = node_of_row[static_cast<std::size_t>(r)];
                    if (node < 0) continue;
                    const int s = slot_of_node[static_cast<std::size_t>(node)];
                    if (s < 0 || !splittable[static_cast<std::size_t>(s)]) continue;
                    if (subsample &&
                        !allowed[static_cast<std::size_t>(s) * static_cast<std::size_t>(d) +
                                 static_cast<std::size_t>(f)]) {
                        continue;
                    }
                    const double v = x.data[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)];
                    double gain, thr;
                    if (mode.candidate(s, v, cfg, gain, thr)) {
                        auto& b = best[static_cast<std::size_t>(s)];
                        if (gain > b.gain) b = {gain, f, thr};
                    }
                    mode.accumulate(s, r, v);
                }
            }
        }

        std::vector<int> next_active;
        for (int s = 0; s < n_slots; ++s) {
            const int node_id = active[static_cast<std::size_t>(s)];
            Node& node = t.nodes[static_cast<std::size_t>(node_id)];
            node.cover = mode.slot_cover(s);
            const auto& b = best[static_cast<std::size_t>(s)];
            if (!splittable[static_cast<std::size_t>(s)] || b.feature < 0 ||
                !mode.accept_gain(b.gain, cfg)) {
                node.value = mode.leaf_value(s, cfg);
                continue;
            }
            node.feature = b.feature;
            node.threshold = b.threshold;
            node.left = static_cast<int>(t.nodes.size());
            node.right = node.left + 1;
            t.nodes.emplace_back();
            t.nodes.emplace_back();
            next_active.push_back(node.left);
            next_active.push_back(node.right);
        }

        if (next_active.empty()) break;

        for (int r = 0; r < n; ++r) {
            int& node_id = node_of_row[static_cast<std::size_t>(r)];
            if (node_id < 0) continue;
            const Node& node = t.nodes[static_cast<std::size_t>(node_id)];
            if (node.feature < 0) continue;
            const double v = x.data[static_cast<std::size_t>(r)][static_cast<std::size_t>(node.feature)];
            node_id = v < node.threshold ? node.left : node.right;
        }
        active = std::move(next_active);
    }

    if (leaf_of_row) *leaf_of_row = std::move(node_of_row);
    return t;
}

struct GiniMode {
    const std::vector<int>& y;
    const std::vector<double>& w;
    int n_classes;

    // per-slot totals and per-feature left accumulators
    std::vector<double> total;       // n_slots * n_classes
    std::vector<double> total_w;
    std::vector<double> left;        // n_slots * n_classes
    std::vector<double> left_w;
    std::vector<double> last_value;
    std::vector<char> has_last;

    int value_dim() const { return n_classes; }
    bool row_active(int r) const { return w[static_cast<std::size_t>(r)] > 0.0; }

    void begin_level(int n_slots) {
        total.assign(static_cast<std::size_t>(n_slots) * static_cast<std::size_t>(n_classes), 0.0);
        total_w.assign(static_cast<std::size_t>(n_slots), 0.0);
    }
    void add_to_totals(int s, int r) {
        total[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_classes) +
              static_cast<std::size_t>(y[static_cast<std::size_t>(r)])] += w[static_cast<std::size_t>(r)];
        total_w[static_cast<std::size_t>(s)] += w[static_cast<std::size_t>(r)];
    }
    double slot_cover(int s) const { return total_w[static_cast<std::size_t>(s)]; }

    static double gini(const double* counts, int c, double w_sum) {
        if (w_sum <= 0.0) return 0.0;
        double sq = 0.0;
        for (int i = 0; i < c; ++i) sq += counts[i] * counts[i];
        return 1.0 - sq / (w_sum * w_sum);
    }

    bool slot_splittable(int s, const GrowConfig& cfg) const {
        const double w_sum = total_w[static_cast<std::size_t>(s)];
        if (w_sum < 2.0 * cfg.min_samples_leaf) return false;
        const double* counts = &total[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_classes)];
        return gini(counts, n_classes, w_sum) > 1e-12;  // pure nodes stop
    }

    void begin_feature(int n_slots) {
        left.assign(static_cast<std::size_t>(n_slots) * static_cast<std::size_t>(n_classes), 0.0);
        left_w.assign(static_cast<std::size_t>(n_slots), 0.0);
        last_value.assign(static_cast<std::size_t>(n_slots), 0.0);
        has_last.assign(static_cast<std::size_t>(n_slots), 0);
    }

    bool candidate(int s, double v, const GrowConfig& cfg, double& gain, double& thr) {
        const auto su = static_cast<std::size_t>(s);
        if (!has_last[su] || !(v > last_value[su])) return false;
        const double wl = left_w[su];
        const double wt = total_w[su];
        const double wr = wt - wl;
        if (wl < cfg.min_samples_leaf || wr < cfg.min_samples_leaf) return false;
        const double* tc = &total[su * static_cast<std::size_t>(n_classes)];
        const double* lc = &left[su * static_cast<std::size_t>(n_classes)];
        double sql = 0.0, sqr = 0.0;
        for (int c = 0; c < n_classes; ++c) {
            const double rc = tc[c] - lc[c];
            sql += lc[c] * lc[c];
            sqr += rc * rc;
        }
        const double gini_l = 1.0 - sql / (wl * wl);
        const double gini_r = 1.0 - sqr / (wr * wr);
        gain = gini(tc, n_classes, wt) - (wl / wt) * gini_l - (wr / wt) * gini_r;
        thr = (last_value[su] + v) / 2.0;
        return true;
    }

    void accumulate(int s, int r, double v) {
        const auto su = static_cast<std::size_t>(s);
        left[su * static_cast<std::size_t>(n_classes) +
             static_cast<std::size_t>(y[static_cast<std::size_t>(r)])] += w[static_cast<std::size_t>(r)];
        left_w[su] += w[static_cast<std::size_t>(r)];
        last_value[su] = v;
        has_last[su] = 1;
    }

    bool accept_gain(double gain, const GrowConfig&) const { return gain > 1e-12; }

    std::vector<double> leaf_value(int s, const GrowConfig&) const {
        const auto su = static_cast<std::size_t>(s);
        std::vector<double> v(static_cast<std::size_t>(n_classes), 0.0);
        const double w_sum = total_w[su];
        if (w_sum > 0.0) {
            for (int c = 0; c < n_classes; ++c) {
                v[static_cast<std::size_t>(c)] =
                    total[su * static_cast<std::size_t>(n_classes) + static_cast<std::size_t>(c)] / w_sum;
            }
        }
        return v;
    }
};

struct RegressionMode {
    const std::vector<double>& g;
    const std::vector<double>& h;

    std::vector<double> total_g, total_h, total_abs_g, total_n;
    std::vector<double> left_g, left_h, left_n;
    std::vector<double> last_value;
    std::vector<char> has_last;

    int value_dim() const { return 1; }
    bool row_active(int) const { return true; }

    void begin_level(int n_slots) {
        total_g.assign(static_cast<std::size_t>(n_slots), 0.0);
        total_h.assign(static_cast<std::size_t>(n_slots), 0.0);
        total_abs_g.assign(static_cast<std::size_t>(n_slots), 0.0);
        total_n.assign(static_cast<std::size_t>(n_slots), 0.0);
    }
    void add_to_totals(int s, int r) {
        const auto su = static_cast<std::size_t>(s);
        total_g[su] += g[static_cast<std::size_t>(r)];
        total_h[su] += h[static_cast<std::size_t>(r)];
        total_abs_g[su] += std::abs(g[static_cast<std::size_t>(r)]);
        total_n[su] += 1.0;
    }
    double slot_cover(int s) const { return total_n[static_cast<std::size_t>(s)]; }

    bool slot_splittable(int s, const GrowConfig&) const {
        const auto su = static_cast<std::size_t>(s);
        return total_n[su] >= 2.0 && total_abs_g[su] > 1e-10;
    }

    void begin_feature(int n_slots) {
        left_g.assign(static_cast<std::size_t>(n_slots), 0.0);
        left_h.assign(static_cast<std::size_t>(n_slots), 0.0);
        left_n.assign(static_cast<std::size_t>(n_slots), 0.0);
        last_value.assign(static_cast<std::size_t>(n_slots), 0.0);
        has_last.assign(static_cast<std::size_t>(n_slots), 0);
    }

    bool candidate(int s, double v, const GrowConfig& cfg, double& gain, double& thr) {
        const auto su = static_cast<std::size_t>(s);
        if (!has_last[su] || !(v > last_value[su])) return false;
        const double gl = left_g[su], hl = left_h[su];
        const double gr = total_g[su] - gl, hr = total_h[su] - hl;
        const double parent = total_g[su] * total_g[su] / (total_h[su] + cfg.lambda);
        gain = 0.5 * (gl * gl / (hl + cfg.lambda) + gr * gr / (hr + cfg.lambda) - parent) - cfg.gamma;
        thr = (last_value[su] + v) / 2.0;
        return true;
    }

    void accumulate(int s, int r, double v) {
        const auto su = static_cast<std::size_t>(s);
        left_g[su] += g[static_cast<std::size_t>(r)];
        left_h[su] += h[static_cast<std::size_t>(r)];
        left_n[su] += 1.0;
        last_value[su] = v;
        has_last[su] = 1;
    }

    bool accept_gain(double gain, const GrowConfig&) const { return gain >= -1e-9; }

    std::vector<double> leaf_value(int s, const GrowConfig& cfg) const {
        const auto su = static_cast<std::size_t>(s);
        return {cfg.leaf_scale * (-total_g[su] / (total_h[su] + cfg.lambda))};
    }
};

}  // namespace

Tree grow_classification_tree(const ColumnIndex& cols, const std::vector<int>& y, int n_classes,
                              const std::vector<double>& weight, const GrowConfig& cfg, Rng* feature_rng,
                              int max_features) {
    GiniMode mode{y, weight, n_classes, {}, {}, {}, {}, {}, {}};
    return grow_impl(cols, cfg, mode, feature_rng, max_features, nullptr);
}

Tree grow_regression_tree(const ColumnIndex& cols, const std::vector<double>& grad,
                          const std::vector<double>& hess, const GrowConfig& cfg,
                          std::vector<int>* leaf_of_row) {
    RegressionMode mode{grad, hess, {}, {}, {}, {}, {}, {}, {}, {}, {}};
    return grow_impl(cols, cfg, mode, nullptr, 0, leaf_of_row);
}

std::vector<double> expected_leaf_value(const Tree& t) {
    std::vector<double> acc(static_cast<std::size_t>(t.value_dim), 0.0);
    double cover_sum = 0.0;
    for (const auto& node : t.nodes) {
        if (node.feature >= 0) continue;
        for (std::size_t v = 0; v < acc.size(); ++v) acc[v] += node.cover * node.value[v];
        cover_sum += node.cover;
    }
    if (cover_sum > 0.0) {
        for (auto& v : acc) v /= cover_sum;
    }
    return acc;
}

}  // namespace biomlab::tree
