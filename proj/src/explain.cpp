#include "biomlab/explain.hpp"

#include <algorithm>
#include <cmath>

#include "biomlab/csv.hpp"
#include "biomlab/parallel.hpp"

namespace biomlab::explain {

namespace {

// Weighted path of unique features from the root to the current node
// (Lundberg et al.'s EXTEND / UNWIND bookkeeping).
struct PathElement {
    int feature = -1;
    double zero_fraction = 0.0;  // proportion of paths flowing through when excluded
    double one_fraction = 0.0;   // 1 when the instance follows the split, else 0
    double pweight = 0.0;
};

using Path = std::vector<PathElement>;

void extend(Path& m, double zero_fraction, double one_fraction, int feature) {
    const int depth = static_cast<int>(m.size());
    m.push_back({feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0});
    for (int i = depth - 1; i >= 0; --i) {
        m[static_cast<std::size_t>(i + 1)].pweight += one_fraction * m[static_cast<std::size_t>(i)].pweight *
                                                      (i + 1) / static_cast<double>(depth + 1);
        m[static_cast<std::size_t>(i)].pweight =
            zero_fraction * m[static_cast<std::size_t>(i)].pweight * (depth - i) /
            static_cast<double>(depth + 1);
    }
}

void unwind(Path& m, int index) {
    const int depth = static_cast<int>(m.size()) - 1;
    const auto iu = static_cast<std::size_t>(index);
    double next = m[static_cast<std::size_t>(depth)].pweight;
    if (m[iu].one_fraction != 0.0) {
        for (int j = depth - 1; j >= 0; --j) {
            const auto ju = static_cast<std::size_t>(j);
            const double tmp = m[ju].pweight;
            m[ju].pweight = next * (depth + 1) / static_cast<double>(j + 1);
            next = tmp - m[ju].pweight * m[iu].zero_fraction * (depth - j) / static_cast<double>(depth + 1);
        }
    } else {
        for (int j = depth - 1; j >= 0; --j) {
            const auto ju = static_cast<std::size_t>(j);
            m[ju].pweight = m[ju].pweight * (depth + 1) / static_cast<double>(m[iu].zero_fraction * (depth - j));
        }
    }
    for (int j = index; j < depth; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        m[ju].feature = m[ju + 1].feature;
        m[ju].zero_fraction = m[ju + 1].zero_fraction;
        m[ju].one_fraction = m[ju + 1].one_fraction;
    }
    m.pop_back();
}

double unwound_sum(const Path& m, int index) {
    const int depth = static_cast<int>(m.size()) - 1;
    const auto iu = static_cast<std::size_t>(index);
    double total = 0.0;
    if (m[iu].one_fraction != 0.0) {
        double next = m[static_cast<std::size_t>(depth)].pweight;
        for (int j = depth - 1; j >= 0; --j) {
            const auto ju = static_cast<std::size_t>(j);
            const double tmp = next / static_cast<double>((j + 1) * m[iu].one_fraction);
            total += tmp;
            next = m[ju].pweight - tmp * m[iu].zero_fraction * (depth - j);
        }
    } else {
        for (int j = depth - 1; j >= 0; --j) {
            const auto ju = static_cast<std::size_t>(j);
            total += m[ju].pweight / static_cast<double>(m[iu].zero_fraction * (depth - j));
        }
    }
    return total * (depth + 1);
}

struct ShapContext {
    const tree::Tree& t;
    const std::vector<double>& x;
    std::vector<std::vector<double>>& phi;  // [output][feature]
};

void recurse(ShapContext& ctx, int node_index, Path m, double zero_fraction, double one_fraction,
             int parent_feature) {
    const tree::Node& node = ctx.t.nodes[static_cast<std::size_t>(node_index)];
    extend(m, zero_fraction, one_fraction, parent_feature);

    if (node.feature < 0) {
        for (int i = 1; i < static_cast<int>(m.size()); ++i) {
            const auto iu = static_cast<std::size_t>(i);
            const double w = unwound_sum(m, i) * (m[iu].one_fraction - m[iu].zero_fraction);
            for (std::size_t v = 0; v < node.value.size(); ++v) {
                ctx.phi[v][static_cast<std::size_t>(m[iu].feature)] += w * node.value[v];
            }
        }
        return;
    }

    const double xv = ctx.x[static_cast<std::size_t>(node.feature)];
    const int hot = std::isnan(xv) ? (node.default_left ? node.left : node.right)
                                   : (xv < node.threshold ? node.left : node.right);
    const int cold = hot == node.left ? node.right : node.left;

    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    for (int k = 1; k < static_cast<int>(m.size()); ++k) {
        if (m[static_cast<std::size_t>(k)].feature == node.feature) {
            incoming_zero = m[static_cast<std::size_t>(k)].zero_fraction;
            incoming_one = m[static_cast<std::size_t>(k)].one_fraction;
            unwind(m, k);
            break;
        }
    }

    const double cover = node.cover;
    if (cover <= 0.0) return;
    const double hot_cover = ctx.t.nodes[static_cast<std::size_t>(hot)].cover;
    const double cold_cover = ctx.t.nodes[static_cast<std::size_t>(cold)].cover;

    if (hot_cover > 0.0) {
        recurse(ctx, hot, m, incoming_zero * hot_cover / cover, incoming_one, node.feature);
    }
    if (cold_cover > 0.0) {
        recurse(ctx, cold, m, incoming_zero * cold_cover / cover, 0.0, node.feature);
    }
}

}  // namespace

std::vector<Attribution> tree_shap(const tree::Tree& t, const std::vector<double>& x, std::size_t n_features) {
    if (t.empty()) throw std::logic_error("tree_shap: empty tree");
    if (t.nodes.front().cover <= 0.0) {
        throw ValidationError("tree not SHAP-ready: missing cover counts");
    }
    const auto dim = static_cast<std::size_t>(t.value_dim);
    std::vector<std::vector<double>> phi(dim, std::vector<double>(n_features, 0.0));
    ShapContext ctx{t, x, phi};
    recurse(ctx, 0, {}, 1.0, 1.0, -1);

    const auto base = expected_leaf_value(t);
    std::vector<Attribution> out(dim);
    for (std::size_t v = 0; v < dim; ++v) {
        out[v].phi = std::move(phi[v]);
        out[v].base = base[v];
    }
    return out;
}

ShapMatrix ensemble_shap(const models::Classifier& model, const Matrix& x, unsigned jobs) {
    const std::string name = model.name();
    const int n_classes = model.n_classes();
    const auto nc = static_cast<std::size_t>(n_classes);

    const std::vector<tree::Tree>* trees = nullptr;
    bool margin_space = false;
    if (const auto* rf = dynamic_cast<const models::RandomForestClassifier*>(&model)) {
        trees = &rf->trees();
    } else if (const auto* gbt = dynamic_cast<const models::GbtClassifier*>(&model)) {
        trees = &gbt->trees();
        margin_space = true;
    } else {
        throw ValidationError("ensemble_shap supports tree ensembles only (random_forest, gbt)");
    }
    if (trees->empty()) throw ValidationError("ensemble_shap: model has no trees (not fitted?)");
    if (!x.data.empty() && x.n_cols() == 0) throw ValidationError("ensemble_shap: empty feature set");

    ShapMatrix out;
    out.model_name = name;
    out.feature_names = x.col_names;
    out.values.resize(x.n_rows());

    // reference output for the additivity check
    std::vector<std::vector<double>> reference;
    if (margin_space) {
        reference = static_cast<const models::GbtClassifier&>(model).predict_margins(x);
    } else {
        reference = model.predict_scores(x);
    }

    const std::size_t d = x.n_cols();
    std::vector<double> residuals(x.n_rows(), 0.0);
    parallel_for(x.n_rows(), jobs, [&](std::size_t i) {
        std::vector<Attribution> per_class(nc);
        for (auto& a : per_class) a.phi.assign(d, 0.0);
        const double tree_weight = margin_space ? 1.0 : 1.0 / static_cast<double>(trees->size());

        for (std::size_t t = 0; t < trees->size(); ++t) {
            const auto contribs = tree_shap((*trees)[t], x.data[i], d);
            if (margin_space) {
                // one single-output tree per (round, class); class = t mod C
                const auto cls = t % nc;
                for (std::size_t f = 0; f < d; ++f) per_class[cls].phi[f] += contribs[0].phi[f];
                per_class[cls].base += contribs[0].base;
            } else {
                for (std::size_t cls = 0; cls < nc; ++cls) {
                    for (std::size_t f = 0; f < d; ++f) {
                        per_class[cls].phi[f] += tree_weight * contribs[cls].phi[f];
                    }
                    per_class[cls].base += tree_weight * contribs[cls].base;
                }
            }
        }

        double max_resid = 0.0;
        for (std::size_t cls = 0; cls < nc; ++cls) {
            double sum = per_class[cls].base;
            for (double p : per_class[cls].phi) sum += p;
            max_resid = std::max(max_resid, std::abs(sum - reference[i][cls]));
        }
        residuals[i] = max_resid;
        out.values[i] = std::move(per_class);
    });

    for (double r : residuals) out.max_additivity_residual = std::max(out.max_additivity_residual, r);
    if (out.max_additivity_residual > 1e-6) {
        throw std::logic_error("ensemble_shap additivity residual " +
                               std::to_string(out.max_additivity_residual) + " exceeds 1e-6");
    }
    return out;
}

ImportanceRanking rank_features(const ShapMatrix& shap) {
    if (shap.values.empty()) throw ValidationError("rank_features: empty SHAP matrix");
    const std::size_t nc = shap.values.front().size();
    const std::size_t d = shap.feature_names.size();
    const double n = static_cast<double>(shap.values.size());

    ImportanceRanking out;
    out.per_class.resize(nc);
    std::vector<double> global(d, 0.0);
    for (std::size_t cls = 0; cls < nc; ++cls) {
        std::vector<double> mean_abs(d, 0.0);
        for (const auto& instance : shap.values) {
            for (std::size_t f = 0; f < d; ++f) mean_abs[f] += std::abs(instance[cls].phi[f]);
        }
        auto& ranked = out.per_class[cls];
        ranked.reserve(d);
        for (std::size_t f = 0; f < d; ++f) {
            mean_abs[f] /= n;
            global[f] += mean_abs[f];
            ranked.push_back({shap.feature_names[f], mean_abs[f]});
        }
        std::sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
            if (a.mean_abs_shap != b.mean_abs_shap) return a.mean_abs_shap > b.mean_abs_shap;
            return a.feature < b.feature;
        });
    }
    out.global.reserve(d);
    for (std::size_t f = 0; f < d; ++f) out.global.push_back({shap.feature_names[f], global[f]});
    std::sort(out.global.begin(), out.global.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.mean_abs_shap != b.mean_abs_shap) return a.mean_abs_shap > b.mean_abs_shap;
        return a.feature < b.feature;
    });
    return out;
}

void write_shap_values_csv(const std::string& path, const ShapMatrix& shap,
                           const std::vector<std::string>& instance_ids,
                           const std::vector<std::string>& class_names) {
    CsvWriter w(path, {"instance", "class", "feature", "value", "base"});
    for (std::size_t i = 0; i < shap.values.size(); ++i) {
        for (std::size_t cls = 0; cls < shap.values[i].size(); ++cls) {
            const auto& attr = shap.values[i][cls];
            for (std::size_t f = 0; f < attr.phi.size(); ++f) {
                w.write_row({instance_ids[i], class_names[cls], shap.feature_names[f],
                             format_double(attr.phi[f]), format_double(attr.base)});
            }
        }
    }
    w.close();
}

void write_importance_csv(const std::string& path, const ImportanceRanking& ranking,
                          const std::vector<std::string>& class_names) {
    CsvWriter w(path, {"class", "rank", "feature", "mean_abs_shap"});
    for (std::size_t cls = 0; cls < ranking.per_class.size(); ++cls) {
        for (std::size_t r = 0; r < ranking.per_class[cls].size(); ++r) {
            const auto& rf = ranking.per_class[cls][r];
            w.write_row({class_names[cls], format_int(static_cast<std::int64_t>(r + 1)), rf.feature,
                         format_double(rf.mean_abs_shap)});
        }
    }
    for (std::size_t r = 0; r < ranking.global.size(); ++r) {
        w.write_row({"_global", format_int(static_cast<std::int64_t>(r + 1)), ranking.global[r].feature,
                     format_double(ranking.global[r].mean_abs_shap)});
    }
    w.close();
}

std::string importance_markdown(const std::string& model_label, const ImportanceRanking& ranking,
                                const std::vector<std::string>& class_names, std::size_t top_k) {
    std::string md = "# Mean feature importance (|SHAP|) — " + model_label + "\n";
    const double top_global = ranking.global.empty() ? 1.0 : std::max(ranking.global.front().mean_abs_shap, 1e-12);
    md += "\n## Global (class-summed)\n\n| rank | feature | mean \\|SHAP\\| | |\n|---:|---|---:|---|\n";
    for (std::size_t r = 0; r < std::min(top_k, ranking.global.size()); ++r) {
        const auto& rf = ranking.global[r];
        const auto bars = static_cast<std::size_t>(std::round(24.0 * rf.mean_abs_shap / top_global));
        md += "| " + std::to_string(r + 1) + " | " + rf.feature + " | " + format_double(round_half_up(rf.mean_abs_shap, 6)) +
              " | " + std::string(bars, '#') + " |\n";
    }
    for (std::size_t cls = 0; cls < ranking.per_class.size(); ++cls) {
        md += "\n## " + class_names[cls] + "\n\n| rank | feature | mean \\|SHAP\\| |\n|---:|---|---:|\n";
        for (std::size_t r = 0; r < std::min(top_k, ranking.per_class[cls].size()); ++r) {
            const auto& rf = ranking.per_class[cls][r];
            md += "| " + std::to_string(r + 1) + " | " + rf.feature + " | " +
                  format_double(round_half_up(rf.mean_abs_shap, 6)) + " |\n";
        }
    }
    return md;
}

}  // namespace biomlab::explain
