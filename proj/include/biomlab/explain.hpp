#pragma once

#include <string>
#include <vector>

#include "biomlab/matrix.hpp"
#include "biomlab/models.hpp"
#include "biomlab/tree.hpp"

namespace biomlab::explain {

// Per-instance Shapley attributions for one output dimension.
struct Attribution {
    std::vector<double> phi;  // one entry per feature
    double base = 0.0;        // cover-weighted expectation with no features known
};

// Exact path-dependent TreeSHAP for a single tree; returns one Attribution
// per output dimension of the tree's leaf values. Covers must be present on
// every node (recorded at fit time); throws otherwise.
std::vector<Attribution> tree_shap(const tree::Tree& t, const std::vector<double>& x, std::size_t n_features);

// SHAP matrix for a full model over a set of instances.
// shap[instance][class] is an Attribution of length n_features.
struct ShapMatrix {
    std::string model_name;
    std::vector<std::string> feature_names;
    std::vector<std::vector<Attribution>> values;  // [instance][class]
    double max_additivity_residual = 0.0;
};

// RF attributions live in probability space (scores), GBT in margin space
// (pre-softmax). Additivity against the corresponding model output is
// verified per instance and class; residuals above 1e-6 throw.
ShapMatrix ensemble_shap(const models::Classifier& model, const Matrix& x, unsigned jobs);

struct RankedFeature {
    std::string feature;
    double mean_abs_shap = 0.0;
};

struct ImportanceRanking {
    std::vector<std::vector<RankedFeature>> per_class;  // descending, ties by name
    std::vector<RankedFeature> global;                  // by class-summed mean |SHAP|
};

ImportanceRanking rank_features(const ShapMatrix& shap);

void write_shap_values_csv(const std::string& path, const ShapMatrix& shap,
                           const std::vector<std::string>& instance_ids,
                           const std::vector<std::string>& class_names);
void write_importance_csv(const std::string& path, const ImportanceRanking& ranking,
                          const std::vector<std::string>& class_names);
std::string importance_markdown(const std::string& model_label, const ImportanceRanking& ranking,
                                const std::vector<std::string>& class_names, std::size_t top_k);

}  // namespace biomlab::explain
