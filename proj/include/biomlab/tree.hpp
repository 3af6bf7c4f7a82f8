#pragma once

#include <cstdint>
#include <vector>

#include "biomlab/matrix.hpp"
#include "biomlab/rng.hpp"

namespace biomlab::tree {

struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    bool default_left = true;  // missing values route left
    double cover = 0.0;        // weighted training rows through this node
    std::vector<double> value; // leaf payload: class frequencies or one weight
};

struct Tree {
    std::vector<Node> nodes;  // nodes[0] is the root
    int value_dim = 1;

    bool empty() const { return nodes.empty(); }
    int descend(const std::vector<double>& x) const;               // leaf node index
    const std::vector<double>& leaf_value(const std::vector<double>& x) const;
};

// Rows sorted per feature by (value, row) once per dataset; shared by every
// tree grown on the same X (RF members, GBT rounds).
struct ColumnIndex {
    explicit ColumnIndex(const Matrix& x);
    const Matrix* x;
    std::vector<std::vector<int>> order;
};

struct GrowConfig {
    int max_depth = 6;             // number of split levels; 0 grows a single leaf
    double min_samples_leaf = 1.0; // weighted, classification splits only
    double lambda = 1.0;           // L2 on leaf weights (regression mode)
    double gamma = 0.0;            // minimum split gain (regression mode)
    double leaf_scale = 1.0;       // multiplies stored leaf weights (boosting eta)
};

// Greedy CART on Gini impurity decrease over midpoint thresholds. `weight`
// carries bootstrap multiplicities (0 excludes a row). When max_features <
// n_cols, each node draws its own feature subset from feature_rng in node
// creation order.
Tree grow_classification_tree(const ColumnIndex& cols, const std::vector<int>& y, int n_classes,
                              const std::vector<double>& weight, const GrowConfig& cfg, Rng* feature_rng,
                              int max_features);

// Second-order regression tree on gradients/hessians: split gain
// 0.5*(GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)) - gamma, leaf weight -G/(H+l).
// Zero-gain splits are accepted so symmetric targets stay learnable; a node
// whose gradients already vanish becomes a leaf. `leaf_of_row`, when given,
// receives each row's final leaf index.
Tree grow_regression_tree(const ColumnIndex& cols, const std::vector<double>& grad,
                          const std::vector<double>& hess, const GrowConfig& cfg,
                          std::vector<int>* leaf_of_row);

// Cover-weighted mean leaf value per output dimension.
std::vector<double> expected_leaf_value(const Tree& t);

}  // namespace biomlab::tree
