#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "biomlab/matrix.hpp"
#include "biomlab/tree.hpp"

namespace biomlab::models {

using Hyper = std::map<std::string, double>;

double hp_get(const Hyper& hp, const std::string& key, double fallback);

// Softmax utilities shared by the boosted trees and their tests.
std::vector<double> softmax(const std::vector<double>& scores);
double softmax_logloss(const std::vector<std::vector<double>>& margins, const std::vector<int>& y);

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual const char* name() const = 0;
    virtual bool needs_scaled_features() const { return false; }
    // Prior-based baselines model the raw class distribution; oversampling
    // their training labels would erase the very thing they predict.
    virtual bool models_class_prior() const { return false; }
    virtual void fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp,
                     std::uint64_t seed) = 0;
    virtual std::vector<std::vector<double>> predict_scores(const Matrix& x) const = 0;
    // argmax of predict_scores, ties to the smallest class index
    std::vector<int> predict(const Matrix& x) const;
    virtual nlohmann::json to_json() const = 0;
    virtual void from_json(const nlohmann::json& j) = 0;
    int n_classes() const { return n_classes_; }

protected:
    int n_classes_ = 0;
    Hyper hp_;
    std::uint64_t seed_ = 0;
};

int argmax_class(const std::vector<double>& scores);

// Registered names: bl1_majority, bl2_decision_tree, bl3_weighted_random,
// decision_tree (alias of the CART learner), knn, svm_linear, random_forest,
// gbt.
std::unique_ptr<Classifier> make_classifier(const std::string& name);
std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);
const std::vector<std::string>& classifier_names();

// --- concrete models ---------------------------------------------------

class MajorityClassifier final : public Classifier {
public:
    const char* name() const override { return "bl1_majority"; }
    bool models_class_prior() const override { return true; }
    void fit(const Matrix&, const std::vector<int>& y, int n_classes, const Hyper&, std::uint64_t) override;
    std::vector<std::vector<double>> predict_scores(const Matrix& x) const override;
    nlohmann::json to_json() const override;
    void from_json(const nlohmann::json& j) override;

private:
    std::vector<double> distribution_;
};

// Samples predictions from the empirical class distribution; row i of any
// input uses the substream (seed, i), so a fixed seed fixes the sequence.
// Scores are the one-hot of the sampled class to keep predict == argmax.
class WeightedRandomClassifier final : public Classifier {
public:
    const char* name() const override { return "bl3_weighted_random"; }
    bool models_class_prior() const override { return true; }
    void fit(const Matrix&, const std::vector<int>& y, int n_classes, const Hyper&, std::uint64_t seed) override;
    std::vector<std::vector<double>> predict_scores(const Matrix& x) const override;
    nlohmann::json to_json() const override;
    void from_json(const nlohmann::json& j) override;

private:
    std::vector<double> cumulative_;
};

class CartClassifier : public Classifier {
public:
    const char* name() const override { return "decision_tree"; }
    void fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp, std::uint64_t) override;
    std::vector<std::vector<double>> predict_scores(const Matrix& x) const override;
    nlohmann::json to_json() const override;
    void from_json(const nlohmann::json& j) override;
    const tree::Tree& fitted_tree() const { return tree_; }

private:
    tree::Tree tree_;
};

class BaselineCartClassifier final : public CartClassifier {
public:
    const char* name() const override { return "bl2_decision_tree"; }
};

class RandomForestClassifier final : public Classifier {
public:
    const char* name() const override { return "random_forest"; }
    void fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp,
             std::uint64_t seed) override;
    std::vector<std::vector<double>> predict_scores(const Matrix& x) const override;
    nlohmann::json to_json() const override;
    void from_json(const nlohmann::json& j) override;
    const std::vector<tree::Tree>& trees() const { return trees_; }

private:
    std::vector<tree::Tree> trees_;
};

class GbtClassifier final : public Classifier {
public:
    const char* name() const override { return "gbt"; }
    void fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp,
             std::uint64_t seed) override;
    std::vector<std::vector<double>> predict_scores(const Matrix& x) const override;  // softmax probabilities
    std::vector<std::vector<double>> predict_margins(const Matrix& x) const;          // pre-softmax
    nlohmann::json to_json() const override;
    void from_json(const nlohmann::json& j) override;
    // trees_[round * n_classes + c]; leaf values already carry the learning rate
    const std::vector<tree::Tree>& trees() const { return trees_; }
    const std::vector<double>& train_logloss_trace() const { return train_logloss_; }

private:
    std::vector<tree::Tree> trees_;
    std::vector<double> train_logloss_;
};

class KnnClassifier final : public Classifier {
public:
    const char* name() const override { return "knn"; }
    bool needs_scaled_features() const override { return true; }
    void fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp, std::uint64_t) override;
    std::vector<std::vector<double>> predict_scores(const Matrix& x) const override;
    nlohmann::json to_json() const override;
    void from_json(const nlohmann::json& j) override;

private:
    std::vector<std::vector<double>> train_x_;
    std::vector<int> train_y_;
    int k_ = 5;
};

// One-vs-rest L2-regularized hinge loss, minimized by full-batch deterministic
// subgradient descent (duplicating every row leaves the iterates unchanged).
class LinearSvmClassifier final : public Classifier {
public:
    const char* name() const override { return "svm_linear"; }
    bool needs_scaled_features() const override { return true; }
    void fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp,
             std::uint64_t seed) override;
    std::vector<std::vector<double>> predict_scores(const Matrix& x) const override;  // margins
    nlohmann::json to_json() const override;
    void from_json(const nlohmann::json& j) override;
    double train_hinge_loss(const Matrix& x, const std::vector<int>& y) const;

private:
    std::vector<std::vector<double>> weights_;  // per class
    std::vector<double> bias_;
};

}  // namespace biomlab::models
