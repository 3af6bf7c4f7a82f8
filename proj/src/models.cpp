#include "biomlab/models.hpp"

#include <algorithm>
#include <cmath>

#include "biomlab/rng.hpp"

namespace biomlab::models {

using nlohmann::json;

double hp_get(const Hyper& hp, const std::string& key, double fallback) {
    const auto it = hp.find(key);
    return it == hp.end() ? fallback : it->second;
}

std::vector<double> softmax(const std::vector<double>& scores) {
    std::vector<double> out(scores.size());
    const double m = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - m);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

double softmax_logloss(const std::vector<std::vector<double>>& margins, const std::vector<int>& y) {
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto p = softmax(margins[i]);
        loss -= std::log(std::max(p[static_cast<std::size_t>(y[i])], 1e-300));
    }
    return loss / static_cast<double>(y.size());
}

int argmax_class(const std::vector<double>& scores) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(scores.size()); ++c) {
        if (scores[static_cast<std::size_t>(c)] > scores[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

std::vector<int> Classifier::predict(const Matrix& x) const {
    const auto scores = predict_scores(x);
    std::vector<int> out;
    out.reserve(scores.size());
    for (const auto& row : scores) out.push_back(argmax_class(row));
    return out;
}

namespace {

json hyper_to_json(const Hyper& hp) {
    json j = json::object();
    for (const auto& [k, v] : hp) j[k] = v;
    return j;
}

Hyper hyper_from_json(const json& j) {
    Hyper hp;
    for (auto it = j.begin(); it != j.end(); ++it) hp[it.key()] = it.value().get<double>();
    return hp;
}

json tree_to_json(const tree::Tree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back(json::array(
            {n.feature, n.threshold, n.left, n.right, n.default_left ? 1 : 0, n.cover, json(n.value)}));
    }
    return json{{"value_dim", t.value_dim}, {"nodes", std::move(nodes)}};
}

tree::Tree tree_from_json(const json& j) {
    tree::Tree t;
    t.value_dim = j.at("value_dim").get<int>();
    for (const auto& nj : j.at("nodes")) {
        tree::Node n;
        n.feature = nj.at(0).get<int>();
        n.threshold = nj.at(1).get<double>();
        n.left = nj.at(2).get<int>();
        n.right = nj.at(3).get<int>();
        n.default_left = nj.at(4).get<int>() != 0;
        n.cover = nj.at(5).get<double>();
        n.value = nj.at(6).get<std::vector<double>>();
        t.nodes.push_back(std::move(n));
    }
    return t;
}

json model_envelope(const Classifier& c, const Hyper& hp, std::uint64_t seed, int n_classes) {
    return json{{"format_version", 1},
                {"model", c.name()},
                {"n_classes", n_classes},
                {"hyperparameters", hyper_to_json(hp)},
                {"seed", seed}};
}

void check_fit_inputs(const Matrix& x, const std::vector<int>& y, int n_classes) {
    if (x.n_rows() != y.size()) throw std::logic_error("fit: X/y size mismatch");
    if (y.empty()) throw ValidationError("fit requires at least one training row");
    for (int label : y) {
        if (label < 0 || label >= n_classes) throw std::logic_error("fit: label out of range");
    }
}

std::vector<double> class_distribution(const std::vector<int>& y, int n_classes) {
    std::vector<double> dist(static_cast<std::size_t>(n_classes), 0.0);
    for (int label : y) dist[static_cast<std::size_t>(label)] += 1.0;
    for (auto& v : dist) v /= static_cast<double>(y.size());
    return dist;
}

}  // namespace

// --- majority ------------------------------------------------------------

void MajorityClassifier::fit(const Matrix&, const std::vector<int>& y, int n_classes, const Hyper& hp,
                             std::uint64_t seed) {
    check_fit_inputs(Matrix{{}, {}, std::vector<std::vector<double>>(y.size())}, y, n_classes);
    n_classes_ = n_classes;
    hp_ = hp;
    seed_ = seed;
    distribution_ = class_distribution(y, n_classes);
}

std::vector<std::vector<double>> MajorityClassifier::predict_scores(const Matrix& x) const {
    return std::vector<std::vector<double>>(x.n_rows(), distribution_);
}

json MajorityClassifier::to_json() const {
    json j = model_envelope(*this, hp_, seed_, n_classes_);
    j["distribution"] = distribution_;
    return j;
}

void MajorityClassifier::from_json(const json& j) {
    n_classes_ = j.at("n_classes").get<int>();
    hp_ = hyper_from_json(j.at("hyperparameters"));
    seed_ = j.at("seed").get<std::uint64_t>();
    distribution_ = j.at("distribution").get<std::vector<double>>();
}

// --- weighted random -------------------------------------------------------

void WeightedRandomClassifier::fit(const Matrix&, const std::vector<int>& y, int n_classes, const Hyper& hp,
                                   std::uint64_t seed) {
    check_fit_inputs(Matrix{{}, {}, std::vector<std::vector<double>>(y.size())}, y, n_classes);
    n_classes_ = n_classes;
    hp_ = hp;
    seed_ = seed;
    const auto dist = class_distribution(y, n_classes);
    cumulative_.assign(dist.size(), 0.0);
    double acc = 0.0;
    for (std::size_t c = 0; c < dist.size(); ++c) {
        acc += dist[c];
        cumulative_[c] = acc;
    }
    cumulative_.back() = 1.0;
}

std::vector<std::vector<double>> WeightedRandomClassifier::predict_scores(const Matrix& x) const {
    std::vector<std::vector<double>> out(x.n_rows(),
                                         std::vector<double>(static_cast<std::size_t>(n_classes_), 0.0));
    for (std::size_t i = 0; i < x.n_rows(); ++i) {
        Rng rng = derive_rng(seed_, {0x3A11Du, i});
        const double u = rng.uniform();
        int cls = 0;
        while (cls + 1 < n_classes_ && u >= cumulative_[static_cast<std::size_t>(cls)]) ++cls;
        out[i][static_cast<std::size_t>(cls)] = 1.0;
    }
    return out;
}

json WeightedRandomClassifier::to_json() const {
    json j = model_envelope(*this, hp_, seed_, n_classes_);
    j["cumulative"] = cumulative_;
    return j;
}

void WeightedRandomClassifier::from_json(const json& j) {
    n_classes_ = j.at("n_classes").get<int>();
    hp_ = hyper_from_json(j.at("hyperparameters"));
    seed_ = j.at("seed").get<std::uint64_t>();
    cumulative_ = j.at("cumulative").get<std::vector<double>>();
}

// --- CART -------------------------------------------------------------------

void CartClassifier::fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp,
                         std::uint64_t seed) {
    check_fit_inputs(x, y, n_classes);
    n_classes_ = n_classes;
    hp_ = hp;
    seed_ = seed;
    tree::GrowConfig cfg;
    const double depth = hp_get(hp, "max_depth", 0.0);
    cfg.max_depth = depth <= 0.0 ? 64 : static_cast<int>(depth);
    cfg.min_samples_leaf = hp_get(hp, "min_samples_leaf", 1.0);
    const tree::ColumnIndex cols(x);
    const std::vector<double> weight(x.n_rows(), 1.0);
    tree_ = grow_classification_tree(cols, y, n_classes, weight, cfg, nullptr, 0);
}

std::vector<std::vector<double>> CartClassifier::predict_scores(const Matrix& x) const {
    std::vector<std::vector<double>> out;
    out.reserve(x.n_rows());
    for (const auto& row : x.data) out.push_back(tree_.leaf_value(row));
    return out;
}

json CartClassifier::to_json() const {
    json j = model_envelope(*this, hp_, seed_, n_classes_);
    j["tree"] = tree_to_json(tree_);
    return j;
}

void CartClassifier::from_json(const json& j) {
    n_classes_ = j.at("n_classes").get<int>();
    hp_ = hyper_from_json(j.at("hyperparameters"));
    seed_ = j.at("seed").get<std::uint64_t>();
    tree_ = tree_from_json(j.at("tree"));
}

// --- random forest -----------------------------------------------------------

void RandomForestClassifier::fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp,
                                 std::uint64_t seed) {
    check_fit_inputs(x, y, n_classes);
    n_classes_ = n_classes;
    hp_ = hp;
    seed_ = seed;

    const int n_trees = static_cast<int>(hp_get(hp, "n_trees", 100.0));
    const bool bootstrap = hp_get(hp, "bootstrap", 1.0) != 0.0;
    const int d = static_cast<int>(x.n_cols());
    int max_features = static_cast<int>(hp_get(hp, "max_features", 0.0));
    if (max_features <= 0) {
        max_features = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(d)))));
    }
    max_features = std::min(max_features, d);

    tree::GrowConfig cfg;
    const double depth = hp_get(hp, "max_depth", 0.0);
    cfg.max_depth = depth <= 0.0 ? 64 : static_cast<int>(depth);
    cfg.min_samples_leaf = hp_get(hp, "min_samples_leaf", 1.0);

    const tree::ColumnIndex cols(x);
    const std::size_t n = x.n_rows();
    trees_.clear();
    trees_.reserve(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) {
        Rng rng = derive_rng(seed, {0xF03E57u, static_cast<std::uint64_t>(t)});
        std::vector<double> weight(n, bootstrap ? 0.0 : 1.0);
        if (bootstrap) {
            for (std::size_t i = 0; i < n; ++i) weight[rng.uniform_index(n)] += 1.0;
        }
        Rng* sampler = max_features < d ? &rng : nullptr;
        trees_.push_back(
            grow_classification_tree(cols, y, n_classes, weight, cfg, sampler, max_features < d ? max_features : 0));
    }
}

std::vector<std::vector<double>> RandomForestClassifier::predict_scores(const Matrix& x) const {
    std::vector<std::vector<double>> out(x.n_rows(),
                                         std::vector<double>(static_cast<std::size_t>(n_classes_), 0.0));
    for (std::size_t i = 0; i < x.n_rows(); ++i) {
        for (const auto& t : trees_) {
            const auto& leaf = t.leaf_value(x.data[i]);
            for (std::size_t c = 0; c < leaf.size(); ++c) out[i][c] += leaf[c];
        }
        for (auto& v : out[i]) v /= static_cast<double>(trees_.size());
    }
    return out;
}

json RandomForestClassifier::to_json() const {
    json j = model_envelope(*this, hp_, seed_, n_classes_);
    json trees = json::array();
    for (const auto& t : trees_) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
    return j;
}

void RandomForestClassifier::from_json(const json& j) {
    n_classes_ = j.at("n_classes").get<int>();
    hp_ = hyper_from_json(j.at("hyperparameters"));
    seed_ = j.at("seed").get<std::uint64_t>();
    trees_.clear();
    for (const auto& tj : j.at("trees")) trees_.push_back(tree_from_json(tj));
}

// --- gradient boosted trees ---------------------------------------------------

void GbtClassifier::fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp,
                        std::uint64_t seed) {
    check_fit_inputs(x, y, n_classes);
    if (n_classes < 2) throw ValidationError("gbt requires at least two classes");
    n_classes_ = n_classes;
    hp_ = hp;
    seed_ = seed;

    const int rounds = static_cast<int>(hp_get(hp, "n_estimators", 200.0));
    const double eta = hp_get(hp, "eta", 0.1);
    tree::GrowConfig cfg;
    cfg.max_depth = static_cast<int>(hp_get(hp, "max_depth", 3.0));
    cfg.lambda = hp_get(hp, "lambda", 1.0);
    cfg.gamma = hp_get(hp, "gamma", 0.0);
    cfg.leaf_scale = eta;

    const std::size_t n = x.n_rows();
    const auto nc = static_cast<std::size_t>(n_classes);
    const tree::ColumnIndex cols(x);

    std::vector<std::vector<double>> scores(n, std::vector<double>(nc, 0.0));  // base_score = 0
    std::vector<double> grad(n), hess(n);
    std::vector<int> leaf_of_row;

    trees_.clear();
    trees_.reserve(static_cast<std::size_t>(rounds) * nc);
    train_logloss_.clear();
    train_logloss_.reserve(static_cast<std::size_t>(rounds) + 1);

    std::vector<std::vector<double>> probs(n);
    for (int round = 0; round < rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) probs[i] = softmax(scores[i]);
        train_logloss_.push_back(softmax_logloss(scores, y));
        for (int c = 0; c < n_classes; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            for (std::size_t i = 0; i < n; ++i) {
                const double p = probs[i][cu];
                grad[i] = p - (y[i] == c ? 1.0 : 0.0);
                hess[i] = p * (1.0 - p);
            }
            tree::Tree t = grow_regression_tree(cols, grad, hess, cfg, &leaf_of_row);
            for (std::size_t i = 0; i < n; ++i) {
                scores[i][cu] += t.nodes[static_cast<std::size_t>(leaf_of_row[i])].value[0];
            }
            trees_.push_back(std::move(t));
        }
    }
    train_logloss_.push_back(softmax_logloss(scores, y));
}

std::vector<std::vector<double>> GbtClassifier::predict_margins(const Matrix& x) const {
    const auto nc = static_cast<std::size_t>(n_classes_);
    std::vector<std::vector<double>> out(x.n_rows(), std::vector<double>(nc, 0.0));
    for (std::size_t i = 0; i < x.n_rows(); ++i) {
        for (std::size_t t = 0; t < trees_.size(); ++t) {
            out[i][t % nc] += trees_[t].leaf_value(x.data[i])[0];
        }
    }
    return out;
}

std::vector<std::vector<double>> GbtClassifier::predict_scores(const Matrix& x) const {
    auto margins = predict_margins(x);
    for (auto& row : margins) row = softmax(row);
    return margins;
}

json GbtClassifier::to_json() const {
    json j = model_envelope(*this, hp_, seed_, n_classes_);
    json trees = json::array();
    for (const auto& t : trees_) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
    j["train_logloss"] = train_logloss_;
    return j;
}

void GbtClassifier::from_json(const json& j) {
    n_classes_ = j.at("n_classes").get<int>();
    hp_ = hyper_from_json(j.at("hyperparameters"));
    seed_ = j.at("seed").get<std::uint64_t>();
    trees_.clear();
    for (const auto& tj : j.at("trees")) trees_.push_back(tree_from_json(tj));
    train_logloss_ = j.value("train_logloss", std::vector<double>{});
}

// --- knn ----------------------------------------------------------------------

void KnnClassifier::fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp,
                        std::uint64_t seed) {
    check_fit_inputs(x, y, n_classes);
    n_classes_ = n_classes;
    hp_ = hp;
    seed_ = seed;
    k_ = static_cast<int>(hp_get(hp, "k", 5.0));
    if (k_ < 1) throw ValidationError("knn requires k >= 1");
    if (static_cast<std::size_t>(k_) > x.n_rows()) {
        throw ValidationError("knn requires k <= number of training rows");
    }
    train_x_ = x.data;
    train_y_ = y;
}

std::vector<std::vector<double>> KnnClassifier::predict_scores(const Matrix& x) const {
    std::vector<std::vector<double>> out(x.n_rows(),
                                         std::vector<double>(static_cast<std::size_t>(n_classes_), 0.0));
    std::vector<std::pair<double, std::size_t>> dist(train_x_.size());
    for (std::size_t i = 0; i < x.n_rows(); ++i) {
        const auto& q = x.data[i];
        for (std::size_t j = 0; j < train_x_.size(); ++j) {
            double d2 = 0.0;
            const auto& tr = train_x_[j];
            for (std::size_t f = 0; f < q.size(); ++f) {
                const double diff = q[f] - tr[f];
                d2 += diff * diff;
            }
            dist[j] = {d2, j};  // ties resolved by training-row index
        }
        const auto kth = dist.begin() + k_;
        std::partial_sort(dist.begin(), kth, dist.end());
        for (auto it = dist.begin(); it != kth; ++it) {
            out[i][static_cast<std::size_t>(train_y_[it->second])] += 1.0;
        }
        for (auto& v : out[i]) v /= static_cast<double>(k_);
    }
    return out;
}

json KnnClassifier::to_json() const {
    json j = model_envelope(*this, hp_, seed_, n_classes_);
    j["train_x"] = train_x_;
    j["train_y"] = train_y_;
    j["k"] = k_;
    return j;
}

void KnnClassifier::from_json(const json& j) {
    n_classes_ = j.at("n_classes").get<int>();
    hp_ = hyper_from_json(j.at("hyperparameters"));
    seed_ = j.at("seed").get<std::uint64_t>();
    train_x_ = j.at("train_x").get<std::vector<std::vector<double>>>();
    train_y_ = j.at("train_y").get<std::vector<int>>();
    k_ = j.at("k").get<int>();
}

// --- linear svm ------------------------------------------------------------------

void LinearSvmClassifier::fit(const Matrix& x, const std::vector<int>& y, int n_classes, const Hyper& hp,
                              std::uint64_t seed) {
    check_fit_inputs(x, y, n_classes);
    n_classes_ = n_classes;
    hp_ = hp;
    seed_ = seed;

    const double c_param = hp_get(hp, "C", 1.0);
    const int epochs = static_cast<int>(hp_get(hp, "epochs", 500.0));
    const double eta0 = hp_get(hp, "eta0", 0.5);
    const double decay = hp_get(hp, "eta_decay", 0.02);
    const double reg = 1.0 / std::max(c_param, 1e-12);

    const std::size_t n = x.n_rows();
    const std::size_t d = x.n_cols();
    weights_.assign(static_cast<std::size_t>(n_classes), std::vector<double>(d, 0.0));
    bias_.assign(static_cast<std::size_t>(n_classes), 0.0);

    std::vector<double> grad_w(d);
    for (int c = 0; c < n_classes; ++c) {
        auto& w = weights_[static_cast<std::size_t>(c)];
        double& b = bias_[static_cast<std::size_t>(c)];
        for (int epoch = 0; epoch < epochs; ++epoch) {
            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            double grad_b = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double s = y[i] == c ? 1.0 : -1.0;
                const auto& xi = x.data[i];
                double margin = b;
                for (std::size_t f = 0; f < d; ++f) margin += w[f] * xi[f];
                if (s * margin < 1.0) {
                    for (std::size_t f = 0; f < d; ++f) grad_w[f] -= s * xi[f];
                    grad_b -= s;
                }
            }
            const double inv_n = 1.0 / static_cast<double>(n);
            const double eta = eta0 / (1.0 + decay * static_cast<double>(epoch));
            for (std::size_t f = 0; f < d; ++f) {
                w[f] -= eta * (reg * w[f] + grad_w[f] * inv_n);
            }
            b -= eta * grad_b * inv_n;
        }
    }
}

std::vector<std::vector<double>> LinearSvmClassifier::predict_scores(const Matrix& x) const {
    std::vector<std::vector<double>> out(x.n_rows(),
                                         std::vector<double>(static_cast<std::size_t>(n_classes_), 0.0));
    for (std::size_t i = 0; i < x.n_rows(); ++i) {
        for (int c = 0; c < n_classes_; ++c) {
            const auto cu = static_cast<std::size_t>(c);
            double margin = bias_[cu];
            for (std::size_t f = 0; f < x.n_cols(); ++f) margin += weights_[cu][f] * x.data[i][f];
            out[i][cu] = margin;
        }
    }
    return out;
}

double LinearSvmClassifier::train_hinge_loss(const Matrix& x, const std::vector<int>& y) const {
    const auto scores = predict_scores(x);
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (int c = 0; c < n_classes_; ++c) {
            const double s = y[i] == c ? 1.0 : -1.0;
            loss += std::max(0.0, 1.0 - s * scores[i][static_cast<std::size_t>(c)]);
        }
    }
    return loss / static_cast<double>(y.size());
}

json LinearSvmClassifier::to_json() const {
    json j = model_envelope(*this, hp_, seed_, n_classes_);
    j["weights"] = weights_;
    j["bias"] = bias_;
    return j;
}

void LinearSvmClassifier::from_json(const json& j) {
    n_classes_ = j.at("n_classes").get<int>();
    hp_ = hyper_from_json(j.at("hyperparameters"));
    seed_ = j.at("seed").get<std::uint64_t>();
    weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
    bias_ = j.at("bias").get<std::vector<double>>();
}

// --- registry --------------------------------------------------------------------

const std::vector<std::string>& classifier_names() {
    static const std::vector<std::string> names = {"bl1_majority", "bl2_decision_tree", "bl3_weighted_random",
                                                   "decision_tree", "knn",              "svm_linear",
                                                   "random_forest", "gbt"};
    return names;
}

std::unique_ptr<Classifier> make_classifier(const std::string& name) {
    if (name == "bl1_majority") return std::make_unique<MajorityClassifier>();
    if (name == "bl2_decision_tree") return std::make_unique<BaselineCartClassifier>();
    if (name == "bl3_weighted_random") return std::make_unique<WeightedRandomClassifier>();
    if (name == "decision_tree") return std::make_unique<CartClassifier>();
    if (name == "knn") return std::make_unique<KnnClassifier>();
    if (name == "svm_linear") return std::make_unique<LinearSvmClassifier>();
    if (name == "random_forest") return std::make_unique<RandomForestClassifier>();
    if (name == "gbt") return std::make_unique<GbtClassifier>();
    throw ValidationError("unknown classifier: " + name);
}

std::unique_ptr<Classifier> classifier_from_json(const json& j) {
    auto model = make_classifier(j.at("model").get<std::string>());
    model->from_json(j);
    return model;
}

}  // namespace biomlab::models
