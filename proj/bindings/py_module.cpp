#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>

#include "biomlab/explain.hpp"
#include "biomlab/labeling.hpp"
#include "biomlab/models.hpp"
#include "biomlab/pipeline.hpp"
#include "biomlab/preprocess.hpp"
#include "biomlab/stats.hpp"
#include "biomlab/synthcohort.hpp"

namespace py = pybind11;

namespace {

using biomlab::Matrix;

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    if (!rows.empty()) {
        m.col_names.resize(rows.front().size());
        for (std::size_t c = 0; c < m.col_names.size(); ++c) m.col_names[c] = "f" + std::to_string(c);
    }
    m.data = rows;
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Passive-sensing biomarker toolkit: UCLA scoring, group statistics, "
              "class balancing, classifiers, and TreeSHAP attributions.";
    m.attr("__version__") = biomlab::pipeline::kToolVersion;

    py::register_exception<biomlab::ValidationError>(m, "ValidationError");

    m.def(
        "score_ucla",
        [](const std::vector<int>& responses, const std::string& participant_id) {
            if (responses.size() != 10) throw biomlab::ValidationError("expected 10 responses");
            std::array<int, 10> raw{};
            std::copy(responses.begin(), responses.end(), raw.begin());
            const auto a = biomlab::labeling::score_ucla(participant_id, raw);
            py::dict d;
            d["participant_id"] = a.participant_id;
            d["social_score"] = a.social_score;
            d["emotional_score"] = a.emotional_score;
            d["total_score"] = a.total_score;
            d["category"] = biomlab::labeling::category_name(a.category);
            d["overall_binary"] = a.overall_high ? "high" : "low";
            return d;
        },
        py::arg("responses"), py::arg("participant_id") = "p", "Score ten raw 1..4 UCLA responses.");

    m.def(
        "categorize",
        [](int social_score, int emotional_score) {
            return std::string(
                biomlab::labeling::category_name(biomlab::labeling::categorize(social_score, emotional_score)));
        },
        py::arg("social_score"), py::arg("emotional_score"));

    m.def(
        "shapiro_wilk",
        [](std::vector<double> sample) {
            const auto r = biomlab::stats::shapiro_wilk(std::move(sample));
            return py::make_tuple(r.w, r.p);
        },
        py::arg("sample"), "Royston AS R94 normality test; returns (W, p).");

    m.def(
        "mann_whitney_u",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const auto r = biomlab::stats::mann_whitney_u(a, b);
            return py::make_tuple(r.u, r.p);
        },
        py::arg("a"), py::arg("b"), "Two-sided Mann-Whitney U; returns (U, p).");

    m.def("cohens_d", &biomlab::stats::cohens_d, py::arg("a"), py::arg("b"));

    m.def(
        "bootstrap_effect",
        [](const std::vector<double>& a, const std::vector<double>& b, std::size_t resamples,
           std::uint64_t seed) {
            const auto r = biomlab::stats::bootstrap_effect(a, b, resamples, seed);
            py::dict d;
            d["d_point"] = r.d_point;
            d["d_ci"] = py::make_tuple(r.d_ci_low, r.d_ci_high);
            d["mean_a_ci"] = py::make_tuple(r.mean_a_ci_low, r.mean_a_ci_high);
            d["mean_b_ci"] = py::make_tuple(r.mean_b_ci_low, r.mean_b_ci_high);
            d["degenerate_replicates"] = r.degenerate_replicates;
            return d;
        },
        py::arg("a"), py::arg("b"), py::arg("resamples") = 10000, py::arg("seed") = 1);

    m.def(
        "smote",
        [](const std::vector<std::vector<double>>& x, const std::vector<int>& y, int n_classes, int k,
           std::uint64_t seed) {
            const auto r = biomlab::preprocess::smote(matrix_from_rows(x), y, n_classes, k, seed);
            return py::make_tuple(r.x.data, r.y);
        },
        py::arg("x"), py::arg("y"), py::arg("n_classes"), py::arg("k") = 5, py::arg("seed") = 1,
        "Equalize class counts by segment interpolation; returns (X', y').");

    m.def(
        "train_classifier",
        [](const std::string& name, const std::vector<std::vector<double>>& x, const std::vector<int>& y,
           int n_classes, const std::map<std::string, double>& hyperparameters, std::uint64_t seed) {
            auto model = biomlab::models::make_classifier(name);
            model->fit(matrix_from_rows(x), y, n_classes, hyperparameters, seed);
            return model->to_json().dump();
        },
        py::arg("name"), py::arg("x"), py::arg("y"), py::arg("n_classes"),
        py::arg("hyperparameters") = std::map<std::string, double>{}, py::arg("seed") = 1,
        "Fit a classifier and return its JSON serialization.");

    m.def(
        "predict_scores",
        [](const std::string& model_json, const std::vector<std::vector<double>>& x) {
            const auto model = biomlab::models::classifier_from_json(nlohmann::json::parse(model_json));
            return model->predict_scores(matrix_from_rows(x));
        },
        py::arg("model_json"), py::arg("x"));

    m.def(
        "predict",
        [](const std::string& model_json, const std::vector<std::vector<double>>& x) {
            const auto model = biomlab::models::classifier_from_json(nlohmann::json::parse(model_json));
            return model->predict(matrix_from_rows(x));
        },
        py::arg("model_json"), py::arg("x"));

    m.def(
        "shap_values",
        [](const std::string& model_json, const std::vector<std::vector<double>>& x) {
            const auto model = biomlab::models::classifier_from_json(nlohmann::json::parse(model_json));
            const auto shap = biomlab::explain::ensemble_shap(*model, matrix_from_rows(x), 1);
            py::list instances;
            for (const auto& per_class : shap.values) {
                py::list classes;
                for (const auto& attr : per_class) {
                    py::dict d;
                    d["phi"] = attr.phi;
                    d["base"] = attr.base;
                    classes.append(std::move(d));
                }
                instances.append(std::move(classes));
            }
            return instances;
        },
        py::arg("model_json"), py::arg("x"),
        "Path-dependent TreeSHAP attributions per instance and class.");

    m.def(
        "generate_cohort",
        [](const std::string& config_json, const std::string& out_dir) {
            const auto cfg = biomlab::synth::cohort_config_from_json(nlohmann::json::parse(config_json));
            const auto manifest = biomlab::synth::generate(cfg, out_dir);
            return biomlab::synth::manifest_to_json(manifest).dump();
        },
        py::arg("config_json") = "{}", py::arg("out_dir") = "out/raw");

    m.def(
        "run_pipeline",
        [](const std::string& raw_dir, const std::string& out_root, const std::string& config_path) {
            const auto cfg = biomlab::pipeline::load_config(config_path);
            biomlab::pipeline::run_pipeline(cfg, raw_dir, out_root);
        },
        py::arg("raw_dir"), py::arg("out_root"), py::arg("config_path") = "");
}
