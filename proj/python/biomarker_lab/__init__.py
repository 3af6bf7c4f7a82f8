"""Passive-sensing digital biomarkers and loneliness analysis toolkit.

Thin Python surface over the C++ core: UCLA scoring, the statistical battery
(Shapiro-Wilk, Mann-Whitney U, bootstrapped Cohen's d), SMOTE, the classifier
roster, TreeSHAP attributions, the synthetic cohort generator, and the full
pipeline runner.
"""

from ._core import (
    ValidationError,
    __version__,
    bootstrap_effect,
    categorize,
    cohens_d,
    generate_cohort,
    mann_whitney_u,
    predict,
    predict_scores,
    run_pipeline,
    score_ucla,
    shap_values,
    shapiro_wilk,
    smote,
    train_classifier,
)

__all__ = [
    "ValidationError",
    "__version__",
    "bootstrap_effect",
    "categorize",
    "cohens_d",
    "generate_cohort",
    "mann_whitney_u",
    "predict",
    "predict_scores",
    "run_pipeline",
    "score_ucla",
    "shap_values",
    "shapiro_wilk",
    "smote",
    "train_classifier",
]
