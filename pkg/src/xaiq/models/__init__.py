from .base import OutputKind, PredictFunction
from .svm import ConvergenceError, SvmConfig, SvmModel, train_svm
from .extraction import extract_rules
from .recommender import (
    DEFAULT_PROFILE,
    RecommendationResult,
    RecommenderModel,
    UserProfile,
    recommender_predict,
    recommender_rules,
)

__all__ = [
    "OutputKind",
    "PredictFunction",
    "ConvergenceError",
    "SvmConfig",
    "SvmModel",
    "train_svm",
    "extract_rules",
    "DEFAULT_PROFILE",
    "RecommendationResult",
    "RecommenderModel",
    "UserProfile",
    "recommender_predict",
    "recommender_rules",
]
