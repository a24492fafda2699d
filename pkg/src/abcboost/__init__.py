"""Multi-class gradient tree boosting: mart, abc-mart, (robust) logitboost,
abc-logitboost, and classic clipped logitboost."""

__version__ = "0.1.0"

from .boost import (Algorithm, BoostedModel, TrainConfig, TrainingLog,
                    abc_residuals, logit_residuals, neg_log_likelihood,
                    predict_class, predict_class_batch, predict_scores,
                    predict_scores_batch, softmax_probs, train)
from .data import (Dataset, FeatureOrder, load_csv, load_libsvm,
                   one_hot_expand, presort, split_halves)
from .errors import DataError, ModelIOError, TrainingError
from .evaluate import EvalReport, error_count, error_curve, p_value
from .persist import load_model, save_model
from .tree import (GradientPairs, RegressionTree, SplitCriterion, best_split,
                   fit_tree, gain_at_split, tree_predict, tree_predict_batch)

__all__ = [
    "Algorithm", "BoostedModel", "Dataset", "DataError", "EvalReport",
    "FeatureOrder", "GradientPairs", "ModelIOError", "RegressionTree",
    "SplitCriterion", "TrainConfig", "TrainingError", "TrainingLog",
    "abc_residuals", "best_split", "error_count", "error_curve", "fit_tree",
    "gain_at_split", "load_csv", "load_libsvm", "load_model",
    "logit_residuals", "neg_log_likelihood", "one_hot_expand", "p_value",
    "predict_class", "predict_class_batch", "predict_scores",
    "predict_scores_batch", "presort", "save_model", "softmax_probs",
    "split_halves", "train", "tree_predict", "tree_predict_batch",
]
