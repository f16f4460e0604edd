from .artifact import dumps_model, format_ranking, load_model, loads_model, rank_features, save_model
from .cv import Grid, GridResult, grid_search, grouped_kfold
from .logistic import ModelConfig, TrainedModel, fit_logistic, gradient, objective
from .metrics import Confusion, EvalReport, accuracy, evaluate, f1, mcc
from .selection import anova_f, chi2, univariate_select

__all__ = [
    "Confusion", "EvalReport", "Grid", "GridResult", "ModelConfig", "TrainedModel",
    "accuracy", "anova_f", "chi2", "dumps_model", "evaluate", "f1", "fit_logistic", "format_ranking", "gradient",
    "grid_search", "grouped_kfold", "load_model", "loads_model", "mcc", "objective",
    "rank_features", "save_model", "univariate_select",
]
