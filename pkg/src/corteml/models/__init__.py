"""Model families: OLS regression with diagnostics, logistic regression,
SVM, decision tree, and grid search over the stock hyperparameter table."""

from .grid import (
    FAMILIES,
    TABLE_BEST,
    TABLE_GRIDS,
    CellScore,
    GridSearchResult,
    GridSpec,
    fit_predict,
    grid_cells,
    grid_search,
)
from .linear import AssumptionReport, OlsFit, check_assumptions, ols_fit
from .logistic import LogisticModel, logistic_decision, logistic_fit, logistic_predict
from .serialize import load_model, save_model
from .svm import SvmModel, kernel_matrix, svm_decision, svm_fit, svm_predict
from .tree import TreeModel, tree_decision, tree_depth, tree_fit, tree_predict

__all__ = [
    "FAMILIES",
    "TABLE_BEST",
    "TABLE_GRIDS",
    "AssumptionReport",
    "CellScore",
    "GridSearchResult",
    "GridSpec",
    "LogisticModel",
    "OlsFit",
    "SvmModel",
    "TreeModel",
    "check_assumptions",
    "fit_predict",
    "grid_cells",
    "grid_search",
    "kernel_matrix",
    "load_model",
    "logistic_decision",
    "logistic_fit",
    "logistic_predict",
    "ols_fit",
    "save_model",
    "svm_decision",
    "svm_fit",
    "svm_predict",
    "tree_decision",
    "tree_depth",
    "tree_fit",
    "tree_predict",
]
