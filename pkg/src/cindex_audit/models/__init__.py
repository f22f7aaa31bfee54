from .cox import CoxModel, cox_fit, cox_predict_distribution, cox_predict_risk, partial_log_likelihood
from .forest import ForestModel, ForestParams, SurvivalTree, rsf_fit, rsf_predict
from .io import load_model, save_model
from .smoothc import SmoothCModel, smoothc_fit, smoothc_predict

__all__ = [
    "CoxModel", "cox_fit", "cox_predict_risk", "cox_predict_distribution", "partial_log_likelihood",
    "ForestModel", "ForestParams", "SurvivalTree", "rsf_fit", "rsf_predict",
    "SmoothCModel", "smoothc_fit", "smoothc_predict",
    "save_model", "load_model",
]
