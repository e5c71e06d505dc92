"""Small moving-window soft-sensor calibration: mean moving window, PLS,
recursive PLS, random forest and the RF-PLS hybrid, with continuous and
delayed update protocols."""

__version__ = "0.1.0"

from .dataset import Dataset, SplitSpec, jitter_duplicate_y, lag_align, load_csv, split_prefix, write_csv
from .ensemble import Forest, ForestConfig, fit_forest, fit_tree, predict_forest, predict_tree
from .harness import (
    Kind, ModelSpec, PredictionRecord, RunReport, UpdatePolicy, predict_mmw, rmsep, run_series,
    sweep_delay, sweep_window_size,
)
from .numeric import ContractError, DegenerateWindowError, RngState
from .pls import PlsModel, fit_pls, fit_pls_cv, predict_pls, select_latent_loo
from .rfpls import RfPlsConfig, fit_predict_rfpls
from .rpls import RplsState, rpls_init, rpls_predict, rpls_update
from .simulator import SimConfig, generate
