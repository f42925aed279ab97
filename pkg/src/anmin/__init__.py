"""Analytic alternating-minimization training for two-layer leaky-ReLU
networks, with gradient-descent baselines, dataset generators and a
benchmark harness."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    ActivationConfig,
    Dataset,
    HyperParams,
    NetworkParams,
    forward,
    loss,
    make_dataset,
    mse,
    r_squared,
)
from .driver import AblationConfig, AnminTrace, diagnose, init_hidden, train  # noqa: F401
from .baselines import GdConfig, gradients, train_gd  # noqa: F401
from .data import SplitSpec, gen_dae, gen_sdf, gen_sin, load_csv, save_csv, split  # noqa: F401
