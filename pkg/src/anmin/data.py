"""Dataset ingestion and generation.

Covers CSV regression loading with a sidecar column-spec, seeded 80/20
splitting, the simulated sin dataset, the signed-distance-field decoder
dataset from a binary mask image, and the noisy-patch denoising dataset.
"""

import json
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from PIL import Image
from scipy import ndimage

from .errors import (
    DataError,
    EmptyShape,
    ImageTooSmall,
    MissingColumn,
    NotBinary,
    ParseError,
)
from .model import Dataset, make_dataset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    split_index: int = 0

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train_fraction must be in (0, 1)")


def split(data: Dataset, spec: SplitSpec):
    """Seeded permutation split; first ceil(f*N) rows train, rest test."""
    if data.n < 2:
        raise DataError("need at least 2 rows to split")
    rng = np.random.default_rng([spec.seed, spec.split_index])
    perm = rng.permutation(data.n)
    n_train = math.ceil(spec.train_fraction * data.n)
    tr, te = perm[:n_train], perm[n_train:]
    return (
        Dataset(data.X[tr], data.Y[tr]),
        Dataset(data.X[te], data.Y[te]),
    )


def load_column_spec(path):
    """Sidecar JSON mapping column name -> numeric | one-hot | drop | target."""
    with open(path) as f:
        spec = json.load(f)
    allowed = {"numeric", "one-hot", "drop", "target"}
    for col, kind in spec.items():
        if kind not in allowed:
            raise DataError(f"column-spec: unknown kind {kind!r} for column {col!r}")
    return spec


def load_csv(path, target_columns=None, drop_columns=(), column_spec=None) -> Dataset:
    """Load a regression CSV into a Dataset (ones column prepended).

    Either name the targets directly or pass a column-spec dict/file; the
    spec takes precedence. Rows with missing values are rejected with the
    count logged. One-hot columns are expanded; drop columns removed.
    """
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if isinstance(column_spec, (str, bytes)) or hasattr(column_spec, "read"):
        column_spec = load_column_spec(column_spec)

    if column_spec is not None:
        targets = [c for c, k in column_spec.items() if k == "target"]
        drops = [c for c, k in column_spec.items() if k == "drop"]
        onehots = [c for c, k in column_spec.items() if k == "one-hot"]
    else:
        targets = list(target_columns or [])
        drops = list(drop_columns)
        onehots = []
    if not targets:
        raise DataError("no target columns declared")
    for col in targets + drops + onehots:
        if col not in frame.columns:
            raise MissingColumn(f"{path}: column {col!r} not found")

    frame = frame.drop(columns=drops)
    n_before = len(frame)
    frame = frame.dropna()
    dropped = n_before - len(frame)
    if dropped:
        log.warning("%s: rejected %d rows with missing values", path, dropped)
    if len(frame) == 0:
        raise DataError(f"{path}: no complete rows")

    Y = frame[targets]
    X = frame.drop(columns=targets)
    if onehots:
        X = pd.get_dummies(X, columns=onehots, dtype=np.float64)
    try:
        Xv = X.to_numpy(dtype=np.float64)
        Yv = Y.to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as exc:
        bad = [c for c in X.columns if not np.issubdtype(X[c].dtype, np.number)]
        raise ParseError(f"{path}: non-numeric column(s) {bad}: {exc}") from exc
    return make_dataset(Xv, Yv)


def save_csv(data: Dataset, path):
    """Write a Dataset as CSV (features f0.., targets t0..) with round-trip
    exact float formatting; the ones column is not written."""
    d, c = data.n_features, data.n_outputs
    header = [f"f{i}" for i in range(d)] + [f"t{k}" for k in range(c)]
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for xi, yi in zip(data.X[:, 1:], data.Y):
            f.write(",".join(repr(float(v)) for v in (*xi, *yi)) + "\n")


def gen_sin(n, d, seed=0) -> Dataset:
    """x ~ N(0, I_d), y = sin(|x|^2)."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    y = np.sin(np.sum(x * x, axis=1))
    return make_dataset(x, y[:, None])


def _load_gray(image):
    if isinstance(image, np.ndarray):
        return np.asarray(image, dtype=np.float64)
    with Image.open(image) as img:
        return np.asarray(img.convert("L"), dtype=np.float64)


def gen_sdf(mask_image, normalize=False) -> Dataset:
    """One row per pixel: inputs (x, y) coordinates, target the Euclidean
    signed distance to the mask boundary (negative inside, positive outside).

    The mask must be strictly binary {0, 255}; it is thresholded at 128.
    """
    arr = _load_gray(mask_image)
    if arr.ndim != 2:
        raise NotBinary("mask must be single-channel")
    if not np.isin(arr, (0.0, 255.0)).all():
        raise NotBinary("mask has values other than 0/255")
    inside = arr >= 128
    if not inside.any() or inside.all():
        raise EmptyShape("mask has no boundary")
    # distance_transform_edt: for nonzero pixels, distance to nearest zero
    sdf = ndimage.distance_transform_edt(~inside) - ndimage.distance_transform_edt(inside)
    rows, cols = arr.shape
    yy, xx = np.mgrid[0:rows, 0:cols]
    coords = np.column_stack([xx.ravel().astype(np.float64), yy.ravel().astype(np.float64)])
    if normalize:
        coords[:, 0] /= max(cols - 1, 1)
        coords[:, 1] /= max(rows - 1, 1)
    return make_dataset(coords, sdf.ravel()[:, None])


def gen_dae(image, patch=15, stride=3, noise_sigma=10.0, seed=0) -> Dataset:
    """Overlapping patches as targets, the same patches plus Gaussian noise
    as inputs; pixel values stay on the [0, 255] scale."""
    arr = _load_gray(image)
    rows, cols = arr.shape
    if rows < patch or cols < patch:
        raise ImageTooSmall(f"image {arr.shape} cannot fit a {patch}x{patch} patch")
    patches = []
    for r in range(0, rows - patch + 1, stride):
        for c in range(0, cols - patch + 1, stride):
            patches.append(arr[r : r + patch, c : c + patch].ravel())
    clean = np.array(patches)
    rng = np.random.default_rng(seed)
    noisy = clean + rng.normal(0.0, noise_sigma, size=clean.shape)
    return make_dataset(noisy, clean)
