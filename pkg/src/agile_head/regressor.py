"""Linear pose scoring from normalized landmarks.

Two independent linear models, one per movement axis, map a normalized
frame onto a score in [-10, 10]; the score then scales linearly onto the
robot workspace. Landmarks are centered on their centroid and divided by
the RMS radial distance before fitting, so face position, camera
distance, and face size drop out of the features.

Plain least squares is underdetermined with 469 parameters on a
174-sample corpus, so the fit carries a small ridge penalty on the
weights (never the bias); the noiseless-recovery tests run it at a
negligible lambda.
"""
import csv
import json
import math
import pathlib
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrame, InsufficientData, ParseError
from .facepose import LandmarkFrame

MODEL_SCHEMA = "agile-head-model/1"
SCORE_LIMIT = 10.0
DEFAULT_LAMBDA = 1e-3
DEFAULT_SPLIT = 0.8
DEFAULT_SEED = 20260808
AXES = ("horizontal", "vertical")


def normalize(frame: LandmarkFrame):
    """Center on the landmark centroid and scale to unit RMS radius.

    Returns (features_x, features_y), each of length 468.
    """
    xy = frame.points[:, :2]
    centered = xy - xy.mean(axis=0)
    rms = math.sqrt(float(np.mean(np.sum(centered * centered, axis=1))))
    if rms < 1e-9:
        raise DegenerateFrame("all landmarks coincident")
    scaled = centered / rms
    return scaled[:, 0].copy(), scaled[:, 1].copy()


def _features(frame: LandmarkFrame, axis: str):
    fx, fy = normalize(frame)
    return fx if axis == "horizontal" else fy


@dataclass(frozen=True)
class LinearPoseModel:
    axis: str
    w0: float
    w: np.ndarray          # 468 weights
    ridge_lambda: float
    seed: int
    n_train: int
    n_val: int
    val_rmse: float

    def to_json(self) -> str:
        return json.dumps({
            "schema": MODEL_SCHEMA,
            "axis": self.axis,
            "w0": self.w0,
            "w": self.w.tolist(),
            "lambda": self.ridge_lambda,
            "seed": self.seed,
            "n_train": self.n_train,
            "n_val": self.n_val,
            "val_rmse": self.val_rmse,
        })

    def save(self, path):
        pathlib.Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def from_json(cls, text: str) -> "LinearPoseModel":
        d = json.loads(text)
        if d.get("schema") != MODEL_SCHEMA:
            raise ParseError(f"unexpected model schema {d.get('schema')!r}")
        w = np.asarray(d["w"], dtype=float)
        if w.shape != (468,):
            raise ParseError(f"model must carry 468 weights, got {w.shape}")
        return cls(axis=d["axis"], w0=float(d["w0"]), w=w,
                   ridge_lambda=float(d["lambda"]), seed=int(d["seed"]),
                   n_train=int(d["n_train"]), n_val=int(d["n_val"]),
                   val_rmse=float(d["val_rmse"]))

    @classmethod
    def load(cls, path) -> "LinearPoseModel":
        return cls.from_json(pathlib.Path(path).read_text())


def split_indices(n: int, split: float, seed: int):
    """Deterministic shuffled partition: floor(split*n) train, rest validation."""
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(math.floor(split * n))
    return order[:n_train], order[n_train:]


def fit(dataset, axis: str, split: float = DEFAULT_SPLIT, seed: int = DEFAULT_SEED,
        ridge_lambda: float = DEFAULT_LAMBDA) -> LinearPoseModel:
    """Fit one axis model on the shuffled train split; records held-out RMSE.

    ``dataset`` is a sequence of (LandmarkFrame, horizontal, vertical).
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    n = len(dataset)
    train_idx, val_idx = split_indices(n, split, seed)
    if len(train_idx) < 2:
        raise InsufficientData(f"{len(train_idx)} training samples after split")

    col = 1 if axis == "horizontal" else 2
    feats = np.stack([_features(rec[0], axis) for rec in dataset])
    labels = np.array([float(rec[col]) for rec in dataset])

    x_train, y_train = feats[train_idx], labels[train_idx]
    design = np.hstack([np.ones((len(train_idx), 1)), x_train])
    # augmented least squares: ridge on the weights only, bias untouched
    reg = math.sqrt(ridge_lambda) * np.eye(469)
    reg[0, 0] = 0.0
    a = np.vstack([design, reg])
    b = np.concatenate([y_train, np.zeros(469)])
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)

    w0, w = float(coef[0]), coef[1:]
    if len(val_idx):
        pred = w0 + feats[val_idx] @ w
        val_rmse = float(np.sqrt(np.mean((pred - labels[val_idx]) ** 2)))
    else:
        val_rmse = float("nan")
    return LinearPoseModel(axis=axis, w0=w0, w=w, ridge_lambda=ridge_lambda,
                           seed=seed, n_train=len(train_idx), n_val=len(val_idx),
                           val_rmse=val_rmse)


def predict(model: LinearPoseModel, frame: LandmarkFrame) -> float:
    """Score a frame with the model, clamped to [-10, 10]."""
    raw = model.w0 + float(model.w @ _features(frame, model.axis))
    return min(max(raw, -SCORE_LIMIT), SCORE_LIMIT)


def score_to_angle(score: float, limit: float = math.radians(15.0)) -> float:
    """Linear map from the score scale onto a symmetric angle range."""
    if limit <= 0.0:
        raise ValueError(f"limit must be positive, got {limit!r}")
    return score / SCORE_LIMIT * limit


def load_dataset(path):
    """Read a dataset directory: frames.jsonl plus labels.csv.

    Returns a list of (LandmarkFrame, horizontal, vertical) ordered by
    the label index column.
    """
    root = pathlib.Path(path)
    frames = []
    with open(root / "frames.jsonl") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                frames.append(LandmarkFrame.from_payload(json.loads(line)))
            except Exception as exc:
                raise ParseError(f"bad frame record: {exc}", line=lineno) from exc
    records = []
    with open(root / "labels.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                idx = int(row["index"])
                h, v = float(row["horizontal"]), float(row["vertical"])
            except (KeyError, ValueError) as exc:
                raise ParseError(f"bad label row {row!r}") from exc
            if not (0 <= idx < len(frames)):
                raise ParseError(f"label index {idx} out of range")
            if abs(h) > SCORE_LIMIT or abs(v) > SCORE_LIMIT:
                raise ParseError(f"label outside [-10, 10] in row {row!r}")
            records.append((frames[idx], h, v))
    if not records:
        raise InsufficientData(f"no labeled samples under {root}")
    return records


def save_dataset(path, records):
    """Write (LandmarkFrame, horizontal, vertical) records in the dataset layout."""
    root = pathlib.Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "frames.jsonl", "w") as fh:
        for frame, _, _ in records:
            fh.write(frame.to_json_line() + "\n")
    with open(root / "labels.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "horizontal", "vertical"])
        for i, (_, h, v) in enumerate(records):
            writer.writerow([i, h, v])
