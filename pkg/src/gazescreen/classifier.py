"""A small fully connected binary classifier written directly in numpy.

Layers chain 5 -> hidden_sizes... -> 1 with rectifier hidden units and a
logistic output giving P(ASD).  Training is plain gradient descent on mean
binary cross-entropy with optional L2 on weights.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import N_ZONES, FeatureVector, Label
from .errors import (DivergedLoss, EmptyBatch, InsufficientClassMembers, NonFiniteInput,
                     SchemaViolation)
from .ingest import _read_text, atomic_write_text

EPS = 1e-12
N_INPUTS = N_ZONES


@dataclass(frozen=True)
class MlpConfig:
    hidden_sizes: tuple[int, ...] = (8,)
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int | None = None  # None = full batch
    init_seed: int = 0
    l2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden sizes must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if int(self.epochs) < 1:
            raise ValueError("epochs must be positive")
        if self.batch_size is not None and int(self.batch_size) < 1:
            raise ValueError("batch_size must be positive")
        if not self.l2 >= 0:
            raise ValueError("l2 must be non-negative")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (N_INPUTS, *self.hidden_sizes, 1)

    def to_dict(self) -> dict:
        return {"hidden_sizes": list(self.hidden_sizes), "learning_rate": self.learning_rate,
                "epochs": int(self.epochs), "batch_size": self.batch_size,
                "init_seed": int(self.init_seed), "l2": self.l2}


# Wider hidden layer used by the clean-vs-noised experiment and the CLI.  With
# 32 units the learning-curve shape stops depending on the init draw.
EXPERIMENT_CONFIG = MlpConfig(hidden_sizes=(32,), learning_rate=0.1, epochs=300)


@dataclass
class MlpModel:
    """Weights ``W[k]`` have shape ``(fan_in, fan_out)``; biases ``b[k]`` shape ``(fan_out,)``."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    config: MlpConfig = field(default_factory=MlpConfig)

    def __post_init__(self):
        if len(self.weights) != len(self.biases):
            raise ValueError("weights and biases must pair up")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {k}: bad shapes {w.shape} / {b.shape}")
            if k and self.weights[k - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {k}: fan-in {w.shape[0]} does not match previous fan-out")
        if self.weights[0].shape[0] != N_INPUTS or self.weights[-1].shape[1] != 1:
            raise ValueError("model must map 5 inputs to 1 output")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0], *(w.shape[1] for w in self.weights))

    @property
    def n_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "MlpModel":
        return MlpModel([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.config)


class Gradients(NamedTuple):
    weights: list[np.ndarray]
    biases: list[np.ndarray]


class EpochRecord(NamedTuple):
    epoch: int
    train_loss: float
    train_accuracy: float
    eval_loss: float
    eval_accuracy: float


class LearningCurve(list):
    """Per-epoch metrics, epochs numbered from 1."""

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self])

    def epochs_to_fraction_of_final(self, fraction: float = 0.95, metric: str = "train_accuracy") -> int:
        """First epoch whose ``metric`` reaches ``fraction`` of its final value."""
        vals = self.column(metric)
        target = fraction * vals[-1]
        return int(self[int(np.argmax(vals >= target))].epoch)


class Evaluation(NamedTuple):
    accuracy: float
    loss: float
    tp: int
    fp: int
    tn: int
    fn: int


def init_model(cfg: MlpConfig = MlpConfig()) -> MlpModel:
    """Glorot-uniform weights from a PCG64 stream seeded with ``init_seed``; zero biases."""
    rng = np.random.Generator(np.random.PCG64(cfg.init_seed))
    sizes = cfg.layer_sizes
    ws, bs = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        ws.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        bs.append(np.zeros(fan_out))
    return MlpModel(ws, bs, cfg)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def as_matrix(batch) -> tuple[np.ndarray, np.ndarray | None]:
    """Stack feature vectors (or pass through an array) into ``(X, y)``."""
    if isinstance(batch, np.ndarray):
        return np.atleast_2d(np.asarray(batch, dtype=np.float64)), None
    rows = list(batch)
    if not rows:
        return np.zeros((0, N_INPUTS)), np.zeros(0)
    X = np.vstack([fv.as_array() for fv in rows])
    if any(fv.label is None for fv in rows):
        return X, None
    y = np.array([fv.label.target for fv in rows], dtype=np.float64)
    return X, y


def _forward_all(model: MlpModel, X: np.ndarray):
    acts = [X]
    h = X
    last = len(model.weights) - 1
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        h = sigmoid(z) if k == last else np.maximum(z, 0.0)
        acts.append(h)
    return acts


def predict_proba(model: MlpModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if not np.isfinite(X).all():
        raise NonFiniteInput("features contain non-finite values")
    return _forward_all(model, X)[-1][:, 0]


def forward(model: MlpModel, features) -> float:
    """P(ASD) for one 5-vector (a :class:`FeatureVector` or any sequence of reals)."""
    x = features.as_array() if isinstance(features, FeatureVector) else np.asarray(features, dtype=np.float64)
    if x.shape != (N_INPUTS,):
        raise ValueError(f"expected {N_INPUTS} features, got shape {x.shape}")
    return float(predict_proba(model, x[None, :])[0])


def _bce(p: np.ndarray, y: np.ndarray) -> float:
    pc = np.clip(p, EPS, 1.0 - EPS)
    return float(-np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))


def loss_and_gradients(model: MlpModel, X, y=None) -> tuple[float, Gradients]:
    """Mean BCE (+ l2/2 * sum of squared weights) and its exact gradients.

    ``X`` may be a sequence of labeled :class:`FeatureVector`; otherwise
    ``y`` holds 0/1 targets.
    """
    if y is None:
        X, y = as_matrix(X)
        if y is None:
            raise ValueError("every feature vector in the batch needs a label")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if len(X) == 0:
        raise EmptyBatch("empty batch")
    if not np.isfinite(X).all():
        raise NonFiniteInput("features contain non-finite values")
    acts = _forward_all(model, X)
    p = acts[-1][:, 0]
    l2 = model.config.l2
    loss = _bce(p, y)
    if l2:
        loss += 0.5 * l2 * sum(float(np.sum(w * w)) for w in model.weights)
    n = len(X)
    delta = ((p - y) / n)[:, None]
    gw = [None] * len(model.weights)
    gb = [None] * len(model.weights)
    for k in range(len(model.weights) - 1, -1, -1):
        gw[k] = acts[k].T @ delta + l2 * model.weights[k]
        gb[k] = delta.sum(axis=0)
        if k:
            delta = (delta @ model.weights[k].T) * (acts[k] > 0)
    return loss, Gradients(gw, gb)


def evaluate(model: MlpModel, labeled) -> Evaluation:
    """Accuracy, loss and confusion counts at threshold 0.5 (ties count as ASD)."""
    X, y = as_matrix(labeled)
    if len(X) == 0:
        raise EmptyBatch("cannot evaluate an empty set")
    if y is None:
        raise ValueError("evaluation needs labeled feature vectors")
    p = predict_proba(model, X)
    pred = p >= 0.5
    truth = y == 1
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    tn = int(np.sum(~pred & ~truth))
    fn = int(np.sum(~pred & truth))
    return Evaluation((tp + tn) / len(y), _bce(p, y), tp, fp, tn, fn)


def _check_distributions(X: np.ndarray):
    # inputs are dwell fractions; no normalization layer exists to absorb anything else
    if (X < 0).any() or (X > 1).any() or not np.allclose(X.sum(axis=1), 1.0, atol=1e-6):
        raise ValueError("training features must be zone distributions (non-negative rows summing to 1)")


def train(cfg: MlpConfig, train_set, eval_set) -> tuple[MlpModel, LearningCurve]:
    Xtr, ytr = as_matrix(train_set)
    Xev, yev = as_matrix(eval_set)
    if len(Xtr) == 0 or len(Xev) == 0:
        raise EmptyBatch("train and eval sets must be non-empty")
    if ytr is None or yev is None:
        raise ValueError("training needs labeled feature vectors")
    if Xtr.shape[1] != N_INPUTS or Xev.shape[1] != N_INPUTS:
        raise ValueError("feature dimensionality must be 5")
    _check_distributions(Xtr)
    _check_distributions(Xev)
    model = init_model(cfg)
    # shuffle stream is kept apart from the init stream
    rng = (np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.init_seed, 1])))
           if cfg.batch_size else None)
    curve = LearningCurve()
    lr = cfg.learning_rate
    n = len(Xtr)
    for epoch in range(1, cfg.epochs + 1):
        if rng is None:
            batches = [np.arange(n)]
        else:
            order = rng.permutation(n)
            batches = [order[s:s + cfg.batch_size] for s in range(0, n, cfg.batch_size)]
        # overflow shows up as a non-finite loss below, which aborts the run
        with np.errstate(over="ignore", invalid="ignore"):
            for idx in batches:
                loss, g = loss_and_gradients(model, Xtr[idx], ytr[idx])
                if not math.isfinite(loss):
                    raise DivergedLoss(epoch)
                for k in range(len(model.weights)):
                    model.weights[k] -= lr * g.weights[k]
                    model.biases[k] -= lr * g.biases[k]
            if not all(np.isfinite(w).all() for w in model.parameters()):
                raise DivergedLoss(epoch)
            tr = evaluate(model, train_set)
            ev = evaluate(model, eval_set)
        if not (math.isfinite(tr.loss) and all(np.isfinite(w).all() for w in model.parameters())):
            raise DivergedLoss(epoch)
        curve.append(EpochRecord(epoch, tr.loss, tr.accuracy, ev.loss, ev.accuracy))
    return model, curve


def split_stratified(features: Sequence[FeatureVector], test_fraction: float, seed: int):
    """Per-class shuffled split; each class contributes round(n_c * test_fraction) test rows."""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    groups: dict[Label, list[int]] = {}
    for i, fv in enumerate(features):
        if fv.label is None:
            raise ValueError(f"feature vector {fv.subject_id!r} needs a label")
        groups.setdefault(fv.label, []).append(i)
    for label in Label:
        if len(groups.get(label, [])) < 2:
            raise InsufficientClassMembers(f"class {label.value} needs at least 2 members")
    rng = np.random.Generator(np.random.PCG64(seed))
    train_idx, test_idx = [], []
    for label in Label:
        idx = np.array(groups[label])
        rng.shuffle(idx)
        k = int(round(len(idx) * test_fraction))
        k = min(max(k, 1), len(idx) - 1)
        test_idx += idx[:k].tolist()
        train_idx += idx[k:].tolist()
    train_idx.sort()
    test_idx.sort()
    return [features[i] for i in train_idx], [features[i] for i in test_idx]


# -- persistence ---------------------------------------------------------------

def _num(v: float) -> str:
    return format(float(v), ".17g")


def _matrix(a: np.ndarray, indent: str) -> str:
    if a.ndim == 1:
        return "[" + ", ".join(_num(v) for v in a) + "]"
    rows = [indent + "  " + _matrix(r, indent + "  ") for r in a]
    return "[\n" + ",\n".join(rows) + "\n" + indent + "]"


def format_model(model: MlpModel) -> str:
    layers = []
    for w, b in zip(model.weights, model.biases):
        layers.append(
            "    {\n"
            f'      "fan_in": {w.shape[0]},\n'
            f'      "fan_out": {w.shape[1]},\n'
            f'      "weights": {_matrix(w, "      ")},\n'
            f'      "biases": {_matrix(b, "      ")}\n'
            "    }"
        )
    return (
        "{\n"
        '  "format": "gazescreen-mlp/1",\n'
        f'  "config": {json.dumps(model.config.to_dict(), sort_keys=True)},\n'
        f'  "layer_sizes": {json.dumps(list(model.layer_sizes))},\n'
        '  "activations": ["relu", "sigmoid"],\n'
        '  "layers": [\n' + ",\n".join(layers) + "\n  ]\n"
        "}\n"
    )


def save_model(model: MlpModel, path) -> None:
    atomic_write_text(path, format_model(model))


def load_model(path) -> MlpModel:
    try:
        doc = json.loads(_read_text(path))
        cfg_doc = doc["config"]
        cfg = MlpConfig(hidden_sizes=tuple(cfg_doc["hidden_sizes"]), learning_rate=cfg_doc["learning_rate"],
                        epochs=cfg_doc["epochs"], batch_size=cfg_doc.get("batch_size"),
                        init_seed=cfg_doc["init_seed"], l2=cfg_doc["l2"])
        ws = [np.array(layer["weights"], dtype=np.float64).reshape(layer["fan_in"], layer["fan_out"])
              for layer in doc["layers"]]
        bs = [np.array(layer["biases"], dtype=np.float64).reshape(layer["fan_out"]) for layer in doc["layers"]]
        model = MlpModel(ws, bs, cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"{path}: not a model document ({exc})") from None
    if list(model.layer_sizes) != list(doc["layer_sizes"]):
        raise SchemaViolation(f"{path}: layer_sizes disagree with stored layers")
    return model


CURVE_HEADER = "epoch,train_loss,train_acc,eval_loss,eval_acc"


def format_curve(curve: LearningCurve) -> str:
    lines = [CURVE_HEADER]
    lines += [f"{r.epoch},{r.train_loss!r},{r.train_accuracy!r},{r.eval_loss!r},{r.eval_accuracy!r}" for r in curve]
    return "\n".join(lines) + "\n"


def write_curve_csv(curve: LearningCurve, path) -> None:
    atomic_write_text(path, format_curve(curve))
