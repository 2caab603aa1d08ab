"""Training, gradient verification, evaluation and cross-validation.

The optimizer is AdamW with decoupled weight decay (applied to weight
matrices only, never to biases or the coral thresholds) and a linear
learning-rate warm-up. Training is single-threaded and fully deterministic
for a given (data, config, seed): two runs produce bitwise-identical loss
histories.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..labels import NUM_CLASSES
from . import heads

CHECKPOINT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    # lr 7.5e-6 suits encoder fine-tuning; heads trained from scratch over
    # fixed features want a larger default
    learning_rate: float = 1e-3
    batch_size: int = 8
    warmup_steps: int = 200
    weight_decay: float = 0.01
    epochs: int = 20
    seed: int = 0
    hidden: int = 768
    lambda_bin: float = 1.0
    lambda_head2: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self) -> "TrainConfig":
        if self.learning_rate <= 0 or self.batch_size <= 0 or self.epochs < 0:
            raise ValueError("learning_rate, batch_size must be positive; epochs >= 0")
        if self.warmup_steps < 0 or self.weight_decay < 0:
            raise ValueError("warmup_steps and weight_decay must be non-negative")
        return self


def warmup_lr(step: int, base_lr: float, warmup_steps: int) -> float:
    """Effective learning rate at (0-based) step: linear ramp, then flat."""
    if warmup_steps <= 0 or step >= warmup_steps:
        return base_lr
    return base_lr * step / warmup_steps


@dataclass
class TrainedModel:
    kind: str
    d: int
    hidden: int
    params: dict[str, np.ndarray]
    loss_history: list[float] = field(default_factory=list)
    best_epoch: Optional[int] = None

    def predict(self, X) -> dict[str, np.ndarray]:
        return heads.predict(self.kind, self.params, X)


def _adamw_step(params, grads, state, lr, config: TrainConfig):
    state["t"] += 1
    t = state["t"]
    for name in sorted(params):
        g = grads[name]
        m = state["m"][name] = config.beta1 * state["m"][name] + (1 - config.beta1) * g
        v = state["v"][name] = config.beta2 * state["v"][name] + (1 - config.beta2) * g * g
        mhat = m / (1 - config.beta1**t)
        vhat = v / (1 - config.beta2**t)
        params[name] = params[name] - lr * mhat / (np.sqrt(vhat) + config.eps)
        if config.weight_decay and name.endswith(heads.DECAYED_SUFFIXES):
            params[name] = params[name] - lr * config.weight_decay * params[name]


def train(
    X: np.ndarray,
    y: np.ndarray,
    kind: str,
    config: TrainConfig,
    init: Optional[dict[str, np.ndarray]] = None,
    dev: Optional[tuple[np.ndarray, np.ndarray]] = None,
    early_stop_head: Optional[str] = None,
) -> TrainedModel:
    """Mini-batch AdamW training; returns the model plus per-epoch mean loss.

    With a dev set and early_stop_head, the parameters from the epoch with
    the best dev F1-macro on that head are kept (ties go to the earlier
    epoch). A NaN/inf loss aborts immediately with the offending step and
    batch.
    """
    config.validate()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    d = X.shape[1]
    params = (
        {k: v.copy() for k, v in init.items()}
        if init is not None
        else heads.init_params(kind, d, config.hidden, config.seed)
    )
    state = {
        "t": 0,
        "m": {k: np.zeros_like(v) for k, v in params.items()},
        "v": {k: np.zeros_like(v) for k, v in params.items()},
    }
    order_rng = np.random.default_rng(config.seed)
    history = []
    step = 0
    best_f1 = -1.0
    best_params = None
    best_epoch = None
    for epoch in range(config.epochs):
        perm = order_rng.permutation(X.shape[0])
        epoch_losses = []
        for start in range(0, X.shape[0], config.batch_size):
            idx = perm[start : start + config.batch_size]
            try:
                loss, grads = heads.loss_and_grad(
                    kind, params, X[idx], y[idx], config.lambda_bin, config.lambda_head2
                )
            except FloatingPointError as exc:
                raise FloatingPointError(
                    f"{exc} at step {step} (epoch {epoch}, batch starting {start})"
                ) from None
            lr = warmup_lr(step, config.learning_rate, config.warmup_steps)
            _adamw_step(params, grads, state, lr, config)
            epoch_losses.append(loss)
            step += 1
        history.append(float(np.mean(epoch_losses)))
        if dev is not None and early_stop_head is not None and len(dev[0]) > 0:
            snapshot = TrainedModel(kind=kind, d=d, hidden=config.hidden, params=params)
            _, dev_f1 = evaluate(snapshot, dev[0], dev[1], head=early_stop_head)
            if dev_f1 > best_f1:
                best_f1 = dev_f1
                best_params = {k: v.copy() for k, v in params.items()}
                best_epoch = epoch
    if best_params is not None:
        params = best_params
    return TrainedModel(
        kind=kind,
        d=d,
        hidden=config.hidden,
        params=params,
        loss_history=history,
        best_epoch=best_epoch,
    )


def grad_check(kind: str, d: int = 8, hidden: int = 8, seed: int = 0, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Errors are relative to max(1, |analytic|, |numeric|), so near-zero
    gradients compare on an absolute scale.
    """
    rng = np.random.default_rng(seed)
    params = heads.init_params(kind, d, hidden, seed)
    X = rng.normal(size=(3, d))
    y = rng.integers(0, NUM_CLASSES, size=3)

    def total_loss():
        return heads.loss_and_grad(kind, params, X, y)[0]

    _, grads = heads.loss_and_grad(kind, params, X, y)
    worst = 0.0
    for name in sorted(params):
        flat = params[name].reshape(-1)
        gflat = grads[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = total_loss()
            flat[i] = orig - h
            down = total_loss()
            flat[i] = orig
            numeric = (up - down) / (2 * h)
            err = abs(numeric - gflat[i]) / max(1.0, abs(numeric), abs(gflat[i]))
            worst = max(worst, err)
    return worst


def f1_macro(gold: np.ndarray, pred: np.ndarray) -> float:
    """Unweighted mean of per-class F1 over classes present in the gold."""
    gold = np.asarray(gold)
    pred = np.asarray(pred)
    scores = []
    for cls in sorted(set(gold.tolist())):
        tp = int(np.sum((pred == cls) & (gold == cls)))
        fp = int(np.sum((pred == cls) & (gold != cls)))
        fn = int(np.sum((pred != cls) & (gold == cls)))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


def evaluate(model: TrainedModel, X, y, head: Optional[str] = None) -> tuple[float, float]:
    """(accuracy, F1-macro) for one head of the model.

    head defaults to 'binary' for bin models and 'ordinal' otherwise; for
    dual models pass the head explicitly. Binary heads are scored against
    binarized gold.
    """
    preds = model.predict(X)
    if head is None:
        head = "binary" if model.kind == "bin" else "ordinal"
    if head not in preds:
        raise ValueError(f"model kind {model.kind!r} has no {head!r} head")
    y = np.asarray(y, dtype=int)
    gold = (y > 0).astype(int) if head == "binary" else y
    pred = preds[head]
    accuracy = float(np.mean(pred == gold))
    return accuracy, f1_macro(gold, pred)


@dataclass
class EvalResult:
    head: str
    fold_accuracy: list[float]
    fold_f1_macro: list[float]

    @property
    def accuracy_mean(self) -> float:
        return float(np.mean(self.fold_accuracy))

    @property
    def accuracy_std(self) -> float:
        return float(np.std(self.fold_accuracy, ddof=1)) if len(self.fold_accuracy) > 1 else 0.0

    @property
    def f1_macro_mean(self) -> float:
        return float(np.mean(self.fold_f1_macro))

    @property
    def f1_macro_std(self) -> float:
        return float(np.std(self.fold_f1_macro, ddof=1)) if len(self.fold_f1_macro) > 1 else 0.0


def _heads_of(kind: str) -> list[str]:
    return {
        "bin": ["binary"],
        "multi": ["ordinal"],
        "coral": ["ordinal"],
        "bin_multi": ["binary", "ordinal"],
        "bin_coral": ["binary", "ordinal"],
    }[kind]


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    ids: list[str],
    kind: str,
    config: TrainConfig,
    plan,
) -> dict[str, EvalResult]:
    """Train/evaluate per fold of the plan; early-stops on dev F1-macro.

    The epoch with the best dev F1 on the primary head wins (ties go to the
    earlier epoch). Returns one EvalResult per head, mirroring the dual-head
    report rows.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    pos = {pid: i for i, pid in enumerate(ids)}
    results = {h: EvalResult(head=h, fold_accuracy=[], fold_f1_macro=[]) for h in _heads_of(kind)}
    primary_head = _heads_of(kind)[0]
    for fold in range(plan.k):
        train_ids, dev_ids, test_ids = plan.split(fold)
        tr = [pos[p] for p in train_ids]
        dv = [pos[p] for p in dev_ids]
        te = [pos[p] for p in test_ids]
        try:
            model = train(
                X[tr],
                y[tr],
                kind,
                config,
                dev=(X[dv], y[dv]),
                early_stop_head=primary_head,
            )
        except Exception as exc:
            raise RuntimeError(f"training failed on fold {fold}: {exc}") from exc
        for h in results:
            acc, f1 = evaluate(model, X[te], y[te], head=h)
            results[h].fold_accuracy.append(acc)
            results[h].fold_f1_macro.append(f1)
    return results


def cv_report_tsv(results_by_model: dict[str, dict[str, EvalResult]]) -> str:
    """TSV table with one row per (model, head)."""
    lines = ["model\thead\taccuracy_mean\taccuracy_std\tf1_macro_mean\tf1_macro_std"]
    for model_name, per_head in results_by_model.items():
        for head, res in per_head.items():
            lines.append(
                f"{model_name}\t{head}\t{res.accuracy_mean:.4f}\t{res.accuracy_std:.4f}"
                f"\t{res.f1_macro_mean:.4f}\t{res.f1_macro_std:.4f}"
            )
    return "\n".join(lines) + "\n"


# -- checkpoints ------------------------------------------------------------

def save_checkpoint(model: TrainedModel, path: str) -> None:
    doc = {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "kind": model.kind,
        "d": model.d,
        "hidden": model.hidden,
        "params": {k: v.tolist() for k, v in model.params.items()},
        "loss_history": model.loss_history,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_checkpoint(path: str) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != CHECKPOINT_SCHEMA_VERSION:
        raise ValueError(f"unsupported checkpoint schema {doc.get('schema_version')}")
    return TrainedModel(
        kind=doc["kind"],
        d=doc["d"],
        hidden=doc["hidden"],
        params={k: np.asarray(v, dtype=float) for k, v in doc["params"].items()},
        loss_history=list(doc.get("loss_history", [])),
    )
