"""Feature vectors for the classification heads.

The text encoder is an external provider: features arrive from a JSON-lines
or TSV file keyed by posting id, or from one of the synthetic generators
used for tests and demos.
"""

from __future__ import annotations

import json

import numpy as np


def load_features_jsonl(path: str) -> dict[str, np.ndarray]:
    """One object per line: {"posting_id": ..., "features": [...]}.

    The dimension is inferred from the first record and enforced on the rest.
    """
    out: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            vec = np.asarray(rec["features"], dtype=float)
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"line {lineno}: non-finite feature value")
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ValueError(
                    f"line {lineno}: dimension {vec.size} != expected {dim}"
                )
            out[str(rec["posting_id"])] = vec
    return out


def load_features_tsv(path: str) -> dict[str, np.ndarray]:
    """Tab-separated: posting_id followed by the feature values, no header."""
    out: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 2:
                continue
            vec = np.asarray([float(v) for v in parts[1:]], dtype=float)
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ValueError(
                    f"line {lineno}: dimension {vec.size} != expected {dim}"
                )
            out[parts[0]] = vec
    return out


def load_features(path: str) -> dict[str, np.ndarray]:
    if path.endswith(".tsv"):
        return load_features_tsv(path)
    return load_features_jsonl(path)


def save_features_jsonl(features: dict[str, np.ndarray], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pid, vec in features.items():
            fh.write(json.dumps({"posting_id": pid, "features": vec.tolist()}) + "\n")


def synth_ordinal(n: int = 1000, seed: int = 0) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """1-D monotone ordinal task: x ~ U(0,5), label = clamp(floor(x), 0, 4)."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 5.0, size=n)
    y = np.clip(np.floor(x).astype(int), 0, 4)
    ids = [f"synth-ord-{i:05d}" for i in range(n)]
    return x.reshape(-1, 1), y, ids


def synth_binary(n: int = 200, seed: int = 0, margin: float = 1.0) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Linearly separable 2-D binary task with the given margin."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    u = np.array([1.0, 1.0]) / np.sqrt(2)  # separating direction
    v = np.array([1.0, -1.0]) / np.sqrt(2)
    along = (2 * y - 1) * (margin / 2 + np.abs(rng.normal(size=n)))
    across = rng.normal(size=n)
    X = np.outer(along, u) + np.outer(across, v)
    ids = [f"synth-bin-{i:05d}" for i in range(n)]
    return X, y, ids


SYNTHETIC = {"synth-ordinal": synth_ordinal, "synth-binary": synth_binary}
