"""Versioned, lossless model serialization.

The model file is a single JSON document. Every real number is stored as
``float.hex()`` text so loading reproduces predictions bit-for-bit; a
SHA-256 checksum over the canonically-serialized payload detects
corruption or truncation. Public contract (format version 1):

  {"format": "abcboost-model", "version": 1, "checksum": "<sha256 hex>",
   "payload": {
     "algorithm": <tag>, "num_classes": K, "num_features": D,
     "shrinkage": <hex float>, "tree_size": J,
     "iterations": [
       {"base": <int or null>,
        "trees": [{"class": k,
                   "feature": [...],    # -1 marks a leaf
                   "threshold": [...],  # hex floats
                   "left": [...], "right": [...],
                   "value": [...]}]}    # hex floats
     ]}}

Routing rule: x[feature] <= threshold descends left. Node 0 is the root.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .boost import Algorithm, BoostedModel, Iteration
from .errors import ModelIOError
from .tree import RegressionTree

FORMAT_NAME = "abcboost-model"
FORMAT_VERSION = 1


def _hex_list(arr) -> list[str]:
    return [float(v).hex() for v in arr]


def _tree_record(klass: int, tree: RegressionTree) -> dict:
    return {
        "class": int(klass),
        "feature": [int(v) for v in tree.feature],
        "threshold": _hex_list(tree.threshold),
        "left": [int(v) for v in tree.left],
        "right": [int(v) for v in tree.right],
        "value": _hex_list(tree.value),
    }


def _payload(model: BoostedModel) -> dict:
    return {
        "algorithm": model.algorithm.value,
        "num_classes": model.num_classes,
        "num_features": model.num_features,
        "shrinkage": float(model.shrinkage).hex(),
        "tree_size": model.tree_size,
        "iterations": [
            {
                "base": it.base,
                "trees": [_tree_record(k, t) for k, t in zip(it.classes, it.trees)],
            }
            for it in model.iterations
        ],
    }


def _checksum(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def save_model(model: BoostedModel, path) -> None:
    """Write the model atomically (temp file + rename)."""
    payload = _payload(model)
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "checksum": _checksum(payload),
        "payload": payload,
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def _parse_tree(rec: dict) -> tuple[int, RegressionTree]:
    try:
        tree = RegressionTree(
            np.array(rec["feature"], dtype=np.int32),
            np.array([float.fromhex(v) for v in rec["threshold"]], dtype=np.float64),
            np.array(rec["left"], dtype=np.int32),
            np.array(rec["right"], dtype=np.int32),
            np.array([float.fromhex(v) for v in rec["value"]], dtype=np.float64),
        )
        return int(rec["class"]), tree
    except (KeyError, ValueError, TypeError) as exc:
        raise ModelIOError(f"malformed tree record: {exc}") from exc


def load_model(path) -> BoostedModel:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelIOError(f"{path}: not a valid model file (truncated or corrupt): {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelIOError(f"{path}: not an {FORMAT_NAME} file")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise ModelIOError(
            f"{path}: unsupported format version {version!r}; "
            f"this build reads version {FORMAT_VERSION}")
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise ModelIOError(f"{path}: missing payload")
    if doc.get("checksum") != _checksum(payload):
        raise ModelIOError(f"{path}: checksum mismatch (file corrupt)")

    try:
        algo = Algorithm(payload["algorithm"])
        k = int(payload["num_classes"])
        d = int(payload["num_features"])
        nu = float.fromhex(payload["shrinkage"])
        j = int(payload["tree_size"])
        raw_iters = payload["iterations"]
    except (KeyError, ValueError, TypeError) as exc:
        raise ModelIOError(f"{path}: malformed payload: {exc}") from exc

    iterations = []
    for m, rec in enumerate(raw_iters):
        base = rec.get("base")
        pairs = [_parse_tree(t) for t in rec.get("trees", [])]
        classes = tuple(c for c, _ in pairs)
        trees = tuple(t for _, t in pairs)
        if algo.is_abc:
            if base is None or not 0 <= base < k:
                raise ModelIOError(f"{path}: iteration {m}: missing/invalid base class")
            if len(trees) != k - 1 or base in classes:
                raise ModelIOError(
                    f"{path}: iteration {m}: abc iterations need K-1 trees, "
                    f"none keyed by the base class")
        else:
            if base is not None:
                raise ModelIOError(f"{path}: iteration {m}: unexpected base class")
            if len(trees) != k or tuple(sorted(classes)) != tuple(range(k)):
                raise ModelIOError(f"{path}: iteration {m}: expected one tree per class")
        if any(not 0 <= c < k for c in classes):
            raise ModelIOError(f"{path}: iteration {m}: tree keyed by invalid class")
        for _, tree in pairs:
            if tree.feature.max(initial=-1) >= d:
                raise ModelIOError(f"{path}: iteration {m}: split feature out of range")
        iterations.append(Iteration(classes, trees, base))

    return BoostedModel(algo, k, d, nu, j, tuple(iterations))
