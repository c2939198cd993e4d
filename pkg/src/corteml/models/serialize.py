"""Versioned text serialization for fitted models.

A model file is the magic line, `field name type value` scalar lines,
and `array name dtype shape...` lines each followed by one line of
space-separated values. Floats are written with repr, so a save/load
round trip reproduces every parameter bit-exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import DataError
from .linear import OlsFit
from .logistic import LogisticModel
from .svm import SvmModel
from .tree import TreeModel, TreeNode

MAGIC = "corteml-model v1"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "bool " + repr(bool(value))
    if isinstance(value, (int, np.integer)):
        return "int " + repr(int(value))
    if isinstance(value, (float, np.floating)):
        return "float " + repr(float(value))
    if isinstance(value, str):
        return "str " + value
    raise DataError(f"unsupported scalar type {type(value)!r}")


def _parse(kind: str, raw: str):
    if kind == "bool":
        return raw == "True"
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "str":
        return raw
    raise DataError(f"unsupported scalar type tag {kind!r}")


def _write_array(fh, name: str, arr: np.ndarray) -> None:
    arr = np.asarray(arr)
    dtype = "int" if arr.dtype.kind in "iu" else "float"
    shape = " ".join(str(d) for d in arr.shape)
    fh.write(f"array {name} {dtype} {shape}\n")
    flat = arr.ravel()
    if dtype == "int":
        fh.write(" ".join(repr(int(v)) for v in flat) + "\n")
    else:
        fh.write(" ".join(repr(float(v)) for v in flat) + "\n")


def _save_fields(fh, model_type: str, scalars: dict, arrays: dict) -> None:
    fh.write(MAGIC + "\n")
    fh.write(f"field type str {model_type}\n")
    for key, value in scalars.items():
        fh.write(f"field {key} {_fmt(value)}\n")
    for key, value in arrays.items():
        _write_array(fh, key, value)


def save_model(path: str | Path, model) -> None:
    with open(Path(path), "w") as fh:
        if isinstance(model, OlsFit):
            _save_fields(
                fh,
                "ols",
                {
                    "intercept": model.intercept,
                    "intercept_se": model.intercept_se,
                    "intercept_t": model.intercept_t,
                    "intercept_p": model.intercept_p,
                    "f_stat": model.f_stat,
                    "f_p": model.f_p,
                    "r_squared": model.r_squared,
                    "mse": model.mse,
                    "mae": model.mae,
                    "n": model.n,
                },
                {
                    "coef": model.coef,
                    "se": model.se,
                    "t": model.t,
                    "p": model.p,
                    "residuals": model.residuals,
                },
            )
        elif isinstance(model, LogisticModel):
            _save_fields(
                fh,
                "logistic",
                {
                    "intercept": model.intercept,
                    "C": model.C,
                    "max_iter": model.max_iter,
                    "converged": model.converged,
                    "n_iter": model.n_iter,
                },
                {"weights": model.weights, "loss_trace": model.loss_trace},
            )
        elif isinstance(model, SvmModel):
            _save_fields(
                fh,
                "svm",
                {
                    "kernel": model.kernel,
                    "C": model.C,
                    "gamma": model.gamma,
                    "degree": model.degree,
                    "bias": model.bias,
                    "n_iter": model.n_iter,
                    "dual_objective": model.dual_objective,
                },
                {
                    "sv_X": model.sv_X,
                    "sv_coef": model.sv_coef,
                    "alpha": model.alpha,
                    "train_y": model.train_y,
                },
            )
        elif isinstance(model, TreeModel):
            nodes = model.nodes
            _save_fields(
                fh,
                "tree",
                {
                    "criterion": model.criterion,
                    "min_samples_leaf": model.min_samples_leaf,
                    "min_samples_split": model.min_samples_split,
                    "max_features": model.max_features,
                    "seed": model.seed,
                    "n_classes": model.n_classes,
                },
                {
                    "feature": np.array([n.feature for n in nodes], dtype=np.int64),
                    "threshold": np.array([n.threshold for n in nodes]),
                    "left": np.array([n.left for n in nodes], dtype=np.int64),
                    "right": np.array([n.right for n in nodes], dtype=np.int64),
                    "counts": np.stack([n.counts for n in nodes]),
                },
            )
        else:
            raise DataError(f"cannot serialize {type(model)!r}")


def _read_model_file(path: Path) -> tuple[dict, dict]:
    scalars: dict = {}
    arrays: dict = {}
    with open(path) as fh:
        if fh.readline().rstrip("\n") != MAGIC:
            raise DataError(f"{path}: not a corteml model file")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            head, _, rest = line.partition(" ")
            if head == "field":
                name, _, typed = rest.partition(" ")
                kind, _, raw = typed.partition(" ")
                scalars[name] = _parse(kind, raw)
            elif head == "array":
                parts = rest.split(" ")
                name, dtype = parts[0], parts[1]
                shape = tuple(int(d) for d in parts[2:])
                values = fh.readline().split()
                if dtype == "int":
                    arr = np.array([int(v) for v in values], dtype=np.int64)
                else:
                    arr = np.array([float(v) for v in values], dtype=np.float64)
                arrays[name] = arr.reshape(shape)
            else:
                raise DataError(f"{path}: unexpected line {line!r}")
    return scalars, arrays


def load_model(path: str | Path):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"model file not found: {path}")
    scalars, arrays = _read_model_file(path)
    model_type = scalars.pop("type", None)
    if model_type == "ols":
        return OlsFit(
            intercept=scalars["intercept"],
            coef=arrays["coef"],
            intercept_se=scalars["intercept_se"],
            se=arrays["se"],
            intercept_t=scalars["intercept_t"],
            t=arrays["t"],
            intercept_p=scalars["intercept_p"],
            p=arrays["p"],
            f_stat=scalars["f_stat"],
            f_p=scalars["f_p"],
            r_squared=scalars["r_squared"],
            mse=scalars["mse"],
            mae=scalars["mae"],
            residuals=arrays["residuals"],
            n=scalars["n"],
        )
    if model_type == "logistic":
        return LogisticModel(
            weights=arrays["weights"],
            intercept=scalars["intercept"],
            C=scalars["C"],
            max_iter=scalars["max_iter"],
            converged=scalars["converged"],
            n_iter=scalars["n_iter"],
            loss_trace=arrays["loss_trace"],
        )
    if model_type == "svm":
        return SvmModel(
            kernel=scalars["kernel"],
            C=scalars["C"],
            gamma=scalars["gamma"],
            degree=scalars["degree"],
            sv_X=arrays["sv_X"],
            sv_coef=arrays["sv_coef"],
            bias=scalars["bias"],
            alpha=arrays["alpha"],
            train_y=arrays["train_y"],
            n_iter=scalars["n_iter"],
            dual_objective=scalars["dual_objective"],
        )
    if model_type == "tree":
        nodes = [
            TreeNode(
                feature=int(arrays["feature"][i]),
                threshold=float(arrays["threshold"][i]),
                left=int(arrays["left"][i]),
                right=int(arrays["right"][i]),
                counts=arrays["counts"][i],
            )
            for i in range(len(arrays["feature"]))
        ]
        return TreeModel(
            criterion=scalars["criterion"],
            min_samples_leaf=scalars["min_samples_leaf"],
            min_samples_split=scalars["min_samples_split"],
            max_features=scalars["max_features"],
            seed=scalars["seed"],
            n_classes=scalars["n_classes"],
            nodes=nodes,
        )
    raise DataError(f"{path}: unknown model type {model_type!r}")
