"""Support vector machine trained with simplified SMO.

Binary subproblems are solved by the simplified sequential minimal
optimization scheme (random second coordinate, analytic pair update,
halt after a fixed number of unchanged passes). Multiclass wraps binary
machines one-vs-rest and predicts the class with the largest margin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["SvmConfig", "SvmModel", "ConvergenceError", "train_svm"]

# Dual coefficients at or below this magnitude are treated as zero when
# collecting support vectors.
ALPHA_CUTOFF = 1e-8


class ConvergenceError(RuntimeError):
    """SMO hit its iteration cap before the pass criterion was met."""

    def __init__(self, iterations: int, kkt_violation: float):
        self.iterations = iterations
        self.kkt_violation = kkt_violation
        super().__init__(
            f"SMO stopped after {iterations} sweeps with max KKT violation "
            f"{kkt_violation:.3e}"
        )


@dataclass(frozen=True)
class SvmConfig:
    """Training hyperparameters.

    gamma None resolves to 1 / (n_features * X.var()) at fit time.
    max_passes counts consecutive full sweeps without an alpha update;
    max_iterations caps total sweeps before giving up.
    """

    c: float = 1.0
    kernel: str = "rbf"
    gamma: float | None = None
    tolerance: float = 1e-3
    max_passes: int = 10
    max_iterations: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if self.kernel not in ("rbf", "linear"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.tolerance <= 0 or self.max_passes < 1 or self.max_iterations < 1:
            raise ValueError("tolerance, max_passes, max_iterations must be positive")


def _kernel_matrix(kind: str, gamma: float, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    if kind == "linear":
        return left @ right.T
    sq = (
        (left ** 2).sum(axis=1)[:, None]
        + (right ** 2).sum(axis=1)[None, :]
        - 2.0 * left @ right.T
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def _kkt_violation(alphas: np.ndarray, y: np.ndarray, decision: np.ndarray, c: float) -> float:
    """Largest per-point violation of the box-constrained optimality conditions."""
    ye = y * (decision - y)
    at_zero = alphas <= ALPHA_CUTOFF
    at_c = alphas >= c - ALPHA_CUTOFF
    interior = ~(at_zero | at_c)
    violation = np.zeros_like(ye)
    violation[at_zero] = np.maximum(0.0, -ye[at_zero])
    violation[at_c] = np.maximum(0.0, ye[at_c])
    violation[interior] = np.abs(ye[interior])
    return float(violation.max()) if len(violation) else 0.0


def _smo(
    kernel: np.ndarray, y: np.ndarray, config: SvmConfig, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Solve one binary dual problem; returns (alphas, bias)."""
    n = len(y)
    alphas = np.zeros(n)
    bias = 0.0
    c, tol = config.c, config.tolerance

    def decision_all() -> np.ndarray:
        return kernel @ (alphas * y) + bias

    passes = 0
    sweeps = 0
    while passes < config.max_passes:
        sweeps += 1
        if sweeps > config.max_iterations:
            raise ConvergenceError(sweeps - 1, _kkt_violation(alphas, y, decision_all(), c))
        changed = 0
        for i in range(n):
            error_i = float(kernel[i] @ (alphas * y)) + bias - y[i]
            if not (
                (y[i] * error_i < -tol and alphas[i] < c)
                or (y[i] * error_i > tol and alphas[i] > 0)
            ):
                continue
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1
            error_j = float(kernel[j] @ (alphas * y)) + bias - y[j]
            alpha_i, alpha_j = alphas[i], alphas[j]
            if y[i] == y[j]:
                low = max(0.0, alpha_i + alpha_j - c)
                high = min(c, alpha_i + alpha_j)
            else:
                low = max(0.0, alpha_j - alpha_i)
                high = min(c, alpha_j - alpha_i + c)
            if high - low < 1e-12:
                continue
            eta = 2.0 * kernel[i, j] - kernel[i, i] - kernel[j, j]
            if eta >= 0:
                continue
            new_j = np.clip(alpha_j - y[j] * (error_i - error_j) / eta, low, high)
            if abs(new_j - alpha_j) < 1e-5:
                continue
            new_i = alpha_i + y[i] * y[j] * (alpha_j - new_j)
            alphas[i], alphas[j] = new_i, new_j
            b1 = (
                bias - error_i
                - y[i] * (new_i - alpha_i) * kernel[i, i]
                - y[j] * (new_j - alpha_j) * kernel[i, j]
            )
            b2 = (
                bias - error_j
                - y[i] * (new_i - alpha_i) * kernel[i, j]
                - y[j] * (new_j - alpha_j) * kernel[j, j]
            )
            if 0 < new_i < c:
                bias = b1
            elif 0 < new_j < c:
                bias = b2
            else:
                bias = 0.5 * (b1 + b2)
            changed += 1
        passes = passes + 1 if changed == 0 else 0
    return alphas, bias


@dataclass(frozen=True)
class BinarySvm:
    """One trained one-vs-rest subproblem (positive class vs the rest)."""

    support_vectors: np.ndarray
    coefficients: np.ndarray  # alpha_i * y_i over support vectors
    bias: float
    support_indices: tuple[int, ...]  # row positions in the training set

    def margins(self, rows: np.ndarray, kind: str, gamma: float) -> np.ndarray:
        if len(self.support_vectors) == 0:
            return np.full(len(rows), self.bias)
        return _kernel_matrix(kind, gamma, rows, self.support_vectors) @ self.coefficients + self.bias


@dataclass(frozen=True)
class SvmModel:
    """One-vs-rest multiclass SVM over numeric features."""

    classes: tuple
    binaries: tuple[BinarySvm, ...]
    kernel: str
    gamma: float
    config: SvmConfig = field(default_factory=SvmConfig)

    def __post_init__(self) -> None:
        if len(self.classes) != len(self.binaries):
            raise ValueError("one binary machine per class required")

    @property
    def n_features(self) -> int:
        return self.binaries[0].support_vectors.shape[1]

    def decision_function(self, rows: np.ndarray) -> np.ndarray:
        """Per-class margins, shape (n_rows, n_classes)."""
        rows = _as_matrix(rows)
        return np.column_stack(
            [b.margins(rows, self.kernel, self.gamma) for b in self.binaries]
        )

    def predict(self, rows: np.ndarray) -> np.ndarray:
        margins = self.decision_function(rows)
        picks = margins.argmax(axis=1)
        return np.asarray(self.classes, dtype=object)[picks]

    def support_rows(self) -> dict:
        """Training row indices of each class's support vectors."""
        return {
            cls: binary.support_indices
            for cls, binary in zip(self.classes, self.binaries)
        }

    def to_json_dict(self) -> dict:
        return {
            "classes": [_plain(c) for c in self.classes],
            "kernel": self.kernel,
            "gamma": self.gamma,
            "config": {
                "c": self.config.c,
                "kernel": self.config.kernel,
                "gamma": self.config.gamma,
                "tolerance": self.config.tolerance,
                "max_passes": self.config.max_passes,
                "max_iterations": self.config.max_iterations,
                "seed": self.config.seed,
            },
            "binaries": [
                {
                    "support_vectors": binary.support_vectors.tolist(),
                    "coefficients": binary.coefficients.tolist(),
                    "bias": binary.bias,
                    "support_indices": list(binary.support_indices),
                }
                for binary in self.binaries
            ],
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "SvmModel":
        config = SvmConfig(**payload["config"])
        binaries = tuple(
            BinarySvm(
                support_vectors=np.asarray(b["support_vectors"], dtype=float),
                coefficients=np.asarray(b["coefficients"], dtype=float),
                bias=float(b["bias"]),
                support_indices=tuple(int(i) for i in b["support_indices"]),
            )
            for b in payload["binaries"]
        )
        return cls(
            classes=tuple(payload["classes"]),
            binaries=binaries,
            kernel=payload["kernel"],
            gamma=float(payload["gamma"]),
            config=config,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "SvmModel":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def _plain(value):
    return value.item() if isinstance(value, np.generic) else value


def _as_matrix(rows: np.ndarray) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if not np.isfinite(arr).all():
        raise ValueError("feature matrix contains non-finite values")
    return arr


def train_svm(features: np.ndarray, labels, config: SvmConfig | None = None) -> SvmModel:
    """Fit a one-vs-rest SVM.

    Needs at least two classes with two rows each and a fully numeric,
    finite feature matrix. Raises ConvergenceError (carrying the last KKT
    violation) if any subproblem exhausts the sweep budget.
    """
    config = config or SvmConfig()
    X = np.asarray(features)
    if X.dtype == object or not np.issubdtype(X.dtype, np.number):
        raise ValueError("features must be numeric")
    X = _as_matrix(X)
    y = np.asarray(labels)
    if len(y) != len(X):
        raise ValueError(f"{len(X)} rows but {len(y)} labels")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("need at least 2 classes")

    gamma = config.gamma
    if gamma is None:
        spread = float(X.var())
        gamma = 1.0 / (X.shape[1] * spread) if spread > 0 else 1.0
    kernel = _kernel_matrix(config.kernel, gamma, X, X)

    rng = np.random.default_rng(config.seed)
    binaries = []
    for cls in classes:
        signs = np.where(y == cls, 1.0, -1.0)
        alphas, bias = _smo(kernel, signs, config, rng)
        keep = np.flatnonzero(alphas > ALPHA_CUTOFF)
        binaries.append(
            BinarySvm(
                support_vectors=X[keep].copy(),
                coefficients=(alphas * signs)[keep],
                bias=bias,
                support_indices=tuple(int(i) for i in keep),
            )
        )
    return SvmModel(
        classes=tuple(_plain(c) for c in classes),
        binaries=tuple(binaries),
        kernel=config.kernel,
        gamma=gamma,
        config=config,
    )
