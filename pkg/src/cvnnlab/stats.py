"""Excess risk and Spearman rank-order correlation for training traces.

The correlation protocol ranks both series with midrank tie handling and
takes the Pearson correlation of the ranks.  Two-sided p-values come from
full permutation enumeration for short series and from the Student-t
approximation t = r sqrt((n-2)/(1-r^2)) with n-2 degrees of freedom
otherwise.  Full enumeration is the exact small-sample method; it is
feasible up to n = EXACT_ENUM_MAX (n! permutations) and the t approximation
takes over beyond that.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr

__all__ = [
    "EXACT_ENUM_MAX",
    "ConstantInputError",
    "SpearmanResult",
    "TrainingTrace",
    "average_ranks",
    "pearson",
    "spearman",
    "excess_risk",
    "correlate_trace",
]

EXACT_ENUM_MAX = 10  # n! permutations are enumerated up to here


class ConstantInputError(ValueError):
    """A sequence with zero rank variance has no defined correlation."""


def average_ranks(x) -> np.ndarray:
    """1-based ranks with ties replaced by their average (midranks)."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.shape[0], dtype=float)
    sx = x[order]
    i = 0
    while i < len(sx):
        j = i
        while j + 1 < len(sx) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(np.sum(xc**2)) * float(np.sum(yc**2)))
    if denom == 0.0:
        raise ConstantInputError("zero variance input")
    return float(np.sum(xc * yc) / denom)


@dataclass(frozen=True)
class SpearmanResult:
    scc: float
    p: float
    method: str  # "exact" | "t"


def _t_approx_p(rho: float, n: int) -> float:
    if abs(rho) >= 1.0:
        # degenerate perfect correlation: the t statistic diverges
        return float(np.nextafter(0.0, 1.0))
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    # two-sided tail of Student-t with n-2 degrees of freedom
    return float(2.0 * stdtr(n - 2, -abs(t)))


def _exact_permutation_p(rx: np.ndarray, ry: np.ndarray, rho_obs: float) -> float:
    """Two-sided permutation p by full enumeration of y-rank orderings.

    Pearson on ranks is monotone in sum(rx * permuted(ry)) because rank
    means and variances are permutation-invariant, so only that statistic
    is enumerated.
    """
    n = len(rx)
    xc = rx - rx.mean()
    yc = ry - ry.mean()
    denom = math.sqrt(float(np.sum(xc**2)) * float(np.sum(yc**2)))
    target = abs(rho_obs) * denom * (1.0 - 1e-12)
    hits = 0
    total = 0
    chunk = []
    for perm in itertools.permutations(yc):
        chunk.append(perm)
        if len(chunk) == 40320:  # process in blocks
            dots = np.abs(np.asarray(chunk) @ xc)
            hits += int(np.count_nonzero(dots >= target))
            total += len(chunk)
            chunk = []
    if chunk:
        dots = np.abs(np.asarray(chunk) @ xc)
        hits += int(np.count_nonzero(dots >= target))
        total += len(chunk)
    assert total == math.factorial(n)
    return hits / total


def spearman(x, y, p_method: str = "auto") -> SpearmanResult:
    """Spearman rank correlation with a two-sided p-value.

    ``p_method``: "exact" (full permutation enumeration), "t"
    (Student-t approximation), or "auto" (exact up to EXACT_ENUM_MAX).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length 1-D sequences")
    n = x.shape[0]
    if n < 3:
        raise ValueError("need at least 3 observations")
    rx = average_ranks(x)
    ry = average_ranks(y)
    try:
        rho = pearson(rx, ry)
    except ConstantInputError:
        raise ConstantInputError(
            "constant sequence: correlation undefined"
        ) from None
    if p_method == "auto":
        p_method = "exact" if n <= EXACT_ENUM_MAX else "t"
    if p_method == "exact":
        if n > EXACT_ENUM_MAX:
            raise ValueError(
                f"exact enumeration of {n}! permutations is not feasible"
            )
        p = _exact_permutation_p(rx, ry, rho)
    elif p_method == "t":
        p = _t_approx_p(rho, n)
    else:
        raise ValueError(f"unknown p_method {p_method!r}")
    return SpearmanResult(scc=rho, p=p, method=p_method)


def excess_risk(train_acc: float, test_acc: float) -> float:
    """Generalization gap: training accuracy minus test accuracy.

    With training error near zero this collapses to the test error.
    """
    if not 0.0 <= train_acc <= 1.0 or not 0.0 <= test_acc <= 1.0:
        raise ValueError("accuracies must lie in [0, 1]")
    return train_acc - test_acc


@dataclass
class TrainingTrace:
    """Epoch-indexed series a training run emits; arrays share one length.

    ``r_a`` entries are NaN where a row was recorded in sn-product-only
    mode; ``layer_norms`` holds one list of per-layer spectral norms per
    epoch (possibly empty).
    """

    epoch: np.ndarray
    train_loss: np.ndarray
    train_acc: np.ndarray
    test_acc: np.ndarray
    excess_risk: np.ndarray
    sn_product: np.ndarray
    r_a: np.ndarray
    layer_norms: list

    def __post_init__(self):
        n = len(self.epoch)
        for name in ("train_loss", "train_acc", "test_acc", "excess_risk", "sn_product", "r_a"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} length mismatch")
        if len(self.layer_norms) != n:
            raise ValueError("column layer_norms length mismatch")
        if n > 1 and np.any(np.diff(self.epoch) <= 0):
            raise ValueError("epochs must be strictly increasing")


def correlate_trace(trace: TrainingTrace, p_method: str = "auto") -> SpearmanResult:
    """Spearman correlation of the spectral-norm product against excess risk."""
    mask = np.isfinite(trace.sn_product)
    sn = trace.sn_product[mask]
    er = trace.excess_risk[mask]
    if sn.shape[0] < 3:
        raise ValueError("need at least 3 epochs with spectral data")
    return spearman(sn, er, p_method=p_method)
