"""Executable checks of the covering machinery: Maurey sparsification and
the linear-map cover construction.

Maurey sparsification replaces a convex combination f = sum_i alpha_i g_i
(alpha = sum_i alpha_i > 0) by a k-atom average (alpha/k) sum_i k_i g_i with

    E ||f - approx||^2 <= (alpha^2 / k) max_i ||g_i||^2

under the sampling scheme P(atom = g_i) = alpha_i / alpha.  The existence
statement is probabilistic, so the implementation draws ``trials``
independent samplings and keeps the best; by Markov each trial lands within
twice the expectation bound with probability >= 1/2, so 64 trials fail with
probability <= 2^-64.  Asserting the factor-2 ceiling is therefore sound;
hitting the expectation itself is reported but never asserted.

The cover check instantiates the construction behind the linear covering
bound: targets ZA with ||A||_{2,1} <= a are decomposed over the 4dm signed
basis directions built from the column-normalized data matrix, then
sparsified with k = ceil(a^2 ||Z||^2 m^(2/r) / eps^2) atoms.  Coverage is
verified pointwise on sampled targets (the full cover has N^k points and is
never enumerated); the count of distinct sparsified points stands in for
the cover cardinality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clinalg import frobenius_norm, pq_norm
from .spectral import covering_bound_linear

__all__ = [
    "MaureyInstance",
    "MaureyResult",
    "maurey_sparsify",
    "maurey_expectation_bound",
    "signed_basis",
    "CoverReport",
    "cover_target",
    "cover_check",
    "cover_report_to_text",
]


@dataclass(frozen=True)
class MaureyInstance:
    """Convex-combination target: elements g_i, nonnegative weights, budget k."""

    elements: tuple
    weights: np.ndarray
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or weights.shape[0] != len(self.elements):
            raise ValueError("one weight per element required")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and nonnegative")
        if weights.sum() <= 0:
            raise ValueError("total weight must be positive")
        shapes = {np.asarray(g).shape for g in self.elements}
        if len(shapes) != 1:
            raise ValueError("all elements must share one shape")
        object.__setattr__(self, "weights", weights)

    @property
    def alpha(self) -> float:
        return float(self.weights.sum())

    def target(self) -> np.ndarray:
        stack = np.stack([np.asarray(g, dtype=np.complex128) for g in self.elements])
        return np.tensordot(self.weights, stack, axes=1)


@dataclass(frozen=True)
class MaureyResult:
    counts: np.ndarray  # k_i, sum = k
    approximant: np.ndarray
    error: float


def maurey_expectation_bound(inst: MaureyInstance) -> float:
    """The expectation ceiling (alpha^2 / k) max_i ||g_i||^2."""
    worst = max(frobenius_norm(np.atleast_2d(np.asarray(g))) for g in inst.elements)
    return inst.alpha**2 / inst.k * worst**2


def maurey_sparsify(inst: MaureyInstance, trials: int, seed: int = 0) -> MaureyResult:
    """Best-of-``trials`` random sparsification of the instance target."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    alpha = inst.alpha
    probs = inst.weights / alpha
    stack = np.stack([np.asarray(g, dtype=np.complex128) for g in inst.elements])
    flat = stack.reshape(len(inst.elements), -1)
    f = (inst.weights @ flat).reshape(stack.shape[1:])
    counts = rng.multinomial(inst.k, probs, size=trials)  # (trials, N)
    # counts/k first: the all-mass-on-one-atom case then reproduces alpha g_i
    # exactly instead of picking up (alpha/k)*k roundoff
    approx = alpha * ((counts / inst.k) @ flat)
    errors = np.sqrt(np.sum(np.abs(approx - f.ravel()) ** 2, axis=1))
    best = int(np.argmin(errors))
    return MaureyResult(
        counts=counts[best],
        approximant=approx[best].reshape(stack.shape[1:]),
        error=float(errors[best]),
    )


def signed_basis(y, m: int):
    """The 4dm signed basis directions built from a column-normalized matrix.

    For each column index i of ``y`` and output index j < m the basis holds
    +-(y e_i) e_j^T and +-(i * y e_i) e_j^T, ordered real-part block first,
    each block sign-major then (i, j) row-major.  With unit 2-norm columns
    every element has unit norm.
    """
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 2:
        raise ValueError("y must be a matrix")
    col_norms = np.sqrt(np.sum(np.abs(y) ** 2, axis=0))
    if np.any(np.abs(col_norms - 1.0) > 1e-9):
        raise ValueError("columns of y must have unit norm")
    n, d = y.shape
    basis = []
    for unit in (1.0, 1.0j):
        for sign in (1.0, -1.0):
            for i in range(d):
                col = sign * unit * y[:, i]
                for j in range(m):
                    v = np.zeros((n, m), dtype=np.complex128)
                    v[:, j] = col
                    basis.append(v)
    return basis


def _decomposition_weights(s, d: int, m: int) -> np.ndarray:
    """Weights over :func:`signed_basis` order reproducing Y S exactly."""
    re, im = s.real, s.imag
    blocks = [
        np.maximum(re, 0.0),  # +real directions
        np.maximum(-re, 0.0),  # -real directions
        np.maximum(im, 0.0),  # +imag directions
        np.maximum(-im, 0.0),  # -imag directions
    ]
    return np.concatenate([b.reshape(d * m) for b in blocks])


@dataclass(frozen=True)
class CoverReport:
    d: int
    m: int
    n: int
    a: float
    eps: float
    r: float
    trials: int
    samples: int
    achieved_error: float  # worst best-trial error across samples
    theoretical_error: float  # sqrt of the Maurey expectation ceiling
    frac_within_eps: float
    distinct_cover_points_used: int
    bound_ln_cover: float
    k: int


def cover_target(z, a_mat, k: int, trials: int, seed: int = 0, alpha_cap: float | None = None):
    """Decompose ZA over the signed basis and sparsify one target.

    Returns (error, counts).  A zero weight matrix is covered exactly by the
    zero cover point (all counts zero).  Raises AssertionError when the
    decomposition fails to reproduce ZA or the mass inequality
    ||S||_1 <= alpha_cap is violated.
    """
    z = np.asarray(z, dtype=np.complex128)
    a_mat = np.asarray(a_mat, dtype=np.complex128)
    n, d = z.shape
    d2, m = a_mat.shape
    if d2 != d:
        raise ValueError("A must have one row per column of Z")
    col_norms = np.sqrt(np.sum(np.abs(z) ** 2, axis=0))
    if np.any(col_norms == 0.0):
        raise ValueError("z must have no zero column")
    y = z / col_norms
    basis = signed_basis(y, m)
    za = z @ a_mat
    s = col_norms[:, None] * a_mat  # Hadamard scaling: ZA = Y S
    if alpha_cap is not None and pq_norm(s, 1, 1) > alpha_cap * (1.0 + 1e-9):
        raise AssertionError("mass inequality ||S||_1 <= alpha violated")
    weights = _decomposition_weights(s, d, m)
    flat_basis = np.stack([b.reshape(-1) for b in basis])
    recon = (weights @ flat_basis).reshape(n, m)
    if frobenius_norm(recon - za) > 1e-10 * max(1.0, frobenius_norm(za)):
        raise AssertionError("basis decomposition does not reproduce ZA")
    if weights.sum() == 0.0:
        return 0.0, np.zeros(len(basis), dtype=int)
    inst = MaureyInstance(elements=tuple(basis), weights=weights, k=k)
    res = maurey_sparsify(inst, trials=trials, seed=seed)
    return res.error, res.counts


def cover_check(
    z,
    a: float,
    eps: float,
    n_samples: int,
    trials: int,
    seed: int = 0,
    m: int | None = None,
    r: float = math.inf,
) -> CoverReport:
    """Pointwise verification that sparsified combinations cover {ZA}.

    Draws ``n_samples`` random A of shape (d, m) with ||A||_{2,1} = a,
    decomposes each ZA over the signed basis, sparsifies with the
    prescribed k, and records coverage.  Asserts the Markov-slack ceiling:
    every best-trial error is at most sqrt(2) * eps.
    """
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim != 2 or not np.any(z):
        raise ValueError("z must be a nonzero matrix")
    if a <= 0 or eps <= 0:
        raise ValueError("a and eps must be positive")
    n, d = z.shape
    if m is None:
        m = d
    if m < 1:
        raise ValueError("m must be positive")
    col_norms = np.sqrt(np.sum(np.abs(z) ** 2, axis=0))
    if np.any(col_norms == 0.0):
        raise ValueError("z must have no zero column")
    b_norm = frobenius_norm(z)
    m_pow = 1.0 if math.isinf(r) else float(m) ** (2.0 / r)
    k = int(math.ceil(a * a * b_norm * b_norm * m_pow / (eps * eps)))
    alpha_proof = a * (1.0 if math.isinf(r) else float(m) ** (1.0 / r)) * b_norm

    rng = np.random.default_rng(seed)
    worst = 0.0
    within = 0
    distinct: set = set()
    for sample in range(n_samples):
        raw = rng.standard_normal((d, m)) + 1j * rng.standard_normal((d, m))
        a_mat = raw * (a / pq_norm(raw, 2, 1))
        error, counts = cover_target(
            z, a_mat, k, trials=trials, seed=seed + 1 + sample, alpha_cap=alpha_proof
        )
        worst = max(worst, error)
        if error <= eps:
            within += 1
        distinct.add(tuple(int(c) for c in counts))
    if worst > math.sqrt(2.0) * eps:
        raise AssertionError(
            f"worst error {worst:.6g} exceeds sqrt(2) * eps = {math.sqrt(2.0) * eps:.6g}"
        )
    return CoverReport(
        d=d,
        m=m,
        n=n,
        a=a,
        eps=eps,
        r=r,
        trials=trials,
        samples=n_samples,
        achieved_error=worst,
        theoretical_error=alpha_proof / math.sqrt(k),
        frac_within_eps=within / n_samples,
        distinct_cover_points_used=len(distinct),
        bound_ln_cover=covering_bound_linear(a, b_norm, m, r, eps, d),
        k=k,
    )


def cover_report_to_text(report: CoverReport) -> str:
    def f17(x):
        return format(float(x), ".17g")

    lines = [
        "format = cover-report-v1",
        f"d = {report.d}",
        f"m = {report.m}",
        f"n = {report.n}",
        f"a = {f17(report.a)}",
        f"eps = {f17(report.eps)}",
        f"r = {'inf' if math.isinf(report.r) else f17(report.r)}",
        f"k = {report.k}",
        f"trials = {report.trials}",
        f"samples = {report.samples}",
        f"achieved_error = {f17(report.achieved_error)}",
        f"theoretical_error = {f17(report.theoretical_error)}",
        f"frac_within_eps = {f17(report.frac_within_eps)}",
        f"distinct_cover_points_used = {report.distinct_cover_points_used}",
        f"bound_ln_cover = {f17(report.bound_ln_cover)}",
    ]
    return "\n".join(lines) + "\n"
