"""Discrete-measure energies and logarithmic-capacity estimation.

The mutual energy of a discrete probability measure is the double kernel sum
with the singular diagonal replaced by a regularized self-term (half the
nearest-neighbour distance), the standard transfinite-diameter surrogate for
the continuous energy an atomic measure cannot attain.  Capacity estimates
come from the inverse kernel profile; in the plane that is ``exp(energy)``.

``equilibrium_weights`` maximizes the regularized energy over the
probability simplex by projected gradient ascent (the quadratic form is
concave for these kernels, so the ascent reaches the global maximum), and
``fekete_capacity`` estimates the capacity of a planar candidate set by a
greedy-plus-exchange search for an n-point configuration maximizing the sum
of pairwise log distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .geometry import NodeSet
from .kernels import kernel_k, kernel_k_inverse

__all__ = [
    "DiscreteMeasure",
    "EnergyBreakdown",
    "EnergyReport",
    "EquilibriumResult",
    "mutual_energy",
    "equilibrium_weights",
    "fekete_capacity",
    "project_simplex",
]


class DiscreteMeasure:
    """Support points with nonnegative weights summing to one."""

    def __init__(self, support, weights):
        support = np.atleast_2d(np.asarray(support, dtype=float))
        weights = np.asarray(weights, dtype=float)
        if support.shape[0] != weights.shape[0]:
            raise PreconditionError("support and weight counts differ")
        if support.shape[0] < 1:
            raise PreconditionError("measure needs at least one support point")
        if np.any(weights < -1e-15):
            raise PreconditionError("weights must be nonnegative")
        weights = np.maximum(weights, 0.0)
        total = weights.sum()
        if abs(total - 1.0) > 1e-12:
            raise PreconditionError("weights must sum to 1 within 1e-12")
        if support.shape[0] > 1:
            d2 = _pairwise_dist2(support)
            np.fill_diagonal(d2, np.inf)
            if d2.min() <= 0.0:
                raise PreconditionError("support points must be pairwise distinct")
        self.support = support.copy()
        self.weights = weights.copy()
        self.support.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def uniform(cls, support) -> "DiscreteMeasure":
        support = np.atleast_2d(np.asarray(support, dtype=float))
        n = support.shape[0]
        return cls(support, np.full(n, 1.0 / n))

    @property
    def size(self) -> int:
        return self.support.shape[0]


@dataclass
class EnergyBreakdown:
    """Mutual energy split into its off-diagonal and regularized diagonal
    parts; ``degenerate`` marks a single-atom measure (energy -inf)."""

    value: float
    off_diagonal: float
    diagonal: float
    regularization_share: float
    degenerate: bool = False

    @property
    def regularization_dominant(self) -> bool:
        """Whether the diagonal regularization contributed more than 1%."""
        return self.regularization_share > 0.01


@dataclass
class EnergyReport:
    """Capacity-estimation outcome: the normalized pairwise energy, the
    capacity it implies through the inverse kernel profile, and iteration
    bookkeeping."""

    energy: float
    capacity: float
    iterations: int
    converged: bool
    points: np.ndarray | None = None

    def as_record(self) -> dict:
        return {
            "energy": self.energy,
            "capacity": self.capacity,
            "iterations": self.iterations,
            "converged": self.converged,
            "points": None if self.points is None else self.points.tolist(),
        }


@dataclass
class EquilibriumResult:
    """Weight optimization outcome."""

    measure: DiscreteMeasure
    energy: float
    iterations: int
    converged: bool


def _pairwise_dist2(pts: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sum(diff * diff, axis=-1)


def _kernel_matrix(support: np.ndarray, d: int) -> np.ndarray:
    """Kernel values on pairs, the diagonal regularized at half the
    nearest-neighbour distance."""
    dist = np.sqrt(_pairwise_dist2(support))
    n = dist.shape[0]
    off = dist + np.eye(n)  # placeholder 1 on the diagonal, overwritten below
    a = kernel_k(d - 2, off)
    nearest = np.where(np.eye(n, dtype=bool), np.inf, dist).min(axis=1)
    a[np.eye(n, dtype=bool)] = kernel_k(d - 2, nearest / 2.0)
    return a


def mutual_energy(mu: DiscreteMeasure, d: int) -> EnergyBreakdown:
    """Double kernel sum of a measure against itself.

    The diagonal terms use the kernel at half the nearest-neighbour distance
    of each atom; the breakdown reports how much of the total that
    regularization contributed.  A single-atom measure is degenerate (atoms
    are polar for d >= 2) and returns -inf.
    """
    if d < 2:
        raise PreconditionError("mutual energy needs dimension d >= 2")
    if mu.size == 1:
        return EnergyBreakdown(
            value=-math.inf,
            off_diagonal=0.0,
            diagonal=-math.inf,
            regularization_share=1.0,
            degenerate=True,
        )
    a = _kernel_matrix(mu.support, d)
    w = mu.weights
    quad = w[:, None] * w[None, :] * a
    diag = float(np.trace(quad))
    off = float(quad.sum() - np.trace(quad))
    denom = abs(off) + abs(diag)
    share = abs(diag) / denom if denom > 0 else 0.0
    return EnergyBreakdown(
        value=off + diag,
        off_diagonal=off,
        diagonal=diag,
        regularization_share=share,
    )


def project_simplex(w: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    w = np.asarray(w, dtype=float)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, len(w) + 1)
    cond = u - css / ind > 0
    rho = int(np.count_nonzero(cond))
    theta = css[rho - 1] / rho
    return np.maximum(w - theta, 0.0)


def equilibrium_weights(
    support,
    d: int,
    max_iter: int = 5000,
    tol: float = 1e-12,
) -> EquilibriumResult:
    """Weights maximizing the regularized mutual energy over the simplex.

    Projected gradient ascent from the uniform measure with a fixed step
    ``1 / (2 ||A||)``; the run is deterministic.  ``converged`` is set once
    the energy change between iterates drops below ``tol``.
    """
    support = np.atleast_2d(np.asarray(support, dtype=float))
    if support.shape[0] < 2:
        raise PreconditionError("equilibrium weights need at least 2 points")
    if d < 2:
        raise PreconditionError("equilibrium weights need dimension d >= 2")
    a = _kernel_matrix(support, d)
    n = support.shape[0]
    lip = 2.0 * float(np.linalg.norm(a, 2))
    step = 1.0 / lip if lip > 0 else 1.0
    w = np.full(n, 1.0 / n)
    energy = float(w @ a @ w)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w_next = project_simplex(w + step * 2.0 * (a @ w))
        e_next = float(w_next @ a @ w_next)
        delta = abs(e_next - energy)
        move = float(np.abs(w_next - w).max())
        w, energy = w_next, e_next
        if delta < tol and move < math.sqrt(tol):
            converged = True
            break
    measure = DiscreteMeasure(support, w)
    return EquilibriumResult(
        measure=measure, energy=energy, iterations=iterations, converged=converged
    )


def _candidate_points(s) -> np.ndarray:
    if isinstance(s, NodeSet):
        return s.points()
    return np.atleast_2d(np.asarray(s, dtype=float))


def fekete_capacity(
    s,
    n: int,
    d: int = 2,
    max_passes: int = 200,
) -> EnergyReport:
    """Estimate the logarithmic capacity of a planar candidate set.

    Greedily selects ``n`` points of ``s`` (a NodeSet or an (m, 2) point
    array) maximizing the sum of pairwise log distances, then improves the
    configuration by steepest-ascent point exchanges until no swap helps.
    The capacity estimate is ``exp(mean pairwise log distance)``, i.e. the
    n-point diameter of the selected configuration.
    """
    if d != 2:
        raise PreconditionError("Fekete capacity estimation is planar only (d = 2)")
    if n < 3:
        raise PreconditionError("need at least n = 3 configuration points")
    cand = _candidate_points(s)
    if cand.shape[1] != 2:
        raise PreconditionError("candidate points must be planar")
    m = cand.shape[0]
    if m < n:
        raise PreconditionError(f"only {m} candidate points for n = {n}")

    # greedy: start from the farthest pair, then add the point with the
    # largest log-distance sum to the current selection
    d2 = _pairwise_dist2(cand)
    np.fill_diagonal(d2, -np.inf)
    i0, j0 = np.unravel_index(np.argmax(d2), d2.shape)
    selected = [int(i0), int(j0)]
    with np.errstate(divide="ignore"):
        logd = 0.5 * np.log(np.maximum(d2, 0.0))
    np.fill_diagonal(logd, -np.inf)
    score = logd[:, selected].sum(axis=1)
    score[selected] = -np.inf
    while len(selected) < n:
        nxt = int(np.argmax(score))
        selected.append(nxt)
        score = score + logd[:, nxt]
        score[nxt] = -np.inf

    sel = np.array(selected)
    colsum = logd[:, sel].sum(axis=1)  # per candidate, sum over selected
    pair = logd[np.ix_(sel, sel)]
    rowsum = np.where(np.isfinite(pair), pair, 0.0).sum(axis=1)

    swaps = 0
    converged = False
    for _ in range(max_passes):
        # delta[j, c]: gain from replacing selected j by candidate c; -inf
        # log distances (duplicate positions) can only lose, so any NaN from
        # inf arithmetic means "never pick this swap"
        with np.errstate(invalid="ignore"):
            delta = (colsum[None, :] - logd[:, sel].T) - rowsum[:, None]
        delta = np.where(np.isfinite(delta), delta, -np.inf)
        delta[:, sel] = -np.inf
        j, c = np.unravel_index(np.argmax(delta), delta.shape)
        if not (delta[j, c] > 1e-12):
            converged = True
            break
        sel[j] = c
        swaps += 1
        colsum = logd[:, sel].sum(axis=1)
        pair = logd[np.ix_(sel, sel)]
        rowsum = np.where(np.isfinite(pair), pair, 0.0).sum(axis=1)

    total = 0.5 * float(np.where(np.isfinite(pair), pair, 0.0).sum())
    energy = 2.0 * total / (n * (n - 1))
    capacity = kernel_k_inverse(0, energy)
    return EnergyReport(
        energy=energy,
        capacity=capacity,
        iterations=swaps,
        converged=converged,
        points=cand[sel],
    )
