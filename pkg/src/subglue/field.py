"""Discrete scalar fields on masked grids and their certification tests.

A :class:`ScalarField` holds one value per active node of a
:class:`~subglue.geometry.GridDomain`: a finite float or ``-inf`` (``+inf``
is never allowed).  The discrete Laplacian is the standard 2d-point stencil
``(sum of axis neighbours - 2d * centre) / h**2``; a field is certified
subharmonic when the stencil is ``>= -tol`` at every interior node and
harmonic on a region when ``|stencil| <= tol`` there.

Values at ``-inf`` act as absorbing elements in means and are never counted
as violations of the sub-mean inequality: a ``-inf`` node passes the
subharmonicity test automatically, and interior nodes whose stencil touches a
``-inf`` value are exempted (and counted in the report) since an isolated
``-inf`` carries no mass in the continuum inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import PreconditionError
from .extreal import ExtReal, MINUS_INF, PLUS_INF
from .geometry import GridDomain, NodeSet, as_point

__all__ = [
    "ScalarField",
    "VerificationReport",
    "interpolate",
    "spherical_mean",
    "discrete_laplacian",
    "laplacian_array",
    "is_subharmonic",
    "is_harmonic",
    "boundary_limsup",
    "extremal_constants",
    "mean_inf_constant",
    "default_certification_tol",
]

_WEIGHT_EPS = 1e-12


@dataclass
class VerificationReport:
    """Outcome of one certification or hypothesis check.

    ``worst`` is the magnitude of the largest violation found (0 when the
    check is vacuous); the check fails exactly when ``worst > tol``.
    ``tag`` is the short rule identifier used across the toolkit's reports,
    ``kind`` is ``"hypothesis"`` or ``"conclusion"``.
    """

    name: str
    tag: str
    passed: bool
    worst: float
    tol: float
    where: tuple | None = None
    kind: str = "conclusion"
    details: dict = dataclass_field(default_factory=dict)

    def as_record(self) -> dict:
        rec = {
            "name": self.name,
            "tag": self.tag,
            "pass": bool(self.passed),
            "worst_violation": float(self.worst),
            "tol": float(self.tol),
            "kind": self.kind,
            "location": list(self.where) if self.where is not None else None,
        }
        if self.details:
            rec["details"] = {k: self.details[k] for k in sorted(self.details)}
        return rec

    def __str__(self):
        state = "pass" if self.passed else "FAIL"
        return f"[{state}] {self.name} ({self.tag}): worst={self.worst:.3e} tol={self.tol:.3e}"


def check(name, tag, worst, tol, where=None, kind="conclusion", **details) -> VerificationReport:
    """Build a report from a worst-violation magnitude."""
    worst = float(worst)
    return VerificationReport(
        name=name,
        tag=tag,
        passed=worst <= tol,
        worst=worst,
        tol=float(tol),
        where=where,
        kind=kind,
        details=details,
    )


class ScalarField:
    """Values (finite or -inf) on the active nodes of a grid domain.

    Inactive lattice nodes hold NaN and are never read by the operations
    here.  Instances are immutable; derive new fields with ``with_values``.
    """

    def __init__(self, domain: GridDomain, values: np.ndarray, _validate=True):
        values = np.asarray(values, dtype=float)
        if values.shape != domain.shape:
            raise PreconditionError("value array shape does not match grid")
        vals = np.where(domain.mask, values, np.nan)
        if _validate:
            active_vals = values[domain.mask]
            if np.any(np.isnan(active_vals)):
                raise PreconditionError("NaN value on an active node")
            if np.any(active_vals == np.inf):
                raise PreconditionError("+inf is not an allowed field value")
        self.domain = domain
        self.values = vals
        self.values.setflags(write=False)

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, domain: GridDomain, c: float) -> "ScalarField":
        return cls(domain, np.full(domain.shape, float(c)))

    @classmethod
    def affine(cls, domain: GridDomain, a, b: float) -> "ScalarField":
        """The field ``a . x + b``."""
        a = np.asarray(a, dtype=float)
        vals = np.full(domain.shape, float(b))
        for k, c in enumerate(domain.coordinate_grids()):
            vals = vals + a[k] * c
        return cls(domain, vals)

    @classmethod
    def from_function(cls, domain: GridDomain, fn) -> "ScalarField":
        """Evaluate ``fn`` on the (m, d) active-node coordinates."""
        pts = domain.active_set().points()
        vals = np.full(domain.shape, np.nan)
        vals[domain.mask] = np.asarray(fn(pts), dtype=float)
        return cls(domain, np.where(domain.mask, vals, 0.0))

    # -- basic queries ------------------------------------------------

    @property
    def spacing(self) -> float:
        return self.domain.spacing

    def minus_inf_set(self) -> NodeSet:
        return NodeSet(self.domain, self.values == -np.inf)

    def active_values(self) -> np.ndarray:
        return self.values[self.domain.mask]

    def finite_range(self) -> tuple:
        av = self.active_values()
        finite = av[np.isfinite(av)]
        if finite.size == 0:
            return (math.nan, math.nan)
        return (float(finite.min()), float(finite.max()))

    def at(self, index) -> ExtReal:
        index = tuple(index)
        if not self.domain.mask[index]:
            raise PreconditionError("node is not active")
        return ExtReal(self.values[index])

    # -- derived fields -----------------------------------------------

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.domain, values)

    def restricted(self, mask: np.ndarray | NodeSet) -> "ScalarField":
        """The same values on a smaller active set."""
        if isinstance(mask, NodeSet):
            mask = mask.mask
        mask = np.asarray(mask, dtype=bool)
        if np.any(mask & ~self.domain.mask):
            raise PreconditionError("restriction mask leaves the active set")
        sub = self.domain.with_mask(mask)
        return ScalarField(sub, np.where(mask, self.values, 0.0))

    def affine_image(self, scale: float, offset: float) -> "ScalarField":
        """``scale * v + offset`` with ``0 * (-inf) = 0``."""
        if scale == 0.0:
            vals = np.full(self.domain.shape, float(offset))
        else:
            vals = scale * self.values + offset
        return ScalarField(self.domain, np.where(self.domain.mask, vals, 0.0))

    def equal_on(self, other: "ScalarField", mask: np.ndarray) -> bool:
        """Bit-exact equality of values on the given nodes."""
        a = self.values[mask]
        b = other.values[mask]
        return bool(np.array_equal(a, b))


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------


def interpolate(v: ScalarField, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of ``v`` at an (m, d) array of points.

    Cells with some inactive corners are handled by renormalizing the
    remaining weights over the active corners, which keeps values usable one
    cell away from a mask edge at O(h) cost in accuracy.  A point whose cell
    has no active corner (or that leaves the lattice box) raises.  Any active
    corner at ``-inf`` with positive weight makes the result ``-inf``.
    """
    dom = v.domain
    d = dom.dim
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = pts.shape[0]
    t = (pts - dom.origin.as_array()) / dom.spacing
    pad = 1e-9  # tolerate points that sit on the outer gridline
    lo = -pad
    hi = np.asarray(dom.shape, dtype=float) - 1.0 + pad
    if np.any(t < lo) or np.any(t > hi):
        raise PreconditionError("interpolation point leaves the lattice box")
    base = np.clip(np.floor(t).astype(int), 0, np.asarray(dom.shape) - 2)
    frac = np.clip(t - base, 0.0, 1.0)

    weights = np.ones((m, 1))
    flat_index = np.zeros((m, 1), dtype=np.int64)
    strides = np.array(
        [int(np.prod(dom.shape[k + 1 :], dtype=np.int64)) for k in range(d)]
    )
    for k in range(d):
        w_axis = np.stack([1.0 - frac[:, k], frac[:, k]], axis=1)
        idx_axis = np.stack([base[:, k], base[:, k] + 1], axis=1)
        weights = (weights[:, :, None] * w_axis[:, None, :]).reshape(m, -1)
        flat_index = (
            flat_index[:, :, None] + (idx_axis * strides[k])[:, None, :]
        ).reshape(m, -1)

    corner_active = dom.mask.ravel()[flat_index]
    corner_vals = v.values.ravel()[flat_index]
    w = np.where(corner_active, weights, 0.0)
    total = w.sum(axis=1)
    if np.any(total <= _WEIGHT_EPS):
        raise PreconditionError("interpolation point escapes the active region")
    w = w / total[:, None]
    contributes = w > _WEIGHT_EPS
    neg_inf = np.any(contributes & (corner_vals == -np.inf), axis=1)
    safe_vals = np.where(corner_active & np.isfinite(corner_vals), corner_vals, 0.0)
    out = np.einsum("ij,ij->i", w, safe_vals)
    out[neg_inf] = -np.inf
    return out


# ---------------------------------------------------------------------------
# spherical means
# ---------------------------------------------------------------------------


def sphere_points(center, r: float, samples: int, d: int) -> np.ndarray:
    """Deterministic sample points on the sphere of radius ``r``.

    Uniform angles for d=2; a Fibonacci lattice for d=3.
    """
    c = as_point(center).as_array()
    if d == 2:
        ang = 2.0 * np.pi * np.arange(samples) / samples
        return c + r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if d == 3:
        k = np.arange(samples)
        z = 1.0 - 2.0 * (k + 0.5) / samples
        rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        golden = np.pi * (3.0 - np.sqrt(5.0))
        ang = golden * k
        return c + r * np.stack([rho * np.cos(ang), rho * np.sin(ang), z], axis=1)
    raise PreconditionError("spherical means are implemented for d = 2 and 3")


def spherical_mean(v: ScalarField, x, r: float, samples: int = 256) -> float:
    """Average of ``v`` over ``samples`` interpolated points of the sphere
    of radius ``r`` about ``x`` (surface measure normalized to 1).

    Returns ``-inf`` when any sample hits the field's -inf set.  Raises when
    the sphere leaves interpolation reach of the active nodes.
    """
    if samples < 8:
        raise PreconditionError("need at least 8 sphere samples")
    if not (r > 0):
        raise PreconditionError("sphere radius must be positive")
    pts = sphere_points(x, r, samples, v.domain.dim)
    try:
        vals = interpolate(v, pts)
    except PreconditionError as exc:
        raise PreconditionError(f"sphere exits domain: {exc}") from exc
    if np.any(vals == -np.inf):
        return -math.inf
    return float(vals.mean())


def mean_inf_constant(
    v: ScalarField, shell: NodeSet, r: float, samples: int = 256
) -> float:
    """Infimum over the shell nodes of the spherical mean of ``v`` at radius
    ``r/3`` (the averaging radius is one third of the supplied ``r``)."""
    v.domain.require_same_lattice(shell.domain)
    if shell.is_empty():
        raise PreconditionError("mean-infimum over an empty shell")
    radius = r / 3.0
    if not (radius > 0):
        raise PreconditionError("averaging radius must be positive")
    centers = shell.points()
    d = v.domain.dim
    all_pts = np.concatenate(
        [sphere_points(c, radius, samples, d) for c in centers], axis=0
    )
    try:
        vals = interpolate(v, all_pts)
    except PreconditionError as exc:
        raise PreconditionError(f"sphere exits domain: {exc}") from exc
    vals = vals.reshape(len(centers), samples)
    if np.any(vals == -np.inf):
        return -math.inf
    return float(vals.mean(axis=1).min())


# ---------------------------------------------------------------------------
# discrete Laplacian and certification
# ---------------------------------------------------------------------------


def _neighbour_sum(values: np.ndarray, fill: float = np.nan) -> np.ndarray:
    """Sum of the 2d axis neighbours, ``fill`` used beyond the lattice."""
    d = values.ndim
    total = np.zeros_like(values)
    for k in range(d):
        for step in (1, -1):
            shifted = np.full_like(values, fill)
            sl_src = [slice(None)] * d
            sl_dst = [slice(None)] * d
            if step == 1:
                sl_src[k] = slice(1, None)
                sl_dst[k] = slice(None, -1)
            else:
                sl_src[k] = slice(None, -1)
                sl_dst[k] = slice(1, None)
            shifted[tuple(sl_dst)] = values[tuple(sl_src)]
            total = total + shifted
    return total


def laplacian_array(v: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """Stencil Laplacian on interior nodes.

    Returns ``(lap, interior_mask)``; entries of ``lap`` outside the interior
    are NaN.  Stencils touching a -inf value produce -inf (neighbour) or
    +inf (centre at -inf); callers decide how to treat those.
    """
    dom = v.domain
    interior = dom.interior_mask()
    h2 = dom.spacing**2
    twod = 2.0 * dom.dim
    with np.errstate(invalid="ignore"):
        nb = _neighbour_sum(v.values)
        lap = (nb - twod * v.values) / h2
    lap = np.where(interior, lap, np.nan)
    # centre at -inf: (-inf)*(-2d) would give +inf together with a finite or
    # -inf neighbour sum; pin the convention explicitly.
    centre_minus = interior & (v.values == -np.inf)
    nb_minus = interior & (nb == -np.inf)
    lap[nb_minus & ~centre_minus] = -np.inf
    lap[centre_minus] = np.inf
    return lap, interior


def discrete_laplacian(v: ScalarField, node) -> ExtReal:
    """Stencil Laplacian at one node: ``(sum neighbours - 2d v) / h^2``.

    Requires the node and its 2d axis neighbours to be active.  A -inf
    neighbour gives ``-inf``; a -inf centre gives ``+inf`` (the sub-mean
    inequality holds trivially there).
    """
    node = tuple(int(i) for i in node)
    dom = v.domain
    if not dom.interior_mask()[node]:
        raise PreconditionError("not interior: node or an axis neighbour is inactive")
    centre = v.values[node]
    nb = 0.0
    for k in range(dom.dim):
        for step in (1, -1):
            idx = list(node)
            idx[k] += step
            nb += v.values[tuple(idx)]
    if centre == -np.inf:
        return PLUS_INF
    if nb == -np.inf:
        return MINUS_INF
    return ExtReal((nb - 2.0 * dom.dim * centre) / dom.spacing**2)


def default_certification_tol(v: ScalarField) -> float:
    """Default tolerance separating violations from discretization noise:
    ``1e-8 * (finite value range) + 4 h^2``.  Fields sampled from functions
    with large fourth derivatives need an explicit, larger tolerance."""
    lo, hi = v.finite_range()
    rng = 0.0 if math.isnan(lo) else hi - lo
    return 1e-8 * rng + 4.0 * v.spacing**2


def _worst_index(arr: np.ndarray, where_mask: np.ndarray):
    if not where_mask.any():
        return None
    masked = np.where(where_mask, arr, -np.inf)
    idx = np.unravel_index(np.argmax(masked), arr.shape)
    return tuple(int(i) for i in idx)


def is_subharmonic(
    v: ScalarField,
    tol: float,
    exclude: NodeSet | None = None,
    name: str = "subharmonic",
    tag: str = "subharmonic",
    kind: str = "conclusion",
) -> VerificationReport:
    """Certify the discrete sub-mean inequality: stencil Laplacian >= -tol at
    every interior node.

    Nodes in ``exclude`` are skipped (used to puncture a Green pole).  -inf
    centres pass automatically and stencils touching a -inf neighbour are
    exempted; the report counts them under ``minus_inf_skipped``.
    """
    if not (tol > 0):
        raise PreconditionError("tolerance must be positive")
    lap, interior = laplacian_array(v)
    tested = interior.copy()
    if exclude is not None:
        v.domain.require_same_lattice(exclude.domain)
        tested &= ~exclude.mask
    skipped = tested & ~np.isfinite(lap)
    tested &= np.isfinite(lap)
    violation = np.where(tested, np.maximum(0.0, -lap), 0.0)
    worst = float(violation.max()) if tested.any() else 0.0
    return VerificationReport(
        name=name,
        tag=tag,
        passed=worst <= tol,
        worst=worst,
        tol=float(tol),
        where=_worst_index(violation, tested),
        kind=kind,
        details={
            "tested_nodes": int(tested.sum()),
            "minus_inf_skipped": int(skipped.sum()),
        },
    )


def is_harmonic(
    v: ScalarField,
    region: NodeSet,
    tol: float,
    name: str = "harmonic",
    tag: str = "harmonic",
    kind: str = "conclusion",
) -> VerificationReport:
    """Certify ``|stencil Laplacian| <= tol`` on the region's interior nodes.

    Region nodes that are not interior cannot be evaluated and are skipped;
    an empty evaluable region raises.  A stencil touching -inf counts as an
    infinite violation (harmonic values must be finite).
    """
    if not (tol > 0):
        raise PreconditionError("tolerance must be positive")
    v.domain.require_same_lattice(region.domain)
    lap, interior = laplacian_array(v)
    tested = region.mask & interior
    if not tested.any():
        raise PreconditionError("no interior node to test in the region")
    bad_inf = tested & ~np.isfinite(lap)
    with np.errstate(invalid="ignore"):
        violation = np.where(tested & np.isfinite(lap), np.abs(lap), 0.0)
    violation[bad_inf] = np.inf
    worst = float(violation.max())
    return VerificationReport(
        name=name,
        tag=tag,
        passed=worst <= tol,
        worst=worst,
        tol=float(tol),
        where=_worst_index(violation, tested),
        kind=kind,
        details={"tested_nodes": int(tested.sum())},
    )


# ---------------------------------------------------------------------------
# boundary limsup surrogate and extremal constants
# ---------------------------------------------------------------------------


def neighbour_max(v: ScalarField, from_set: NodeSet) -> np.ndarray:
    """At every lattice node, the max of ``v`` over its Moore neighbours that
    belong to ``from_set`` (-inf where there is none)."""
    v.domain.require_same_lattice(from_set.domain)
    if np.any(from_set.mask & ~v.domain.mask):
        raise PreconditionError("approach set must lie in the field's active nodes")
    src = np.where(from_set.mask, v.values, -np.inf)
    d = v.domain.dim
    out = np.full(v.domain.shape, -np.inf)
    for offset in np.ndindex(*(3,) * d):
        if all(o == 1 for o in offset):
            continue
        sl_src = []
        sl_dst = []
        for k, o in enumerate(offset):
            step = o - 1
            if step == 1:
                sl_src.append(slice(1, None))
                sl_dst.append(slice(None, -1))
            elif step == -1:
                sl_src.append(slice(None, -1))
                sl_dst.append(slice(1, None))
            else:
                sl_src.append(slice(None))
                sl_dst.append(slice(None))
        shifted = np.full(v.domain.shape, -np.inf)
        shifted[tuple(sl_dst)] = src[tuple(sl_src)]
        out = np.maximum(out, shifted)
    return out


def boundary_limsup(v: ScalarField, from_set: NodeSet, at_node) -> ExtReal:
    """Discrete limsup surrogate: max of ``v`` over the Moore neighbours of
    ``at_node`` lying in ``from_set``."""
    at_node = tuple(int(i) for i in at_node)
    nb = neighbour_max(v, from_set)
    d = v.domain.dim
    has_neighbour = False
    for offset in np.ndindex(*(3,) * d):
        if all(o == 1 for o in offset):
            continue
        idx = tuple(at_node[k] + offset[k] - 1 for k in range(d))
        if all(0 <= idx[k] < v.domain.shape[k] for k in range(d)) and from_set.mask[idx]:
            has_neighbour = True
            break
    if not has_neighbour:
        raise PreconditionError("node has no neighbour in the approach set")
    return ExtReal(nb[at_node])


def extremal_constants(v: ScalarField, s: NodeSet) -> tuple[ExtReal, ExtReal]:
    """(inf, sup) of the field over a node set."""
    v.domain.require_same_lattice(s.domain)
    if s.is_empty():
        raise PreconditionError("extremal constants over an empty set")
    if np.any(s.mask & ~v.domain.mask):
        raise PreconditionError("node set must lie in the field's active nodes")
    vals = v.values[s.mask]
    return ExtReal(float(vals.min())), ExtReal(float(vals.max()))
