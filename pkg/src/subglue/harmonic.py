"""Discrete Dirichlet solves, Green's functions and harmonic continuation.

The workhorse is a red-black SOR sweep over the unknown nodes of a masked
grid; the colouring makes parallel updates race-free and the iteration
deterministic.  The Green's function of a domain D with pole o is obtained by
solving the discrete Poisson problem with a normalized point source at the
pole node and zero boundary values, which makes the result discretely
harmonic away from the pole (up to the solver residual) and reproduces the
``-K_{d-2}(. , o) + O(1)`` profile of the continuum object near the pole.
The pole node itself carries the solve's large finite value and stands in
for +inf; it is excluded from every certification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, PreconditionError
from .field import ScalarField, _neighbour_sum
from .geometry import GridDomain, NodeSet, Point, as_point

__all__ = [
    "SolverParams",
    "GreenField",
    "ContinuationResult",
    "solve_dirichlet",
    "green_function",
    "green_min_constant",
    "harmonic_layer_continuation",
]


@dataclass(frozen=True)
class SolverParams:
    """Successive over-relaxation settings.

    ``omega=None`` picks ``2 / (1 + sin(pi h / L))`` per solve, with L the
    largest extent of the unknown region's bounding box.  ``rtol`` scales the
    stencil-residual target by the data range.
    """

    omega: float | None = None
    max_iter: int = 1_000_000
    rtol: float = 1e-10

    def __post_init__(self):
        if self.omega is not None and not (1.0 < self.omega < 2.0):
            raise PreconditionError("relaxation factor must lie in (1, 2)")
        if self.max_iter < 1:
            raise PreconditionError("max_iter must be positive")
        if not (self.rtol > 0):
            raise PreconditionError("residual tolerance must be positive")


def _auto_omega(unknown: np.ndarray, h: float) -> float:
    idx = np.argwhere(unknown)
    extent = (idx.max(axis=0) - idx.min(axis=0) + 1).max() * h
    extent = max(extent, 2.0 * h)
    return 2.0 / (1.0 + math.sin(math.pi * h / extent))


def _sor_solve(
    values: np.ndarray,
    unknown: np.ndarray,
    h: float,
    params: SolverParams,
    source: np.ndarray | None = None,
):
    """Red-black SOR for ``lap u = source`` on the unknown nodes.

    ``values`` enters with the fixed data preset and an initial guess on the
    unknowns; it is modified in place.  Returns ``(residual, sweeps)`` where
    the residual is ``max |sum(neighbours) - 2d u - h^2 source|`` over the
    unknowns.
    """
    d = values.ndim
    twod = 2.0 * d
    h2src = np.zeros_like(values) if source is None else (h * h) * source
    scale = 0.0
    fixed = ~unknown
    if fixed.any():
        fvals = values[fixed]
        fvals = fvals[np.isfinite(fvals)]
        if fvals.size:
            scale = float(fvals.max() - fvals.min())
    if source is not None:
        scale = max(scale, float(np.abs(h2src).max()))
    target = params.rtol * scale
    omega = params.omega if params.omega is not None else _auto_omega(unknown, h)

    parity = np.zeros(values.shape, dtype=int)
    for k in range(d):
        sh = [1] * d
        sh[k] = values.shape[k]
        parity = parity + np.arange(values.shape[k]).reshape(sh)
    red = unknown & (parity % 2 == 0)
    black = unknown & (parity % 2 == 1)

    residual = math.inf
    for sweep in range(1, params.max_iter + 1):
        for colour in (red, black):
            nb = _neighbour_sum(values, fill=0.0)
            gs = (nb - h2src) / twod
            values[colour] = (1.0 - omega) * values[colour] + omega * gs[colour]
        nb = _neighbour_sum(values, fill=0.0)
        res_arr = nb - twod * values - h2src
        residual = float(np.abs(res_arr[unknown]).max()) if unknown.any() else 0.0
        if residual <= target:
            return residual, sweep
    raise ConvergenceError(
        f"SOR did not reach residual {target:g} within {params.max_iter} sweeps "
        f"(final residual {residual:g})",
        residual=residual,
        iterations=params.max_iter,
    )


def _check_unknown_closed(mask_active: np.ndarray, unknown: np.ndarray):
    """Every unknown node must have all 2d axis neighbours active."""
    interior = unknown.copy()
    d = mask_active.ndim
    for k in range(d):
        for step in (1, -1):
            shifted = np.zeros_like(mask_active)
            sl_src = [slice(None)] * d
            sl_dst = [slice(None)] * d
            if step == 1:
                sl_src[k] = slice(1, None)
                sl_dst[k] = slice(None, -1)
            else:
                sl_src[k] = slice(None, -1)
                sl_dst[k] = slice(1, None)
            shifted[tuple(sl_dst)] = mask_active[tuple(sl_src)]
            interior &= shifted
    if not np.array_equal(interior, unknown):
        raise PreconditionError(
            "an unknown node has an axis neighbour outside the active set"
        )


def solve_dirichlet(
    domain: GridDomain, boundary_values: np.ndarray, params: SolverParams | None = None
) -> ScalarField:
    """Solve the discrete Laplace equation on a connected grid domain.

    ``boundary_values`` is a full-lattice array read at the domain's boundary
    nodes; those nodes are held fixed and the interior is relaxed until the
    stencil residual drops below ``rtol * (boundary range)``.  The output is
    clamped into ``[min boundary, max boundary]``, which the exact discrete
    solution satisfies (maximum principle) and the clamp only trims solver
    noise.
    """
    params = params or SolverParams()
    boundary_values = np.asarray(boundary_values, dtype=float)
    if boundary_values.shape != domain.shape:
        raise PreconditionError("boundary value array shape does not match grid")
    if domain.component_count() != 1:
        raise PreconditionError("Dirichlet domain must be connected")
    interior = domain.interior_mask()
    boundary = domain.mask & ~interior
    if not boundary.any():
        raise PreconditionError("domain has no boundary nodes")
    bvals = boundary_values[boundary]
    if not np.all(np.isfinite(bvals)):
        raise PreconditionError("boundary values must be finite")
    _check_unknown_closed(domain.mask, interior)
    values = np.zeros(domain.shape)
    values[boundary] = boundary_values[boundary]
    values[interior] = float(bvals.mean())
    _sor_solve(values, interior, domain.spacing, params)
    lo, hi = float(bvals.min()), float(bvals.max())
    values[domain.mask] = np.clip(values[domain.mask], lo, hi)
    return ScalarField(domain, np.where(domain.mask, values, 0.0))


@dataclass
class GreenField:
    """A discrete Green's function with its metadata.

    ``field`` lives on the full host lattice: positive inside D, identically
    0 outside, the pole node holding the solve's large finite surrogate for
    +inf.  ``min_constant`` is filled in once the function is bound to a core
    set via :func:`green_min_constant`.
    """

    field: ScalarField
    pole: Point
    pole_node: tuple
    pole_offset: float
    domain: GridDomain
    residual: float
    iterations: int
    min_constant: float | None = None

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def metadata(self) -> dict:
        return {
            "pole": list(self.pole.coords),
            "pole_node": list(self.pole_node),
            "pole_offset": self.pole_offset,
            "min_constant": self.min_constant,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def _source_strength(d: int) -> float:
    """Total flux of the fundamental profile ``-k_{d-2}``: 2 for d = 1,
    2*pi for d = 2, (d-2) * (surface area of the unit sphere) for d >= 3."""
    if d == 1:
        return 2.0
    if d == 2:
        return 2.0 * math.pi
    area = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    return (d - 2) * area


def green_function(
    domain: GridDomain, o, params: SolverParams | None = None
) -> GreenField:
    """Discrete Green's function of a connected grid domain with pole ``o``.

    The pole is snapped to the nearest active interior node (the offset is
    recorded).  The field solves the discrete Poisson problem with a point
    source of strength ``-c_d / h^d`` at the pole node and zero values on the
    domain boundary, then is clamped below at 0 and extended by 0 over the
    rest of the lattice.  This makes it discretely harmonic away from the
    pole at solver-residual accuracy while matching ``-K_{d-2}(. , o)`` up to
    a bounded correction near the pole.
    """
    params = params or SolverParams()
    o = as_point(o)
    if o.dim != domain.dim:
        raise PreconditionError("pole dimension does not match the grid")
    if domain.component_count() != 1:
        raise PreconditionError("Green domain must be connected")
    interior = domain.interior_mask()
    if not interior.any():
        raise PreconditionError("domain has no interior nodes")
    d2 = np.where(interior, domain.distance2_to(o), np.inf)
    pole_node = tuple(
        int(i) for i in np.unravel_index(np.argmin(d2), domain.shape)
    )
    offset = float(math.sqrt(d2[pole_node]))
    if offset > domain.spacing * math.sqrt(domain.dim):
        raise PreconditionError("pole does not lie inside the domain")
    boundary = domain.mask & ~interior
    _check_unknown_closed(domain.mask, interior)
    h = domain.spacing
    source = np.zeros(domain.shape)
    source[pole_node] = -_source_strength(domain.dim) / h**domain.dim
    values = np.zeros(domain.shape)
    residual, sweeps = _sor_solve(values, interior, h, params, source=source)
    values[domain.mask] = np.maximum(values[domain.mask], 0.0)
    values[~domain.mask] = 0.0
    host = domain.full_lattice()
    gfield = ScalarField(host, values)
    return GreenField(
        field=gfield,
        pole=host.node_point(pole_node),
        pole_node=pole_node,
        pole_offset=offset,
        domain=domain,
        residual=residual,
        iterations=sweeps,
    )


def green_min_constant(g: GreenField, s0: NodeSet) -> float:
    """The minimum of the Green's function over the discrete boundary of a
    core set compactly inside its domain; positive by the minimum principle.

    Raises ``"degenerate Green minimum"`` when the minimum is not positive,
    which indicates the core is not compactly inside D.
    """
    s0.domain.require_same_lattice(g.domain)
    if s0.is_empty():
        raise PreconditionError("core set is empty")
    if not s0.dilate("moore").issubset(g.domain.active_set()):
        raise PreconditionError("core set is not compactly inside the Green domain")
    ring = s0.inner_boundary()
    if ring.is_empty():
        raise PreconditionError("core set has an empty discrete boundary")
    m = float(g.values[ring.mask].min())
    if not (m > 0):
        raise PreconditionError(
            f"degenerate Green minimum: min over the core boundary is {m:g}"
        )
    g.min_constant = m
    return m


@dataclass
class ContinuationResult:
    """Harmonic continuation output: the continued field, how many nodes the
    ``max(. , v)`` guard engaged on, and the solve's residual/sweeps."""

    field: ScalarField
    max_engaged: int
    residual: float
    iterations: int


def harmonic_layer_continuation(
    v: ScalarField, layer: NodeSet, params: SolverParams | None = None
) -> ContinuationResult:
    """Replace ``v`` on an open layer by the discrete harmonic extension of
    its values on the layer's exterior ring, guarded below by ``v``.

    The layer must be open in the grid sense: every member is an interior
    node of ``v``'s domain, so the ring of adjacent nodes carries ``v``
    values.  Those values must be finite.  The output equals ``v`` off the
    layer and ``max(harmonic extension, v)`` on it; the max guards the
    discrete leftovers of the domination principle and the report counts how
    often it engaged.
    """
    params = params or SolverParams()
    v.domain.require_same_lattice(layer.domain)
    if layer.is_empty():
        raise PreconditionError("continuation layer is empty")
    if not layer.issubset(v.domain.active_set().interior()):
        raise PreconditionError(
            "layer must be open in the grid sense (interior nodes of the field's domain)"
        )
    ring = layer.dilate("axis").difference(layer)
    ring_vals = v.values[ring.mask]
    if np.any(ring_vals == -np.inf):
        raise PreconditionError("-inf value on the layer's boundary ring")
    values = np.zeros(v.domain.shape)
    values[ring.mask] = v.values[ring.mask]
    values[layer.mask] = float(ring_vals.mean())
    residual, sweeps = _sor_solve(
        values, layer.mask.copy(), v.domain.spacing, params
    )
    lo, hi = float(ring_vals.min()), float(ring_vals.max())
    solved = np.clip(values, lo, hi)
    out = v.values.copy()
    with np.errstate(invalid="ignore"):
        guarded = np.maximum(solved[layer.mask], v.values[layer.mask])
    engaged = int(np.sum(v.values[layer.mask] > solved[layer.mask]))
    out[layer.mask] = guarded
    tilde = ScalarField(v.domain, np.where(v.domain.mask, out, 0.0))
    return ContinuationResult(
        field=tilde, max_engaged=engaged, residual=residual, iterations=sweeps
    )
