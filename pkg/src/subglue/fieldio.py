"""Serialization: field files, point clouds, Green metadata, PGM renders.

Field file format (plain text)::

    dim 2
    shape 257 257
    origin -1.0 -1.0
    spacing 0.0078125
    mask rle 130 3 250 6 ...
    <value>
    ...

The ``mask rle`` line run-length-encodes the row-major boolean mask as
alternating run lengths starting with the inactive run (a leading 0 means
the mask starts active).  After the header come the active-node values in
row-major order, one per line, written with ``repr`` so the round trip is
bit-exact; ``-inf`` is the literal minus-infinity.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import PreconditionError
from .field import ScalarField
from .geometry import GridDomain

__all__ = [
    "write_field",
    "read_field",
    "field_to_text",
    "field_from_text",
    "write_points",
    "read_points",
    "render_pgm",
    "write_text_atomic",
]


def write_text_atomic(path, text: str):
    """Write via a temp file in the same directory plus rename, so readers
    never observe a half-written file."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _rle_encode(flat: np.ndarray) -> list:
    runs = []
    current = False  # runs alternate starting with the inactive count
    count = 0
    for bit in flat:
        if bool(bit) == current:
            count += 1
        else:
            runs.append(count)
            current = not current
            count = 1
    runs.append(count)
    return runs


def _rle_decode(runs, total: int) -> np.ndarray:
    flat = np.zeros(total, dtype=bool)
    pos = 0
    current = False
    for run in runs:
        if run < 0:
            raise PreconditionError("negative run length in mask rle")
        if current:
            flat[pos : pos + run] = True
        pos += run
        current = not current
    if pos != total:
        raise PreconditionError("mask rle does not cover the lattice")
    return flat


def field_to_text(v: ScalarField) -> str:
    dom = v.domain
    lines = [
        f"dim {dom.dim}",
        "shape " + " ".join(str(n) for n in dom.shape),
        "origin " + " ".join(repr(c) for c in dom.origin.coords),
        f"spacing {dom.spacing!r}",
        "mask rle " + " ".join(str(r) for r in _rle_encode(dom.mask.ravel())),
    ]
    for val in v.values[dom.mask]:
        lines.append(repr(float(val)))
    return "\n".join(lines) + "\n"


def field_from_text(text: str) -> ScalarField:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 5:
        raise PreconditionError("field file too short")

    def expect(i, key):
        parts = lines[i].split()
        if not parts or parts[0] != key:
            raise PreconditionError(f"field file: expected '{key}' on line {i + 1}")
        return parts[1:]

    d = int(expect(0, "dim")[0])
    shape = tuple(int(x) for x in expect(1, "shape"))
    origin = tuple(float(x) for x in expect(2, "origin"))
    spacing = float(expect(3, "spacing")[0])
    mask_parts = expect(4, "mask")
    if not mask_parts or mask_parts[0] != "rle":
        raise PreconditionError("field file: mask line must start with 'rle'")
    if len(shape) != d or len(origin) != d:
        raise PreconditionError("field file: dimension mismatch in header")
    total = int(np.prod(shape))
    flat = _rle_decode([int(x) for x in mask_parts[1:]], total)
    mask = flat.reshape(shape)
    domain = GridDomain(origin, spacing, shape, mask)
    active = int(mask.sum())
    value_lines = lines[5:]
    if len(value_lines) != active:
        raise PreconditionError(
            f"field file: {len(value_lines)} values for {active} active nodes"
        )
    vals = np.zeros(shape)
    vals[mask] = np.array([float(s) for s in value_lines])
    return ScalarField(domain, vals)


def write_field(v: ScalarField, path):
    write_text_atomic(path, field_to_text(v))


def read_field(path) -> ScalarField:
    with open(path) as handle:
        return field_from_text(handle.read())


def write_points(points: np.ndarray, path):
    """One point per line, coordinates separated by spaces, full precision."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lines = [" ".join(repr(float(c)) for c in row) for row in pts]
    write_text_atomic(path, "\n".join(lines) + "\n")


def read_points(path) -> np.ndarray:
    rows = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if line:
                rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise PreconditionError("point file is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise PreconditionError("point file rows have mixed dimensions")
    return np.asarray(rows, dtype=float)


def write_json(record: dict, path):
    write_text_atomic(path, json.dumps(record, indent=2, sort_keys=True) + "\n")


def render_pgm(v: ScalarField, value_range=None) -> tuple[bytes, bool]:
    """Render a 2-d field as a plain (P2) PGM image.

    Finite values map linearly onto 0..255 over ``value_range`` (defaults to
    the field's finite range); ``-inf`` renders as 0 and inactive nodes as a
    64/192 checker.  Rows run north to south (largest second coordinate on
    top).  Returns ``(bytes, degenerate)`` where ``degenerate`` flags an
    empty finite range, rendered as uniform mid-gray 128.
    """
    dom = v.domain
    if dom.dim != 2:
        raise PreconditionError("PGM rendering is planar only")
    if value_range is None:
        lo, hi = v.finite_range()
    else:
        lo, hi = float(value_range[0]), float(value_range[1])
    degenerate = not (np.isfinite(lo) and np.isfinite(hi) and hi > lo)
    pix = np.zeros(dom.shape, dtype=int)
    ii, jj = np.meshgrid(
        np.arange(dom.shape[0]), np.arange(dom.shape[1]), indexing="ij"
    )
    checker = np.where((ii + jj) % 2 == 0, 64, 192)
    pix[~dom.mask] = checker[~dom.mask]
    if degenerate:
        pix[dom.mask] = 128
    else:
        vals = v.values
        scaled = np.zeros(dom.shape)
        finite = dom.mask & np.isfinite(vals)
        scaled[finite] = np.clip((vals[finite] - lo) / (hi - lo), 0.0, 1.0)
        levels = np.rint(255.0 * scaled).astype(int)
        pix[finite] = levels[finite]
        pix[dom.mask & (vals == -np.inf)] = 0
    # image rows from north to south: second grid axis is the vertical one
    img = pix.T[::-1, :]
    height, width = img.shape
    lines = [f"P2", f"{width} {height}", "255"]
    for row in img:
        for start in range(0, width, 17):
            lines.append(" ".join(str(int(p)) for p in row[start : start + 17]))
    return ("\n".join(lines) + "\n").encode("ascii"), degenerate
