"""Star-shaped boundary curves parametrized by the log-radius.

A curve is the set ``z(a) = h(a) * exp(i*a)`` with ``h = exp(eta)``.
Working in ``eta`` makes positivity of the radius structural: the domain
always contains the origin and stays star-shaped. Derived geometry
(complex boundary points, tangent, unnormalized outward normal) is
computed once with spectral differentiation and cached on the object.

For deliberately non-smooth initial data (corners) the caller should
mollify first; construction never refuses Lipschitz data, but spectral
accuracy degrades on under-resolved input.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, InputError
from .grid import TWO_PI, PeriodicGrid, _frozen

#: chord-arc floor: |z'(a)| >= (2/pi) * exp(-max|eta|) on any Lipschitz curve
CHORD_ARC_FACTOR = 2.0 / np.pi


@dataclass(frozen=True)
class BoundaryCurve:
    """Immutable star-shaped curve with cached geometry.

    Fields ``z``, ``dz``, ``d2z`` are the complex boundary points and
    their first two derivatives in the angle; ``normal`` is the
    unnormalized outward normal ``-i * dz``.
    """

    grid: PeriodicGrid
    eta: np.ndarray
    h: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    dz: np.ndarray = field(repr=False)
    d2z: np.ndarray = field(repr=False)
    normal: np.ndarray = field(repr=False)

    @property
    def n_points(self) -> int:
        return self.grid.n_points


@dataclass(frozen=True)
class CurveStats:
    """Scalar geometry diagnostics of one curve."""

    lipschitz_norm: float
    min_h: float
    max_h: float
    area: float
    cone_half_angle: float


def curve_from_eta(grid: PeriodicGrid, eta) -> BoundaryCurve:
    """Build a curve from log-radius samples, validating all invariants."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (grid.n_points,):
        raise InputError(
            f"expected {grid.n_points} eta samples, got shape {eta.shape}"
        )
    if not np.all(np.isfinite(eta)):
        raise InputError("eta contains non-finite samples")

    with np.errstate(over="ignore"):
        h = np.exp(eta)
    if not np.all(np.isfinite(h)) or np.any(h <= 0.0):
        raise GeometryError("radius exp(eta) overflowed or is non-positive")

    deta = grid.spectral_derivative(eta, 1)
    d2eta = grid.spectral_derivative(eta, 2)
    phase = np.exp(1j * grid.nodes)
    z = h * phase
    dz = (deta + 1j) * z
    d2z = (d2eta + (deta + 1j) ** 2) * z
    normal = -1j * dz

    floor = CHORD_ARC_FACTOR * np.exp(-np.max(np.abs(eta)))
    speed = np.abs(dz)
    if np.min(speed) < floor:
        raise GeometryError(
            f"parametrization speed {np.min(speed):.3e} below chord-arc floor {floor:.3e}"
        )
    radial = (normal * np.conj(phase)).real
    if np.max(np.abs(radial - h)) > 1e-10 * max(1.0, np.max(h)):
        raise GeometryError("normal lost its radial component h: star-shape check failed")

    return BoundaryCurve(
        grid=grid,
        eta=_frozen(eta.copy()),
        h=_frozen(h),
        z=_frozen(z),
        dz=_frozen(dz),
        d2z=_frozen(d2z),
        normal=_frozen(normal),
    )


def curve_stats(c: BoundaryCurve) -> CurveStats:
    """Lipschitz norm, radius range, enclosed area and cone half-angle."""
    deta = c.grid.spectral_derivative(c.eta, 1)
    lip = float(np.max(np.abs(deta)))
    area = 0.5 * c.grid.trapezoid_integral(c.h**2)
    return CurveStats(
        lipschitz_norm=lip,
        min_h=float(np.min(c.h)),
        max_h=float(np.max(c.h)),
        area=area,
        cone_half_angle=float(np.arctan(lip)),
    )


# ---------------------------------------------------------------------------
# curve snapshot files: CSV, header "alpha,eta,h", one row per node


def format_float(x: float) -> str:
    return "%.17g" % x


def curve_to_csv(c: BoundaryCurve) -> str:
    buf = io.StringIO()
    buf.write("alpha,eta,h\n")
    for a, e, r in zip(c.grid.nodes, c.eta, c.h):
        buf.write(f"{format_float(a)},{format_float(e)},{format_float(r)}\n")
    return buf.getvalue()


def write_curve_csv(path, c: BoundaryCurve) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(curve_to_csv(c))


def read_curve_csv(path) -> BoundaryCurve:
    """Read a snapshot written by :func:`write_curve_csv`.

    The node count is inferred from the row count; the alpha column must
    be the uniform grid it claims to be.
    """
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "alpha,eta,h":
            raise InputError(f"unexpected curve CSV header: {header!r}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if not rows:
        raise InputError("curve CSV has no data rows")
    data = np.array([[float(v) for v in row] for row in rows])
    n = data.shape[0]
    grid = PeriodicGrid(n)
    if np.max(np.abs(data[:, 0] - grid.nodes)) > 1e-12 * TWO_PI:
        raise InputError("alpha column is not the uniform grid 2*pi*j/N")
    eta = data[:, 1]
    if np.max(np.abs(data[:, 2] - np.exp(eta))) > 1e-9 * max(1.0, np.max(data[:, 2])):
        raise InputError("h column is inconsistent with exp(eta)")
    return curve_from_eta(grid, eta)
