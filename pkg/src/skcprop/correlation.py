"""Spatial correlation between Bob's and Eve's channels.

The correlation coefficient for a normalized angular density ``f`` and a
wavelength-normalized offset ``d = (r_B - r_E) / lambda`` is::

    rho(d) = integral f(Omega) exp(-j 2 pi u(Omega) . d) dOmega

with ``u(phi, theta) = (sin theta cos phi, sin theta sin phi, cos theta)``
the unit vector of the wave vector. The sign convention is fixed here (wave
vector along the arrival direction); only ``arg(rho)`` depends on it.

Closed forms are used where they exist (sinc for the 3-D isotropic case,
``J0`` for the 2-D isotropic case, a finite sum for specular paths).
Continuous spectra go through composite Gauss-Legendre quadrature with
dyadic panel refinement.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .bessel import j0
from .errors import DomainError, NumericalError, QuadratureError
from .spectrum import (
    AngularSpectrum,
    Discrete,
    Isotropic2D,
    Isotropic3D,
    Laplacian,
    PathComponent,
    TruncatedLaplace,
    unit_vectors,
)

GL_ORDER = 16
REFINE_TOL = 1e-7
MAX_NODES = 2**20
CLAMP_SLACK = 1e-6
# Laplace tails beyond this many scale lengths carry < 4e-11 of the mass
LAPLACE_CUTOFF = 24.0
# phase excursion (rad) and Laplace scale lengths one 16-point panel absorbs
PANEL_PHASE = 12.0
PANEL_SCALES = 8.0

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


class Displacement(NamedTuple):
    """Offset ``(r_B - r_E)`` expressed in wavelengths."""

    dx: float
    dy: float
    dz: float

    @classmethod
    def make(cls, dx: float, dy: float = 0.0, dz: float = 0.0) -> "Displacement":
        if not all(math.isfinite(c) for c in (dx, dy, dz)):
            raise DomainError("displacement components must be finite")
        return cls(float(dx), float(dy), float(dz))

    @classmethod
    def along(cls, axis, distance: float) -> "Displacement":
        """Displacement of ``distance`` wavelengths along ``axis``."""
        axis = np.asarray(axis, dtype=float)
        norm = np.linalg.norm(axis)
        if not np.isfinite(norm) or norm == 0.0:
            raise DomainError("axis must be a finite nonzero vector")
        return cls.make(*(float(c) for c in axis / norm * distance))

    @property
    def norm(self) -> float:
        return math.sqrt(self.dx**2 + self.dy**2 + self.dz**2)

    @property
    def horizontal_norm(self) -> float:
        return math.hypot(self.dx, self.dy)

    def __neg__(self) -> "Displacement":
        return Displacement(-self.dx, -self.dy, -self.dz)


def clamp_rho(value: complex) -> complex:
    """Clamp ``|rho|`` to one, tolerating quadrature slack up to 1e-6."""
    value = complex(value)
    mag = abs(value)
    if mag <= 1.0:
        return value
    if mag <= 1.0 + CLAMP_SLACK:
        return value / mag
    raise NumericalError(f"|rho| = {mag!r} exceeds 1 beyond quadrature slack", estimate=value)


def _check_distance(d: float) -> float:
    d = float(d)
    if not math.isfinite(d) or d < 0.0:
        raise DomainError(f"distance must be finite and >= 0, got {d!r}")
    return d


def rho_iso3d(distance: float) -> complex:
    """``sinc(2 pi d)`` for a 3-D isotropic spectrum; ``d`` in wavelengths."""
    d = _check_distance(distance)
    if d == 0.0:
        return 1.0 + 0.0j
    x = 2.0 * math.pi * d
    return complex(math.sin(x) / x)


def rho_iso2d(horizontal_distance: float) -> complex:
    """``J0(2 pi d)`` for a 2-D isotropic spectrum; ``d`` in wavelengths."""
    d = _check_distance(horizontal_distance)
    return complex(j0(2.0 * math.pi * d))


def rho_discrete(paths, disp: Displacement) -> complex:
    """Exact power-weighted phasor sum over specular paths."""
    if isinstance(paths, Discrete):
        paths = paths.paths
    paths = list(paths)
    if not paths:
        raise DomainError("empty path set")
    if not all(isinstance(p, PathComponent) for p in paths):
        raise DomainError("paths must be PathComponent instances")
    powers = np.array([p.relative_power for p in paths])
    powers = powers / math.fsum(powers)
    u = unit_vectors([p.azimuth for p in paths], [p.elevation for p in paths])
    phase = 2.0 * math.pi * (u @ np.asarray(disp, dtype=float))
    terms = powers * np.exp(-1j * phase)
    value = complex(math.fsum(terms.real), math.fsum(terms.imag))
    return clamp_rho(value)


class _AxisRule:
    """Composite Gauss-Legendre rule on a set of segments with a weight density.

    ``base`` is the panel count per segment at level 0; level ``k`` uses
    ``base * 2**k`` panels. ``transform`` maps the integration variable to
    the angle (identity except for the cos(theta) axis of the sphere).
    """

    def __init__(self, segments, weight, base, transform=None):
        self.segments = segments
        self.weight = weight
        self.base = base
        self.transform = transform

    def size(self, level: int) -> int:
        return sum(self.base) * 2**level * GL_ORDER

    def nodes(self, level: int):
        xs, ws = [], []
        for (a, b), n0 in zip(self.segments, self.base):
            n = n0 * 2**level
            edges = np.linspace(a, b, n + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[:-1] + edges[1:])
            xs.append((mid[:, None] + half[:, None] * _GL_NODES).ravel())
            ws.append((half[:, None] * _GL_WEIGHTS).ravel())
        x = np.concatenate(xs)
        w = np.concatenate(ws) * self.weight(x)
        if self.transform is not None:
            x = self.transform(x)
        return x, w


def _panels(span: float, wavenumber: float, length: float | None = None,
            scale: float | None = None) -> int:
    """Level-0 panel count for an axis segment.

    ``span`` is the angle swept along the segment; the unit vector moves by
    at most the chord ``2 sin(span / 2)``, which bounds the phase excursion.
    """
    excursion = wavenumber * 2.0 * math.sin(min(span, math.pi) / 2.0)
    n = math.ceil(excursion / PANEL_PHASE)
    if scale is not None:
        n = max(n, math.ceil(length / (PANEL_SCALES * scale)))
    return max(n, 1)


def _uniform(x):
    return np.full_like(x, 1.0 / (2 * math.pi))


def _laplace_axis(law: TruncatedLaplace, wavenumber: float) -> _AxisRule:
    reach = min(law.half_width, LAPLACE_CUTOFF * law.scale)
    segments = [(law.center - reach, law.center), (law.center, law.center + reach)]
    n = _panels(reach, wavenumber, reach, law.scale)
    return _AxisRule(segments, law.pdf, [n, n])


def _axis_rules(spectrum: AngularSpectrum, wavenumber: float):
    if isinstance(spectrum, Isotropic3D):
        phi = _AxisRule([(-math.pi, 0.0), (0.0, math.pi)], _uniform,
                        [_panels(math.pi, wavenumber)] * 2)
        # integrate over t = cos(theta), uniform on [-1, 1]
        theta = _AxisRule([(-1.0, 1.0)], lambda x: np.full_like(x, 0.5),
                          [_panels(math.pi, wavenumber)], transform=np.arccos)
        return phi, theta
    if isinstance(spectrum, Laplacian):
        return (_laplace_axis(spectrum.azimuth_law, wavenumber),
                _laplace_axis(spectrum.elevation_law, wavenumber))
    if isinstance(spectrum, Isotropic2D):
        phi = _AxisRule([(-math.pi, 0.0), (0.0, math.pi)], _uniform,
                        [_panels(math.pi, wavenumber)] * 2)
        return phi, None
    raise DomainError(f"no quadrature rule for {type(spectrum).__name__}")


def _evaluate(phi_rule, theta_rule, level, disp) -> complex:
    phi, w_phi = phi_rule.nodes(level)
    d = np.asarray(disp, dtype=float)
    if theta_rule is None:
        # horizon only: the elevation delta collapses one integral
        phase = 2.0 * math.pi * (d[0] * np.cos(phi) + d[1] * np.sin(phi))
        vals = w_phi * np.exp(-1j * phase)
    else:
        theta, w_theta = theta_rule.nodes(level)
        st, ct = np.sin(theta), np.cos(theta)
        phase = 2.0 * math.pi * (
            np.outer(d[0] * np.cos(phi) + d[1] * np.sin(phi), st) + d[2] * ct[None, :]
        )
        vals = np.outer(w_phi, w_theta) * np.exp(-1j * phase)
    total = vals.sum()
    return complex(total.real, total.imag)


def rho_quadrature(spectrum: AngularSpectrum, disp: Displacement, tol: float = REFINE_TOL) -> complex:
    """Integrate the correlation numerically.

    Discrete spectra are summed exactly; the 2-D isotropic spectrum reduces
    to a one-dimensional azimuth integral. Panels are doubled until two
    successive levels agree within ``tol`` in both real and imaginary parts.

    Raises
    ------
    QuadratureError
        If the next refinement would exceed ``MAX_NODES`` nodes; the last
        difference between levels is attached as ``estimate``.
    """
    if isinstance(spectrum, Discrete):
        return rho_discrete(spectrum.paths, disp)
    disp = Displacement(*disp)
    wavenumber = 2.0 * math.pi * disp.norm
    phi_rule, theta_rule = _axis_rules(spectrum, wavenumber)

    def n_nodes(level):
        return phi_rule.size(level) * (1 if theta_rule is None else theta_rule.size(level))

    level = 0
    previous = _evaluate(phi_rule, theta_rule, level, disp)
    while True:
        level += 1
        if n_nodes(level) > MAX_NODES:
            raise QuadratureError(
                f"quadrature did not converge within {MAX_NODES} nodes", estimate=previous
            )
        current = _evaluate(phi_rule, theta_rule, level, disp)
        diff = current - previous
        if abs(diff.real) <= tol and abs(diff.imag) <= tol:
            return clamp_rho(current)
        previous = current


def correlation(spectrum: AngularSpectrum, disp: Displacement) -> complex:
    """Correlation coefficient using closed forms where available."""
    disp = Displacement(*disp)
    if isinstance(spectrum, Isotropic3D):
        return rho_iso3d(disp.norm)
    if isinstance(spectrum, Isotropic2D):
        if disp.dz != 0.0:
            # vertical offset adds a constant phase on the horizon
            return rho_quadrature(spectrum, disp)
        return rho_iso2d(disp.horizontal_norm)
    if isinstance(spectrum, Discrete):
        return rho_discrete(spectrum.paths, disp)
    return rho_quadrature(spectrum, disp)
