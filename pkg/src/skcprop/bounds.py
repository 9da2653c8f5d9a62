"""Secret-key capacity bounds for jointly Gaussian reciprocity observations.

Alice and Bob observe ``X = H + W_X`` and ``Y = H + W_Y``; Eve observes
``Z = H_Z + W_Z`` with ``E[H H_Z*] = rho P``. All quantities are in bits per
observation and all inputs are linear (no dB).

Determinants are evaluated in expanded form, e.g.::

    |C_XY|  = P (N_X + N_Y) + N_X N_Y
    |C_XZ|  = P^2 (1 - |rho|^2) + P (N_X + N_Z) + N_X N_Z
    |C_XYZ| = N_X N_Y N_Z + P (N_X N_Y + N_X N_Z + N_Y N_Z)
              + P^2 (1 - |rho|^2) (N_X + N_Y)

Every term is nonnegative, so there is no cancellation even when the noises
are many orders of magnitude below ``P``. The generic cofactor determinant
(:func:`hermitian_det`) is kept for sample covariances and cross-checks.

Degenerate (noiseless, perfectly correlated) cases return ``math.inf``;
``0/0`` situations return ``math.nan``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, NumericalError

LN2 = math.log(2.0)
RHO_SLACK = 1e-12
LB_FORM_TOL = 1e-10
TIGHT_TOL = 1e-12


@dataclass(frozen=True)
class Scenario:
    """Channel power, noise variances (linear units) and carrier wavelength in meters."""

    power: float
    n_x: float
    n_y: float
    n_z: float
    wavelength: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.power) and self.power > 0.0):
            raise DomainError(f"power must be finite and > 0, got {self.power!r}")
        for name in ("n_x", "n_y", "n_z"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
        if not (math.isfinite(self.wavelength) and self.wavelength > 0.0):
            raise DomainError(f"wavelength must be finite and > 0, got {self.wavelength!r}")

    @property
    def degenerate(self) -> bool:
        """Both legitimate estimates are noiseless."""
        return self.n_x == 0.0 and self.n_y == 0.0

    def scaled(self, c: float) -> "Scenario":
        """Multiply power and every noise variance by ``c``."""
        return Scenario(self.power * c, self.n_x * c, self.n_y * c, self.n_z * c, self.wavelength)

    def with_noise(self, **noise) -> "Scenario":
        fields = asdict(self)
        fields.update(noise)
        return Scenario(**fields)


def rho_abs2(rho) -> float:
    """``|rho|^2``, validated against the unit disk."""
    rho = complex(rho)
    if not (math.isfinite(rho.real) and math.isfinite(rho.imag)):
        raise DomainError("rho must be finite")
    r2 = rho.real * rho.real + rho.imag * rho.imag
    if r2 > 1.0 + RHO_SLACK:
        raise DomainError(f"|rho| = {math.sqrt(r2)!r} exceeds 1")
    return min(r2, 1.0)


def _log2_1p(t: float) -> float:
    if math.isinf(t):
        return math.inf
    return math.log1p(t) / LN2


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        return math.nan if num == 0.0 else math.inf
    return num / den


def det_xy(s: Scenario) -> float:
    return s.power * (s.n_x + s.n_y) + s.n_x * s.n_y


def det_pair_z(s: Scenario, n_leg: float, r2: float) -> float:
    """``|C_XZ|`` (or ``|C_YZ|``) for a legitimate noise ``n_leg``."""
    p = s.power
    return p * p * (1.0 - r2) + p * (n_leg + s.n_z) + n_leg * s.n_z


def det_xyz(s: Scenario, r2: float) -> float:
    p, nx, ny, nz = s.power, s.n_x, s.n_y, s.n_z
    return nx * ny * nz + p * (nx * ny + nx * nz + ny * nz) + p * p * (1.0 - r2) * (nx + ny)


@dataclass(frozen=True)
class CovarianceSet:
    """Covariance matrices of (X, Y), (X, Z), (Y, Z) and (X, Y, Z)."""

    c_xy: np.ndarray
    c_xz: np.ndarray
    c_yz: np.ndarray
    c_xyz: np.ndarray


def covariances(s: Scenario, rho) -> CovarianceSet:
    rho_abs2(rho)
    rho = complex(rho)
    p = s.power
    a, b, c = p + s.n_x, p + s.n_y, p + s.n_z
    rp = rho * p
    c_xyz = np.array(
        [[a, p, rp], [p, b, rp], [rp.conjugate(), rp.conjugate(), c]], dtype=complex
    )
    return CovarianceSet(
        c_xy=c_xyz[np.ix_([0, 1], [0, 1])].copy(),
        c_xz=c_xyz[np.ix_([0, 2], [0, 2])].copy(),
        c_yz=c_xyz[np.ix_([1, 2], [1, 2])].copy(),
        c_xyz=c_xyz,
    )


def _csum(values) -> complex:
    values = [complex(v) for v in values]
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def hermitian_det(c) -> float:
    """Determinant of a 2x2 or 3x3 Hermitian matrix by cofactor expansion.

    Products are accumulated with compensated summation. The imaginary part
    of a Hermitian determinant is zero; a residue above ``1e-9 ||C||^n`` is
    reported as a :class:`NumericalError`.
    """
    c = np.asarray(c, dtype=complex)
    n = c.shape[0]
    if c.shape == (2, 2):
        det = _csum([c[0, 0] * c[1, 1], -c[0, 1] * c[1, 0]])
    elif c.shape == (3, 3):
        det = _csum([
            c[0, 0] * c[1, 1] * c[2, 2],
            -c[0, 0] * c[1, 2] * c[2, 1],
            -c[0, 1] * c[1, 0] * c[2, 2],
            c[0, 1] * c[1, 2] * c[2, 0],
            c[0, 2] * c[1, 0] * c[2, 1],
            -c[0, 2] * c[1, 1] * c[2, 0],
        ])
    else:
        raise DomainError(f"expected a 2x2 or 3x3 matrix, got shape {c.shape}")
    scale = np.linalg.norm(c) ** n
    if abs(det.imag) > 1e-9 * max(scale, np.finfo(float).tiny):
        raise NumericalError(f"Hermitian determinant has imaginary residue {det.imag!r}")
    return det.real


def mi_xy(s: Scenario) -> float:
    """``I(X;Y)``; infinite when both legitimate estimates are noiseless."""
    return _log2_1p(_ratio(s.power**2, det_xy(s)))


def _mi_leg_z(s: Scenario, n_leg: float, rho) -> float:
    r2 = rho_abs2(rho)
    num = r2 * s.power**2
    if num == 0.0:
        return 0.0
    return _log2_1p(_ratio(num, det_pair_z(s, n_leg, r2)))


def mi_xz(s: Scenario, rho) -> float:
    return _mi_leg_z(s, s.n_x, rho)


def mi_yz(s: Scenario, rho) -> float:
    return _mi_leg_z(s, s.n_y, rho)


def mi_xy_given_z(s: Scenario, rho) -> float:
    """``I(X;Y|Z) = log2(|C_XZ| |C_YZ| / ((P + N_Z) |C_XYZ|))``.

    Evaluated in the equivalent conditional form: given ``Z``, ``H`` has
    variance ``V = P (P (1 - |rho|^2) + N_Z) / (P + N_Z)`` and the result is
    ``I(X;Y)`` with ``P`` replaced by ``V``. Every term is nonnegative, and at
    ``rho = 0`` the value equals ``I(X;Y)`` exactly.
    """
    r2 = rho_abs2(rho)
    p, nx, ny, nz = s.power, s.n_x, s.n_y, s.n_z
    v = p * ((p * (1.0 - r2) + nz) / (p + nz))
    return _log2_1p(_ratio(v * v, v * (nx + ny) + nx * ny))


def _difference(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b):
        return math.nan
    return a - b


def lower_bound_single_log(s: Scenario, rho) -> float:
    """Lower bound written as one logarithm, using the noisier legitimate party."""
    r2 = rho_abs2(rho)
    num = _ratio(s.power**2, det_xy(s))
    eve = 0.0 if r2 == 0.0 else _ratio(r2 * s.power**2, det_pair_z(s, max(s.n_x, s.n_y), r2))
    return _difference(_log2_1p(num), _log2_1p(eve))


def lower_bound(s: Scenario, rho) -> float:
    """``I(X;Y) - min(I(X;Z), I(Y;Z))``; may be negative.

    The value is recomputed as a single logarithm and the two forms must
    agree to 1e-10 bits.
    """
    value = _difference(mi_xy(s), min(mi_xz(s, rho), mi_yz(s, rho)))
    check = lower_bound_single_log(s, rho)
    if math.isfinite(value) and math.isfinite(check) and abs(value - check) > LB_FORM_TOL:
        raise NumericalError(
            f"lower bound forms disagree: {value!r} vs {check!r}", estimate=value
        )
    return value


def upper_bound(s: Scenario, rho) -> float:
    """``min(I(X;Y), I(X;Y|Z))``."""
    return min(mi_xy(s), mi_xy_given_z(s, rho))


def nz_threshold(s: Scenario, rho) -> float:
    """Eve noise variance above which the lower bound is positive.

    ``s.n_z`` is ignored. A negative result means any ``N_Z >= 0`` works.
    """
    r2 = rho_abs2(rho)
    return r2 * min(s.n_x, s.n_y) - s.power * (1.0 - r2)


def rho_sq_max(s: Scenario) -> float:
    """Largest ``|rho|^2`` keeping the lower bound positive, clamped to 1."""
    return min(1.0, (s.power + s.n_z) / (s.power + min(s.n_x, s.n_y)))


def eve_mi_asymptote(rho) -> float:
    """High-power limit ``-log2(1 - |rho|^2)`` of ``I(X;Z)`` and ``I(Y;Z)``."""
    r2 = rho_abs2(rho)
    if r2 >= 1.0:
        return math.inf
    return -math.log1p(-r2) / LN2


TIGHT_CASES = ("independent_eve", "noiseless_bob", "noiseless_alice")


def tight_capacity(s: Scenario, rho, which: str) -> float:
    """Secret-key capacity in the three cases where the bounds coincide.

    ``independent_eve`` needs ``rho = 0``, ``noiseless_bob`` needs
    ``N_Y = 0`` and ``noiseless_alice`` needs ``N_X = 0`` (each up to a
    relative 1e-12).
    """
    r2 = rho_abs2(rho)
    if which == "independent_eve":
        if r2 > TIGHT_TOL**2:
            raise DomainError("independent_eve requires rho = 0")
        return mi_xy(s)
    if which == "noiseless_bob":
        quiet, noisy = s.n_y, s.n_x
    elif which == "noiseless_alice":
        quiet, noisy = s.n_x, s.n_y
    else:
        raise DomainError(f"unknown tight case {which!r}; expected one of {TIGHT_CASES}")
    if quiet > TIGHT_TOL * s.power:
        raise DomainError(f"{which} requires the corresponding noise variance to be 0")
    legit = _ratio(s.power, noisy)
    eve = 0.0 if r2 == 0.0 else _ratio(r2 * s.power**2, det_pair_z(s, noisy, r2))
    return _difference(_log2_1p(legit), _log2_1p(eve))


@dataclass(frozen=True)
class BoundsReport:
    """Mutual informations and key-capacity bounds for one ``(scenario, rho)`` pair."""

    i_xy: float
    i_xz: float
    i_yz: float
    i_xy_given_z: float
    lower_bound: float
    upper_bound: float

    def as_dict(self) -> dict:
        return asdict(self)


def bounds_report(s: Scenario, rho) -> BoundsReport:
    i_xy = mi_xy(s)
    i_xz = mi_xz(s, rho)
    i_yz = mi_yz(s, rho)
    i_cond = mi_xy_given_z(s, rho)
    lb = lower_bound(s, rho)
    ub = min(i_xy, i_cond)
    if math.isfinite(lb) and math.isfinite(ub) and lb > ub + LB_FORM_TOL:
        raise NumericalError(f"lower bound {lb!r} exceeds upper bound {ub!r}")
    return BoundsReport(i_xy, i_xz, i_yz, i_cond, lb, ub)
