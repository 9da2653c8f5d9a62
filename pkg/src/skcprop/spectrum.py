"""Normalized angular power densities over the sphere.

Angles follow the physics convention: azimuth ``phi`` in [-pi, pi) and
elevation ``theta`` in [0, pi] measured from the +z axis, so the horizontal
plane is ``theta = pi/2``. Every spectrum integrates to one against the solid
angle element ``sin(theta) dtheta dphi``.

Four families are supported:

* :class:`Isotropic3D` -- uniform over the sphere, ``f = 1/(4 pi)``.
* :class:`Isotropic2D` -- uniform in azimuth on the horizon (delta in elevation).
* :class:`Laplacian` -- separable truncated Laplace in azimuth and elevation,
  centered on ``(0, pi/2)``, with a ``1/sin(theta)`` factor that cancels the
  Jacobian.
* :class:`Discrete` -- a finite set of specular paths.

Delta-supported spectra are kept symbolic; asking for their pointwise
density raises :class:`~skcprop.errors.SingularSupportError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, SingularSupportError

SQRT2 = math.sqrt(2.0)


def wrap_azimuth(phi):
    """Wrap azimuth(s) into [-pi, pi)."""
    phi = np.asarray(phi, dtype=float)
    inside = (phi >= -np.pi) & (phi < np.pi)
    wrapped = np.where(inside, phi, np.mod(phi + np.pi, 2.0 * np.pi) - np.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


class Direction(NamedTuple):
    """Arrival direction ``(azimuth, elevation)`` in radians."""

    azimuth: float
    elevation: float

    @classmethod
    def make(cls, azimuth: float, elevation: float) -> "Direction":
        if not (math.isfinite(azimuth) and math.isfinite(elevation)):
            raise DomainError("direction angles must be finite")
        if not 0.0 <= elevation <= math.pi:
            raise DomainError(f"elevation {elevation!r} outside [0, pi]")
        return cls(wrap_azimuth(azimuth), float(elevation))

    def unit_vector(self) -> np.ndarray:
        return unit_vectors(self.azimuth, self.elevation)


def unit_vectors(azimuth, elevation) -> np.ndarray:
    """Cartesian unit vectors for broadcastable angle arrays, last axis xyz."""
    azimuth = np.asarray(azimuth, dtype=float)
    elevation = np.asarray(elevation, dtype=float)
    s = np.sin(elevation)
    return np.stack(
        np.broadcast_arrays(s * np.cos(azimuth), s * np.sin(azimuth), np.cos(elevation)),
        axis=-1,
    )


class TruncatedLaplace:
    """Laplace law ``exp(-|x - center| / scale)`` restricted to ``center +- half_width``.

    Used per axis by :class:`Laplacian`; ``scale = rms / sqrt(2)``.
    """

    def __init__(self, center: float, scale: float, half_width: float):
        self.center = float(center)
        self.scale = float(scale)
        self.half_width = float(half_width)
        # 1 - exp(-w/b), mass of one half before normalization (times b)
        self._one_minus_tail = -math.expm1(-self.half_width / self.scale)

    @property
    def mass(self) -> float:
        """Integral of the unnormalized kernel over the support."""
        return 2.0 * self.scale * self._one_minus_tail

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        dev = np.abs(x - self.center)
        out = np.exp(-dev / self.scale) / self.mass
        return np.where(dev <= self.half_width, out, 0.0)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float) - self.center, -self.half_width, self.half_width)
        tail = math.exp(-self.half_width / self.scale)
        half = (np.exp(-np.abs(x) / self.scale) - tail) / (2.0 * self._one_minus_tail)
        return np.where(x < 0, half, 1.0 - half)

    def ppf(self, u):
        """Inverse CDF on (0, 1)."""
        u = np.asarray(u, dtype=float)
        v = 2.0 * np.minimum(u, 1.0 - u)
        tail = math.exp(-self.half_width / self.scale)
        # distance from the center solving the half-CDF equation
        dev = -self.scale * np.log(tail + v * self._one_minus_tail)
        dev = np.minimum(dev, self.half_width)
        return self.center + np.where(u < 0.5, -dev, dev)


class AngularSpectrum:
    """Base class of the normalized angular power densities."""

    singular = False

    def density(self, azimuth, elevation):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``size`` directions; returns ``(azimuth, elevation)`` arrays."""
        raise NotImplementedError


@dataclass(frozen=True)
class Isotropic3D(AngularSpectrum):
    """Uniform over the whole sphere."""

    def density(self, azimuth, elevation):
        return np.full(np.broadcast(np.asarray(azimuth), np.asarray(elevation)).shape,
                       1.0 / (4.0 * math.pi))[()]

    def sample(self, rng, size):
        azimuth = rng.uniform(-math.pi, math.pi, size)
        elevation = np.arccos(1.0 - 2.0 * rng.random(size))
        return azimuth, elevation


@dataclass(frozen=True)
class Isotropic2D(AngularSpectrum):
    """Uniform in azimuth, concentrated on the horizontal plane."""

    singular = True

    def density(self, azimuth, elevation):
        raise SingularSupportError("Isotropic2D is a delta in elevation; no pointwise density")

    def sample(self, rng, size):
        azimuth = rng.uniform(-math.pi, math.pi, size)
        return azimuth, np.full(np.shape(azimuth), math.pi / 2)


def laplacian_normalization(phi_rms: float, theta_rms: float) -> float:
    """Normalization constant of the truncated Laplacian spectrum.

    The ``1/sin(theta)`` factor in the density cancels the solid-angle
    Jacobian, so the integral separates into two truncated Laplace masses
    over ``phi in [-pi, pi)`` and ``theta in [0, pi]``.
    """
    for name, value in (("phi_rms", phi_rms), ("theta_rms", theta_rms)):
        if not math.isfinite(value) or value <= 0.0:
            raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    a_phi = SQRT2 * phi_rms * -math.expm1(-SQRT2 * math.pi / phi_rms)
    a_theta = SQRT2 * theta_rms * -math.expm1(-SQRT2 * (math.pi / 2) / theta_rms)
    return 1.0 / (a_phi * a_theta)


@dataclass(frozen=True)
class Laplacian(AngularSpectrum):
    """Truncated Laplacian centered on ``(phi, theta) = (0, pi/2)``.

    Parameters
    ----------
    phi_rms, theta_rms : float
        Azimuth and elevation angular spreads in radians.
    """

    phi_rms: float
    theta_rms: float
    gamma: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gamma", laplacian_normalization(self.phi_rms, self.theta_rms))

    @classmethod
    def from_degrees(cls, phi_rms_deg: float, theta_rms_deg: float) -> "Laplacian":
        return cls(math.radians(phi_rms_deg), math.radians(theta_rms_deg))

    @property
    def azimuth_law(self) -> TruncatedLaplace:
        return TruncatedLaplace(0.0, self.phi_rms / SQRT2, math.pi)

    @property
    def elevation_law(self) -> TruncatedLaplace:
        return TruncatedLaplace(math.pi / 2, self.theta_rms / SQRT2, math.pi / 2)

    def density(self, azimuth, elevation):
        azimuth = np.asarray(azimuth, dtype=float)
        elevation = np.asarray(elevation, dtype=float)
        with np.errstate(divide="ignore"):
            out = (
                self.gamma
                * np.exp(-SQRT2 * np.abs(azimuth) / self.phi_rms)
                * np.exp(-SQRT2 * np.abs(elevation - math.pi / 2) / self.theta_rms)
                / np.sin(elevation)
            )
        return out[()]

    def sample(self, rng, size):
        # separable after Jacobian cancellation: independent inverse-CDF draws
        u = rng.random(size)
        v = rng.random(size)
        return self.azimuth_law.ppf(u), self.elevation_law.ppf(v)


@dataclass(frozen=True)
class PathComponent:
    """One specular path: relative power and arrival angles in radians."""

    relative_power: float
    azimuth: float
    elevation: float

    def __post_init__(self):
        if not math.isfinite(self.relative_power) or self.relative_power <= 0.0:
            raise DomainError(f"path power must be finite and > 0, got {self.relative_power!r}")
        direction = Direction.make(self.azimuth, self.elevation)
        object.__setattr__(self, "azimuth", direction.azimuth)


@dataclass(frozen=True)
class Discrete(AngularSpectrum):
    """Finite set of specular paths; powers are normalized to sum to one."""

    paths: tuple[PathComponent, ...]
    singular = True

    def __init__(self, paths: Sequence[PathComponent]):
        paths = tuple(paths)
        if not paths:
            raise DomainError("a discrete spectrum needs at least one path")
        total = math.fsum(p.relative_power for p in paths)
        normalized = tuple(
            PathComponent(p.relative_power / total, p.azimuth, p.elevation) for p in paths
        )
        object.__setattr__(self, "paths", normalized)

    @classmethod
    def from_degrees(cls, triples) -> "Discrete":
        """Build from ``(power, azimuth_deg, elevation_deg)`` triples."""
        return cls([PathComponent(p, math.radians(az), math.radians(el)) for p, az, el in triples])

    @property
    def powers(self) -> np.ndarray:
        return np.array([p.relative_power for p in self.paths])

    @property
    def azimuths(self) -> np.ndarray:
        return np.array([p.azimuth for p in self.paths])

    @property
    def elevations(self) -> np.ndarray:
        return np.array([p.elevation for p in self.paths])

    def density(self, azimuth, elevation):
        raise SingularSupportError("Discrete spectra are sums of deltas; no pointwise density")

    def sample(self, rng, size):
        idx = rng.choice(len(self.paths), size=size, p=self.powers)
        return self.azimuths[idx], self.elevations[idx]


def density(spectrum: AngularSpectrum, direction: Direction) -> float:
    """Evaluate ``f(direction)`` per steradian.

    Raises
    ------
    SingularSupportError
        For :class:`Isotropic2D` and :class:`Discrete`.
    """
    return float(spectrum.density(direction.azimuth, direction.elevation))


def sample_direction(spectrum: AngularSpectrum, rng: np.random.Generator) -> Direction:
    azimuth, elevation = spectrum.sample(rng, None)
    return Direction(wrap_azimuth(float(azimuth)), float(elevation))
