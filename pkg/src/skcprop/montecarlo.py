"""Monte Carlo multipath oracle.

Draws narrowband multipath channels for Bob and Eve from an angular
spectrum, adds receiver noise, and re-estimates the correlation coefficient
and the Gaussian mutual informations from sample statistics. The results are
compared against :mod:`skcprop.correlation` and :mod:`skcprop.bounds` by
:func:`validate`.

Randomness comes from numpy's counter-based Philox generator. Observations
are produced in fixed-size chunks and chunk ``k`` uses the stream keyed by
``(seed, k)``, so the sample stream does not depend on how chunks are
scheduled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import bounds
from ._validation import check_observations, check_positive_int, check_seed
from .correlation import Displacement, correlation
from .errors import DomainError, NumericalError
from .spectrum import AngularSpectrum, Discrete

CHUNK = 1 << 14
SMALL_SAMPLE = 100
MI_ABS_TOL = 0.02
RHO_ABS_FLOOR = 1e-9
# |skewness| and |excess kurtosis| of Re/Im(h) tolerated before flagging non-Gaussian
GAUSSIAN_MOMENT_TOL = 0.1
QUANTITIES = ("xy", "xz", "yz", "xy_given_z")
_FROZEN_STREAM = 2**64 - 1


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo experiment description.

    ``num_paths`` applies to continuous spectra; a :class:`Discrete`
    spectrum uses its own atoms with their declared powers. With
    ``frozen_directions`` the path directions are drawn once per run
    (a conditional experiment, excluded from :func:`validate`).
    """

    scenario: bounds.Scenario
    spectrum: AngularSpectrum
    displacement: Displacement
    num_paths: int = 64
    num_observations: int = 100_000
    seed: int = 0
    frozen_directions: bool = False

    def __post_init__(self):
        check_positive_int(self.num_paths, "num_paths")
        check_positive_int(self.num_observations, "num_observations")
        check_seed(self.seed)
        object.__setattr__(self, "displacement", Displacement(*self.displacement))


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, chunk], dtype=np.uint64)))


def _paths(cfg: McConfig, rng: np.random.Generator, m: int):
    """Directions ``(m, L)`` and path amplitudes ``(L,)`` for one chunk."""
    p = cfg.scenario.power
    if isinstance(cfg.spectrum, Discrete):
        az = np.broadcast_to(cfg.spectrum.azimuths, (m, len(cfg.spectrum.paths)))
        el = np.broadcast_to(cfg.spectrum.elevations, az.shape)
        return az, el, np.sqrt(p * cfg.spectrum.powers)
    amp = np.full(cfg.num_paths, math.sqrt(p / cfg.num_paths))
    if cfg.frozen_directions:
        az, el = cfg.spectrum.sample(chunk_generator(cfg.seed, _FROZEN_STREAM), cfg.num_paths)
        return np.broadcast_to(az, (m, cfg.num_paths)), np.broadcast_to(el, (m, cfg.num_paths)), amp
    az, el = cfg.spectrum.sample(rng, (m, cfg.num_paths))
    return az, el, amp


def _draw_chunk(cfg: McConfig, chunk: int):
    # always draw a full chunk so that shorter runs are prefixes of longer ones
    m = min(CHUNK, cfg.num_observations - chunk * CHUNK)
    h, h_z, obs = _full_chunk(cfg, chunk)
    return h[:m], h_z[:m], obs[:m]


def _full_chunk(cfg: McConfig, chunk: int):
    m = CHUNK
    rng = chunk_generator(cfg.seed, chunk)
    az, el, amp = _paths(cfg, rng, m)
    # gain phase and mobility phase drift merge into one fresh uniform phase
    psi = rng.random(az.shape)
    gains = amp * np.exp(2j * np.pi * psi)
    dx, dy, dz = cfg.displacement
    proj = np.sin(el) * (dx * np.cos(az) + dy * np.sin(az)) + dz * np.cos(el)
    h = (gains * np.exp(-2j * np.pi * proj)).sum(axis=1)
    h_z = gains.sum(axis=1)
    noise = rng.standard_normal((m, 3, 2))
    noise = (noise[..., 0] + 1j * noise[..., 1]) * np.sqrt(0.5)
    s = cfg.scenario
    obs = np.empty((m, 3), dtype=complex)
    obs[:, 0] = h + math.sqrt(s.n_x) * noise[:, 0]
    obs[:, 1] = h + math.sqrt(s.n_y) * noise[:, 1]
    obs[:, 2] = h_z + math.sqrt(s.n_z) * noise[:, 2]
    return h, h_z, obs


def simulate(cfg: McConfig):
    """Draw every observation of ``cfg``.

    Returns
    -------
    h, h_z : ndarray of complex, shape (n,)
        Bob's and Eve's channels.
    obs : ndarray of complex, shape (n, 3)
        Columns ``x``, ``y``, ``z``.
    """
    n_chunks = -(-cfg.num_observations // CHUNK)
    parts = [_draw_chunk(cfg, k) for k in range(n_chunks)]
    return (np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]),
            np.concatenate([p[2] for p in parts]))


def draw_channel_pair(cfg: McConfig, rng: np.random.Generator) -> tuple[complex, complex]:
    """One ``(h, h_z)`` realization drawn from ``rng``."""
    az, el, amp = _paths(cfg, rng, 1)
    gains = amp * np.exp(2j * np.pi * rng.random(az.shape))
    dx, dy, dz = cfg.displacement
    proj = np.sin(el) * (dx * np.cos(az) + dy * np.sin(az)) + dz * np.cos(el)
    return complex((gains * np.exp(-2j * np.pi * proj)).sum()), complex(gains.sum())


@dataclass(frozen=True)
class ObservationTriple:
    x: complex
    y: complex
    z: complex


def draw_observation(cfg: McConfig, rng: np.random.Generator) -> ObservationTriple:
    h, h_z = draw_channel_pair(cfg, rng)
    w = rng.standard_normal((3, 2)) @ np.array([1.0, 1j]) * math.sqrt(0.5)
    s = cfg.scenario
    return ObservationTriple(
        h + math.sqrt(s.n_x) * w[0], h + math.sqrt(s.n_y) * w[1], h_z + math.sqrt(s.n_z) * w[2]
    )


def _blocks(n: int, n_blocks: int):
    n_blocks = max(2, min(n_blocks, n))
    return np.array_split(np.arange(n), n_blocks)


def _jackknife_se(loo) -> float:
    loo = np.asarray(loo, dtype=float)
    b = loo.size
    return math.sqrt((b - 1) / b * np.sum((loo - loo.mean()) ** 2))


@dataclass(frozen=True)
class RhoEstimate:
    value: complex
    stderr_re: float
    stderr_im: float
    n: int
    small_sample: bool

    @property
    def stderr(self) -> float:
        return math.hypot(self.stderr_re, self.stderr_im)


def _rho_from_sums(cross, pow_h, pow_z):
    return cross / np.sqrt(pow_h * pow_z)


def rho_from_channels(h, h_z, n_blocks: int = 100) -> RhoEstimate:
    """Ratio estimate ``mean(h h_z*) / sqrt(mean|h|^2 mean|h_z|^2)`` with block jackknife errors."""
    h = np.asarray(h, dtype=complex)
    h_z = np.asarray(h_z, dtype=complex)
    n = h.size
    if n < 2:
        raise DomainError("need at least two observations")
    idx = _blocks(n, n_blocks)
    cross = np.array([np.sum(h[i] * h_z[i].conj()) for i in idx])
    ph = np.array([np.sum(np.abs(h[i]) ** 2) for i in idx])
    pz = np.array([np.sum(np.abs(h_z[i]) ** 2) for i in idx])
    if np.any(ph.sum() - ph <= 0.0) or np.any(pz.sum() - pz <= 0.0):
        raise NumericalError("channel samples have zero power; correlation undefined")
    full = _rho_from_sums(cross.sum(), ph.sum(), pz.sum())
    loo = _rho_from_sums(cross.sum() - cross, ph.sum() - ph, pz.sum() - pz)
    return RhoEstimate(complex(full), _jackknife_se(loo.real), _jackknife_se(loo.imag),
                       n, n < SMALL_SAMPLE)


def estimate_rho(cfg: McConfig) -> RhoEstimate:
    h, h_z, _ = simulate(cfg)
    return rho_from_channels(h, h_z)


_PAIRS = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
# relative size below which a determinant counts as singular
SINGULAR_TOL = 1e-12


def _log2_ratio(num: float, den: float, scale: float) -> float:
    if den < -SINGULAR_TOL * scale:
        raise NumericalError(f"sample covariance has negative determinant {den!r}")
    if den <= SINGULAR_TOL * scale:
        return math.nan if num <= SINGULAR_TOL * scale else math.inf
    return math.log2(num / den)


def mi_from_covariance(c, which: str) -> float:
    """Gaussian mutual information (bits) from a 3x3 covariance of ``(x, y, z)``."""
    c = np.asarray(c, dtype=complex)
    d = np.real(np.diag(c))
    if which in _PAIRS:
        i, j = _PAIRS[which]
        sub = c[np.ix_([i, j], [i, j])]
        num = d[i] * d[j]
        return max(_log2_ratio(num, bounds.hermitian_det(sub), num), 0.0)
    if which == "xy_given_z":
        dxz = bounds.hermitian_det(c[np.ix_([0, 2], [0, 2])])
        dyz = bounds.hermitian_det(c[np.ix_([1, 2], [1, 2])])
        dxyz = bounds.hermitian_det(c)
        scale = d[0] * d[1] * d[2]
        if dxz <= SINGULAR_TOL * d[0] * d[2] or dyz <= SINGULAR_TOL * d[1] * d[2]:
            return math.nan
        return max(_log2_ratio(dxz * dyz, d[2] * dxyz, d[2] * scale), 0.0)
    raise DomainError(f"unknown quantity {which!r}; expected one of {QUANTITIES}")


class GaussianMIEstimator(BaseEstimator):
    """Plug-in Gaussian mutual information from observation triples.

    Parameters
    ----------
    assume_centered : bool
        Use raw second moments (zero-mean model) instead of centering.
    n_blocks : int
        Number of contiguous blocks for the delete-a-block jackknife.

    Attributes
    ----------
    covariance_ : ndarray of shape (3, 3)
    mutual_info_ : dict
        Estimates keyed by ``"xy"``, ``"xz"``, ``"yz"``, ``"xy_given_z"``.
    stderr_ : dict
        Jackknife standard errors with the same keys.
    """

    def __init__(self, assume_centered=True, n_blocks=100):
        self.assume_centered = assume_centered
        self.n_blocks = n_blocks

    def _moments(self, sums, outer, n):
        if self.assume_centered:
            return outer / n
        mean = sums / n
        return outer / n - np.outer(mean, mean.conj())

    def fit(self, X, y=None):
        X = check_observations(X)
        n = X.shape[0]
        idx = _blocks(n, self.n_blocks)
        outers = np.array([X[i].T @ X[i].conj() for i in idx])
        sums = np.array([X[i].sum(axis=0) for i in idx])
        counts = np.array([len(i) for i in idx])
        self.covariance_ = self._moments(sums.sum(0), outers.sum(0), n)
        self.mutual_info_ = {q: mi_from_covariance(self.covariance_, q) for q in QUANTITIES}
        loo_cov = [
            self._moments(sums.sum(0) - sums[b], outers.sum(0) - outers[b], n - counts[b])
            for b in range(len(idx))
        ]
        self.stderr_ = {}
        for q in QUANTITIES:
            loo = np.array([mi_from_covariance(c, q) for c in loo_cov])
            if not np.all(np.isfinite(loo)):
                self.stderr_[q] = math.nan
                continue
            self.stderr_[q] = _jackknife_se(loo)
        self.n_samples_ = n
        return self

    def mutual_information(self, which: str) -> float:
        if which not in QUANTITIES:
            raise DomainError(f"unknown quantity {which!r}; expected one of {QUANTITIES}")
        return self.mutual_info_[which]


def estimate_mi_gaussian(samples, which: str) -> float:
    """Plug-in Gaussian MI estimate for ``which`` from ``(n, 3)`` samples or triples."""
    if len(samples) and isinstance(samples[0], ObservationTriple):
        samples = np.array([[s.x, s.y, s.z] for s in samples])
    return GaussianMIEstimator().fit(samples).mutual_information(which)


def gaussianity(h) -> dict:
    """Skewness, excess kurtosis and Jarque-Bera statistic of Re/Im parts of ``h``."""
    h = np.asarray(h, dtype=complex)
    out = {"n": int(h.size)}
    worst = 0.0
    for part, v in (("re", h.real), ("im", h.imag)):
        v = v - v.mean()
        m2 = np.mean(v**2)
        skew = float(np.mean(v**3) / m2**1.5) if m2 > 0 else 0.0
        kurt = float(np.mean(v**4) / m2**2 - 3.0) if m2 > 0 else 0.0
        out[f"skew_{part}"] = skew
        out[f"excess_kurtosis_{part}"] = kurt
        out[f"jarque_bera_{part}"] = h.size / 6.0 * (skew**2 + kurt**2 / 4.0)
        worst = max(worst, abs(skew), abs(kurt))
    out["gaussian"] = bool(worst <= GAUSSIAN_MOMENT_TOL)
    return out


@dataclass
class QuantityCheck:
    name: str
    analytic: object
    estimate: object
    stderr: object
    tolerance: float
    passed: bool

    def as_dict(self):
        return {
            "name": self.name,
            "analytic": self.analytic,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class ValidationReport:
    """Per-quantity comparison of Monte Carlo estimates with closed forms.

    Gaussianity of the simulated channel is reported but does not gate
    ``passed``. Reports from frozen-direction runs are not ``gated``.
    """

    spectrum: str
    displacement: tuple
    num_paths: int
    num_observations: int
    seed: int
    checks: list = field(default_factory=list)
    gaussianity: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    gated: bool = True

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {
            "spectrum": self.spectrum,
            "displacement_wavelengths": list(self.displacement),
            "num_paths": self.num_paths,
            "num_observations": self.num_observations,
            "seed": self.seed,
            "pass": self.passed,
            "gated": self.gated,
            "checks": [c.as_dict() for c in self.checks],
            "gaussianity": self.gaussianity,
            "warnings": self.warnings,
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.as_dict()), indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _mi_matches(analytic: float, estimate: float, stderr: float) -> tuple[float, bool]:
    tol = MI_ABS_TOL if not math.isfinite(stderr) else max(3.0 * stderr, MI_ABS_TOL)
    if math.isinf(analytic) or math.isinf(estimate):
        return tol, analytic == estimate
    if math.isnan(analytic) or math.isnan(estimate):
        return tol, math.isnan(analytic) and math.isnan(estimate)
    return tol, abs(estimate - analytic) <= tol


def validate(cfg: McConfig, analytic_rho=None) -> ValidationReport:
    """Compare Monte Carlo estimates against the closed forms.

    ``analytic_rho`` overrides the reference correlation (e.g. to check
    that the harness detects a wrong value).
    """
    if analytic_rho is None:
        analytic_rho = correlation(cfg.spectrum, cfg.displacement)
    analytic_rho = complex(analytic_rho)
    h, h_z, obs = simulate(cfg)
    report = ValidationReport(
        spectrum=repr(cfg.spectrum),
        displacement=tuple(cfg.displacement),
        num_paths=len(cfg.spectrum.paths) if isinstance(cfg.spectrum, Discrete) else cfg.num_paths,
        num_observations=cfg.num_observations,
        seed=cfg.seed,
        gated=not cfg.frozen_directions,
    )
    if cfg.frozen_directions:
        report.warnings.append("frozen directions estimate a conditional correlation")
    if cfg.num_observations < SMALL_SAMPLE:
        report.warnings.append(
            f"only {cfg.num_observations} observations; standard errors are unreliable"
        )

    rho_est = rho_from_channels(h, h_z)
    diff = rho_est.value - analytic_rho
    ok = (abs(diff.real) <= 3.0 * rho_est.stderr_re + RHO_ABS_FLOOR
          and abs(diff.imag) <= 3.0 * rho_est.stderr_im + RHO_ABS_FLOOR)
    report.checks.append(QuantityCheck(
        "rho", analytic_rho, rho_est.value, complex(rho_est.stderr_re, rho_est.stderr_im),
        3.0, ok,
    ))

    s = cfg.scenario
    analytic = {
        "xy": bounds.mi_xy(s),
        "xz": bounds.mi_xz(s, analytic_rho),
        "yz": bounds.mi_yz(s, analytic_rho),
        "xy_given_z": bounds.mi_xy_given_z(s, analytic_rho),
    }
    est = GaussianMIEstimator().fit(obs)
    for q in QUANTITIES:
        tol, ok = _mi_matches(analytic[q], est.mutual_info_[q], est.stderr_[q])
        report.checks.append(QuantityCheck(
            f"mi_{q}", analytic[q], est.mutual_info_[q], est.stderr_[q], tol, ok
        ))
    report.gaussianity = gaussianity(h)
    if not report.gaussianity["gaussian"]:
        report.warnings.append("channel samples are visibly non-Gaussian (few paths)")
    return report
