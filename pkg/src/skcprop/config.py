"""Sweep configuration files.

A configuration is a UTF-8 JSON object::

    {
      "scenario": {"snr_x_db": 10, "snr_y_db": 10, "snr_z_db": 20,
                   "wavelength_m": 0.3, "power": 1.0},
      "spectra": [
        {"type": "iso3d"},
        {"type": "iso2d"},
        {"type": "laplacian", "phi_rms_deg": 40, "theta_rms_deg": 5, "label": "urban"},
        {"type": "discrete", "paths": [{"power": 0.5, "az_deg": 10, "el_deg": 90}]}
      ],
      "axis": [1, 0, 0],
      "grid": {"start": 0, "stop": 10, "step": 0.01, "unit": "wavelength"},
      "outputs": ["rho", "bounds", "threshold"],
      "distance": {"criterion": "positive_lb"},
      "mc": {"num_paths": 64, "num_observations": 1000000, "seed": 0,
             "distances": [0, 0.5, 2]}
    }

Only ``scenario``, ``spectra`` (or a single ``spectrum``) and ``grid`` are
required. SNRs are in dB and angles in degrees; both are converted to linear
units and radians here and nowhere else. Grid and Monte Carlo distances are
in wavelengths unless ``unit`` is ``"m"``. Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import Scenario
from .errors import ConfigError, DomainError
from .spectrum import AngularSpectrum, Discrete, Isotropic2D, Isotropic3D, Laplacian

OUTPUTS = ("rho", "bounds", "threshold")
CRITERIA = ("positive_lb", "lb_target")
SPECTRUM_TYPES = ("iso3d", "iso2d", "laplacian", "discrete")
DEFAULT_MC_DISTANCES = (0.0, 0.5, 2.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class Grid:
    """Distance grid in wavelengths."""

    start: float
    stop: float
    step: float

    def points(self) -> np.ndarray:
        n = math.floor((self.stop - self.start) / self.step + 1e-9) + 1
        return self.start + self.step * np.arange(n)


@dataclass(frozen=True)
class McSettings:
    num_paths: int = 64
    num_observations: int = 1_000_000
    seed: int = 0
    distances: tuple = DEFAULT_MC_DISTANCES
    frozen_directions: bool = False


@dataclass(frozen=True)
class SweepSpec:
    scenario: Scenario
    spectra: tuple  # of (label, AngularSpectrum)
    axis: tuple
    grid: Grid
    outputs: tuple = OUTPUTS
    criterion: str = "positive_lb"
    target_bits: float | None = None
    mc: McSettings = field(default_factory=McSettings)
    resolved: dict = field(default_factory=dict, compare=False)

    def meters(self, wavelengths):
        return np.asarray(wavelengths) * self.scenario.wavelength


class _Reader:
    """Strict accessor over parsed JSON that reports key paths and lines."""

    def __init__(self, text: str):
        self.text = text

    def line_of(self, key: str):
        m = re.search(r'"%s"\s*:' % re.escape(key.rsplit(".", 1)[-1].split("[")[0]), self.text)
        if m is None:
            return None
        return self.text.count("\n", 0, m.start()) + 1

    def fail(self, message: str, key: str):
        raise ConfigError(message, key=key, line=self.line_of(key))

    def obj(self, value, key: str, allowed, required=()):
        if not isinstance(value, dict):
            self.fail("expected a JSON object", key)
        for k in value:
            if k not in allowed:
                self.fail(f"unknown key {k!r}", f"{key}.{k}" if key else k)
        for k in required:
            if k not in value:
                self.fail("missing required field", f"{key}.{k}" if key else k)
        return value

    def number(self, value, key: str, positive=False, nonnegative=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail("expected a finite number", key)
        if positive and value <= 0:
            self.fail("must be > 0", key)
        if nonnegative and value < 0:
            self.fail("must be >= 0", key)
        return float(value)

    def integer(self, value, key: str, minimum=1):
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            self.fail(f"expected an integer >= {minimum}", key)
        return value


def _spectrum(r: _Reader, raw, key: str) -> tuple[str, AngularSpectrum]:
    r.obj(raw, key, allowed=("type", "label", "phi_rms_deg", "theta_rms_deg", "paths"),
          required=("type",))
    kind = raw["type"]
    if kind not in SPECTRUM_TYPES:
        r.fail(f"unknown spectrum type {kind!r}; expected one of {SPECTRUM_TYPES}", f"{key}.type")
    allowed = {"iso3d": (), "iso2d": (), "laplacian": ("phi_rms_deg", "theta_rms_deg"),
               "discrete": ("paths",)}[kind]
    for k in raw:
        if k not in ("type", "label") + allowed:
            r.fail(f"key {k!r} not valid for spectrum type {kind!r}", f"{key}.{k}")
    for k in allowed:
        if k not in raw:
            r.fail("missing required field", f"{key}.{k}")
    if kind == "iso3d":
        spectrum, label = Isotropic3D(), "iso3d"
    elif kind == "iso2d":
        spectrum, label = Isotropic2D(), "iso2d"
    elif kind == "laplacian":
        phi = r.number(raw["phi_rms_deg"], f"{key}.phi_rms_deg", positive=True)
        theta = r.number(raw["theta_rms_deg"], f"{key}.theta_rms_deg", positive=True)
        spectrum = Laplacian.from_degrees(phi, theta)
        label = f"laplacian_{phi:g}_{theta:g}"
    else:
        paths = raw["paths"]
        if not isinstance(paths, list) or not paths:
            r.fail("expected a non-empty list of paths", f"{key}.paths")
        triples = []
        for i, p in enumerate(paths):
            pk = f"{key}.paths[{i}]"
            r.obj(p, pk, allowed=("power", "az_deg", "el_deg"), required=("power", "az_deg", "el_deg"))
            triples.append((
                r.number(p["power"], f"{pk}.power", positive=True),
                r.number(p["az_deg"], f"{pk}.az_deg"),
                r.number(p["el_deg"], f"{pk}.el_deg"),
            ))
        try:
            spectrum = Discrete.from_degrees(triples)
        except DomainError as exc:
            r.fail(str(exc), f"{key}.paths")
        label = f"discrete_{len(triples)}"
    if "label" in raw:
        if not isinstance(raw["label"], str) or not raw["label"]:
            r.fail("label must be a non-empty string", f"{key}.label")
        label = raw["label"]
    return label, spectrum


def _unit_factor(r: _Reader, raw: dict, key: str, wavelength: float) -> float:
    unit = raw.get("unit", "wavelength")
    if unit not in ("wavelength", "m"):
        r.fail("unit must be 'wavelength' or 'm'", f"{key}.unit")
    return 1.0 / wavelength if unit == "m" else 1.0


def parse_config_text(text: str) -> SweepSpec:
    r = _Reader(text)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    r.obj(raw, "", allowed=("scenario", "spectra", "spectrum", "axis", "grid", "outputs",
                            "distance", "mc"), required=("scenario", "grid"))

    sc = r.obj(raw["scenario"], "scenario",
               allowed=("snr_x_db", "snr_y_db", "snr_z_db", "wavelength_m", "power"),
               required=("snr_x_db", "snr_y_db", "snr_z_db", "wavelength_m"))
    power = r.number(sc.get("power", 1.0), "scenario.power", positive=True)
    noise = {
        name: power / db_to_linear(r.number(sc[f"snr_{name[-1]}_db"], f"scenario.snr_{name[-1]}_db"))
        for name in ("n_x", "n_y", "n_z")
    }
    wavelength = r.number(sc["wavelength_m"], "scenario.wavelength_m", positive=True)
    scenario = Scenario(power, wavelength=wavelength, **noise)

    if ("spectra" in raw) == ("spectrum" in raw):
        r.fail("give exactly one of 'spectra' or 'spectrum'", "spectra")
    if "spectrum" in raw:
        spectra = [_spectrum(r, raw["spectrum"], "spectrum")]
    else:
        if not isinstance(raw["spectra"], list) or not raw["spectra"]:
            r.fail("expected a non-empty list", "spectra")
        spectra = [_spectrum(r, s, f"spectra[{i}]") for i, s in enumerate(raw["spectra"])]
    labels = [label for label, _ in spectra]
    if len(set(labels)) != len(labels):
        r.fail("spectrum labels must be unique", "spectra")

    axis = raw.get("axis", [1, 0, 0])
    if not isinstance(axis, list) or len(axis) != 3:
        r.fail("expected a list of three numbers", "axis")
    axis = np.array([r.number(a, "axis") for a in axis])
    norm = float(np.linalg.norm(axis))
    if norm == 0.0:
        r.fail("axis must be nonzero", "axis")
    axis = tuple(float(a) for a in axis / norm)

    g = r.obj(raw["grid"], "grid", allowed=("start", "stop", "step", "unit"),
              required=("start", "stop", "step"))
    factor = _unit_factor(r, g, "grid", wavelength)
    start = r.number(g["start"], "grid.start", nonnegative=True) * factor
    stop = r.number(g["stop"], "grid.stop", nonnegative=True) * factor
    step = r.number(g["step"], "grid.step", positive=True) * factor
    if stop < start:
        r.fail("stop must be >= start", "grid.stop")
    grid = Grid(start, stop, step)

    outputs = raw.get("outputs", list(OUTPUTS))
    if not isinstance(outputs, list) or not outputs or any(o not in OUTPUTS for o in outputs):
        r.fail(f"outputs must be a non-empty subset of {OUTPUTS}", "outputs")

    criterion, target = "positive_lb", None
    if "distance" in raw:
        dist = r.obj(raw["distance"], "distance", allowed=("criterion", "target_bits"))
        criterion = dist.get("criterion", criterion)
        if criterion not in CRITERIA:
            r.fail(f"criterion must be one of {CRITERIA}", "distance.criterion")
        if "target_bits" in dist:
            target = r.number(dist["target_bits"], "distance.target_bits")
        if criterion == "lb_target" and target is None:
            r.fail("lb_target needs target_bits", "distance.target_bits")

    mc = McSettings()
    if "mc" in raw:
        m = r.obj(raw["mc"], "mc", allowed=("num_paths", "num_observations", "seed", "distances",
                                            "unit", "frozen_directions"))
        mfactor = _unit_factor(r, m, "mc", wavelength)
        distances = m.get("distances", list(DEFAULT_MC_DISTANCES))
        if not isinstance(distances, list) or not distances:
            r.fail("expected a non-empty list", "mc.distances")
        seed = m.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            r.fail("seed must be an integer in [0, 2**64)", "mc.seed")
        frozen = m.get("frozen_directions", False)
        if not isinstance(frozen, bool):
            r.fail("expected true or false", "mc.frozen_directions")
        mc = McSettings(
            num_paths=r.integer(m.get("num_paths", 64), "mc.num_paths"),
            num_observations=r.integer(m.get("num_observations", 1_000_000), "mc.num_observations"),
            seed=seed,
            distances=tuple(r.number(d, "mc.distances", nonnegative=True) * mfactor
                            for d in distances),
            frozen_directions=frozen,
        )

    resolved = {
        "scenario": {"power": scenario.power, "n_x": scenario.n_x, "n_y": scenario.n_y,
                     "n_z": scenario.n_z, "wavelength_m": wavelength},
        "spectra": [{"label": label, "spectrum": repr(s)} for label, s in spectra],
        "axis": list(axis),
        "grid_wavelengths": {"start": start, "stop": stop, "step": step},
        "outputs": list(outputs),
        "distance": {"criterion": criterion, "target_bits": target},
        "mc": {"num_paths": mc.num_paths, "num_observations": mc.num_observations,
               "seed": mc.seed, "distances_wavelengths": list(mc.distances),
               "frozen_directions": mc.frozen_directions},
        "source": raw,
    }
    return SweepSpec(scenario, tuple(spectra), axis, grid, tuple(outputs), criterion, target,
                     mc, resolved)


def parse_config(path) -> SweepSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config_text(text)
