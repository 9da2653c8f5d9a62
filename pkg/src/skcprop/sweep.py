"""Distance sweeps, admissible-distance search and Monte Carlo drivers."""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import bounds
from .config import McSettings, SweepSpec
from .correlation import Displacement, correlation
from .errors import NumericalError
from .montecarlo import McConfig, validate

SCAN_STEP = 0.01
BISECT_TOL = 1e-4

RHO_COLUMNS = ("spectrum", "distance_wl", "distance_m", "rho_re", "rho_im", "rho_abs",
               "rho_arg", "status")


@dataclass
class SweepRow:
    spectrum: str
    distance_wl: float
    distance_m: float
    rho_abs: float
    rho_arg: float
    i_xy: float
    i_xz: float
    i_yz: float
    i_xy_given_z: float
    lower_bound: float
    upper_bound: float
    nz_threshold: float
    rho_sq_max: float
    status: str = "ok"


def skc_columns(outputs) -> tuple:
    cols = ["spectrum", "distance_wl", "distance_m"]
    if "rho" in outputs:
        cols += ["rho_abs", "rho_arg"]
    if "bounds" in outputs:
        cols += ["i_xy", "i_xz", "i_yz", "i_xy_given_z", "lower_bound", "upper_bound"]
    if "threshold" in outputs:
        cols += ["nz_threshold", "rho_sq_max"]
    return tuple(cols + ["status"])


def format_value(value) -> str:
    """17 significant digits; ``inf``/``nan`` spelled out."""
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        d = row if isinstance(row, dict) else asdict(row)
        writer.writerow([format_value(d[c]) for c in columns])
    return buf.getvalue()


def _rho(spectrum, spec: SweepSpec, d: float) -> complex:
    return correlation(spectrum, Displacement.along(spec.axis, d))


def run_rho_sweep(spec: SweepSpec) -> list[dict]:
    """Correlation versus distance, one row per grid point per spectrum.

    A quadrature failure is recorded in the row's ``status`` and the sweep
    continues.
    """
    rows = []
    for label, spectrum in spec.spectra:
        for d in spec.grid.points():
            d = float(d)
            try:
                rho = _rho(spectrum, spec, d)
                status = "ok"
            except NumericalError as exc:
                rho, status = complex(math.nan, math.nan), f"numerical-failure: {exc}"
            rows.append({
                "spectrum": label, "distance_wl": d, "distance_m": d * spec.scenario.wavelength,
                "rho_re": rho.real, "rho_im": rho.imag, "rho_abs": abs(rho),
                "rho_arg": cmath.phase(rho) if status == "ok" else math.nan, "status": status,
            })
    return rows


def skc_row(spec: SweepSpec, label: str, d: float, rho: complex) -> SweepRow:
    s = spec.scenario
    rep = bounds.bounds_report(s, rho)
    return SweepRow(
        spectrum=label, distance_wl=d, distance_m=d * s.wavelength,
        rho_abs=abs(rho), rho_arg=cmath.phase(rho),
        i_xy=rep.i_xy, i_xz=rep.i_xz, i_yz=rep.i_yz, i_xy_given_z=rep.i_xy_given_z,
        lower_bound=rep.lower_bound, upper_bound=rep.upper_bound,
        nz_threshold=bounds.nz_threshold(s, rho), rho_sq_max=bounds.rho_sq_max(s),
    )


def run_skc_sweep(spec: SweepSpec, rho_fn=None) -> list[SweepRow]:
    """Key-capacity bounds versus distance.

    ``i_xy`` does not depend on the correlation, so it is the constant
    independent-eavesdropper reference. ``rho_fn(label, spectrum, d)`` may
    replace the default correlation routine.
    """
    rows = []
    for label, spectrum in spec.spectra:
        for d in spec.grid.points():
            d = float(d)
            try:
                rho = rho_fn(label, spectrum, d) if rho_fn else _rho(spectrum, spec, d)
                rows.append(skc_row(spec, label, d, rho))
            except NumericalError as exc:
                nan = math.nan
                rows.append(SweepRow(label, d, d * spec.scenario.wavelength, *([nan] * 10),
                                     status=f"numerical-failure: {exc}"))
    return rows


@dataclass(frozen=True)
class AdmissibleDistance:
    spectrum: str
    criterion: str
    target_bits: float | None
    distance_wl: float
    distance_m: float
    status: str
    lower_bound_at_distance: float
    diagnostics: str = ""


def _criterion(spec: SweepSpec, criterion: str, target):
    s = spec.scenario
    if criterion == "positive_lb":
        return lambda rho: bounds.lower_bound(s, rho) > 0.0
    if criterion == "lb_target":
        if target is None:
            raise ValueError("lb_target needs a target in bits")
        return lambda rho: bounds.lower_bound(s, rho) >= target
    raise ValueError(f"unknown criterion {criterion!r}")


def solve_admissible_distance(spec: SweepSpec, criterion: str | None = None, target=None,
                              spectrum=None, rho_fn=None) -> list[AdmissibleDistance]:
    """Smallest distance from which the criterion holds over the rest of the grid.

    Correlation curves oscillate, so the first crossing is not enough: the
    answer is the start of the final run of passing scan points (scan step
    ``min(grid.step, 0.01)`` wavelengths), refined by bisection to 1e-4
    wavelengths against the last failing point.
    """
    criterion = criterion or spec.criterion
    target = spec.target_bits if target is None else target
    holds = _criterion(spec, criterion, target)
    grid = spec.grid
    step = min(grid.step, SCAN_STEP)
    n = math.floor((grid.stop - grid.start) / step + 1e-9) + 1
    scan = grid.start + step * np.arange(n)
    if scan[-1] < grid.stop - 1e-12:
        scan = np.append(scan, grid.stop)
    results = []
    for label, sp in spec.spectra:
        if spectrum is not None and label != spectrum:
            continue

        def rho_at(d):
            return rho_fn(d) if rho_fn else _rho(sp, spec, float(d))

        ok = np.array([holds(rho_at(d)) for d in scan])
        lam = spec.scenario.wavelength
        if not ok[-1]:
            results.append(AdmissibleDistance(
                label, criterion, target, math.nan, math.nan, "unachievable",
                bounds.lower_bound(spec.scenario, rho_at(scan[-1])),
                f"criterion fails at grid end {scan[-1]:.6g} wavelengths; "
                f"{int(ok.sum())}/{ok.size} scan points pass",
            ))
            continue
        failing = np.flatnonzero(~ok)
        if failing.size == 0:
            d_star = float(scan[0])
        else:
            lo, hi = float(scan[failing[-1]]), float(scan[failing[-1] + 1])
            while hi - lo > BISECT_TOL:
                mid = 0.5 * (lo + hi)
                if holds(rho_at(mid)):
                    hi = mid
                else:
                    lo = mid
            d_star = hi
        results.append(AdmissibleDistance(
            label, criterion, target, d_star, d_star * lam, "ok",
            bounds.lower_bound(spec.scenario, rho_at(d_star)),
        ))
    return results


def run_mc_validate(spec: SweepSpec, seed: int | None = None, samples: int | None = None):
    """Monte Carlo validation for every spectrum at every configured distance."""
    mc: McSettings = spec.mc
    if seed is not None:
        mc = replace(mc, seed=seed)
    if samples is not None:
        mc = replace(mc, num_observations=samples)
    reports = []
    for label, sp in spec.spectra:
        for d in mc.distances:
            cfg = McConfig(
                scenario=spec.scenario, spectrum=sp, displacement=Displacement.along(spec.axis, d),
                num_paths=mc.num_paths, num_observations=mc.num_observations, seed=mc.seed,
                frozen_directions=mc.frozen_directions,
            )
            report = validate(cfg)
            report.spectrum = label
            reports.append(report)
    return reports
