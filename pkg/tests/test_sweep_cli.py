import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from skcprop import Isotropic2D, lower_bound, rho_quadrature
from skcprop.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from skcprop.config import parse_config_text
from skcprop.correlation import Displacement
from skcprop.errors import QuadratureError
from skcprop.sweep import (
    RHO_COLUMNS,
    run_rho_sweep,
    run_skc_sweep,
    skc_columns,
    solve_admissible_distance,
    to_csv,
)

GOLDEN = Path(__file__).parent / "golden"


def make_spec(spectra, grid=(0.0, 10.0, 0.5), **extra):
    doc = {
        "scenario": {"snr_x_db": 10, "snr_y_db": 10, "snr_z_db": 20, "wavelength_m": 0.3},
        "spectra": spectra,
        "grid": dict(zip(("start", "stop", "step"), grid)),
    }
    doc.update(extra)
    return parse_config_text(json.dumps(doc))


def write_config(tmp_path, spec_doc):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(spec_doc))
    return p


def test_rho_sweep_anchors():
    rows = run_rho_sweep(make_spec([{"type": "iso3d"}, {"type": "iso2d"}]))
    by = {(r["spectrum"], r["distance_wl"]): r for r in rows}
    assert by[("iso3d", 0.5)]["rho_abs"] < 1e-15
    assert by[("iso2d", 0.0)]["rho_abs"] == 1.0
    assert all(r["status"] == "ok" for r in rows)


def test_skc_rows_are_ordered(reference_scenario):
    spec = make_spec([{"type": "iso3d"}, {"type": "iso2d"},
                      {"type": "laplacian", "phi_rms_deg": 10, "theta_rms_deg": 5}], grid=(0, 10, 0.25))
    for r in run_skc_sweep(spec):
        assert r.lower_bound <= r.upper_bound + 1e-12
        assert r.upper_bound <= r.i_xy + 1e-12
        assert r.i_xy == pytest.approx(2.5265458144958344, abs=1e-12)


def test_far_iso2d_bounds_near_reference():
    r = run_skc_sweep(make_spec([{"type": "iso2d"}], grid=(50, 50, 1)))[0]
    assert abs(r.rho_abs - 0.0318) < 5e-4
    assert r.i_xy - r.lower_bound < 0.02
    assert r.i_xy - r.upper_bound < 0.02


def test_zero_distance_has_no_positive_lower_bound():
    r = run_skc_sweep(make_spec([{"type": "iso3d"}], grid=(0, 0, 1)))[0]
    assert r.lower_bound <= 0.0


def test_admissible_distance_uncorrelated_eve_is_grid_start():
    spec = make_spec([{"type": "iso3d"}], grid=(0.2, 5, 0.1))
    res = solve_admissible_distance(spec, "positive_lb", rho_fn=lambda d: 0j)[0]
    assert res.status == "ok" and res.distance_wl == 0.2


def test_admissible_distance_holds_beyond_answer():
    spec = make_spec([{"type": "iso2d"}, {"type": "laplacian", "phi_rms_deg": 1, "theta_rms_deg": 5},
                      {"type": "laplacian", "phi_rms_deg": 40, "theta_rms_deg": 5}], grid=(0, 10, 0.01))
    res = {r.spectrum: r for r in solve_admissible_distance(spec, "positive_lb")}
    iso2 = res["iso2d"]
    assert iso2.status == "ok" and iso2.distance_wl < 1.0
    s = spec.scenario
    after = np.arange(iso2.distance_wl, 10.0, 0.005)
    assert all(lower_bound(s, complex(rho_quadrature(Isotropic2D(), Displacement(d, 0, 0)))) > 0 for d in after[:200])
    assert lower_bound(s, rho_quadrature(Isotropic2D(), Displacement(iso2.distance_wl - 2e-4, 0, 0))) <= 0
    assert res["laplacian_1_5"].distance_wl > res["laplacian_40_5"].distance_wl


def test_admissible_distance_unachievable():
    spec = make_spec([{"type": "laplacian", "phi_rms_deg": 1, "theta_rms_deg": 5}], grid=(0, 3, 0.1))
    res = solve_admissible_distance(spec, "lb_target", 2.0)[0]
    assert res.status == "unachievable"
    assert math.isnan(res.distance_wl)
    assert "grid end" in res.diagnostics


def test_csv_round_trip():
    rows = run_skc_sweep(make_spec([{"type": "laplacian", "phi_rms_deg": 40, "theta_rms_deg": 5}],
                                   grid=(0, 3, 0.1)))
    cols = skc_columns(("rho", "bounds", "threshold"))
    text = to_csv(rows, cols)
    assert "\r" not in text
    back = list(csv.DictReader(io.StringIO(text)))
    for row, parsed in zip(rows, back):
        for c in cols[1:-1]:
            v = getattr(row, c)
            assert float(parsed[c]) == pytest.approx(v, rel=1e-12, abs=0.0) or float(parsed[c]) == v


def test_infinity_rendered():
    assert to_csv([{"a": math.inf, "b": math.nan}], ("a", "b")) == "a,b\ninf,nan\n"


def test_closed_form_and_quadrature_sweeps_agree():
    spec = make_spec([{"type": "iso2d"}], grid=(0, 10, 0.1))
    closed = run_skc_sweep(spec)
    quad = run_skc_sweep(spec, rho_fn=lambda label, sp, d: rho_quadrature(sp, Displacement(d, 0, 0)))
    cols = ("rho_abs", "i_xz", "i_yz", "i_xy_given_z", "lower_bound", "upper_bound", "nz_threshold")
    for a, b in zip(closed, quad):
        for c in cols:
            assert abs(getattr(a, c) - getattr(b, c)) <= 1e-6


def test_quadrature_failure_is_recorded_per_row(monkeypatch):
    import skcprop.sweep as sweep_mod

    def boom(spectrum, disp):
        if disp.dx > 1.0:
            raise QuadratureError("budget exhausted")
        return 0.5 + 0j

    monkeypatch.setattr(sweep_mod, "correlation", boom)
    spec = make_spec([{"type": "iso3d"}], grid=(0, 2, 0.5))
    rows = run_skc_sweep(spec)
    assert [r.status == "ok" for r in rows] == [True, True, True, False, False]
    assert math.isnan(rows[-1].lower_bound)
    assert run_rho_sweep(spec)[-1]["status"].startswith("numerical-failure")


def test_golden_skc_regression():
    # baseline produced by this package; a regression guard, not external ground truth
    spec_path = GOLDEN / "spread_coarse.json"
    from skcprop.config import parse_config
    rows = run_skc_sweep(parse_config(spec_path))
    with open(GOLDEN / "skc_spread.csv", newline="") as fh:
        ref = list(csv.DictReader(fh))
    assert len(ref) == len(rows)
    for row, r in zip(rows, ref):
        assert row.spectrum == r["spectrum"]
        for c in ("rho_abs", "i_xz", "lower_bound", "upper_bound"):
            assert getattr(row, c) == pytest.approx(float(r[c]), abs=1e-9)


# --- command line -----------------------------------------------------------

SMALL = {
    "scenario": {"snr_x_db": 10, "snr_y_db": 10, "snr_z_db": 20, "wavelength_m": 0.3},
    "spectra": [{"type": "iso2d"}, {"type": "laplacian", "phi_rms_deg": 10, "theta_rms_deg": 5}],
    "grid": {"start": 0, "stop": 2, "step": 0.25},
    "mc": {"num_paths": 64, "num_observations": 200000, "seed": 7, "distances": [0.5]},
}


@pytest.mark.parametrize("cmd", ["rho-sweep", "skc-sweep", "distance"])
def test_cli_sweeps_write_csv_and_sidecar(tmp_path, cmd):
    cfg = write_config(tmp_path, SMALL)
    out = tmp_path / "out" / "result.csv"
    assert main([cmd, "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    header = out.read_text().splitlines()[0].split(",")
    if cmd == "rho-sweep":
        assert tuple(header) == RHO_COLUMNS
    assert json.loads(out.with_suffix(".config.json").read_text())["scenario"]["n_z"] == pytest.approx(0.01)


def test_cli_distance_options(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    out = tmp_path / "d.csv"
    assert main(["distance", "--config", str(cfg), "--out", str(out), "--criterion", "lb_target"]) == EXIT_CONFIG
    assert main(["distance", "--config", str(cfg), "--out", str(out),
                 "--criterion", "lb_target", "--target", "0.5"]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert {r["criterion"] for r in rows} == {"lb_target"}


def test_cli_config_errors(tmp_path, capsys):
    bad = write_config(tmp_path, dict(SMALL, extra=1))
    assert main(["skc-sweep", "--config", str(bad), "--out", str(tmp_path / "o.csv")]) == EXIT_CONFIG
    assert "extra" in capsys.readouterr().err
    assert main(["skc-sweep", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o.csv")]) == EXIT_CONFIG
    good = write_config(tmp_path, SMALL)
    assert main(["mc-validate", "--config", str(good), "--out", str(tmp_path / "o.json"), "--seed", "-3"]) == EXIT_CONFIG


def test_cli_numerical_failure(tmp_path, monkeypatch):
    import skcprop.sweep as sweep_mod

    def boom(spectrum, disp):
        raise QuadratureError("budget exhausted")

    monkeypatch.setattr(sweep_mod, "correlation", boom)
    cfg = write_config(tmp_path, SMALL)
    assert main(["skc-sweep", "--config", str(cfg), "--out", str(tmp_path / "o.csv")]) == EXIT_NUMERICAL
    assert main(["distance", "--config", str(cfg), "--out", str(tmp_path / "d.csv")]) == EXIT_NUMERICAL


def test_cli_mc_validate_pass_and_fail(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, SMALL)
    out = tmp_path / "mc.json"
    assert main(["mc-validate", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["pass"] and len(doc["reports"]) == 2

    import skcprop.sweep as sweep_mod
    real = sweep_mod.validate
    monkeypatch.setattr(sweep_mod, "validate", lambda c: real(c, analytic_rho=0.99))
    assert main(["mc-validate", "--config", str(cfg), "--out", str(out)]) == EXIT_VALIDATION
    assert json.loads(out.read_text())["pass"] is False


def test_cli_small_sample_warning(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    out = tmp_path / "mc.json"
    main(["mc-validate", "--config", str(cfg), "--out", str(out), "--samples", "100"])
    doc = json.loads(out.read_text())
    assert all(r["num_observations"] == 100 for r in doc["reports"])
    main(["mc-validate", "--config", str(cfg), "--out", str(out), "--samples", "50"])
    assert all(r["warnings"] for r in json.loads(out.read_text())["reports"])


def test_cli_seed_changes_estimates_not_verdict(tmp_path):
    doc = dict(SMALL, spectra=[{"type": "laplacian", "phi_rms_deg": 10, "theta_rms_deg": 5}],
               mc=dict(SMALL["mc"], num_observations=10**6, distances=[2.0]))
    cfg = write_config(tmp_path, doc)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["mc-validate", "--config", str(cfg), "--out", str(a), "--seed", "1"]) == EXIT_OK
    assert main(["mc-validate", "--config", str(cfg), "--out", str(b), "--seed", "2"]) == EXIT_OK
    ra, rb = (json.loads(p.read_text())["reports"][0] for p in (a, b))
    assert ra["checks"][1]["estimate"] != rb["checks"][1]["estimate"]
    assert [c["pass"] for c in ra["checks"]] == [c["pass"] for c in rb["checks"]]
