import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from skcprop import (
    DomainError,
    NumericalError,
    Scenario,
    bounds_report,
    covariances,
    eve_mi_asymptote,
    lower_bound,
    mi_xy,
    mi_xy_given_z,
    mi_xz,
    mi_yz,
    nz_threshold,
    rho_sq_max,
    tight_capacity,
    upper_bound,
)
from skcprop.bounds import hermitian_det, lower_bound_single_log

REF = Scenario(10.0, 1.0, 1.0, 0.1)


def _h(c):
    """Differential entropy (bits) of a ZMCSCG vector with covariance c."""
    sign, logdet = np.linalg.slogdet(math.pi * math.e * np.asarray(c))
    return logdet / math.log(2)


def _entropy_oracle(s, rho):
    p = s.power
    c = np.array([[p + s.n_x, p, rho * p],
                  [p, p + s.n_y, rho * p],
                  [np.conj(rho) * p, np.conj(rho) * p, p + s.n_z]], dtype=complex)
    hx, hy, hz = (_h(c[i:i + 1, i:i + 1]) for i in range(3))
    hxy = _h(c[np.ix_([0, 1], [0, 1])])
    hxz = _h(c[np.ix_([0, 2], [0, 2])])
    hyz = _h(c[np.ix_([1, 2], [1, 2])])
    hxyz = _h(c)
    return {"xy": hx + hy - hxy, "xz": hx + hz - hxz, "yz": hy + hz - hyz,
            "xy_given_z": hxz + hyz - hz - hxyz}


positive = st.floats(1e-3, 1e3)
scenarios = st.builds(Scenario, positive, positive, positive, positive)
rhos = st.builds(lambda m, a: cmath.rect(m, a), st.floats(0.0, 1.0), st.floats(-math.pi, math.pi))


def test_reference_values():
    rho = 0.9
    assert mi_xy(REF) == pytest.approx(math.log2(1 + 100 / 21), rel=1e-14)
    assert mi_xy(REF) == pytest.approx(2.52655, abs=1e-5)
    assert mi_xz(REF, rho) == pytest.approx(1.88402, abs=1e-5)
    assert lower_bound(REF, rho) == pytest.approx(0.64252, abs=1e-5)
    assert mi_xy_given_z(REF, rho) == pytest.approx(0.84036, abs=1e-5)
    assert upper_bound(REF, rho) == mi_xy_given_z(REF, rho)
    assert nz_threshold(REF, rho) == pytest.approx(0.81 - 10 * 0.19, rel=1e-14)
    assert rho_sq_max(REF) == pytest.approx(10.1 / 11, rel=1e-14)
    assert eve_mi_asymptote(0.9) == pytest.approx(-math.log2(0.19), rel=1e-14)


@settings(max_examples=300, deadline=None)
@given(scenarios, rhos)
def test_matches_entropy_oracle(s, rho):
    assume(abs(rho) < 0.999)
    o = _entropy_oracle(s, rho)
    got = {"xy": mi_xy(s), "xz": mi_xz(s, rho), "yz": mi_yz(s, rho), "xy_given_z": mi_xy_given_z(s, rho)}
    for k in o:
        assert got[k] == pytest.approx(o[k], abs=1e-7 * (1 + abs(o[k])))


def test_covariance_matrices():
    rho = 0.6 + 0.3j
    c = covariances(REF, rho)
    assert np.allclose(np.diag(c.c_xyz), [11, 11, 10.1])
    assert c.c_xyz[0, 2] == pytest.approx(rho * 10)  # E[x z*]
    assert np.allclose(c.c_xyz, c.c_xyz.conj().T)
    assert np.all(np.linalg.eigvalsh(c.c_xyz) >= -1e-12)
    assert np.allclose(c.c_xy, [[11, 10], [10, 11]])


@settings(max_examples=200, deadline=None)
@given(scenarios, rhos)
def test_hermitian_det_matches_numpy(s, rho):
    c = covariances(s, rho)
    for m in (c.c_xy, c.c_xz, c.c_yz, c.c_xyz):
        ref = np.linalg.det(m).real
        scale = np.linalg.norm(m) ** m.shape[0]
        assert hermitian_det(m) == pytest.approx(ref, abs=1e-12 * scale)


def test_hermitian_det_rejects_non_hermitian():
    with pytest.raises((NumericalError, DomainError)):
        hermitian_det(np.array([[1j, 0], [0, 1]]))


@settings(max_examples=300, deadline=None)
@given(scenarios, rhos)
def test_lower_not_above_upper(s, rho):
    assert lower_bound(s, rho) <= upper_bound(s, rho) + 1e-10
    assert upper_bound(s, rho) <= mi_xy(s) + 1e-10


@settings(max_examples=300, deadline=None)
@given(scenarios, rhos)
def test_single_log_form_agrees(s, rho):
    assert lower_bound_single_log(s, rho) == pytest.approx(lower_bound(s, rho), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(scenarios, st.floats(0.0, 1.0))
def test_phase_invariance(s, m):
    ref = bounds_report(s, m).as_dict()
    for k in range(8):
        rep = bounds_report(s, cmath.rect(m, 2 * math.pi * k / 8)).as_dict()
        for key in ("i_xy", "i_xz", "i_yz", "i_xy_given_z", "lower_bound", "upper_bound"):
            assert rep[key] == pytest.approx(ref[key], abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(scenarios, rhos, st.floats(1e-3, 1e3))
def test_scale_invariance(s, rho, c):
    a, b = bounds_report(s, rho).as_dict(), bounds_report(s.scaled(c), rho).as_dict()
    for key in ("i_xy", "i_xz", "i_yz", "i_xy_given_z", "lower_bound", "upper_bound"):
        assert b[key] == pytest.approx(a[key], abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(scenarios, rhos)
def test_lower_bound_nondecreasing_in_eve_noise(s, rho):
    grid = np.logspace(-3, 3, 40)
    lb = [lower_bound(s.with_noise(n_z=n), rho) for n in grid]
    assert all(b >= a - 1e-12 for a, b in zip(lb, lb[1:]))


@pytest.mark.parametrize("rho", [0.0, 0.5, 0.9, 0.999])
@pytest.mark.parametrize("noise", [(1.0, 1.0, 1.0), (0.1, 2.0, 0.01)])
def test_lower_bound_grows_with_power(rho, noise):
    lb = [lower_bound(Scenario(p, *noise), rho) for p in (1.0, 1e3, 1e6)]
    assert lb[2] > lb[1] > lb[0]


def test_threshold_brackets_sign_change(rng):
    for _ in range(100):
        p, nx, ny = 10 ** rng.uniform(-3, 3, 3)
        t = rng.uniform(0.01, 0.99) * min(nx, ny)
        r2 = (t + p) / (min(nx, ny) + p)
        s = Scenario(p, nx, ny, 1.0)
        thr = nz_threshold(s, math.sqrt(r2))
        assert thr == pytest.approx(t, rel=1e-9)
        eps = 1e-6 * (1 + abs(thr))
        assert lower_bound(s.with_noise(n_z=thr - eps), math.sqrt(r2)) < 0
        assert lower_bound(s.with_noise(n_z=thr + eps), math.sqrt(r2)) > 0


def test_rho_sq_max_clamped():
    assert rho_sq_max(Scenario(1.0, 0.1, 0.1, 0.01)) == pytest.approx(1.01 / 1.1)
    assert rho_sq_max(Scenario(1.0, 0.1, 0.1, 5.0)) == 1.0


def test_tight_cases():
    s = Scenario(1.0, 0.1, 0.1, 0.01)
    assert tight_capacity(s, 0.0, "independent_eve") == pytest.approx(mi_xy(s))
    bob = s.with_noise(n_y=0.0)
    assert tight_capacity(bob, 0.7, "noiseless_bob") == pytest.approx(lower_bound(bob, 0.7), abs=1e-12)
    assert tight_capacity(bob, 0.7, "noiseless_bob") == pytest.approx(upper_bound(bob, 0.7), abs=1e-12)
    alice = s.with_noise(n_x=0.0)
    assert tight_capacity(alice, 0.7, "noiseless_alice") == pytest.approx(lower_bound(alice, 0.7), abs=1e-12)
    with pytest.raises(DomainError):
        tight_capacity(s, 0.7, "independent_eve")
    with pytest.raises(DomainError):
        tight_capacity(s, 0.7, "noiseless_bob")
    with pytest.raises(DomainError):
        tight_capacity(s, 0.7, "unknown")


@settings(max_examples=100, deadline=None)
@given(scenarios, rhos)
def test_markov_chain_when_bob_is_noiseless(s, rho):
    # X - Y - Z once Y = H, so I(X;Y|Z) = I(X;Y) - I(X;Z) by the chain rule
    b = s.with_noise(n_y=0.0)
    assert mi_xy_given_z(b, rho) == pytest.approx(mi_xy(b) - mi_xz(b, rho), abs=1e-9 * (1 + mi_xy(b)))


def test_degenerate_cases():
    s = Scenario(1.0, 0.0, 0.0, 0.1)
    assert s.degenerate
    assert mi_xy(s) == math.inf
    assert mi_xz(Scenario(1.0, 0.0, 0.1, 0.0), 1.0) == math.inf
    assert mi_xz(REF, 0.0) == 0.0
    assert eve_mi_asymptote(1.0) == math.inf


@pytest.mark.parametrize("args", [(0.0, 1, 1, 1), (1, -1, 1, 1), (1, 1, math.nan, 1), (math.inf, 1, 1, 1)])
def test_scenario_validation(args):
    with pytest.raises(DomainError):
        Scenario(*args)


def test_rho_out_of_range():
    with pytest.raises((DomainError, NumericalError)):
        mi_xz(REF, 1.5)


def test_asymptote_approached():
    s = Scenario(1e9, 1.0, 1.0, 1.0)
    assert abs(mi_xz(s, 0.9) - eve_mi_asymptote(0.9)) < 1e-3


@settings(max_examples=300, deadline=None)
@given(scenarios, rhos)
def test_conditional_form_matches_determinant_ratio(s, rho):
    from skcprop.bounds import det_pair_z, det_xyz, rho_abs2
    r2 = rho_abs2(rho)
    ratio = det_pair_z(s, s.n_x, r2) * det_pair_z(s, s.n_y, r2) / ((s.power + s.n_z) * det_xyz(s, r2))
    assert mi_xy_given_z(s, rho) == pytest.approx(math.log2(ratio), abs=1e-12 * (1 + math.log2(ratio)))


def test_conditional_equals_unconditional_without_correlation():
    for s in (REF, Scenario(1.0, 0.1, 0.1, 0.01), Scenario(3e2, 7e-3, 0.4, 11.0)):
        assert mi_xy_given_z(s, 0.0) == mi_xy(s)
        assert lower_bound(s, 0.0) <= upper_bound(s, 0.0) <= mi_xy(s)
