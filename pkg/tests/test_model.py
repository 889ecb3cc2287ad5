import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dressedspin.model import (
    DriveSpec,
    SystemParams,
    build_lab_hamiltonian,
    build_rwa_hamiltonian,
    coupling_factor,
    crosstalk_bound,
    dressed_states,
    effective_coupling,
    hh_matching,
    single_spin_drive,
)
from dressedspin.spinops import herm_propagator, is_hermitian, ket

TWO_PI = 2 * math.pi


def idx(a, b):
    return 3 * {"+1": 0, "0": 1, "-1": 2}[a] + {"+1": 0, "0": 1, "-1": 2}[b]


# ------------------------------------------------------------ parameters


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(D=0.0)
    with pytest.raises(ValueError):
        SystemParams(t2star_A=-1.0)
    SystemParams(nu_dip=-0.3)
    with pytest.raises(ValueError):
        DriveSpec("B", "plus", -1.0)
    with pytest.raises(ValueError):
        DriveSpec("C", "plus", 1.0)


def test_default_lines_60_mhz_apart():
    p = SystemParams()
    assert p.transition_frequency("A", "plus") - p.transition_frequency("B", "plus") == pytest.approx(60.0)


# ---------------------------------------------------------- lab frame


def test_lab_diagonal_difference():
    p = SystemParams(nu_dip=0.31)
    h = build_lab_hamiltonian(p, [], 0.123)
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    e = np.diag(h).real
    diff = e[idx("+1", "+1")] - e[idx("+1", "0")]
    assert diff == pytest.approx(TWO_PI * (p.D + p.zeemanB + p.nu_dip), rel=1e-13)


def test_lab_separable_spectrum():
    p = SystemParams(nu_dip=0.0)
    h = build_lab_hamiltonian(p, [], 0.0)
    la = TWO_PI * np.array([p.D + p.zeemanA, 0.0, p.D - p.zeemanA])
    lb = TWO_PI * np.array([p.D + p.zeemanB, 0.0, p.D - p.zeemanB])
    expect = np.sort((la[:, None] + lb[None, :]).ravel())
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h)), expect, rtol=1e-13)


def test_lab_drive_vanishes_at_cosine_zero():
    p = SystemParams()
    d = DriveSpec("A", "plus", 5.0)
    f = p.transition_frequency("A", "plus")
    t = 0.25 / f  # cos(2 pi f t) = 0
    h = build_lab_hamiltonian(p, [d], t)
    np.testing.assert_allclose(h, build_lab_hamiltonian(p, [], t), atol=1e-9)
    assert is_hermitian(build_lab_hamiltonian(p, [d], 0.37))


# ------------------------------------------------------------ RWA frame


def test_rwa_pi_pulse():
    p = SystemParams(nu_dip=0.0)
    om = 4.0
    h = build_rwa_hamiltonian(p, [DriveSpec("B", "plus", om)])
    psi = herm_propagator(h, 1 / (2 * om)) @ np.kron(ket("0"), ket("0"))
    assert abs(psi[idx("0", "+1")]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_rwa_dressed_splitting():
    op, om = 9.59, 4.13
    ev = np.linalg.eigvalsh(single_spin_drive(op, om))
    assert ev[-1] - ev[0] == pytest.approx(TWO_PI * math.hypot(op, om), rel=1e-12)
    p = SystemParams(nu_dip=0.0)
    h = build_rwa_hamiltonian(p, [DriveSpec("B", "plus", op), DriveSpec("B", "minus", om)])
    ev9 = np.linalg.eigvalsh(h)
    assert ev9[-1] - ev9[0] == pytest.approx(TWO_PI * math.hypot(op, om), rel=1e-12)


def test_rwa_undriven_is_diagonal_ising():
    p = SystemParams(nu_dip=0.2)
    h = build_rwa_hamiltonian(p, [])
    sz = np.array([1.0, 0.0, -1.0])
    np.testing.assert_allclose(h, np.diag(TWO_PI * 0.2 * np.kron(sz, sz)))


def test_rwa_duplicate_drive_rejected():
    with pytest.raises(ValueError):
        build_rwa_hamiltonian(SystemParams(), [DriveSpec("B", "plus", 1.0), DriveSpec("B", "plus", 2.0)])


def test_rwa_block_separable_without_coupling():
    p = SystemParams(nu_dip=0.0)
    da, db = DriveSpec("A", "plus", 3.0, 0.4, 0.3), DriveSpec("B", "minus", 5.0)
    u = herm_propagator(build_rwa_hamiltonian(p, [da, db]), 0.77)
    ua = herm_propagator(build_rwa_hamiltonian(p, [da]), 0.77)[::3, ::3]
    ub = herm_propagator(build_rwa_hamiltonian(p, [db]), 0.77)[:3, :3]
    np.testing.assert_allclose(u, np.kron(ua, ub), atol=1e-10)


# --------------------------------------------------------- closed forms


def test_effective_coupling_examples():
    assert effective_coupling(7.0, 7.0, 0.3) == 0.0
    assert effective_coupling(7.0, 0.0, 0.3) == pytest.approx(0.15)
    assert effective_coupling(10.0, 8.0, 0.390) == pytest.approx(0.0428, abs=5e-5)
    with pytest.raises(ValueError):
        effective_coupling(0.0, 0.0, 0.3)


def test_coupling_factor_ensemble_drive():
    assert coupling_factor(10.0, 8.0) == pytest.approx(36 / 328)


def test_dressed_states_examples():
    s = math.sqrt(0.5)
    pair = dressed_states(3.0, 0.0)
    np.testing.assert_allclose(pair.plus_d, [s, s, 0], atol=1e-15)
    np.testing.assert_allclose(pair.minus_d, [s, -s, 0], atol=1e-15)
    pair = dressed_states(2.0, 2.0)
    np.testing.assert_allclose(pair.plus_d, [0.5, s, 0.5], atol=1e-15)
    np.testing.assert_allclose(pair.minus_d, [0.5, -s, 0.5], atol=1e-15)
    with pytest.raises(ValueError):
        dressed_states(0.0, 0.0)


def test_hh_matching_examples():
    assert hh_matching(7.56, 0.0) == pytest.approx(7.56)
    assert hh_matching(9.59, 4.13) == pytest.approx(10.44, abs=0.005)
    assert hh_matching(0.0, 3.3) == pytest.approx(3.3)
    with pytest.raises(ValueError):
        hh_matching(0.0, 0.0)


def test_crosstalk_examples():
    assert crosstalk_bound(10.44, 60.0) == pytest.approx(0.030, abs=5e-4)
    assert crosstalk_bound(0.0, 60.0) == 0.0
    assert crosstalk_bound(6.0, 60.0) == pytest.approx(0.01)
    with pytest.raises(ValueError):
        crosstalk_bound(1.0, 0.0)


# ----------------------------------------------------------- properties

amp = st.floats(0.0, 1e3, allow_nan=False)
nu = st.floats(-5.0, 5.0, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(amp, amp, nu)
def test_property_antisymmetry(a, b, v):
    assume(a * a + b * b > 0)
    assert effective_coupling(a, b, v) == -effective_coupling(b, a, v)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 100), st.floats(0.01, 100), nu, st.floats(0.01, 100))
def test_property_scale_invariance(a, b, v, s):
    assert effective_coupling(s * a, s * b, v) == pytest.approx(effective_coupling(a, b, v), rel=1e-12, abs=1e-15)


@settings(max_examples=300, deadline=None)
@given(amp, amp, nu)
def test_property_bound(a, b, v):
    assume(a * a + b * b > 0)
    assert abs(effective_coupling(a, b, v)) <= abs(v) / 2


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 50), st.floats(0.0, 50))
def test_property_dressed_states_diagonalise(a, b):
    assume(a * a + b * b > 1e-6)
    pair = dressed_states(a, b)
    h = single_spin_drive(a, b)
    vecs = np.column_stack([pair.plus_d, pair.minus_d])
    m = vecs.conj().T @ h @ vecs
    assert abs(m[0, 1]) <= 1e-10 * max(1.0, a, b)
    assert abs(np.vdot(pair.plus_d, pair.minus_d)) <= 1e-10
    for v in (pair.plus_d, pair.minus_d):
        assert abs(np.linalg.norm(v) - 1) <= 1e-10
        np.testing.assert_allclose(h @ v, (np.vdot(v, h @ v)) * v, atol=1e-9 * max(1.0, a, b))
    # drive block spectrum is {0, +-pi*sqrt(a^2 + b^2)}; the analytic value is
    # a sharper oracle than eigvalsh for near-subnormal entries
    top = math.pi * math.hypot(a, b)
    assert np.vdot(pair.plus_d, h @ pair.plus_d).real == pytest.approx(top, abs=1e-10 * max(1, a, b))
    assert np.vdot(pair.minus_d, h @ pair.minus_d).real == pytest.approx(-top, abs=1e-10 * max(1, a, b))
