import math

import numpy as np
import pytest

from dressedspin.experiments import (
    SweepResult,
    alpha_drive,
    run_alpha_sweep,
    run_deer_scan,
    run_hh_rabi_sweep,
    run_hh_transfer,
    run_ramsey_scan,
)
from dressedspin.model import SystemParams, coupling_factor, effective_coupling, hh_matching

P25 = SystemParams(nu_dip=0.25)
P26 = SystemParams(nu_dip=0.26)


# ------------------------------------------------------------------ DEER


@pytest.mark.parametrize("basis, expected", [("SQ", 0.125), ("DQ", 0.5)])
def test_deer_frequency(basis, expected):
    res = run_deer_scan(P25, basis)
    f, err = res.extracted["frequency"]
    assert res.outcome == "ok"
    assert f == pytest.approx(expected, abs=0.005)
    assert abs(f - expected) <= max(err, 1e-6) * 10 + 1e-6
    assert res.signals["P0"].min() >= -1e-9 and res.signals["P0"].max() <= 1 + 1e-9


def test_deer_no_coupling():
    res = run_deer_scan(SystemParams(nu_dip=0.0), "SQ", tau_grid=np.linspace(0.1, 20, 100))
    assert res.outcome == "no-oscillation"


def test_deer_grid_too_short():
    with pytest.raises(ValueError):
        run_deer_scan(P25, "SQ", tau_grid=np.linspace(0.1, 10.0, 50))


def test_deer_parallel_matches_serial():
    grid = np.linspace(0.2, 20.0, 40)
    a = run_deer_scan(P25, "DQ", tau_grid=grid)
    b = run_deer_scan(P25, "DQ", tau_grid=grid, workers=2)
    np.testing.assert_array_equal(a.signals["P0"], b.signals["P0"])
    assert a.extracted == b.extracted


# ---------------------------------------------------------------- Ramsey


@pytest.mark.parametrize(
    "basis, prep, shift",
    [("SQ", "+1", 0.26), ("SQ", "-1", -0.26), ("DQ", "+1", 0.52), ("DQ", "-1", -0.52), ("SQ", "0", 0.0)],
)
def test_ramsey_shift(basis, prep, shift):
    res = run_ramsey_scan(P26, basis, prep)
    s, err = res.extracted["shift"]
    assert s == pytest.approx(shift, abs=0.02)
    assert err >= 0
    assert "target" in res.spectra and "reference" in res.spectra


def test_ramsey_shift_independent_of_offset():
    a = run_ramsey_scan(P26, "SQ", "+1", reference_offset=1.0).value("shift")
    b = run_ramsey_scan(P26, "SQ", "+1", reference_offset=1.7).value("shift")
    assert a == pytest.approx(b, abs=0.0025)


def test_ramsey_nyquist():
    with pytest.raises(ValueError):
        run_ramsey_scan(P26, "DQ", "+1", tau_grid=np.arange(1, 200) * 0.4)


def test_ramsey_envelope_keeps_peak():
    res = run_ramsey_scan(P26, "SQ", "+1", t2star=7.2)
    assert res.value("shift") == pytest.approx(0.26, abs=0.0025)


def test_ramsey_shots_seeded():
    res = run_ramsey_scan(P26, "SQ", "+1", shots=200, seed=1)
    again = run_ramsey_scan(P26, "SQ", "+1", shots=200, seed=1)
    np.testing.assert_array_equal(res.signals["target"], again.signals["target"])
    assert res.value("shift") == pytest.approx(0.26, abs=0.01)


# ----------------------------------------------------------------- alpha


def test_alpha_drive_definition():
    op, om = alpha_drive(0.5, 5.0)
    assert op + om == pytest.approx(10.0)
    assert (op - om) / (op + om) == pytest.approx(0.5)


@pytest.fixture(scope="module")
def alpha_result():
    return run_alpha_sweep(P26, np.linspace(-1, 1, 9))  # includes 0.5


def test_alpha_endpoints_and_zero(alpha_result):
    a = alpha_result.axis
    nu = alpha_result.signals["nu_eff"]
    dq = alpha_result.signals["dq_shift"]
    assert nu[a == 1.0][0] == pytest.approx(0.13, abs=0.005)
    assert nu[a == -1.0][0] == pytest.approx(-0.13, abs=0.005)
    assert dq[a == 1.0][0] == pytest.approx(0.26, abs=0.01)
    assert nu[np.isclose(a, 0.0)][0] == pytest.approx(0.0, abs=0.005)


def test_alpha_half_matches_closed_form(alpha_result):
    a = alpha_result.axis
    i = int(np.argmin(np.abs(a - 0.5)))
    model = effective_coupling(*alpha_drive(a[i], 5.0), 0.26)
    assert model == pytest.approx(0.5 * (2 * 0.5 / (1 + 0.25)) * 0.26, rel=1e-12)
    assert alpha_result.signals["nu_eff"][i] == pytest.approx(model, rel=0.05)


def test_alpha_antisymmetric_and_monotone(alpha_result):
    nu = alpha_result.signals["nu_eff"]
    assert np.max(np.abs(nu + nu[::-1])) <= 0.05 * 0.13
    assert np.all(np.diff(nu) > 0)


def test_alpha_warns_when_weak():
    res = run_alpha_sweep(P26, [0.0, 1.0], omega_scale=1.0)
    assert res.warnings


# ---------------------------------------------------------------- HH dips


def test_hh_dip_shh():
    res = run_hh_rabi_sweep(P26, np.arange(7.0, 8.1, 0.02), (7.56, 0.0))
    assert res.outcome == "ok"
    assert res.value("center") == pytest.approx(7.56, abs=0.05)


def test_hh_dip_dhh():
    res = run_hh_rabi_sweep(P26, np.arange(9.9, 11.0, 0.02), (9.59, 4.13))
    assert res.value("center") == pytest.approx(10.44, abs=0.05)
    assert res.value("center") == pytest.approx(hh_matching(9.59, 4.13), abs=0.05)


def test_hh_no_dip_undriven():
    res = run_hh_rabi_sweep(P26, np.arange(7.0, 8.1, 0.05), (0.0, 0.0), tau_fixed=4.0)
    assert res.outcome == "no-dip"


# --------------------------------------------------------------- transfer


@pytest.fixture(scope="module")
def transfer_pair():
    shh = run_hh_transfer(P26, hh_matching(7.56, 0.0), (7.56, 0.0))
    dhh = run_hh_transfer(P26, hh_matching(9.59, 4.13), (9.59, 4.13))
    return shh, dhh


def test_transfer_shh_rate(transfer_pair):
    shh, _ = transfer_pair
    assert shh.value("frequency") == pytest.approx(0.130, abs=0.005)


def test_transfer_ratio(transfer_pair):
    shh, dhh = transfer_pair
    ratio = dhh.value("frequency") / shh.value("frequency")
    expect = 2 * coupling_factor(9.59, 4.13)
    assert expect == pytest.approx(0.687, abs=0.001)
    assert ratio == pytest.approx(expect, rel=0.05)


def test_transfer_energy_proxy(transfer_pair):
    for res in transfer_pair:
        loss, gain = res.value("A_loss"), res.value("B_gain")
        assert loss > 0.1
        assert gain == pytest.approx(loss, rel=0.05)


def test_transfer_balanced_drive_none():
    om = 8.0
    res = run_hh_transfer(P26, hh_matching(om, om), (om, om))
    assert res.outcome == "no-transfer"


def test_transfer_mismatch_warns():
    res = run_hh_transfer(P26, 9.0, (7.56, 0.0), tau_grid=np.linspace(0.1, 10, 40))
    assert any("match" in w for w in res.warnings)


# ----------------------------------------------------------- SweepResult


def test_sweep_result_invariants():
    with pytest.raises(ValueError):
        SweepResult("x", "tau", "us", [0.0, 1.0, 1.0], {})
    with pytest.raises(ValueError):
        SweepResult("x", "tau", "us", [0.0, 1.0], {"s": [1.0]})
    with pytest.raises(ValueError):
        SweepResult("x", "tau", "us", [0.0, 1.0], {}, {"f": (1.0, -0.1)})
    SweepResult("x", "tau", "us", [2.0, 1.0], {"s": [0.1, 0.2]})


def test_sweep_result_serialisation():
    res = SweepResult("deer", "tau", "us", [0.5, 1.0], {"P0": [0.25, 1.0]}, {"frequency": (0.125, 0.001)})
    lines = res.to_csv().splitlines()
    assert lines[0] == "tau_us,P0"
    assert lines[1] == "0.5,0.25"
    summ = res.to_summary()
    assert summ["extracted"]["frequency"] == {"value": 0.125, "uncertainty": 0.001}
    assert summ["outcome"] == "ok"
