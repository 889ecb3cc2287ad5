import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dressedspin.model import DriveSpec, SystemParams, lab_max_frequency
from dressedspin.propagate import (
    check_state,
    dephase_subspace,
    evolve,
    observe,
    product_state,
    prepare,
    readout_projector,
    run_sequence,
    segment_propagator,
    state_fidelity,
    trajectory,
)
from dressedspin.sequences import Dephase, Prep, PulseSequence, Read, Rot, Segment, make_deer
from dressedspin.spinops import ContractViolation, basis_state, check_unitary, embed, ket, spin1_operator

P = SystemParams(nu_dip=0.25)


def pi_pulse(omega=5.0):
    return PulseSequence((Segment(1 / (2 * omega), (DriveSpec("A", "plus", omega),)),))


def test_empty_sequence_is_identity():
    psi = product_state("+1", "B")
    out = evolve(psi, PulseSequence(()), P)
    np.testing.assert_array_equal(out, psi)


def test_rwa_pi_pulse():
    out = evolve(product_state(), pi_pulse(), SystemParams(nu_dip=0.0))
    assert abs(out[0 * 3 + 1]) ** 2 == pytest.approx(1.0, abs=1e-6)


def test_lab_matches_rwa():
    p = SystemParams(nu_dip=0.0)
    rwa = evolve(product_state(), pi_pulse(5.0), p)
    lab = evolve(product_state(), pi_pulse(5.0), p, mode="lab")
    assert state_fidelity(rwa, lab) >= 0.99


def test_lab_richardson():
    # midpoint stepping is second order: halving the step cuts the error ~4x
    p = SystemParams(nu_dip=0.25)
    seg = Segment(0.02, (DriveSpec("A", "plus", 5.0), DriveSpec("B", "minus", 3.0)))
    h = 1 / (50 * lab_max_frequency(p, seg.drives))
    u1, u2, u4 = (segment_propagator(p, seg, 0.0, "lab", h / k) for k in (1, 2, 4))
    e1 = np.max(np.abs(u1 - u2))
    e2 = np.max(np.abs(u2 - u4))
    assert e2 < e1
    assert 3.0 < e1 / e2 < 5.0


def test_lab_step_too_coarse():
    seg = Segment(0.01, (DriveSpec("A", "plus", 5.0),))
    f = lab_max_frequency(P, seg.drives)
    with pytest.raises(ValueError):
        segment_propagator(P, seg, 0.0, "lab", 1.5 / (50 * f))


def test_unknown_mode():
    with pytest.raises(ValueError):
        evolve(product_state(), pi_pulse(), P, mode="magic")


# ---------------------------------------------------------- observables


def test_observe_examples():
    assert observe(product_state(), readout_projector("A", "P0")) == 1.0
    proj4 = np.diag([1.0] * 4 + [0.0] * 5)
    assert observe(np.eye(9) / 9, proj4) == pytest.approx(4 / 9)
    psi = np.kron(basis_state("B"), ket("0"))
    assert observe(psi, embed(spin1_operator("proj(+1)"), "A")) == pytest.approx(0.5)


def test_observe_rejects_non_projector():
    with pytest.raises(ContractViolation):
        observe(product_state(), 2 * readout_projector("A", "P0"))
    with pytest.raises(ContractViolation):
        observe(product_state(), embed(spin1_operator("Sx_plus"), "A"))


# -------------------------------------------------------------- markers


def test_dephase_examples():
    s = math.sqrt(0.5)
    psi = np.kron(ket("0"), s * (ket("0") + ket("+1")))
    rho = dephase_subspace(psi, "B", ("0", "+1"))
    rho_b = np.einsum("abad->bd", rho.reshape(3, 3, 3, 3))
    np.testing.assert_allclose(rho_b, np.diag([0.5, 0.5, 0.0]), atol=1e-15)
    rho0 = dephase_subspace(product_state(), "B", ("0", "+1"))
    np.testing.assert_allclose(rho0, np.outer(product_state(), product_state()), atol=1e-15)
    with pytest.raises(ValueError):
        dephase_subspace(psi, "B", ("0", "0"))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from("AB"), st.permutations(["+1", "0", "-1"]))
def test_property_dephase_keeps_density(seed, spin, levels):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    out = dephase_subspace(rho, spin, (levels[0], levels[1]))
    check_state(out)
    # the pair coherence is gone
    i, j = ({"+1": 0, "0": 1, "-1": 2}[m] for m in levels[:2])
    r4 = out.reshape(3, 3, 3, 3)
    coh = r4[i, :, j, :] if spin == "A" else r4[:, i, :, j]
    assert np.max(np.abs(coh)) == 0.0


def test_prepare_keeps_other_spin():
    psi = np.kron(basis_state("B"), ket("-1"))
    rho = prepare(psi, "A", "0")
    np.testing.assert_allclose(rho, np.outer(product_state("0", "-1"), product_state("0", "-1")), atol=1e-15)


def test_rot_pi_half_gives_superposition():
    seq = PulseSequence((Segment(0.0, (), (Rot("A", "x+", math.pi / 2), Read("A", "P0"))),))
    assert run_sequence(seq, P) == pytest.approx(0.5, abs=1e-14)


# ------------------------------------------------------------ properties


def test_composition_bit_for_bit():
    seq = make_deer("DQ", 3.3)
    drives = (DriveSpec("B", "plus", 7.0), DriveSpec("A", "minus", 2.0, 0.3, 0.4))
    extra = PulseSequence((Segment(1.7, drives), Segment(0.9, drives[:1])))
    full = evolve(product_state(), seq + extra, P)
    first = evolve(product_state(), seq, P)
    second = evolve(first, extra, P, t0=seq.duration)
    np.testing.assert_array_equal(full, second)


def test_density_and_pure_agree():
    seq = PulseSequence((Segment(2.0, (DriveSpec("B", "plus", 3.0), DriveSpec("A", "plus", 1.0, 0.2))),))
    psi = evolve(product_state(), seq, P)
    rho = evolve(np.outer(product_state(), product_state()), seq, P)
    np.testing.assert_allclose(rho, np.outer(psi, psi.conj()), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(0.0, 5.0),
            st.sampled_from(["A", "B"]),
            st.sampled_from(["plus", "minus"]),
            st.floats(0.0, 10.0),
            st.floats(-2.0, 2.0),
        ),
        min_size=1,
        max_size=12,
    )
)
def test_property_unitary_segments_and_norm(specs):
    segs = [Segment(t, (DriveSpec(s, tr, r, d),)) for t, s, tr, r, d in specs]
    for seg in segs:
        check_unitary(segment_propagator(P, seg))
    out = evolve(product_state(), segs, P)
    check_state(out)


def test_norm_over_many_segments():
    rng = np.random.default_rng(3)
    segs = [
        Segment(float(rng.uniform(0, 0.5)), (DriveSpec("B", "plus", float(rng.uniform(0, 8))),))
        for _ in range(10_000)
    ]
    out = evolve(product_state("+1", "0"), segs, P)
    check_state(out, tol=1e-9)


def test_trajectory_probabilities_in_range():
    tr = trajectory(lambda t: make_deer("SQ", t), np.linspace(0.1, 10, 30), P,
                    {"Bplus": readout_projector("B", "P+1")})
    for v in tr.observables.values():
        assert np.all(v >= -1e-9) and np.all(v <= 1 + 1e-9)
