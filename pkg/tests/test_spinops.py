import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dressedspin.spinops import (
    ContractViolation,
    basis_state,
    check_unitary,
    embed,
    herm_propagator,
    identity,
    is_hermitian,
    ket,
    spin1_operator,
    tensor,
)

KINDS = ("Sz", "Sx_plus", "Sx_minus", "Sy_plus", "Sy_minus", "proj(+1)", "proj(0)", "proj(-1)")


def test_sz_is_diag():
    np.testing.assert_array_equal(spin1_operator("Sz"), np.diag([1, 0, -1]))


def test_proj0():
    np.testing.assert_array_equal(spin1_operator("proj(0)"), np.diag([0, 1, 0]))


def test_sx_plus_squared_is_identity_on_subspace():
    sx = spin1_operator("Sx_plus")
    np.testing.assert_array_equal(sx @ sx, np.diag([1, 1, 0]))
    sxm = spin1_operator("Sx_minus")
    np.testing.assert_array_equal(sxm @ sxm, np.diag([0, 1, 1]))


def test_transition_operators_touch_only_their_pair():
    sx = spin1_operator("Sx_plus")
    assert sx[0, 1] == 1 and sx[1, 0] == 1
    assert np.all(sx[2] == 0) and np.all(sx[:, 2] == 0)
    sy = spin1_operator("Sy_minus")
    assert np.all(sy[0] == 0) and np.all(sy[:, 0] == 0)


@pytest.mark.parametrize("kind", KINDS)
def test_all_kinds_hermitian(kind):
    assert is_hermitian(spin1_operator(kind))


def test_unknown_kind():
    with pytest.raises(ValueError):
        spin1_operator("Sq")


def test_tensor_identity():
    np.testing.assert_array_equal(tensor(identity(), identity()), np.eye(9))


def test_szsz_multiplicities():
    sz = spin1_operator("Sz")
    ev = np.round(np.linalg.eigvalsh(tensor(sz, sz))).astype(int)
    vals, counts = np.unique(ev, return_counts=True)
    assert dict(zip(vals.tolist(), counts.tolist())) == {-1: 2, 0: 5, 1: 2}


def test_tensor_projector_rank1():
    p = tensor(spin1_operator("proj(0)"), spin1_operator("proj(+1)"))
    assert np.linalg.matrix_rank(p) == 1
    v = np.kron(ket("0"), ket("+1"))
    np.testing.assert_allclose(p @ v, v)


def test_embed_places_spin():
    sz = spin1_operator("Sz")
    np.testing.assert_array_equal(embed(sz, "A"), np.kron(sz, np.eye(3)))
    np.testing.assert_array_equal(embed(sz, "B"), np.kron(np.eye(3), sz))


def test_bright_dark_states():
    b, d = basis_state("B"), basis_state("D")
    assert abs(np.vdot(b, d)) < 1e-15
    np.testing.assert_allclose(abs(b[0]) ** 2, 0.5)


def test_propagator_zero_time():
    h = spin1_operator("Sz") + 0.3 * spin1_operator("Sx_plus")
    np.testing.assert_allclose(herm_propagator(h, 0.0), np.eye(3), atol=1e-15)


def test_propagator_full_period():
    f = 3.7
    u = herm_propagator(2 * math.pi * f * spin1_operator("proj(+1)"), 1 / f)
    np.testing.assert_allclose(u, np.eye(3), atol=1e-9)


def test_rabi_convention():
    # H = pi*Sx_plus: |+1> population sin^2(pi t); full transfer at 0.5 us,
    # back to |0> at 1 us.
    h = math.pi * spin1_operator("Sx_plus")
    psi = herm_propagator(h, 0.5) @ ket("0")
    assert abs(psi[0]) ** 2 == pytest.approx(1.0, abs=1e-12)
    psi = herm_propagator(h, 1.0) @ ket("0")
    assert abs(psi[1]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_non_hermitian_rejected():
    h = np.zeros((3, 3), complex)
    h[0, 1] = 1.0
    with pytest.raises(ContractViolation):
        herm_propagator(h, 1.0)


def test_check_unitary_rejects():
    with pytest.raises(ContractViolation):
        check_unitary(2 * np.eye(3))


coef = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(coef, min_size=len(KINDS), max_size=len(KINDS)), st.floats(0, 20))
def test_property_unitary_and_hermitian(cs, t):
    h = sum(c * spin1_operator(k) for c, k in zip(cs, KINDS))
    assert is_hermitian(h)
    check_unitary(herm_propagator(h, t))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_property_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(4))
    np.testing.assert_allclose(tensor(a, b) @ tensor(c, d), tensor(a @ c, b @ d), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_property_associative_exact(seed):
    # exact equality needs exactly representable products; spin operators
    # have small integer entries
    rng = np.random.default_rng(seed)
    a, b, c = (rng.integers(-3, 4, (3, 3)) + 1j * rng.integers(-3, 4, (3, 3)) for _ in range(3))
    np.testing.assert_array_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))
