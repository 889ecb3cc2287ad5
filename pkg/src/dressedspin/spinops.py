"""Spin-1 operator algebra on the fixed basis (|+1>, |0>, |-1>).

Two-spin operators live on NV_A (x) NV_B, i.e. index ``3*a + b``.

The transition-selective operators ``Sx_plus``/``Sx_minus`` have unit
off-diagonal elements; the spin-1 ladder factor sqrt(2) is absorbed into the
drive-amplitude calibration used by :mod:`dressedspin.model`.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "BASIS",
    "HERMITIAN_TOL",
    "UNITARY_TOL",
    "ContractViolation",
    "basis_state",
    "check_hermitian",
    "check_unitary",
    "embed",
    "herm_propagator",
    "identity",
    "is_hermitian",
    "ket",
    "spin1_operator",
    "tensor",
    "transition_pair",
    "pauli",
]

BASIS = ("+1", "0", "-1")
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

_INDEX = {"+1": 0, "0": 1, "-1": 2}
_SQ2 = np.sqrt(0.5)


class ContractViolation(ValueError):
    """A numerical precondition (Hermiticity, unitarity, projector...) failed."""


def _index(m) -> int:
    key = str(m).strip().replace("|", "").replace(">", "").replace("⟩", "")
    if key in ("1", "+1", "p", "plus"):
        key = "+1"
    elif key in ("-1", "m", "minus"):
        key = "-1"
    if key not in _INDEX:
        raise ValueError(f"unknown spin projection {m!r}")
    return _INDEX[key]


def ket(m) -> np.ndarray:
    """Basis ket for projection ``m`` in {+1, 0, -1}."""
    v = np.zeros(3, dtype=complex)
    v[_index(m)] = 1.0
    return v


def basis_state(name: str) -> np.ndarray:
    """Named single-qutrit state: 0, +1, -1, B or D.

    ``B = (|+1> + |-1>)/sqrt(2)`` and ``D = (|+1> - |-1>)/sqrt(2)``.
    """
    key = str(name).strip().strip("|>⟩").upper()
    if key == "B":
        return np.array([_SQ2, 0.0, _SQ2], dtype=complex)
    if key == "D":
        return np.array([_SQ2, 0.0, -_SQ2], dtype=complex)
    return ket(key)


def identity(n: int = 3) -> np.ndarray:
    return np.eye(n, dtype=complex)


def transition_pair(subspace: str) -> tuple[np.ndarray, np.ndarray]:
    """Upper and lower states ``(a, b)`` of a named two-level subspace.

    ``plus``: (|+1>, |0>), ``minus``: (|-1>, |0>), ``dq``: (|B>, |0>),
    ``pm``: (|+1>, |-1>).
    """
    if subspace in ("plus", "+"):
        return ket("+1"), ket("0")
    if subspace in ("minus", "-"):
        return ket("-1"), ket("0")
    if subspace == "dq":
        return basis_state("B"), ket("0")
    if subspace == "pm":
        return ket("+1"), ket("-1")
    raise ValueError(f"unknown subspace {subspace!r}")


def pauli(subspace: str, axis: str) -> np.ndarray:
    """Pauli operator ``axis`` in {x, y, z} acting inside a two-level subspace.

    With ``(a, b) = transition_pair(subspace)``:
    sx = |a><b| + |b><a|, sy = -i|a><b| + i|b><a|, sz = |a><a| - |b><b|.
    """
    a, b = transition_pair(subspace)
    ab = np.outer(a, b.conj())
    if axis == "x":
        return ab + ab.conj().T
    if axis == "y":
        return -1j * ab + 1j * ab.conj().T
    if axis == "z":
        return np.outer(a, a.conj()) - np.outer(b, b.conj())
    raise ValueError(f"unknown axis {axis!r}")


def spin1_operator(kind: str) -> np.ndarray:
    """Single-qutrit operator by name.

    Supported kinds: ``Sz``, ``Sx_plus``, ``Sx_minus``, ``Sy_plus``,
    ``Sy_minus``, ``I`` and ``proj(m)`` for m in {+1, 0, -1}.
    """
    kind = kind.strip()
    if kind == "Sz":
        return np.diag([1.0, 0.0, -1.0]).astype(complex)
    if kind == "I":
        return identity(3)
    if kind in ("Sx_plus", "Sx_minus", "Sy_plus", "Sy_minus"):
        axis, sub = kind[1], kind.split("_")[1]
        return pauli(sub, axis)
    if kind.startswith("proj(") and kind.endswith(")"):
        v = ket(kind[5:-1])
        return np.outer(v, v.conj())
    raise ValueError(f"unknown spin-1 operator kind {kind!r}")


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of matrices (left factor = NV_A)."""
    out = np.asarray(ops[0])
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def embed(op: np.ndarray, spin: str) -> np.ndarray:
    """Lift a single-qutrit operator to the two-spin space."""
    if spin == "A":
        return np.kron(op, identity(3))
    if spin == "B":
        return np.kron(identity(3), op)
    raise ValueError(f"unknown spin {spin!r}; expected 'A' or 'B'")


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return m.ndim == 2 and m.shape[0] == m.shape[1] and float(np.max(np.abs(m - m.conj().T))) <= tol * scale


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if not is_hermitian(m, tol):
        raise ContractViolation("matrix is not Hermitian within tolerance")


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> None:
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if err > tol:
        raise ContractViolation(f"matrix is not unitary (max|U'U - I| = {err:.3g})")


def herm_propagator(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) for Hermitian ``h`` (rad/us) via eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    check_hermitian(h)
    if t == 0:
        return identity(h.shape[0])
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T
