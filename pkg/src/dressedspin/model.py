"""Two-qutrit Hamiltonian with transition-selective drives, and closed forms.

Units: every user-facing number is linear frequency in MHz (times in us);
Hamiltonians are returned in angular units, rad/us.

Amplitude convention: a drive of Rabi frequency ``rabi`` on a transition
|b> <-> |a> contributes ``pi * rabi * (exp(-i phase)|a><b| + h.c.)`` in the
rotating frame, so the on-resonance population oscillates as
``sin^2(pi * rabi * t)`` and a pi pulse lasts ``1/(2*rabi)``. The matching
lab-frame coefficient is ``2*pi*rabi*cos(2*pi*f_carrier*t + phase)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .spinops import embed, ket, pauli, spin1_operator, tensor

TWO_PI = 2.0 * math.pi

SPINS = ("A", "B")
TRANSITIONS = ("plus", "minus")


@dataclass(frozen=True)
class SystemParams:
    """Static parameters of the NV pair.

    Defaults describe an NV_A/NV_B pair with D = 2.87 GHz and a 60 MHz gap
    between the two |0> <-> |+1> lines.
    """

    D: float = 2870.0
    zeemanA: float = 126.0
    zeemanB: float = 66.0
    nu_dip: float = 0.25
    t2star_A: float | None = None
    t2star_B: float | None = None

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError("zero-field splitting D must be positive")
        for name in ("t2star_A", "t2star_B"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive when given")

    def zeeman(self, spin: str) -> float:
        return self.zeemanA if spin == "A" else self.zeemanB

    def transition_frequency(self, spin: str, transition: str) -> float:
        """Bare |0> <-> |+-1> line (MHz), Ising shift excluded."""
        z = self.zeeman(spin)
        return self.D + z if transition == "plus" else self.D - z

    def with_(self, **changes) -> "SystemParams":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(changes)
        return SystemParams(**d)


# Measured T2* of the reference pair (us), usable as optional envelopes.
REFERENCE_T2STAR = {"A": 7.2, "B": 2.1}


@dataclass(frozen=True)
class DriveSpec:
    """One drive on one spin's |0> <-> |+-1> transition.

    ``detuning`` is carrier minus bare transition frequency (MHz); ``phase``
    selects the rotating-frame axis (0 -> x, pi/2 -> y).
    """

    spin: str
    transition: str
    rabi: float
    detuning: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.spin not in SPINS:
            raise ValueError(f"unknown spin {self.spin!r}")
        if self.transition not in TRANSITIONS:
            raise ValueError(f"unknown transition {self.transition!r}")
        if not self.rabi >= 0:
            raise ValueError("rabi frequency must be >= 0")

    @property
    def key(self) -> tuple[str, str]:
        return (self.spin, self.transition)


@dataclass(frozen=True)
class DressedPair:
    plus_d: np.ndarray = field(repr=False)
    minus_d: np.ndarray = field(repr=False)


def _upper_projector(transition: str) -> np.ndarray:
    v = ket("+1" if transition == "plus" else "-1")
    return np.outer(v, v.conj())


def _coupling_op(transition: str, phase: float) -> np.ndarray:
    """exp(-i phase)|a><b| + h.c. == cos(phase) sx + sin(phase) sy."""
    return math.cos(phase) * pauli(transition, "x") + math.sin(phase) * pauli(transition, "y")


def static_hamiltonian(params: SystemParams) -> np.ndarray:
    sz = spin1_operator("Sz")
    single = lambda z: TWO_PI * (params.D * sz @ sz + z * sz)  # noqa: E731
    return (
        embed(single(params.zeemanA), "A")
        + embed(single(params.zeemanB), "B")
        + ising_term(params.nu_dip)
    )


def ising_term(nu_dip: float) -> np.ndarray:
    sz = spin1_operator("Sz")
    return TWO_PI * nu_dip * tensor(sz, sz)


def build_lab_hamiltonian(params: SystemParams, drives: Iterable[DriveSpec], t: float) -> np.ndarray:
    """Lab-frame H(t) in rad/us, flip-flop/hyperfine/transverse Zeeman omitted."""
    h = static_hamiltonian(params)
    for d in drives:
        carrier = params.transition_frequency(d.spin, d.transition) + d.detuning
        amp = TWO_PI * d.rabi * math.cos(TWO_PI * carrier * t + d.phase)
        if amp != 0.0:
            h = h + amp * embed(pauli(d.transition, "x"), d.spin)
    return h


def frame_frequencies(params: SystemParams) -> np.ndarray:
    """Diagonal (MHz) of the doubly rotating frame at the bare transitions."""
    f = {}
    for s in SPINS:
        f[s] = np.array(
            [params.transition_frequency(s, "plus"), 0.0, params.transition_frequency(s, "minus")]
        )
    return (f["A"][:, None] + f["B"][None, :]).ravel()


def _check_unique(drives: Sequence[DriveSpec]) -> None:
    seen = set()
    for d in drives:
        if d.key in seen:
            raise ValueError(f"duplicate drive on {d.spin}:{d.transition}")
        seen.add(d.key)


def build_rwa_hamiltonian(params: SystemParams, drives: Sequence[DriveSpec]) -> np.ndarray:
    """Time-independent rotating-frame Hamiltonian (rad/us).

    The frame of each driven transition follows its carrier, so a detuning
    ``delta`` shows up as ``-2*pi*delta`` on the upper level. Undriven
    transitions are referenced to their bare frequency. The Ising term is kept
    in full.
    """
    drives = list(drives)
    _check_unique(drives)
    h = ising_term(params.nu_dip).astype(complex)
    for d in drives:
        block = -TWO_PI * d.detuning * _upper_projector(d.transition)
        block = block + math.pi * d.rabi * _coupling_op(d.transition, d.phase)
        h = h + embed(block, d.spin)
    return h


def drive_coupling(d: DriveSpec) -> np.ndarray:
    """Two-spin coupling operator of a drive (without the detuning block)."""
    return embed(math.pi * d.rabi * _coupling_op(d.transition, d.phase), d.spin)


def single_spin_drive(omega_plus: float, omega_minus: float) -> np.ndarray:
    """Resonant rotating-frame drive block of one qutrit (rad/us)."""
    return math.pi * (omega_plus * pauli("plus", "x") + omega_minus * pauli("minus", "x"))


def _check_drive_pair(omega_plus: float, omega_minus: float) -> float:
    total = omega_plus**2 + omega_minus**2
    if total <= 0:
        raise ValueError("at least one of omega_plus, omega_minus must be nonzero")
    return total


def effective_coupling(omega_plus: float, omega_minus: float, nu_dip: float) -> float:
    """Dressed-frame Ising coefficient (MHz) for a doubly driven partner spin."""
    total = _check_drive_pair(omega_plus, omega_minus)
    return 0.5 * (omega_plus**2 - omega_minus**2) / total * nu_dip


def coupling_factor(omega_plus: float, omega_minus: float) -> float:
    """Ratio effective_coupling / nu_dip."""
    total = _check_drive_pair(omega_plus, omega_minus)
    return 0.5 * (omega_plus**2 - omega_minus**2) / total


def dressed_states(omega_plus: float, omega_minus: float) -> DressedPair:
    """Upper/lower dressed states ``(|R> +- |0>)/sqrt(2)``,
    ``|R> = (omega_plus|+1> + omega_minus|-1>)/sqrt(omega_plus^2 + omega_minus^2)``.
    """
    norm = math.sqrt(_check_drive_pair(omega_plus, omega_minus))
    bright = (omega_plus * ket("+1") + omega_minus * ket("-1")) / norm
    zero = ket("0")
    s = math.sqrt(0.5)
    return DressedPair(plus_d=s * (bright + zero), minus_d=s * (bright - zero))


def hh_matching(omega_plus_B: float, omega_minus_B: float) -> float:
    """Spin-lock Rabi frequency of NV_A matching the dressed splitting of NV_B."""
    return math.sqrt(_check_drive_pair(omega_plus_B, omega_minus_B))


def crosstalk_bound(omega: float, delta: float) -> float:
    """Order-of-magnitude cross-talk error (omega/delta)^2."""
    if delta == 0:
        raise ValueError("detuning between the two lines must be nonzero")
    return (omega / delta) ** 2


def lab_max_frequency(params: SystemParams, drives: Iterable[DriveSpec] = ()) -> float:
    """Largest frequency (MHz) present in the lab-frame Hamiltonian."""
    f = [params.D + abs(params.zeemanA), params.D + abs(params.zeemanB)]
    for d in drives:
        f.append(abs(params.transition_frequency(d.spin, d.transition) + d.detuning) + d.rabi)
    return max(f) + 2 * abs(params.nu_dip)
