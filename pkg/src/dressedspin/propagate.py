"""Time evolution of two-qutrit states through pulse sequences.

States are plain arrays: a pure state is a length-9 vector, a mixed state a
9x9 density matrix. Inputs and outputs are always expressed in the doubly
rotating frame referenced to the bare transition frequencies, whichever mode
is used internally, so ``rwa`` and ``lab`` results compare directly.

``rwa``: one exact propagator per constant segment. Drives with a detuning
are handled by moving into the carrier frame for the segment. When one
transition carries several drives (e.g. cross-talk from the other spin's
field) the residual time dependence is periodic and is propagated over one
period with midpoint steps, then raised to the number of whole periods.

``lab``: the full time-dependent lab Hamiltonian, midpoint-sampled and
piecewise constant with step ``h <= 1/(50 f_max)`` (default ``1/(200 f_max)``).
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import spinops
from .model import (
    TWO_PI,
    DriveSpec,
    SystemParams,
    build_rwa_hamiltonian,
    drive_coupling,
    frame_frequencies,
    lab_max_frequency,
    static_hamiltonian,
)
from .sequences import Dephase, Prep, PulseSequence, Read, Rot, Segment
from .spinops import ContractViolation, basis_state, embed, pauli

__all__ = [
    "Trajectory",
    "dephase_subspace",
    "evolve",
    "is_density",
    "observe",
    "prepare",
    "product_state",
    "readout_projector",
    "rotate",
    "run_sequence",
    "segment_propagator",
    "state_fidelity",
    "to_density",
    "trajectory",
]

LAB_DEFAULT_RESOLUTION = 200
LAB_MIN_RESOLUTION = 50
_CHUNK = 4096


# ----------------------------------------------------------------- states


def product_state(a: str = "0", b: str = "0") -> np.ndarray:
    """Pure product state |a>_A (x) |b>_B."""
    return np.kron(basis_state(a), basis_state(b))


def is_density(state: np.ndarray) -> bool:
    return np.ndim(state) == 2


def to_density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if is_density(state):
        return state
    return np.outer(state, state.conj())


def check_state(state: np.ndarray, tol: float = 1e-9) -> None:
    """Raise :class:`ContractViolation` if norm/trace/positivity fail."""
    if is_density(state):
        tr = np.trace(state).real
        if abs(tr - 1) > tol:
            raise ContractViolation(f"density trace {tr} != 1")
        if not spinops.is_hermitian(state, 1e-10):
            raise ContractViolation("density matrix not Hermitian")
        if np.linalg.eigvalsh(state).min() < -tol:
            raise ContractViolation("density matrix not positive semidefinite")
    else:
        n = np.vdot(state, state).real
        if abs(n - 1) > tol:
            raise ContractViolation(f"state norm {n} != 1")


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for pure states, Tr(rho sigma) when either is mixed (pure-state exact)."""
    if not is_density(a) and not is_density(b):
        return float(abs(np.vdot(a, b)) ** 2)
    if is_density(a) and is_density(b):
        return float(np.trace(a @ b).real)
    psi, rho = (a, b) if not is_density(a) else (b, a)
    return float(np.vdot(psi, rho @ psi).real)


def _apply(u: np.ndarray, state: np.ndarray) -> np.ndarray:
    if is_density(state):
        return u @ state @ u.conj().T
    return u @ state


# --------------------------------------------------------------- markers


def _as4(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(3, 3, 3, 3)  # (a, b, a', b')


def prepare(state: np.ndarray, spin: str, name: str) -> np.ndarray:
    """Reset one spin to a named pure state, keeping the other's reduced state."""
    rho4 = _as4(to_density(state))
    v = basis_state(name)
    p = np.outer(v, v.conj())
    if spin == "A":
        other = np.einsum("abad->bd", rho4)
        return np.kron(p, other)
    if spin == "B":
        other = np.einsum("abcb->ac", rho4)
        return np.kron(other, p)
    raise ValueError(f"unknown spin {spin!r}")


def dephase_subspace(state: np.ndarray, spin: str, pair: tuple[str, str]) -> np.ndarray:
    """Fully dephase level ``pair[1]`` of one spin against ``pair[0]``.

    Realised as a uniformly random phase on ``pair[1]``, which removes its
    coherences with every other level of that spin (zeroing only the pair
    coherence would not be completely positive on a qutrit). Returns a
    density matrix.
    """
    i, j = (spinops._index(m) for m in pair)
    if i == j:
        raise ValueError("dephase needs two distinct levels")
    keep = np.ones(3)
    keep[j] = 0.0
    mask3 = np.outer(keep, keep) + np.outer(1 - keep, 1 - keep)
    rho4 = _as4(to_density(state).copy())
    if spin == "A":
        rho4 = rho4 * mask3[:, None, :, None]
    elif spin == "B":
        rho4 = rho4 * mask3[None, :, None, :]
    else:
        raise ValueError(f"unknown spin {spin!r}")
    return rho4.reshape(9, 9)


def rotation_operator(rot: Rot) -> np.ndarray:
    axis, sub = rot.components()
    if axis == "z":
        gen = pauli(sub, "z")
    else:
        phi = rot.phase + (math.pi / 2 if axis == "y" else 0.0)
        gen = math.cos(phi) * pauli(sub, "x") + math.sin(phi) * pauli(sub, "y")
    return embed(spinops.herm_propagator(0.5 * gen, rot.angle), rot.spin)


def rotate(state: np.ndarray, rot: Rot) -> np.ndarray:
    return _apply(rotation_operator(rot), state)


def apply_marker(state: np.ndarray, marker) -> np.ndarray:
    if isinstance(marker, Prep):
        return prepare(state, marker.spin, marker.state)
    if isinstance(marker, Rot):
        return rotate(state, marker)
    if isinstance(marker, Dephase):
        return dephase_subspace(state, marker.spin, (marker.m1, marker.m2))
    if isinstance(marker, Read):
        return state
    raise TypeError(f"unknown marker {marker!r}")


# -------------------------------------------------------------- observables

_READ_STATES = {"P0": "0", "P+1": "+1", "P-1": "-1", "PB": "B", "PD": "D"}


def readout_projector(spin: str, name: str) -> np.ndarray:
    v = basis_state(_READ_STATES[name])
    return embed(np.outer(v, v.conj()), spin)


def observe(state: np.ndarray, projector: np.ndarray) -> float:
    """Probability <P> of a projector, clipped to [0, 1]."""
    p = np.asarray(projector, dtype=complex)
    if not spinops.is_hermitian(p, 1e-10) or np.max(np.abs(p @ p - p)) > 1e-10:
        raise ContractViolation("observable is not a Hermitian idempotent projector")
    if is_density(state):
        val = np.trace(p @ state).real
    else:
        val = np.vdot(state, p @ state).real
    return float(min(1.0, max(0.0, val)))


# ------------------------------------------------------------- propagators

_EIG_CACHE: "OrderedDict[bytes, tuple[np.ndarray, np.ndarray]]" = OrderedDict()
_EIG_CACHE_SIZE = 256


def _eigh_cached(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    key = h.tobytes()
    hit = _EIG_CACHE.get(key)
    if hit is not None:
        _EIG_CACHE.move_to_end(key)
        return hit
    spinops.check_hermitian(h)
    hit = np.linalg.eigh(h)
    _EIG_CACHE[key] = hit
    if len(_EIG_CACHE) > _EIG_CACHE_SIZE:
        _EIG_CACHE.popitem(last=False)
    return hit


def _const_propagator(h: np.ndarray, t: float) -> np.ndarray:
    if t == 0:
        return np.eye(h.shape[0], dtype=complex)
    w, v = _eigh_cached(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def _batched_propagators(hs: np.ndarray, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(hs)
    return np.einsum("nij,nj,nkj->nik", v, np.exp(-1j * w * dt), v.conj())


def _ordered_product(us: np.ndarray) -> np.ndarray:
    """u[n-1] @ ... @ u[1] @ u[0] by pairwise reduction."""
    while len(us) > 1:
        if len(us) % 2:
            us = np.concatenate([us, np.eye(us.shape[1], dtype=complex)[None]])
        us = us[1::2] @ us[0::2]
    return us[0]


def _stepped_propagator(h_of_t: Callable[[np.ndarray], np.ndarray], t0: float, t1: float, n: int) -> np.ndarray:
    """Midpoint piecewise-constant propagator over [t0, t1] with n steps."""
    dt = (t1 - t0) / n
    total = np.eye(9, dtype=complex)
    for start in range(0, n, _CHUNK):
        k = np.arange(start, min(n, start + _CHUNK))
        mids = t0 + (k + 0.5) * dt
        total = _ordered_product(_batched_propagators(h_of_t(mids), dt)) @ total
    return total


def _detuning_diagonal(drives: Sequence[DriveSpec]) -> np.ndarray:
    """Per-basis-state frame offset (MHz) of the carrier frame vs the bare frame."""
    g = np.zeros((3, 3))
    for d in drives:
        row = 0 if d.transition == "plus" else 2
        if d.spin == "A":
            g[row, :] += d.detuning
        else:
            g[:, row] += d.detuning
    return g.ravel()


def _frame_shift(g: np.ndarray, t: float) -> np.ndarray:
    return np.exp(-1j * TWO_PI * g * t)


def _rwa_propagator(params: SystemParams, drives: Sequence[DriveSpec], t0: float, dur: float) -> np.ndarray:
    primary: dict[tuple[str, str], DriveSpec] = {}
    extra: list[DriveSpec] = []
    for d in drives:
        if d.key in primary:
            extra.append(d)
        else:
            primary[d.key] = d
    prim = list(primary.values())
    h = build_rwa_hamiltonian(params, prim)
    if not extra:
        u = _const_propagator(h, dur)
    else:
        u = _periodic_propagator(h, [(d, d.detuning - primary[d.key].detuning) for d in extra], t0, dur)
    g = _detuning_diagonal(prim)
    if np.any(g):
        u = (_frame_shift(g, t0 + dur)[:, None] * u) * _frame_shift(g, t0).conj()[None, :]
    return u


def _periodic_propagator(h0, extras, t0, dur):
    """Carrier-frame propagator with extra drives at offsets f_k (MHz)."""
    ops = []
    for d, f in extras:
        a = 0 if d.transition == "plus" else 2
        up = np.zeros((3, 3), dtype=complex)
        up[a, 1] = math.pi * d.rabi
        ops.append((embed(up, d.spin), f, d.phase))
    if dur == 0:
        return np.eye(9, dtype=complex)

    def h_of_t(ts):
        hs = np.repeat(h0[None], len(ts), axis=0)
        for op, f, ph in ops:
            c = np.exp(-1j * (TWO_PI * f * ts + ph))
            hs = hs + c[:, None, None] * op + c.conj()[:, None, None] * op.conj().T
        return hs

    freqs = np.array([abs(f) for _, f, _ in ops])
    nz = freqs[freqs > 0]
    if nz.size == 0:
        return _const_propagator(h_of_t(np.array([t0]))[0], dur)
    fmin = nz.min()
    ratios = nz / fmin
    scale = max(float(np.max(np.abs(np.linalg.eigvalsh(h0)))) / TWO_PI, 1.0) + float(nz.max())
    per_unit = LAB_DEFAULT_RESOLUTION * scale
    if np.allclose(ratios, np.round(ratios), atol=1e-9):
        period = 1.0 / fmin
        n_per = max(64, int(math.ceil(per_unit * period)))
        cycles = int(math.floor(dur / period))
        u = np.eye(9, dtype=complex)
        if cycles:
            u_t = _stepped_propagator(h_of_t, t0, t0 + period, n_per)
            u = np.linalg.matrix_power(u_t, cycles)
        rem = dur - cycles * period
        if rem > 0:
            n_rem = max(1, int(math.ceil(per_unit * rem)))
            u = _stepped_propagator(h_of_t, t0 + cycles * period, t0 + dur, n_rem) @ u
        return u
    n = max(1, int(math.ceil(per_unit * dur)))
    return _stepped_propagator(h_of_t, t0, t0 + dur, n)


def _lab_propagator(params: SystemParams, drives: Sequence[DriveSpec], t0: float, dur: float, step: float | None):
    fmax = lab_max_frequency(params, drives)
    if step is None:
        step = 1.0 / (LAB_DEFAULT_RESOLUTION * fmax)
    if step > 1.0 / (LAB_MIN_RESOLUTION * fmax) * (1 + 1e-12):
        raise ValueError(
            f"lab step {step:g} us too coarse; need <= 1/(50 f_max) = {1 / (LAB_MIN_RESOLUTION * fmax):g} us"
        )
    if dur == 0:
        return np.eye(9, dtype=complex)
    h0 = static_hamiltonian(params)
    xs, carriers, phases = [], [], []
    for d in drives:
        xs.append(TWO_PI * d.rabi * embed(pauli(d.transition, "x"), d.spin))
        carriers.append(params.transition_frequency(d.spin, d.transition) + d.detuning)
        phases.append(d.phase)
    xs_arr = np.array(xs) if xs else np.zeros((0, 9, 9), dtype=complex)
    carriers_arr, phases_arr = np.array(carriers), np.array(phases)

    def h_of_t(ts):
        c = np.cos(TWO_PI * np.outer(ts, carriers_arr) + phases_arr)
        return h0[None] + np.einsum("nk,kij->nij", c, xs_arr)

    n = max(1, int(math.ceil(dur / step - 1e-9)))
    u_lab = _stepped_propagator(h_of_t, t0, t0 + dur, n)
    f = frame_frequencies(params)
    r1 = np.exp(1j * TWO_PI * f * (t0 + dur))
    r0 = np.exp(1j * TWO_PI * f * t0)
    return (r1[:, None] * u_lab) * r0.conj()[None, :]


def segment_propagator(
    params: SystemParams,
    segment: Segment,
    t0: float = 0.0,
    mode: str = "rwa",
    step: float | None = None,
) -> np.ndarray:
    """Rotating-frame propagator of one segment's continuous part."""
    if mode == "rwa":
        return _rwa_propagator(params, segment.drives, t0, segment.duration)
    if mode == "lab":
        return _lab_propagator(params, segment.drives, t0, segment.duration, step)
    raise ValueError(f"mode must be 'rwa' or 'lab', got {mode!r}")


def evolve(
    state: np.ndarray,
    seq: PulseSequence | Iterable[Segment],
    params: SystemParams,
    mode: str = "rwa",
    step: float | None = None,
    t0: float = 0.0,
) -> np.ndarray:
    """Run ``state`` through every segment of ``seq`` starting at time ``t0``.

    Markers of a segment act first, then its continuous evolution. Pure
    states stay pure unless a ``prep`` or ``dephase`` marker forces a mixed
    representation.
    """
    if mode not in ("rwa", "lab"):
        raise ValueError(f"mode must be 'rwa' or 'lab', got {mode!r}")
    segments = seq.segments if isinstance(seq, PulseSequence) else tuple(seq)
    out = np.asarray(state, dtype=complex)
    t = t0
    for seg in segments:
        for m in seg.markers:
            out = apply_marker(out, m)
        if seg.duration > 0:
            out = _apply(segment_propagator(params, seg, t, mode, step), out)
        t += seg.duration
    return out


def run_sequence(
    seq: PulseSequence,
    params: SystemParams,
    mode: str = "rwa",
    step: float | None = None,
    initial: np.ndarray | None = None,
) -> float:
    """Evolve from |0,0> (or ``initial``) and return the readout probability."""
    state = product_state() if initial is None else initial
    final = evolve(state, seq, params, mode, step)
    r = seq.readout
    return observe(final, readout_projector(r.spin, r.projector))


@dataclass
class Trajectory:
    times: np.ndarray
    observables: dict[str, np.ndarray] = field(default_factory=dict)


def trajectory(
    build: Callable[[float], PulseSequence],
    times: Sequence[float],
    params: SystemParams,
    observables: Mapping[str, np.ndarray] | None = None,
    mode: str = "rwa",
    step: float | None = None,
) -> Trajectory:
    """Readout (and optional extra projectors) of ``build(t)`` for each t."""
    times = np.asarray(times, dtype=float)
    series: dict[str, list[float]] = {"readout": []}
    extra = dict(observables or {})
    for name in extra:
        series[name] = []
    for t in times:
        seq = build(float(t))
        final = evolve(product_state(), seq, params, mode, step)
        r = seq.readout
        series["readout"].append(observe(final, readout_projector(r.spin, r.projector)))
        for name, p in extra.items():
            series[name].append(observe(final, p))
    return Trajectory(times, {k: np.array(v) for k, v in series.items()})
