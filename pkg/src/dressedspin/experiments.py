"""Sweep engines for the two-NV experiments: DEER, Ramsey, alpha sweep and
Hartmann-Hahn (HH) matching/transfer.

Every engine evaluates independent grid points (optionally in worker
processes, assembled in grid order) and returns a :class:`SweepResult`
holding the raw signals plus fitted observables with uncertainties.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .analysis import FitResult, Spectrum, find_peak, fit_damped_cosine, fit_lorentzian, power_spectrum
from .model import SystemParams, dressed_states, effective_coupling, hh_matching
from .propagate import evolve, observe, product_state, readout_projector
from .sequences import make_deer, make_ramsey, make_spinlock
from .spinops import embed

__all__ = [
    "SweepResult",
    "alpha_drive",
    "ramsey_signal",
    "run_alpha_sweep",
    "run_deer_scan",
    "run_hh_rabi_sweep",
    "run_hh_transfer",
    "run_ramsey_scan",
]

# default Ramsey record: 100 us at 50 ns, software reference at 1 MHz
RAMSEY_DT = 0.05
RAMSEY_POINTS = 2000
RAMSEY_OFFSET = 1.0
ZERO_PAD = 4

# shallowest Lorentzian dip (in P0) still counted as a dip
MIN_DIP_DEPTH = 0.02


@dataclass
class SweepResult:
    """Signals on a 1-D grid plus extracted observables.

    ``extracted`` maps a name to ``(value, uncertainty)``; ``outcome`` is
    ``"ok"`` or a short flag such as ``"no-oscillation"`` or ``"no-dip"``.
    """

    experiment: str
    axis_name: str
    axis_unit: str
    axis: np.ndarray
    signals: dict[str, np.ndarray]
    extracted: dict[str, tuple[float, float]] = field(default_factory=dict)
    fits: dict[str, FitResult] = field(default_factory=dict)
    spectra: dict[str, Spectrum] = field(default_factory=dict)
    outcome: str = "ok"
    warnings: list[str] = field(default_factory=list)
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float)
        d = np.diff(self.axis)
        if self.axis.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("sweep axis must be strictly monotonic")
        for k, v in self.signals.items():
            v = np.asarray(v, dtype=float)
            if v.shape != self.axis.shape:
                raise ValueError(f"signal {k!r} does not match the axis length")
            self.signals[k] = v
        for k, (_, err) in self.extracted.items():
            if not err >= 0:
                raise ValueError(f"uncertainty of {k!r} must be >= 0")

    def value(self, name: str) -> float:
        return self.extracted[name][0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(self.signals)
        w.writerow([f"{self.axis_name}_{self.axis_unit}"] + names)
        for i, x in enumerate(self.axis):
            w.writerow([repr(float(x))] + [repr(float(self.signals[n][i])) for n in names])
        return buf.getvalue()

    def to_summary(self) -> dict:
        return {
            "experiment": self.experiment,
            "axis": {"name": self.axis_name, "unit": self.axis_unit, "size": int(self.axis.size)},
            "outcome": self.outcome,
            "extracted": {k: {"value": float(v), "uncertainty": float(e)} for k, (v, e) in self.extracted.items()},
            "fits": {k: f.to_dict() for k, f in self.fits.items()},
            "warnings": list(self.warnings),
            "settings": dict(self.settings),
        }


# ----------------------------------------------------------------- helpers


def _map(fn: Callable[[float], float], xs, workers: int | None) -> np.ndarray:
    """Evaluate ``fn`` on every grid point, results in grid order."""
    xs = [float(x) for x in xs]
    if workers is None or workers <= 1 or len(xs) < 2:
        return np.array([fn(x) for x in xs])
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(fn, xs, chunksize=max(1, len(xs) // (4 * workers)))))


def _grid(values, name: str) -> np.ndarray:
    g = np.asarray(values, dtype=float).ravel()
    if g.size < 2:
        raise ValueError(f"{name} needs at least two points")
    if not np.all(np.diff(g) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    return g


def _fit_errors(fit: FitResult, name: str) -> float:
    e = fit.errors.get(name, math.inf)
    return float(e) if math.isfinite(e) else math.inf


def _readout(params, mode, step, seq) -> float:
    final = evolve(product_state(), seq, params, mode, step)
    r = seq.readout
    return observe(final, readout_projector(r.spin, r.projector))


def _deer_point(params, basis, mode, step, tau):
    return _readout(params, mode, step, make_deer(basis, tau))


def _ramsey_point(params, basis, prep, offset, mode, step, tau):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        seq = make_ramsey(basis, prep, offset, tau)
    return _readout(params, mode, step, seq)


def _spinlock_point(params, drive_B, tau, crosstalk, mode, step, omega_A):
    return _readout(params, mode, step, make_spinlock(omega_A, drive_B, tau, crosstalk))


# -------------------------------------------------------------------- DEER


def run_deer_scan(
    params: SystemParams,
    basis: str,
    tau_grid=None,
    mode: str = "rwa",
    step: float | None = None,
    workers: int | None = None,
) -> SweepResult:
    """Echo signal vs total free-evolution time with a damped-cosine fit.

    The expected frequency is nu_dip/2 in SQ and 2*nu_dip in DQ. The default
    grid covers four expected periods at 40 points per period.
    """
    b = basis.upper()
    expected = abs(params.nu_dip) / 2 if b == "SQ" else 2 * abs(params.nu_dip)
    if tau_grid is None:
        span = 4 / expected if expected > 0 else 20.0
        tau_grid = np.linspace(span / 160, span, 160)
    tau = _grid(tau_grid, "tau_grid")
    if tau[0] <= 0:
        raise ValueError("tau_grid values must be > 0")
    if expected > 0 and (tau[-1] - tau[0]) * expected < 2:
        raise ValueError("tau_grid must span at least two periods of the expected frequency")
    y = _map(partial(_deer_point, params, b, mode, step), tau, workers)
    fit = fit_damped_cosine(tau, y)
    res = SweepResult(
        f"deer-{b}", "tau", "us", tau, {"P0": y}, fits={"damped_cosine": fit},
        settings={"basis": b, "mode": mode, "expected_frequency_MHz": expected},
    )
    if "flat" in fit.flags or fit.params["amp"] < 1e-6:
        res.outcome = "no-oscillation"
        return res
    res.extracted["frequency"] = (fit["freq"], _fit_errors(fit, "freq"))
    res.extracted["amplitude"] = (fit["amp"], _fit_errors(fit, "amp"))
    if not fit.converged:
        res.warnings.append("damped-cosine fit did not converge")
    return res


# ------------------------------------------------------------------ Ramsey


def ramsey_signal(
    params: SystemParams,
    basis: str,
    prep_or_drive,
    tau_grid,
    reference_offset: float = RAMSEY_OFFSET,
    mode: str = "rwa",
    step: float | None = None,
    workers: int | None = None,
) -> np.ndarray:
    """Closed-system Ramsey readout P0 on ``tau_grid``."""
    prep = prep_or_drive if isinstance(prep_or_drive, str) else tuple(map(float, prep_or_drive))
    fn = partial(_ramsey_point, params, basis.upper(), prep, float(reference_offset), mode, step)
    return _map(fn, tau_grid, workers)


def _envelope(y, tau, t2star):
    if t2star is None:
        return y
    return 0.5 + (y - 0.5) * np.exp(-tau / t2star)


def _shot_noise(y, shots, rng):
    if shots is None:
        return y
    return rng.binomial(int(shots), np.clip(y, 0, 1)) / int(shots)


def _default_ramsey_grid():
    return RAMSEY_DT * np.arange(1, RAMSEY_POINTS + 1)


def run_ramsey_scan(
    params: SystemParams,
    basis: str,
    prep_or_drive="0",
    tau_grid=None,
    reference_offset: float = RAMSEY_OFFSET,
    t2star: float | None = None,
    shots: int | None = None,
    seed: int = 0,
    mode: str = "rwa",
    step: float | None = None,
    workers: int | None = None,
    zero_pad_factor: int = ZERO_PAD,
) -> SweepResult:
    """Ramsey record of NV_A and its FFT peak, relative to the B=|0> run.

    ``prep_or_drive`` is B's static level (``"0"``, ``"+1"``, ``"-1"``) or a
    drive pair ``(omega_plus, omega_minus)``. The software reference offset
    moves the peaks away from DC; the reported ``shift`` is target peak
    minus reference peak so the offset cancels. ``t2star`` multiplies the
    oscillation by ``exp(-tau/t2star)``; ``shots`` adds binomial noise from
    a generator seeded by ``seed``.
    """
    b = basis.upper()
    tau = _grid(_default_ramsey_grid() if tau_grid is None else tau_grid, "tau_grid")
    dt = np.diff(tau)
    if np.max(np.abs(dt - dt.mean())) > 1e-6 * dt.mean():
        raise ValueError("Ramsey tau_grid must be uniform")
    nyquist = 1 / (2 * dt.mean())
    fmax = abs(reference_offset) + 2 * abs(params.nu_dip)
    if fmax >= nyquist:
        raise ValueError(f"sampling violates Nyquist: {fmax:.4g} MHz >= {nyquist:.4g} MHz")
    res = SweepResult(
        f"ramsey-{b}", "tau", "us", tau, {},
        settings={"basis": b, "prep_or_drive": _jsonable(prep_or_drive), "reference_offset_MHz": reference_offset,
                  "t2star_us": t2star, "shots": shots, "mode": mode},
    )
    if not isinstance(prep_or_drive, str) and max(map(float, prep_or_drive)) <= abs(params.nu_dip):
        res.warnings.append("drive amplitudes do not exceed nu_dip")
    rng = np.random.default_rng(seed)
    lo = 2 / (tau.size * dt.mean())
    band = (lo, nyquist)
    peaks = {}
    runs = [("reference", "0")]
    if not (isinstance(prep_or_drive, str) and prep_or_drive in ("0", "|0>")):
        runs.append(("target", prep_or_drive))
    for label, prep in runs:
        y = ramsey_signal(params, b, prep, tau, reference_offset, mode, step, workers)
        y = _shot_noise(_envelope(y, tau, t2star), shots, rng)
        spec = power_spectrum(tau, y, "hann", zero_pad_factor)
        pk = find_peak(spec, band)
        if pk.at_edge:
            res.warnings.append(f"{label} peak at band edge")
        res.signals[label] = y
        res.spectra[label] = spec
        peaks[label] = pk.frequency
    if "target" not in peaks:
        res.signals["target"] = res.signals["reference"]
        res.spectra["target"] = res.spectra["reference"]
        peaks["target"] = peaks["reference"]
    err = res.spectra["reference"].bin_width
    res.extracted["reference_peak"] = (peaks["reference"], err)
    res.extracted["peak"] = (peaks["target"], err)
    res.extracted["shift"] = (peaks["target"] - peaks["reference"], err)
    return res


def _jsonable(x):
    return x if isinstance(x, str) else [float(v) for v in x]


# ------------------------------------------------------------- alpha sweep


def alpha_drive(alpha: float, omega_scale: float) -> tuple[float, float]:
    """(omega_plus, omega_minus) with sum 2*omega_scale and asymmetry alpha."""
    if not -1 <= alpha <= 1:
        raise ValueError("alpha must lie in [-1, 1]")
    return omega_scale * (1 + alpha), omega_scale * (1 - alpha)


def run_alpha_sweep(
    params: SystemParams,
    alpha_grid=None,
    omega_scale: float = 5.0,
    tau_grid=None,
    reference_offset: float = RAMSEY_OFFSET,
    mode: str = "rwa",
    step: float | None = None,
    workers: int | None = None,
) -> SweepResult:
    """DQ Ramsey of NV_A with NV_B doubly dressed, one run per alpha.

    Measured nu_eff is half the DQ peak shift relative to the undriven
    reference; ``nu_eff_model`` is the closed-form value.
    """
    alphas = _grid(np.linspace(-1, 1, 11) if alpha_grid is None else alpha_grid, "alpha_grid")
    if not omega_scale > 0:
        raise ValueError("omega_scale must be > 0")
    tau = _grid(_default_ramsey_grid() if tau_grid is None else tau_grid, "tau_grid")
    ref = run_ramsey_scan(params, "DQ", "0", tau, reference_offset, mode=mode, step=step, workers=workers)
    f_ref = ref.value("reference_peak")
    peaks, model = [], []
    res = SweepResult(
        "alpha-sweep", "alpha", "1", alphas, {},
        settings={"omega_scale_MHz": omega_scale, "reference_offset_MHz": reference_offset, "mode": mode},
    )
    if omega_scale <= 4 * abs(params.nu_dip):
        res.warnings.append("omega_scale <= 4*nu_dip: effective-coupling law not expected to hold")
    for a in alphas:
        drive = alpha_drive(float(a), omega_scale)
        y = ramsey_signal(params, "DQ", drive, tau, reference_offset, mode, step, workers)
        pk = find_peak(power_spectrum(tau, y, "hann", ZERO_PAD), (2 / (tau[-1] - tau[0]), 1 / (2 * (tau[1] - tau[0]))))
        peaks.append(pk.frequency - f_ref)
        model.append(effective_coupling(*drive, params.nu_dip))
    shift = np.array(peaks)
    res.signals = {"dq_shift": shift, "nu_eff": shift / 2, "nu_eff_model": np.array(model)}
    dev = np.abs(shift / 2 - np.array(model))
    err = ref.spectra["reference"].bin_width
    res.extracted["max_deviation"] = (float(dev.max()), err)
    res.extracted["reference_peak"] = (f_ref, err)
    return res


# --------------------------------------------------------------- HH sweeps


def _default_tau(params: SystemParams, drive_B) -> float:
    try:
        nu = abs(effective_coupling(*drive_B, params.nu_dip))
    except ValueError:
        nu = 0.0
    if nu == 0:
        nu = abs(params.nu_dip) / 2 or 0.125
    return 1 / (2 * nu)


def run_hh_rabi_sweep(
    params: SystemParams,
    omegaA_grid,
    drive_B: tuple[float, float],
    tau_fixed: float | None = None,
    crosstalk_detuning: float | None = None,
    mode: str = "rwa",
    step: float | None = None,
    workers: int | None = None,
) -> SweepResult:
    """NV_A spin-lock signal vs lock Rabi frequency, Lorentzian dip fit.

    ``tau_fixed`` defaults to half a transfer period, ``1/(2|nu_eff|)``,
    where the resonant dip is deepest. ``crosstalk_detuning`` also applies
    A's lock field to B's |0>-|+1> line at that detuning.
    """
    grid = _grid(omegaA_grid, "omegaA_grid")
    if grid[0] <= 0:
        raise ValueError("omegaA_grid values must be > 0")
    drive_B = tuple(map(float, drive_B))
    tau = _default_tau(params, drive_B) if tau_fixed is None else float(tau_fixed)
    if not tau > 0:
        raise ValueError("tau_fixed must be > 0")
    y = _map(partial(_spinlock_point, params, drive_B, tau, crosstalk_detuning, mode, step), grid, workers)
    res = SweepResult(
        "hh-sweep", "omega_A", "MHz", grid, {"P0": y},
        settings={"drive_B_MHz": list(drive_B), "tau_us": tau, "crosstalk_detuning_MHz": crosstalk_detuning,
                  "mode": mode},
    )
    fit = fit_lorentzian(grid, y)
    res.fits["lorentzian"] = fit
    in_range = grid[0] <= fit["center"] <= grid[-1]
    if "flat" in fit.flags or fit["depth"] < MIN_DIP_DEPTH or not in_range or np.ptp(y) < MIN_DIP_DEPTH:
        res.outcome = "no-dip"
        return res
    res.extracted["center"] = (fit["center"], _fit_errors(fit, "center"))
    res.extracted["fwhm"] = (2 * fit["hwhm"], 2 * _fit_errors(fit, "hwhm"))
    res.extracted["depth"] = (fit["depth"], _fit_errors(fit, "depth"))
    if not fit.converged:
        res.warnings.append("Lorentzian fit did not converge")
    return res


def _transfer_point(params, omega_A, drive_B, crosstalk, mode, step, projectors, tau):
    seq = make_spinlock(omega_A, drive_B, tau, crosstalk)
    final = evolve(product_state(), seq, params, mode, step)
    r = seq.readout
    return [observe(final, readout_projector(r.spin, r.projector))] + [observe(final, p) for p in projectors]


def run_hh_transfer(
    params: SystemParams,
    omegaA: float,
    drive_B: tuple[float, float],
    tau_grid=None,
    crosstalk_detuning: float | None = None,
    mode: str = "rwa",
    step: float | None = None,
    workers: int | None = None,
) -> SweepResult:
    """Spin-lock decay of NV_A at (near) matching vs lock duration.

    Reports the fitted oscillation frequency of A's lock signal and, as an
    energy-conservation proxy, A's loss against the gain of B's upper
    dressed state at the first transfer extremum.
    """
    drive_B = tuple(map(float, drive_B))
    tau = _grid(np.linspace(0.1, 25.0, 250) if tau_grid is None else tau_grid, "tau_grid")
    if tau[0] <= 0:
        raise ValueError("tau_grid values must be > 0")
    res = SweepResult(
        "hh-transfer", "tau", "us", tau, {},
        settings={"omega_A_MHz": omegaA, "drive_B_MHz": list(drive_B), "crosstalk_detuning_MHz": crosstalk_detuning,
                  "mode": mode},
    )
    try:
        match = hh_matching(*drive_B)
    except ValueError:
        match = 0.0
    if match == 0 or abs(omegaA - match) > 0.05 * match:
        res.warnings.append(f"omega_A={omegaA:.4g} MHz is more than 5% off matching ({match:.4g} MHz)")
    projectors = []
    if match > 0:
        dp = dressed_states(*drive_B)
        projectors = [embed(np.outer(dp.plus_d, dp.plus_d.conj()), "B"), embed(np.outer(dp.minus_d, dp.minus_d.conj()), "B")]
    fn = partial(_transfer_point, params, float(omegaA), drive_B, crosstalk_detuning, mode, step, projectors)
    rows = _map(fn, tau, workers).reshape(tau.size, -1)
    y = rows[:, 0]
    res.signals["P0"] = y
    if projectors:
        start = np.array(fn(1e-9))
        res.signals["B_plus_d"] = rows[:, 1]
        res.signals["B_minus_d"] = rows[:, 2]
    fit = fit_damped_cosine(tau, y)
    res.fits["damped_cosine"] = fit
    if "flat" in fit.flags or fit["amp"] < 1e-3:
        res.outcome = "no-transfer"
        return res
    f = fit["freq"]
    res.extracted["frequency"] = (f, _fit_errors(fit, "freq"))
    res.extracted["decay_rate"] = (fit["decay_rate"], _fit_errors(fit, "decay_rate"))
    if not fit.converged:
        res.warnings.append("damped-cosine fit did not converge")
    if projectors and f > 0:
        k = int(np.argmin(np.abs(tau - 1 / (2 * f))))
        loss = float(start[0] - y[k])
        gains = rows[k, 1:] - start[1:]
        gain = float(np.max(gains))
        res.extracted["A_loss"] = (loss, 0.0)
        res.extracted["B_gain"] = (gain, 0.0)
        res.extracted["extremum_tau"] = (float(tau[k]), float(tau[1] - tau[0]))
    return res

