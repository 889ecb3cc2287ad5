"""Spectra, peak interpolation and small nonlinear least-squares fits.

Fits are Levenberg-Marquardt (MINPACK via :func:`scipy.optimize.least_squares`
with ``method="lm"``) on analytic Jacobians, with deterministic data-driven
initial guesses when none is supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "FitResult",
    "PeakEstimate",
    "Spectrum",
    "damped_cosine",
    "find_peak",
    "fit_damped_cosine",
    "fit_lorentzian",
    "inverted_lorentzian",
    "power_spectrum",
]

MAX_ITER = 200
STEP_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    freqs: np.ndarray
    power: np.ndarray
    window: str = "hann"
    zero_pad_factor: int = 1

    @property
    def bin_width(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


@dataclass(frozen=True)
class PeakEstimate:
    frequency: float
    power: float
    at_edge: bool = False


@dataclass
class FitResult:
    params: dict[str, float]
    errors: dict[str, float]
    residual_norm: float
    converged: bool
    iterations: int
    covariance: np.ndarray | None = None
    flags: tuple[str, ...] = field(default=())

    def __getitem__(self, key: str) -> float:
        return self.params[key]

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "errors": dict(self.errors),
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "iterations": self.iterations,
            "covariance": None if self.covariance is None else self.covariance.tolist(),
            "flags": list(self.flags),
        }


def _uniform_step(t: np.ndarray) -> float:
    d = np.diff(t)
    if d.size == 0 or np.any(d <= 0):
        raise ValueError("sample times must be strictly increasing")
    dt = float(d.mean())
    if np.max(np.abs(d - dt)) > 1e-6 * dt:
        raise ValueError("power_spectrum needs uniform sampling")
    return dt


def power_spectrum(t, y, window: str = "hann", zero_pad_factor: int = 1) -> Spectrum:
    """One-sided periodogram of a mean-subtracted, windowed, zero-padded signal.

    Normalised so that ``sum(power) == sum(|x_windowed|^2)``.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.size < 8:
        raise ValueError("need matching t and y with at least 8 samples")
    if int(zero_pad_factor) < 1:
        raise ValueError("zero_pad_factor must be >= 1")
    dt = _uniform_step(t)
    x = y - y.mean()
    if window == "hann":
        x = x * np.hanning(x.size)
    elif window != "rect":
        raise ValueError(f"unknown window {window!r}")
    n = x.size * int(zero_pad_factor)
    spec = np.fft.rfft(x, n)
    power = np.abs(spec) ** 2 / n
    if n % 2 == 0:
        power[1:-1] *= 2
    else:
        power[1:] *= 2
    return Spectrum(np.fft.rfftfreq(n, dt), power, window, int(zero_pad_factor))


def find_peak(spec: Spectrum, band: tuple[float, float] | None = None) -> PeakEstimate:
    """Largest bin inside ``band`` refined by a 3-point parabola.

    A maximum on the first or last bin of the band is returned unrefined with
    ``at_edge=True``.
    """
    f, p = spec.freqs, spec.power
    if band is None:
        idx = np.arange(f.size)
    else:
        lo, hi = band
        idx = np.nonzero((f >= lo) & (f <= hi))[0]
    if idx.size == 0:
        raise ValueError(f"no spectrum bins inside band {band}")
    k = int(idx[np.argmax(p[idx])])
    if k == idx[0] or k == idx[-1]:
        return PeakEstimate(float(f[k]), float(p[k]), True)
    y0, y1, y2 = p[k - 1], p[k], p[k + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    shift = min(0.5, max(-0.5, shift))
    height = y1 - 0.25 * (y0 - y2) * shift
    return PeakEstimate(float(f[k] + shift * spec.bin_width), float(height), False)


# --------------------------------------------------------------------- models


def inverted_lorentzian(x, center, hwhm, depth, offset):
    return offset - depth / (1 + ((x - center) / hwhm) ** 2)


def _lorentzian_jac(p, x):
    center, hwhm, depth, _ = p
    u = (x - center) / hwhm
    den = 1 + u**2
    d_center = -depth * 2 * u / (hwhm * den**2)
    d_hwhm = -depth * 2 * u**2 / (hwhm * den**2)
    d_depth = -1 / den
    d_offset = np.ones_like(x)
    return np.column_stack([d_center, d_hwhm, d_depth, d_offset])


def damped_cosine(t, freq, decay_rate, amp, offset, phase):
    return offset + amp * np.cos(2 * np.pi * freq * t + phase) * np.exp(-decay_rate * t)


def _damped_cosine_jac(p, t):
    freq, decay, amp, _, phase = p
    arg = 2 * np.pi * freq * t + phase
    env = np.exp(-decay * t)
    c, s = np.cos(arg), np.sin(arg)
    return np.column_stack(
        [
            -amp * s * env * 2 * np.pi * t,
            -amp * c * env * t,
            c * env,
            np.ones_like(t),
            -amp * s * env,
        ]
    )


def _lm(model, jac, x, y, p0, names) -> FitResult:
    p0 = np.asarray(p0, dtype=float)
    start = float(np.linalg.norm(model(x, *p0) - y))

    def resid(p):
        return model(x, *p) - y

    try:
        res = least_squares(
            resid,
            p0,
            jac=lambda p: jac(p, x),
            method="lm",
            xtol=STEP_TOL,
            ftol=1e-15,
            gtol=1e-15,
            max_nfev=MAX_ITER,
        )
    except (ValueError, np.linalg.LinAlgError):
        return FitResult(dict(zip(names, p0)), {n: math.inf for n in names}, start, False, 0, None, ("failed",))
    p = res.x
    rnorm = float(np.linalg.norm(res.fun))
    dof = max(1, x.size - p.size)
    s2 = rnorm**2 / dof
    try:
        cov = np.linalg.inv(res.jac.T @ res.jac) * s2
        errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        cov, errs = None, np.full(p.size, math.inf)
    converged = bool(res.status > 0) and rnorm <= start + 1e-300
    return FitResult(
        dict(zip(names, map(float, p))),
        dict(zip(names, map(float, errs))),
        rnorm,
        converged,
        int(res.nfev),
        cov,
    )


def _flat(y) -> bool:
    span = float(np.ptp(y))
    return span <= 1e-9 * max(1.0, float(np.max(np.abs(y))))


def fit_lorentzian(x, y, init: Mapping[str, float] | None = None) -> FitResult:
    """Fit ``offset - depth / (1 + ((x - center)/hwhm)^2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    names = ("center", "hwhm", "depth", "offset")
    if x.size < 5:
        raise ValueError("fit_lorentzian needs at least 5 points")
    if _flat(y):
        p = {"center": float(x[x.size // 2]), "hwhm": float(np.ptp(x)), "depth": 0.0, "offset": float(y.mean())}
        return FitResult(p, {n: math.inf for n in names}, 0.0, False, 0, None, ("flat",))
    if init is None:
        init = _lorentzian_guess(x, y)
    p0 = [init[n] for n in names]
    res = _lm(inverted_lorentzian, _lorentzian_jac, x, y, p0, names)
    res.params["hwhm"] = abs(res.params["hwhm"])
    return res


def _lorentzian_guess(x, y) -> dict[str, float]:
    order = np.argsort(x)
    x, y = x[order], y[order]
    k = int(np.argmin(y))
    if 0 < k < x.size - 1:
        y0, y1, y2 = y[k - 1], y[k], y[k + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        center = x[k] + min(0.5, max(-0.5, shift)) * (x[k + 1] - x[k - 1]) / 2
    else:
        center = x[k]
    edge = max(2, x.size // 10)
    offset = float(np.median(np.concatenate([y[:edge], y[-edge:]])))
    depth = max(offset - float(y[k]), 1e-12)
    below = np.nonzero(y <= offset - depth / 2)[0]
    width = (x[below[-1]] - x[below[0]]) / 2 if below.size > 1 else (x[1] - x[0])
    return {"center": float(center), "hwhm": float(max(width, x[1] - x[0])), "depth": depth, "offset": offset}


def fit_damped_cosine(t, y, init: Mapping[str, float] | None = None) -> FitResult:
    """Fit ``offset + amp * cos(2 pi freq t + phase) * exp(-decay_rate t)``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    names = ("freq", "decay_rate", "amp", "offset", "phase")
    if t.size < 8:
        raise ValueError("fit_damped_cosine needs at least 8 points")
    if _flat(y):
        p = {"freq": 0.0, "decay_rate": 0.0, "amp": 0.0, "offset": float(y.mean()), "phase": 0.0}
        return FitResult(p, {n: math.inf for n in names}, 0.0, False, 0, None, ("flat",))
    if init is None:
        init = _damped_cosine_guess(t, y)
    p0 = [init[n] for n in names]
    res = _lm(damped_cosine, _damped_cosine_jac, t, y, p0, names)
    p = res.params
    if p["amp"] < 0:
        p["amp"] = -p["amp"]
        p["phase"] += math.pi
    if p["freq"] < 0:
        p["freq"] = -p["freq"]
        p["phase"] = -p["phase"]
    p["phase"] = float((p["phase"] + math.pi) % (2 * math.pi) - math.pi)
    return res


def _damped_cosine_guess(t, y) -> dict[str, float]:
    spec = power_spectrum(t, y, "hann", 8)
    band = (spec.freqs[1], spec.freqs[-1])
    freq = find_peak(spec, band).frequency
    w = 2 * np.pi * freq
    a = np.column_stack([np.ones_like(t), np.cos(w * t), np.sin(w * t)])
    (c0, c1, c2), *_ = np.linalg.lstsq(a, y, rcond=None)
    return {
        "freq": float(freq),
        "decay_rate": 0.0,
        "amp": float(math.hypot(c1, c2)),
        "offset": float(c0),
        "phase": float(math.atan2(-c2, c1)),
    }
