"""Semi-classical Monte Carlo of effective couplings in a dense NV ensemble.

NV centres are placed as a Poisson point process in a cubic box, each with
one of the four <111> axis classes. A central NV sits at the box centre.
Pairwise secular (zz) dipolar couplings are rescaled by the dressed-state
factor of :func:`dressedspin.model.coupling_factor` when the off-axis
population is driven; "not driven" (``drive=None``) keeps the bare coupling.

Two statistics per configuration:

* ``delta``: root-sum-square effective coupling of the central spin to the
  off-axis spins within the cutoff radius.
* ``rdd``: the strongest pairwise effective coupling among off-axis spins
  within the cutoff (per configuration), or each spin's strongest partner
  with ``per_spin=True``.

Random streams are keyed by ``(seed, config_index)`` so results do not
depend on evaluation order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import coupling_factor

__all__ = [
    "AXES",
    "CARBON_SITES_PER_NM3",
    "EnsembleConfig",
    "J0_MHZ_NM3",
    "PdfSummary",
    "SpinSite",
    "delta_statistic",
    "pairwise_coupling",
    "nearest_neighbour_mean",
    "pdf_summary",
    "rdd_statistic",
    "sample_configuration",
    "sweep_drive",
]

# mu0 g^2 muB^2 / (4 pi h) for two electron spins
J0_MHZ_NM3 = 52.0
# diamond: 1.76e23 carbon atoms / cm^3 -> 1.76e-4 sites per nm^3 per ppm
CARBON_SITES_PER_NM3 = 176.0
PPM_TO_NM3 = CARBON_SITES_PER_NM3 * 1e-6

AXES = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float) / math.sqrt(3)


@dataclass(frozen=True)
class EnsembleConfig:
    density_ppm: float = 50.0
    box_edge: float = 50.0
    cutoff_radius: float = 15.0
    n_configs: int = 2000
    drive: tuple[float, float] | None = None
    seed: int = 0
    central_axis_class: int = 0

    def __post_init__(self):
        if not self.density_ppm > 0:
            raise ValueError("density_ppm must be > 0")
        if not self.box_edge > 2 * self.cutoff_radius:
            raise ValueError("box_edge must exceed twice the cutoff radius")
        if int(self.n_configs) < 1:
            raise ValueError("n_configs must be >= 1")
        if self.central_axis_class not in range(4):
            raise ValueError("central_axis_class must be 0..3")

    @property
    def number_density(self) -> float:
        """NV sites per nm^3."""
        return self.density_ppm * PPM_TO_NM3

    @property
    def expected_count(self) -> float:
        return self.number_density * self.box_edge**3


@dataclass(frozen=True)
class SpinSite:
    position: tuple[float, float, float]
    axis_class: int

    @property
    def axis(self) -> np.ndarray:
        return AXES[self.axis_class]


@dataclass
class Sites:
    """Array form of a configuration: positions (n, 3) nm, axis classes (n,)."""

    positions: np.ndarray
    classes: np.ndarray

    def __len__(self) -> int:
        return len(self.classes)

    def to_list(self) -> list[SpinSite]:
        return [SpinSite(tuple(map(float, p)), int(c)) for p, c in zip(self.positions, self.classes)]

    @classmethod
    def from_list(cls, sites: Sequence[SpinSite]) -> "Sites":
        if not sites:
            return cls(np.zeros((0, 3)), np.zeros(0, dtype=int))
        return cls(np.array([s.position for s in sites], float), np.array([s.axis_class for s in sites], int))


@dataclass(frozen=True)
class PdfSummary:
    peak: float | None
    fwhm: float | None
    edges: np.ndarray
    counts: np.ndarray
    n_samples: int

    @property
    def fwhm_over_peak(self) -> float | None:
        if self.peak is None or self.fwhm is None or self.peak == 0:
            return None
        return self.fwhm / self.peak


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def sample_configuration(cfg: EnsembleConfig, config_index: int) -> Sites:
    """Poisson placement in the box; deterministic in (seed, config_index)."""
    rng = _rng(cfg.seed, config_index)
    n = rng.poisson(cfg.expected_count)
    pos = rng.uniform(0.0, cfg.box_edge, size=(n, 3))
    classes = rng.integers(0, 4, size=n)
    return Sites(pos, classes)


def pairwise_coupling(site_i: SpinSite, site_j: SpinSite) -> float:
    """Secular zz dipolar coefficient (MHz) between two NVs."""
    r = np.subtract(site_j.position, site_i.position, dtype=float)
    d = float(np.linalg.norm(r))
    if d == 0:
        raise ValueError("coincident positions")
    return float(_coupling(site_i.axis, site_j.axis, r / d, d))


def _coupling(zi, zj, rhat, dist):
    """Vectorised form: zi, zj, rhat broadcast over leading axes."""
    ang = np.sum(zi * zj, axis=-1) - 3 * np.sum(zi * rhat, axis=-1) * np.sum(zj * rhat, axis=-1)
    return J0_MHZ_NM3 / dist**3 * ang


def _factor(drive) -> float:
    if drive is None:
        return 1.0
    return coupling_factor(*drive)


def _center(cfg: EnsembleConfig | None, sites: Sites, center) -> np.ndarray:
    if center is not None:
        return np.asarray(center, float)
    if cfg is not None:
        return np.full(3, cfg.box_edge / 2)
    return np.zeros(3)


def _off_axis_in_range(sites: Sites, central_axis_class: int, center, cutoff):
    r = sites.positions - center
    d = np.linalg.norm(r, axis=1)
    keep = (sites.classes != central_axis_class) & (d <= cutoff) & (d > 0)
    return keep, r, d


def delta_statistic(
    sites: Sites | Sequence[SpinSite],
    central_axis_class: int,
    drive: tuple[float, float] | None,
    center=None,
    cutoff: float = math.inf,
    cfg: EnsembleConfig | None = None,
) -> float:
    """sqrt(sum_k nu_eff,k^2) between the central spin and its off-axis bath."""
    if not isinstance(sites, Sites):
        sites = Sites.from_list(list(sites))
    if len(sites) == 0:
        return 0.0
    c = _center(cfg, sites, center)
    keep, r, d = _off_axis_in_range(sites, central_axis_class, c, cutoff)
    if not keep.any():
        return 0.0
    zc = AXES[central_axis_class]
    nu = _coupling(zc[None], AXES[sites.classes[keep]], r[keep] / d[keep, None], d[keep])
    return float(abs(_factor(drive)) * math.sqrt(float(np.sum(nu**2))))


def _pair_couplings(pos, classes):
    n = len(classes)
    i, j = np.triu_indices(n, 1)
    diff = classes[i] != classes[j]
    i, j = i[diff], j[diff]
    r = pos[j] - pos[i]
    d = np.linalg.norm(r, axis=1)
    nu = _coupling(AXES[classes[i]], AXES[classes[j]], r / d[:, None], d)
    return i, j, nu


def rdd_statistic(
    sites: Sites | Sequence[SpinSite],
    drive: tuple[float, float] | None,
    central_axis_class: int | None = 0,
    center=None,
    cutoff: float = math.inf,
    per_spin: bool = False,
    cfg: EnsembleConfig | None = None,
):
    """Strongest |nu_eff| among off-axis pairs (differing axis classes).

    Returns ``None`` when fewer than two eligible spins (or no eligible pair)
    exist. With ``per_spin=True`` returns an array with each eligible spin's
    strongest partner coupling instead.
    """
    if not isinstance(sites, Sites):
        sites = Sites.from_list(list(sites))
    if len(sites) < 2:
        return None
    c = _center(cfg, sites, center)
    d = np.linalg.norm(sites.positions - c, axis=1)
    keep = d <= cutoff
    if central_axis_class is not None:
        keep &= sites.classes != central_axis_class
    pos, classes = sites.positions[keep], sites.classes[keep]
    if len(classes) < 2:
        return None
    i, j, nu = _pair_couplings(pos, classes)
    if nu.size == 0:
        return None
    scaled = abs(_factor(drive)) * np.abs(nu)
    if not per_spin:
        return float(scaled.max())
    best = np.zeros(len(classes))
    np.maximum.at(best, i, scaled)
    np.maximum.at(best, j, scaled)
    partnered = np.zeros(len(classes), bool)
    partnered[i] = True
    partnered[j] = True
    return best[partnered]


def pdf_summary(samples, bins: int | None = None, range=None, quantiles=(0.02, 0.95), min_samples: int = 100) -> PdfSummary:
    """Histogram plus smoothed-mode peak and interpolated FWHM.

    Without an explicit ``range`` the histogram spans the given sample
    ``quantiles``; dipolar statistics have long 1/r^3 tails that would
    otherwise swamp the bins. Out-of-range samples are
    clipped into the end bins so the counts always sum to ``len(samples)``,
    but they are left out of the peak/FWHM search. ``bins=None`` picks
    ``1.6*sqrt(n)`` bins (clipped to 20..400). Peak and FWHM are
    ``None`` below ``min_samples`` samples.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n == 0:
        return PdfSummary(None, None, np.zeros(0), np.zeros(0, int), 0)
    if range is None:
        lo, hi = (float(v) for v in np.quantile(x, quantiles))
    else:
        lo, hi = map(float, range)
    if hi <= lo:
        if float(x.max()) > lo:
            hi = float(x.max())
        else:
            half = max(abs(lo), 1.0) * 1e-9
            edges = np.array([lo - half, lo + half])
            peak, fwhm = (lo, 0.0) if n >= min_samples else (None, None)
            return PdfSummary(peak, fwhm, edges, np.array([n]), n)
    if bins is None:
        bins = int(np.clip(round(1.6 * math.sqrt(n)), 20, 400))
    edges = np.linspace(lo, hi, int(bins) + 1)
    counts, _ = np.histogram(np.clip(x, lo, hi), edges)
    if n < min_samples:
        return PdfSummary(None, None, edges, counts, n)
    inside, _ = np.histogram(x[(x >= lo) & (x <= hi)], edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    smooth = np.convolve(np.pad(inside.astype(float), 1, mode="edge"), np.ones(3) / 3, mode="valid")
    k = int(np.argmax(smooth))
    peak = float(centers[k])
    half = smooth[k] / 2
    left = k
    while left > 0 and smooth[left - 1] > half:
        left -= 1
    right = k
    while right < smooth.size - 1 and smooth[right + 1] > half:
        right += 1
    x_left = _cross(centers, smooth, left - 1, left, half) if left > 0 else centers[0]
    x_right = _cross(centers, smooth, right, right + 1, half) if right < smooth.size - 1 else centers[-1]
    return PdfSummary(peak, float(x_right - x_left), edges, counts, n)


def _cross(x, y, i, j, level):
    if y[j] == y[i]:
        return 0.5 * (x[i] + x[j])
    return float(x[i] + (level - y[i]) * (x[j] - x[i]) / (y[j] - y[i]))


@dataclass
class EnsembleSamples:
    delta: np.ndarray
    rdd: np.ndarray


def collect_samples(cfg: EnsembleConfig, drive=None, per_spin: bool = False) -> EnsembleSamples:
    """Per-configuration delta and rdd samples for one drive setting."""
    deltas, rdds = [], []
    for idx in range(int(cfg.n_configs)):
        sites = sample_configuration(cfg, idx)
        deltas.append(
            delta_statistic(sites, cfg.central_axis_class, drive, cutoff=cfg.cutoff_radius, cfg=cfg)
        )
        r = rdd_statistic(
            sites, drive, cfg.central_axis_class, cutoff=cfg.cutoff_radius, per_spin=per_spin, cfg=cfg
        )
        if r is not None:
            rdds.append(np.atleast_1d(r))
    rdd = np.concatenate(rdds) if rdds else np.zeros(0)
    return EnsembleSamples(np.array(deltas), rdd)


@dataclass
class SweepRow:
    omega_plus: float | None
    omega_minus: float | None
    delta: PdfSummary
    rdd: PdfSummary

    @property
    def label(self) -> str:
        if self.omega_plus is None:
            return "ND"
        return f"({self.omega_plus:g}, {self.omega_minus:g})"


def sweep_drive(
    cfg: EnsembleConfig,
    omega_minus_grid: Sequence[float],
    omega_plus: float = 10.0,
    bins: int | None = None,
    include_nd: bool = True,
    per_spin: bool = False,
) -> list[SweepRow]:
    """Delta and R_dd summaries for ND and each (omega_plus, omega_minus)."""
    rows = []
    settings: list = [None] if include_nd else []
    settings += [(float(omega_plus), float(om)) for om in omega_minus_grid]
    for drive in settings:
        s = collect_samples(cfg, drive, per_spin)
        rows.append(
            SweepRow(
                None if drive is None else drive[0],
                None if drive is None else drive[1],
                pdf_summary(s.delta, bins),
                pdf_summary(s.rdd, bins),
            )
        )
    return rows


def nearest_neighbour_mean(cfg: EnsembleConfig, n_configs: int = 20) -> float:
    """Mean nearest-neighbour NV distance (nm) around the box centre."""
    out = []
    c = np.full(3, cfg.box_edge / 2)
    for idx in range(n_configs):
        s = sample_configuration(cfg, idx)
        inner = np.linalg.norm(s.positions - c, axis=1) <= cfg.cutoff_radius
        pts = s.positions[inner]
        if len(pts) < 2:
            continue
        d = np.linalg.norm(pts[:, None] - s.positions[None], axis=-1)
        d[d == 0] = np.inf
        out.append(d.min(axis=1))
    return float(np.concatenate(out).mean()) if out else math.nan
