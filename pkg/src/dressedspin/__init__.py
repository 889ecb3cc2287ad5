"""Dressed-state control of dipolar coupling between two spin-1 defects.

Modules: :mod:`spinops` (qutrit operators), :mod:`model` (Hamiltonians and
closed forms), :mod:`sequences` (pulse sequences), :mod:`propagate` (time
evolution), :mod:`analysis` (spectra and fits), :mod:`experiments` (sweep
engines), :mod:`ensemble` (Monte Carlo), :mod:`cli` (command line).
"""

__version__ = "0.1.0"

from .model import DriveSpec, SystemParams, coupling_factor, crosstalk_bound, effective_coupling, hh_matching  # noqa: F401
from .sequences import PulseSequence, Segment, make_deer, make_ramsey, make_spinlock, parse_sequence, render_sequence  # noqa: F401
from .propagate import evolve, run_sequence  # noqa: F401
