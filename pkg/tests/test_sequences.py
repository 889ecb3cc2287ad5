import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dressedspin.model import DriveSpec, SystemParams, hh_matching
from dressedspin.propagate import run_sequence
from dressedspin.sequences import (
    Dephase,
    Prep,
    PulseSequence,
    Read,
    Rot,
    Segment,
    SequenceParseError,
    make_deer,
    make_ramsey,
    make_spinlock,
    parse_sequence,
    render_sequence,
)

FIXTURE = Path(__file__).resolve().parents[1] / "configs" / "deer_sq.seq"


def test_parse_minimal():
    seq = parse_sequence("prep A |0>\nwait 1.0\nread A P0\n")
    waits = [s for s in seq.segments if s.duration > 0]
    assert len(waits) == 1 and waits[0].duration == 1.0
    assert Prep("A", "0") in waits[0].markers
    assert seq.readout == Read("A", "P0")


def test_empty_input_has_no_readout():
    with pytest.raises(SequenceParseError, match="no readout"):
        parse_sequence("")


def test_comments_and_blank_lines():
    seq = parse_sequence("# header\n\nprep B |-1>  # trailing\nwait 0.5\nread A P0\n")
    assert seq.duration == 0.5


def test_segment_block_with_drives():
    text = "prep A |0>\nsegment 2.5\ndrive B plus 3.0 det 0.1 phase 0.5\ndrive B minus 1.0\nend\nread A P0\n"
    seq = parse_sequence(text)
    seg = [s for s in seq.segments if s.duration > 0][0]
    assert seg.duration == 2.5
    assert seg.drives == (DriveSpec("B", "plus", 3.0, 0.1, 0.5), DriveSpec("B", "minus", 1.0))


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("prep A |0>\nwait -1\nread A P0", 2, 6),
        ("prep C |0>\nread A P0", 1, 6),
        ("wait 1\nfrob\nread A P0", 2, 1),
        ("segment 1\ndrive B sideways 3\nend\nread A P0", 2, 9),
        ("wait 1\nread A P0\nread B P0", 3, 1),
    ],
)
def test_errors_have_location(text, line, column):
    with pytest.raises(SequenceParseError) as err:
        parse_sequence(text)
    assert err.value.line == line
    if column:
        assert err.value.column >= 1
    assert f"line {line}" in str(err.value)


def test_golden_deer_fixture():
    assert parse_sequence(FIXTURE.read_text()) == make_deer("SQ", 2.0)
    assert render_sequence(make_deer("SQ", 2.0)) == FIXTURE.read_text()


BUILDERS = [
    lambda: make_deer("SQ", 3.0),
    lambda: make_deer("DQ", 0.7),
    lambda: make_ramsey("SQ", "+1", 1.0, 2.35),
    lambda: make_ramsey("DQ", "-1", 1.0, 0.05),
    lambda: make_ramsey("DQ", (7.5, 2.5), 1.0, 4.0),
    lambda: make_spinlock(7.56, (7.56, 0.0), 3.8),
    lambda: make_spinlock(10.44, (9.59, 4.13), 5.6, crosstalk_detuning=60.0),
]


@pytest.mark.parametrize("build", BUILDERS)
def test_builder_round_trip(build):
    seq = build()
    seq.validate()
    again = parse_sequence(render_sequence(seq))
    assert again == seq
    assert render_sequence(again) == render_sequence(seq)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["SQ", "DQ"]), st.floats(1e-3, 1e3, allow_nan=False))
def test_property_deer_round_trip_and_window(basis, tau):
    seq = make_deer(basis, tau)
    assert parse_sequence(render_sequence(seq)) == seq
    # two free-evolution halves, no other elapsed time
    halves = [s.duration for s in seq.segments if s.duration > 0]
    assert halves == [tau / 2, tau / 2]
    assert math.isclose(seq.duration, tau, rel_tol=1e-15)


def test_builders_reject_bad_tau():
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            make_deer("SQ", bad)
        with pytest.raises(ValueError):
            make_ramsey("SQ", "0", 1.0, bad)
        with pytest.raises(ValueError):
            make_spinlock(5.0, (5.0, 0.0), bad)
    with pytest.raises(ValueError):
        make_spinlock(0.0, (5.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        make_deer("XQ", 1.0)


def test_ramsey_warns_outside_validity():
    with pytest.warns(UserWarning):
        make_ramsey("SQ", (0.1, 0.0), 1.0, 1.0, nu_dip=0.26)


def test_sequence_invariants():
    with pytest.raises(ValueError):
        Segment(-1.0)
    with pytest.raises(ValueError):
        PulseSequence((Segment(1.0),)).validate()
    with pytest.raises(ValueError):
        Dephase("A", "0", "0")
    with pytest.raises(ValueError):
        Rot("A", "q+", 1.0)


def test_spinlock_without_drive_stays_locked():
    # no flip-flop partner: only the static Ising shift tilts the lock axis,
    # bounded by 2*(nu/Omega)^2 with no secular decay
    p = SystemParams(nu_dip=0.26)
    bound = 2 * (0.26 / 7.56) ** 2
    vals = [run_sequence(make_spinlock(7.56, (0.0, 0.0), tau), p) for tau in np.linspace(0.5, 40.0, 60)]
    assert min(vals) >= 1 - bound
    p0 = SystemParams(nu_dip=0.0)
    assert run_sequence(make_spinlock(7.56, (0.0, 0.0), 11.0), p0) == pytest.approx(1.0, abs=1e-12)


def test_spinlock_dips_at_matching_only():
    p = SystemParams(nu_dip=0.26)
    tau = 1 / (2 * 0.13)
    matched = run_sequence(make_spinlock(hh_matching(7.56, 0.0), (7.56, 0.0), tau), p)
    detuned = run_sequence(make_spinlock(7.56 + 2.0, (7.56, 0.0), tau), p)
    assert matched < 0.6
    assert detuned > 0.98
