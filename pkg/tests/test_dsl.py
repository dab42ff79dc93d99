from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinlab.dsl import ParseError, format_program, parse_program
from spinlab.grover import MARKS, grover_inversion_sequence, grover_iteration, grover_oracle_sequence
from spinlab.sequences import (
    Acquire,
    Delay,
    FrameShift,
    Pulse,
    PulseSequence,
    Rotation,
    cnot_sequence,
    composite_z_variants,
    labeling_sequence,
    sequence_unitary,
)

PROGRAMS = sorted((Path(__file__).parent / "programs").glob("*.pp"))


def test_corpus_size():
    assert len(PROGRAMS) >= 20


@pytest.mark.parametrize("path", PROGRAMS, ids=lambda p: p.stem)
def test_corpus_round_trip(path, sys3):
    first = parse_program(path.read_text(), sys3)
    text = format_program(first)
    second = parse_program(text, sys3)
    assert second == first
    assert format_program(second) == text


def test_header_loads_system():
    path = PROGRAMS[0].parent / "04_labeling.pp"
    seq = parse_program(path.read_text(), base_dir=path.parent)
    assert seq.system_path == "bromotrifluoroethylene.cfg"
    assert format_program(seq).startswith("system bromotrifluoroethylene.cfg\n")


def test_no_system_anywhere():
    with pytest.raises(ParseError, match="no spin system"):
        parse_program("pulse A x90\n")


def test_example_program(sys3):
    seq = parse_program("pulse B,C y90\ndelay 1/(2*J[B,C])\npulse B,C y-90\n", sys3)
    assert len(seq.events) == 3
    assert seq.events[0] == Pulse((Rotation("B", "y", np.pi / 2), Rotation("C", "y", np.pi / 2)))
    assert seq.events[1].duration == pytest.approx(9.2937e-3, abs=5e-8)
    assert seq.events[2].rotations[0].angle == -np.pi / 2


def test_empty_program(sys3):
    assert parse_program("", sys3).events == []
    assert parse_program("# only a comment\n\n", sys3).events == []


def test_axis_sign_forms(sys3):
    a, b = parse_program("pulse A -y90\npulse A y-90\n", sys3).events
    assert a.rotations[0] == Rotation("A", "-y", np.pi / 2)
    assert b.rotations[0] == Rotation("A", "y", -np.pi / 2)


def test_statement_kinds(sys3):
    seq = parse_program("frame uncouple A\nacquire B,C 4 0.001\nframe resonant\n", sys3)
    assert isinstance(seq.events[0], FrameShift) and seq.events[0].frame.delta_hz[1] == pytest.approx(61.05)
    assert seq.events[1] == Acquire(("B", "C"), 4.0, 0.001)
    assert seq.events[2].frame.delta_hz == (0.0, 0.0, 0.0)


@pytest.mark.parametrize(
    "text,message,line,column",
    [
        ("pulse Q x90", "unknown spin Q", 1, 7),
        ("pulse B,Q x90", "unknown spin Q", 1, 9),
        ("pulse A x9o", "malformed angle", 1, 10),
        ("pulse A xx", "malformed angle", 1, 10),
        ("pulse A z90", "malformed rotation", 1, 9),
        ("delay 1 - 2", "negative delay", 1, 7),
        ("# c\nfoo A", "unknown keyword 'foo'", 2, 1),
        ("delay 1/(2*J[B,Q])", "unknown spin Q", 1, 16),
        ("delay 2**3", "unsupported element", 1, 7),
        ("delay abs(1)", "unsupported element", 1, 7),
        ("delay 1/0", "division by zero", 1, 7),
        ("delay (1", "malformed delay expression", 1, 7),
        ("delay", "delay needs an expression", 1, 1),
        ("pulse B x90 & B y90", "pulsed twice", 1, 15),
        ("pulse B", "pulse needs", 1, 7),
        ("frame sideways", "frame must be", 1, 1),
        ("frame uncouple Q", "unknown spin Q", 1, 16),
        ("acquire B 4", "acquire needs", 1, 1),
        ("acquire B -4 0.001", "positive number", 1, 11),
    ],
)
def test_diagnostics(sys3, text, message, line, column):
    with pytest.raises(ParseError) as info:
        parse_program(text, sys3)
    err = info.value
    assert message in err.message
    assert (err.line, err.column) == (line, column)
    assert str(err).startswith(f"line {line}, column {column}:")


def test_error_kinds_are_distinct(sys3):
    cases = {
        "pulse Q x90": "unknown spin",
        "pulse A xab": "malformed angle",
        "delay -1": "negative delay",
        "bogus": "unknown keyword",
    }
    for text, prefix in cases.items():
        with pytest.raises(ParseError) as info:
            parse_program(text, sys3)
        assert info.value.message.startswith(prefix)


LIBRARY = [
    lambda s: labeling_sequence(s),
    lambda s: grover_inversion_sequence(s),
    lambda s: cnot_sequence(s, "B", "A"),
    lambda s: cnot_sequence(s, "C", "B", refocus=()),
    *[lambda s, x=x: grover_oracle_sequence(s, x) for x in MARKS],
    *[lambda s, x=x: grover_iteration(s, x) for x in MARKS],
    *[lambda s, v=v: v for v in composite_z_variants("B")],
]


@pytest.mark.parametrize("make", LIBRARY)
def test_library_sequences_round_trip(sys3, make):
    seq = make(sys3)
    back = parse_program(format_program(seq), sys3)
    assert back.events == seq.events
    U, _ = sequence_unitary(seq, sys3)
    V, _ = sequence_unitary(back, sys3)
    assert np.array_equal(U, V)


spins = st.lists(st.sampled_from("ABC"), min_size=1, max_size=3, unique=True)
axes = st.sampled_from(["x", "y", "-x", "-y"])
degrees = st.one_of(st.sampled_from([90.0, -90.0, 180.0, 45.0]), st.floats(-720, 720, allow_nan=False))
delay_exprs = st.sampled_from(
    ["0.001", "1/(2*J[B,C])", "(1/(2*J[A,C]) + 1/(2*(-J[A,B])))/2", "1/J[A,C] - 1/(2*J[A,C])", "3e-3*2"]
)


@st.composite
def statements(draw):
    kind = draw(st.sampled_from(["pulse", "delay", "frame", "acquire"]))
    if kind == "pulse":
        groups = draw(st.lists(st.tuples(spins, axes, degrees), min_size=1, max_size=3))
        used, parts = set(), []
        for sp, ax, deg in groups:
            sp = [s for s in sp if s not in used]
            if sp:
                used.update(sp)
                parts.append(f"{','.join(sp)} {ax}{deg!r}")
        return "pulse " + " & ".join(parts)
    if kind == "delay":
        return "delay " + draw(delay_exprs)
    if kind == "frame":
        return draw(st.sampled_from(["frame resonant", "frame uncouple A", "frame uncouple C"]))
    return f"acquire {','.join(draw(spins))} {draw(st.floats(0.1, 8))!r} {draw(st.floats(1e-4, 1e-2))!r}"


@given(st.lists(statements(), max_size=10))
def test_generated_programs_round_trip(lines):
    from spinlab.system import bromotrifluoroethylene

    sys = bromotrifluoroethylene()
    first = parse_program("\n".join(lines), sys)
    printed = format_program(first)
    assert parse_program(printed, sys) == first
    assert format_program(parse_program(printed, sys)) == printed


def test_unprintable_event():
    from spinlab.errors import InputError

    with pytest.raises(InputError):
        format_program(PulseSequence(["not an event"]))


def test_delay_keeps_expression(sys3):
    seq = parse_program("delay   1/(2*J[B,C])   # half-J\n", sys3)
    assert seq.events[0] == Delay(1 / (2 * 53.8), "1/(2*J[B,C])")
