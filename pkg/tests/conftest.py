"""Shared fixtures and test-local generators.

The random-array machinery here is deliberately independent of the package's
builder: it generates plain Python values for a random type and encodes them
into layout nodes with its own offsets arithmetic, so value-identity checks
have two separate routes to compare.
"""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

import raggedcore as rc

# ---------------------------------------------------------------------------
# the three-row {x, y} demo array (two records, none, one record)

XY_ROWS = [
    [{"x": 1, "y": [1.1]}, {"x": 2, "y": [2.2, 0.2]}],
    [],
    [{"x": 3, "y": [3.0, 0.3, 3.3]}],
]

XY_TYPE = "3 * var * {x: int64, y: var * float64}"


def make_xy_array() -> rc.Array:
    x = rc.PrimitiveNode(rc.INT64, np.array([1, 2, 3], "<i8"))
    y = rc.ListOffsetNode(
        np.array([0, 1, 3, 6], "<i8"),
        rc.PrimitiveNode(rc.FLOAT64, np.array([1.1, 2.2, 0.2, 3.0, 0.3, 3.3], "<f8")),
    )
    rec = rc.RecordNode(("x", "y"), (x, y))
    return rc.Array(rc.ListOffsetNode(np.array([0, 2, 2, 3], "<i8"), rec))


def make_xy_builder() -> rc.Builder:
    rec = rc.RecordBuilder(
        [
            ("x", rc.PrimitiveBuilder(rc.INT64)),
            ("y", rc.ListOffsetBuilder(rc.PrimitiveBuilder(rc.FLOAT64))),
        ]
    )
    return rc.ListOffsetBuilder(rec)


@pytest.fixture
def xy_array() -> rc.Array:
    return make_xy_array()


def make_two_field_builder() -> rc.RecordBuilder:
    """record{one: float64, two: var * int32} with integer identifiers."""
    return rc.RecordBuilder(
        {
            0: ("one", rc.PrimitiveBuilder(rc.FLOAT64)),
            1: ("two", rc.ListOffsetBuilder(rc.PrimitiveBuilder(rc.INT32))),
        }
    )


def replay_two_field_sequence(b: rc.RecordBuilder) -> None:
    """The canonical append sequence: 1.1/[1], then 2.2/[1, 2]."""
    one = b.field(0)
    two = b.field(1)
    one.append(1.1)
    sub = two.begin_list()
    sub.append(1)
    two.end_list()
    one.append(2.2)
    two.begin_list()
    sub.append(1)
    sub.append(2)
    two.end_list()


# ---------------------------------------------------------------------------
# random arrays: spec -> values -> layout, all test-local

_PRIMS = [rc.INT32, rc.INT64, rc.UINT32, rc.FLOAT32, rc.FLOAT64, rc.BOOL8]


def random_spec(rng: random.Random, depth: int, allow_record: bool = True):
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        return ("prim", rng.choice(_PRIMS))
    if roll < 0.75 or not allow_record:
        return ("list", random_spec(rng, depth - 1, allow_record))
    nfields = rng.randint(1, 3)
    names = [f"f{i}" for i in range(nfields)]
    return ("record", [(n, random_spec(rng, depth - 1, allow_record)) for n in names])


def random_values(rng: random.Random, spec, n: int):
    kind = spec[0]
    if kind == "prim":
        dt = spec[1]
        if dt is rc.INT32:
            return [rng.randint(-(2**31), 2**31 - 1) for _ in range(n)]
        if dt is rc.INT64:
            return [rng.randint(-(2**62), 2**62) for _ in range(n)]
        if dt is rc.UINT32:
            return [rng.randint(0, 2**32 - 1) for _ in range(n)]
        if dt is rc.FLOAT64:
            return [rng.gauss(0.0, 100.0) for _ in range(n)]
        if dt is rc.FLOAT32:
            vals = np.array([rng.gauss(0.0, 100.0) for _ in range(n)], "<f4")
            return [float(v) for v in vals]
        return [rng.random() < 0.5 for _ in range(n)]
    if kind == "list":
        return [
            random_values(rng, spec[1], rng.randint(0, 4)) for _ in range(n)
        ]
    return [
        {name: random_values(rng, sub, 1)[0] for name, sub in spec[1]}
        for _ in range(n)
    ]


def encode_values(spec, values) -> rc.Layout:
    """Independent encoder: values -> layout nodes via local offsets math."""
    kind = spec[0]
    if kind == "prim":
        dt = spec[1]
        return rc.PrimitiveNode(dt, np.array(values, dtype=dt.np_dtype))
    if kind == "list":
        offsets = [0]
        flat = []
        for row in values:
            flat.extend(row)
            offsets.append(len(flat))
        return rc.ListOffsetNode(np.array(offsets, "<i8"), encode_values(spec[1], flat))
    names = [n for n, _ in spec[1]]
    contents = [encode_values(sub, [v[name] for v in values]) for name, sub in spec[1]]
    return rc.RecordNode(names, contents)


def random_array(rng: random.Random, max_depth: int = 3, max_length: int = 20):
    """(Array, expected values) for a random type of depth <= max_depth."""
    spec = random_spec(rng, max_depth - 1)
    values = random_values(rng, spec, rng.randint(0, max_length))
    return rc.Array(encode_values(spec, values)), values


def random_record_array(rng: random.Random, max_depth: int = 3, max_length: int = 20):
    """Record-rooted variant (for the tabular adapter)."""
    nfields = rng.randint(1, 4)
    spec = ("record", [(f"c{i}", random_spec(rng, max_depth - 2)) for i in range(nfields)])
    values = random_values(rng, spec, rng.randint(0, max_length))
    return rc.Array(encode_values(spec, values)), values


def random_list_of_primitive(rng: random.Random, max_length: int = 20):
    """List-of-primitive variant (for unflatten/flatten)."""
    dt = rng.choice([rc.INT32, rc.INT64, rc.FLOAT32, rc.FLOAT64])
    spec = ("list", ("prim", dt))
    values = random_values(rng, spec, rng.randint(0, max_length))
    return rc.Array(encode_values(spec, values)), values


# ---------------------------------------------------------------------------
# acceptance reporting: one line per criterion in the terminal summary

ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def record_acceptance(name: str, ok: bool) -> None:
    ACCEPTANCE_RESULTS.append((name, ok))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
