import random

import numpy as np
import pytest

import raggedcore as rc

from conftest import (
    make_two_field_builder,
    make_xy_builder,
    random_spec,
    random_values,
    replay_two_field_sequence,
    XY_ROWS,
)


class TestPrimitiveAppend:
    def test_float64_bit_exact(self):
        b = rc.PrimitiveBuilder(rc.FLOAT64)
        b.append(1.1)
        b.append(2.2)
        node = b.snapshot_layout()
        assert node.data.to_bytes() == np.array([1.1, 2.2], "<f8").tobytes()

    def test_int32_sequence(self):
        b = rc.PrimitiveBuilder(rc.INT32)
        for v in (1, 1, 2):
            b.append(v)
        assert np.frombuffer(b.snapshot_layout().data.raw, "<i4").tolist() == [1, 1, 2]

    def test_int32_overflow(self):
        b = rc.PrimitiveBuilder(rc.INT32)
        with pytest.raises(rc.RangeError, match="2147483648"):
            b.append(2**31)
        with pytest.raises(rc.RangeError):
            b.append(-(2**31) - 1)
        assert b.length == 0  # nothing silently stored

    def test_uint32_negative(self):
        b = rc.PrimitiveBuilder(rc.UINT32)
        with pytest.raises(rc.RangeError):
            b.append(-1)

    def test_type_mismatch(self):
        b = rc.PrimitiveBuilder(rc.INT32)
        with pytest.raises(rc.TypeMismatchError):
            b.append("x")
        with pytest.raises(rc.TypeMismatchError):
            b.append(1.5)
        with pytest.raises(rc.TypeMismatchError):
            b.append(True)  # bools are not integers here

    def test_bool_builder(self):
        b = rc.PrimitiveBuilder(rc.BOOL8)
        b.append(True)
        b.append(False)
        assert b.snapshot_layout().data.to_bytes() == b"\x01\x00"
        with pytest.raises(rc.TypeMismatchError):
            b.append(1)

    def test_growth_beyond_initial_capacity(self):
        b = rc.PrimitiveBuilder(rc.INT32)
        n = rc.GrowableBuffer.INITIAL_CAPACITY * 2 + 5
        for i in range(n):
            b.append(i % 100)
        node = b.snapshot_layout()
        assert len(node) == n
        assert node.data_np.tolist() == [i % 100 for i in range(n)]


class TestListStateMachine:
    def test_empty_list(self):
        b = rc.ListOffsetBuilder(rc.PrimitiveBuilder(rc.INT32))
        b.begin_list()
        b.end_list()
        assert np.frombuffer(b.snapshot_layout().offsets.raw, "<i8").tolist() == [0, 0]

    def test_canonical_sequence_offsets(self):
        b = rc.ListOffsetBuilder(rc.PrimitiveBuilder(rc.INT32))
        sub = b.begin_list()
        sub.append(1)
        b.end_list()
        b.begin_list()
        sub.append(1)
        sub.append(2)
        b.end_list()
        node = b.snapshot_layout()
        assert np.frombuffer(node.offsets.raw, "<i8").tolist() == [0, 1, 3]
        assert [len(row) for row in rc.Array(node)] == [1, 2]

    def test_end_without_begin(self):
        b = rc.ListOffsetBuilder(rc.PrimitiveBuilder(rc.INT32))
        with pytest.raises(rc.BuilderStateError, match="without begin_list"):
            b.end_list()

    def test_double_begin(self):
        b = rc.ListOffsetBuilder(rc.PrimitiveBuilder(rc.INT32))
        b.begin_list()
        with pytest.raises(rc.BuilderStateError, match="already open"):
            b.begin_list()

    def test_two_empty_lists(self):
        b = rc.ListOffsetBuilder(rc.PrimitiveBuilder(rc.INT32))
        b.begin_list()
        b.end_list()
        b.begin_list()
        b.end_list()
        assert np.frombuffer(b.snapshot_layout().offsets.raw, "<i8").tolist() == [0, 0, 0]

    def test_offsets_after_two_appends(self):
        b = rc.ListOffsetBuilder(rc.PrimitiveBuilder(rc.FLOAT64))
        sub = b.begin_list()
        sub.append(0.5)
        sub.append(0.25)
        b.end_list()
        assert np.frombuffer(b.snapshot_layout().offsets.raw, "<i8").tolist() == [0, 2]


class TestRecordBuilder:
    def test_field_lookup_by_id_and_name(self):
        b = make_two_field_builder()
        assert b.field(0) is b.field("one")
        assert isinstance(b.field(1), rc.ListOffsetBuilder)
        assert b.field(1) is b.field("two")

    def test_unknown_field(self):
        b = make_two_field_builder()
        with pytest.raises(rc.UnknownFieldError, match="one"):
            b.field("three")
        with pytest.raises(rc.UnknownFieldError):
            b.field(7)

    def test_length_fresh_and_after_replay(self):
        b = make_two_field_builder()
        assert b.length == 0
        replay_two_field_sequence(b)
        assert b.length == 2
        assert b.field(0).length == 2
        assert b.field(1).length == 2

    def test_ragged_record_indicator(self):
        b = make_two_field_builder()
        b.field(0).append(1.0)
        b.field(0).append(2.0)
        b.field(1).begin_list()
        b.field(1).end_list()
        assert b.length is None


class TestSnapshot:
    def test_canonical_package(self):
        b = make_two_field_builder()
        replay_two_field_sequence(b)
        pkg = b.snapshot()
        assert pkg.length == 2
        assert set(pkg.buffers) == {"node1-data", "node2-offsets", "node3-data"}
        assert bytes(pkg.buffers["node1-data"]) == np.array([1.1, 2.2], "<f8").tobytes()
        assert bytes(pkg.buffers["node2-offsets"]) == np.array([0, 1, 3], "<i8").tobytes()
        assert bytes(pkg.buffers["node3-data"]) == np.array([1, 1, 2], "<i4").tobytes()
        assert rc.parse_form(pkg.form_json) == pkg.form

    def test_fresh_primitive_snapshot(self):
        pkg = rc.PrimitiveBuilder(rc.FLOAT64).snapshot()
        assert pkg.length == 0
        assert pkg.form == rc.NumpyForm(rc.FLOAT64, "node0")
        assert bytes(pkg.buffers["node0-data"]) == b""

    def test_snapshot_mid_list(self):
        b = rc.ListOffsetBuilder(rc.PrimitiveBuilder(rc.INT32))
        b.begin_list()
        with pytest.raises(rc.BuilderStateError, match="open"):
            b.snapshot()

    def test_snapshot_mid_list_nested(self):
        b = make_two_field_builder()
        b.field(0).append(1.0)
        b.field(1).begin_list()
        with pytest.raises(rc.BuilderStateError):
            b.snapshot()

    def test_snapshot_ragged_record(self):
        b = make_two_field_builder()
        b.field(0).append(1.0)
        with pytest.raises(rc.BuilderStateError, match="one=1, two=0"):
            b.snapshot()

    def test_zero_copy_buffers(self):
        b = rc.PrimitiveBuilder(rc.FLOAT64)
        b.append(1.5)
        pkg = b.snapshot()
        # the package views the builder's storage, no duplication
        assert pkg.buffers["node0-data"].obj is b._buf.storage

    def test_growth_transparency(self):
        b = rc.PrimitiveBuilder(rc.INT64)
        for i in range(10):
            b.append(i)
        first = b.snapshot()
        for i in range(10, 3000):  # forces reallocation
            b.append(i)
        second = b.snapshot()
        n = first.length
        assert bytes(first.buffers["node0-data"]) == bytes(
            second.buffers["node0-data"][: n * 8]
        )
        assert first.length == 10 and second.length == 3000

    def test_replay_determinism(self):
        pkgs = []
        for _ in range(2):
            b = make_two_field_builder()
            replay_two_field_sequence(b)
            pkgs.append(b.snapshot())
        a, b_ = pkgs
        assert a.form == b_.form and a.length == b_.length
        assert {k: bytes(v) for k, v in a.buffers.items()} == {
            k: bytes(v) for k, v in b_.buffers.items()
        }


class TestClear:
    def test_clear_then_snapshot_empty(self):
        b = make_two_field_builder()
        replay_two_field_sequence(b)
        b.clear()
        pkg = b.snapshot()
        assert pkg.length == 0
        assert bytes(pkg.buffers["node2-offsets"]) == np.array([0], "<i8").tobytes()

    def test_clear_fresh_noop(self):
        b = rc.PrimitiveBuilder(rc.INT32)
        b.clear()
        assert b.length == 0

    def test_clear_then_replay_identical(self):
        b = make_two_field_builder()
        replay_two_field_sequence(b)
        first = b.snapshot()
        first_bytes = {k: bytes(v) for k, v in first.buffers.items()}
        b.clear()
        replay_two_field_sequence(b)
        second = b.snapshot()
        assert first.form == second.form
        assert first_bytes == {k: bytes(v) for k, v in second.buffers.items()}

    def test_clear_preserves_prior_snapshot(self):
        b = rc.PrimitiveBuilder(rc.INT32)
        b.append(41)
        pkg = b.snapshot()
        b.clear()
        b.append(99)
        assert np.frombuffer(pkg.buffers["node0-data"], "<i4").tolist() == [41]


class TestAppendValue:
    def test_xy_rows_via_builder(self):
        b = make_xy_builder()
        for row in XY_ROWS:
            rc.append_value(b, row)
        arr = rc.Array(b.snapshot_layout())
        assert rc.to_list(arr) == XY_ROWS

    def test_structure_mismatch(self):
        b = make_xy_builder()
        with pytest.raises(rc.TypeMismatchError, match="var"):
            rc.append_value(b, {"x": 1})
        b2 = make_two_field_builder()
        with pytest.raises(rc.TypeMismatchError, match="missing"):
            rc.append_value(b2, {"one": 1.0})
        with pytest.raises(rc.TypeMismatchError, match="unexpected"):
            rc.append_value(b2, {"one": 1.0, "two": [], "three": 0})

    def test_random_sequences_against_shadow(self):
        # builder output must equal the plain-Python shadow of the same appends
        rng = random.Random(321)
        for _ in range(60):
            spec = random_spec(rng, 2)
            values = random_values(rng, spec, rng.randint(0, 30))
            b = _builder_from_spec(spec)
            for v in values:
                rc.append_value(b, v)
            assert b.length == len(values)
            got = rc.to_list(rc.Array(b.snapshot_layout()))
            assert got == values
            assert rc.validate(b.snapshot_layout()).ok


def _builder_from_spec(spec) -> rc.Builder:
    if spec[0] == "prim":
        return rc.PrimitiveBuilder(spec[1])
    if spec[0] == "list":
        return rc.ListOffsetBuilder(_builder_from_spec(spec[1]))
    return rc.RecordBuilder([(n, _builder_from_spec(s)) for n, s in spec[1]])
