"""Imperative row kernels: unflatten/flatten, reductions, filter, map.

Reduction order is pinned left-to-right within each row (and depth-first for
whole-array sums) so results are bit-reproducible; there is no pairwise or
compensated summation. ``sum_inner`` accumulates in the declared output
dtype, ``sum_all`` always in float64. Filtering and row mapping materialize
their outputs through builders; they copy, unlike everything else here.
"""

from __future__ import annotations

from typing import Any, Callable, Sequence

import numpy as np

from .builder import PrimitiveBuilder, append_value, builder_for_layout
from .errors import CountError, RowError, TypeMismatchError
from .layout import (
    Array,
    Buffer,
    FLOAT32,
    FLOAT64,
    Layout,
    ListOffsetNode,
    PrimitiveNode,
    PrimitiveType,
    RecordNode,
    get_field,
    get_item,
)
from .view import view_of

__all__ = ["unflatten", "flatten", "sum_inner", "sum_all", "filter_rows", "map_rows"]

_OFFSETS = np.dtype("<i8")


def unflatten(content: Array, counts: Sequence[int]) -> Array:
    """List array over ``content`` with row i holding ``counts[i]`` elements.

    Offsets are the prefix sums of ``counts``; the content buffer is shared,
    not copied.
    """
    if not isinstance(content.layout, PrimitiveNode):
        raise TypeMismatchError(f"unflatten needs a primitive content array, got {content.type}")
    counts_np = np.asarray(counts, dtype=np.int64)
    if counts_np.ndim != 1:
        raise CountError(f"counts must be one-dimensional, got shape {counts_np.shape}")
    if counts_np.size and counts_np.min() < 0:
        bad = int(np.argmax(counts_np < 0))
        raise CountError(f"negative count {counts_np[bad]} at index {bad}")
    total = int(counts_np.sum())
    if total != len(content):
        raise CountError(
            f"counts sum to {total} but content has {len(content)} elements"
        )
    offsets = np.zeros(counts_np.size + 1, dtype=_OFFSETS)
    np.cumsum(counts_np, out=offsets[1:])
    return Array(ListOffsetNode(Buffer(offsets), content.layout))


def _clip(node: Layout, n: int) -> Layout:
    """First ``n`` elements of a node, zero-copy."""
    if isinstance(node, PrimitiveNode):
        return PrimitiveNode(node.dtype, node.data.slice(0, n * node.dtype.width), node.form_key)
    if isinstance(node, ListOffsetNode):
        return ListOffsetNode(node.offsets.slice(0, (n + 1) * 8), node.content, node.form_key)
    return RecordNode(node.fields, tuple(_clip(c, n) for c in node.contents), node.form_key)


def flatten(array: Array) -> tuple[Array, list[int]]:
    """Inverse of unflatten: (content clipped to the used range, row counts)."""
    node = array.layout
    if not isinstance(node, ListOffsetNode):
        raise TypeMismatchError(f"flatten needs a list array, got {array.type}")
    offs = node.offsets_np
    counts = np.diff(offs).tolist() if offs.size > 1 else []
    used = int(offs[-1]) if offs.size else 0
    return Array(_clip(node.content, used)), counts


def sum_inner(array: Array, out_dtype: PrimitiveType = FLOAT64) -> Array:
    """Per-row left-to-right sum of a list-of-numeric array.

    ``out[i]`` accumulates row i in ``out_dtype`` (each element is converted
    to that dtype, then added); empty rows yield 0.0. Bit-identical to the
    scalar loop: the implementation sweeps element positions with one
    vectorized add per position, which performs the same single additions in
    the same order.
    """
    node = array.layout
    if not isinstance(node, ListOffsetNode) or not isinstance(node.content, PrimitiveNode):
        raise TypeMismatchError(f"sum_inner needs a list of primitives, got {array.type}")
    if node.content.dtype is PrimitiveType.BOOL8:
        raise TypeMismatchError("sum_inner needs numeric leaves, got bool")
    if out_dtype not in (FLOAT32, FLOAT64):
        raise TypeMismatchError(f"output dtype must be float32 or float64, got {out_dtype.display}")

    offs = node.offsets_np
    content = node.content.data_np
    n = len(node)
    starts = offs[:-1]
    counts = offs[1:] - starts
    out = np.zeros(n, dtype=out_dtype.np_dtype)

    active = np.arange(n, dtype=np.int64)
    k = 0
    while active.size:
        active = active[counts[active] > k]
        if not active.size:
            break
        vals = content[starts[active] + k].astype(out_dtype.np_dtype)
        out[active] += vals
        k += 1
    return Array(PrimitiveNode(out_dtype, Buffer(out)))


def _sum_leaves(node: Layout, start: int, stop: int, acc: float) -> float:
    # one accumulator threaded through the whole traversal, never per-row
    if isinstance(node, PrimitiveNode):
        if not (node.dtype.is_integer or node.dtype.is_float):
            raise TypeMismatchError("sum_all needs numeric leaves, got bool")
        for v in node.data_np[start:stop].tolist():
            acc += v
        return acc
    if isinstance(node, ListOffsetNode):
        offs = node.offsets_np
        for i in range(start, stop):
            acc = _sum_leaves(node.content, int(offs[i]), int(offs[i + 1]), acc)
        return acc
    raise TypeMismatchError(
        "sum_all hit a record; extend the field path to reach numeric leaves"
    )


def sum_all(array: Array, path: Sequence[str] = ()) -> float:
    """Depth-first left-to-right float64 sum of all leaves under a field path.

    ``path`` names the record field to take at each record level (lists are
    traversed implicitly), e.g. ``("y",)`` for a list-of-records-of-lists.
    """
    for name in path:
        array = get_field(array, name)
    return _sum_leaves(array.layout, 0, len(array), 0.0)


def filter_rows(array: Array, pred: Callable[[Any], bool]) -> Array:
    """Rows where ``pred`` is true, in order; copies via builder re-append.

    The predicate receives each row as a view element (scalar, ArrayView, or
    RecordView). Predicate faults propagate with the row index attached.
    """
    out = builder_for_layout(array.layout)
    view = view_of(array)
    for i in range(len(view)):
        try:
            keep = pred(view[i])
        except Exception as exc:
            raise RowError(f"predicate failed at row {i}: {exc}", row=i) from exc
        if keep:
            append_value(out, get_item(array, i))
    return Array(out.snapshot_layout())


def map_rows(array: Array, fn: Callable[[Any], Any], out_dtype: PrimitiveType) -> Array:
    """Primitive array with ``out[i] = fn(row i)``; rows are view elements."""
    out = PrimitiveBuilder(out_dtype)
    view = view_of(array)
    for i in range(len(view)):
        try:
            out.append(fn(view[i]))
        except Exception as exc:
            raise RowError(f"row function failed at row {i}: {exc}", row=i) from exc
    return Array(out.snapshot_layout())
