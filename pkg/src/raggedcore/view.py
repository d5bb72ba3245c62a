"""Fixed-size, zero-copy traversal handles over arrays.

An :class:`ArrayView` is four machine words (a start, a stop, a node
descriptor reference, and a buffer-table reference) regardless of how much
data sits underneath. Stepping into a list element clips a child view to the
offsets range; stepping into a record element yields a :class:`RecordView`
cursor. Nothing along the way copies or allocates proportionally to the data.

Views are pure readers. They must not outlive their array (they hold
references into its buffer table, so Python's lifetimes make misuse
impossible rather than detected).
"""

from __future__ import annotations

from typing import Any, Iterator

import numpy as np

from .errors import RangeError, UnknownFieldError
from .layout import (
    BOOL8,
    Array,
    Layout,
    ListOffsetNode,
    PrimitiveNode,
)

__all__ = ["BufferTable", "ArrayView", "RecordView", "view_of"]


class BufferTable:
    """Ordered registry of an array's decoded buffers, indexed by position.

    Stable for the lifetime of every view derived from it; descriptors refer
    to buffers by index so the views themselves stay constant-size.
    """

    __slots__ = ("arrays",)

    def __init__(self) -> None:
        self.arrays: list[np.ndarray] = []

    def add(self, arr: np.ndarray) -> int:
        self.arrays.append(arr)
        return len(self.arrays) - 1


class _PrimitiveDesc:
    __slots__ = ("dtype", "data_index")

    def __init__(self, dtype, data_index: int):
        self.dtype = dtype
        self.data_index = data_index


class _ListDesc:
    __slots__ = ("offsets_index", "content")

    def __init__(self, offsets_index: int, content):
        self.offsets_index = offsets_index
        self.content = content


class _RecordDesc:
    __slots__ = ("fields", "contents", "lookup")

    def __init__(self, fields, contents):
        self.fields = fields
        self.contents = contents
        self.lookup = {name: i for i, name in enumerate(fields)}


def _compile(node: Layout, table: BufferTable):
    if isinstance(node, PrimitiveNode):
        return _PrimitiveDesc(node.dtype, table.add(node.data_np))
    if isinstance(node, ListOffsetNode):
        idx = table.add(node.offsets_np)
        return _ListDesc(idx, _compile(node.content, table))
    return _RecordDesc(
        node.fields, tuple(_compile(c, table) for c in node.contents)
    )


def _context(array: Array):
    """Descriptor tree + buffer table for an array, built once and cached."""
    ctx = array._view_ctx
    if ctx is None:
        table = BufferTable()
        root = _compile(array.layout, table)
        ctx = (root, table)
        array._view_ctx = ctx
    return ctx


def _element(desc, buffers: BufferTable, i: int):
    """Decode the element at absolute index ``i`` under ``desc``. O(1)."""
    if type(desc) is _PrimitiveDesc:
        v = buffers.arrays[desc.data_index][i].item()
        return bool(v) if desc.dtype is BOOL8 else v
    if type(desc) is _ListDesc:
        offs = buffers.arrays[desc.offsets_index]
        return ArrayView(int(offs[i]), int(offs[i + 1]), desc.content, buffers)
    return RecordView(i, desc, buffers)


class ArrayView:
    """Constant-size handle over a contiguous element range of one node.

    Supports ``len``, integer indexing, and iteration. Indexing a primitive
    node yields a scalar, a list node a clipped child ``ArrayView``, a record
    node a ``RecordView``.
    """

    __slots__ = ("start", "stop", "node", "buffers")

    def __init__(self, start: int, stop: int, node, buffers: BufferTable):
        self.start = start
        self.stop = stop
        self.node = node
        self.buffers = buffers

    def __len__(self) -> int:
        return self.stop - self.start

    def __getitem__(self, i: int):
        if not 0 <= i < self.stop - self.start:
            raise RangeError(f"index {i} out of range for view of length {len(self)}")
        return _element(self.node, self.buffers, self.start + i)

    def __iter__(self) -> Iterator[Any]:
        for i in range(self.start, self.stop):
            yield _element(self.node, self.buffers, i)

    def __repr__(self) -> str:
        return f"ArrayView([{self.start}, {self.stop}))"


class RecordView:
    """Constant-size cursor at one element of a record node."""

    __slots__ = ("at", "node", "buffers")

    def __init__(self, at: int, node, buffers: BufferTable):
        self.at = at
        self.node = node
        self.buffers = buffers

    def field(self, name: str):
        """Field value at this element: scalar, list view, or nested record."""
        idx = self.node.lookup.get(name)
        if idx is None:
            available = ", ".join(self.node.fields) or "(none)"
            raise UnknownFieldError(f'no field "{name}"; record has fields: {available}')
        return _element(self.node.contents[idx], self.buffers, self.at)

    def __getitem__(self, name: str):
        return self.field(name)

    @property
    def fields(self) -> tuple[str, ...]:
        return self.node.fields

    def __repr__(self) -> str:
        return f"RecordView(at={self.at})"


def view_of(array: Array) -> ArrayView:
    """Full-range view over an array; O(1), shares all buffers."""
    root, table = _context(array)
    return ArrayView(0, len(array), root, table)
