"""Append-oriented builders that snapshot to buffers plus a form.

Builders mirror the layout node kinds: ``PrimitiveBuilder`` appends typed
scalars, ``ListOffsetBuilder`` brackets runs of content appends between
``begin_list``/``end_list``, and ``RecordBuilder`` routes appends to named
sub-builders. ``snapshot()`` freezes the current contents into an
:class:`~raggedcore.interchange.ArrayPackage` without copying buffer bytes:
the package views the builder's storage, and growth reallocates rather than
resizing so earlier snapshots never see later writes.

A builder is single-owner; snapshots are immutable and freely shareable.
"""

from __future__ import annotations

import struct
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import (
    BuilderStateError,
    RangeError,
    TypeMismatchError,
    UnknownFieldError,
)
from .layout import (
    BOOL8,
    Array,
    Buffer,
    Layout,
    ListOffsetNode,
    PrimitiveNode,
    PrimitiveType,
    RecordNode,
)

__all__ = [
    "GrowableBuffer",
    "Builder",
    "PrimitiveBuilder",
    "ListOffsetBuilder",
    "RecordBuilder",
    "builder_for_layout",
    "append_value",
]

_PACKERS = {
    PrimitiveType.INT32: struct.Struct("<i"),
    PrimitiveType.INT64: struct.Struct("<q"),
    PrimitiveType.UINT32: struct.Struct("<I"),
    PrimitiveType.FLOAT32: struct.Struct("<f"),
    PrimitiveType.FLOAT64: struct.Struct("<d"),
    PrimitiveType.BOOL8: struct.Struct("<?"),
}


class GrowableBuffer:
    """Append-only byte storage with amortized O(1) growth.

    Growth allocates a fresh bytearray and copies; the old storage stays
    alive for any snapshot views taken over it. ``clear`` likewise swaps in
    fresh storage (retaining the capacity) so prior snapshots are never
    overwritten.
    """

    __slots__ = ("itemsize", "_storage", "_length", "_capacity")

    INITIAL_CAPACITY = 1024  # elements

    def __init__(self, itemsize: int, capacity: int = INITIAL_CAPACITY):
        self.itemsize = itemsize
        self._capacity = max(1, capacity)
        self._storage = bytearray(self._capacity * itemsize)
        self._length = 0

    @property
    def length(self) -> int:
        return self._length

    @property
    def capacity(self) -> int:
        return self._capacity

    @property
    def storage(self) -> bytearray:
        return self._storage

    def claim(self, count: int = 1) -> int:
        """Reserve room for ``count`` elements; returns the write byte offset."""
        needed = self._length + count
        if needed > self._capacity:
            cap = self._capacity
            while cap < needed:
                cap *= 2
            fresh = bytearray(cap * self.itemsize)
            used = self._length * self.itemsize
            fresh[:used] = memoryview(self._storage)[:used]
            self._storage = fresh
            self._capacity = cap
        offset = self._length * self.itemsize
        self._length += count
        return offset

    def snapshot_view(self) -> memoryview:
        """Read-only view of the appended bytes, sharing current storage."""
        return memoryview(self._storage)[: self._length * self.itemsize].toreadonly()

    def clear(self) -> None:
        self._storage = bytearray(self._capacity * self.itemsize)
        self._length = 0


class Builder:
    """Common surface: length, snapshot, clear."""

    @property
    def length(self) -> int | None:
        raise NotImplementedError

    def snapshot_layout(self) -> Layout:
        """Freeze into layout nodes over shared (read-only) buffer views."""
        raise NotImplementedError

    def type_str(self) -> str:
        raise NotImplementedError

    def clear(self) -> None:
        raise NotImplementedError

    def snapshot(self):
        """Freeze into an ArrayPackage (form JSON + length + named buffers)."""
        from .interchange import to_buffers  # deferred: interchange imports us

        return to_buffers(Array(self.snapshot_layout()))


class PrimitiveBuilder(Builder):
    """Appends scalars of one fixed dtype into a growable buffer."""

    __slots__ = ("dtype", "_packer", "_buf")

    def __init__(self, dtype: PrimitiveType):
        self.dtype = dtype
        self._packer = _PACKERS[dtype]
        self._buf = GrowableBuffer(dtype.width)

    def append(self, value: Any) -> None:
        """Store one value bit-exactly; integral overflow raises, never wraps."""
        dtype = self.dtype
        if dtype is BOOL8:
            if not isinstance(value, (bool, np.bool_)):
                raise TypeMismatchError(
                    f"expected bool, got {type(value).__name__} ({value!r})"
                )
            value = bool(value)
        elif dtype.is_integer:
            if isinstance(value, (bool, np.bool_)) or not isinstance(
                value, (int, np.integer)
            ):
                raise TypeMismatchError(
                    f"expected {dtype.display}, got {type(value).__name__} ({value!r})"
                )
            value = int(value)
            lo, hi = dtype.bounds
            if not lo <= value <= hi:
                raise RangeError(f"{value} out of range for {dtype.display} [{lo}, {hi}]")
        else:
            if isinstance(value, (bool, np.bool_)) or not isinstance(
                value, (int, float, np.integer, np.floating)
            ):
                raise TypeMismatchError(
                    f"expected {dtype.display}, got {type(value).__name__} ({value!r})"
                )
            value = float(value)
        offset = self._buf.claim(1)
        self._packer.pack_into(self._buf.storage, offset, value)

    @property
    def length(self) -> int:
        return self._buf.length

    def snapshot_layout(self) -> PrimitiveNode:
        return PrimitiveNode(self.dtype, Buffer(self._buf.snapshot_view()))

    def type_str(self) -> str:
        return self.dtype.display

    def clear(self) -> None:
        self._buf.clear()


class ListOffsetBuilder(Builder):
    """Builds variable-length lists over a content builder.

    The offsets buffer is seeded with a single 0; ``end_list`` appends the
    content length, so closed-list count is ``len(offsets) - 1``.
    """

    __slots__ = ("content", "_offsets", "_open")

    def __init__(self, content: Builder):
        self.content = content
        self._offsets = GrowableBuffer(8)
        self._open = False
        self._push_offset(0)

    def _push_offset(self, value: int) -> None:
        offset = self._offsets.claim(1)
        struct.pack_into("<q", self._offsets.storage, offset, value)

    def begin_list(self) -> Builder:
        """Open one list; returns the content builder for its elements."""
        if self._open:
            raise BuilderStateError("begin_list while a list is already open")
        self._open = True
        return self.content

    def end_list(self) -> None:
        """Close the open list, committing the current content length."""
        if not self._open:
            raise BuilderStateError("end_list without begin_list")
        n = self.content.length
        if n is None:
            raise BuilderStateError(
                "end_list on a record content whose fields have unequal lengths"
            )
        self._push_offset(n)
        self._open = False

    @property
    def length(self) -> int:
        return self._offsets.length - 1

    def snapshot_layout(self) -> ListOffsetNode:
        if self._open:
            raise BuilderStateError("snapshot while a list is open (missing end_list)")
        return ListOffsetNode(
            Buffer(self._offsets.snapshot_view()), self.content.snapshot_layout()
        )

    def type_str(self) -> str:
        return f"var * {self.content.type_str()}"

    def clear(self) -> None:
        self._offsets.clear()
        self._push_offset(0)
        self._open = False
        self.content.clear()


class RecordBuilder(Builder):
    """Routes appends to named sub-builders; snapshot requires equal lengths.

    ``fields`` is either a sequence of ``(name, builder)`` pairs (identifiers
    assigned 0, 1, ...) or a mapping ``identifier -> (name, builder)``
    mirroring an enum-plus-name-map declaration. ``field`` accepts either the
    identifier or the name.
    """

    __slots__ = ("_ids", "_names", "_builders", "_by_id", "_by_name")

    def __init__(
        self,
        fields: Mapping[Any, tuple[str, Builder]] | Sequence[tuple[str, Builder]],
    ):
        if isinstance(fields, Mapping):
            items = [(ident, name, b) for ident, (name, b) in fields.items()]
        else:
            items = [(i, name, b) for i, (name, b) in enumerate(fields)]
        self._ids = tuple(ident for ident, _, _ in items)
        self._names = tuple(name for _, name, _ in items)
        self._builders = tuple(b for _, _, b in items)
        if len(set(self._names)) != len(self._names):
            raise TypeMismatchError(f"duplicate field names: {self._names}")
        self._by_id = {ident: b for ident, _, b in items}
        self._by_name = {name: b for _, name, b in items}

    def field(self, identifier: Any) -> Builder:
        """Sub-builder for an identifier or field name (stable across calls)."""
        if identifier in self._by_id:
            return self._by_id[identifier]
        if isinstance(identifier, str) and identifier in self._by_name:
            return self._by_name[identifier]
        known = ", ".join(f"{i!r} ({n})" for i, n in zip(self._ids, self._names))
        raise UnknownFieldError(f"unknown field {identifier!r}; known fields: {known}")

    @property
    def field_names(self) -> tuple[str, ...]:
        return self._names

    @property
    def length(self) -> int | None:
        """Common sub-length, or None when the record is ragged."""
        lengths = [b.length for b in self._builders]
        if not lengths:
            return 0
        if None in lengths or len(set(lengths)) > 1:
            return None
        return lengths[0]

    def snapshot_layout(self) -> RecordNode:
        if self._builders and self.length is None:
            detail = ", ".join(
                f"{n}={b.length}" for n, b in zip(self._names, self._builders)
            )
            raise BuilderStateError(f"ragged record: field lengths differ ({detail})")
        if not self._builders:
            return RecordNode((), (), length=0)
        return RecordNode(
            self._names, tuple(b.snapshot_layout() for b in self._builders)
        )

    def type_str(self) -> str:
        inner = ", ".join(
            f"{n}: {b.type_str()}" for n, b in zip(self._names, self._builders)
        )
        return "{" + inner + "}"

    def clear(self) -> None:
        for b in self._builders:
            b.clear()


def builder_for_layout(node: Layout) -> Builder:
    """A fresh builder tree matching an existing layout's structure."""
    if isinstance(node, PrimitiveNode):
        return PrimitiveBuilder(node.dtype)
    if isinstance(node, ListOffsetNode):
        return ListOffsetBuilder(builder_for_layout(node.content))
    return RecordBuilder(
        [(name, builder_for_layout(c)) for name, c in zip(node.fields, node.contents)]
    )


def append_value(builder: Builder, value: Any) -> None:
    """Append one JSON-style value (scalar/list/dict) through a builder tree.

    Structure must match exactly: lists for list builders, dicts with exactly
    the record's field names for record builders, scalars at the leaves.
    """
    if isinstance(builder, PrimitiveBuilder):
        builder.append(value)
    elif isinstance(builder, ListOffsetBuilder):
        if not isinstance(value, (list, tuple)):
            raise TypeMismatchError(
                f"expected {builder.type_str()}, got {type(value).__name__} ({value!r})"
            )
        content = builder.begin_list()
        for item in value:
            append_value(content, item)
        builder.end_list()
    else:
        if not isinstance(value, dict):
            raise TypeMismatchError(
                f"expected {builder.type_str()}, got {type(value).__name__} ({value!r})"
            )
        missing = [n for n in builder.field_names if n not in value]
        extra = [k for k in value if k not in builder.field_names]
        if missing or extra:
            parts = []
            if missing:
                parts.append("missing field(s) " + ", ".join(repr(m) for m in missing))
            if extra:
                parts.append("unexpected field(s) " + ", ".join(repr(e) for e in extra))
            raise TypeMismatchError(
                f"expected {builder.type_str()}: " + "; ".join(parts)
            )
        for name in builder.field_names:
            append_value(builder.field(name), value[name])
