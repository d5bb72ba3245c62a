"""Immutable layout-node trees over shared byte buffers.

A layout is a tree of three node kinds:

* ``PrimitiveNode`` -- a flat, fixed-width typed buffer (the leaves),
* ``ListOffsetNode`` -- variable-length lists encoded as an int64 offsets
  buffer over a child layout (row i spans ``content[offsets[i]:offsets[i+1]]``),
* ``RecordNode`` -- named parallel children of equal length (struct of arrays).

Nodes never copy data: they hold read-only memoryviews into whatever storage
produced them (a builder, a file, a foreign exporter). Everything here is
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Any, Sequence, Union

import numpy as np

from .errors import LayoutError, RangeError, TypeMismatchError, UnknownFieldError

__all__ = [
    "PrimitiveType",
    "INT32",
    "INT64",
    "UINT32",
    "FLOAT32",
    "FLOAT64",
    "BOOL8",
    "Buffer",
    "PrimitiveNode",
    "ListOffsetNode",
    "RecordNode",
    "Layout",
    "Array",
    "Violation",
    "ValidationReport",
    "validate",
    "length",
    "type_string",
    "get_item",
    "get_field",
    "to_list",
    "to_json_values",
]


class PrimitiveType(enum.Enum):
    """Fixed-width element types for primitive buffers."""

    INT32 = "int32"
    INT64 = "int64"
    UINT32 = "uint32"
    FLOAT32 = "float32"
    FLOAT64 = "float64"
    BOOL8 = "bool8"

    @property
    def width(self) -> int:
        """Element width in bytes."""
        return _WIDTHS[self]

    @property
    def display(self) -> str:
        """Name used in type strings and form JSON (``bool`` for BOOL8)."""
        return "bool" if self is PrimitiveType.BOOL8 else self.value

    @property
    def np_dtype(self) -> np.dtype:
        return _NP_DTYPES[self]

    @property
    def is_integer(self) -> bool:
        return self in (PrimitiveType.INT32, PrimitiveType.INT64, PrimitiveType.UINT32)

    @property
    def is_float(self) -> bool:
        return self in (PrimitiveType.FLOAT32, PrimitiveType.FLOAT64)

    @property
    def bounds(self) -> tuple[int, int] | None:
        """Inclusive (lo, hi) range for integer types, None otherwise."""
        return _BOUNDS.get(self)

    @classmethod
    def from_name(cls, name: str) -> "PrimitiveType":
        """Resolve a display/form name (accepts both ``bool`` and ``bool8``)."""
        if name == "bool":
            return cls.BOOL8
        try:
            return cls(name)
        except ValueError:
            raise LayoutError(f'unknown primitive type "{name}"') from None


INT32 = PrimitiveType.INT32
INT64 = PrimitiveType.INT64
UINT32 = PrimitiveType.UINT32
FLOAT32 = PrimitiveType.FLOAT32
FLOAT64 = PrimitiveType.FLOAT64
BOOL8 = PrimitiveType.BOOL8

_WIDTHS = {INT32: 4, INT64: 8, UINT32: 4, FLOAT32: 4, FLOAT64: 8, BOOL8: 1}

# Explicit little-endian dtypes: buffers are little-endian by contract.
_NP_DTYPES = {
    INT32: np.dtype("<i4"),
    INT64: np.dtype("<i8"),
    UINT32: np.dtype("<u4"),
    FLOAT32: np.dtype("<f4"),
    FLOAT64: np.dtype("<f8"),
    BOOL8: np.dtype("|u1"),
}

_BOUNDS = {
    INT32: (-(2**31), 2**31 - 1),
    INT64: (-(2**63), 2**63 - 1),
    UINT32: (0, 2**32 - 1),
}

_OFFSETS_DTYPE = np.dtype("<i8")


class Buffer:
    """Read-only byte storage shared by layout nodes, views, and packages.

    Wraps any bytes-like object (bytes, bytearray, memoryview, numpy array)
    without copying. ``base`` exposes the underlying storage object so tests
    can assert sharing by identity.
    """

    __slots__ = ("_raw",)

    def __init__(self, data: Any):
        if isinstance(data, Buffer):
            self._raw = data._raw
            return
        mv = data if isinstance(data, memoryview) else memoryview(data)
        self._raw = mv.cast("B").toreadonly()

    @property
    def raw(self) -> memoryview:
        """The read-only memoryview over the shared storage."""
        return self._raw

    @property
    def base(self) -> Any:
        """The object that owns the bytes (for identity checks)."""
        return self._raw.obj

    @property
    def nbytes(self) -> int:
        return self._raw.nbytes

    def slice(self, start: int, stop: int) -> "Buffer":
        """Byte range [start, stop) as a new Buffer over the same storage."""
        return Buffer(self._raw[start:stop])

    def to_bytes(self) -> bytes:
        return bytes(self._raw)

    def __repr__(self) -> str:
        return f"Buffer({self.nbytes} bytes)"


def _as_np(buffer: Buffer, dtype: np.dtype) -> np.ndarray:
    """Typed view over a buffer, truncated to whole elements."""
    usable = buffer.nbytes - buffer.nbytes % dtype.itemsize
    return np.frombuffer(buffer.raw[:usable], dtype=dtype)


class PrimitiveNode:
    """Leaf node: a flat buffer of fixed-width elements."""

    __slots__ = ("dtype", "data", "form_key", "_np")

    def __init__(self, dtype: PrimitiveType, data: Any, form_key: str | None = None):
        self.dtype = dtype
        self.data = data if isinstance(data, Buffer) else Buffer(data)
        self.form_key = form_key
        self._np: np.ndarray | None = None

    def __len__(self) -> int:
        return self.data.nbytes // self.dtype.width

    @property
    def data_np(self) -> np.ndarray:
        if self._np is None:
            self._np = _as_np(self.data, self.dtype.np_dtype)
        return self._np

    def __repr__(self) -> str:
        return f"PrimitiveNode({self.dtype.display}, len={len(self)})"


class ListOffsetNode:
    """Variable-length lists: int64 offsets over a child layout."""

    __slots__ = ("offsets", "content", "form_key", "_np")

    def __init__(self, offsets: Any, content: "Layout", form_key: str | None = None):
        self.offsets = offsets if isinstance(offsets, Buffer) else Buffer(offsets)
        self.content = content
        self.form_key = form_key
        self._np: np.ndarray | None = None

    def __len__(self) -> int:
        return max(0, self.offsets.nbytes // _OFFSETS_DTYPE.itemsize - 1)

    @property
    def offsets_np(self) -> np.ndarray:
        if self._np is None:
            self._np = _as_np(self.offsets, _OFFSETS_DTYPE)
        return self._np

    def __repr__(self) -> str:
        return f"ListOffsetNode(len={len(self)}, content={self.content!r})"


class RecordNode:
    """Named parallel children of equal length.

    ``length`` may be given explicitly only for zero-field records, whose
    length no buffer encodes.
    """

    __slots__ = ("fields", "contents", "form_key", "_length")

    def __init__(
        self,
        fields: Sequence[str],
        contents: Sequence["Layout"],
        form_key: str | None = None,
        length: int | None = None,
    ):
        self.fields = tuple(fields)
        self.contents = tuple(contents)
        self.form_key = form_key
        if len(self.fields) != len(self.contents):
            raise LayoutError(
                f"record has {len(self.fields)} field names but {len(self.contents)} contents"
            )
        if length is not None and self.contents:
            raise LayoutError("explicit length is only for zero-field records")
        if length is None and not self.contents:
            raise LayoutError("zero-field record requires an explicit length")
        self._length = length

    def __len__(self) -> int:
        if not self.contents:
            return self._length or 0
        return min(len(c) for c in self.contents)

    def field_index(self, name: str) -> int:
        try:
            return self.fields.index(name)
        except ValueError:
            available = ", ".join(self.fields) or "(none)"
            raise UnknownFieldError(
                f'no field "{name}"; record has fields: {available}'
            ) from None

    def __repr__(self) -> str:
        return f"RecordNode(fields={list(self.fields)}, len={len(self)})"


Layout = Union[PrimitiveNode, ListOffsetNode, RecordNode]


class Array:
    """A layout plus its element count; the unit most operations accept.

    Supports ``len``, indexing (``a[i]`` materializes one element, negative
    indices allowed), and field projection via :meth:`field`.
    """

    __slots__ = ("layout", "_view_ctx")

    def __init__(self, layout: Layout):
        self.layout = layout
        self._view_ctx = None  # lazily built by raggedcore.view

    def __len__(self) -> int:
        return len(self.layout)

    def __getitem__(self, index: int):
        return get_item(self, index)

    def __iter__(self):
        for i in range(len(self)):
            yield get_item(self, i)

    def field(self, name: str) -> "Array":
        return get_field(self, name)

    @property
    def type(self) -> str:
        return type_string(self.layout, len(self))

    def to_list(self) -> list:
        return to_list(self)

    def __repr__(self) -> str:
        return f"<Array {self.type}>"


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    """One broken invariant: which node, which rule, and a description."""

    form_key: str
    rule: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(layout: Layout) -> ValidationReport:
    """Check every structural invariant at every node.

    Violations are returned as data, not raised; each names the node (its
    form_key, or a positional ``node<i>`` label when unset) and the rule.
    """
    violations: list[Violation] = []
    seen_keys: dict[str, str] = {}
    counter = [0]

    def label(node: Layout) -> str:
        lab = node.form_key if node.form_key is not None else f"node{counter[0]}"
        return lab

    def check(node: Layout) -> None:
        lab = label(node)
        counter[0] += 1
        if node.form_key is not None:
            if node.form_key in seen_keys:
                violations.append(
                    Violation(lab, "form-key-unique", f'duplicate form_key "{node.form_key}"')
                )
            seen_keys[node.form_key] = lab

        if isinstance(node, PrimitiveNode):
            if node.data.nbytes % node.dtype.width != 0:
                violations.append(
                    Violation(
                        lab,
                        "width-multiple",
                        f"data byte length {node.data.nbytes} is not a multiple of "
                        f"width {node.dtype.width} ({node.dtype.display})",
                    )
                )
        elif isinstance(node, ListOffsetNode):
            if node.offsets.nbytes % 8 != 0:
                violations.append(
                    Violation(
                        lab,
                        "offsets-width",
                        f"offsets byte length {node.offsets.nbytes} is not a multiple of 8",
                    )
                )
            offs = node.offsets_np
            if offs.size < 1:
                violations.append(
                    Violation(lab, "offsets-empty", "offsets must contain at least one entry")
                )
            else:
                if offs[0] != 0:
                    violations.append(
                        Violation(lab, "offsets-start", f"offsets[0] = {offs[0]}, expected 0")
                    )
                if offs.size > 1:
                    steps = np.diff(offs)
                    if (steps < 0).any():
                        bad = int(np.argmax(steps < 0)) + 1
                        violations.append(
                            Violation(
                                lab,
                                "offsets-monotonic",
                                f"offsets non-monotonic at index {bad}",
                            )
                        )
                if offs[-1] > len(node.content):
                    violations.append(
                        Violation(
                            lab,
                            "offsets-bound",
                            f"offsets[last] = {offs[-1]} exceeds content length "
                            f"{len(node.content)}",
                        )
                    )
            check(node.content)
        else:
            for pos, name in enumerate(node.fields):
                if not name:
                    violations.append(
                        Violation(lab, "field-name", f"empty field name at position {pos}")
                    )
            dupes = {n for n in node.fields if node.fields.count(n) > 1}
            for name in sorted(dupes):
                violations.append(
                    Violation(lab, "field-name", f'duplicate field name "{name}"')
                )
            lengths = [len(c) for c in node.contents]
            if lengths and len(set(lengths)) > 1:
                detail = ", ".join(
                    f"{n}: {l}" for n, l in zip(node.fields, lengths)
                )
                violations.append(
                    Violation(lab, "record-lengths", f"record contents have unequal lengths ({detail})")
                )
            for c in node.contents:
                check(c)

    check(layout)
    return ValidationReport(tuple(violations))


def length(layout: Layout) -> int:
    """Element count of a layout (per-node rule; same as ``len``)."""
    return len(layout)


# ---------------------------------------------------------------------------
# type rendering


def _type_of(node: Layout) -> str:
    if isinstance(node, PrimitiveNode):
        return node.dtype.display
    if isinstance(node, ListOffsetNode):
        return f"var * {_type_of(node.content)}"
    inner = ", ".join(f"{n}: {_type_of(c)}" for n, c in zip(node.fields, node.contents))
    return "{" + inner + "}"


def type_string(layout: Layout, outer_length: int) -> str:
    """Human-readable type, ``<length> * <type>`` with ``var *`` for lists."""
    return f"{outer_length} * {_type_of(layout)}"


# ---------------------------------------------------------------------------
# element access / materialization


def _materialize(node: Layout, i: int):
    if isinstance(node, PrimitiveNode):
        v = node.data_np[i].item()
        return bool(v) if node.dtype is BOOL8 else v
    if isinstance(node, ListOffsetNode):
        offs = node.offsets_np
        return [_materialize(node.content, j) for j in range(offs[i], offs[i + 1])]
    return {name: _materialize(c, i) for name, c in zip(node.fields, node.contents)}


def get_item(array: Array, index: int):
    """Materialize the element at ``index`` (negative counts from the end)."""
    n = len(array)
    i = index + n if index < 0 else index
    if not 0 <= i < n:
        raise RangeError(f"index {index} out of range for array of length {n}")
    return _materialize(array.layout, i)


def get_field(array: Array, name: str) -> Array:
    """Project a record field, preserving all wrapping list structure.

    Zero-copy: the result shares every buffer with the input. The record must
    be reachable from the root through list nodes only.
    """

    def project(node: Layout) -> Layout:
        if isinstance(node, ListOffsetNode):
            return ListOffsetNode(node.offsets, project(node.content), form_key=node.form_key)
        if isinstance(node, RecordNode):
            return node.contents[node.field_index(name)]
        raise TypeMismatchError(
            f"no record reachable through list nesting; hit {node.dtype.display} leaf"
        )

    return Array(project(array.layout))


def to_list(array: Array) -> list:
    """Materialize the whole array as nested Python lists/dicts/scalars."""
    return [_materialize(array.layout, i) for i in range(len(array))]


def to_json_values(array: Array) -> str:
    """Compact JSON of the materialized values (shortest round-trip floats)."""
    return json.dumps(to_list(array), separators=(",", ":"))
