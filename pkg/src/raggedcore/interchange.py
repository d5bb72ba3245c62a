"""Buffers+form interchange packages, package file I/O, and the tabular adapter.

The interchange unit is an :class:`ArrayPackage`: a form (JSON-serializable
structural description), an outer length, and a map of named little-endian
buffers. Buffer names derive from node form_keys (``{key}-data`` for
primitive nodes, ``{key}-offsets`` for list nodes) with keys assigned
``node0``, ``node1``, ... in depth-first pre-order. On disk a package is a
directory holding ``form.json``, ``manifest.json`` and one ``.raw`` file per
buffer.

The tabular adapter presents a record array as named columns with random
access entry positioning (``ColumnSource`` / ``ColumnReader``) and rebuilds
record arrays from selected columns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Union

from .builder import (
    Builder,
    ListOffsetBuilder,
    PrimitiveBuilder,
    RecordBuilder,
    append_value,
    builder_for_layout,
)
from .errors import (
    FormError,
    MissingBufferError,
    PackageFormatError,
    RangeError,
    StateError,
    TypeMismatchError,
    UnknownFieldError,
    ValidationError,
)
from .layout import (
    Array,
    Buffer,
    Layout,
    ListOffsetNode,
    PrimitiveNode,
    PrimitiveType,
    RecordNode,
    _materialize,
    _type_of,
    validate,
)
from .view import RecordView, view_of

__all__ = [
    "NumpyForm",
    "ListOffsetForm",
    "RecordForm",
    "Form",
    "ArrayPackage",
    "parse_form",
    "form_to_json",
    "to_buffers",
    "from_buffers",
    "package_to_array",
    "write_package",
    "read_package",
    "builder_for_form",
    "ColumnSource",
    "ColumnReader",
    "to_tabular_source",
    "from_tabular",
]

_FORM_PRIMITIVES = {
    "int32": PrimitiveType.INT32,
    "int64": PrimitiveType.INT64,
    "uint32": PrimitiveType.UINT32,
    "float32": PrimitiveType.FLOAT32,
    "float64": PrimitiveType.FLOAT64,
    "bool": PrimitiveType.BOOL8,
}


@dataclass(frozen=True)
class NumpyForm:
    primitive: PrimitiveType
    form_key: str


@dataclass(frozen=True)
class ListOffsetForm:
    content: "Form"
    form_key: str


@dataclass(frozen=True)
class RecordForm:
    fields: tuple[str, ...]
    contents: tuple["Form", ...]
    form_key: str


Form = Union[NumpyForm, ListOffsetForm, RecordForm]


def _form_to_obj(form: Form) -> dict:
    # Canonical field order: class, per-class fields, form_key.
    if isinstance(form, NumpyForm):
        return {
            "class": "NumpyArray",
            "primitive": form.primitive.display,
            "form_key": form.form_key,
        }
    if isinstance(form, ListOffsetForm):
        return {
            "class": "ListOffsetArray",
            "offsets": "i64",
            "content": _form_to_obj(form.content),
            "form_key": form.form_key,
        }
    return {
        "class": "RecordArray",
        "fields": list(form.fields),
        "contents": [_form_to_obj(c) for c in form.contents],
        "form_key": form.form_key,
    }


def form_to_json(form: Form) -> str:
    """Canonical two-space-indented form JSON."""
    return json.dumps(_form_to_obj(form), indent=2)


def _parse_node(obj: Any, seen_keys: set[str]) -> Form:
    if not isinstance(obj, dict):
        raise FormError(f"form node must be a JSON object, got {type(obj).__name__}")
    cls = obj.get("class")
    if cls is None:
        raise FormError('form node is missing "class"')
    key = obj.get("form_key")
    if not isinstance(key, str) or not key:
        raise FormError(f'form node ({cls}) requires a non-empty "form_key"')
    if key in seen_keys:
        raise FormError(f'duplicate form_key "{key}"')
    seen_keys.add(key)

    if cls == "NumpyArray":
        name = obj.get("primitive")
        dtype = _FORM_PRIMITIVES.get(name)
        if dtype is None:
            raise FormError(f'unsupported primitive "{name}"')
        return NumpyForm(dtype, key)
    if cls == "ListOffsetArray":
        offsets = obj.get("offsets")
        if offsets != "i64":
            raise FormError(f'unsupported offsets type "{offsets}" (only "i64")')
        if "content" not in obj:
            raise FormError('ListOffsetArray node is missing "content"')
        return ListOffsetForm(_parse_node(obj["content"], seen_keys), key)
    if cls == "RecordArray":
        fields = obj.get("fields")
        contents = obj.get("contents")
        if not isinstance(fields, list) or not all(isinstance(f, str) for f in fields):
            raise FormError("RecordArray fields must be a list of strings")
        if not isinstance(contents, list) or len(contents) != len(fields):
            raise FormError("RecordArray contents must parallel fields")
        return RecordForm(
            tuple(fields), tuple(_parse_node(c, seen_keys) for c in contents), key
        )
    raise FormError(f'unsupported form class "{cls}"')


def parse_form(text: str) -> Form:
    """Parse and check form JSON; field order is not significant."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormError(f"form JSON parse error: {exc}") from exc
    return _parse_node(obj, set())


@dataclass(frozen=True)
class ArrayPackage:
    """The interchange unit: form + outer length + named raw buffers.

    Buffer values are bytes-like (read-only memoryviews when produced
    zero-copy from an array, bytes when read from disk).
    """

    form: Form
    length: int
    buffers: dict[str, Any] = field(default_factory=dict)

    @property
    def form_json(self) -> str:
        return form_to_json(self.form)


def to_buffers(array: Array) -> ArrayPackage:
    """Package an array: pre-order node keys, shared (not copied) buffers."""
    buffers: dict[str, Any] = {}
    counter = [0]

    def walk(node: Layout) -> Form:
        key = f"node{counter[0]}"
        counter[0] += 1
        if isinstance(node, PrimitiveNode):
            buffers[f"{key}-data"] = node.data.raw
            return NumpyForm(node.dtype, key)
        if isinstance(node, ListOffsetNode):
            buffers[f"{key}-offsets"] = node.offsets.raw
            return ListOffsetForm(walk(node.content), key)
        return RecordForm(node.fields, tuple(walk(c) for c in node.contents), key)

    form = walk(array.layout)
    return ArrayPackage(form, len(array), buffers)


def _buffer_for(form_key: str, attribute: str, buffers: Mapping[str, Any]) -> Buffer:
    name = f"{form_key}-{attribute}"
    if name not in buffers:
        raise MissingBufferError(f'missing buffer "{name}"')
    return Buffer(buffers[name])


def from_buffers(form: Form, length: int, buffers: Mapping[str, Any]) -> Array:
    """Reconstruct (and always validate) an array from a form and buffers."""

    def build(f: Form, at_root: bool) -> Layout:
        if isinstance(f, NumpyForm):
            data = _buffer_for(f.form_key, "data", buffers)
            if data.nbytes % f.primitive.width != 0:
                raise PackageFormatError(
                    f'buffer "{f.form_key}-data" byte length {data.nbytes} is not a '
                    f"multiple of width {f.primitive.width} ({f.primitive.display})"
                )
            return PrimitiveNode(f.primitive, data, form_key=f.form_key)
        if isinstance(f, ListOffsetForm):
            offsets = _buffer_for(f.form_key, "offsets", buffers)
            if offsets.nbytes % 8 != 0 or offsets.nbytes == 0:
                raise PackageFormatError(
                    f'buffer "{f.form_key}-offsets" byte length {offsets.nbytes} is not a '
                    "non-empty multiple of 8"
                )
            return ListOffsetNode(offsets, build(f.content, False), form_key=f.form_key)
        if not f.fields:
            if not at_root:
                raise PackageFormatError(
                    "zero-field record is only supported at the package root"
                )
            return RecordNode((), (), form_key=f.form_key, length=length)
        return RecordNode(
            f.fields,
            tuple(build(c, False) for c in f.contents),
            form_key=f.form_key,
        )

    layout = build(form, True)
    implied = len(layout)
    if implied != length:
        raise PackageFormatError(
            f"package declares length {length} but buffers imply {implied}"
        )
    report = validate(layout)
    if not report.ok:
        raise ValidationError(report)
    return Array(layout)


def package_to_array(pkg: ArrayPackage) -> Array:
    return from_buffers(pkg.form, pkg.length, pkg.buffers)


# ---------------------------------------------------------------------------
# package directory I/O

_FORM_FILE = "form.json"
_MANIFEST_FILE = "manifest.json"


def write_package(pkg: ArrayPackage, directory: str | Path) -> Path:
    """Write form.json, manifest.json, and one raw file per buffer."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    (path / _FORM_FILE).write_text(form_to_json(pkg.form) + "\n")
    manifest = {"length": pkg.length, "buffers": list(pkg.buffers)}
    (path / _MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n")
    for name, data in pkg.buffers.items():
        (path / f"{name}.raw").write_bytes(data)
    return path


def _expected_sizes(form: Form, out: dict[str, int] | None = None) -> dict[str, int]:
    """Buffer name -> required byte-size divisor, from the form."""
    if out is None:
        out = {}
    if isinstance(form, NumpyForm):
        out[f"{form.form_key}-data"] = form.primitive.width
    elif isinstance(form, ListOffsetForm):
        out[f"{form.form_key}-offsets"] = 8
        _expected_sizes(form.content, out)
    else:
        for c in form.contents:
            _expected_sizes(c, out)
    return out


def read_package(directory: str | Path) -> ArrayPackage:
    """Read a package directory back; buffers are bit-exact bytes."""
    path = Path(directory)
    manifest_path = path / _MANIFEST_FILE
    if not manifest_path.is_file():
        raise PackageFormatError(f"missing {_MANIFEST_FILE} in {path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise PackageFormatError(f"corrupt {_MANIFEST_FILE}: {exc}") from exc
    if (
        not isinstance(manifest, dict)
        or not isinstance(manifest.get("length"), int)
        or not isinstance(manifest.get("buffers"), list)
    ):
        raise PackageFormatError(
            f'{_MANIFEST_FILE} must carry an integer "length" and a "buffers" list'
        )
    form_path = path / _FORM_FILE
    if not form_path.is_file():
        raise PackageFormatError(f"missing {_FORM_FILE} in {path}")
    form = parse_form(form_path.read_text())

    buffers: dict[str, bytes] = {}
    for name in manifest["buffers"]:
        raw_path = path / f"{name}.raw"
        if not raw_path.is_file():
            raise PackageFormatError(
                f'buffer file "{name}.raw" listed in manifest is missing'
            )
        buffers[name] = raw_path.read_bytes()

    for name, width in _expected_sizes(form).items():
        if name in buffers and len(buffers[name]) % width != 0:
            raise PackageFormatError(
                f'buffer file "{name}.raw" has {len(buffers[name])} bytes, '
                f"not a multiple of element width {width}"
            )
    return ArrayPackage(form, manifest["length"], buffers)


def builder_for_form(form: Form) -> Builder:
    """A fresh builder tree matching a form."""
    if isinstance(form, NumpyForm):
        return PrimitiveBuilder(form.primitive)
    if isinstance(form, ListOffsetForm):
        return ListOffsetBuilder(builder_for_form(form.content))
    return RecordBuilder([(n, builder_for_form(c)) for n, c in zip(form.fields, form.contents)])


# ---------------------------------------------------------------------------
# tabular row-cursor adapter


class ColumnSource:
    """Row-cursor facade over a record array: named columns, typed readers.

    Construction is O(1) and zero-copy; every reader shares the array's
    buffers. Sources are immutable; make one reader per concurrent consumer.
    """

    __slots__ = ("array", "_root", "_table")

    def __init__(self, array: Array):
        if not isinstance(array.layout, RecordNode):
            raise TypeMismatchError(
                f"tabular source requires a record array at the root, got {array.type}"
            )
        self.array = array
        root_view = view_of(array)
        self._root = root_view.node
        self._table = root_view.buffers

    @property
    def column_names(self) -> tuple[str, ...]:
        return self.array.layout.fields

    @property
    def entry_count(self) -> int:
        return len(self.array)

    def column_types(self) -> dict[str, str]:
        """Column name -> type fragment (e.g. ``var * float32``)."""
        node = self.array.layout
        return {n: _type_of(c) for n, c in zip(node.fields, node.contents)}

    def reader(self, column: str) -> "ColumnReader":
        if column not in self.column_names:
            available = ", ".join(self.column_names) or "(none)"
            raise UnknownFieldError(f'unknown column "{column}"; available: {available}')
        return ColumnReader(self, column)


class ColumnReader:
    """Stateful cursor over one column; position with set_entry, then read."""

    __slots__ = ("_source", "_column", "_entry")

    def __init__(self, source: ColumnSource, column: str):
        self._source = source
        self._column = column
        self._entry: int | None = None

    @property
    def column(self) -> str:
        return self._column

    def set_entry(self, entry: int) -> None:
        """Random-access positioning; O(1)."""
        if not 0 <= entry < self._source.entry_count:
            raise RangeError(
                f"entry {entry} out of range for {self._source.entry_count} entries"
            )
        self._entry = entry

    def read(self):
        """Column value at the current entry: scalar or zero-copy list view."""
        if self._entry is None:
            raise StateError("read before set_entry")
        rv = RecordView(self._entry, self._source._root, self._source._table)
        return rv.field(self._column)


def to_tabular_source(array: Array) -> ColumnSource:
    """Present a record array as a tabular source (zero-copy)."""
    return ColumnSource(array)


def from_tabular(source: ColumnSource, columns: Iterable[str]) -> Array:
    """Record array with the requested columns in order; copies via builders."""
    names = tuple(columns)
    record: RecordNode = source.array.layout
    field_nodes = []
    for name in names:
        if name not in record.fields:
            available = ", ".join(source.column_names) or "(none)"
            raise UnknownFieldError(f'unknown column "{name}"; available: {available}')
        field_nodes.append(record.contents[record.field_index(name)])

    builders = [builder_for_layout(n) for n in field_nodes]
    out = RecordBuilder(list(zip(names, builders)))
    for i in range(source.entry_count):
        for node, b in zip(field_nodes, builders):
            append_value(b, _materialize(node, i))
    return Array(out.snapshot_layout())
