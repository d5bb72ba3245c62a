"""raggedcore: a ragged-array engine with zero-copy views and buffer+form interchange.

Layers, bottom up:

* :mod:`raggedcore.layout` -- immutable layout-node trees over shared buffers,
  validation, element access, field projection, type strings.
* :mod:`raggedcore.builder` -- append-oriented builders that snapshot to
  buffers plus a JSON form without copying data.
* :mod:`raggedcore.view` -- constant-size zero-copy traversal handles.
* :mod:`raggedcore.kernels` -- imperative row kernels (unflatten/flatten,
  reductions, filter, map) with pinned summation order.
* :mod:`raggedcore.interchange` -- the buffers+form package format, package
  directory I/O, and the tabular row-cursor adapter.
* :mod:`raggedcore.cli` -- the ``raggedcore`` command.
"""

from .errors import (
    BuilderStateError,
    CountError,
    FormError,
    LayoutError,
    MissingBufferError,
    PackageFormatError,
    RaggedError,
    RangeError,
    RowError,
    StateError,
    TypeMismatchError,
    UnknownFieldError,
    ValidationError,
)
from .layout import (
    BOOL8,
    FLOAT32,
    FLOAT64,
    INT32,
    INT64,
    UINT32,
    Array,
    Buffer,
    ListOffsetNode,
    PrimitiveNode,
    PrimitiveType,
    RecordNode,
    ValidationReport,
    Violation,
    get_field,
    get_item,
    length,
    to_json_values,
    to_list,
    type_string,
    validate,
)
from .builder import (
    Builder,
    GrowableBuffer,
    ListOffsetBuilder,
    PrimitiveBuilder,
    RecordBuilder,
    append_value,
    builder_for_layout,
)
from .view import ArrayView, BufferTable, RecordView, view_of
from .kernels import filter_rows, flatten, map_rows, sum_all, sum_inner, unflatten
from .interchange import (
    ArrayPackage,
    ColumnReader,
    ColumnSource,
    Form,
    ListOffsetForm,
    NumpyForm,
    RecordForm,
    builder_for_form,
    form_to_json,
    from_buffers,
    from_tabular,
    package_to_array,
    parse_form,
    read_package,
    to_buffers,
    to_tabular_source,
    write_package,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "RaggedError",
    "LayoutError",
    "ValidationError",
    "RangeError",
    "UnknownFieldError",
    "TypeMismatchError",
    "BuilderStateError",
    "StateError",
    "FormError",
    "PackageFormatError",
    "MissingBufferError",
    "CountError",
    "RowError",
    # layout
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
    # builder
    "GrowableBuffer",
    "Builder",
    "PrimitiveBuilder",
    "ListOffsetBuilder",
    "RecordBuilder",
    "builder_for_layout",
    "append_value",
    # view
    "BufferTable",
    "ArrayView",
    "RecordView",
    "view_of",
    # kernels
    "unflatten",
    "flatten",
    "sum_inner",
    "sum_all",
    "filter_rows",
    "map_rows",
    # interchange
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
