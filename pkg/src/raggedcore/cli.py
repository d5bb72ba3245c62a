"""Command-line surface: validate, show, tojson, build, bench, dimuon.

Exit codes: 0 ok, 1 validation/data failure, 2 usage error (including
unreadable paths). With ``--json`` each command emits exactly one JSON
object carrying at least ``command`` and ``ok``.

Random generation (bench, synthetic dimuon events) uses numpy's PCG64
generator seeded from ``--seed``, so results are reproducible per seed
within this implementation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import zlib
from pathlib import Path

import numpy as np

from .errors import RaggedError, ValidationError
from .kernels import filter_rows, map_rows, sum_inner, unflatten
from .layout import (
    Array,
    Buffer,
    FLOAT32,
    FLOAT64,
    INT32,
    ListOffsetNode,
    PrimitiveNode,
    RecordNode,
    UINT32,
    get_item,
    to_json_values,
)
from .builder import append_value
from .interchange import (
    builder_for_form,
    package_to_array,
    parse_form,
    read_package,
    write_package,
)

__all__ = ["main", "synthetic_dimuon_events", "dimuon_mass"]

_PREVIEW = 5  # head/tail rows printed by `show`

DIMUON_COLUMNS = ("nMuon", "Muon_charge", "Muon_pt", "Muon_eta", "Muon_phi")


def _emit(args, payload: dict, human: str) -> None:
    if args.as_json:
        print(json.dumps(payload))
    elif human:
        print(human)


def _fail(args, command: str, message: str) -> int:
    if args.as_json:
        print(json.dumps({"command": command, "ok": False, "error": message}))
    else:
        print(message, file=sys.stderr)
    return 1


def _load(args, command: str):
    """Package path -> Array, or an exit code on failure."""
    path = Path(args.package)
    if not path.exists():
        print(f"{command}: path does not exist: {path}", file=sys.stderr)
        return None, 2
    try:
        pkg = read_package(path)
        return package_to_array(pkg), 0
    except RaggedError as exc:
        return None, _fail(args, command, str(exc))


def cmd_validate(args) -> int:
    path = Path(args.package)
    if not path.exists():
        print(f"validate: path does not exist: {path}", file=sys.stderr)
        return 2
    try:
        pkg = read_package(path)
        package_to_array(pkg)
    except ValidationError as exc:
        violations = [
            {"form_key": v.form_key, "rule": v.rule, "message": v.message}
            for v in exc.report.violations
        ]
        if args.as_json:
            print(
                json.dumps(
                    {"command": "validate", "ok": False, "violations": violations}
                )
            )
        else:
            for v in exc.report.violations:
                print(f"{v.form_key}: {v.message} [{v.rule}]", file=sys.stderr)
        return 1
    except RaggedError as exc:
        return _fail(args, "validate", str(exc))
    _emit(args, {"command": "validate", "ok": True}, "ok")
    return 0


def cmd_show(args) -> int:
    array, code = _load(args, "show")
    if array is None:
        return code
    n = len(array)
    if n <= 2 * _PREVIEW:
        head = [get_item(array, i) for i in range(n)]
        tail: list = []
        elided = False
    else:
        head = [get_item(array, i) for i in range(_PREVIEW)]
        tail = [get_item(array, i) for i in range(n - _PREVIEW, n)]
        elided = True
    if args.as_json:
        print(
            json.dumps(
                {
                    "command": "show",
                    "ok": True,
                    "type": array.type,
                    "length": n,
                    "head": head,
                    "tail": tail,
                    "elided": elided,
                }
            )
        )
        return 0
    print(array.type)
    if n == 0:
        print("[]")
        return 0
    for row in head:
        print(json.dumps(row, separators=(",", ":")))
    if elided:
        print("...")
        for row in tail:
            print(json.dumps(row, separators=(",", ":")))
    return 0


def cmd_tojson(args) -> int:
    array, code = _load(args, "tojson")
    if array is None:
        return code
    text = to_json_values(array)
    if args.as_json:
        print(
            json.dumps(
                {"command": "tojson", "ok": True, "values": json.loads(text)}
            )
        )
    else:
        print(text)
    return 0


def cmd_build(args) -> int:
    form_path = Path(args.form)
    lines_path = Path(args.lines)
    if not form_path.exists() or not lines_path.exists():
        missing = form_path if not form_path.exists() else lines_path
        print(f"build: path does not exist: {missing}", file=sys.stderr)
        return 2
    try:
        form = parse_form(form_path.read_text())
    except RaggedError as exc:
        return _fail(args, "build", str(exc))
    builder = builder_for_form(form)
    with open(lines_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                value = json.loads(line)
            except json.JSONDecodeError as exc:
                return _fail(args, "build", f"line {lineno}: JSON parse error: {exc}")
            try:
                append_value(builder, value)
            except RaggedError as exc:
                return _fail(args, "build", f"line {lineno}: {exc}")
    pkg = builder.snapshot()
    write_package(pkg, args.out)
    _emit(
        args,
        {"command": "build", "ok": True, "length": pkg.length, "out": str(args.out)},
        f"wrote {pkg.length} rows to {args.out}",
    )
    return 0


def cmd_bench(args) -> int:
    n = args.n
    if n < 0:
        print("bench: --n must be >= 0", file=sys.stderr)
        return 2
    rng = np.random.Generator(np.random.PCG64(args.seed))
    t0 = time.perf_counter()
    counts = rng.poisson(1.5, n).astype(np.int64)
    content = rng.normal(0.0, 45.0, int(counts.sum())).astype(np.float32)
    array = unflatten(Array(PrimitiveNode(FLOAT32, Buffer(content))), counts)
    t1 = time.perf_counter()
    out = sum_inner(array, FLOAT32)
    t2 = time.perf_counter()
    checksum = zlib.crc32(out.layout.data.raw)
    payload = {
        "command": "bench",
        "ok": True,
        "n": n,
        "elements": int(counts.sum()),
        "seed": args.seed,
        "build_seconds": t1 - t0,
        "kernel_seconds": t2 - t1,
        "checksum": checksum,
    }
    human = (
        f"rows={n} elements={payload['elements']} seed={args.seed} "
        f"build={t1 - t0:.4f}s kernel={t2 - t1:.4f}s checksum={checksum}"
    )
    _emit(args, payload, human)
    return 0


def dimuon_mass(row) -> float:
    """Invariant mass of the leading muon pair from one event row."""
    pt = row.field("Muon_pt")
    eta = row.field("Muon_eta")
    phi = row.field("Muon_phi")
    return math.sqrt(
        2.0
        * pt[0]
        * pt[1]
        * (math.cosh(eta[0] - eta[1]) - math.cos(phi[0] - phi[1]))
    )


def synthetic_dimuon_events(n: int, seed: int) -> Array:
    """Seeded synthetic events with the dimuon columns (PCG64 generator).

    Muon multiplicities are Poisson(2.0); charges are ±1; per-muon kinematics
    are float32 (pt uniform 10-60 GeV, eta normal(0, 1.1), phi uniform ±pi).
    ``nMuon`` stores the list length verbatim.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    nmuon = rng.poisson(2.0, n).astype(np.int64)
    total = int(nmuon.sum())
    charge = (rng.integers(0, 2, total, dtype=np.int64) * 2 - 1).astype(np.int32)
    pt = rng.uniform(10.0, 60.0, total).astype(np.float32)
    eta = rng.normal(0.0, 1.1, total).astype(np.float32)
    phi = rng.uniform(-math.pi, math.pi, total).astype(np.float32)

    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(nmuon, out=offsets[1:])
    offsets_buf = Buffer(offsets)

    def var(values, dtype):
        return ListOffsetNode(offsets_buf, PrimitiveNode(dtype, Buffer(values)))

    layout = RecordNode(
        DIMUON_COLUMNS,
        (
            PrimitiveNode(UINT32, Buffer(nmuon.astype(np.uint32))),
            var(charge, INT32),
            var(pt, FLOAT32),
            var(eta, FLOAT32),
            var(phi, FLOAT32),
        ),
    )
    return Array(layout)


def run_dimuon_pipeline(events: Array) -> Array:
    """filter(nMuon == 2) -> filter(opposite charges) -> map(pair mass)."""
    two = filter_rows(events, lambda r: r.field("nMuon") == 2)
    opposite = filter_rows(
        two, lambda r: r.field("Muon_charge")[0] != r.field("Muon_charge")[1]
    )
    return map_rows(opposite, dimuon_mass, FLOAT64)


def cmd_dimuon(args) -> int:
    if args.package is not None and args.n is not None:
        print("dimuon: give a package path or --n, not both", file=sys.stderr)
        return 2
    if args.package is None and args.n is None:
        print("dimuon: give a package path or --n for synthetic events", file=sys.stderr)
        return 2
    if args.package is not None:
        events, code = _load(args, "dimuon")
        if events is None:
            return code
        layout = events.layout
        if not isinstance(layout, RecordNode):
            return _fail(
                args, "dimuon", f"events package must hold records, got {events.type}"
            )
        missing = [c for c in DIMUON_COLUMNS if c not in layout.fields]
        if missing:
            return _fail(args, "dimuon", "missing required columns: " + ", ".join(missing))
    else:
        events = synthetic_dimuon_events(args.n, args.seed)

    try:
        masses = run_dimuon_pipeline(events)
    except RaggedError as exc:
        return _fail(args, "dimuon", str(exc))
    values = [get_item(masses, i) for i in range(len(masses))]
    mean = sum(values) / len(values) if values else None
    payload = {
        "command": "dimuon",
        "ok": True,
        "events": len(events),
        "count": len(values),
        "mean": mean,
        "first": values[:5],
    }
    mean_text = f"{mean:.6f}" if mean is not None else "n/a"
    human = (
        f"events={len(events)} selected={len(values)} mean={mean_text}\n"
        f"first: {json.dumps(values[:5])}"
    )
    _emit(args, payload, human)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raggedcore",
        description="Validate, inspect, convert, build, and benchmark ragged-array packages.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", dest="as_json", action="store_true",
                       help="emit a single JSON object")

    p = sub.add_parser("validate", help="check a package's structural invariants")
    p.add_argument("package", help="package directory")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("show", help="print the type and a head/tail value preview")
    p.add_argument("package", help="package directory")
    common(p)
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("tojson", help="print all values as one JSON array")
    p.add_argument("package", help="package directory")
    common(p)
    p.set_defaults(func=cmd_tojson)

    p = sub.add_parser("build", help="drive a typed builder from JSON lines")
    p.add_argument("form", help="form JSON file")
    p.add_argument("lines", help="JSON-lines data file")
    p.add_argument("out", help="output package directory")
    common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("bench", help="seeded ragged-reduction benchmark")
    p.add_argument("--n", type=int, default=2**20, help="row count (default 2^20)")
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("dimuon", help="two-muon filter/map demo pipeline")
    p.add_argument("package", nargs="?", default=None, help="events package directory")
    p.add_argument("--n", type=int, default=None, help="generate N synthetic events instead")
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    common(p)
    p.set_defaults(func=cmd_dimuon)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RaggedError as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
