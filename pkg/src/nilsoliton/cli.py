"""Command-line surface: one command per invocation, file-based I/O.

Outputs are JSON (CSV only for the region-table plotting payload) and are
byte-identical for a fixed seed and config: timestamps never enter the
payload, they go to a sidecar `<out>.run.json`.  Floats print with 17
significant digits so values round-trip exactly.

Exit codes: 0 success, 1 contract error (bad parameters, failed
preconditions), 2 I/O or usage error (missing file, malformed JSON).
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys

import numpy as np

from . import kernels
from .certification import non_einstein_certificate
from .constructions import FamilyKind, FamilySpec, build_family
from .flow import RANK_COLLAPSE_TOL, flow_to_distinguished, scan_generic
from .indecomposability import decomposition_search, structural_criteria
from .moduli import moduli_entry, region_table
from .moment import DISTINGUISHED_TOL, distinguished_report, moment
from .tensor_core import StructureTensor, is_type_pq

__all__ = ["main", "DEFAULT_SEED", "dumps_canonical"]

#: Fixed default so reruns without --seed are reproducible.
DEFAULT_SEED = 1729


class _IOFailure(Exception):
    """Raised for exit-code-2 conditions (missing/unreadable/bad files)."""


# ---------------------------------------------------------------------------
# canonical JSON


def _format_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite float in output payload: {x}")
    s = format(float(x), ".17g")
    if "e" not in s and "E" not in s and "." not in s:
        s += ".0"
    return s


def _emit_json(obj, parts: list, indent: int) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        items = list(obj.items())
        for i, (key, val) in enumerate(items):
            parts.append(f'{pad}  {json.dumps(str(key))}: ')
            _emit_json(val, parts, indent + 1)
            parts.append(",\n" if i + 1 < len(items) else "\n")
        parts.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            parts.append("[]")
            return
        parts.append("[\n")
        for i, val in enumerate(seq):
            parts.append(pad + "  ")
            _emit_json(val, parts, indent + 1)
            parts.append(",\n" if i + 1 < len(seq) else "\n")
        parts.append(pad + "]")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, (bool, np.bool_)):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_format_float(float(obj)))
    elif obj is None:
        parts.append("null")
    elif isinstance(obj, np.ndarray):
        _emit_json(obj.tolist(), parts, indent)
    else:
        raise ValueError(f"cannot serialize {type(obj).__name__} to JSON")


def dumps_canonical(obj) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    parts: list = []
    _emit_json(obj, parts, 0)
    return "".join(parts) + "\n"


# ---------------------------------------------------------------------------
# file I/O


def _read_json_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _IOFailure(f"{path}: malformed JSON at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from exc


def _load_tensor(path: str) -> StructureTensor:
    data = _read_json_file(path)
    try:
        return StructureTensor.from_json_dict(data)
    except ValueError as exc:
        raise _IOFailure(f"{path}: {exc}") from exc


def _write_text(path: str, body: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(body)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from exc


def _write_output(args, body: str, lines: tuple[str, ...] = ()) -> None:
    """Write body to -o (with a timestamped sidecar) or to stdout."""
    out = getattr(args, "output", None)
    if out:
        _write_text(out, body)
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
        sidecar = {
            "command": args.command,
            "argv": list(getattr(args, "_argv", ())),
            "timestamp": stamp,
            "backend": kernels.backend_name(),
        }
        _write_text(out + ".run.json", dumps_canonical(sidecar))
        for line in lines:
            print(line)
    else:
        sys.stdout.write(body)


# ---------------------------------------------------------------------------
# family spec from flags

_FAMILY_BY_NAME = {
    "heisenberg": FamilyKind.HEISENBERG_J,
    "soliton23": FamilyKind.SOLITON_23,
    "b-blocks": FamilyKind.B_BLOCKS,
    "non-einstein": FamilyKind.NON_EINSTEIN,
    "j9": FamilyKind.J9,
    "minimal-d": FamilyKind.MINIMAL_D,
}


def _parse_adjoin(text: str) -> FamilySpec:
    # format "q:p", one minimal-D piece per flag
    try:
        qs, ps = text.split(":")
        return FamilySpec(kind=FamilyKind.MINIMAL_D, q=int(qs), p=int(ps))
    except ValueError as exc:
        raise ValueError(f"--adjoin expects 'q:p', got {text!r}") from exc


def _spec_from_args(args, default_family: str | None = None) -> FamilySpec:
    if getattr(args, "spec", None):
        return FamilySpec.from_json_dict(_read_json_file(args.spec))
    family = getattr(args, "family", None) or default_family
    if not family:
        raise ValueError("need --family NAME or --spec FILE")
    kind = _FAMILY_BY_NAME[family]
    t = tuple(float(x) for x in args.t.split(",")) if getattr(args, "t", None) else ()
    adjoin = tuple(_parse_adjoin(a) for a in (getattr(args, "adjoin", None) or ()))
    if adjoin and kind is FamilyKind.NON_EINSTEIN:
        kind = FamilyKind.ADJOINED_NON_EINSTEIN
    return FamilySpec(kind=kind, j=args.j, k=args.k, n=args.n, t=t,
                      d=args.d, adjoin_list=adjoin, q=args.q, p=args.p)


# ---------------------------------------------------------------------------
# command handlers


def _cmd_build(args) -> int:
    spec = _spec_from_args(args)
    c = build_family(spec)
    payload = c.to_json_dict()
    p, q = spec.type_pq
    _write_output(args, dumps_canonical(payload),
                  (f"built {spec.kind.value} of type ({p},{q})",))
    return 0


def _cmd_moment(args) -> int:
    c = _load_tensor(args.input)
    img = moment(c)
    report = distinguished_report(c, threshold=args.tol)
    payload = {"moment": img.to_json_dict(), "report": report.to_json_dict()}
    _write_output(args, dumps_canonical(payload),
                  (f"distinguished={report.distinguished} "
                   f"residual={_format_float(report.residual)} "
                   f"r={_format_float(report.r)}",))
    return 0


def _cmd_flow(args) -> int:
    c = _load_tensor(args.input)
    result = flow_to_distinguished(
        c, tol=args.tol, rank_tol=args.rank_tol, max_iter=args.max_iter,
        eta0=args.eta0, shrink=args.shrink, max_backtracks=args.backtracks,
        want_trace=args.trace)
    payload = result.to_json_dict()
    _write_output(args, dumps_canonical(payload),
                  (f"status={result.status.value} iterations={result.iterations} "
                   f"residual={_format_float(result.residual)}",))
    return 0


def _cmd_certify(args) -> int:
    spec = _spec_from_args(args, default_family="non-einstein")
    if args.input:
        c = _load_tensor(args.input)
        if (c.p, c.q) != spec.type_pq:
            raise ValueError(f"tensor type ({c.p},{c.q}) does not match the "
                             f"family type {spec.type_pq}")
    cert = non_einstein_certificate(spec, n_starts=args.starts,
                                    margin=args.margin, seed=args.seed,
                                    tol=args.tol)
    lines = tuple(f"{cond.name}: {cond.value} "
                  f"({'ok' if cond.satisfied else 'FAILED'})"
                  for cond in cert.conditions)
    lines += (f"verdict {cert.verdict.value}",)
    _write_output(args, dumps_canonical(cert.to_json_dict()), lines)
    if not getattr(args, "output", None):
        for line in lines:
            print(line, file=sys.stderr)
    return 0


def _cmd_indecomp(args) -> int:
    c = _load_tensor(args.input)
    meta = None
    if getattr(args, "spec", None):
        meta = FamilySpec.from_json_dict(_read_json_file(args.spec))
    cert = structural_criteria(c, meta=meta, tol=args.tol)
    payload = {"certificate": cert.to_json_dict()}
    lines = [f"verdict {cert.verdict.value}"]
    if args.search:
        split = decomposition_search(c, budget=args.budget, seed=args.seed,
                                     tol=args.tol)
        payload["decomposition"] = split.to_json_dict() if split else None
        lines.append("decomposition found" if split else "no decomposition found")
    _write_output(args, dumps_canonical(payload), tuple(lines))
    return 0


def _cmd_moduli(args) -> int:
    if args.table:
        if args.qmax is None:
            raise ValueError("--table needs --qmax N")
        rows = region_table(args.qmax)
        body = "p,q,label,source\n" + "".join(r.to_csv_row() + "\n" for r in rows)
        _write_output(args, body, (f"{len(rows)} rows",))
        return 0
    if args.p is None or args.q is None:
        raise ValueError("moduli needs --p and --q (or --table --qmax N)")
    entry = moduli_entry(args.p, args.q)
    out = getattr(args, "output", None)
    if out:
        _write_output(args, dumps_canonical(entry.to_json_dict()),
                      (str(entry.dim),))
    else:
        print(entry.dim)
    return 0


def _cmd_scan(args) -> int:
    summary = scan_generic(args.p, args.q, count=args.count, seed=args.seed,
                           tol=args.tol, rank_tol=args.rank_tol,
                           max_iter=args.max_iter)
    payload = summary.to_json_dict()
    # residual histogram goes next to -o (or to stderr) so stdout stays a
    # single byte-stable JSON document
    csv = summary.residual_histogram_csv()
    if getattr(args, "output", None):
        _write_text(args.output + ".hist.csv", csv)
    else:
        sys.stderr.write(csv)
    _write_output(args, dumps_canonical(payload),
                  (f"fraction_distinguished="
                   f"{_format_float(summary.fraction_distinguished)}",))
    return 0


def _cmd_show(args) -> int:
    c = _load_tensor(args.input)
    payload = {
        "p": c.p,
        "q": c.q,
        "dq": c.dq,
        "norm": c.norm(),
        "skew_correction": c.correction,
        "exact_type": is_type_pq(c),
        "labels": list(c.labels),
        "backend": kernels.backend_name(),
    }
    _write_output(args, dumps_canonical(payload))
    return 0


_HANDLERS = {
    "build": _cmd_build,
    "moment": _cmd_moment,
    "flow": _cmd_flow,
    "certify": _cmd_certify,
    "indecomp": _cmd_indecomp,
    "moduli": _cmd_moduli,
    "scan": _cmd_scan,
    "show": _cmd_show,
}


# ---------------------------------------------------------------------------
# parser


def _add_family_flags(sub) -> None:
    sub.add_argument("--family", choices=sorted(_FAMILY_BY_NAME))
    sub.add_argument("--spec", help="family spec JSON file (overrides flags)")
    sub.add_argument("--j", type=int, default=None)
    sub.add_argument("--k", type=int, default=None)
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--d", type=int, default=0)
    sub.add_argument("--t", default=None,
                     help="comma-separated middle coefficients (length n-1)")
    sub.add_argument("--adjoin", action="append", metavar="Q:P",
                     help="adjoin a minimal-D piece of type (P,Q); repeatable")
    sub.add_argument("--q", type=int, default=None)
    sub.add_argument("--p", type=int, default=None)


def _positive_float(text: str) -> float:
    val = float(text)
    if not val > 0.0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return val


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nilsoliton",
        description="Structure tensors, moment maps, distinguished points, "
                    "and indecomposability certificates for two-step "
                    "nilpotent algebras.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("build", help="build a named family member")
    _add_family_flags(sub)
    sub.add_argument("-o", "--output")

    sub = subs.add_parser("moment", help="moment image and distinguished report")
    sub.add_argument("input")
    sub.add_argument("--tol", type=_positive_float, default=DISTINGUISHED_TOL)
    sub.add_argument("-o", "--output")

    sub = subs.add_parser("flow", help="projected gradient flow on the sphere")
    sub.add_argument("input")
    sub.add_argument("--tol", type=_positive_float, default=DISTINGUISHED_TOL)
    sub.add_argument("--rank-tol", type=_positive_float,
                     default=RANK_COLLAPSE_TOL)
    sub.add_argument("--max-iter", type=int, default=200_000)
    sub.add_argument("--eta0", type=_positive_float, default=0.01)
    sub.add_argument("--shrink", type=_positive_float, default=0.5)
    sub.add_argument("--backtracks", type=int, default=40)
    sub.add_argument("--trace", action="store_true",
                     help="include the per-iteration residual trace")
    sub.add_argument("-o", "--output")

    sub = subs.add_parser("certify",
                          help="no-distinguished-point certificate for a family")
    sub.add_argument("input", nargs="?",
                     help="optional tensor file checked against the family type")
    _add_family_flags(sub)
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--starts", type=int, default=32)
    sub.add_argument("--margin", type=_positive_float, default=0.05)
    sub.add_argument("--tol", type=_positive_float, default=DISTINGUISHED_TOL)
    sub.add_argument("-o", "--output")

    sub = subs.add_parser("indecomp", help="indecomposability certificates")
    sub.add_argument("input")
    sub.add_argument("--spec", help="family spec JSON enabling criteria (c)/(d)")
    sub.add_argument("--search", action="store_true",
                     help="also run the decomposition search")
    sub.add_argument("--budget", type=int, default=40)
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--tol", type=_positive_float, default=1e-8)
    sub.add_argument("-o", "--output")

    sub = subs.add_parser("moduli", help="generic moduli dimension / region table")
    sub.add_argument("--p", type=int, default=None)
    sub.add_argument("--q", type=int, default=None)
    sub.add_argument("--table", action="store_true")
    sub.add_argument("--qmax", type=int, default=None)
    sub.add_argument("-o", "--output")

    sub = subs.add_parser("scan", help="flow a batch of seeded random tensors")
    sub.add_argument("--p", type=int, required=True)
    sub.add_argument("--q", type=int, required=True)
    sub.add_argument("--count", type=int, default=50)
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--tol", type=_positive_float, default=DISTINGUISHED_TOL)
    sub.add_argument("--rank-tol", type=_positive_float,
                     default=RANK_COLLAPSE_TOL)
    sub.add_argument("--max-iter", type=int, default=200_000)
    sub.add_argument("-o", "--output")

    sub = subs.add_parser("show", help="summarize a tensor file")
    sub.add_argument("input")

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    args = parser.parse_args(argv)
    args._argv = tuple(argv)
    try:
        return _HANDLERS[args.command](args)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
