"""``upb-locc`` command line.

Exit codes: 0 success, 1 a requested property check failed, 2 usage, parse or
layout error.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .builders import build_protocol
from .families import build_family, render_tiles
from .formats import FormatError, dumps_protocol, dumps_states, loads_protocol, loads_states
from .locc import attach, attach_layout, ebit_cost, evaluate, validate
from .qla import TOL, LayoutError, clean
from .verify import (
    PartitionWitness,
    SearchTooLarge,
    check_orthogonality,
    check_ppt,
    check_unextendible,
    normalized_complement,
    witness_overlaps,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _c(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from None


def _family(args) -> Any:
    try:
        return build_family(args.family, args.d)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _report(args, command: str, body: dict, started: float) -> dict:
    meta = {
        "tool": "upb-locc",
        "version": __version__,
        "command": command,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "elapsed_s": round(time.perf_counter() - started, 6),
        "tol": args.tol,
    }
    return {"meta": meta, "body": body}


def _emit(args, rep: dict, text_lines: list[str]) -> None:
    out = json.dumps(rep, indent=2, sort_keys=False) + "\n"
    if getattr(args, "report", None):
        _write(args.report, out)
    if args.style == "json":
        sys.stdout.write(out)
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")


def _witness_obj(u, w: PartitionWitness) -> dict:
    return {
        "subset": [u.states[i].label for i in w.subset],
        "alice": [_c(z) for z in clean(w.alice_vector.amplitudes)],
        "bob": [_c(z) for z in clean(w.bob_vector.amplitudes)],
        "max_overlap": float(witness_overlaps(u, w).max()),
    }


def cmd_construct(args) -> int:
    u = _family(args)
    _write(args.out, dumps_states(u))
    print(f"wrote {len(u)} states ({u.family}, d={u.d}) to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    try:
        u = loads_states(_read(args.states))
    except FormatError as e:
        raise UsageError(f"{args.states}: {e}") from None
    orth = check_orthogonality(u, args.tol)
    body: dict[str, Any] = {
        "family": u.family,
        "d": u.d,
        "n_states": len(u),
        "orthogonal": orth.ok,
        "max_overlap": orth.max_overlap,
        "failing_pair": list(orth.pair) if orth.pair else None,
    }
    ok = orth.ok
    lines = [f"{u.family} d={u.d}: {len(u)} states", f"orthogonal: {orth.ok} (max overlap {orth.max_overlap:.3g})"]
    if not orth.ok:
        lines.append(f"  failing pair: {orth.pair[0]}, {orth.pair[1]}")
    if orth.ok:
        try:
            res = check_unextendible(u, args.unextendible_mode, args.tol)
            body["unextendible"] = res.unextendible
            body["witness"] = _witness_obj(u, res.witness) if res.witness else None
            body["search"] = {"mode": res.mode, "visited": res.visited}
            ok = ok and res.unextendible
            lines.append(f"unextendible: {res.unextendible} ({res.mode}, {res.visited} nodes)")
            if res.witness:
                w = body["witness"]
                lines.append(f"  witness orthogonal to all states (max overlap {w['max_overlap']:.3g})")
        except SearchTooLarge as e:
            body["unextendible"] = "skipped"
            body["witness"] = None
            body["search"] = {"mode": args.unextendible_mode, "skipped_reason": str(e)}
            print(f"warning: unextendibility search skipped: {e}", file=sys.stderr)
            lines.append("unextendible: skipped (search too large)")
        rho, rank = normalized_complement(u)
        body["complement_rank"] = rank
        lines.append(f"complement rank: {rank}")
        if args.ppt:
            if rank == 0:
                body["ppt"] = None
                lines.append("ppt: complement is empty")
            else:
                lam, is_ppt = check_ppt(rho, ["A"], args.tol)
                body["ppt"] = {"min_eig": lam, "is_ppt": is_ppt}
                ok = ok and is_ppt
                lines.append(f"ppt: {is_ppt} (min eigenvalue of partial transpose {lam:.3g})")
    _emit(args, _report(args, "verify", body, t0), lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_build_protocol(args) -> int:
    try:
        p, r, u = build_protocol(args.theorem, args.d)
    except ValueError as e:
        raise UsageError(str(e)) from None
    layout = attach_layout(u.layout, r)
    _write(args.out, dumps_protocol(p, r, layout, args.matrix_format))
    print(f"wrote theorem {args.theorem} protocol (resource {list(r.dims)}, {ebit_cost(r):.6g} ebits) to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    t0 = time.perf_counter()
    try:
        u = loads_states(_read(args.states))
        p, r, layout = loads_protocol(_read(args.protocol))
    except FormatError as e:
        raise UsageError(str(e)) from None
    try:
        expect = attach_layout(u.layout, r)
    except LayoutError as e:
        raise UsageError(f"resource clashes with the state layout: {e}") from None
    if expect != layout:
        raise UsageError(f"protocol layout {layout.ids}/{layout.dims} does not match states + resource {expect.ids}/{expect.dims}")
    v = validate(p, layout, args.tol)
    body: dict[str, Any] = {"valid": v.ok, "max_completeness_error": v.max_completeness_error}
    if not v.ok:
        body["violations"] = [{"path": "/".join(x.path), "kind": x.kind, "detail": x.detail} for x in v.violations]
        lines = [f"invalid protocol: {len(v.violations)} violations"] + [
            f"  {'/'.join(x.path) or '<root>'}: {x.kind}: {x.detail}" for x in v.violations[:10]
        ]
        _emit(args, _report(args, "run", body, t0), lines)
        return EXIT_FAIL
    rep = evaluate(p, attach(u, r, args.product_control), u.labels, resource=r, tol=args.tol)
    body.update(rep.summary())
    body["states"] = {
        label: {
            "success": ir.success,
            "branches": [
                {
                    "path": "/".join(b.path),
                    "probability": b.probability,
                    "conditional": list(b.conditional),
                    "outcome": b.outcome,
                }
                for b in ir.branches
            ],
        }
        for label, ir in rep.inputs.items()
    }
    body["failure_paths"] = [{"path": "/".join(f[0]), "kind": f[1], "survivors": list(f[2])} for f in rep.failures]
    lines = [
        f"perfect: {rep.perfect}",
        f"identified with certainty: {body['identified']}/{len(u)}",
        f"ebits: {rep.ebits:.6g}",
        f"max depth: {rep.max_depth}",
    ]
    for f in rep.failures[:10]:
        lines.append(f"  {f[1]} at {'/'.join(f[0])}: {', '.join(f[2])}")
    _emit(args, _report(args, "run", body, t0), lines)
    return EXIT_OK if rep.perfect else EXIT_FAIL


def cmd_tiles(args) -> int:
    u = _family(args)
    sys.stdout.write(render_tiles(u, plain=args.plain) + "\n")
    return EXIT_OK


def cmd_complement(args) -> int:
    t0 = time.perf_counter()
    try:
        u = loads_states(_read(args.states))
        rho, rank = normalized_complement(u)
    except (FormatError, ValueError) as e:
        raise UsageError(f"{args.states}: {e}") from None
    body: dict[str, Any] = {"d": u.d, "n_states": len(u), "complement_rank": rank}
    lines = [f"complement rank: {rank} (= {u.d}^2 - {len(u)})"]
    ok = True
    if rank:
        lam, is_ppt = check_ppt(rho, ["A"], args.tol)
        body["ppt"] = {"min_eig": lam, "is_ppt": is_ppt}
        lines.append(f"normalized complement PPT: {is_ppt} (min eigenvalue {lam:.3g})")
        ok = is_ppt
        if args.out:
            _write(args.out, json.dumps({"dims": list(rho.dims), "matrix": [[_c(z) for z in row] for row in rho.matrix]}) + "\n")
            lines.append(f"wrote density operator to {args.out}")
    _emit(args, _report(args, "complement", body, t0), lines)
    return EXIT_OK if ok else EXIT_FAIL


def _positive_float(s: str) -> float:
    x = float(s)
    if not x > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return x


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=TOL, help="numerical tolerance (default 1e-9)")
    style = common.add_mutually_exclusive_group()
    style.add_argument("--json", dest="style", action="store_const", const="json", help="JSON report on stdout")
    style.add_argument("--text", dest="style", action="store_const", const="text", help="text summary (default)")
    common.set_defaults(style="text")

    ap = argparse.ArgumentParser(prog="upb-locc", description="UPB construction, verification and LOCC discrimination.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--family", required=True, choices=["paper5x5", "odd", "gentiles"])
    fam.add_argument("--d", type=int, default=None)

    c = sub.add_parser("construct", parents=[common, fam], help="write a UPB states file")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", parents=[common], help="check orthogonality, unextendibility, PPT")
    v.add_argument("states")
    v.add_argument("--unextendible-mode", choices=["exhaustive", "branch_and_bound"], default="exhaustive")
    v.add_argument("--ppt", action="store_true", help="also test the normalized complement for PPT")
    v.add_argument("--report", help="also write the JSON report here")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("build-protocol", parents=[common], help="write a protocol tree for theorem 1..5")
    b.add_argument("--theorem", type=int, required=True, choices=[1, 2, 3, 4, 5])
    b.add_argument("--d", type=int, default=None)
    b.add_argument("--out", required=True)
    b.add_argument("--matrix-format", choices=["auto", "dense", "sparse"], default="auto")
    b.set_defaults(func=cmd_build_protocol)

    r = sub.add_parser("run", parents=[common], help="evaluate a protocol on a states file")
    r.add_argument("states")
    r.add_argument("protocol")
    r.add_argument("--report", help="write the JSON report here")
    r.add_argument("--product-control", action="store_true", help="replace each entangled pair by |00>")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("tiles", parents=[common, fam], help="draw the tile structure")
    t.add_argument("--plain", action="store_true", help="ASCII only, no box-drawing characters")
    t.set_defaults(func=cmd_tiles)

    k = sub.add_parser("complement", parents=[common], help="complement projector rank and PPT test")
    k.add_argument("states")
    k.add_argument("--out", help="write the normalized complement density operator as JSON")
    k.set_defaults(func=cmd_complement)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
