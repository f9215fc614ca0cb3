"""The eight acceptance criteria, one pass/fail line each.

Run under pytest (lines appear in the "acceptance criteria" summary section)
or directly with ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES, ALL_PROTOCOLS, protocol, report  # noqa: E402
from upb_locc.builders import build_protocol  # noqa: E402
from upb_locc.families import UPBSet, build_family, build_gentiles, build_odd_family, build_paper_5x5  # noqa: E402
from upb_locc.formats import canonical, dumps_protocol, dumps_states, loads_protocol, loads_states  # noqa: E402
from upb_locc.locc import Leaf, attach_layout, completeness_error, run_protocol, walk  # noqa: E402
from upb_locc.verify import (  # noqa: E402
    check_orthogonality,
    check_ppt,
    check_unextendible,
    normalized_complement,
    witness_overlaps,
)


def _timed(f, *a):
    t0 = time.perf_counter()
    out = f(*a)
    return out, time.perf_counter() - t0


def _built_and_run(theorem, d=None):
    def go():
        p, r, u = build_protocol(theorem, d)
        return p, r, u, run_protocol(u, p, r)
    return _timed(go)


def _branch_mass(rep, depth):
    out = []
    for ir in rep.inputs.values():
        mass = {}
        for b in ir.branches:
            mass[b.path[:depth]] = mass.get(b.path[:depth], 0.0) + b.probability
        out.append(mass)
    return out


def criterion_1():
    def go():
        u = build_paper_5x5()
        return u, check_orthogonality(u), check_unextendible(u, "exhaustive")
    (u, orth, ext), dt = _timed(go)
    ok = len(u) == 17 and orth.ok and orth.max_overlap < 1e-9 and ext.unextendible and ext.visited == 2**17 and dt < 30
    return ok, f"17 states, max overlap {orth.max_overlap:.1e}, UPB over {ext.visited} subsets, {dt:.2f}s"


def criterion_2():
    rho, rank = normalized_complement(build_paper_5x5())
    lam, is_ppt = check_ppt(rho, ["A"])
    return rank == 8 and is_ppt and lam >= -1e-8, f"rank {rank}, min eig of partial transpose {lam:.2e}"


def criterion_3():
    (p, r, u, rep), dt = _built_and_run(1)
    succ = rep.success()
    mass = _branch_mass(rep, 1)
    siblings = all(
        sorted(m) == [("A1",), ("A2",), ("A3",)] and all(abs(v - 1 / 3) < 1e-7 for v in m.values()) for m in mass
    )
    ok = (
        rep.perfect
        and r.dims == (3,)
        and all(abs(s - 1) < 1e-7 for s in succ.values())
        and abs(rep.ebits - math.log2(3)) < 1e-12
        and siblings
        and dt < 5
    )
    return ok, f"perfect={rep.perfect}, min success {min(succ.values()):.12f}, A1/A2/A3 siblings={siblings}, ebits {rep.ebits:.6f}, {dt:.2f}s"


def criterion_4():
    (p, r, u, rep), dt = _built_and_run(2)
    want = [("A1", "A11"), ("A1", "A12"), ("A2", "A21"), ("A2", "A22")]
    siblings = all(sorted(m) == want and all(abs(v - 0.25) < 1e-7 for v in m.values()) for m in _branch_mass(rep, 2))
    ok = rep.perfect and r.dims == (2, 2) and rep.ebits == 2.0 and siblings
    return ok, f"perfect={rep.perfect}, resource {list(r.dims)}, ebits {rep.ebits}, four sibling paths={siblings}"


def criterion_5():
    parts, ok = [], True
    for d in (3, 5, 7, 9):
        for theorem, dims in ((3, ((d + 1) // 2,)), (4, (2,) * ((d - 1) // 2))):
            (p, r, u, rep), dt = _built_and_run(theorem, d)
            good = rep.perfect and r.dims == dims and (d < 9 or dt < 60)
            ok &= good
            parts.append(f"T{theorem} d={d} {'ok' if good else 'FAIL'} {dt:.1f}s")
    for d in (3, 5):
        ok &= check_unextendible(build_odd_family(d), "exhaustive").unextendible
    bb = check_unextendible(build_odd_family(7), "branch_and_bound")
    ok &= bb.unextendible and len(build_odd_family(7)) == 37
    parts.append(f"UPB exhaustive d=3,5; branch-and-bound d=7 ({bb.visited} nodes)")
    return bool(ok), "; ".join(parts)


def criterion_6():
    ok, parts = True, []
    for d in (4, 6, 8):
        u = build_gentiles(d)
        orth = check_orthogonality(u)
        p, r, _ = build_protocol(5, d)
        rep = run_protocol(u, p, r)
        good = orth.ok and rep.perfect and r.dims == (2,) * (d // 2 - 1)
        ok &= good
        parts.append(f"d={d} {'ok' if good else 'FAIL'} resource {list(r.dims)}")
    ext = check_unextendible(build_gentiles(4), "exhaustive")
    ok &= ext.unextendible and ext.visited == 2**9
    parts.append(f"d=4 UPB over {ext.visited} subsets")
    return bool(ok), "; ".join(parts)


def criterion_7():
    p, r, u = build_protocol(1)
    control = run_protocol(u, p, r, product_control=True)
    full = build_paper_5x5()
    cut = UPBSet(5, full.family, full.states[:-1])
    ext = check_unextendible(cut, "exhaustive")
    worst = float(witness_overlaps(cut, ext.witness).max()) if ext.witness else float("inf")
    ok = not control.perfect and not ext.unextendible and worst < 1e-9
    return ok, f"product control perfect={control.perfect} ({len(control.failures)} failing branches); no-stopper witness max overlap {worst:.1e}"


def _families_small():
    out = []
    for fam, d in (("paper5x5", None), ("odd", 3), ("odd", 5), ("gentiles", 4)):
        u = build_family(fam, d)
        out.append(u)
        out.append(UPBSet(u.d, u.family, u.states[:-1]))
    return out


def criterion_8():
    worst_c, worst_p, trees = 0.0, 0.0, 0
    for theorem, d in ALL_PROTOCOLS:
        p, r, u = protocol(theorem, d)
        trees += 1
        for _, node in walk(p):
            if not isinstance(node, Leaf):
                worst_c = max(worst_c, completeness_error(node))
        rep = report(theorem, d)
        worst_p = max(worst_p, max(abs(ir.total - 1) for ir in rep.inputs.values()))
    agree = all(
        check_unextendible(u, "exhaustive").unextendible == check_unextendible(u, "branch_and_bound").unextendible
        for u in _families_small()
    )
    rt = 0
    for fam, d in (("paper5x5", None), ("odd", 3), ("odd", 9), ("gentiles", 8)):
        t = dumps_states(build_family(fam, d))
        rt += dumps_states(loads_states(t)) == t and canonical(t, "states") == t
    for theorem, d in ALL_PROTOCOLS:
        p, r, u = protocol(theorem, d)
        t = dumps_protocol(p, r, attach_layout(u.layout, r))
        rt += dumps_protocol(*loads_protocol(t)) == t
    n_rt = 4 + len(ALL_PROTOCOLS)
    ok = worst_c < 1e-9 and worst_p < 1e-7 and agree and rt == n_rt
    return ok, (
        f"{trees} trees, max completeness error {worst_c:.1e}, max |sum p - 1| {worst_p:.1e}, "
        f"exhaustive/B&B agree={agree}, round trips {rt}/{n_rt}"
    )


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def _line(k, ok, detail):
    return f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"


@pytest.mark.parametrize("k", range(1, 9))
def test_criterion(k):
    ok, detail = CRITERIA[k - 1]()
    line = _line(k, ok, detail)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [(k, *f()) for k, f in enumerate(CRITERIA, 1)]
    for k, ok, detail in results:
        print(_line(k, ok, detail))
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)
