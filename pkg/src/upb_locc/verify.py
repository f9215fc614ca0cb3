"""Certificates for UPB properties.

Unextendibility uses the partition criterion: a product vector |a>|b>
orthogonal to every member exists iff the members split into S and its
complement with the Alice factors of S and the Bob factors of the complement
both failing to span C^d. Any such split is returned as a witness.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .families import UPBSet
from .qla import (
    EIG_TOL,
    TOL,
    LocalOperator,
    Party,
    StateVector,
    min_eigenvalue,
    partial_transpose,
    support_basis,
)

EXHAUSTIVE_MAX_N = 22
BRANCH_AND_BOUND_MAX_N = 40
CHUNK = 1 << 12


class SearchTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OrthogonalityResult:
    ok: bool
    max_overlap: float
    pair: tuple[str, str] | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class PartitionWitness:
    subset: tuple[int, ...]
    alice_vector: StateVector
    bob_vector: StateVector

    def product_vector(self) -> np.ndarray:
        return np.kron(self.alice_vector.amplitudes, self.bob_vector.amplitudes)


@dataclass(frozen=True)
class UnextendibleResult:
    unextendible: bool
    witness: PartitionWitness | None = None
    mode: str = "exhaustive"
    visited: int = 0

    def __bool__(self) -> bool:
        return self.unextendible


def check_orthogonality(u: UPBSet, tol: float = TOL) -> OrthogonalityResult:
    vs = np.array([s.vector().amplitudes for s in u.states])
    g = np.abs(vs.conj() @ vs.T)
    np.fill_diagonal(g, 0.0)
    if g.size == 0:
        return OrthogonalityResult(True, 0.0)
    i, j = np.unravel_index(np.argmax(g), g.shape)
    worst = float(g[i, j])
    if worst < tol:
        return OrthogonalityResult(True, worst)
    # report the first failing pair in index order
    bad = np.argwhere(np.triu(g >= tol, 1))[0]
    return OrthogonalityResult(False, worst, (u.states[bad[0]].label, u.states[bad[1]].label))


def _factors(u: UPBSet) -> tuple[np.ndarray, np.ndarray]:
    a = np.array([s.alice.amplitudes / np.linalg.norm(s.alice.amplitudes) for s in u.states])
    b = np.array([s.bob.amplitudes / np.linalg.norm(s.bob.amplitudes) for s in u.states])
    return a, b


def _null_vector(rows: np.ndarray, d: int, tol: float) -> np.ndarray:
    """A unit vector x with <r|x> = 0 for every row r."""
    if rows.shape[0] == 0:
        x = np.zeros(d, dtype=complex)
        x[0] = 1.0
        return x
    _, s, vh = np.linalg.svd(rows.conj(), full_matrices=True)
    rank = int(np.sum(s > tol))
    if rank >= d:
        raise ValueError("rows span the whole space")
    return vh[rank].conj()


def _witness(u: UPBSet, subset: Sequence[int], a: np.ndarray, b: np.ndarray, tol: float) -> PartitionWitness:
    subset = tuple(sorted(subset))
    rest = [i for i in range(len(u)) if i not in subset]
    va = _null_vector(a[list(subset)], u.d, tol)
    vb = _null_vector(b[rest], u.d, tol)
    return PartitionWitness(
        subset,
        StateVector.single("A", va, Party.ALICE),
        StateVector.single("B", vb, Party.BOB),
    )


def _ranks(masks: np.ndarray, f: np.ndarray, tol: float) -> np.ndarray:
    rows = masks[:, :, None] * f[None, :, :]
    return np.sum(np.linalg.svd(rows, compute_uv=False) > tol, axis=1)


def _exhaustive_block(start: int, stop: int, a, b, d, tol) -> int | None:
    n = a.shape[0]
    bits = np.arange(n)
    for lo in range(start, stop, CHUNK):
        codes = np.arange(lo, min(lo + CHUNK, stop))
        masks = ((codes[:, None] >> bits[None, :]) & 1).astype(float)
        ra = _ranks(masks, a, tol)
        rb = _ranks(1.0 - masks, b, tol)
        bad = np.nonzero((ra < d) & (rb < d))[0]
        if bad.size:
            return int(codes[bad[0]])
    return None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("UPB_LOCC_THREADS", "1")))
    except ValueError:
        return 1


def _exhaustive(u: UPBSet, tol: float, threads: int) -> UnextendibleResult:
    n, d = len(u), u.d
    if n > EXHAUSTIVE_MAX_N:
        raise SearchTooLarge(f"exhaustive search over 2^{n} subsets exceeds 2^{EXHAUSTIVE_MAX_N}")
    a, b = _factors(u)
    total = 1 << n
    blocks = max(1, min(threads, total // CHUNK or 1))
    edges = [total * k // blocks for k in range(blocks + 1)]
    if blocks == 1:
        found = [_exhaustive_block(0, total, a, b, d, tol)]
    else:
        with ThreadPoolExecutor(max_workers=blocks) as ex:
            found = list(ex.map(lambda k: _exhaustive_block(edges[k], edges[k + 1], a, b, d, tol), range(blocks)))
    hits = [c for c in found if c is not None]
    if not hits:
        return UnextendibleResult(True, None, "exhaustive", total)
    code = min(hits)
    subset = [i for i in range(n) if code >> i & 1]
    return UnextendibleResult(False, _witness(u, subset, a, b, tol), "exhaustive", total)


class _Span:
    """Orthonormal basis of a growing subspace of C^d."""

    def __init__(self, d: int, basis: np.ndarray | None = None):
        self.d = d
        self.basis = np.zeros((0, d), dtype=complex) if basis is None else basis

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def residual(self, v: np.ndarray) -> np.ndarray:
        if self.rank == 0:
            return v
        return v - self.basis.T @ (self.basis.conj() @ v)

    def contains(self, v: np.ndarray, tol: float) -> bool:
        return np.linalg.norm(self.residual(v)) < tol

    def add(self, v: np.ndarray, tol: float) -> "_Span":
        r = self.residual(v)
        nr = np.linalg.norm(r)
        if nr < tol:
            return self
        return _Span(self.d, np.vstack([self.basis, r / nr]))


def _branch_and_bound(u: UPBSet, tol: float) -> UnextendibleResult:
    n, d = len(u), u.d
    if n > BRANCH_AND_BOUND_MAX_N:
        raise SearchTooLarge(f"branch-and-bound limited to {BRANCH_AND_BOUND_MAX_N} states, got {n}")
    a, b = _factors(u)
    # states with frequently repeated factors first: they collapse spans fastest
    def multiplicity(f, i):
        return sum(abs(abs(np.vdot(f[i], f[j])) - 1.0) < tol for j in range(n))
    order = sorted(range(n), key=lambda i: -(multiplicity(a, i) + multiplicity(b, i)))
    visited = 0

    def search(k: int, sa: _Span, sb: _Span, chosen: list[int]):
        # sa spans Alice factors of S, sb spans Bob factors of the complement
        nonlocal visited
        visited += 1
        if k == n:
            return list(chosen)
        i = order[k]
        in_a = sa.contains(a[i], tol)
        in_b = sb.contains(b[i], tol)
        if in_a:
            # free for S; placing it in the complement can only raise the Bob rank
            return search(k + 1, sa, sb, chosen + [i])
        if in_b:
            return search(k + 1, sa, sb, chosen)
        na = sa.add(a[i], tol)
        if na.rank < d:
            hit = search(k + 1, na, sb, chosen + [i])
            if hit is not None:
                return hit
        nb = sb.add(b[i], tol)
        if nb.rank < d:
            return search(k + 1, sa, nb, chosen)
        return None

    hit = search(0, _Span(d), _Span(d), [])
    if hit is None:
        return UnextendibleResult(True, None, "branch_and_bound", visited)
    return UnextendibleResult(False, _witness(u, hit, a, b, tol), "branch_and_bound", visited)


def check_unextendible(
    u: UPBSet,
    mode: Literal["exhaustive", "branch_and_bound"] = "exhaustive",
    tol: float = TOL,
    threads: int | None = None,
) -> UnextendibleResult:
    """Decide whether no product state is orthogonal to all members of ``u``."""
    if mode == "exhaustive":
        return _exhaustive(u, tol, threads or _threads())
    if mode == "branch_and_bound":
        return _branch_and_bound(u, tol)
    raise ValueError(f"unknown unextendibility mode {mode!r}")


def witness_overlaps(u: UPBSet, w: PartitionWitness) -> np.ndarray:
    pv = w.product_vector()
    return np.array([abs(np.vdot(s.vector().amplitudes, pv)) for s in u.states])


def check_ppt(rho: LocalOperator, cut: Sequence[str], tol: float = TOL) -> tuple[float, bool]:
    """Minimum eigenvalue of the partial transpose over ``cut`` and the PPT verdict."""
    if not rho.is_hermitian(tol):
        raise ValueError("density operator must be Hermitian")
    tr = complex(np.trace(rho.matrix))
    if abs(tr - 1.0) >= tol:
        raise ValueError(f"density operator has trace {tr}, expected 1")
    lam = min_eigenvalue(partial_transpose(rho, cut), tol)
    return lam, lam >= -EIG_TOL


def normalized_complement(u: UPBSet) -> tuple[LocalOperator, int]:
    from .families import complement_projector

    p, rank = complement_projector(u)
    return LocalOperator(p.acts_on, p.dims, p.matrix / rank), rank


def _party_matrices(cands: Sequence[StateVector], party: Party) -> list[np.ndarray]:
    layout = cands[0].layout
    keep = list(layout.owned_by(party))
    perm = [layout.index(i) for i in keep] + [k for k, i in enumerate(layout.ids) if i not in keep]
    rows = int(np.prod(layout.dims_of(keep)))
    out = []
    for s in cands:
        t = s.amplitudes.reshape(layout.dims).transpose(perm).reshape(rows, -1)
        out.append(t / np.linalg.norm(t))
    return out


def party_supports(cands: Sequence[StateVector], party: Party | str, tol: float = TOL) -> list[np.ndarray]:
    """Support projectors of each candidate's marginal on the party's subsystems."""
    party = Party.parse(party)
    out = []
    for m in _party_matrices(cands, party):
        basis = support_basis(m @ m.conj().T, tol)
        out.append(basis @ basis.conj().T)
    return out


def one_party_distinguishable(cands: Sequence[StateVector], party: Party | str, tol: float = TOL) -> bool:
    """True iff the party-side marginal supports are pairwise orthogonal."""
    if not cands:
        return True
    layout = cands[0].layout
    if any(c.layout != layout for c in cands):
        raise ValueError("candidates must share a layout")
    party = Party.parse(party)
    mats = _party_matrices(cands, party)
    # restrict to the party-side basis rows and partner columns any candidate touches;
    # the supports live there, and dropped rows carry weight far below tol
    rows = np.nonzero(sum(np.sum(np.abs(m) ** 2, axis=1) for m in mats) > tol * tol)[0]
    cols = np.nonzero(sum(np.sum(np.abs(m) ** 2, axis=0) for m in mats) > tol * tol)[0]
    projs = []
    for m in mats:
        sub = m[np.ix_(rows, cols)]
        basis = support_basis(sub @ sub.conj().T, tol)
        projs.append(basis @ basis.conj().T)
    for i in range(len(projs)):
        for j in range(i + 1, len(projs)):
            if np.max(np.abs(projs[i] @ projs[j]), initial=0.0) >= tol:
                return False
    return True


def search_budget(n: int, mode: str) -> bool:
    limit = EXHAUSTIVE_MAX_N if mode == "exhaustive" else BRANCH_AND_BOUND_MAX_N
    return n <= limit

