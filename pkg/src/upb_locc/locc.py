"""LOCC protocol trees: resources, measurement nodes, evaluation.

A protocol is a tree of :class:`Measure` nodes (one party applies a complete
set of Kraus operators to subsystems it owns and announces the outcome) ending
in :class:`Leaf` nodes. :func:`evaluate` pushes every input state down every
branch at once and checks that each surviving branch singles out the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Literal, Mapping, Sequence, Union

import numpy as np

from .families import ALICE_ID, BOB_ID, UPBSet
from .qla import (
    TOL,
    LayoutError,
    LocalOperator,
    Party,
    StateVector,
    SystemLayout,
)
from .verify import one_party_distinguishable

PRUNE = 1e-12
PROB_TOL = 1e-7


@dataclass(frozen=True)
class Copy:
    dim: int
    alice: str
    bob: str

    def __post_init__(self):
        if int(self.dim) < 2:
            raise ValueError(f"resource copy dimension must be >= 2, got {self.dim}")
        if self.alice == self.bob:
            raise LayoutError(f"ancilla pair uses the same id {self.alice!r} twice")
        object.__setattr__(self, "dim", int(self.dim))

    def vector(self, product: bool = False) -> np.ndarray:
        k = self.dim
        v = np.zeros(k * k, dtype=complex)
        if product:
            v[0] = 1.0
        else:
            v[np.arange(k) * (k + 1)] = 1 / math.sqrt(k)
        return v


@dataclass(frozen=True)
class Resource:
    copies: tuple[Copy, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "copies", tuple(self.copies))

    @classmethod
    def of(cls, *dims: int) -> "Resource":
        """Copies named (a, b) for a single copy, (a1, b1), (a2, b2), ... otherwise."""
        if len(dims) == 1:
            return cls((Copy(dims[0], "a", "b"),))
        return cls(tuple(Copy(k, f"a{i + 1}", f"b{i + 1}") for i, k in enumerate(dims)))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c.dim for c in self.copies)

    @property
    def alice_ids(self) -> tuple[str, ...]:
        return tuple(c.alice for c in self.copies)

    @property
    def bob_ids(self) -> tuple[str, ...]:
        return tuple(c.bob for c in self.copies)

    def layout(self) -> SystemLayout:
        specs = []
        for c in self.copies:
            specs += [(c.alice, c.dim, Party.ALICE), (c.bob, c.dim, Party.BOB)]
        return SystemLayout.of(*specs)


def ebit_cost(r: Resource) -> float:
    return float(sum(math.log2(k) for k in r.dims))


def attach_layout(base: SystemLayout, r: Resource) -> SystemLayout:
    return base.concat(r.layout())


def attach(u: UPBSet, r: Resource, product_control: bool = False) -> list[StateVector]:
    """Members of ``u`` tensored with the resource; ``product_control`` swaps each MES for |00>."""
    layout = attach_layout(u.layout, r)
    anc = np.ones(1, dtype=complex)
    for c in r.copies:
        anc = np.kron(anc, c.vector(product_control))
    return [StateVector(layout, np.kron(s.vector().amplitudes, anc)) for s in u.states]


LeafKind = Literal["identify", "local_finish", "dead"]


@dataclass(frozen=True, eq=False)
class Leaf:
    kind: LeafKind
    label: str | None = None
    party: Party | None = None

    def __post_init__(self):
        if self.kind not in ("identify", "local_finish", "dead"):
            raise ValueError(f"unknown leaf kind {self.kind!r}")
        if self.party is not None:
            object.__setattr__(self, "party", Party.parse(self.party))

    @classmethod
    def identify(cls, label: str) -> "Leaf":
        return cls("identify", label=label)

    @classmethod
    def local_finish(cls, party: Party | str) -> "Leaf":
        return cls("local_finish", party=Party.parse(party))

    @classmethod
    def dead(cls) -> "Leaf":
        return cls("dead")


@dataclass(frozen=True, eq=False)
class Measure:
    party: Party
    acts_on: tuple[str, ...]
    operators: tuple[LocalOperator, ...]
    children: tuple["Node", ...]
    names: tuple[str, ...] = ()
    tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "party", Party.parse(self.party))
        object.__setattr__(self, "acts_on", tuple(self.acts_on))
        object.__setattr__(self, "operators", tuple(self.operators))
        object.__setattr__(self, "children", tuple(self.children))
        names = tuple(self.names) or tuple(str(i) for i in range(len(self.operators)))
        object.__setattr__(self, "names", names)
        if len(self.children) != len(self.operators) or len(names) != len(self.operators):
            raise ValueError("a measurement needs one child and one name per operator")


Node = Union[Measure, Leaf]


def measure(
    layout: SystemLayout,
    party: Party | str,
    acts_on: Sequence[str],
    branches: Sequence[tuple[str, np.ndarray, Node]],
    tag: str = "",
) -> Measure:
    """Build a Measure from (name, matrix, child) triples."""
    ops = tuple(LocalOperator.on(layout, acts_on, m) for _, m, _ in branches)
    return Measure(
        Party.parse(party),
        tuple(acts_on),
        ops,
        tuple(c for _, _, c in branches),
        tuple(n for n, _, _ in branches),
        tag,
    )


def walk(node: Node, path: tuple[str, ...] = ()) -> Iterator[tuple[tuple[str, ...], Node]]:
    yield path, node
    if isinstance(node, Measure):
        for name, child in zip(node.names, node.children):
            yield from walk(child, path + (name,))


def count_nodes(node: Node) -> tuple[int, int]:
    m = l = 0
    for _, n in walk(node):
        if isinstance(n, Measure):
            m += 1
        else:
            l += 1
    return m, l


def tree_depth(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(c) for c in node.children)


def completeness_error(node: Measure) -> float:
    s = sum(op.matrix.conj().T @ op.matrix for op in node.operators)
    return float(np.max(np.abs(s - np.eye(s.shape[0]))))


@dataclass(frozen=True)
class Violation:
    path: tuple[str, ...]
    kind: Literal["ownership", "completeness", "shape", "leaf"]
    detail: str


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...]
    max_completeness_error: float

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(p: Node, layout: SystemLayout, tol: float = TOL) -> ValidationResult:
    out: list[Violation] = []
    worst = 0.0
    for path, node in walk(p):
        if isinstance(node, Leaf):
            if node.kind == "identify" and not node.label:
                out.append(Violation(path, "leaf", "identify leaf without a label"))
            if node.kind == "local_finish" and node.party is None:
                out.append(Violation(path, "leaf", "local_finish leaf without a party"))
            continue
        if not node.operators:
            out.append(Violation(path, "completeness", "measurement with no operators"))
            continue
        try:
            dims = layout.dims_of(node.acts_on)
        except LayoutError as e:
            out.append(Violation(path, "shape", str(e)))
            continue
        for sid in node.acts_on:
            owner = layout.sub(sid).owner
            if owner is not node.party:
                out.append(Violation(path, "ownership", f"{node.party.value} acts on {sid!r} owned by {owner.value}"))
        bad = [
            n for n, op in zip(node.names, node.operators) if op.acts_on != node.acts_on or op.dims != dims
        ]
        if bad:
            out.append(Violation(path, "shape", f"operators {bad} do not act on {node.acts_on}"))
            continue
        err = completeness_error(node)
        worst = max(worst, err)
        if err >= tol:
            out.append(Violation(path, "completeness", f"||sum M^dag M - I|| = {err:.3g}"))
    return ValidationResult(tuple(out), worst)


def local_unitary(layout: SystemLayout, acts_on: Sequence[str], unitaries: Mapping[str, np.ndarray]) -> np.ndarray | None:
    """Tensor product over ``acts_on`` of the given per-subsystem unitaries, None if all identity."""
    if not any(s in unitaries for s in acts_on):
        return None
    u = np.ones((1, 1), dtype=complex)
    for s in acts_on:
        k = layout.sub(s).dim
        u = np.kron(u, unitaries.get(s, np.eye(k)))
    return u


def conjugate(
    p: Node, layout: SystemLayout, unitaries: Mapping[str, np.ndarray], tag_prefix: str | None = None
) -> Node:
    """Tree with every operator M replaced by U M U^dag, U the local relabeling on its subsystems.

    Running the result on states V|psi> is the same as running ``p`` on |psi>.
    """
    if isinstance(p, Leaf):
        return p
    u = local_unitary(layout, p.acts_on, unitaries)
    ops = p.operators
    if u is not None:
        ops = tuple(LocalOperator(op.acts_on, op.dims, u @ op.matrix @ u.conj().T) for op in ops)
    children = tuple(conjugate(c, layout, unitaries, tag_prefix) for c in p.children)
    tag = p.tag if tag_prefix is None else f"{tag_prefix}{p.tag}"
    return replace(p, operators=ops, children=children, tag=tag)


@dataclass(frozen=True)
class Branch:
    path: tuple[str, ...]
    conditional: tuple[float, ...]
    probability: float
    outcome: Literal["identified", "finished", "dead", "ambiguous", "misidentified"]


@dataclass
class InputReport:
    label: str
    branches: list[Branch] = field(default_factory=list)

    @property
    def success(self) -> float:
        return float(sum(b.probability for b in self.branches if b.outcome in ("identified", "finished")))

    @property
    def total(self) -> float:
        return float(sum(b.probability for b in self.branches))


@dataclass
class RunReport:
    inputs: dict[str, InputReport]
    ebits: float | None
    max_depth: int
    max_conservation_error: float
    failures: list[tuple[tuple[str, ...], str, tuple[str, ...]]]
    max_overlap: float | None = None

    @property
    def perfect(self) -> bool:
        return not self.failures and all(abs(r.success - 1.0) < PROB_TOL for r in self.inputs.values())

    def success(self) -> dict[str, float]:
        return {k: r.success for k, r in self.inputs.items()}

    def summary(self) -> dict:
        succ = self.success()
        return {
            "perfect": self.perfect,
            "inputs": len(self.inputs),
            "identified": sum(abs(v - 1.0) < PROB_TOL for v in succ.values()),
            "min_success": min(succ.values(), default=1.0),
            "ebits": self.ebits,
            "max_depth": self.max_depth,
            "max_conservation_error": self.max_conservation_error,
            "failures": len(self.failures),
            "max_overlap": self.max_overlap,
        }


def _max_overlap(amps: np.ndarray) -> float:
    if amps.shape[0] < 2:
        return 0.0
    n = np.linalg.norm(amps, axis=1)
    g = np.abs(amps.conj() @ amps.T) / np.outer(n, n)
    np.fill_diagonal(g, 0.0)
    return float(g.max())


class _Moved:
    """Batch of states with the measured axes brought to the front, reused across operators."""

    def __init__(self, amps: np.ndarray, axes: Sequence[int], dims: Sequence[int]):
        self.batch = amps.shape[0]
        self.dims = tuple(dims)
        self.src = [a + 1 for a in axes]
        self.dst = list(range(1, len(axes) + 1))
        t = np.moveaxis(amps.reshape((self.batch,) + self.dims), self.src, self.dst)
        self.shape = t.shape
        self.k = int(np.prod([self.dims[a] for a in axes]))
        self.t = np.ascontiguousarray(t).reshape(self.batch, self.k, -1)

    def apply(self, m: np.ndarray) -> tuple[np.ndarray, Callable | None]:
        """Branch weights ||M psi||^2 and a function expanding chosen inputs to full vectors."""
        cols = np.nonzero(np.any(m != 0, axis=0))[0]
        rws = np.nonzero(np.any(m != 0, axis=1))[0]
        if not (cols.size and rws.size):
            return np.zeros(self.batch), None
        part = np.matmul(m[np.ix_(rws, cols)], self.t[:, cols, :])
        w = np.sum(np.abs(part) ** 2, axis=(1, 2))

        def expand(keep: np.ndarray) -> np.ndarray:
            out = np.zeros((keep.size,) + self.t.shape[1:], dtype=complex)
            out[:, rws, :] = part[keep]
            back = np.moveaxis(out.reshape((keep.size,) + self.shape[1:]), self.dst, self.src)
            return back.reshape(keep.size, -1)

        return w, expand


def evaluate(
    p: Node,
    inputs: Sequence[StateVector],
    labels: Sequence[str] | None = None,
    resource: Resource | None = None,
    overlaps: bool = False,
    tol: float = TOL,
) -> RunReport:
    """Run every input through every branch of ``p``; see :class:`RunReport`."""
    if not inputs:
        raise ValueError("evaluate needs at least one input state")
    layout = inputs[0].layout
    if any(s.layout != layout for s in inputs):
        raise LayoutError("inputs must share a layout")
    labels = list(labels) if labels is not None else [str(i) for i in range(len(inputs))]
    if len(labels) != len(inputs) or len(set(labels)) != len(labels):
        raise ValueError("labels must be unique, one per input")
    reports = {l: InputReport(l) for l in labels}
    failures: list[tuple[tuple[str, ...], str, tuple[str, ...]]] = []
    stats = {"cons": 0.0, "depth": 0, "overlap": 0.0}
    amps0 = np.array([s.amplitudes for s in inputs])
    # normalize so joint probabilities are absolute
    amps0 = amps0 / np.linalg.norm(amps0, axis=1, keepdims=True)

    def finish(path, cond, idx, amps, outcome_of):
        for r, i in enumerate(idx):
            out = outcome_of(i)
            prob = float(np.vdot(amps[r], amps[r]).real)
            reports[labels[i]].branches.append(Branch(path, tuple(cond[r]), prob, out))

    def rec(node: Node, path, idx: np.ndarray, amps: np.ndarray, cond: list[list[float]], depth: int):
        stats["depth"] = max(stats["depth"], depth)
        if isinstance(node, Leaf):
            names = tuple(labels[i] for i in idx)
            if node.kind == "identify":
                if len(idx) == 1 and labels[idx[0]] == node.label:
                    finish(path, cond, idx, amps, lambda i: "identified")
                else:
                    kind = "misidentified" if len(idx) == 1 else "ambiguous"
                    failures.append((path, kind, names))
                    finish(path, cond, idx, amps, lambda i: kind)
            elif node.kind == "local_finish":
                cands = [StateVector(layout, a) for a in amps]
                ok = len(idx) == 1 or one_party_distinguishable(cands, node.party, tol)
                if not ok:
                    failures.append((path, "ambiguous", names))
                finish(path, cond, idx, amps, lambda i: "finished" if ok else "ambiguous")
            else:
                failures.append((path, "dead", names))
                finish(path, cond, idx, amps, lambda i: "dead")
            return
        axes = [layout.index(s) for s in node.acts_on]
        parent = np.sum(np.abs(amps) ** 2, axis=1)
        child_total = np.zeros_like(parent)
        moved = _Moved(amps, axes, layout.dims)
        for name, op, child in zip(node.names, node.operators, node.children):
            w, expand = moved.apply(op.matrix)
            child_total += w
            c = w / parent
            kept = np.nonzero(c >= PRUNE)[0]
            if not kept.size:
                continue
            sub = expand(kept)
            if overlaps:
                stats["overlap"] = max(stats["overlap"], _max_overlap(sub))
            rec(
                child,
                path + (name,),
                idx[kept],
                sub,
                [cond[k] + [float(c[k])] for k in kept],
                depth + 1,
            )
        stats["cons"] = max(stats["cons"], float(np.max(np.abs(child_total - parent))))

    rec(p, (), np.arange(len(inputs)), amps0, [[] for _ in inputs], 0)
    for r in reports.values():
        r.branches.sort(key=lambda b: b.path)
        stats["cons"] = max(stats["cons"], abs(r.total - 1.0))
    return RunReport(
        inputs=reports,
        ebits=ebit_cost(resource) if resource is not None else None,
        max_depth=stats["depth"],
        max_conservation_error=stats["cons"],
        failures=sorted(failures),
        max_overlap=stats["overlap"] if overlaps else None,
    )


def run_protocol(
    u: UPBSet, p: Node, r: Resource, product_control: bool = False, overlaps: bool = False
) -> RunReport:
    states = attach(u, r, product_control)
    return evaluate(p, states, u.labels, resource=r, overlaps=overlaps)


def party_ids(r: Resource) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Measurement orders (a..., A) for Alice and (b..., B) for Bob."""
    return r.alice_ids + (ALICE_ID,), r.bob_ids + (BOB_ID,)
