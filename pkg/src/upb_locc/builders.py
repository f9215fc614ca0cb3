"""Protocol trees for the five discrimination results.

Every protocol starts the same way: Alice measures which class her row index
falls into, writing the class onto her half of the shared entanglement, so
that Bob's ancilla carries the class too. For the odd frame families Bob then
peels one frame layer at a time (tile states with a single row are identified
outright, the right column is Fourier-erased and handed to Alice, the rest
goes down to the next layer). The GenTiles protocol peels the wrap-around
tiles in three rounds instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .families import ALICE_ID, BOB_ID, TileSpec, UPBSet, build_gentiles, build_odd_family, build_paper_5x5
from .locc import Leaf, Node, Resource, attach_layout, conjugate, measure
from .qla import Party, fourier_amplitudes, projector

Encoding = Literal["letter", "thermometer", "binary"]

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class ClassSplit:
    """Ordered partition of Alice's indices and the ancilla code for each class."""

    d: int
    classes: tuple[tuple[int, ...], ...]
    encoding: Encoding

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(tuple(c) for c in self.classes))
        flat = sorted(i for c in self.classes for i in c)
        if flat != list(range(self.d)):
            raise ValueError("classes must partition {0..d-1}")
        if self.encoding == "thermometer" and any(len(c) != 1 for c in self.classes[1:]):
            raise ValueError("thermometer split needs singleton classes after class 0")
        if self.encoding == "binary" and len(self.classes) > 2 ** self.n_ancillas:
            raise ValueError("too many classes for the binary code")

    @classmethod
    def odd(cls, d: int, encoding: Encoding = "letter") -> "ClassSplit":
        if d < 3 or d % 2 == 0:
            raise ValueError(f"odd split needs odd d >= 3, got {d}")
        h = (d - 1) // 2
        return cls(d, (tuple(range(h + 1)),) + tuple((h + j,) for j in range(1, h + 1)), encoding)

    @classmethod
    def even(cls, d: int) -> "ClassSplit":
        """Pairs {0,1} and {n,n+1}, every other row alone; 2(n-1) classes in binary."""
        if d < 4 or d % 2:
            raise ValueError(f"even split needs even d >= 4, got {d}")
        n = d // 2
        classes = [(0, 1)] + [(s,) for s in range(2, n)] + [(n, n + 1)] + [(s,) for s in range(n + 2, d)]
        return cls(d, tuple(classes), "binary")

    @property
    def r(self) -> int:
        return len(self.classes)

    def class_of(self, row: int) -> int:
        for c, rows in enumerate(self.classes):
            if row in rows:
                return c
        raise ValueError(f"row {row} out of range")

    def classes_of(self, rows: Sequence[int]) -> list[int]:
        return sorted({self.class_of(i % self.d) for i in rows})

    @property
    def n_ancillas(self) -> int:
        if self.encoding == "letter":
            return 1
        if self.encoding == "thermometer":
            return self.r - 1
        return max(1, int(np.ceil(np.log2(self.r))))

    @property
    def ancilla_dims(self) -> tuple[int, ...]:
        if self.encoding == "letter":
            return (self.r,)
        return (2,) * self.n_ancillas

    def code(self, c: int) -> tuple[int, ...]:
        if self.encoding == "letter":
            return (c,)
        if self.encoding == "thermometer":
            return tuple(int(c >= t) for t in range(1, self.r))
        return tuple((c >> t) & 1 for t in range(self.n_ancillas))

    def resource(self) -> Resource:
        return Resource.of(*self.ancilla_dims)

    def ancilla_projector(self, classes: Sequence[int]) -> np.ndarray:
        dims = self.ancilla_dims
        p = np.zeros((int(np.prod(dims)),) * 2, dtype=complex)
        for c in classes:
            i = np.ravel_multi_index(self.code(c), dims)
            p[i, i] = 1.0
        return p

    def rows_projector(self, c: int) -> np.ndarray:
        p = np.zeros((self.d, self.d), dtype=complex)
        for i in self.classes[c]:
            p[i, i] = 1.0
        return p


def _ket(d: int, i: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i % d] = 1.0
    return v


def _uniform(d: int, idx: Sequence[int]) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[[i % d for i in idx]] = 1.0
    return v


def _complete(ops: Sequence[np.ndarray]) -> np.ndarray:
    n = ops[0].shape[0]
    return np.eye(n, dtype=complex) - sum(ops)


class _Builder:
    """Shared machinery; subtrees are built for the all-zero ancilla shift."""

    def __init__(self, u: UPBSet, split: ClassSplit):
        self.u = u
        self.d = u.d
        self.split = split
        self.resource = split.resource()
        self.layout = attach_layout(u.layout, self.resource)
        self.a_ids = self.resource.alice_ids
        self.b_ids = self.resource.bob_ids
        self.alice = self.a_ids + (ALICE_ID,)
        self.bob = self.b_ids + (BOB_ID,)
        self.stopper = u.labels[-1]

    def bob_op(self, classes: Sequence[int], m_b: np.ndarray) -> np.ndarray:
        return np.kron(self.split.ancilla_projector(classes), m_b)

    def alice_op(self, classes: Sequence[int], m_a: np.ndarray) -> np.ndarray:
        return np.kron(self.split.ancilla_projector(classes), m_a)

    def erase(self, active: Sequence[int], name: str) -> Node:
        """Bob strips the class information from his ancilla, then Alice finishes."""
        finish = Leaf.local_finish(Party.ALICE)
        active = sorted(active)
        if len(active) <= 1:
            return finish
        sp = self.split
        if sp.encoding == "letter":
            r = sp.r
            branches = []
            for k in range(len(active)):
                f = fourier_amplitudes(len(active), k)
                v = np.zeros(r, dtype=complex)
                v[active] = f
                branches.append((f"{name}f{k}", projector(v), finish))
            for j in range(r):
                if j not in active:
                    branches.append((f"{name}e{j}", projector(_ket(r, j)), Leaf.dead()))
            return measure(self.layout, Party.BOB, (self.b_ids[0],), branches, tag="erase")
        codes = np.array([sp.code(c) for c in active])
        varying = [t for t in range(sp.n_ancillas) if len(set(codes[:, t])) > 1]
        node: Node = finish
        for t in reversed(varying):
            branches = [
                (f"{name}{self.b_ids[t]}+", projector(_H[:, 0]), node),
                (f"{name}{self.b_ids[t]}-", projector(_H[:, 1]), node),
            ]
            node = measure(self.layout, Party.BOB, (self.b_ids[t],), branches, tag="erase")
        return node

    def sibling_unitaries(self, shift: Sequence[int]) -> dict[str, np.ndarray]:
        out = {}
        for t, s in enumerate(shift):
            if not s:
                continue
            if self.split.encoding == "letter":
                m = np.linalg.matrix_power(np.roll(np.eye(self.split.r), 1, axis=0), s)
            else:
                m = _X
            out[self.a_ids[t]] = m
            out[self.b_ids[t]] = m
        return out

    def class_measurement(self, base: Node) -> Node:
        """Alice's opening measurement; each outcome leads to ``base`` with ancillas relabelled."""
        sp = self.split
        d = self.d
        if sp.encoding == "letter":
            r = sp.r
            branches = []
            for s in range(r):
                m = sum(
                    np.kron(projector(_ket(r, (c + s) % r)), sp.rows_projector(c)) for c in range(r)
                )
                child = conjugate(base, self.layout, self.sibling_unitaries([s]))
                branches.append((f"A{s + 1}", m, child))
            return measure(self.layout, Party.ALICE, self.alice, branches, tag="classes")

        k = sp.n_ancillas

        def bit_op(t: int, flip: int) -> np.ndarray:
            return sum(
                np.kron(projector(_ket(2, sp.code(c)[t] ^ flip)), sp.rows_projector(c)) for c in range(sp.r)
            )

        def rec(t: int, shift: tuple[int, ...], name: str) -> Node:
            if t == k:
                return conjugate(base, self.layout, self.sibling_unitaries(shift))
            branches = [
                (f"{name}{x + 1}", bit_op(t, x), rec(t + 1, shift + (x,), f"{name}{x + 1}")) for x in (0, 1)
            ]
            return measure(self.layout, Party.ALICE, (self.a_ids[t], ALICE_ID), branches, tag="classes")

        return rec(0, (), "A")


class _OddFrame(_Builder):
    def layer(self, ell: int, prefix: str) -> Node:
        d, sp = self.d, self.split
        lo, hi = ell, d - 1 - ell
        if lo == hi:
            return Leaf.identify(self.stopper)
        length = hi - lo
        tile = TileSpec("vertical", hi, lo + 1, length)
        ch = sp.class_of(hi)
        branches = []
        for st in self.u.states:
            if st.tile == tile:
                m = self.bob_op([ch], projector(st.bob.amplitudes))
                branches.append((m, Leaf.identify(st.label)))
        branches.append((self.bob_op([ch], projector(_uniform(d, range(lo + 1, hi + 1)))), Leaf.identify(self.stopper)))
        right = sp.classes_of(range(lo, hi))
        n_right = f"{prefix}B{len(branches) + 1}"
        branches.append((self.bob_op(right, projector(_ket(d, hi))), self.erase(right, n_right)))
        idx = len(branches) + 1
        n_rest = f"{prefix}B{idx}"
        rest = _complete([m for m, _ in branches])

        p = self.alice_op([sp.class_of(lo)], projector(_ket(d, lo)))
        left = sp.classes_of(range(lo + 1, hi + 1))
        q = self.bob_op(left, projector(_ket(d, lo)))
        inner = measure(
            self.layout,
            Party.BOB,
            self.bob,
            [
                (f"{n_rest}21", q, self.erase(left, f"{n_rest}21")),
                (f"{n_rest}22", _complete([q]), self.layer(ell + 1, f"{n_rest}22.")),
            ],
            tag=f"layer{ell + 1}",
        )
        split_a = measure(
            self.layout,
            Party.ALICE,
            self.alice,
            [
                (f"{prefix}A{idx}1", p, Leaf.local_finish(Party.BOB)),
                (f"{prefix}A{idx}2", _complete([p]), inner),
            ],
            tag=f"layer{ell + 1}",
        )
        named = [(f"{prefix}B{i + 1}", m, c) for i, (m, c) in enumerate(branches)]
        named.append((n_rest, rest, split_a))
        return measure(self.layout, Party.BOB, self.bob, named, tag=f"layer{ell + 1}")

    def build(self) -> Node:
        return self.class_measurement(self.layer(0, ""))


class _GenTiles(_Builder):
    def build(self) -> Node:
        d, sp, u = self.d, self.split, self.u
        n = d // 2
        by_tile: dict[TileSpec, list] = {}
        for st in u.states[:-1]:
            by_tile.setdefault(st.tile, []).append(st)

        def v_states(row: int):
            return by_tile[TileSpec("vertical", row, (row + 1) % d, n)]

        def cols_of_v(row: int):
            return [(row + 1 + j) % d for j in range(n)]

        # round 1: singleton rows and the horizontal tiles not cut by a class pair
        branches = []
        for s in list(range(2, n)) + list(range(n + 2, d)):
            c = sp.class_of(s)
            for st in v_states(s):
                branches.append((self.bob_op([c], projector(st.bob.amplitudes)), Leaf.identify(st.label)))
            branches.append((self.bob_op([c], projector(_uniform(d, cols_of_v(s)))), Leaf.identify(self.stopper)))
        for k in range(d):
            if k in (1, n + 1):
                continue
            cl = sp.classes_of(range(k, k + n))
            name = f"B{len(branches) + 1}"
            branches.append((self.bob_op(cl, projector(_ket(d, k))), self.erase(cl, name)))
        n_rest = f"B{len(branches) + 1}"
        rest = _complete([m for m, _ in branches])

        def half(rows_name: str, pair_first: int, pair_second: int, h_col: int) -> Node:
            # pair_first shares its class with a row outside this half; so does pair_second
            c1, c2 = sp.class_of(pair_first), sp.class_of(pair_second)
            br = []
            for st in v_states(pair_first):
                br.append((self.bob_op([c1], projector(st.bob.amplitudes)), Leaf.identify(st.label)))
            br.append((self.bob_op([c1], projector(_uniform(d, cols_of_v(pair_first)))), Leaf.identify(self.stopper)))
            for st in v_states(pair_second):
                br.append((self.bob_op([c2], projector(st.bob.amplitudes)), Leaf.identify(st.label)))
            br.append((self.bob_op([c2], projector(_uniform(d, cols_of_v(pair_second)))), Leaf.identify(self.stopper)))
            active = sp.classes_of(range(h_col, h_col + n))
            name = f"{rows_name}{len(br) + 1}"
            br.append((_complete([m for m, _ in br]), self.erase(active, name)))
            named = [(f"{rows_name}{i + 1}", m, c) for i, (m, c) in enumerate(br)]
            return measure(self.layout, Party.BOB, self.bob, named, tag="round3")

        inside = np.diag([1.0 if 1 <= i <= n else 0.0 for i in range(d)]).astype(complex)
        split_a = measure(
            self.layout,
            Party.ALICE,
            (ALICE_ID,),
            [
                (f"{n_rest}1", inside, half(f"{n_rest}1", 1, n, 1)),
                (f"{n_rest}2", np.eye(d) - inside, half(f"{n_rest}2", 0, n + 1, n + 1)),
            ],
            tag="round2",
        )
        named = [(f"B{i + 1}", m, c) for i, (m, c) in enumerate(branches)]
        named.append((n_rest, rest, split_a))
        base = measure(self.layout, Party.BOB, self.bob, named, tag="round1")
        return self.class_measurement(base)


def _odd(u: UPBSet, encoding: Encoding) -> tuple[Node, Resource]:
    b = _OddFrame(u, ClassSplit.odd(u.d, encoding))
    return b.build(), b.resource


def protocol_theorem1() -> tuple[Node, Resource]:
    """5x5 UPB with one 3x3 maximally entangled pair."""
    return _odd(build_paper_5x5(), "letter")


def protocol_theorem2() -> tuple[Node, Resource]:
    """5x5 UPB with two 2x2 maximally entangled pairs."""
    return _odd(build_paper_5x5(), "thermometer")


def protocol_theorem3(d: int) -> tuple[Node, Resource]:
    """Odd frame UPB with one (d+1)/2-dimensional maximally entangled pair."""
    return _odd(build_odd_family(d), "letter")


def protocol_theorem4(d: int) -> tuple[Node, Resource]:
    """Odd frame UPB with (d-1)/2 qubit pairs."""
    return _odd(build_odd_family(d), "thermometer")


def protocol_theorem5(d: int) -> tuple[Node, Resource]:
    """GenTiles UPB in d = 2n with n-1 qubit pairs."""
    b = _GenTiles(build_gentiles(d), ClassSplit.even(d))
    return b.build(), b.resource


def build_protocol(theorem: int, d: int | None = None) -> tuple[Node, Resource, UPBSet]:
    """Tree, resource and target family for a theorem number."""
    if theorem == 1:
        return (*protocol_theorem1(), build_paper_5x5())
    if theorem == 2:
        return (*protocol_theorem2(), build_paper_5x5())
    if theorem in (3, 4):
        if d is None:
            raise ValueError(f"theorem {theorem} needs d")
        p, r = protocol_theorem3(d) if theorem == 3 else protocol_theorem4(d)
        return p, r, build_odd_family(d)
    if theorem == 5:
        if d is None:
            raise ValueError("theorem 5 needs d")
        return (*protocol_theorem5(d), build_gentiles(d))
    raise ValueError(f"unknown theorem {theorem}")


def frame_layers(p: Node) -> int:
    """Number of distinct frame layers along the deepest path."""
    from .locc import walk

    tags = {n.tag for _, n in walk(p) if not isinstance(n, Leaf) and n.tag.startswith("layer")}
    return max((int(t[5:]) for t in tags), default=0)


__all__ = [
    "ClassSplit",
    "build_protocol",
    "frame_layers",
    "protocol_theorem1",
    "protocol_theorem2",
    "protocol_theorem3",
    "protocol_theorem4",
    "protocol_theorem5",
]
