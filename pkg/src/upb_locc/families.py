"""UPB families on a d x d grid: the 5x5 set, the nested-frame odd family,
the even GenTiles family, plus complement projectors and ASCII tile diagrams.

Rows of the grid are Alice's computational basis, columns are Bob's. Every
non-stopper state lives on one tile: a run of cells in a fixed row
("vertical", Alice index fixed) or a fixed column ("horizontal", Bob index
fixed). Coefficients are kept unnormalized, exactly as constructed.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .qla import (
    TOL,
    LocalOperator,
    Party,
    StateVector,
    SystemLayout,
    kron,
)

Orientation = Literal["vertical", "horizontal", "stopper"]
Family = Literal["paper5x5", "odd", "gentiles"]

ALICE_ID = "A"
BOB_ID = "B"


@dataclass(frozen=True)
class TileSpec:
    orientation: Orientation
    fixed_index: int | None
    start: int
    length: int

    def span(self, d: int) -> list[int]:
        return [(self.start + j) % d for j in range(self.length)]

    def cells(self, d: int) -> list[tuple[int, int]]:
        if self.orientation == "stopper":
            return [(i, j) for i in range(d) for j in range(d)]
        if self.orientation == "vertical":
            return [(self.fixed_index, j) for j in self.span(d)]
        return [(i, self.fixed_index) for i in self.span(d)]

    def validate(self, d: int) -> None:
        if self.orientation == "stopper":
            return
        if not (0 <= self.fixed_index < d and 0 <= self.start < d and 1 <= self.length <= d):
            raise ValueError(f"tile {self} does not fit a {d}x{d} grid")


@dataclass(frozen=True, eq=False)
class ProductState:
    label: str
    alice: StateVector
    bob: StateVector
    tile: TileSpec

    def __post_init__(self):
        if self.alice.norm2 == 0 or self.bob.norm2 == 0:
            raise ValueError(f"{self.label}: product factors must be nonzero")

    def vector(self, normalized: bool = True) -> StateVector:
        v = kron(self.alice, self.bob)
        return v.normalized() if normalized else v

    def matrix(self) -> np.ndarray:
        """Unnormalized coefficient matrix M[i, j] on the grid."""
        return np.outer(self.alice.amplitudes, self.bob.amplitudes)


@dataclass(frozen=True, eq=False)
class UPBSet:
    d: int
    family: Family
    states: tuple[ProductState, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        labels = [s.label for s in self.states]
        if len(set(labels)) != len(labels):
            raise ValueError("state labels must be unique")
        for s in self.states:
            if s.alice.layout.total_dim != self.d or s.bob.layout.total_dim != self.d:
                raise ValueError(f"state {s.label!r} does not live in {self.d}x{self.d}")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.states]

    @property
    def layout(self) -> SystemLayout:
        return grid_layout(self.d)

    def state(self, label: str) -> ProductState:
        for s in self.states:
            if s.label == label:
                return s
        raise KeyError(label)

    def vectors(self) -> list[StateVector]:
        return [s.vector() for s in self.states]

    def without(self, *labels: str) -> "UPBSet":
        return UPBSet(self.d, self.family, tuple(s for s in self.states if s.label not in labels))

    def replace(self, label: str, new: ProductState) -> "UPBSet":
        """Put ``new`` in the slot of ``label``, keeping that label."""
        self.state(label)
        new = dataclasses.replace(new, label=label)
        return UPBSet(self.d, self.family, tuple(new if s.label == label else s for s in self.states))


def grid_layout(d: int) -> SystemLayout:
    return SystemLayout.of((ALICE_ID, d, Party.ALICE), (BOB_ID, d, Party.BOB))


def _ket(d: int, coeffs: dict[int, complex], sid: str, owner: Party) -> StateVector:
    v = np.zeros(d, dtype=complex)
    for j, c in coeffs.items():
        v[j % d] += c
    return StateVector.single(sid, v, owner)


def _alice(d, coeffs):
    return _ket(d, coeffs, ALICE_ID, Party.ALICE)


def _bob(d, coeffs):
    return _ket(d, coeffs, BOB_ID, Party.BOB)


def _root(n: int, p: int) -> complex:
    if p % n == 0:
        return 1.0 + 0j
    return complex(np.exp(2j * np.pi * (p % n) / n))


def _signs(start: int, pattern: str) -> dict[int, complex]:
    """'+-+-' style sign pattern on consecutive indices from ``start``."""
    return {start + j: (1.0 if c == "+" else -1.0) for j, c in enumerate(pattern)}


def stopper(d: int, label: str = "F") -> ProductState:
    ones = {j: 1.0 for j in range(d)}
    return ProductState(label, _alice(d, ones), _bob(d, ones), TileSpec("stopper", None, 0, d))


def build_paper_5x5() -> UPBSet:
    d = 5
    rows: list[tuple[str, dict, dict, TileSpec]] = []
    walsh = ["+-+-", "++--", "+--+"]
    # top, right, bottom, left frame tiles; then the inner 3x3 pinwheel
    for k, p in enumerate(walsh):
        rows.append((f"phi{1 + k}", {0: 1.0}, _signs(0, p), TileSpec("vertical", 0, 0, 4)))
    for k, p in enumerate(walsh):
        rows.append((f"phi{4 + k}", _signs(0, p), {4: 1.0}, TileSpec("horizontal", 4, 0, 4)))
    for k, p in enumerate(walsh):
        rows.append((f"phi{7 + k}", {4: 1.0}, _signs(1, p), TileSpec("vertical", 4, 1, 4)))
    for k, p in enumerate(walsh):
        rows.append((f"phi{10 + k}", _signs(1, p), {0: 1.0}, TileSpec("horizontal", 0, 1, 4)))
    rows.append(("phi13", {1: 1.0}, _signs(1, "+-"), TileSpec("vertical", 1, 1, 2)))
    rows.append(("phi14", _signs(1, "+-"), {3: 1.0}, TileSpec("horizontal", 3, 1, 2)))
    rows.append(("phi15", {3: 1.0}, _signs(2, "+-"), TileSpec("vertical", 3, 2, 2)))
    rows.append(("phi16", _signs(2, "+-"), {1: 1.0}, TileSpec("horizontal", 1, 2, 2)))
    states = [ProductState(lab, _alice(d, a), _bob(d, b), t) for lab, a, b, t in rows]
    states.append(stopper(d))
    return UPBSet(d, "paper5x5", tuple(states))


def odd_frame_tiles(d: int) -> list[list[TileSpec]]:
    """Tiles of each nested frame layer, ordered top, right, bottom, left."""
    layers = []
    for layer in range((d - 1) // 2):
        lo, hi = layer, d - 1 - layer
        length = hi - lo
        layers.append([
            TileSpec("vertical", lo, lo, length),
            TileSpec("horizontal", hi, lo, length),
            TileSpec("vertical", hi, lo + 1, length),
            TileSpec("horizontal", lo, lo + 1, length),
        ])
    return layers


def _fourier_coeffs(tile: TileSpec, d: int, k: int) -> dict[int, complex]:
    n = tile.length
    return {j: _root(n, (j - tile.start) * k) for j in tile.span(d)}


def _tile_state(label: str, tile: TileSpec, d: int, k: int) -> ProductState:
    coeffs = _fourier_coeffs(tile, d, k)
    fixed = {tile.fixed_index: 1.0}
    if tile.orientation == "vertical":
        return ProductState(label, _alice(d, fixed), _bob(d, coeffs), tile)
    return ProductState(label, _alice(d, coeffs), _bob(d, fixed), tile)


def build_odd_family(d: int) -> UPBSet:
    """Nested-frame UPB for odd d >= 3; (d-1)^2 tile states plus the stopper."""
    if d < 3 or d % 2 == 0:
        raise ValueError(f"odd family needs odd d >= 3, got {d}")
    states = []
    idx = 1
    for layer in odd_frame_tiles(d):
        for tile in layer:
            for k in range(1, tile.length):
                states.append(_tile_state(f"phi{idx}", tile, d, k))
                idx += 1
    states.append(stopper(d))
    return UPBSet(d, "odd", tuple(states))


def build_gentiles(d: int) -> UPBSet:
    """Wrap-around GenTiles UPB for even d >= 4 with omega = exp(2 pi i / (d/2))."""
    if d < 4 or d % 2:
        raise ValueError(f"GenTiles needs even d >= 4, got {d}")
    n = d // 2
    states = []
    for m in range(1, n):
        for k in range(d):
            tile = TileSpec("vertical", k, (k + 1) % d, n)
            states.append(_tile_state(f"V{m}_{k}", tile, d, m))
    for m in range(1, n):
        for k in range(d):
            tile = TileSpec("horizontal", k, k, n)
            states.append(_tile_state(f"H{m}_{k}", tile, d, m))
    states.append(stopper(d))
    return UPBSet(d, "gentiles", tuple(states))


def build_family(family: str, d: int | None = None) -> UPBSet:
    if family == "paper5x5":
        if d not in (None, 5):
            raise ValueError("paper5x5 is defined for d = 5 only")
        return build_paper_5x5()
    if d is None:
        raise ValueError(f"family {family!r} needs d")
    if family == "odd":
        return build_odd_family(d)
    if family == "gentiles":
        return build_gentiles(d)
    raise ValueError(f"unknown family {family!r}")


def expected_size(family: str, d: int) -> int:
    if family == "paper5x5":
        return 17
    if family == "odd":
        return (d - 1) ** 2 + 1
    return d * d - 2 * d + 1


def gram(u: UPBSet) -> np.ndarray:
    vs = np.array([s.vector().amplitudes for s in u.states])
    return vs.conj() @ vs.T


def span_projector(u: UPBSet) -> np.ndarray:
    vs = np.array([s.vector().amplitudes for s in u.states]).T
    q, r = np.linalg.qr(vs)
    keep = np.abs(np.diag(r)) > TOL
    q = q[:, keep]
    return q @ q.conj().T


def complement_projector(u: UPBSet, tol: float = TOL) -> tuple[LocalOperator, int]:
    """I - sum |psi><psi| over normalized members, and its rank."""
    g = gram(u)
    off = np.abs(g - np.diag(np.diag(g)))
    if off.size and off.max() >= tol:
        i, j = np.unravel_index(np.argmax(off), off.shape)
        raise ValueError(
            f"members {u.states[i].label} and {u.states[j].label} are not orthogonal"
        )
    dim = u.d * u.d
    p = np.eye(dim, dtype=complex)
    for s in u.states:
        v = s.vector().amplitudes
        p -= np.outer(v, v.conj())
    rank = int(round(np.trace(p).real))
    return LocalOperator((ALICE_ID, BOB_ID), (u.d, u.d), p), rank


# -- tile diagrams -------------------------------------------------------------

_BOX = {
    # (up, down, left, right) -> glyph
    (0, 0, 0, 0): " ", (1, 1, 0, 0): "│", (0, 0, 1, 1): "─",
    (0, 1, 0, 1): "┌", (0, 1, 1, 0): "┐", (1, 0, 0, 1): "└", (1, 0, 1, 0): "┘",
    (1, 1, 0, 1): "├", (1, 1, 1, 0): "┤", (0, 1, 1, 1): "┬", (1, 0, 1, 1): "┴",
    (1, 1, 1, 1): "┼", (1, 0, 0, 0): "╵", (0, 1, 0, 0): "╷", (0, 0, 1, 0): "╴",
    (0, 0, 0, 1): "╶",
}


def tile_groups(u: UPBSet) -> list[tuple[TileSpec, list[str]]]:
    groups: dict[TileSpec, list[str]] = {}
    for s in u.states:
        if s.tile.orientation != "stopper":
            groups.setdefault(s.tile, []).append(s.label)
    return list(groups.items())


def render_tiles(u: UPBSet, plain: bool = False) -> str:
    """Grid diagram: rows are Alice's basis, columns Bob's; the stopper is omitted."""
    d = u.d
    owner = -np.ones((d, d), dtype=int)
    groups = tile_groups(u)
    for t, (tile, _) in enumerate(groups):
        for i, j in tile.cells(d):
            owner[i, j] = t
    w = max(3, len(str(len(groups))) + 2)

    def cell(i, j):
        if not (0 <= i < d and 0 <= j < d):
            return -2
        return owner[i, j]

    def hwall(i, j):  # wall above cell (i, j)
        return cell(i - 1, j) != cell(i, j)

    def vwall(i, j):  # wall left of cell (i, j)
        return cell(i, j - 1) != cell(i, j)

    def junction(i, j):
        key = (
            int(vwall(i - 1, j)) if i > 0 else 0,
            int(vwall(i, j)) if i < d else 0,
            int(hwall(i, j - 1)) if j > 0 else 0,
            int(hwall(i, j)) if j < d else 0,
        )
        if plain:
            return "+" if any(key) else " "
        return _BOX[key]

    hchar = "-" if plain else "─"
    vchar = "|" if plain else "│"
    out = ["   " + " " * (w // 2 + 1) + "".join(str(j).center(w + 1) for j in range(d)).rstrip()]
    for i in range(d + 1):
        line = "    "
        for j in range(d + 1):
            line += junction(i, j)
            if j < d:
                line += (hchar * w) if hwall(i, j) else " " * w
        out.append(line.rstrip())
        if i == d:
            break
        line = f"{i:>3} "
        for j in range(d + 1):
            line += vchar if vwall(i, j) else " "
            if j < d:
                t = owner[i, j]
                line += (str(t + 1) if t >= 0 else ".").center(w)
        out.append(line.rstrip())
    out.append("")
    for t, (tile, labels) in enumerate(groups):
        kind = "row" if tile.orientation == "vertical" else "col"
        span = tile.span(d)
        out.append(f"{t + 1:>3}: {kind} {tile.fixed_index}, span {span[0]}..{span[-1]} -> {', '.join(labels)}")
    out.append(f"  (stopper {u.states[-1].label} covers the whole grid; '.' = stopper only)")
    return "\n".join(out)
