"""Dense complex linear algebra over composite quantum systems.

A :class:`SystemLayout` fixes an ordered list of subsystems; amplitudes of a
:class:`StateVector` are stored flat in row-major order over that list, so the
first subsystem is the most significant index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-9
EIG_TOL = 1e-8

Cplx = complex


class LayoutError(ValueError):
    """Raised for id collisions, unknown ids or dimension mismatches."""


class Party(str, enum.Enum):
    ALICE = "Alice"
    BOB = "Bob"

    @classmethod
    def parse(cls, value: "Party | str") -> "Party":
        if isinstance(value, Party):
            return value
        for p in cls:
            if p.value.lower() == str(value).lower():
                return p
        raise ValueError(f"unknown party {value!r}")

    def other(self) -> "Party":
        return Party.BOB if self is Party.ALICE else Party.ALICE


def as_cplx(x) -> complex:
    z = complex(x)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite amplitude {x!r}")
    return z


@dataclass(frozen=True)
class Subsystem:
    id: str
    dim: int
    owner: Party

    def __post_init__(self):
        if int(self.dim) < 2:
            raise LayoutError(f"subsystem {self.id!r} has dim {self.dim} < 2")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "owner", Party.parse(self.owner))


@dataclass(frozen=True)
class SystemLayout:
    subsystems: tuple[Subsystem, ...]

    def __post_init__(self):
        subs = tuple(self.subsystems)
        ids = [s.id for s in subs]
        if len(set(ids)) != len(ids):
            raise LayoutError(f"duplicate subsystem ids in {ids}")
        object.__setattr__(self, "subsystems", subs)

    @classmethod
    def of(cls, *specs: tuple[str, int, Party | str]) -> "SystemLayout":
        return cls(tuple(Subsystem(i, d, o) for i, d, o in specs))

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.subsystems)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims)) if self.subsystems else 1

    def index(self, sid: str) -> int:
        try:
            return self.ids.index(sid)
        except ValueError:
            raise LayoutError(f"unknown subsystem id {sid!r}") from None

    def sub(self, sid: str) -> Subsystem:
        return self.subsystems[self.index(sid)]

    def dims_of(self, ids: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.sub(i).dim for i in ids)

    def owned_by(self, party: Party | str) -> tuple[str, ...]:
        party = Party.parse(party)
        return tuple(s.id for s in self.subsystems if s.owner is party)

    def concat(self, other: "SystemLayout") -> "SystemLayout":
        clash = set(self.ids) & set(other.ids)
        if clash:
            raise LayoutError(f"subsystem id collision: {sorted(clash)}")
        return SystemLayout(self.subsystems + other.subsystems)


@dataclass(frozen=True, eq=False)
class StateVector:
    layout: SystemLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.layout.total_dim:
            raise LayoutError(
                f"{amps.shape[0]} amplitudes for layout of dimension {self.layout.total_dim}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitudes")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, layout: SystemLayout, indices: Sequence[int]) -> "StateVector":
        amps = np.zeros(layout.total_dim, dtype=complex)
        amps[np.ravel_multi_index(tuple(indices), layout.dims)] = 1.0
        return cls(layout, amps)

    @classmethod
    def single(cls, sid: str, coeffs, owner: Party | str = Party.ALICE) -> "StateVector":
        coeffs = np.asarray(coeffs, dtype=complex)
        return cls(SystemLayout.of((sid, coeffs.shape[0], owner)), coeffs)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_normalized(self, tol: float = TOL) -> bool:
        return abs(self.norm2 - 1.0) < tol

    def normalized(self) -> "StateVector":
        n = math.sqrt(self.norm2)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.layout, self.amplitudes / n)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def __repr__(self) -> str:
        return f"StateVector({','.join(self.layout.ids)}; norm2={self.norm2:.6g})"


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """Square matrix acting on the listed subsystems, indices in ``acts_on`` order."""

    acts_on: tuple[str, ...]
    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        acts_on = tuple(self.acts_on)
        dims = tuple(int(d) for d in self.dims)
        if len(acts_on) != len(dims):
            raise LayoutError("acts_on and dims differ in length")
        if len(set(acts_on)) != len(acts_on):
            raise LayoutError(f"repeated ids in acts_on {acts_on}")
        m = np.array(self.matrix, dtype=complex)
        n = int(np.prod(dims)) if dims else 1
        if m.shape != (n, n):
            raise LayoutError(f"matrix shape {m.shape} does not match dims {dims}")
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite operator entries")
        m.setflags(write=False)
        object.__setattr__(self, "acts_on", acts_on)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def on(cls, layout: SystemLayout, acts_on: Sequence[str], matrix) -> "LocalOperator":
        return cls(tuple(acts_on), layout.dims_of(acts_on), matrix)

    @classmethod
    def identity(cls, layout: SystemLayout, acts_on: Sequence[str]) -> "LocalOperator":
        dims = layout.dims_of(acts_on)
        return cls(tuple(acts_on), dims, np.eye(int(np.prod(dims)), dtype=complex))

    def is_hermitian(self, tol: float = TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) < tol)

    def is_projector(self, tol: float = TOL) -> bool:
        m = self.matrix
        return self.is_hermitian(tol) and bool(np.max(np.abs(m @ m - m), initial=0.0) < tol)

    @property
    def rank(self) -> int:
        return int(np.sum(np.linalg.svd(self.matrix, compute_uv=False) > TOL))


def kron(u: StateVector, v: StateVector) -> StateVector:
    layout = u.layout.concat(v.layout)
    return StateVector(layout, np.kron(u.amplitudes, v.amplitudes))


def apply_matrix(
    matrix: np.ndarray, axes: Sequence[int], dims: Sequence[int], amps: np.ndarray
) -> np.ndarray:
    """Apply ``matrix`` on tensor ``axes`` of flat amplitudes; a leading batch axis is allowed."""
    dims = tuple(dims)
    batched = amps.ndim == 2
    batch = amps.shape[0] if batched else 1
    t = amps.reshape((batch,) + dims)
    src = [a + 1 for a in axes]
    t = np.moveaxis(t, src, list(range(1, len(axes) + 1)))
    moved_shape = t.shape
    k = int(np.prod([dims[a] for a in axes]))
    t = t.reshape(batch, k, -1)
    t = np.matmul(matrix, t)
    t = np.moveaxis(t.reshape(moved_shape), list(range(1, len(axes) + 1)), src)
    out = t.reshape(batch, -1)
    return out if batched else out[0]


def apply_local(op: LocalOperator, s: StateVector) -> StateVector:
    layout = s.layout
    axes = [layout.index(i) for i in op.acts_on]
    if layout.dims_of(op.acts_on) != op.dims:
        raise LayoutError(f"operator dims {op.dims} != layout dims for {op.acts_on}")
    return StateVector(layout, apply_matrix(op.matrix, axes, layout.dims, s.amplitudes))


def inner(u: StateVector, v: StateVector) -> complex:
    if u.layout != v.layout:
        raise LayoutError("inner product of states with different layouts")
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def _matricize(s: StateVector, left: Sequence[str]) -> np.ndarray:
    layout = s.layout
    laxes = [layout.index(i) for i in left]
    raxes = [k for k in range(len(layout.ids)) if k not in laxes]
    t = np.transpose(s.tensor(), laxes + raxes)
    rows = int(np.prod([layout.dims[k] for k in laxes])) if laxes else 1
    return t.reshape(rows, -1)


def _check_cut(layout: SystemLayout, cut) -> tuple[list[str], list[str]]:
    if len(cut) == 2 and not isinstance(cut[0], str):
        left, right = list(cut[0]), list(cut[1])
    else:
        left = list(cut)
        right = [i for i in layout.ids if i not in left]
    for i in left + right:
        layout.index(i)
    if set(left) & set(right) or set(left) | set(right) != set(layout.ids):
        raise LayoutError(f"cut {left}|{right} is not a partition of {layout.ids}")
    return left, right


def schmidt_rank(s: StateVector, cut, tol: float = TOL) -> int:
    """Number of Schmidt coefficients above ``tol``; ``cut`` is one side or a (left, right) pair."""
    left, _ = _check_cut(s.layout, cut)
    sv = np.linalg.svd(_matricize(s.normalized(), left), compute_uv=False)
    return int(np.sum(sv > tol))


def reduced_density(s: StateVector, keep: Sequence[str]) -> np.ndarray:
    """Partial trace onto ``keep`` (in the given order)."""
    m = _matricize(s, list(keep))
    return m @ m.conj().T


def partial_transpose(rho: LocalOperator, sub: Iterable[str]) -> LocalOperator:
    sub = set(sub)
    for i in sub:
        if i not in rho.acts_on:
            raise LayoutError(f"unknown subsystem id {i!r}")
    n = len(rho.dims)
    t = rho.matrix.reshape(rho.dims + rho.dims)
    perm = list(range(2 * n))
    for k, sid in enumerate(rho.acts_on):
        if sid in sub:
            perm[k], perm[n + k] = n + k, k
    tt = np.transpose(t, perm).reshape(rho.matrix.shape)
    return LocalOperator(rho.acts_on, rho.dims, tt)


def min_eigenvalue(h, tol: float = TOL) -> float:
    m = h.matrix if isinstance(h, LocalOperator) else np.asarray(h, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("min_eigenvalue needs a square matrix")
    if np.max(np.abs(m - m.conj().T), initial=0.0) >= tol:
        raise ValueError("min_eigenvalue needs a Hermitian matrix")
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])


def support_basis(rho: np.ndarray, tol: float = TOL) -> np.ndarray:
    """Orthonormal columns spanning the eigenvectors of ``rho`` with eigenvalue > tol."""
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    return v[:, w > tol]


def support_projector(
    states: Sequence[StateVector], party: Party | str, tol: float = TOL
) -> LocalOperator:
    """Projector onto the joint support of the party-side marginals of ``states``."""
    if not states:
        raise ValueError("support_projector needs at least one state")
    layout = states[0].layout
    keep = layout.owned_by(party)
    dim = int(np.prod(layout.dims_of(keep)))
    rho = np.zeros((dim, dim), dtype=complex)
    for s in states:
        if s.layout != layout:
            raise LayoutError("states do not share a layout")
        rho += reduced_density(s.normalized(), keep)
    basis = support_basis(rho, tol)
    return LocalOperator(keep, layout.dims_of(keep), basis @ basis.conj().T)


def fourier_amplitudes(n: int, k: int) -> np.ndarray:
    if not 0 <= k < n:
        raise ValueError(f"Fourier index {k} out of range for dimension {n}")
    j = np.arange(n)
    return np.exp(2j * np.pi * j * k / n) / math.sqrt(n)


def fourier_vector(dim: int, k: int, sid: str = "x", owner: Party | str = Party.ALICE) -> StateVector:
    return StateVector.single(sid, fourier_amplitudes(dim, k), owner)


def projector(v: np.ndarray) -> np.ndarray:
    """Rank-one projector onto the (not necessarily normalized) vector ``v``."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def clean(m: np.ndarray, eps: float = 1e-14) -> np.ndarray:
    """Zero out real/imaginary parts below ``eps`` (float noise from I - sum constructions)."""
    m = np.array(m, dtype=complex)
    re, im = m.real.copy(), m.imag.copy()
    re[np.abs(re) < eps] = 0.0
    im[np.abs(im) < eps] = 0.0
    return re + 1j * im
