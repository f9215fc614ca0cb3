import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from upb_locc.qla import (
    LayoutError,
    LocalOperator,
    Party,
    StateVector,
    SystemLayout,
    apply_local,
    fourier_amplitudes,
    inner,
    kron,
    min_eigenvalue,
    partial_transpose,
    reduced_density,
    schmidt_rank,
    support_projector,
)


def two_qutrits():
    return SystemLayout.of(("A", 3, "Alice"), ("B", 3, "Bob"))


def mes(k, ida="a", idb="b"):
    lay = SystemLayout.of((ida, k, "Alice"), (idb, k, "Bob"))
    v = np.zeros(k * k, dtype=complex)
    v[np.arange(k) * (k + 1)] = 1 / math.sqrt(k)
    return StateVector(lay, v)


def test_layout_rejects_duplicate_ids():
    with pytest.raises(LayoutError):
        SystemLayout.of(("A", 2, "Alice"), ("A", 2, "Bob"))


def test_layout_rejects_dim_below_two():
    with pytest.raises(LayoutError):
        SystemLayout.of(("A", 1, "Alice"))


def test_concat_collision():
    lay = two_qutrits()
    with pytest.raises(LayoutError):
        lay.concat(SystemLayout.of(("B", 2, "Bob")))


def test_owned_by_preserves_order():
    lay = SystemLayout.of(("A", 2, "Alice"), ("B", 2, "Bob"), ("a", 3, "Alice"), ("b", 3, "Bob"))
    assert lay.owned_by(Party.ALICE) == ("A", "a")
    assert lay.owned_by("bob") == ("B", "b")


def test_basis_state_index_is_row_major():
    lay = two_qutrits()
    s = StateVector.basis(lay, (1, 2))
    assert np.argmax(np.abs(s.amplitudes)) == 1 * 3 + 2


def test_wrong_amplitude_count():
    with pytest.raises(LayoutError):
        StateVector(two_qutrits(), np.ones(8))


def test_kron_matches_numpy():
    u = StateVector.single("A", [1, 2, 3], "Alice")
    v = StateVector.single("B", [1j, -1, 0], "Bob")
    w = kron(u, v)
    assert w.layout.ids == ("A", "B")
    assert np.allclose(w.amplitudes, np.kron([1, 2, 3], [1j, -1, 0]))


def test_schmidt_rank_of_mes():
    for k in (2, 3, 5):
        assert schmidt_rank(mes(k), ["a"]) == k


def test_schmidt_rank_product_is_one():
    s = kron(StateVector.single("A", [1, 1, 0], "Alice"), StateVector.single("B", [0, 1, -1], "Bob"))
    assert schmidt_rank(s, ["A"]) == 1


def test_schmidt_rank_two_copies_of_qubit_mes():
    s = kron(mes(2, "a1", "b1"), mes(2, "a2", "b2"))
    assert schmidt_rank(s, (["a1", "a2"], ["b1", "b2"])) == 4


def test_bad_cut_detected():
    with pytest.raises(LayoutError):
        schmidt_rank(mes(2), (["a"], ["a", "b"]))


def test_reduced_density_of_mes_is_maximally_mixed():
    rho = reduced_density(mes(3), ["a"])
    assert np.allclose(rho, np.eye(3) / 3)


def test_partial_transpose_of_bell_state():
    # PT of |Phi+><Phi+| is SWAP / 2, eigenvalues -1/2 (once) and +1/2
    s = mes(2)
    rho = LocalOperator(("a", "b"), (2, 2), np.outer(s.amplitudes, s.amplitudes.conj()))
    pt = partial_transpose(rho, ["b"])
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(pt.matrix, swap / 2)
    assert min_eigenvalue(pt) == pytest.approx(-0.5, abs=1e-12)


def test_min_eigenvalue_refuses_non_hermitian():
    with pytest.raises(ValueError):
        min_eigenvalue(np.array([[0, 1], [0, 0]]))


def test_inner_requires_same_layout():
    with pytest.raises(LayoutError):
        inner(StateVector.single("A", [1, 0]), StateVector.single("B", [1, 0]))


def test_apply_local_on_second_factor():
    lay = SystemLayout.of(("A", 2, "Alice"), ("B", 3, "Bob"))
    s = StateVector.basis(lay, (1, 0))
    x = np.roll(np.eye(3), 1, axis=0)
    op = LocalOperator.on(lay, ["B"], x)
    out = apply_local(op, s)
    assert np.allclose(out.amplitudes, StateVector.basis(lay, (1, 1)).amplitudes)


def test_operator_shape_checked():
    with pytest.raises(LayoutError):
        LocalOperator(("A",), (3,), np.eye(2))


def test_fourier_amplitudes():
    f = fourier_amplitudes(4, 1)
    assert np.allclose(f * 2, [1, 1j, -1, -1j])
    with pytest.raises(ValueError):
        fourier_amplitudes(4, 4)


def test_support_projector_of_product_states():
    lay = SystemLayout.of(("A", 3, "Alice"), ("B", 3, "Bob"))
    s1 = StateVector.basis(lay, (0, 0))
    s2 = StateVector.basis(lay, (1, 2))
    p = support_projector([s1, s2], Party.ALICE)
    assert np.allclose(p.matrix, np.diag([1, 1, 0]))
    assert p.is_projector()


unit_complex = st.tuples(st.floats(-1, 1), st.floats(-1, 1)).map(lambda t: complex(*t))


@settings(max_examples=40, deadline=None)
@given(st.lists(unit_complex, min_size=3, max_size=3), st.lists(unit_complex, min_size=3, max_size=3))
def test_product_states_have_schmidt_rank_one(a, b):
    if np.linalg.norm(a) < 1e-3 or np.linalg.norm(b) < 1e-3:
        return
    s = kron(StateVector.single("A", a, "Alice"), StateVector.single("B", b, "Bob"))
    assert schmidt_rank(s, ["A"]) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_partial_transpose_is_an_involution(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = LocalOperator(("A", "B"), (2, 3), m @ m.conj().T)
    twice = partial_transpose(partial_transpose(rho, ["A"]), ["A"])
    assert np.allclose(twice.matrix, rho.matrix)
    # full transpose splits as PT_A then PT_B
    full = partial_transpose(partial_transpose(rho, ["A"]), ["B"])
    assert np.allclose(full.matrix, rho.matrix.T)
