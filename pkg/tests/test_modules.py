from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cohomolocal import constructions as cons
from cohomolocal import modules as md
from cohomolocal import zq
from cohomolocal.groups import CapExceeded, closure, trivial_group
from cohomolocal.zq import Modulus
from oracles import brute_structure

J = [[1, 1], [0, 1]]


def _random_small_group(seed):
    """A seeded group with |M| <= 81, redrawn until its order is at most 2000."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    q = int(rng.choice([2, 3, 4, 5]))
    if q ** n > 81:
        n = 2
    mod = Modulus.from_q(q)
    while True:
        gens = []
        for _ in range(int(rng.integers(1, 3))):
            while True:
                g = rng.integers(0, q, size=(n, n))
                if mod.is_unit(zq.det_mod(g, mod)):
                    gens.append(g)
                    break
        try:
            return closure(gens, mod, n, element_cap=2000), gens
        except CapExceeded:
            continue


def test_spin_examples():
    m3 = Modulus(3, 1)
    G = closure([J], m3)
    assert md.spin(G, [0, 0]).shape[0] == 0
    assert zq.howell(md.spin(G, [1, 0]), m3).basis.tolist() == [[1, 0]]
    S = cons.special_linear(2, m3)
    assert zq.howell(md.spin(S, [1, 0]), m3).order() == 9


def test_structure_examples():
    v = md.structure(trivial_group(Modulus(5, 1), 2))
    assert v.kind == md.DECOMPOSABLE
    assert md.check_decomposition(trivial_group(Modulus(5, 1), 2), v.witnesses["U"], v.witnesses["W"])
    assert md.structure(closure([J], Modulus(3, 1))).kind == md.REDUCIBLE_INDECOMPOSABLE
    assert md.structure(cons.special_linear(2, Modulus(5, 1))).kind == md.IRREDUCIBLE


def test_l_greater_than_one_is_never_irreducible():
    G = cons.general_linear(2, Modulus(2, 2))
    v = md.structure(G)
    assert v.kind == md.REDUCIBLE_INDECOMPOSABLE
    assert v.flags
    assert md.is_invariant(G, v.witnesses["submodule"])


def test_endomorphism_algebra_examples():
    m5 = Modulus(5, 1)
    E = md.endomorphism_algebra(cons.special_linear(2, m5))
    assert zq.howell(np.array([e.reshape(-1) for e in E]), m5).order() == 5
    E = md.endomorphism_algebra(trivial_group(m5, 2))
    assert zq.howell(np.array([e.reshape(-1) for e in E]), m5).order() == 5 ** 4
    # inequivalent irreducible blocks: a 2-dim irreducible and a trivial line
    m3 = Modulus(3, 1)
    G = cons.block_diag([cons.special_linear(2, m3), trivial_group(m3, 1)])
    E = md.endomorphism_algebra(G)
    basis = np.array([e.reshape(-1) for e in E])
    assert zq.howell(basis, m3).order() == 9
    for e in E:
        assert not e[:2, 2].any() and not e[2, :2].any()


@given(st.integers(0, 10**6))
def test_endomorphisms_commute_with_every_element(seed):
    G, _ = _random_small_group(seed)
    q = G.modulus.q
    for X in md.endomorphism_algebra(G):
        assert np.array_equal((G.elements @ X) % q, (X[None] @ G.elements) % q)


@given(st.integers(0, 10**6))
def test_structure_matches_brute_force(seed):
    G, gens = _random_small_group(seed)
    q, n = G.modulus.q, G.dim
    v = md.structure(G)
    assert v.kind == brute_structure(gens, q, n)
    if v.kind == md.DECOMPOSABLE:
        U, W = v.witnesses["U"], v.witnesses["W"]
        assert md.check_decomposition(G, U, W)
        assert zq.howell(U, G.modulus).order() * zq.howell(W, G.modulus).order() == q ** n
    if v.kind == md.REDUCIBLE_INDECOMPOSABLE:
        S = v.witnesses["submodule"]
        H = zq.howell(S, G.modulus)
        assert md.is_invariant(G, S) and 1 < H.order() < q ** n


@given(st.integers(0, 10**6))
def test_structure_is_conjugation_invariant(seed):
    G, gens = _random_small_group(seed)
    mod, n = G.modulus, G.dim
    rng = np.random.default_rng(seed + 1)
    while True:
        P = rng.integers(0, mod.q, size=(n, n))
        if zq.is_invertible(P, mod):
            break
    Pi = zq.inverse(P, mod)
    H = closure([(P @ g @ Pi) % mod.q for g in gens], mod, n)
    a, b = md.structure(G), md.structure(H)
    assert a.kind == b.kind
    if a.kind == md.DECOMPOSABLE:
        # transported witnesses split the conjugated module
        U = (a.witnesses["U"] @ P.T) % mod.q
        W = (a.witnesses["W"] @ P.T) % mod.q
        assert md.check_decomposition(H, U, W)


def test_invariant_subspace_lattice_counts():
    m3 = Modulus(3, 1)
    # trivial action: every subspace of F_3^2 (0, four lines, whole)
    assert len(md.invariant_subspace_lattice(trivial_group(m3, 2))) == 6
    assert len(md.invariant_subspace_lattice(closure([J], m3))) == 3


def test_indecomposable_summands_of_diagonal_group():
    m5 = Modulus(5, 1)
    G = closure([np.diag([2, 3, 3])], m5)
    parts = md.indecomposable_summands(G)
    dims = sorted(zq.howell(p, m5).rank for p in parts)
    assert dims == [1, 1, 1]


def test_budget_exceeded_over_non_field():
    from cohomolocal.cohomology import BudgetExceeded
    G = closure([J], Modulus(3, 2))
    # End is {a + bN}, 81 elements, none of the quick candidates split
    with pytest.raises(BudgetExceeded):
        md.find_decomposition(G, budget=10)
    assert md.find_decomposition(G) is None
