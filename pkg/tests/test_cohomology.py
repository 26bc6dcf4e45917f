from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohomolocal import cohomology as co
from cohomolocal import constructions as cons
from cohomolocal import zq
from cohomolocal.campaigns import sample_group, witness_group
from cohomolocal.groups import closure, contains_scalar, cyclic_subgroups, sylow, trivial_group
from cohomolocal.zq import Modulus
from oracles import brute_cohomology

J = [[1, 1], [0, 1]]


def _small(seed, max_order=8):
    """A seeded group of order <= max_order acting on a module with at most 81 elements."""
    rng = np.random.default_rng(seed)
    while True:
        q = int(rng.choice([2, 3, 4, 5, 7, 8, 9]))
        n = int(rng.integers(1, 5))
        while q ** n > 81:
            n -= 1
        G = sample_group(rng, n, Modulus.from_q(q), max_order, attempts=20)
        if G is not None:
            return G


def _gens(G):
    return [g.tolist() for g in G.generators]


def _span_order(rows, mod):
    rows = np.asarray(rows)
    if rows.size == 0:
        return 1
    return zq.howell(rows, mod).order()


def test_cocycle_and_coboundary_examples():
    m3 = Modulus(3, 1)
    G = closure([J], m3)
    assert _span_order(co.cocycle_space(G), m3) == 9
    assert _span_order(co.coboundaries(G).T, m3) == 3
    m4 = Modulus(2, 2)
    N = closure([[[3, 0], [0, 3]]], m4)
    assert _span_order(co.cocycle_space(N), m4) == 16
    assert _span_order(co.coboundaries(N).T, m4) == 4
    T = trivial_group(m3, 2)
    assert co.cocycle_space(T).size == 0


def test_h1_examples():
    m3 = Modulus(3, 1)
    assert co.h1(closure([J], m3)).invariants == [3]
    assert co.h1(closure([[[3, 0], [0, 3]]], Modulus(2, 2))).invariants == [2, 2]
    assert co.h1(closure([[[4, 0], [0, 4]]], Modulus(5, 1))).is_trivial()
    assert co.h1(trivial_group(m3, 2)).is_trivial()


def test_local_cocycles_examples():
    m3 = Modulus(3, 1)
    G = closure([J], m3)
    assert _span_order(co.local_cocycles(G), m3) == 3
    assert co.h1loc(G).is_trivial()
    m4 = Modulus(2, 2)
    N = closure([[[3, 0], [0, 3]]], m4)
    Zl = co.local_cocycles(N)
    assert _span_order(Zl, m4) == 4
    assert not (Zl % 2).any()
    assert co.h1loc(trivial_group(m3, 2)).is_trivial()


def test_coboundary_checks():
    m3 = Modulus(3, 1)
    G = closure([J], m3)
    gen = co.h1(G).representatives[0]
    assert gen.is_cocycle() and gen.is_cocycle_all_pairs()
    assert co.is_coboundary(gen) is None
    # the brute-force check over all 9 candidate A agrees
    I = np.eye(2, dtype=np.int64)
    for a in range(3):
        for b in range(3):
            A = np.array([a, b])
            assert not np.array_equal(((G.elements - I) @ A) % 3, gen.values)
    assert co.restriction(gen, G.whole()).values.tolist() == gen.values.tolist()
    zero = co.Cocycle(G, np.zeros((G.order, 2)))
    assert not co.is_coboundary(zero).any()
    c = co.coboundary_of(G, [1, 2])
    A = co.is_coboundary(c)
    assert not (((G.elements - I) @ (A - np.array([1, 2]))) % 3).any()


def test_restriction_examples():
    G = cons.general_linear(2, Modulus(3, 1))
    c = co.coboundary_of(G, [1, 1])
    triv = G.subgroup([0])
    assert not co.restriction(c, triv).values.any()
    H = sylow(G, 3)
    r = co.restriction(c, H)
    assert r.values.tolist() == co.coboundary_of(H.as_group(), [1, 1]).values.tolist()


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_matches_brute_force_enumeration(seed):
    G = _small(seed)
    q, n = G.modulus.q, G.dim
    b_h1, b_loc = brute_cohomology(_gens(G), q, n)
    assert co.h1(G).invariants == b_h1
    assert co.h1loc(G).invariants == b_loc


@given(st.integers(0, 10**6))
def test_two_definitions_agree(seed):
    G = _small(seed, max_order=200)
    assert co.h1loc(G).invariants == co.h1loc_cyclic_oracle(G).invariants


@given(st.integers(0, 10**6))
def test_class_and_element_conditions_agree(seed):
    G = _small(seed, max_order=200)
    assert co.h1loc(G, conditions="elements").invariants == co.h1loc(G).invariants


@given(st.integers(0, 10**6))
def test_local_cocycles_are_sandwiched(seed):
    G = _small(seed, max_order=200)
    mod = G.modulus
    if G.ngens == 0:
        return
    fr = co.frame(G)
    Z = zq.howell(co.cocycle_space(G), mod)
    Zl = zq.howell(co.local_cocycles(G), mod)
    assert Z.contains(Zl.basis).all()
    assert Zl.contains(fr.b1().T).all()
    for rep in co.h1loc(G).representatives:
        assert rep.is_cocycle() and rep.satisfies_local_conditions()
        assert co.is_coboundary(rep) is None


@given(st.integers(0, 10**6))
def test_coboundaries_are_local(seed):
    G = _small(seed, max_order=200)
    A = np.random.default_rng(seed).integers(0, G.modulus.q, size=G.dim)
    c = co.coboundary_of(G, A)
    assert c.is_cocycle() and c.satisfies_local_conditions()
    assert co.is_coboundary(c) is not None


@given(st.integers(0, 10**6))
def test_invariants_are_conjugation_invariant(seed):
    G = _small(seed, max_order=200)
    mod, n = G.modulus, G.dim
    rng = np.random.default_rng(seed + 7)
    while True:
        P = rng.integers(0, mod.q, size=(n, n))
        if zq.is_invertible(P, mod):
            break
    Pi = zq.inverse(P, mod)
    H = closure([(P @ g @ Pi) % mod.q for g in G.generators], mod, n)
    assert co.h1(G).invariants == co.h1(H).invariants
    assert co.h1loc(G).invariants == co.h1loc(H).invariants


@given(st.integers(0, 10**6))
def test_restriction_to_sylow_is_injective(seed):
    G = _small(seed, max_order=200)
    L = co.h1loc(G)
    p = G.modulus.p
    P = sylow(G, p)
    assert co.restriction_kernel(G, L, P.indices) == []
    for rep in L.representatives:
        assert co.is_coboundary(co.restriction(rep, P)) is None
    if P.order == 1:
        assert L.is_trivial()


@given(st.integers(0, 10**6))
def test_scalar_criterion(seed):
    G = _small(seed, max_order=200)
    lam = contains_scalar(G)
    if lam is not None and G.modulus.is_unit(lam - 1):
        assert co.h1(G).is_trivial()


@given(st.integers(0, 10**6))
def test_central_elements_annihilate_cohomology(seed):
    G = _small(seed, max_order=200)
    q = G.modulus.q
    I = np.eye(G.dim, dtype=np.int64)
    for z in G.center_indices()[:4]:
        for rep in co.h1(G).representatives:
            assert co.is_coboundary(rep.apply((G.elements[z] - I) % q)) is not None


@given(st.integers(0, 10**6))
def test_cyclic_groups_have_trivial_local_cohomology(seed):
    G = _small(seed, max_order=200)
    for C in cyclic_subgroups(G)[:5]:
        assert co.h1loc(C.as_group()).is_trivial()


def test_every_subgroup_of_gl2_f3_is_trivial():
    from cohomolocal.groups import all_subgroups
    G = cons.general_linear(2, Modulus(3, 1))
    for H in all_subgroups(G):
        assert co.h1loc(H.as_group()).is_trivial()


def test_gl2_mod4_has_a_witness():
    W = witness_group()
    assert W is not None
    L = co.h1loc(W)
    assert not L.is_trivial()
    assert co.h1loc_cyclic_oracle(W).invariants == L.invariants
    b_h1, b_loc = brute_cohomology(_gens(W), 4, 2)
    assert b_loc == L.invariants
    frag = co.report_fragment(W)
    assert frag["h1loc"] == L.invariants and frag["witness_cocycle"] is not None


def test_oracle_agrees_on_trivial_group():
    T = trivial_group(Modulus(5, 1), 3)
    assert co.h1loc_cyclic_oracle(T).is_trivial()
    assert co.h1loc_cyclic_oracle(closure([J], Modulus(3, 1))).is_trivial()


def test_unknown_conditions_mode():
    with pytest.raises(ValueError):
        co.local_cocycles(closure([J], Modulus(3, 1)), conditions="bogus")
