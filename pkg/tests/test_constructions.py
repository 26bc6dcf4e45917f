from __future__ import annotations

import itertools

import numpy as np
import pytest

from cohomolocal import cohomology as co
from cohomolocal import constructions as cons
from cohomolocal import modules as md
from cohomolocal import zq
from cohomolocal.groups import CapExceeded, closure, trivial_group
from cohomolocal.zq import Modulus

J = [[1, 1], [0, 1]]


def _gl_order_by_counting(n, q):
    """|GL_n(Z/q)| by counting invertible matrices directly (small cases only)."""
    mod = Modulus.from_q(q)
    return sum(
        1 for v in itertools.product(range(q), repeat=n * n)
        if mod.is_unit(zq.det_mod(np.array(v).reshape(n, n), mod))
    )


@pytest.mark.parametrize("n,q", [(1, 9), (2, 2), (2, 3), (2, 4), (2, 5), (3, 2)])
def test_gl_order_formula_matches_counting(n, q):
    assert cons.gl_order(n, Modulus.from_q(q)) == _gl_order_by_counting(n, q)


@pytest.mark.parametrize("kind,n,p,order", [
    ("Sp", 2, 3, 24), ("Sp", 4, 3, 51840),
    ("SOplus", 4, 3, 576), ("SOminus", 4, 3, 720),
    ("SOplus", 2, 3, 2), ("SOminus", 2, 3, 4),
])
def test_classical_group_orders(kind, n, p, order):
    G = cons.classical_group(kind, n, p)
    assert G.order == order == cons.classical_order(kind, n, p)
    F = cons.classical_form(kind, n, p)
    assert cons.preserves_form(G.elements, F, p).all()
    assert (cons.element_determinants(G) == 1).all()


def test_symplectic_group_preserves_form_elementwise():
    G = cons.classical_group("Sp", 4, 3)
    F = cons.symplectic_form(4)
    X = G.elements
    assert not (((np.transpose(X, (0, 2, 1)) @ F @ X) - F) % 3).any()


def test_so4_plus_is_central_product_of_sl2s():
    # SO^+_4(q) and SL_2(q) x SL_2(q) have the same order for odd q
    S = cons.special_linear(2, Modulus(3, 1))
    assert cons.classical_group("SOplus", 4, 3).order == S.order ** 2


def test_classical_group_rejects_bad_parameters():
    with pytest.raises(ValueError):
        cons.classical_group("Sp", 3, 3)
    with pytest.raises(ValueError):
        cons.classical_group("Sp", 4, 2)
    with pytest.raises(CapExceeded):
        cons.classical_group("Sp", 4, 5)


def _count_irreducible(p, r):
    """Number of monic irreducibles of degree r over GF(p), by Moebius inversion."""
    def mu(n):
        out, d = 1, 2
        while d * d <= n:
            if n % d == 0:
                n //= d
                if n % d == 0:
                    return 0
                out = -out
            d += 1
        return -out if n > 1 else out
    return sum(mu(r // d) * p ** d for d in range(1, r + 1) if r % d == 0) // r


@pytest.mark.parametrize("p,r", [(2, 2), (2, 3), (3, 2), (5, 2), (2, 4)])
def test_irreducibility_count(p, r):
    polys = [list(c) + [1] for c in itertools.product(range(p), repeat=r)]
    assert sum(cons.is_irreducible(f, p) for f in polys) == _count_irreducible(p, r)


def test_finite_field_arithmetic():
    F = cons.FiniteField(3, 2)
    assert F.order == 9
    g = F.primitive_element()
    assert F.multiplicative_order(g) == 8
    # the regular representation is multiplicative
    for a, b in itertools.product(list(F.elements())[1:], repeat=2):
        assert np.array_equal(F.matrix(F.mul(a, b)), F.matrix(a) @ F.matrix(b) % 3)
    phi = F.frobenius()
    for a in F.elements():
        a3 = F.mul(a, F.mul(a, a))
        assert np.array_equal(phi @ a % 3, a3)
    u = F.norm_one_element()
    assert F.multiplicative_order(u) == 4
    with pytest.raises(cons.ReduciblePolynomial):
        cons.FiniteField(3, 2, poly=[2, 0, 1])
    with pytest.raises(ValueError):
        cons.FiniteField(4, 2)
    with pytest.raises(ZeroDivisionError):
        F.multiplicative_order([0, 0])


def test_field_extension_embeddings():
    F = cons.FiniteField(3, 2)
    z = F.primitive_element()
    assert cons.field_ext_embed(1, 2, 3, [[[z.tolist()]]]).order == 8
    G = cons.field_ext_embed(2, 2, 3, cons.extension_sl_generators(F, 2))
    assert G.order == 720
    assert G.dim == 4


def test_block_tensor_and_wreath_examples():
    m3 = Modulus(3, 1)
    C = closure([J], m3)
    W = cons.wreath(C, 2)
    assert W.order == 18 and W.dim == 4
    m5 = Modulus(5, 1)
    N = closure([[[4, 0], [0, 4]]], m5)
    assert cons.tensor_product(N, N).order == 2
    B = cons.block_diag([cons.special_linear(2, m3), C])
    assert B.order == 24 * 3
    v = md.structure(B)
    assert v.kind == md.DECOMPOSABLE
    assert md.check_decomposition(B, v.witnesses["U"], v.witnesses["W"])
    with pytest.raises(CapExceeded):
        cons.block_diag([cons.general_linear(2, m5)] * 2, element_cap=10000)
    with pytest.raises(ValueError):
        cons.wreath(C, 1)


def test_mixed_moduli_are_rejected():
    with pytest.raises(cons.ModulusMismatch):
        cons.block_diag([trivial_group(Modulus(3, 1), 1), trivial_group(Modulus(5, 1), 1)])
    with pytest.raises(cons.ModulusMismatch):
        cons.tensor_product(trivial_group(Modulus(3, 1), 1), trivial_group(Modulus(3, 2), 1))


def test_special_subgroup_and_determinants():
    G = cons.general_linear(2, Modulus(2, 2))
    d = cons.element_determinants(G)
    for i in range(G.order):
        assert d[i] == zq.det_mod(G.elements[i], G.modulus)
    assert cons.special(G).order == cons.sl_order(2, G.modulus)


def test_few_generators_preserves_group():
    G = cons.general_linear(2, Modulus(3, 1))
    H = cons.few_generators(G)
    assert H.order == G.order and H.ngens <= 2


def test_catalog_dimension_two():
    for p, l in [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2)]:
        for e in cons.catalog(2, p, l):
            assert e.status == cons.BUILT
            assert e.order_matches(), e.name


def test_catalog_dimension_four_prime_three():
    entries = {e.name: e for e in cons.catalog(4, 3)}
    expected = {"GL3_point_plane": 11232, "four_lines": 192, "two_planes": 2304,
                "extension_field": 5760, "tensor_SL2_SL2": 288, "SO4plus": 576,
                "SO4minus": 720, "Sp4": 51840}
    for name, order in expected.items():
        e = entries[name]
        assert e.status == cons.BUILT and e.group.order == order, name
        assert (cons.element_determinants(e.group) == 1).all(), name
    assert entries["extraspecial_S6"].status == cons.METADATA_ONLY
    js = cons.catalog_json(list(entries.values()))
    assert {j["class"] for j in js} >= {"C1", "C2", "C3", "C4", "C6", "C8", "C9"}


@pytest.mark.slow
def test_catalog_dimension_four_prime_five():
    entries = {e.name: e for e in cons.catalog(4, 5)}
    assert entries["four_lines"].group.order == 1536
    assert entries["Sp4"].status == cons.EXCEEDS_CAP
    assert entries["Sp4"].expected_order == 9360000
    for e in entries.values():
        if e.status == cons.BUILT:
            assert e.order_matches(), e.name


def test_catalog_groups_have_trivial_local_cohomology():
    for e in cons.catalog(4, 3):
        if e.status == cons.BUILT and e.group.order <= 12000:
            assert co.h1loc(e.group).is_trivial(), e.name


def test_catalog_rejects_bad_arguments():
    with pytest.raises(ValueError):
        cons.catalog(3, 3)
    with pytest.raises(ValueError):
        cons.catalog(2, 4)


def test_diagonal_torus_of_sl4():
    m5 = Modulus(5, 1)
    torus = cons.block_diag([cons.general_linear(1, m5)] * 4)
    assert torus.order == 256
    assert cons.special(torus).order == 64


def test_trivial_embeddings():
    assert cons.field_ext_embed(1, 2, 5, [[[1, 0]]]).order == 1
    W = cons.wreath(trivial_group(Modulus(3, 1), 1), 2)
    assert W.order == 2
    T = cons.tensor_product(trivial_group(Modulus(3, 1), 2), trivial_group(Modulus(3, 1), 2))
    assert T.order == 1 and T.dim == 4


def test_tensor_of_unipotents():
    m3 = Modulus(3, 1)
    C = closure([J], m3)
    T = cons.tensor_product(C, C)
    assert T.order == 9
    # the two definitions must agree on the Kronecker image
    assert co.h1loc(T).invariants == co.h1loc_cyclic_oracle(T).invariants


def test_field_embedding_is_a_homomorphism():
    F = cons.FiniteField(5, 2)
    rng = np.random.default_rng(0)
    els = [e for e in F.elements() if e.any()]
    for _ in range(30):
        a, b = (els[int(i)] for i in rng.integers(len(els), size=2))
        A = cons.field_ext_embed(1, 2, 5, [[[a.tolist()]]])
        assert A.order == F.multiplicative_order(a)
        assert np.array_equal(F.matrix(F.mul(a, b)), F.matrix(a) @ F.matrix(b) % 5)


def test_wreath_witnesses_are_not_the_blocks():
    m3 = Modulus(3, 1)
    W = cons.wreath(cons.special_linear(2, m3), 2)
    v = md.structure(W)
    if v.kind == md.DECOMPOSABLE:
        blocks = {zq.howell(np.eye(4, dtype=np.int64)[:2], m3), zq.howell(np.eye(4, dtype=np.int64)[2:], m3)}
        got = {zq.howell(v.witnesses["U"], m3), zq.howell(v.witnesses["W"], m3)}
        assert got != blocks
