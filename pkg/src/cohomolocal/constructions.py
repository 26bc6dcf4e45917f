"""Builders for geometric subgroups of GL_n(Z/qZ) and a small catalog."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import zq
from .groups import CapExceeded, MatrixGroup, _small_generating_set, closure, element_cap_default
from .zq import Modulus


class AschbacherClass(str, enum.Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"
    C6 = "C6"
    C7 = "C7"
    C8 = "C8"
    C9 = "C9"


class ModulusMismatch(ValueError):
    pass


class FormViolation(ValueError):
    pass


class ReduciblePolynomial(ValueError):
    pass


BUILT = "built"
EXCEEDS_CAP = "exceeds_cap"
METADATA_ONLY = "metadata_only"


@dataclass
class NamedConstruction:
    name: str
    aclass: AschbacherClass
    group: Optional[MatrixGroup]
    expected_order: Optional[int]
    provenance: str
    status: str = BUILT

    def order_matches(self) -> Optional[bool]:
        if self.group is None or self.expected_order is None:
            return None
        return self.group.order == self.expected_order

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "class": self.aclass.value,
            "group": self.group.to_spec() if self.group is not None else None,
            "expected_order": self.expected_order,
            "provenance": self.provenance,
            "status": self.status,
        }


def _cap(element_cap):
    return element_cap_default() if element_cap is None else element_cap


def _same_modulus(groups: Sequence[MatrixGroup]) -> Modulus:
    mods = {G.modulus for G in groups}
    if len(mods) != 1:
        raise ModulusMismatch(f"groups over different rings: {sorted(m.q for m in mods)}")
    return mods.pop()


def few_generators(G: MatrixGroup, seed: int = 0, tries: int = 64) -> MatrixGroup:
    """Re-generate ``G`` from as few elements as a short random search finds."""
    if G.ngens <= 2 or G.order == 1:
        return G
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        i, j = (int(x) for x in rng.integers(1, G.order, size=2))
        try:
            H = closure([G.elements[i], G.elements[j]], G.modulus, G.dim, element_cap=G.order)
        except CapExceeded:
            continue
        if H.order == G.order:
            return H
    gens = _small_generating_set(G, np.arange(G.order))
    if len(gens) >= G.ngens:
        return G
    return closure([G.elements[g] for g in gens], G.modulus, G.dim, element_cap=G.order)


def element_determinants(G: MatrixGroup) -> np.ndarray:
    """``det`` of every element, propagated along the closure tree."""
    q = G.modulus.q
    gdet = np.array([zq.det_mod(g, G.modulus) for g in G.generators], dtype=np.int64)
    det = np.ones(G.order, dtype=np.int64)
    # parents always precede children in BFS order
    for i in range(1, G.order):
        det[i] = det[G.parent[i]] * gdet[G.parent_gen[i]] % q
    return det


def special(G: MatrixGroup) -> MatrixGroup:
    """The determinant-one subgroup of ``G``."""
    idx = np.nonzero(element_determinants(G) == 1)[0]
    gens = _small_generating_set(G, idx)
    return closure([G.elements[g] for g in gens], G.modulus, G.dim, element_cap=max(idx.size, 1))


def unit_generators(mod: Modulus) -> list:
    """A small generating set of the unit group of Z/qZ."""
    q = mod.q
    units = [a for a in range(1, q) if mod.is_unit(a)]
    gens: list = []
    span = {1}
    for a in sorted(units, key=lambda u: -_mult_order(u, q)):
        if a in span:
            continue
        gens.append(a)
        frontier = list(span)
        while frontier:
            nxt = []
            for x in frontier:
                y = x * a % q
                if y not in span:
                    span.add(y)
                    nxt.append(y)
            frontier = nxt
        if len(span) == len(units):
            break
    return gens


def _mult_order(a: int, q: int) -> int:
    k, x = 1, a % q
    while x != 1:
        x = x * a % q
        k += 1
    return k


def elementary(n: int, i: int, j: int, a: int = 1) -> np.ndarray:
    E = np.eye(n, dtype=np.int64)
    E[i, j] = a
    return E


def diagonal(entries) -> np.ndarray:
    return np.diag(np.asarray(entries, dtype=np.int64))


def special_linear_generators(n: int, mod: Modulus) -> list:
    # adjacent transvections generate SL_n over a local ring
    gens = []
    for i in range(n - 1):
        gens.append(elementary(n, i, i + 1))
        gens.append(elementary(n, i + 1, i))
    return gens


def general_linear_generators(n: int, mod: Modulus) -> list:
    gens = special_linear_generators(n, mod)
    for u in unit_generators(mod):
        d = np.ones(n, dtype=np.int64)
        d[0] = u
        gens.append(diagonal(d))
    return gens


def special_linear(n: int, mod: Modulus, element_cap=None) -> MatrixGroup:
    if n == 1:
        return closure([], mod, 1)
    return closure(special_linear_generators(n, mod), mod, n, element_cap=_cap(element_cap))


def general_linear(n: int, mod: Modulus, element_cap=None) -> MatrixGroup:
    return closure(general_linear_generators(n, mod), mod, n, element_cap=_cap(element_cap))


def gl_order(n: int, mod: Modulus) -> int:
    p, l = mod.p, mod.l
    base = 1
    for i in range(n):
        base *= p**n - p**i
    return base * p ** (n * n * (l - 1))


def sl_order(n: int, mod: Modulus) -> int:
    return gl_order(n, mod) // (mod.p ** (mod.l - 1) * (mod.p - 1))


def block_diag(groups: Sequence[MatrixGroup], element_cap=None) -> MatrixGroup:
    """Direct product acting block-diagonally."""
    if not groups:
        raise ValueError("need at least one group")
    mod = _same_modulus(groups)
    dims = [G.dim for G in groups]
    n = sum(dims)
    gens = []
    offset = 0
    for G, d in zip(groups, dims):
        for g in G.generators:
            X = np.eye(n, dtype=np.int64)
            X[offset:offset + d, offset:offset + d] = g
            gens.append(X)
        offset += d
    cap = _cap(element_cap)
    expected = math.prod(G.order for G in groups)
    if expected > cap:
        raise CapExceeded(f"block group of order {expected} exceeds cap {cap}")
    return closure(gens, mod, n, element_cap=cap)


def block_embed(g: np.ndarray, offset: int, n: int) -> np.ndarray:
    d = g.shape[0]
    X = np.eye(n, dtype=np.int64)
    X[offset:offset + d, offset:offset + d] = g
    return X


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """Matrix sending basis vector ``e_i`` to ``e_perm[i]``."""
    n = len(perm)
    P = np.zeros((n, n), dtype=np.int64)
    P[list(perm), list(range(n))] = 1
    return P


def wreath(G: MatrixGroup, r: int, element_cap=None) -> MatrixGroup:
    """``G wr S_r`` acting on ``r`` blocks of size ``G.dim``."""
    if r < 2:
        raise ValueError("wreath product needs r >= 2")
    t = G.dim
    n = t * r
    cap = _cap(element_cap)
    expected = G.order**r * math.factorial(r)
    if expected > cap:
        raise CapExceeded(f"wreath product of order {expected} exceeds cap {cap}")
    gens = [block_embed(g, 0, n) for g in G.generators]
    It = np.eye(t, dtype=np.int64)
    swap = [1, 0] + list(range(2, r))
    cycle = [(i + 1) % r for i in range(r)]
    gens.append(np.kron(permutation_matrix(swap), It))
    if r > 2:
        gens.append(np.kron(permutation_matrix(cycle), It))
    return closure(gens, G.modulus, n, element_cap=cap)


def tensor_product(A: MatrixGroup, B: MatrixGroup, element_cap=None) -> MatrixGroup:
    """The image of ``A x B`` acting on the tensor product of the modules."""
    mod = _same_modulus([A, B])
    Ia = np.eye(A.dim, dtype=np.int64)
    Ib = np.eye(B.dim, dtype=np.int64)
    gens = [np.kron(g, Ib) for g in A.generators] + [np.kron(Ia, h) for h in B.generators]
    return closure(gens, mod, A.dim * B.dim, element_cap=_cap(element_cap))


# ---------------------------------------------------------------- finite fields

def _poly_trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_rem(a: Sequence[int], f: Sequence[int], p: int) -> list:
    a = _poly_trim([x % p for x in a])
    f = _poly_trim([x % p for x in f])
    inv = pow(f[-1], -1, p)
    while len(a) >= len(f):
        c = a[-1] * inv % p
        shift = len(a) - len(f)
        for i, x in enumerate(f):
            a[shift + i] = (a[shift + i] - c * x) % p
        a = _poly_trim(a)
    return a


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree up to deg(f)/2."""
    deg = len(_poly_trim(list(f))) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            if not _poly_rem(f, list(tail) + [1], p):
                return False
    return True


@lru_cache(maxsize=None)
def conway_like_polynomial(p: int, r: int) -> tuple:
    """First monic irreducible degree-``r`` polynomial in lexicographic order.

    Coefficients are listed from the constant term up, leading 1 included.
    """
    for tail in itertools.product(range(p), repeat=r):
        f = list(tail[::-1]) + [1]
        if f[0] != 0 and is_irreducible(f, p):
            return tuple(f)
    raise ReduciblePolynomial(f"no irreducible polynomial of degree {r} over GF({p})")


class FiniteField:
    """GF(p^r) as F_p[x]/(f), elements as coefficient vectors of length r."""

    def __init__(self, p: int, r: int, poly: Optional[Sequence[int]] = None):
        if not zq.is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p, self.r = p, r
        f = list(poly) if poly is not None else list(conway_like_polynomial(p, r))
        f = [x % p for x in f]
        if len(f) != r + 1 or f[-1] != 1:
            raise ReduciblePolynomial("modulus polynomial must be monic of degree r")
        if not is_irreducible(f, p):
            raise ReduciblePolynomial(f"{f} is reducible over GF({p})")
        self.poly = tuple(f)
        C = np.zeros((r, r), dtype=np.int64)
        for i in range(r - 1):
            C[i + 1, i] = 1
        C[:, r - 1] = [(-c) % p for c in f[:r]]
        self.companion = C
        pw = [np.eye(r, dtype=np.int64)]
        for _ in range(r - 1):
            pw.append(pw[-1] @ C % p)
        self._powers = np.array(pw)

    @property
    def order(self) -> int:
        return self.p**self.r

    def element(self, a) -> np.ndarray:
        if isinstance(a, (int, np.integer)):
            v = np.zeros(self.r, dtype=np.int64)
            v[0] = int(a) % self.p
            return v
        v = np.asarray(a, dtype=np.int64) % self.p
        if v.shape != (self.r,):
            raise ValueError(f"field element must have {self.r} coefficients")
        return v

    def matrix(self, a) -> np.ndarray:
        """Multiplication by ``a`` as an r x r matrix over GF(p)."""
        v = self.element(a)
        return np.tensordot(v, self._powers, axes=1) % self.p

    def mul(self, a, b) -> np.ndarray:
        return self.matrix(a) @ self.element(b) % self.p

    def frobenius(self) -> np.ndarray:
        """Matrix of ``x -> x^p`` on the coefficient basis."""
        cols = []
        for i in range(self.r):
            e = np.zeros(self.r, dtype=np.int64)
            e[i] = 1
            y = self.element(1)
            for _ in range(self.p):
                y = self.mul(y, e)
            cols.append(y)
        return np.array(cols).T

    def elements(self):
        for c in itertools.product(range(self.p), repeat=self.r):
            yield np.array(c[::-1], dtype=np.int64)

    def multiplicative_order(self, a) -> int:
        M = self.matrix(a)
        if not M.any():
            raise ZeroDivisionError("zero has no multiplicative order")
        k, X = 1, M.copy()
        I = np.eye(self.r, dtype=np.int64)
        while not np.array_equal(X, I):
            X = X @ M % self.p
            k += 1
        return k

    def primitive_element(self) -> np.ndarray:
        target = self.order - 1
        for a in self.elements():
            if a.any() and self.multiplicative_order(a) == target:
                return a
        raise RuntimeError("no primitive element found")

    def norm_one_element(self) -> np.ndarray:
        """A generator of the kernel of the norm to the prime field."""
        M = self.matrix(self.primitive_element())
        X = np.eye(self.r, dtype=np.int64)
        for _ in range(self.p - 1):
            X = X @ M % self.p
        return X[:, 0].copy()


def field_ext_embed(t: int, r: int, p: int, generators, poly=None, element_cap=None,
                    extra=()) -> MatrixGroup:
    """Embed matrices over GF(p^r) into GL_{tr}(p) via the regular representation.

    Each generator is a ``t x t`` array whose entries are integers (prime
    field) or length-``r`` coefficient lists.  ``extra`` holds further
    ``tr x tr`` matrices over GF(p) appended verbatim (e.g. Frobenius).
    """
    F = FiniteField(p, r, poly)
    mats = []
    for g in generators:
        X = np.zeros((t * r, t * r), dtype=np.int64)
        for i in range(t):
            for j in range(t):
                X[i * r:(i + 1) * r, j * r:(j + 1) * r] = F.matrix(_entry(g, i, j))
        mats.append(X)
    mats.extend(np.asarray(e, dtype=np.int64) for e in extra)
    return closure(mats, Modulus(p, 1), t * r, element_cap=_cap(element_cap))


def _entry(g, i, j):
    row = g[i]
    return row[j]


def extension_sl_generators(F: FiniteField, t: int) -> list:
    """Transvection generators of SL_t(p^r), entries as coefficient lists."""
    zero = [0] * F.r
    one = [1] + [0] * (F.r - 1)
    gens = []
    for a in range(F.r):
        basis_el = [0] * F.r
        basis_el[a] = 1
        for i in range(t - 1):
            for (u, v) in ((i, i + 1), (i + 1, i)):
                g = [[one if x == y else zero for y in range(t)] for x in range(t)]
                g[u][v] = basis_el
                gens.append(g)
    return gens


# ------------------------------------------------------------- classical groups

def symplectic_form(n: int) -> np.ndarray:
    if n % 2:
        raise ValueError("symplectic forms need even dimension")
    m = n // 2
    F = np.zeros((n, n), dtype=np.int64)
    F[:m, m:] = np.eye(m, dtype=np.int64)
    F[m:, :m] = -np.eye(m, dtype=np.int64)
    return F


def _nonsquare(p: int) -> int:
    squares = {x * x % p for x in range(1, p)}
    return min(a for a in range(1, p) if a not in squares)


def orthogonal_form(kind: str, n: int, p: int) -> np.ndarray:
    """Symmetric form of plus type (antidiagonal ones) or minus type."""
    if n % 2:
        raise ValueError("orthogonal forms here need even dimension")
    if kind == "SOplus":
        return np.fliplr(np.eye(n, dtype=np.int64))
    if kind == "SOminus":
        F = np.zeros((n, n), dtype=np.int64)
        F[: n - 2, : n - 2] = np.fliplr(np.eye(n - 2, dtype=np.int64))
        F[n - 2, n - 2] = 1
        F[n - 1, n - 1] = (-_nonsquare(p)) % p
        return F
    raise ValueError(f"unknown orthogonal kind {kind!r}")


def preserves_form(mats: np.ndarray, F: np.ndarray, q: int) -> np.ndarray:
    mats = np.asarray(mats, dtype=np.int64).reshape(-1, F.shape[0], F.shape[0])
    lhs = (np.swapaxes(mats, 1, 2) @ F @ mats) % q
    return np.all(lhs == F % q, axis=(1, 2))


def _projective_points(p: int, n: int):
    for lead in range(n):
        for tail in itertools.product(range(p), repeat=n - lead - 1):
            v = np.zeros(n, dtype=np.int64)
            v[lead] = 1
            v[lead + 1:] = tail
            yield v


def _symplectic_generators(n: int, p: int) -> list:
    F = symplectic_form(n)
    gens = []
    for v in _projective_points(p, n):
        if np.count_nonzero(v) <= 2 and set(v.tolist()) <= {0, 1}:
            gens.append((np.eye(n, dtype=np.int64) + np.outer(v, v) @ F) % p)
    return gens


def _short_vectors(n: int):
    """Nonzero vectors with entries in {0, 1, -1}, one per sign class."""
    for v in itertools.product((0, 1, -1), repeat=n):
        nz = [x for x in v if x]
        if nz and nz[0] == 1:
            yield np.array(v, dtype=np.int64)


def _orthogonal_generators(F: np.ndarray, p: int) -> list:
    # reflections in anisotropic short vectors; products of pairs lie in SO
    n = F.shape[0]
    refl = []
    for v in _short_vectors(n):
        b = int(v @ F @ v) % p
        if b:
            c = 2 * pow(b, -1, p) % p
            refl.append((np.eye(n, dtype=np.int64) - c * np.outer(v, v) @ F) % p)
    r0 = refl[0]
    return [(r0 @ r) % p for r in refl[1:]]


def classical_order(kind: str, n: int, p: int) -> int:
    m = n // 2
    if kind == "Sp":
        out = p ** (m * m)
        for i in range(1, m + 1):
            out *= p ** (2 * i) - 1
        return out
    eps = 1 if kind == "SOplus" else -1
    out = p ** (m * (m - 1)) * (p**m - eps)
    for i in range(1, m):
        out *= p ** (2 * i) - 1
    return out


def classical_form(kind: str, n: int, p: int) -> np.ndarray:
    return symplectic_form(n) if kind == "Sp" else orthogonal_form(kind, n, p)


def classical_group(kind: str, n: int, p: int, element_cap=None, verify: bool = True) -> MatrixGroup:
    """Sp_n(p), SO^+_n(p) or SO^-_n(p) for odd p, preserving :func:`classical_form`."""
    if n % 2 or n < 2:
        raise ValueError("classical groups here need even n >= 2")
    if p == 2 or not zq.is_prime(p):
        raise ValueError("classical groups here need an odd prime")
    F = classical_form(kind, n, p)
    gens = _symplectic_generators(n, p) if kind == "Sp" else _orthogonal_generators(F, p)
    bad = ~preserves_form(np.array(gens), F, p)
    if bad.any():
        raise FormViolation(f"{int(bad.sum())} generators fail to preserve the form")
    cap = _cap(element_cap)
    expected = classical_order(kind, n, p)
    if expected > cap:
        raise CapExceeded(f"{kind}_{n}({p}) has order {expected} > cap {cap}")
    G = closure(gens, Modulus(p, 1), n, element_cap=cap)
    if verify:
        bad = ~preserves_form(G.elements, F, p)
        if bad.any():
            raise FormViolation(f"{int(bad.sum())} elements fail to preserve the form")
    return few_generators(G)


# ---------------------------------------------------------------------- catalog

def _monomial_sl(n: int, mod: Modulus, element_cap=None) -> MatrixGroup:
    torus = closure([diagonal([u]) for u in unit_generators(mod)], mod, 1)
    return few_generators(special(wreath(torus, n, element_cap=element_cap)))


def _gl3_in_sl4(mod: Modulus, element_cap=None) -> MatrixGroup:
    gens = []
    for g in general_linear_generators(3, mod):
        d = zq.det_mod(g, mod)
        X = np.eye(4, dtype=np.int64)
        X[:3, :3] = g
        X[3, 3] = mod.inverse(d)
        gens.append(X)
    return closure(gens, mod, 4, element_cap=_cap(element_cap))


def _two_plane_stabiliser(mod: Modulus, element_cap=None) -> MatrixGroup:
    sl2 = special_linear_generators(2, mod)
    gens = [block_embed(g, 0, 4) for g in sl2] + [block_embed(g, 2, 4) for g in sl2]
    for u in unit_generators(mod):
        gens.append(diagonal([u, 1, mod.inverse(u), 1]))
    gens.append(np.kron(permutation_matrix([1, 0]), np.eye(2, dtype=np.int64)))
    return few_generators(closure(gens, mod, 4, element_cap=_cap(element_cap)))


def _extension_field_stabiliser(p: int, element_cap=None) -> MatrixGroup:
    F = FiniteField(p, 2)
    gens = extension_sl_generators(F, 2)
    one = [1, 0]
    zero = [0, 0]
    mu = F.norm_one_element().tolist()
    gens.append([[mu, zero], [zero, one]])
    phi = F.frobenius()
    frob = np.kron(np.eye(2, dtype=np.int64), phi)
    G = field_ext_embed(2, 2, p, gens, poly=F.poly, element_cap=element_cap, extra=[frob])
    return few_generators(G)


def _tensor_sl2(mod: Modulus, element_cap=None) -> MatrixGroup:
    S = special_linear(2, mod)
    return few_generators(tensor_product(S, S, element_cap=element_cap))


def _build(name, aclass, expected, provenance, builder, cap) -> NamedConstruction:
    if expected is not None and expected > cap:
        return NamedConstruction(name, aclass, None, expected, provenance, EXCEEDS_CAP)
    try:
        G = builder()
    except CapExceeded:
        return NamedConstruction(name, aclass, None, expected, provenance, EXCEEDS_CAP)
    return NamedConstruction(name, aclass, G, expected, provenance, BUILT)


def _meta(name, aclass, provenance, expected=None) -> NamedConstruction:
    return NamedConstruction(name, aclass, None, expected, provenance, METADATA_ONLY)


def catalog(n: int, p: int, l: int = 1, element_cap=None) -> list:
    """Named, class-tagged subgroups of GL_n(Z/p^lZ) for n in {2, 4}."""
    if n not in (2, 4):
        raise ValueError("catalog is available for n = 2 and n = 4")
    if not zq.is_prime(p):
        raise ValueError(f"{p} is not prime")
    mod = Modulus(p, l)
    cap = _cap(element_cap)
    q = mod.q
    units = gl_order(1, mod)
    out = []
    if n == 2:
        out.append(_build(
            "unitriangular", AschbacherClass.C1, q,
            "upper unitriangular matrices; a Sylow p-subgroup of GL_2",
            lambda: closure([elementary(2, 0, 1)], mod, 2, element_cap=cap), cap))
        out.append(_build(
            "borel", AschbacherClass.C1, units**2 * q,
            "upper triangular matrices, stabiliser of a line",
            lambda: closure([elementary(2, 0, 1)] + [diagonal([u, 1]) for u in unit_generators(mod)]
                            + [diagonal([1, u]) for u in unit_generators(mod)], mod, 2,
                            element_cap=cap), cap))
        out.append(_build(
            "monomial", AschbacherClass.C2, 2 * units**2,
            "GL_1 wr S_2, stabiliser of a pair of complementary lines",
            lambda: wreath(closure([diagonal([u]) for u in unit_generators(mod)], mod, 1), 2,
                           element_cap=cap), cap))
        if l == 1:
            out.append(_build(
                "nonsplit_torus_normaliser", AschbacherClass.C3, 2 * (p * p - 1),
                "GL_1(p^2).2 via the regular representation and Frobenius",
                lambda: field_ext_embed(1, 2, p, [[[FiniteField(p, 2).primitive_element().tolist()]]],
                                        element_cap=cap, extra=[FiniteField(p, 2).frobenius()]), cap))
        out.append(_build(
            "SL2", AschbacherClass.C8, sl_order(2, mod), "special linear group, equal to Sp_2",
            lambda: special_linear(2, mod, element_cap=cap), cap))
        out.append(_build(
            "GL2", AschbacherClass.C1, gl_order(2, mod), "the whole group",
            lambda: general_linear(2, mod, element_cap=cap), cap))
        return out

    # n == 4, maximal subgroups of SL_4
    out.append(_meta("point_stabiliser", AschbacherClass.C1,
                     "C_q^3:GL_3(q); order q^3 |GL_3(q)|", expected=q**3 * gl_order(3, mod)))
    out.append(_meta("line_stabiliser", AschbacherClass.C1,
                     "stabiliser of a projective line; source order expression is inconsistent"))
    out.append(_meta("flag_stabiliser", AschbacherClass.C1,
                     "stabiliser of two points and a line; source order expression is inconsistent"))
    out.append(_build(
        "GL3_point_plane", AschbacherClass.C1, gl_order(3, mod),
        "GL_3(q) fixing a point and a complementary plane, q^3(q^3-1)(q^2-1)(q-1)",
        lambda: _gl3_in_sl4(mod, cap), cap))
    out.append(_build(
        "four_lines", AschbacherClass.C2, units**3 * 24,
        "stabiliser of four lines spanning the space, (q-1)^3 4!",
        lambda: _monomial_sl(4, mod, cap), cap))
    out.append(_build(
        "two_planes", AschbacherClass.C2, 2 * q**2 * (q * q - 1) ** 2 * (q - 1) if l == 1 else None,
        "stabiliser of two complementary planes, 2q^2(q^2-1)^2(q-1)",
        lambda: _two_plane_stabiliser(mod, cap), cap))
    if l == 1:
        out.append(_build(
            "extension_field", AschbacherClass.C3, 2 * q**2 * (q**4 - 1) * (q + 1),
            "SL_2(q^2) extended by norm-one scalars and Frobenius, 2q^2(q^4-1)(q+1)",
            lambda: _extension_field_stabiliser(p, cap), cap))
        out.append(_build(
            "tensor_SL2_SL2", AschbacherClass.C4, sl_order(2, mod) ** 2 // 2,
            "central product SL_2(q) o SL_2(q) acting on a tensor product",
            lambda: _tensor_sl2(mod, cap), cap))
    out.append(_meta("extraspecial_S6", AschbacherClass.C6, "C_4 o 2^{1+4}.S_6"))
    out.append(_meta("extraspecial_A6", AschbacherClass.C6, "C_4 o 2^{1+4}.A_6"))
    if l == 1 and p > 2:
        for kind, cls_name in (("SOplus", "SO4plus"), ("SOminus", "SO4minus")):
            out.append(_build(
                cls_name, AschbacherClass.C8, classical_order(kind, 4, p),
                f"{kind} form stabiliser of determinant one; normal in a maximal C8 subgroup",
                lambda kind=kind: classical_group(kind, 4, p, element_cap=cap), cap))
        out.append(_build(
            "Sp4", AschbacherClass.C8, classical_order("Sp", 4, p),
            "Sp_4(q), q^4(q^2-1)(q^4-1); the maximal subgroup is Sp_4(q).C_2",
            lambda: classical_group("Sp", 4, p, element_cap=cap), cap))
        out.append(_meta("Sp4_point_stabiliser", AschbacherClass.C1,
                         "E_q^3:GL_3(q) inside Sp_4(q); source order expression is malformed"))
    for name, desc in (("A7", "A_7, only in characteristic 2"), ("SL2_7", "C_d o C_2 . SL_2(7)"),
                       ("2A7", "C_d o C_2 . A_7"), ("U4_2", "C_d o C_2 . U_4(2)")):
        out.append(_meta(name, AschbacherClass.C9, desc))
    return out


def catalog_json(entries: Sequence[NamedConstruction]) -> list:
    return [e.to_json() for e in entries]
