"""Finite matrix groups over Z/qZ given by generators.

A :class:`MatrixGroup` is enumerated completely at construction time by a
breadth-first closure over right multiplication by the generators.  The BFS
tree and the right-multiplication table are kept, since the cohomology code
propagates cocycles along exactly that tree.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .zq import Modulus, det_mod

DEFAULT_ELEMENT_CAP = 200_000
DEFAULT_LATTICE_BOUND = 1000
_TABLE_BOUND = 2500
_CLOSURE_CHUNK = 1 << 21


class CapExceeded(RuntimeError):
    """An enumeration grew past its configured cap."""


class NonInvertibleGenerator(ValueError):
    pass


def element_cap_default() -> int:
    return int(os.environ.get("COHOM_ELEMENT_CAP", DEFAULT_ELEMENT_CAP))


class _Codec:
    """Hashable keys for stacks of n x n matrices over Z/qZ."""

    def __init__(self, q: int, n: int):
        self.q = q
        self.n = n
        self.packed = n * n * math.log2(q) < 62
        if self.packed:
            self.weights = np.array([q**i for i in range(n * n)], dtype=np.int64)

    def encode(self, mats: np.ndarray) -> list:
        flat = mats.reshape(-1, self.n * self.n)
        if self.packed:
            return (flat @ self.weights).tolist()
        return [row.tobytes() for row in np.ascontiguousarray(flat)]

    def encode_array(self, mats: np.ndarray) -> np.ndarray:
        """Keys as an array usable with ``np.searchsorted``."""
        flat = np.ascontiguousarray(mats.reshape(-1, self.n * self.n))
        if self.packed:
            return flat @ self.weights
        return flat.view(np.dtype((np.void, flat.shape[1] * 8))).ravel()


class MatrixGroup:
    """A fully enumerated subgroup of GL_n(Z/qZ).

    ``elements[0]`` is the identity and ``elements[i] == elements[parent[i]] @
    generators[parent_gen[i]]`` for every other ``i``.  ``rmul[i, j]`` is the
    index of ``elements[i] @ generators[j]``.
    """

    def __init__(self, modulus: Modulus, dim: int, generators, elements, index,
                 rmul, parent, parent_gen, codec):
        self.modulus = modulus
        self.dim = dim
        self.generators = generators
        self.elements = elements
        self._index = index
        self.rmul = rmul
        self.parent = parent
        self.parent_gen = parent_gen
        self._codec = codec
        self._orders = None
        self._inverses = None
        self._table = None

    @property
    def order(self) -> int:
        return int(self.elements.shape[0])

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"MatrixGroup(n={self.dim}, q={self.modulus.q}, order={self.order})"

    @property
    def ngens(self) -> int:
        return len(self.generators)

    def index_of(self, g) -> Optional[int]:
        g = np.asarray(g, dtype=np.int64).reshape(self.dim, self.dim) % self.modulus.q
        return self._index.get(self._codec.encode(g[None])[0])

    def indices_of(self, mats: np.ndarray) -> np.ndarray:
        keys = self._codec.encode(mats)
        return np.array([self._index.get(k, -1) for k in keys], dtype=np.int64)

    def __contains__(self, g) -> bool:
        return self.index_of(g) is not None

    def element_orders(self) -> np.ndarray:
        if self._orders is None:
            self._orders = _batch_orders(self.elements, self.modulus)
        return self._orders

    def inverse_indices(self) -> np.ndarray:
        if self._inverses is None:
            inv = _batch_power(self.elements, self.element_orders() - 1, self.modulus)
            self._inverses = self.indices_of(inv)
        return self._inverses

    def table(self) -> np.ndarray:
        """Full multiplication table; ``table[i, j]`` indexes ``e_i @ e_j``."""
        if self._table is None:
            N = self.order
            if N > 5000:
                raise CapExceeded(f"multiplication table of a group of order {N}")
            keys = self._codec.encode_array(self.elements)
            perm = np.argsort(keys, kind="stable")
            skeys = keys[perm]
            T = np.empty((N, N), dtype=np.int64)
            for i in range(N):
                prod = (self.elements[i][None] @ self.elements) % self.modulus.q
                T[i] = perm[np.searchsorted(skeys, self._codec.encode_array(prod))]
            self._table = T
        return self._table

    def is_abelian(self) -> bool:
        g = np.array(self.generators).reshape(-1, self.dim, self.dim)
        q = self.modulus.q
        for a in g:
            for b in g:
                if not np.array_equal(a @ b % q, b @ a % q):
                    return False
        return True

    def center_indices(self) -> np.ndarray:
        q = self.modulus.q
        ok = np.ones(self.order, dtype=bool)
        for g in self.generators:
            ok &= np.all((self.elements @ g) % q == (g[None] @ self.elements) % q, axis=(1, 2))
        return np.nonzero(ok)[0]

    def to_spec(self) -> dict:
        return {
            "p": self.modulus.p,
            "l": self.modulus.l,
            "n": self.dim,
            "generators": [[int(x) for x in g.reshape(-1)] for g in self.generators],
        }

    def canonical_key(self) -> tuple:
        gens = sorted(tuple(int(x) for x in g.reshape(-1)) for g in self.generators)
        return (self.modulus.q, self.dim, tuple(gens))

    def whole(self) -> "Subgroup":
        return Subgroup(self, np.arange(self.order), tuple(self.generator_indices()))

    def generator_indices(self) -> list:
        return [int(self.rmul[0, j]) for j in range(self.ngens)]

    def subgroup(self, indices: Iterable[int], gens: Optional[Sequence[int]] = None) -> "Subgroup":
        idx = np.unique(np.asarray(list(indices), dtype=np.int64))
        if gens is None:
            gens = _small_generating_set(self, idx)
        return Subgroup(self, idx, tuple(int(g) for g in gens))


@dataclass(eq=False)
class Subgroup:
    """A subgroup of ``parent`` recorded by sorted element indices."""

    parent: MatrixGroup
    indices: np.ndarray
    gens: tuple = ()
    _group: Optional[MatrixGroup] = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return int(self.indices.shape[0])

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"Subgroup(order={self.order}, gens={self.gens})"

    def __eq__(self, other):
        return isinstance(other, Subgroup) and self.parent is other.parent and np.array_equal(
            self.indices, other.indices)

    def __hash__(self):
        return hash(self.indices.tobytes())

    def key(self) -> bytes:
        return self.indices.tobytes()

    @property
    def elements(self) -> np.ndarray:
        return self.parent.elements[self.indices]

    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.order, dtype=bool)
        m[self.indices] = True
        return m

    def issubset(self, other: "Subgroup") -> bool:
        return bool(np.isin(self.indices, other.indices, assume_unique=True).all())

    def as_group(self, element_cap: Optional[int] = None) -> MatrixGroup:
        if self._group is None:
            gens = [self.parent.elements[i] for i in self.gens]
            self._group = closure(gens, self.parent.modulus, self.parent.dim,
                                  element_cap=element_cap or max(self.order, 1))
        return self._group


def _check_generator(g: np.ndarray, mod: Modulus):
    if not mod.is_unit(det_mod(g, mod)):
        raise NonInvertibleGenerator(f"generator with non-unit determinant:\n{g}")


def closure(generators, modulus: Modulus, dim: Optional[int] = None,
            element_cap: Optional[int] = None) -> MatrixGroup:
    """Enumerate the group generated by ``generators`` breadth first.

    Raises :class:`CapExceeded` as soon as more than ``element_cap`` elements
    have been found.
    """
    q = modulus.q
    gens = [np.asarray(g, dtype=np.int64) % q for g in generators]
    if dim is None:
        if not gens:
            raise ValueError("dimension required for an empty generating set")
        dim = int(round(math.sqrt(gens[0].size)))
    gens = [g.reshape(dim, dim) for g in gens]
    for g in gens:
        _check_generator(g, modulus)
    cap = element_cap_default() if element_cap is None else element_cap
    if cap < 1:
        raise ValueError("element_cap must be at least 1")
    codec = _Codec(q, dim)
    ident = np.eye(dim, dtype=np.int64)
    index = {codec.encode(ident[None])[0]: 0}
    blocks = [ident[None]]
    parents = [np.array([-1])]
    parent_gens = [np.array([-1])]
    k = len(gens)
    rmul_rows = []
    frontier = ident[None]
    count = 1
    G = np.array(gens).reshape(k, dim, dim) if k else np.zeros((0, dim, dim), dtype=np.int64)
    while frontier.shape[0]:
        f = frontier.shape[0]
        rm = np.empty((f, k), dtype=np.int64)
        if k == 0:
            rmul_rows.append(rm)
            break
        new_mats, new_par, new_gen = [], [], []
        base = count - f
        step = max(1, _CLOSURE_CHUNK // (k * dim * dim))
        for lo in range(0, f, step):
            prods = (frontier[lo:lo + step, None, :, :] @ G[None, :, :, :]) % q
            keys = codec.encode(prods)
            flat = rm[lo:lo + step].reshape(-1)
            for t, key in enumerate(keys):
                idx = index.get(key)
                if idx is None:
                    idx = count
                    index[key] = idx
                    count += 1
                    i, j = divmod(t, k)
                    new_mats.append(prods[i, j].copy())
                    new_par.append(base + lo + i)
                    new_gen.append(j)
                    if count > cap:
                        raise CapExceeded(f"closure exceeded element cap {cap}")
                flat[t] = idx
            rm[lo:lo + step] = flat.reshape(-1, k)
        rmul_rows.append(rm)
        if new_mats:
            frontier = np.array(new_mats)
            blocks.append(frontier)
            parents.append(np.array(new_par))
            parent_gens.append(np.array(new_gen))
        else:
            frontier = frontier[:0]
    elements = np.concatenate(blocks)
    rmul = np.concatenate(rmul_rows) if k else np.zeros((elements.shape[0], 0), dtype=np.int64)
    return MatrixGroup(modulus, dim, tuple(gens), elements, index, rmul,
                       np.concatenate(parents), np.concatenate(parent_gens), codec)


def trivial_group(modulus: Modulus, dim: int) -> MatrixGroup:
    return closure([], modulus, dim)


def from_spec(spec: dict, element_cap: Optional[int] = None) -> MatrixGroup:
    """Build a group from ``{"p", "l", "n", "generators"}``."""
    try:
        mod = Modulus(int(spec["p"]), int(spec.get("l", 1)))
        n = int(spec["n"])
        gens = [np.array(g, dtype=np.int64).reshape(n, n) for g in spec.get("generators", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed group spec: {exc}") from exc
    return closure(gens, mod, n, element_cap=element_cap)


def load_spec(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _batch_power(mats: np.ndarray, exps: np.ndarray, mod: Modulus) -> np.ndarray:
    n = mats.shape[-1]
    result = np.broadcast_to(np.eye(n, dtype=np.int64), mats.shape).copy()
    base = mats.copy()
    e = np.asarray(exps, dtype=np.int64).copy()
    while (e > 0).any():
        odd = (e & 1).astype(bool)
        if odd.any():
            result[odd] = (result[odd] @ base[odd]) % mod.q
        e >>= 1
        live = e > 0
        if live.any():
            base[live] = (base[live] @ base[live]) % mod.q
    return result


def _batch_orders(mats: np.ndarray, mod: Modulus) -> np.ndarray:
    n = mats.shape[-1]
    ident = np.eye(n, dtype=np.int64)
    orders = np.zeros(mats.shape[0], dtype=np.int64)
    live = np.arange(mats.shape[0])
    cur = mats.copy()
    k = 1
    while live.size:
        done = np.all(cur == ident, axis=(1, 2))
        orders[live[done]] = k
        live = live[~done]
        cur = (cur[~done] @ mats[live]) % mod.q
        k += 1
    return orders


def element_order(g, modulus: Modulus) -> int:
    """Least ``k >= 1`` with ``g**k == I``."""
    g = np.asarray(g, dtype=np.int64) % modulus.q
    if not modulus.is_unit(det_mod(g, modulus)):
        raise NonInvertibleGenerator("element is not invertible")
    ident = np.eye(g.shape[0], dtype=np.int64)
    cur = g.copy()
    k = 1
    while not np.array_equal(cur, ident):
        cur = (cur @ g) % modulus.q
        k += 1
    return k


def _powers(G: MatrixGroup, i: int) -> np.ndarray:
    order = int(G.element_orders()[i])
    g = G.elements[i]
    mats = [np.eye(G.dim, dtype=np.int64)]
    for _ in range(order - 1):
        mats.append((mats[-1] @ g) % G.modulus.q)
    return G.indices_of(np.array(mats))


def cyclic_subgroups(G: MatrixGroup) -> list:
    """Every distinct cyclic subgroup of ``G``, ordered by (order, indices)."""
    orders = G.element_orders()
    seen = np.zeros(G.order, dtype=bool)
    out = []
    for i in range(G.order):
        if seen[i]:
            continue
        pw = _powers(G, i)
        m = int(orders[i])
        for k in range(1, m + 1):
            if math.gcd(k, m) == 1:
                seen[pw[k % m]] = True
        out.append(Subgroup(G, np.unique(pw), (i,) if m > 1 else ()))
    out.sort(key=lambda H: (H.order, tuple(H.indices.tolist())))
    return out


def _close_indices(G: MatrixGroup, gens: Sequence[int], cap: Optional[int] = None) -> np.ndarray:
    """Sorted indices of the subgroup generated by the elements ``gens``."""
    gens = [int(g) for g in gens]
    if not gens:
        return np.array([0], dtype=np.int64)
    if G.order <= _TABLE_BOUND:
        T = G.table()
        member = np.zeros(G.order, dtype=bool)
        member[0] = True
        frontier = np.array([0])
        total = 1
        while frontier.size:
            prods = T[np.ix_(frontier, gens)].ravel()
            new = np.unique(prods[~member[prods]])
            member[new] = True
            total += new.size
            if cap is not None and total > cap:
                raise CapExceeded("subgroup closure exceeded cap")
            frontier = new
        return np.nonzero(member)[0]
    mats = [G.elements[g] for g in gens]
    H = closure(mats, G.modulus, G.dim, element_cap=cap if cap is not None else G.order)
    return np.sort(G.indices_of(H.elements))


def _small_generating_set(G: MatrixGroup, idx: np.ndarray) -> list:
    target = idx.size
    gens: list = []
    cur = np.array([0])
    orders = G.element_orders()
    member = np.zeros(G.order, dtype=bool)
    member[0] = True
    for i in sorted(idx.tolist(), key=lambda t: (-orders[t], t)):
        if cur.size == target:
            break
        if member[i]:
            continue
        gens.append(i)
        cur = _close_indices(G, gens)
        member[cur] = True
    return gens


def join(H: Subgroup, K: Subgroup, cap: Optional[int] = None) -> Subgroup:
    G = H.parent
    gens = list(H.gens) + [g for g in K.gens if g not in H.gens]
    idx = _close_indices(G, gens, cap)
    return Subgroup(G, idx, tuple(gens))


def intersection(H: Subgroup, K: Subgroup) -> Subgroup:
    idx = np.intersect1d(H.indices, K.indices, assume_unique=True)
    return H.parent.subgroup(idx)


def p_part(n: int, p: int) -> int:
    r = 1
    while n % p == 0:
        n //= p
        r *= p
    return r


def _is_p_power(n: int, p: int) -> bool:
    return p_part(n, p) == n


def sylow(G: MatrixGroup, p: int) -> Subgroup:
    """A Sylow p-subgroup by greedy extension inside normalisers.

    A p-subgroup that is not Sylow has a p-element in its normaliser outside
    itself, so adjoining such elements reaches the full p-part of ``|G|``.
    """
    target = p_part(G.order, p)
    if target == 1:
        return Subgroup(G, np.array([0]), ())
    orders = G.element_orders()
    is_pel = np.array([_is_p_power(int(o), p) for o in orders])
    is_pel[0] = False
    cands = np.nonzero(is_pel)[0]
    start = int(cands[np.argmax(orders[cands])])
    gens = [start]
    P = _close_indices(G, gens, cap=target)
    inv = G.inverse_indices()
    q = G.modulus.q
    while P.size < target:
        member = np.zeros(G.order, dtype=bool)
        member[P] = True
        outside = cands[~member[cands]]
        X = G.elements[outside]
        Xinv = G.elements[inv[outside]]
        ok = np.ones(outside.size, dtype=bool)
        for g in gens:
            ci = G.indices_of((X @ G.elements[g] @ Xinv) % q)
            ok &= (ci >= 0) & member[ci]
        if not ok.any():
            raise RuntimeError("no normalising p-element found; group data inconsistent")
        x = int(outside[np.argmax(ok)])
        gens.append(x)
        P = _close_indices(G, gens, cap=target)
    return Subgroup(G, P, tuple(gens))


def contains_scalar(G: MatrixGroup) -> Optional[int]:
    """Some ``lam != 1`` with ``lam * I`` in ``G``; prefers ``lam - 1`` a unit."""
    E = G.elements
    n = G.dim
    diag = E[:, np.arange(n), np.arange(n)]
    off = E.copy()
    off[:, np.arange(n), np.arange(n)] = 0
    scalar = (~off.any(axis=(1, 2))) & np.all(diag == diag[:, :1], axis=1)
    lams = sorted({int(x) for x in diag[scalar, 0]} - {1})
    if not lams:
        return None
    units = [lam for lam in lams if G.modulus.is_unit(lam - 1)]
    return units[0] if units else lams[0]


def all_subgroups(G: MatrixGroup, count_cap: Optional[int] = None,
                  order_bound: int = DEFAULT_LATTICE_BOUND,
                  max_order: Optional[int] = None) -> list:
    """The complete subgroup lattice as joins of cyclic subgroups.

    ``max_order`` restricts the search to subgroups of at most that order
    (joins exceeding it are discarded), which still yields every subgroup of
    such order since each is a join of its own cyclic subgroups.
    """
    if G.order > order_bound:
        raise CapExceeded(f"|G|={G.order} exceeds lattice bound {order_bound}")
    cyc = cyclic_subgroups(G)
    if max_order is not None:
        cyc = [C for C in cyc if C.order <= max_order]
    known = {}
    queue = []
    for C in cyc:
        if C.key() not in known:
            known[C.key()] = C
            queue.append(C)
    masks = {}
    while queue:
        H = queue.pop()
        if max_order is not None and 2 * H.order > max_order:
            continue
        hm = masks.setdefault(H.key(), H.mask())
        for C in cyc:
            # a proper overgroup of H has order a multiple of lcm(|H|, |C|) and >= 2|H|
            if max_order is not None and math.lcm(H.order, C.order) > max_order:
                continue
            if hm[C.indices].all():
                continue
            try:
                J = join(H, C, cap=max_order)
            except CapExceeded:
                continue
            k = J.key()
            if k not in known:
                known[k] = J
                queue.append(J)
                if count_cap is not None and len(known) > count_cap:
                    raise CapExceeded(f"more than {count_cap} subgroups")
    out = list(known.values())
    out.sort(key=lambda H: (H.order, tuple(H.indices.tolist())))
    return out
