"""First cohomology and local cohomology of matrix groups on (Z/qZ)^n.

Cocycles are parametrised by their values on the generators.  Walking the
BFS tree of the closure expresses every value ``Z_sigma`` as a fixed linear
map ``C[sigma]`` applied to the generator values ``z``; every non-tree edge
of the Cayley graph then contributes a linear constraint.  All modules below
are therefore submodules of ``(Z/qZ)^(n*k)`` for ``k`` generators.

Two independent routes to the local group are provided:

* :func:`h1loc` imposes ``Z_sigma in Im(sigma - 1)`` element by element and
  divides by the coboundaries;
* :func:`h1loc_cyclic_oracle` starts from H^1 and intersects the kernels of
  restriction to every cyclic subgroup.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import zq
from .groups import MatrixGroup, Subgroup, cyclic_subgroups
from .zq import Modulus

_ELEMENT_CHUNK = 8192


class BudgetExceeded(RuntimeError):
    """A computation would exceed its exhaustive-search or memory budget."""


MAX_COCYCLE_ENTRIES = 50_000_000


@dataclass(eq=False)
class Cocycle:
    """A map ``G -> M`` stored as one vector per element of ``group``."""

    group: MatrixGroup
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64).reshape(
            self.group.order, self.group.dim) % self.group.modulus.q

    def __getitem__(self, sigma) -> np.ndarray:
        if isinstance(sigma, (int, np.integer)):
            return self.values[int(sigma)]
        i = self.group.index_of(sigma)
        if i is None:
            raise KeyError("element not in group")
        return self.values[i]

    def is_cocycle(self) -> bool:
        """Check ``Z_{sg} = Z_s + s Z_g`` for every element s and generator g.

        These instances imply the identity for all pairs by induction on word
        length, given ``Z_1 = 0``.
        """
        G, Z, q = self.group, self.values, self.group.modulus.q
        if Z[0].any():
            return False
        for j in range(G.ngens):
            gi = G.rmul[0, j]
            rhs = (Z + np.einsum("nij,j->ni", G.elements, Z[gi])) % q
            if not np.array_equal(Z[G.rmul[:, j]], rhs):
                return False
        return True

    def is_cocycle_all_pairs(self) -> bool:
        G, Z, q = self.group, self.values, self.group.modulus.q
        T = G.table()
        for s in range(G.order):
            rhs = (Z[s][None, :] + Z @ G.elements[s].T) % q
            if not np.array_equal(Z[T[s]], rhs):
                return False
        return True

    def satisfies_local_conditions(self) -> bool:
        q = self.group.modulus.q
        I = np.eye(self.group.dim, dtype=np.int64)
        return all(
            zq.membership((self.group.elements[s] - I) % q, self.values[s], self.group.modulus)
            for s in range(self.group.order)
        )

    def __add__(self, other: "Cocycle") -> "Cocycle":
        return Cocycle(self.group, self.values + other.values)

    def scaled(self, a: int) -> "Cocycle":
        return Cocycle(self.group, self.values * int(a))

    def apply(self, X: np.ndarray) -> "Cocycle":
        """Apply the module map ``X`` value-wise."""
        return Cocycle(self.group, self.values @ np.asarray(X, dtype=np.int64).T)

    def to_json(self) -> dict:
        return {
            "elements": [[int(x) for x in g.reshape(-1)] for g in self.group.elements],
            "values": self.values.tolist(),
        }


@dataclass(eq=False)
class CohomologyGroup:
    """A finite abelian p-group with invariant factors and representatives."""

    invariants: list
    representatives: list = field(default_factory=list)
    coordinates: list = field(default_factory=list, repr=False)

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariants:
            out *= d
        return out

    def is_trivial(self) -> bool:
        return not self.invariants


class CocycleFrame:
    """Generator-coordinate description of the cocycles of one group."""

    def __init__(self, G: MatrixGroup):
        n, k, N = G.dim, G.ngens, G.order
        if N * n * max(n * k, 1) > MAX_COCYCLE_ENTRIES:
            raise BudgetExceeded(f"cocycle frame for |G|={N}, n={n}, k={k} is too large")
        self.group = G
        self.mod = G.modulus
        self.width = n * k
        self.C = self._propagate()
        self.constraints = self._constraint_basis()
        self._z1 = None

    def _placed(self, idx: np.ndarray, j: int) -> np.ndarray:
        G, n = self.group, self.group.dim
        out = np.zeros((idx.size, n, self.width), dtype=np.int64)
        out[:, :, j * n:(j + 1) * n] = G.elements[idx]
        return out

    def _propagate(self) -> np.ndarray:
        G, n, q = self.group, self.group.dim, self.mod.q
        N = G.order
        C = np.zeros((N, n, self.width), dtype=np.int64)
        if N == 1:
            return C
        depth = np.zeros(N, dtype=np.int64)
        for i in range(1, N):
            depth[i] = depth[G.parent[i]] + 1
        for d in range(1, int(depth[-1]) + 1):
            rng = np.arange(np.searchsorted(depth, d, "left"), np.searchsorted(depth, d, "right"))
            C[rng] = C[G.parent[rng]]
            for j in range(G.ngens):
                sel = rng[G.parent_gen[rng] == j]
                if sel.size:
                    C[sel, :, j * n:(j + 1) * n] += G.elements[G.parent[sel]]
            C[rng] %= q
        return C

    def _constraint_basis(self) -> zq.HowellForm:
        G, q = self.group, self.mod.q
        basis = np.zeros((0, self.width), dtype=np.int64)
        for j in range(G.ngens):
            for a in range(0, G.order, _ELEMENT_CHUNK):
                idx = np.arange(a, min(a + _ELEMENT_CHUNK, G.order))
                R = (self.C[idx] + self._placed(idx, j) - self.C[G.rmul[idx, j]]) % q
                R = R.reshape(-1, self.width)
                R = R[R.any(axis=1)]
                if R.shape[0]:
                    basis = zq.howell(np.vstack([basis, R]), self.mod).basis
        return zq.howell(basis, self.mod) if basis.shape[0] else zq.howell(
            np.zeros((1, self.width), dtype=np.int64), self.mod)

    def z1(self) -> np.ndarray:
        """Rows generating Z^1 in generator coordinates."""
        if self._z1 is None:
            self._z1 = zq.kernel(self._constraint_matrix(), self.mod)
        return self._z1

    def _constraint_matrix(self) -> np.ndarray:
        B = self.constraints.basis
        if B.shape[0] == 0:
            return np.zeros((1, self.width), dtype=np.int64)
        return B

    def b1(self) -> np.ndarray:
        """Columns generating B^1: images of the standard basis of M."""
        G, q = self.group, self.mod.q
        I = np.eye(G.dim, dtype=np.int64)
        if G.ngens == 0:
            return np.zeros((0, G.dim), dtype=np.int64)
        return np.vstack([(g - I) % q for g in G.generators])

    def expand(self, z: np.ndarray) -> Cocycle:
        z = np.asarray(z, dtype=np.int64).reshape(self.width)
        return Cocycle(self.group, (self.C @ z) % self.mod.q)

    def local_rows(self, sigmas) -> np.ndarray:
        G, q = self.group, self.mod.q
        I = np.eye(G.dim, dtype=np.int64)
        rows = []
        for s in sigmas:
            K = zq.annihilator((G.elements[s] - I) % q, self.mod)
            R = (K @ self.C[s]) % q
            R = R[R.any(axis=1)]
            if R.shape[0]:
                rows.append(R)
        if not rows:
            return np.zeros((0, self.width), dtype=np.int64)
        return zq.howell(np.vstack(rows), self.mod).basis


def frame(G: MatrixGroup) -> CocycleFrame:
    fr = getattr(G, "_cocycle_frame", None)
    if fr is None:
        fr = CocycleFrame(G)
        G._cocycle_frame = fr
    return fr


def _check_module(G: MatrixGroup, M) -> None:
    if M is not None and getattr(M, "group", G) is not G:
        raise ValueError("module is defined for a different group")


def conjugacy_class_representatives(G: MatrixGroup) -> np.ndarray:
    """Smallest index in each conjugacy class of ``G``."""
    N, q = G.order, G.modulus.q
    inv = G.inverse_indices()
    maps = []
    for j, g in enumerate(G.generators):
        gi = G.elements[inv[G.rmul[0, j]]]
        maps.append(G.indices_of((g[None] @ G.elements @ gi[None]) % q))
    labels = np.arange(N)
    changed = True
    while changed:
        old = labels
        for m in maps:
            low = np.minimum(labels, labels[m])
            np.minimum.at(low, m, low)
            labels = np.minimum(low, low[m])
        labels = labels[labels]
        changed = not np.array_equal(labels, old)
    return np.unique(labels)


def cocycle_space(G: MatrixGroup, M=None) -> np.ndarray:
    """Generators of Z^1(G, M) in generator coordinates (one per row)."""
    _check_module(G, M)
    if G.ngens == 0:
        return np.zeros((0, 0), dtype=np.int64)
    return frame(G).z1()


def coboundaries(G: MatrixGroup, M=None) -> np.ndarray:
    """Generators of B^1(G, M) in generator coordinates (one per column)."""
    _check_module(G, M)
    return frame(G).b1()


def _presented(fr: CocycleFrame, sub_cols: np.ndarray, amb_rows: np.ndarray) -> CohomologyGroup:
    width = fr.width
    amb = amb_rows.T if amb_rows.shape[0] else np.zeros((width, 0), dtype=np.int64)
    if amb.shape[1] == 0:
        return CohomologyGroup([])
    factors, reps = zq.quotient_invariants(sub_cols, amb, fr.mod)
    return CohomologyGroup(factors, [fr.expand(r) for r in reps], [np.asarray(r) for r in reps])


def h1(G: MatrixGroup, M=None) -> CohomologyGroup:
    """H^1(G, M) = Z^1 / B^1."""
    _check_module(G, M)
    if G.ngens == 0:
        return CohomologyGroup([])
    fr = frame(G)
    return _presented(fr, fr.b1(), fr.z1())


def local_cocycles(G: MatrixGroup, M=None, conditions: str = "classes") -> np.ndarray:
    """Generators of the cocycles satisfying the local conditions.

    ``conditions="elements"`` imposes ``Z_sigma in Im(sigma - 1)`` for every
    element.  The default imposes it on one element per conjugacy class,
    which cuts out the same module: if ``Z_s = (s - 1)A`` then
    ``Z_{t s t^-1} = (t s t^-1 - 1)(t A) + (1 - t s t^-1) Z_t``.
    """
    _check_module(G, M)
    if G.ngens == 0:
        return np.zeros((0, 0), dtype=np.int64)
    fr = frame(G)
    if conditions == "elements":
        sigmas = range(1, G.order)
    elif conditions == "classes":
        sigmas = [s for s in conjugacy_class_representatives(G) if s != 0]
    else:
        raise ValueError(f"unknown conditions mode {conditions!r}")
    loc = fr.local_rows(sigmas)
    rows = np.vstack([fr._constraint_matrix(), loc])
    return zq.kernel(rows, fr.mod)


def h1loc(G: MatrixGroup, M=None, conditions: str = "classes") -> CohomologyGroup:
    """Local cocycles modulo coboundaries; trivial iff the local group vanishes."""
    if G.ngens == 0:
        return CohomologyGroup([])
    fr = frame(G)
    return _presented(fr, fr.b1(), local_cocycles(G, M, conditions))


def _restrict_lattice(fr: CocycleFrame, reps: np.ndarray, L: np.ndarray,
                      idx: np.ndarray) -> np.ndarray:
    """Sub-lattice of ``L`` whose combinations of ``reps`` restrict to coboundaries on ``idx``.

    ``reps`` has one generator-coordinate cocycle per column, ``L`` one
    coefficient vector per row.  The restriction of ``sum a_i reps_i`` to the
    elements ``idx`` is a coboundary iff it equals ``(h - 1)A`` for one ``A``.
    """
    G, q, n = fr.group, fr.mod.q, fr.group.dim
    if L.shape[0] == 0:
        return L
    I = np.eye(n, dtype=np.int64)
    W = (fr.C[idx] @ reps) % q
    W = W.reshape(-1, reps.shape[1])
    T = (W @ L.T) % q
    D = ((G.elements[idx] - I) % q).reshape(-1, n)
    K = zq.kernel(np.hstack([T, (-D) % q]), fr.mod)
    if K.shape[0] == 0:
        return np.zeros((0, L.shape[1]), dtype=np.int64)
    t = K[:, :L.shape[0]]
    new = (t @ L) % q
    new = new[new.any(axis=1)]
    if new.shape[0] == 0:
        return np.zeros((0, L.shape[1]), dtype=np.int64)
    return zq.howell(new, fr.mod).basis


def restriction_kernel(G: MatrixGroup, H: CohomologyGroup, subgroup_indices) -> list:
    """Invariant factors of the kernel of restricting the classes of ``H``.

    ``H`` must be a presentation computed for ``G`` (e.g. by :func:`h1` or
    :func:`h1loc`).  An empty result means restriction is injective on ``H``.
    """
    if H.is_trivial():
        return []
    fr = frame(G)
    mod = fr.mod
    k = len(H.invariants)
    reps = np.array(H.coordinates, dtype=np.int64).T
    L = np.eye(k, dtype=np.int64)
    L = _restrict_lattice(fr, reps, L, np.asarray(subgroup_indices, dtype=np.int64))
    return _class_quotient(H, L, mod)


def _class_quotient(H: CohomologyGroup, L: np.ndarray, mod: Modulus) -> list:
    k = len(H.invariants)
    sub = np.diag([d % mod.q for d in H.invariants]).astype(np.int64)
    amb = np.hstack([L.T, sub]) if L.shape[0] else sub
    return zq.quotient_invariants(sub, amb, mod)[0]


def h1loc_cyclic_oracle(G: MatrixGroup, M=None, subgroups=None) -> CohomologyGroup:
    """Intersection over all cyclic subgroups of the kernels of restriction."""
    _check_module(G, M)
    H = h1(G)
    if H.is_trivial():
        return CohomologyGroup([])
    fr = frame(G)
    mod = fr.mod
    k = len(H.invariants)
    reps = np.array(H.coordinates, dtype=np.int64).T
    L = np.eye(k, dtype=np.int64)
    for C in subgroups if subgroups is not None else cyclic_subgroups(G):
        if C.order == 1:
            continue
        L = _restrict_lattice(fr, reps, L, C.indices)
        if L.shape[0] == 0:
            break
    sub = np.diag([d % mod.q for d in H.invariants]).astype(np.int64)
    amb = np.hstack([L.T, sub]) if L.shape[0] else sub
    factors, coeffs = zq.quotient_invariants(sub, amb, mod)
    zs = [(reps @ c) % mod.q for c in coeffs]
    return CohomologyGroup(factors, [fr.expand(z) for z in zs], zs)


def restriction(c: Cocycle, H) -> Cocycle:
    """Restrict ``c`` to a subgroup, re-indexed by the subgroup's own enumeration."""
    if isinstance(H, Subgroup):
        if H.parent is not c.group:
            raise ValueError("subgroup belongs to a different group")
        HG = H.as_group()
    else:
        HG = H
    idx = c.group.indices_of(HG.elements)
    if (idx < 0).any():
        raise ValueError("restriction target is not contained in the cocycle's group")
    return Cocycle(HG, c.values[idx])


def is_coboundary(c: Cocycle, G: Optional[MatrixGroup] = None, M=None) -> Optional[np.ndarray]:
    """Some ``A`` with ``Z_sigma = (sigma - 1) A`` for every sigma, else ``None``."""
    G = c.group if G is None else G
    mod, n = G.modulus, G.dim
    q = mod.q
    I = np.eye(n, dtype=np.int64)
    if G.ngens == 0:
        return np.zeros(n, dtype=np.int64) if not c.values.any() else None
    gi = G.generator_indices()
    D = np.vstack([(G.elements[i] - I) % q for i in gi])
    rhs = np.concatenate([c.values[i] for i in gi])
    A = zq.solve(D, rhs, mod)
    if A is None:
        return None
    if not np.array_equal(((G.elements - I) @ A) % q, c.values):
        return None
    return A


def coboundary_of(G: MatrixGroup, A) -> Cocycle:
    A = np.asarray(A, dtype=np.int64)
    I = np.eye(G.dim, dtype=np.int64)
    return Cocycle(G, (G.elements - I) @ A)


def class_is_zero(c: Cocycle) -> bool:
    return is_coboundary(c) is not None


def report_fragment(G: MatrixGroup, oracle: bool = False, witness: bool = True) -> dict:
    H = h1(G)
    L = h1loc_cyclic_oracle(G) if oracle else h1loc(G)
    out = {"h1": H.invariants, "h1loc": L.invariants, "witness_cocycle": None}
    if witness and L.representatives:
        out["witness_cocycle"] = L.representatives[-1].to_json()
    return out
