"""Structure of M = (Z/qZ)^n as a module over a matrix group.

Irreducibility (only meaningful over a field) is decided by spinning every
projective point.  Decomposability uses Fitting's lemma: for an endomorphism
``f`` commuting with the group, ``M = ker f^N + im f^N`` with both summands
invariant once ``N`` reaches the composition length, so ``M`` splits iff some
endomorphism is neither nilpotent nor invertible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import zq
from .cohomology import BudgetExceeded
from .groups import MatrixGroup
from .zq import Modulus

IRREDUCIBLE = "Irreducible"
REDUCIBLE_INDECOMPOSABLE = "ReducibleIndecomposable"
DECOMPOSABLE = "Decomposable"

ENDOMORPHISM_BUDGET = 10**6
LATTICE_BUDGET = 20_000
SPIN_POINT_LIMIT = 10**6


@dataclass(frozen=True, eq=False)
class GModule:
    """``(Z/qZ)^rank`` with ``group`` acting by matrix-vector product."""

    group: MatrixGroup

    @property
    def modulus(self) -> Modulus:
        return self.group.modulus

    @property
    def rank(self) -> int:
        return self.group.dim

    def order(self) -> int:
        return self.modulus.q ** self.rank


@dataclass
class StructureVerdict:
    kind: str
    witnesses: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            return v
        return {"kind": self.kind, "witnesses": {k: enc(v) for k, v in self.witnesses.items()},
                "flags": list(self.flags)}


def _as_module(M) -> GModule:
    return M if isinstance(M, GModule) else GModule(M)


def _act_rows(X: np.ndarray, gens, q: int) -> list:
    return [(X @ g.T) % q for g in gens]


def submodule_closure(M, rows) -> zq.HowellForm:
    """Smallest invariant submodule containing the given row vectors."""
    M = _as_module(M)
    mod, gens = M.modulus, M.group.generators
    H = zq.howell(np.asarray(rows, dtype=np.int64).reshape(-1, M.rank), mod)
    while True:
        if H.rank == 0:
            return H
        grown = zq.howell(np.vstack([H.basis] + _act_rows(H.basis, gens, mod.q)), mod)
        if grown.log_order() == H.log_order():
            return H
        H = grown


def spin(M, v) -> np.ndarray:
    """Rows generating the invariant submodule spanned by ``v``."""
    return submodule_closure(M, np.asarray(v, dtype=np.int64).reshape(1, -1)).basis


def is_invariant(M, rows) -> bool:
    M = _as_module(M)
    H = zq.howell(np.asarray(rows, dtype=np.int64).reshape(-1, M.rank), M.modulus)
    if H.rank == 0:
        return True
    return all(H.contains(X).all() for X in _act_rows(H.basis, M.group.generators, M.modulus.q))


def _projective_points(p: int, n: int):
    for lead in range(n):
        for tail in itertools.product(range(p), repeat=n - lead - 1):
            v = np.zeros(n, dtype=np.int64)
            v[lead] = 1
            v[lead + 1:] = tail
            yield v


def proper_invariant_submodule(M) -> Optional[np.ndarray]:
    """Over a field: a proper nonzero invariant subspace, or ``None``."""
    M = _as_module(M)
    mod, n = M.modulus, M.rank
    if mod.l != 1:
        raise ValueError("spinning search is only complete over a field")
    if (mod.p ** n) > SPIN_POINT_LIMIT:
        raise BudgetExceeded(f"{mod.p}^{n} points exceeds the spinning budget")
    for v in _projective_points(mod.p, n):
        H = submodule_closure(M, v[None, :])
        if H.log_order() < n:
            return H.basis
    return None


def endomorphism_algebra(M) -> list:
    """Module generators of ``{X : X g = g X}`` for all generators g."""
    M = _as_module(M)
    mod, n, q = M.modulus, M.rank, M.modulus.q
    I = np.eye(n, dtype=np.int64)
    blocks = [(np.kron(I, g.T) - np.kron(g, I)) % q for g in M.group.generators]
    if not blocks:
        blocks = [np.zeros((1, n * n), dtype=np.int64)]
    K = zq.kernel(np.vstack(blocks), mod)
    return [row.reshape(n, n) for row in K]


def _power_at_least(X: np.ndarray, N: int, q: int) -> np.ndarray:
    P = X % q
    e = 1
    while e < N:
        P = (P @ P) % q
        e *= 2
    return P


def _batch_full_rank_mod_p(A: np.ndarray, p: int) -> np.ndarray:
    """Which matrices in the stack ``A`` are invertible mod p."""
    A = A % p
    B, n, _ = A.shape
    ok = np.ones(B, dtype=bool)
    inv = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        inv[a] = pow(a, -1, p)
    ar = np.arange(B)
    for c in range(n):
        nz = A[:, c:, c] != 0
        has = nz.any(axis=1)
        ok &= has
        r = np.argmax(nz, axis=1) + c
        rows_c = A[ar, c].copy()
        A[ar, c] = A[ar, r]
        A[ar, r] = rows_c
        piv = A[:, c, c]
        A[:, c] = (A[:, c] * inv[piv][:, None]) % p
        f = A[:, c + 1:, c].copy()
        A[:, c + 1:] = (A[:, c + 1:] - f[:, :, None] * A[:, c][:, None, :]) % p
    return ok


def _fitting_split(M: GModule, X: np.ndarray):
    """``(image, kernel)`` of ``X^N`` when both are proper, else ``None``."""
    mod, n = M.modulus, M.rank
    P = _power_at_least(X, n * mod.l, mod.q)
    if not P.any():
        return None
    img = zq.column_module(P, mod)
    if img.log_order() == n * mod.l:
        return None
    ker = zq.kernel(P, mod)
    return img.basis, ker


def _decomposition_witness(M: GModule, U: np.ndarray, W: np.ndarray) -> dict:
    mod = M.modulus
    return {"U": zq.howell(U, mod).basis, "W": zq.howell(W, mod).basis}


def check_decomposition(M, U, W) -> bool:
    """``U + W = M``, ``U`` meets ``W`` trivially, both invariant and nonzero."""
    M = _as_module(M)
    mod, n = M.modulus, M.rank
    hu = zq.howell(U, mod)
    hw = zq.howell(W, mod)
    if hu.rank == 0 or hw.rank == 0:
        return False
    total = zq.howell(np.vstack([hu.basis, hw.basis]), mod)
    return (
        is_invariant(M, hu.basis)
        and is_invariant(M, hw.basis)
        and hu.log_order() + hw.log_order() == n * mod.l
        and total.log_order() == n * mod.l
    )


def _quick_split(M: GModule, basis: list):
    cands = list(basis)
    cands += [(a + b) % M.modulus.q for a, b in itertools.combinations(basis, 2)]
    for X in cands:
        s = _fitting_split(M, X)
        if s is not None:
            return s
    return None


def _endomorphism_elements(basis_rows: zq.HowellForm, chunk: int = 20000):
    """Yield stacks of all elements of the module spanned by ``basis_rows``."""
    mod = basis_rows.modulus
    p, l, q = mod.p, mod.l, mod.q
    radices = [p ** (l - v) for _, v in basis_rows.pivots]
    B = basis_rows.basis
    total = 1
    for r in radices:
        total *= r
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        coeffs = np.empty((idx.size, len(radices)), dtype=np.int64)
        rem = idx.copy()
        for i, r in enumerate(radices):
            coeffs[:, i] = rem % r
            rem //= r
        yield (coeffs @ B) % q


def _exhaustive_split(M: GModule, E: zq.HowellForm):
    mod, n = M.modulus, M.rank
    N = n * mod.l
    for stack in _endomorphism_elements(E):
        X = stack.reshape(-1, n, n)
        P = X.copy()
        e = 1
        while e < N:
            P = (P @ P) % mod.q
            e *= 2
        nonzero = P.reshape(len(P), -1).any(axis=1)
        singular = ~_batch_full_rank_mod_p(P.copy(), mod.p)
        hits = np.nonzero(nonzero & singular)[0]
        if hits.size:
            return _fitting_split(M, X[hits[0]])
    return None


def invariant_subspace_lattice(M, budget: int = LATTICE_BUDGET) -> list:
    """All invariant subspaces over a field, as Howell forms."""
    M = _as_module(M)
    mod, n = M.modulus, M.rank
    if mod.l != 1:
        raise ValueError("lattice enumeration is only implemented over a field")
    found = {}
    zero = zq.howell(np.zeros((1, n), dtype=np.int64), mod)
    found[zero.key()] = zero
    cyclic = {}
    for v in _projective_points(mod.p, n):
        H = submodule_closure(M, v[None, :])
        cyclic[H.key()] = H
    found.update(cyclic)
    queue = list(cyclic.values())
    work = 0
    while queue:
        H = queue.pop()
        for C in cyclic.values():
            work += 1
            if work > budget:
                raise BudgetExceeded("invariant subspace lattice exceeded its budget")
            S = zq.howell(np.vstack([H.basis, C.basis]), mod)
            if S.key() not in found:
                found[S.key()] = S
                queue.append(S)
    return sorted(found.values(), key=lambda h: (h.rank, h.key()))


def _lattice_split(M: GModule):
    mod, n = M.modulus, M.rank
    lat = invariant_subspace_lattice(M)
    by_dim: dict = {}
    for H in lat:
        by_dim.setdefault(H.rank, []).append(H)
    for d in range(1, n // 2 + 1):
        for U in by_dim.get(d, []):
            for W in by_dim.get(n - d, []):
                if zq.howell(np.vstack([U.basis, W.basis]), mod).rank == n:
                    return U.basis, W.basis
    return None


def find_decomposition(M, budget: int = ENDOMORPHISM_BUDGET):
    """A pair of complementary invariant submodules, or ``None``.

    Raises :class:`BudgetExceeded` if neither the exhaustive endomorphism
    search nor (over a field) the lattice search fits the budget.
    """
    M = _as_module(M)
    mod = M.modulus
    if M.rank < 2 and mod.l == 1:
        return None
    basis = endomorphism_algebra(M)
    split = _quick_split(M, basis)
    if split is not None:
        return split
    E = zq.howell(np.array([b.reshape(-1) for b in basis]), mod)
    if E.order() <= budget:
        return _exhaustive_split(M, E)
    if mod.l == 1:
        return _lattice_split(M)
    raise BudgetExceeded(f"endomorphism algebra of order {E.order()} exceeds budget {budget}")


def structure(M) -> StructureVerdict:
    """Classify ``M`` as irreducible, decomposable or reducible-indecomposable."""
    M = _as_module(M)
    mod, n = M.modulus, M.rank
    if mod.l == 1:
        sub = proper_invariant_submodule(M)
        if sub is None:
            return StructureVerdict(IRREDUCIBLE, {})
        witness = {"submodule": sub}
    else:
        witness = {"submodule": zq.howell(np.eye(n, dtype=np.int64) * mod.p, mod).basis}
    split = find_decomposition(M)
    if split is not None:
        U, W = split
        return StructureVerdict(DECOMPOSABLE, _decomposition_witness(M, U, W))
    flags = [] if mod.l == 1 else ["reducible because pM is a proper submodule; irreducibility is not tested for l > 1"]
    return StructureVerdict(REDUCIBLE_INDECOMPOSABLE, witness, flags)


def restricted_action(M, rows) -> Optional[MatrixGroup]:
    """The group acting on a free invariant summand, in the basis ``rows``.

    Returns ``None`` if the submodule is not free.
    """
    from .groups import closure
    M = _as_module(M)
    mod = M.modulus
    H = zq.howell(rows, mod)
    if any(v for _, v in H.pivots):
        return None
    B = H.basis
    gens = []
    for g in M.group.generators:
        imgs = (B @ g.T) % mod.q
        coords = []
        for v in imgs:
            x = zq.solve(B.T, v, mod)
            coords.append(x)
        gens.append(np.array(coords, dtype=np.int64).T % mod.q)
    return closure(gens, mod, B.shape[0], element_cap=M.group.order)


def indecomposable_summands(M) -> list:
    """Recursively split ``M``; returns the summands as row bases of M.

    Summands that are not free (possible when l > 1) are not split further.
    """
    M = _as_module(M)
    split = find_decomposition(M)
    if split is None:
        return [np.eye(M.rank, dtype=np.int64)]
    out = []
    for part in split:
        sub = restricted_action(M, part)
        if sub is None:
            out.append(part)
            continue
        basis = zq.howell(part, M.modulus).basis
        for piece in indecomposable_summands(GModule(sub)):
            out.append((piece @ basis) % M.modulus.q)
    return out
