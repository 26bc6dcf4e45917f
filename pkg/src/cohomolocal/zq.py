"""Exact linear algebra over the local ring Z/p^lZ.

Matrices are plain ``numpy`` int64 arrays whose entries are kept reduced into
``[0, q)``; a :class:`Modulus` travels alongside them.  Every routine here is a
pure function of its arguments.

Reduction uses valuation pivoting: in each column the entry of smallest
p-adic valuation is chosen, scaled to an exact power of p by a unit, and used
to clear the column.  Because Z/p^lZ is local every other entry is divisible
by the pivot, so no gcd machinery is needed.  Saturating each pivot row by
``p^(l - v)`` gives the Howell property, which is what makes greedy reduction
a complete membership test.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

DEFAULT_MODULUS_CAP = 1 << 20
_CHUNK_ROWS = 1 << 15


class DimensionError(ValueError):
    """Operand shapes do not fit together."""


class ContainmentError(ValueError):
    """A submodule that should lie inside another one does not."""


def is_prime(n: int) -> bool:
    """Deterministic trial division; adequate for ``n < 2**31``."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class Modulus:
    """The ring Z/qZ with ``q = p**l``."""

    p: int
    l: int = 1
    q: int = field(init=False)

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or not is_prime(int(self.p)):
            raise ValueError(f"p={self.p} is not prime")
        if self.l < 1:
            raise ValueError(f"exponent l={self.l} must be positive")
        q = int(self.p) ** int(self.l)
        cap = int(os.environ.get("COHOM_MODULUS_CAP", DEFAULT_MODULUS_CAP))
        if q > cap:
            raise ValueError(f"q={q} exceeds the modulus cap {cap}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "q", q)

    @classmethod
    def from_q(cls, q: int) -> "Modulus":
        for p in range(2, q + 1):
            if q % p == 0:
                l, r = 0, q
                while r % p == 0:
                    r //= p
                    l += 1
                if r != 1:
                    raise ValueError(f"q={q} is not a prime power")
                return cls(p, l)
        raise ValueError(f"q={q} is not a prime power")

    def is_unit(self, a: int) -> bool:
        return int(a) % self.p != 0

    def inverse(self, a: int) -> int:
        return pow(int(a) % self.q, -1, self.q)

    def valuation(self, a: int) -> int:
        """p-adic valuation of ``a`` in Z/qZ; zero has valuation ``l``."""
        return int(valuation_table(self.p, self.l)[int(a) % self.q])

    def __repr__(self):
        return f"Modulus(p={self.p}, l={self.l})"


@functools.lru_cache(maxsize=32)
def valuation_table(p: int, l: int) -> np.ndarray:
    q = p**l
    table = np.zeros(q, dtype=np.int8)
    table[0] = l
    step = p
    for v in range(1, l):
        table[step::step] = v
        step *= p
    return table


@functools.lru_cache(maxsize=32)
def _unit_inverse_table(p: int, l: int) -> np.ndarray:
    q = p**l
    inv = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        if a % p:
            inv[a] = pow(a, -1, q)
    return inv


def as_matrix(data, mod: Modulus, shape: Optional[tuple] = None) -> np.ndarray:
    """Coerce ``data`` to a reduced 2-D int64 array."""
    A = np.array(data, dtype=np.int64)
    if shape is not None:
        A = A.reshape(shape)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {A.shape}")
    return A % mod.q


def as_vector(data, mod: Modulus) -> np.ndarray:
    v = np.array(data, dtype=np.int64).reshape(-1)
    return v % mod.q


def matmul(A: np.ndarray, B: np.ndarray, mod: Modulus) -> np.ndarray:
    if A.shape[-1] != B.shape[-2 if B.ndim > 1 else 0]:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    return (A @ B) % mod.q


@dataclass(frozen=True, eq=False)
class HowellForm:
    """Canonical generators of a row module.

    ``basis`` has one row per pivot; ``pivots`` lists ``(column, valuation)``
    with the pivot entry equal to ``p**valuation``.  Entries above a pivot are
    reduced into ``[0, p**valuation)``.
    """

    basis: np.ndarray
    pivots: tuple
    modulus: Modulus
    ncols: int

    def __eq__(self, other):
        if not isinstance(other, HowellForm):
            return NotImplemented
        return (
            self.modulus == other.modulus
            and self.ncols == other.ncols
            and self.pivots == other.pivots
            and np.array_equal(self.basis, other.basis)
        )

    def __hash__(self):
        return hash((self.modulus, self.ncols, self.pivots, self.basis.tobytes()))

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def order(self) -> int:
        """Number of elements of the row module."""
        return self.modulus.p ** self.log_order()

    def log_order(self) -> int:
        """``log_p`` of :meth:`order`."""
        return sum(self.modulus.l - v for _, v in self.pivots)

    def key(self) -> tuple:
        return (self.pivots, self.basis.tobytes())

    def reduce(self, X: np.ndarray) -> np.ndarray:
        """Greedy reduction of the rows of ``X``; zero rows remain iff members."""
        mod = self.modulus
        X = np.array(X, dtype=np.int64, copy=True) % mod.q
        squeeze = X.ndim == 1
        if squeeze:
            X = X.reshape(1, -1)
        if X.shape[1] != self.ncols:
            raise DimensionError(f"vector length {X.shape[1]} != {self.ncols}")
        for row, (j, v) in zip(self.basis, self.pivots):
            f = X[:, j] // (mod.p**v)
            X = (X - f[:, None] * row[None, :]) % mod.q
        return X[0] if squeeze else X

    def contains(self, X: np.ndarray) -> np.ndarray:
        R = self.reduce(X)
        if R.ndim == 1:
            return bool(not R.any())
        return ~R.any(axis=1)

    def elements(self) -> np.ndarray:
        """Enumerate the module; only sensible for small modules."""
        p, l, q = self.modulus.p, self.modulus.l, self.modulus.q
        out = np.zeros((1, self.ncols), dtype=np.int64)
        for row, (_, v) in zip(self.basis, self.pivots):
            coeffs = np.arange(p ** (l - v), dtype=np.int64)
            out = (out[:, None, :] + coeffs[None, :, None] * row[None, None, :]).reshape(-1, self.ncols) % q
        return out


def _eliminate(W: np.ndarray, mod: Modulus, start_col: int = 0):
    """Valuation-pivoted echelon of the rows of ``W`` (modified copy).

    Returns the pivot rows and ``(column, valuation)`` pairs; the Howell
    property holds but the rows are not yet back-reduced.
    """
    p, l, q = mod.p, mod.l, mod.q
    vt = valuation_table(p, l)
    inv = _unit_inverse_table(p, l)
    rows, pivots = [], []
    ncols = W.shape[1]
    W = W[W.any(axis=1)]
    for j in range(start_col, ncols):
        if W.shape[0] == 0:
            break
        col = W[:, j]
        vals = vt[col]
        i = int(np.argmin(vals))
        v = int(vals[i])
        if v >= l:
            continue
        pv = p**v
        r = (W[i] * inv[col[i] // pv]) % q
        W = np.delete(W, i, axis=0)
        if W.shape[0]:
            f = W[:, j] // pv
            nz = f != 0
            if nz.any():
                W[nz] = (W[nz] - f[nz, None] * r[None, :]) % q
        if v > 0:
            sat = (r * (p ** (l - v))) % q
            if sat.any():
                W = np.vstack([W, sat[None, :]])
        W = W[W.any(axis=1)]
        rows.append(r)
        pivots.append((j, v))
    return rows, pivots


def _back_reduce(rows, pivots, mod: Modulus) -> np.ndarray:
    p, q = mod.p, mod.q
    B = np.array(rows, dtype=np.int64).reshape(len(rows), -1)
    for i, (j, v) in enumerate(pivots):
        pv = p**v
        for k in range(i):
            f = B[k, j] // pv
            if f:
                B[k] = (B[k] - f * B[i]) % q
    return B


def howell(A, mod: Modulus) -> HowellForm:
    """Canonical Howell basis of the row module of ``A``.

    Tall inputs are absorbed in chunks so that memory stays proportional to
    the chunk size rather than the number of rows.
    """
    A = np.asarray(A, dtype=np.int64)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    ncols = A.shape[1]
    A = A % mod.q
    rows: list = []
    pivots: list = []
    for start in range(0, max(A.shape[0], 1), _CHUNK_ROWS):
        chunk = A[start:start + _CHUNK_ROWS]
        if rows:
            chunk = np.vstack([np.array(rows, dtype=np.int64), chunk])
        rows, pivots = _eliminate(chunk, mod)
    basis = _back_reduce(rows, pivots, mod) if rows else np.zeros((0, ncols), dtype=np.int64)
    return HowellForm(basis.reshape(len(pivots), ncols), tuple(pivots), mod, ncols)


def row_module_order(A, mod: Modulus) -> int:
    return howell(A, mod).order()


def column_module(B, mod: Modulus) -> HowellForm:
    """Howell form of the column module of ``B`` (as rows of ``B.T``)."""
    B = np.asarray(B, dtype=np.int64)
    return howell(B.T, mod)


def kernel(A, mod: Modulus) -> np.ndarray:
    """Rows generating ``{x : A x = 0}`` in canonical Howell form."""
    A = np.asarray(A, dtype=np.int64) % mod.q
    if A.ndim == 1:
        A = A.reshape(1, -1)
    m = A.shape[1]
    H = howell(A, mod).basis
    r = H.shape[0]
    aug = np.hstack([H.T, np.eye(m, dtype=np.int64)])
    rows, pivots = _eliminate(aug, mod)
    tails = [row[r:] for row, (j, _) in zip(rows, pivots) if j >= r]
    if not tails:
        return np.zeros((0, m), dtype=np.int64)
    return howell(np.array(tails), mod).basis


def solve(A, b, mod: Modulus) -> Optional[np.ndarray]:
    """Some ``x`` with ``A x = b``, or ``None`` when the system is inconsistent."""
    A = np.asarray(A, dtype=np.int64) % mod.q
    if A.ndim == 1:
        A = A.reshape(1, -1)
    b = as_vector(b, mod)
    if b.shape[0] != A.shape[0]:
        raise DimensionError(f"right-hand side has length {b.shape[0]}, expected {A.shape[0]}")
    K = kernel(np.hstack([b[:, None], A]), mod)
    # the first coordinate of kernel vectors ranges over an ideal; a unit there
    # means (1, -x) is in the kernel after scaling
    if K.shape[0] == 0:
        return None
    H = howell(K, mod)
    j, v = H.pivots[0]
    if j != 0 or v != 0:
        return None
    x = (-H.basis[0, 1:]) % mod.q
    return x


def membership(B, x, mod: Modulus) -> bool:
    """Whether ``x`` lies in the column module of ``B``."""
    B = np.asarray(B, dtype=np.int64)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    x = as_vector(x, mod)
    if x.shape[0] != B.shape[0]:
        raise DimensionError(f"vector length {x.shape[0]} != {B.shape[0]} rows")
    return bool(column_module(B, mod).contains(x))


def annihilator(B, mod: Modulus) -> np.ndarray:
    """Matrix ``K`` with ``{x : K x = 0}`` equal to the column module of ``B``.

    Z/qZ is self-injective, so a submodule is recovered from the module of
    linear forms vanishing on it.
    """
    B = np.asarray(B, dtype=np.int64) % mod.q
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    K = kernel(B.T, mod)
    if K.shape[0] == 0:
        return np.zeros((1, B.shape[0]), dtype=np.int64)
    return K


def smith(N, mod: Modulus):
    """Smith form over Z/p^lZ.

    Returns ``(valuations, V)`` where ``V`` is an invertible column transform
    such that the columns of ``N @ V`` are ``p**v_i * u_i`` for independent
    ``u_i`` (and zero beyond ``len(valuations)``).
    """
    p, l, q = mod.p, mod.l, mod.q
    vt = valuation_table(p, l)
    inv = _unit_inverse_table(p, l)
    D = np.array(N, dtype=np.int64) % q
    if D.ndim == 1:
        D = D.reshape(-1, 1)
    r, c = D.shape
    V = np.eye(c, dtype=np.int64)
    vals_out = []
    for t in range(min(r, c)):
        sub = vt[D[t:, t:]]
        flat = int(np.argmin(sub))
        i, j = divmod(flat, c - t)
        v = int(sub[i, j])
        if v >= l:
            break
        i += t
        j += t
        D[[t, i]] = D[[i, t]]
        D[:, [t, j]] = D[:, [j, t]]
        V[:, [t, j]] = V[:, [j, t]]
        pv = p**v
        D[t] = (D[t] * inv[D[t, t] // pv]) % q
        f = D[:, t] // pv
        f[t] = 0
        D = (D - f[:, None] * D[t][None, :]) % q
        g = D[t] // pv
        g[t] = 0
        D = (D - D[:, t][:, None] * g[None, :]) % q
        V = (V - V[:, t][:, None] * g[None, :]) % q
        vals_out.append(v)
    return vals_out, V


def quotient_invariants(sub, amb, mod: Modulus, check: bool = True):
    """Invariant factors of ``colspace(amb) / colspace(sub)``.

    Returns ``(factors, reps)`` with ``factors`` ascending powers of p (empty
    for a trivial quotient) and ``reps`` the matching generator columns, each
    an element of ``colspace(amb)`` of the stated order in the quotient.
    """
    sub = np.asarray(sub, dtype=np.int64) % mod.q
    amb = np.asarray(amb, dtype=np.int64) % mod.q
    if sub.ndim == 1:
        sub = sub.reshape(-1, 1)
    if amb.ndim == 1:
        amb = amb.reshape(-1, 1)
    if sub.shape[0] != amb.shape[0]:
        raise DimensionError("sub and amb live in different ambient modules")
    if check and sub.shape[1]:
        H = column_module(amb, mod)
        if not H.contains(sub.T).all():
            raise ContainmentError("submodule is not contained in the ambient module")
    K = annihilator(sub, mod) if sub.shape[1] else np.eye(sub.shape[0], dtype=np.int64)
    vals, V = smith(K @ amb % mod.q, mod)
    AV = amb @ V % mod.q
    pairs = sorted(
        ((mod.p ** (mod.l - v), AV[:, i]) for i, v in enumerate(vals)),
        key=lambda t: t[0],
    )
    return [d for d, _ in pairs], [rep for _, rep in pairs]


def invariants_of(sub, amb, mod: Modulus) -> list:
    return quotient_invariants(sub, amb, mod)[0]


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def det_mod(A: np.ndarray, mod: Modulus) -> int:
    """Determinant mod q by fraction-free expansion over the integers."""
    A = [[int(x) for x in row] for row in np.asarray(A)]
    n = len(A)
    if n == 0:
        return 1 % mod.q
    # Bareiss keeps every intermediate an exact integer
    sign = 1
    prev = 1
    M = [row[:] for row in A]
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return (sign * M[n - 1][n - 1]) % mod.q


def is_invertible(A: np.ndarray, mod: Modulus) -> bool:
    return mod.is_unit(det_mod(A, mod))


def inverse(A: np.ndarray, mod: Modulus) -> np.ndarray:
    n = A.shape[0]
    cols = []
    for i in range(n):
        e = np.zeros(n, dtype=np.int64)
        e[i] = 1
        x = solve(A, e, mod)
        if x is None:
            raise ValueError("matrix is not invertible")
        cols.append(x)
    return np.array(cols, dtype=np.int64).T % mod.q


def stack_columns(vectors: Sequence[np.ndarray], length: int) -> np.ndarray:
    if not len(vectors):
        return np.zeros((length, 0), dtype=np.int64)
    return np.array(vectors, dtype=np.int64).reshape(len(vectors), length).T
