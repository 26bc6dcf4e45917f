"""Verification campaigns: seeded instance generation, evaluation and reports.

Instances are generated in the parent process from a seeded RNG, evaluated
independently (optionally in a process pool) and merged sorted by canonical
key, so a fixed spec gives a byte-identical report regardless of ``jobs``.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import cohomology as co
from . import constructions as cons
from . import modules as md
from .groups import (
    CapExceeded,
    MatrixGroup,
    all_subgroups,
    closure,
    contains_scalar,
    from_spec,
    sylow,
    trivial_group,
)
from .zq import Modulus

log = logging.getLogger(__name__)

SCHEMA = "cohomolocal/1"

KINDS = (
    "OracleEquivalence",
    "PrimeCaseExhaustive",
    "CounterexampleSearch",
    "SylowLemma",
    "ScalarCriterion",
    "BlockLemma",
    "TensorLemma",
    "Theorem14Check",
)

FAMILIES = ("uniform", "unipotent", "monomial", "blockdiag", "parabolic", "cyclic")


class SpecError(ValueError):
    pass


@dataclass
class CampaignSpec:
    kind: str
    seed: int = 0
    samples: int = 0
    moduli: list = field(default_factory=lambda: [2, 3, 4, 5, 9])
    dims: list = field(default_factory=lambda: [1, 2, 3, 4])
    primes: list = field(default_factory=lambda: [2, 3, 5])
    n: int = 2
    p: int = 5
    l: int = 1
    max_order: int = 2000
    lattice_bound: int = 1000
    attempts: int = 60
    families: list = field(default_factory=lambda: list(FAMILIES))
    lattices: list = field(default_factory=list)
    expect_witness: bool = False
    include_catalog: bool = True
    timings: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise SpecError("campaign spec must be an object with a 'kind'")
        if d["kind"] not in KINDS:
            raise SpecError(f"unknown campaign kind {d['kind']!r}; expected one of {', '.join(KINDS)}")
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise SpecError(f"unknown campaign fields: {sorted(extra)}")
        spec = cls(**d)
        for f in spec.families:
            if f not in FAMILIES:
                raise SpecError(f"unknown sampling family {f!r}")
        return spec

    def to_dict(self) -> dict:
        return asdict(self)


# ----------------------------------------------------------------- sampling

def random_invertible(rng: np.random.Generator, n: int, mod: Modulus) -> np.ndarray:
    while True:
        g = rng.integers(0, mod.q, size=(n, n))
        if mod.is_unit(cons.zq.det_mod(g, mod)):
            return g.astype(np.int64)


def _fix_det(g: np.ndarray, mod: Modulus) -> np.ndarray:
    d = cons.zq.det_mod(g, mod)
    g = g.copy()
    g[0] = g[0] * mod.inverse(d) % mod.q
    return g


def _unipotent(rng, n, mod):
    U = np.triu(rng.integers(0, mod.q, size=(n, n)), 1)
    return (U + np.eye(n, dtype=np.int64)) % mod.q


def _monomial(rng, n, mod):
    units = [a for a in range(1, mod.q) if mod.is_unit(a)]
    perm = rng.permutation(n)
    d = rng.choice(units, size=n)
    return (cons.permutation_matrix(perm.tolist()) * d[None, :]) % mod.q


def _blockdiag(rng, n, mod, k):
    out = np.zeros((n, n), dtype=np.int64)
    out[:k, :k] = random_invertible(rng, k, mod)
    out[k:, k:] = random_invertible(rng, n - k, mod)
    return out


def _parabolic(rng, n, mod, k):
    g = _blockdiag(rng, n, mod, k)
    g[:k, k:] = rng.integers(0, mod.q, size=(k, n - k))
    return g


def _pair(rng, family: str, n: int, mod: Modulus) -> list:
    k = int(rng.integers(1, n)) if n > 1 else 1
    if family == "uniform":
        gens = [random_invertible(rng, n, mod) for _ in range(2)]
    elif family == "unipotent":
        gens = [_unipotent(rng, n, mod) for _ in range(2)]
    elif family == "monomial":
        gens = [_monomial(rng, n, mod) for _ in range(2)]
    elif family == "blockdiag" and n > 1:
        gens = [_blockdiag(rng, n, mod, k) for _ in range(2)]
    elif family == "parabolic" and n > 1:
        gens = [_parabolic(rng, n, mod, k) for _ in range(2)]
    else:
        g = random_invertible(rng, n, mod)
        gens = [g, np.linalg.matrix_power(g, int(rng.integers(2, 5))) % mod.q]
    if family != "uniform" and rng.random() < 0.5:
        P = random_invertible(rng, n, mod)
        Pi = cons.zq.inverse(P, mod)
        gens = [(P @ g @ Pi) % mod.q for g in gens]
    return gens


def sample_group(rng: np.random.Generator, n: int, mod: Modulus, max_order: int,
                 families=FAMILIES, special: bool = False, attempts: int = 60) -> Optional[MatrixGroup]:
    """A 2-generated group from a seeded structured family, or ``None``.

    Candidates whose closure exceeds ``max_order`` are rejected and redrawn.
    """
    for _ in range(attempts):
        family = families[int(rng.integers(len(families)))]
        gens = _pair(rng, family, n, mod)
        if special:
            gens = [_fix_det(g, mod) for g in gens]
        try:
            return closure(gens, mod, n, element_cap=max_order)
        except CapExceeded:
            continue
    return None


# ------------------------------------------------------------------ records

def canonical_key(spec: dict) -> list:
    q = spec["p"] ** spec.get("l", 1)
    gens = sorted(list(g) for g in spec["generators"])
    return [q, spec["n"], gens]


def _ints(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (list, tuple)):
        return [_ints(y) for y in x]
    if isinstance(x, dict):
        return {k: _ints(v) for k, v in x.items()}
    if isinstance(x, np.integer):
        return int(x)
    return x


def _generator_values(c: co.Cocycle) -> list:
    G = c.group
    return [c.values[i].tolist() for i in G.generator_indices()]


def _structure_json(G: MatrixGroup) -> dict:
    try:
        return _ints(md.structure(G).to_json())
    except co.BudgetExceeded as exc:
        return {"kind": None, "witnesses": {}, "flags": [f"budget exceeded: {exc}"]}


def _base_record(G: MatrixGroup, label: str, structure: bool = True) -> dict:
    spec = G.to_spec()
    rec = {
        "key": canonical_key(spec),
        "label": label,
        "order": G.order,
        "group": spec,
        "h1": co.h1(G).invariants,
    }
    if structure:
        rec["structure"] = _structure_json(G)
    return rec


# ------------------------------------------------------- per-instance checks

def _check_oracle(G, task, rec, viol):
    a = co.h1loc(G)
    b = co.h1loc_cyclic_oracle(G)
    rec["h1loc"] = a.invariants
    rec["h1loc_oracle"] = b.invariants
    if a.invariants != b.invariants:
        viol.append(f"h1loc {a.invariants} != cyclic oracle {b.invariants}")


def _check_prime(G, task, rec, viol):
    L = co.h1loc(G)
    rec["h1loc"] = L.invariants
    if not L.is_trivial():
        viol.append(f"nontrivial local cohomology {L.invariants} over a prime modulus")


def _check_search(G, task, rec, viol):
    L = co.h1loc(G)
    rec["h1loc"] = L.invariants
    if L.representatives:
        rec["witness_cocycle"] = {"generator_values": _generator_values(L.representatives[-1])}


def _check_sylow(G, task, rec, viol):
    p = G.modulus.p
    L = co.h1loc(G)
    rec["h1loc"] = L.invariants
    P = sylow(G, p)
    PG = P.as_group()
    LP = co.h1loc(PG)
    rec["sylow_order"] = P.order
    rec["sylow_h1loc"] = LP.invariants
    kern = co.restriction_kernel(G, L, P.indices)
    rec["restriction_kernel"] = kern
    if kern:
        viol.append(f"restriction to the Sylow subgroup has kernel {kern}")
    if LP.is_trivial() and not L.is_trivial():
        viol.append("Sylow local group trivial but the full one is not")
    for c in L.representatives:
        if co.is_coboundary(co.restriction(c, PG)) is not None:
            viol.append("a nonzero local class restricts to a coboundary on the Sylow subgroup")
            break


def _check_scalar(G, task, rec, viol):
    L = co.h1loc(G)
    rec["h1loc"] = L.invariants
    lam = contains_scalar(G)
    rec["scalar"] = lam
    asserted = lam is not None and G.modulus.is_unit(lam - 1)
    rec["asserted"] = asserted
    if asserted and not L.is_trivial():
        viol.append(f"contains {lam}*I with {lam}-1 a unit but h1loc = {L.invariants}")


def lift_block_cocycle(composite: MatrixGroup, factor: MatrixGroup, offset: int,
                       c: co.Cocycle) -> co.Cocycle:
    """Extend a cocycle of one diagonal block by zero on the other blocks."""
    d = factor.dim
    blocks = composite.elements[:, offset:offset + d, offset:offset + d]
    idx = factor.indices_of(blocks)
    if (idx < 0).any():
        raise ValueError("composite block does not lie in the factor group")
    Z = np.zeros((composite.order, composite.dim), dtype=np.int64)
    Z[:, offset:offset + d] = c.values[idx]
    return co.Cocycle(composite, Z)


def _in_local_lattice(c: co.Cocycle) -> bool:
    G = c.group
    z = np.concatenate([c.values[i] for i in G.generator_indices()])
    rows = co.local_cocycles(G)
    H = cons.zq.howell(rows, G.modulus)
    return bool(H.contains(z))


def _check_block(G, task, rec, viol):
    factors = [from_spec(s, element_cap=o) for s, o in zip(task["factors"], task["factor_orders"])]
    L = co.h1loc(G)
    rec["h1loc"] = L.invariants
    fl = [co.h1loc(F) for F in factors]
    rec["factor_h1loc"] = [f.invariants for f in fl]
    all_trivial = all(f.is_trivial() for f in fl)
    if all_trivial != L.is_trivial():
        viol.append(f"composite h1loc {L.invariants} vs factors {rec['factor_h1loc']}")
    offset = 0
    for F, f in zip(factors, fl):
        if not f.is_trivial():
            lifted = lift_block_cocycle(G, F, offset, f.representatives[-1])
            ok_cocycle = lifted.is_cocycle()
            ok_local = _in_local_lattice(lifted)
            if G.order <= 2000:
                ok_local = ok_local and lifted.satisfies_local_conditions()
            ok_nonzero = co.is_coboundary(lifted) is None
            rec["lifted_witness"] = {
                "offset": offset,
                "generator_values": _generator_values(lifted),
                "is_cocycle": ok_cocycle,
                "is_local": ok_local,
                "is_coboundary": not ok_nonzero,
            }
            if not (ok_cocycle and ok_local and ok_nonzero):
                viol.append("lifted witness is not a nonzero local class of the composite")
            break
        offset += F.dim


def _check_tensor(G, task, rec, viol):
    A = from_spec(task["factors"][0], element_cap=task["factor_orders"][0])
    B = from_spec(task["factors"][1], element_cap=task["factor_orders"][1])
    L = co.h1loc(G)
    la, lb = co.h1loc(A), co.h1loc(B)
    rec["h1loc"] = L.invariants
    rec["factor_h1loc"] = [la.invariants, lb.invariants]
    kind = rec["structure"]["kind"]
    if A.ngens == 0 or B.ngens == 0:
        # trivial factor: diagonal action on copies of the other module
        other, lo, copies = (B, lb, A.dim) if A.ngens == 0 else (A, la, B.dim)
        expected = sorted(lo.invariants * copies)
        rec["diagonal_prediction"] = expected
        if L.invariants != expected:
            viol.append(f"trivial tensor factor: h1loc {L.invariants}, expected {expected}")
        return
    asserted = la.is_trivial() and lb.is_trivial() and kind in (md.IRREDUCIBLE, md.DECOMPOSABLE)
    rec["asserted"] = asserted
    if asserted and not L.is_trivial():
        viol.append(f"factors trivial and module {kind}, yet h1loc = {L.invariants}")


def _check_theorem(G, task, rec, viol):
    L = co.h1loc(G)
    rec["h1loc"] = L.invariants
    kind = rec["structure"]["kind"]
    asserted = G.modulus.p > 3
    rec["asserted"] = asserted
    if not asserted or L.is_trivial():
        return
    if kind != md.REDUCIBLE_INDECOMPOSABLE:
        viol.append(f"h1loc = {L.invariants} for a module classified {kind}")


CHECKS: dict = {
    "oracle": (_check_oracle, False),
    "prime": (_check_prime, True),
    "search": (_check_search, True),
    "sylow": (_check_sylow, False),
    "scalar": (_check_scalar, False),
    "block": (_check_block, True),
    "tensor": (_check_tensor, True),
    "theorem": (_check_theorem, True),
}


def evaluate(task: dict) -> dict:
    """Evaluate one instance; never raises for mathematical failures."""
    t0 = time.perf_counter()
    check, want_structure = CHECKS[task["check"]]
    G = from_spec(task["group"], element_cap=task["order"])
    rec = _base_record(G, task["label"], structure=want_structure)
    viol: list = []
    try:
        check(G, task, rec, viol)
    except (CapExceeded, co.BudgetExceeded) as exc:
        rec["error"] = f"{type(exc).__name__}: {exc}"
    rec["violations"] = viol
    if task.get("timings"):
        rec["seconds"] = round(time.perf_counter() - t0, 4)
    return _ints(rec)


# --------------------------------------------------------- instance builders

def _task(G: MatrixGroup, label: str, check: str, **extra) -> dict:
    t = {"group": G.to_spec(), "order": G.order, "label": label, "check": check}
    t.update(extra)
    return t


def _lattice_groups(n: int, mod: Modulus, bound: int, max_order=None) -> list:
    G = cons.general_linear(n, mod)
    return [H.as_group() for H in all_subgroups(G, order_bound=bound, max_order=max_order)]


def _random_groups(rng, count, dims, moduli, max_order, families, attempts, special=False):
    out, skipped = [], 0
    for i in range(count):
        n = int(dims[int(rng.integers(len(dims)))])
        mod = Modulus.from_q(int(moduli[int(rng.integers(len(moduli)))]))
        G = sample_group(rng, n, mod, max_order, families, special=special, attempts=attempts)
        if G is None:
            skipped += 1
            continue
        out.append((f"random[{i}] n={n} q={mod.q}", G))
    return out, skipped


def witness_group(mod: Modulus = Modulus(2, 2), n: int = 2, bound: int = 1000) -> Optional[MatrixGroup]:
    """The smallest subgroup of GL_n(Z/qZ) (by order, then key) with nontrivial h1loc."""
    best = None
    for H in _lattice_groups(n, mod, bound):
        if not co.h1loc(H).is_trivial():
            k = (H.order, canonical_key(H.to_spec()))
            if best is None or k < best[0]:
                best = (k, H)
    return None if best is None else best[1]


def _build_oracle(spec, rng):
    groups, skipped = _random_groups(rng, spec.samples, spec.dims, spec.moduli, spec.max_order,
                                     spec.families, spec.attempts)
    return [_task(G, lab, "oracle") for lab, G in groups], skipped, []


def _build_prime(spec, rng):
    tasks = []
    for p in spec.primes:
        for i, H in enumerate(_lattice_groups(2, Modulus(p, 1), spec.lattice_bound)):
            tasks.append(_task(H, f"GL2({p}) subgroup {i}", "prime"))
    return tasks, 0, []


def _build_search(spec, rng):
    mod = Modulus(spec.p, spec.l)
    try:
        groups = [(f"lattice {i}", H) for i, H in
                  enumerate(_lattice_groups(spec.n, mod, spec.lattice_bound))]
        skipped = 0
    except CapExceeded:
        groups, skipped = _random_groups(rng, spec.samples, [spec.n], [mod.q], spec.max_order,
                                         spec.families, spec.attempts)
    return [_task(G, lab, "search") for lab, G in groups], skipped, []


def _build_sylow(spec, rng):
    tasks = []
    for n, p, l in spec.lattices:
        for i, H in enumerate(_lattice_groups(n, Modulus(p, l), spec.lattice_bound)):
            tasks.append(_task(H, f"GL{n}({p}^{l}) subgroup {i}", "sylow"))
    groups, skipped = _random_groups(rng, spec.samples, spec.dims, spec.moduli, spec.max_order,
                                     spec.families, spec.attempts)
    tasks += [_task(G, lab, "sylow") for lab, G in groups]
    return tasks, skipped, []


def _build_scalar(spec, rng):
    tasks, skipped = [], 0
    odd = [q for q in spec.moduli if q % 2]
    if not odd:
        raise SpecError("scalar criterion needs an odd modulus")
    for i in range(spec.samples):
        n = int(spec.dims[int(rng.integers(len(spec.dims)))])
        mod = Modulus.from_q(int(odd[int(rng.integers(len(odd)))]))
        lams = [a for a in range(2, mod.q) if mod.is_unit(a) and mod.is_unit(a - 1)]
        G = None
        for _ in range(spec.attempts):
            base = sample_group(rng, n, mod, spec.max_order, spec.families, attempts=1)
            if base is None:
                continue
            lam = int(lams[int(rng.integers(len(lams)))])
            try:
                G = closure(list(base.generators) + [lam * np.eye(n, dtype=np.int64)], mod, n,
                            element_cap=spec.max_order)
                break
            except CapExceeded:
                continue
        if G is None:
            skipped += 1
            continue
        tasks.append(_task(G, f"scalar[{i}] n={n} q={mod.q}", "scalar"))
    W = witness_group()
    if W is not None:
        B = closure(list(W.generators) + [3 * np.eye(2, dtype=np.int64)], W.modulus, 2)
        tasks.append(_task(B, "boundary: q=4 witness with 3I", "scalar"))
    return tasks, skipped, []


def _factor_extra(factors) -> dict:
    return {"factors": [F.to_spec() for F in factors], "factor_orders": [F.order for F in factors]}


def _build_block(spec, rng):
    tasks, skipped = [], 0
    W = witness_group()
    mod4 = W.modulus
    structured = [
        ("trivial+trivial", [trivial_group(mod4, 1), trivial_group(mod4, 1)]),
        ("J+J mod 3", [closure([[[1, 1], [0, 1]]], Modulus(3, 1)),
                       closure([[[1, 1], [0, 1]]], Modulus(3, 1))]),
        ("witness+trivial2", [W, trivial_group(mod4, 2)]),
        ("trivial1+witness", [trivial_group(mod4, 1), W]),
    ]
    for lab, fs in structured:
        tasks.append(_task(cons.block_diag(fs), lab, "block", **_factor_extra(fs)))
    for i in range(spec.samples):
        mod = Modulus.from_q(int(spec.moduli[int(rng.integers(len(spec.moduli)))]))
        s = int(rng.integers(2, 4))
        fs = []
        for _ in range(s):
            d = int(rng.integers(1, 3))
            F = sample_group(rng, d, mod, 48, spec.families, attempts=spec.attempts)
            fs.append(F if F is not None else trivial_group(mod, d))
        if mod == mod4 and rng.random() < 0.3:
            fs[int(rng.integers(s))] = W
        try:
            G = cons.block_diag(fs, element_cap=spec.max_order)
        except CapExceeded:
            skipped += 1
            continue
        tasks.append(_task(G, f"block[{i}] q={mod.q} s={s}", "block", **_factor_extra(fs)))
    return tasks, skipped, []


def _build_tensor(spec, rng):
    tasks, skipped = [], 0
    m5 = Modulus(5, 1)
    minus = closure([4 * np.eye(2, dtype=np.int64)], m5)
    structured = [("-I x -I mod 5", [minus, minus])]
    W = witness_group()
    if W is not None:
        structured.append(("trivial2 x witness", [trivial_group(W.modulus, 2), W]))
    for lab, fs in structured:
        tasks.append(_task(cons.tensor_product(*fs), lab, "tensor", **_factor_extra(fs)))
    for i in range(spec.samples):
        mod = Modulus.from_q(int(spec.moduli[int(rng.integers(len(spec.moduli)))]))
        fs = []
        for _ in range(2):
            F = sample_group(rng, 2, mod, 200, spec.families, attempts=spec.attempts)
            fs.append(F if F is not None else trivial_group(mod, 2))
        try:
            G = cons.tensor_product(*fs, element_cap=spec.max_order)
        except CapExceeded:
            skipped += 1
            continue
        tasks.append(_task(G, f"tensor[{i}] q={mod.q}", "tensor", **_factor_extra(fs)))
    return tasks, skipped, []


def _build_theorem(spec, rng):
    tasks, skipped, notes = [], 0, []
    p = spec.p
    mod = Modulus(p, spec.l)
    if spec.include_catalog:
        for e in cons.catalog(4, p, spec.l):
            if e.group is None:
                notes.append({"label": f"catalog {e.name}", "status": e.status})
                if e.status == cons.EXCEEDS_CAP:
                    skipped += 1
                continue
            tasks.append(_task(e.group, f"catalog {e.name}", "theorem"))
    for i in range(spec.samples):
        G = sample_group(rng, 4, mod, spec.max_order, spec.families, special=True,
                         attempts=spec.attempts)
        if G is None:
            skipped += 1
            continue
        tasks.append(_task(G, f"random SL4({mod.q}) [{i}]", "theorem"))
    return tasks, skipped, notes


BUILDERS: dict = {
    "OracleEquivalence": _build_oracle,
    "PrimeCaseExhaustive": _build_prime,
    "CounterexampleSearch": _build_search,
    "SylowLemma": _build_sylow,
    "ScalarCriterion": _build_scalar,
    "BlockLemma": _build_block,
    "TensorLemma": _build_tensor,
    "Theorem14Check": _build_theorem,
}


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("COHOM_JOBS", "1")))
    except ValueError:
        return 1


def _dedupe(tasks: list) -> list:
    seen, out = set(), []
    for t in tasks:
        k = json.dumps(canonical_key(t["group"]))
        if k in seen:
            continue
        seen.add(k)
        out.append(t)
    return out


def run_campaign(spec, jobs: Optional[int] = None, progress: Optional[Callable] = None) -> dict:
    """Build, evaluate and merge all instances of ``spec``."""
    if isinstance(spec, dict):
        spec = CampaignSpec.from_dict(spec)
    rng = np.random.default_rng(spec.seed)
    tasks, skipped, notes = BUILDERS[spec.kind](spec, rng)
    tasks = _dedupe(tasks)
    for t in tasks:
        t["timings"] = spec.timings
    jobs = default_jobs() if jobs is None else max(1, jobs)
    log.info("%s: %d instances, %d skipped while sampling, jobs=%d", spec.kind, len(tasks), skipped, jobs)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(evaluate, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        records = []
        for t in tasks:
            records.append(evaluate(t))
            if progress is not None:
                progress(len(records), len(tasks))
    records.sort(key=lambda r: (json.dumps(r["key"]), r["label"]))
    errors = sum(1 for r in records if "error" in r)
    violations = [
        {"key": r["key"], "label": r["label"], "message": m}
        for r in records for m in r["violations"]
    ]
    if spec.kind == "CounterexampleSearch" and spec.expect_witness:
        if not any(r.get("h1loc") for r in records):
            violations.append({"key": None, "label": "search", "message": "no witness found"})
    summary = {
        "instances": len(records),
        "completed": len(records) - errors,
        "errors": errors,
        "skipped": skipped + errors,
        "nontrivial_h1loc": sum(1 for r in records if r.get("h1loc")),
        "violations": len(violations),
    }
    return {
        "schema": SCHEMA,
        "campaign": spec.to_dict(),
        "verdict": "pass" if not violations else "fail",
        "summary": summary,
        "violations": violations,
        "notes": notes,
        "records": records,
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=1, sort_keys=True) + "\n"


def witnesses(report: dict) -> list:
    """Records with nontrivial local cohomology."""
    return [r for r in report["records"] if r.get("h1loc")]
