"""Command line entry point: ``cohomolocal <noun> <verb> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import campaigns, cohomology, constructions, modules
from .groups import CapExceeded, NonInvertibleGenerator, contains_scalar, from_spec, load_spec, p_part, sylow
from .zq import ContainmentError, DimensionError

EXIT_OK, EXIT_VIOLATIONS, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3

log = logging.getLogger("cohomolocal")


class InputError(Exception):
    pass


def _emit(obj, out=None):
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _group(path):
    try:
        spec = load_spec(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read group spec {path}: {exc}") from exc
    return from_spec(spec)


def _prime_factors(n: int) -> list:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def cmd_group_info(args):
    G = _group(args.spec)
    orders = G.element_orders()
    vals, counts = np.unique(orders, return_counts=True)
    _emit({
        "order": G.order,
        "n": G.dim,
        "p": G.modulus.p,
        "l": G.modulus.l,
        "abelian": G.is_abelian(),
        "element_orders": {str(int(v)): int(c) for v, c in zip(vals, counts)},
        "scalar": contains_scalar(G),
        "sylow_orders": {str(p): p_part(G.order, p) for p in _prime_factors(G.order)},
    })
    return EXIT_OK


def cmd_group_sylow(args):
    G = _group(args.spec)
    P = sylow(G, args.p)
    _emit({"order": P.order, "group": P.as_group().to_spec()}, args.output)
    return EXIT_OK


def cmd_module_structure(args):
    G = _group(args.spec)
    _emit(campaigns._ints(modules.structure(G).to_json()))
    return EXIT_OK


def cmd_cohom_h1(args):
    G = _group(args.spec)
    H = cohomology.h1(G)
    out = {"h1": H.invariants, "witness_cocycle": None}
    if H.representatives:
        out["witness_cocycle"] = H.representatives[-1].to_json()
    _emit(out)
    return EXIT_OK


def cmd_cohom_h1loc(args):
    G = _group(args.spec)
    _emit(cohomology.report_fragment(G, oracle=args.oracle))
    return EXIT_OK


def cmd_construct_catalog(args):
    entries = constructions.catalog(args.n, args.p, args.l)
    _emit(constructions.catalog_json(entries), args.output)
    return EXIT_OK


def cmd_campaign_run(args):
    try:
        with open(args.campaign) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read campaign {args.campaign}: {exc}") from exc
    if args.seed is not None:
        raw["seed"] = args.seed
    spec = campaigns.CampaignSpec.from_dict(raw)
    report = campaigns.run_campaign(spec, jobs=args.jobs)
    with open(args.output, "w") as fh:
        fh.write(campaigns.dumps(report))
    s = report["summary"]
    print(f"{spec.kind}: {report['verdict']} ({s['completed']} completed, "
          f"{s['skipped']} skipped, {s['violations']} violations)", file=sys.stderr)
    return EXIT_OK if report["verdict"] == "pass" else EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cohomolocal", description=__doc__)
    ap.add_argument("--element-cap", type=int, default=None,
                    help="maximum group order to enumerate (overrides COHOM_ELEMENT_CAP)")
    ap.add_argument("-v", "--verbose", action="store_true")
    nouns = ap.add_subparsers(dest="noun", required=True)

    g = nouns.add_parser("group").add_subparsers(dest="verb", required=True)
    p = g.add_parser("info")
    p.add_argument("spec")
    p.set_defaults(func=cmd_group_info)
    p = g.add_parser("sylow")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-o", "--output")
    p.add_argument("spec")
    p.set_defaults(func=cmd_group_sylow)

    m = nouns.add_parser("module").add_subparsers(dest="verb", required=True)
    p = m.add_parser("structure")
    p.add_argument("spec")
    p.set_defaults(func=cmd_module_structure)

    c = nouns.add_parser("cohom").add_subparsers(dest="verb", required=True)
    p = c.add_parser("h1")
    p.add_argument("spec")
    p.set_defaults(func=cmd_cohom_h1)
    p = c.add_parser("h1loc")
    p.add_argument("spec")
    p.add_argument("--oracle", action="store_true", help="use the cyclic-subgroup definition")
    p.set_defaults(func=cmd_cohom_h1loc)

    k = nouns.add_parser("construct").add_subparsers(dest="verb", required=True)
    p = k.add_parser("catalog")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-l", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_construct_catalog)

    r = nouns.add_parser("campaign").add_subparsers(dest="verb", required=True)
    p = r.add_parser("run")
    p.add_argument("campaign")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (overrides COHOM_JOBS)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_campaign_run)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    saved = os.environ.get("COHOM_ELEMENT_CAP")
    if args.element_cap is not None:
        # worker processes read the cap from the environment
        os.environ["COHOM_ELEMENT_CAP"] = str(args.element_cap)
    try:
        return args.func(args)
    except (InputError, campaigns.SpecError, NonInvertibleGenerator, DimensionError,
            ContainmentError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapExceeded, cohomology.BudgetExceeded) as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    finally:
        if saved is None:
            os.environ.pop("COHOM_ELEMENT_CAP", None)
        else:
            os.environ["COHOM_ELEMENT_CAP"] = saved


if __name__ == "__main__":
    sys.exit(main())
