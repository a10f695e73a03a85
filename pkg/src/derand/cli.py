"""The ``derand`` command line.

Exit codes: 0 when every asserted check passes, 1 when one fails (the failing
claim ids go to stderr), 2 for invalid input.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import reports
from .codes import RMCode, verify_duality
from .errors import CapExceeded, InfeasibleError, ParameterError
from .fooling import fooling_decomposition, lipschitz_fooling_error, tail_bound_audit
from .gap import gap_report
from .graphs import balanced_separator_opt
from .polynomials import MultilinearPolynomial, random_polynomial
from .pseudorandom import HashingGenerator
from .shortcode import ShortCodeGraph, build_short_code_graph, check_automorphisms, fold, spectrum_audit
from .stability import gaussian_stability

# Keys that never affect results and stay out of the echoed config.
_PLUMBING = {"func", "config", "out", "report", "csv"}


class UsageError(Exception):
    pass


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in _PLUMBING}


def _generator(args):
    return HashingGenerator(args.n, args.ell, args.eps, c=args.c, t=args.t, delta=args.delta, k_h=args.k_h)


def cmd_prg_sample(args):
    gen = _generator(args)
    if args.seed is not None:
        outputs = [gen.sample(args.seed)]
    else:
        rng = np.random.default_rng(args.rng_seed)
        outputs = [gen.random_sample(rng) for _ in range(args.count)]
    result = {"params": gen.params, "outputs": [[int(x) for x in y] for y in outputs]}
    if args.seed is not None:
        result["output"] = result["outputs"][0]
    return result, [], True


def cmd_fool(args):
    gen = _generator(args)
    rng = np.random.default_rng(args.rng_seed)
    entries, rows = [], []
    exact_all = True
    if args.poly:
        with open(args.poly) as fh:
            polys = [MultilinearPolynomial.from_json(fh.read())]
    else:
        polys = [random_polynomial(args.n, args.ell, args.terms, random_state=rng) for _ in range(args.polys)]
    mode = "exact" if args.exact else args.mode
    for j, P in enumerate(polys):
        res = lipschitz_fooling_error(P, gen, mode=mode, samples=args.samples, random_state=rng)
        exact_all &= res["exact"]
        if res["exact"]:
            entries.append(reports.check(f"lipschitz-fooling[{j}]", res["w1"], gen.eps, res["w1"] <= gen.eps))
        else:
            entries.append(
                reports.entry(
                    f"lipschitz-fooling[{j}]", res["w1"], gen.eps, "NA", asserted=False, exact=False,
                    samples=res["samples"], ci99=res["ci99"],
                )
            )
        row = {"polynomial": json.loads(P.to_json()), **res}
        if args.decompose and res["exact"]:
            dec = fooling_decomposition(P, gen)
            row["decomposition"] = dec
            entries.append(reports.check(f"pruning[{j}]", dec["pruning"], dec["pruning_bound"],
                                         dec["pruning"] <= dec["pruning_bound"] + 1e-12))
            entries.append(reports.check(f"hybrid[{j}]", dec["hybrid"], dec["hybrid_bound"],
                                         dec["per_hash_ok"]))
            entries.append(reports.check(f"triangle[{j}]", dec["w1"], None, dec["triangle_ok"]))
        rows.append(row)
    return {"params": gen.params, "polynomials": rows}, entries, exact_all


def _load_graph(path):
    with open(path) as fh:
        return ShortCodeGraph.from_json(fh.read())


def cmd_graph_build(args):
    truncate = {"auto": None, "on": True, "off": False}[args.truncate]
    graph = build_short_code_graph(args.n, args.d, args.eps, truncate=truncate, strict=not args.allow_large_eps)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(graph.to_json())
    if args.csv:
        reports.write_spectrum_csv(graph.spectrum_rows(), args.csv)
    lam = np.asarray(graph.eigenvalues)
    entries = [
        reports.check("trivial-eigenvalue", float(lam[0]), 1.0, abs(lam[0] - 1) <= 1e-12),
        reports.check("eigenvalue-range", float(np.abs(lam).max()), 1.0, np.abs(lam).max() <= 1 + 1e-12),
        reports.check("shift-automorphisms", check_automorphisms(graph), True, check_automorphisms(graph)),
    ]
    result = {"vertices": graph.n_vertices, "m_max": graph.m_max, "truncated": graph.truncated, "meta": graph.meta}
    return result, entries, True


def cmd_graph_audit(args):
    graph = _load_graph(args.graph)
    audit = spectrum_audit(graph, args.delta)
    if args.csv:
        reports.write_spectrum_csv(graph.spectrum_rows(), args.csv)
    entries = [
        reports.check("low-degree-spectrum", len(audit["low_degree_violations"]), 0, audit["low_degree_ok"]),
        reports.check("mean-inner-product", audit["mean_inner_product"], audit["mean_inner_bound"],
                      audit["mean_inner_ok"]),
    ]
    if graph.truncated:
        entries.append(reports.check("adjacent-inner-product", audit["min_adjacent_inner_product"],
                                     audit["adjacency_threshold"], audit["adjacency_ok"]))
    else:
        entries.append(reports.entry("adjacent-inner-product", audit["min_adjacent_inner_product"],
                                     audit["adjacency_threshold"], "pass" if audit["adjacency_ok"] else "fail",
                                     asserted=False, note="weight truncation disabled for this graph"))
    entries.append(reports.entry("fitted-mu0", audit["fitted_mu0"], None, "NA", asserted=False))
    if not args.full_table:
        audit.pop("table")
    return audit, entries, True


def cmd_graph_fold(args):
    graph = _load_graph(args.graph)
    folded = fold(graph)
    sizes = folded.orbits.sizes
    ok_sizes = bool(np.all((2**graph.n) % sizes == 0))
    weight_total = float(folded.weights.sum())
    result = {
        "orbits": int(folded.n_vertices),
        "orbit_sizes": sizes.tolist(),
        "stationary": folded.stationary.tolist(),
        "weights": folded.weights.tolist() if args.weights else None,
    }
    entries = [
        reports.check("orbit-sizes-divide", ok_sizes, True, ok_sizes),
        reports.check("weight-preserved", weight_total, 1.0, abs(weight_total - 1) <= 1e-12),
        reports.check("shift-automorphisms", check_automorphisms(graph), True, check_automorphisms(graph)),
    ]
    return result, entries, True


def cmd_graph_cut(args):
    graph = _load_graph(args.graph)
    folded = fold(graph)
    res = balanced_separator_opt(folded, args.b, random_state=args.rng_seed)
    entries = [reports.entry("balanced-separator", res.phi, None, "NA", asserted=False,
                             note=None if res.exact else "heuristic search above the brute-force cap")]
    return res.as_dict(), entries, res.exact


def cmd_gap(args):
    rep = gap_report(args.n, args.d, args.eps, args.rounds, args.b, args.tensor,
                     delta_override=args.delta_override, random_state=args.rng_seed,
                     include_gram=args.include_gram)
    entries = []
    for c in rep.pop("claims"):
        # Balance and objective are reported, not asserted: feasibility may fail at this scale.
        asserted = c["claim"] in ("cloud-eigenvalue", "matching")
        entries.append(reports.entry(c["claim"], c["measured"], c["bound"], c["status"], asserted=asserted))
    entries.append(reports.check("gram-psd", rep["min_gram_eigenvalue"], -1e-8, rep["psd"]))
    return rep, entries, rep["integral_exact"]


def cmd_audit_all(args):
    entries = []
    dual_ok = all(verify_duality(n, d) for n in range(1, 6) for d in range(0, n + 1))
    entries.append(reports.check("duality", dual_ok, True, dual_ok))
    indep_ok = True
    for n in range(1, 5):
        for d in range(0, min(2, n) + 1):
            words = RMCode(n, d).codewords()
            k = min(2**d, 2**n)
            for cols in _subsets(2**n, k):
                sub = words[:, cols]
                keys = (sub.astype(np.int64) << np.arange(len(cols))).sum(axis=1)
                counts = np.bincount(keys, minlength=2 ** len(cols))
                indep_ok &= bool(np.all(counts == counts[0]))
    entries.append(reports.check("bounded-independence", indep_ok, True, indep_ok))
    for k, N in ((2, 4), (4, 8), (4, 16)):
        for thr in (1.5, 2, 3):
            a = tail_bound_audit(k, N, thr)
            entries.append(reports.check(f"tail[{k},{N},{thr}]", a["lhs"], a["rhs"], a["ok"]))
    graph = build_short_code_graph(4, 2, 0.1)
    audit = spectrum_audit(graph, 0.05)
    entries.append(reports.check("low-degree-spectrum", len(audit["low_degree_violations"]), 0, audit["low_degree_ok"]))
    entries.append(reports.check("shift-automorphisms", True, True, check_automorphisms(graph)))
    g = gaussian_stability(0.5, 0.5)
    entries.append(reports.check("gaussian-stability", g, 1 / 3, abs(g - 1 / 3) <= 1e-6))
    return {"checks": len(entries)}, entries, True


def _subsets(N, k):
    from itertools import combinations

    for size in range(1, k + 1):
        yield from (list(c) for c in combinations(range(N), size))


def _add_generator_args(p):
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--c", type=float, default=4)
    p.add_argument("--t", type=int, default=None, help="override the bucket count")
    p.add_argument("--delta", type=float, default=None, help="override the inner fooling error")
    p.add_argument("--k-h", dest="k_h", type=int, default=None, help="override the inner independence")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="derand", description="Exact experiments on Reed-Muller short-code graphs and hashing generators."
    )
    parser.add_argument("--config", help="JSON file whose keys override command-line flags")
    parser.add_argument("--rng-seed", dest="rng_seed", type=int, default=0)
    parser.add_argument("--report", default="-", help="report path ('-' for stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    prg = sub.add_parser("prg").add_subparsers(dest="action", required=True)
    p = prg.add_parser("sample")
    _add_generator_args(p)
    p.add_argument("--seed", "--seed-hex", dest="seed", help="seed as hex (optionally 0x-prefixed)")
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=cmd_prg_sample)

    p = sub.add_parser("fool")
    _add_generator_args(p)
    p.add_argument("--poly", help="polynomial JSON file (default: random polynomials)")
    p.add_argument("--mode", choices=("auto", "exact", "mc"), default="auto")
    p.add_argument("--exact", action="store_true", help="shorthand for --mode exact")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--polys", type=int, default=5)
    p.add_argument("--terms", type=int, default=6)
    p.add_argument("--decompose", action="store_true")
    p.set_defaults(func=cmd_fool)

    graph = sub.add_parser("graph").add_subparsers(dest="action", required=True)
    p = graph.add_parser("build")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--truncate", choices=("auto", "on", "off"), default="auto")
    p.add_argument("--allow-large-eps", action="store_true")
    p.add_argument("--out", help="graph JSON path")
    p.add_argument("--csv", help="spectrum CSV path")
    p.set_defaults(func=cmd_graph_build)
    p = graph.add_parser("audit")
    p.add_argument("graph")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--full-table", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_graph_audit)
    p = graph.add_parser("fold")
    p.add_argument("graph")
    p.add_argument("--weights", action="store_true", help="include the folded weight matrix")
    p.set_defaults(func=cmd_graph_fold)
    p = graph.add_parser("cut")
    p.add_argument("graph")
    p.add_argument("--b", type=float, required=True)
    p.set_defaults(func=cmd_graph_cut)

    p = sub.add_parser("gap")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--tensor", type=int, required=True)
    p.add_argument("--delta-override", dest="delta_override", type=float, default=None)
    p.add_argument("--include-gram", action="store_true")
    p.add_argument("--out", help="alias for --report")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("audit-all")
    p.set_defaults(func=cmd_audit_all)
    return parser


def _apply_config(args, parser):
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    known = vars(args)
    for key, value in doc.items():
        key = key.replace("-", "_")
        if key not in known or key in ("func", "command", "action"):
            raise UsageError(f"unknown config key {key!r}")
        setattr(args, key, value)
    return args


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args, parser)
        start = time.perf_counter()
        result, entries, exact = args.func(args)
        seconds = time.perf_counter() - start
    except (UsageError, ParameterError, CapExceeded, InfeasibleError, ValueError, OSError) as exc:
        print(f"derand: error: {exc}", file=sys.stderr)
        return 2
    name = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    report = reports.make_report(name, _config(args), result, entries, exact=exact, seconds=seconds)
    path = getattr(args, "out", None) if args.command == "gap" and getattr(args, "out", None) else args.report
    reports.write(report, path)
    if report["failing"]:
        print("derand: failing checks: " + ", ".join(report["failing"]), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
