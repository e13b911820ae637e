"""Command-line front door.

Subcommands: graph-analyze, find-cycles, check-obstruction, group-ball,
coupling-build, coupling-verify, integrability, claim-check, threshold,
conditions.  Every run writes one JSON report embedding the tool version,
the configuration echo, the seed, and the budget, so identical invocations
produce byte-identical files.

Exit codes: 0 success; 1 usage, parse, precondition, or budget errors;
2 when a mathematical assertion fails (the theorem-contradiction signal),
so CI can tell broken math from broken IO.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .errors import HypmeError, MathCheckError
from .graphs import (
    Graph,
    cycle_graph,
    distance_matrix,
    grid_graph,
    load_graph,
    tree_graph,
)
from .hyperbolicity import (
    EXACT_CUTOFF,
    hyperbolicity_report,
    sampled_hyperbolicity,
)
from .cycles import check_obstruction, find_fat_cycle, CycleEmbedding, verify_embedding
from .groups import ball, bfs_growth_table, entropy_estimate, parse_group
from .coupling import (
    check_actions_commute,
    check_b_identity,
    check_cocycle_identity,
    check_fundamental_domains,
    check_inverse_relation,
    claim_bound_sweep,
    coboundedness_witness,
    coupling_from_spec,
    integrability_report,
)
from .integrability import parse_function
from .rational import format_fraction, parse_fraction
from .reports import write_report
from .rigidity import (
    RigidityConditions,
    Schedule,
    check_condition_5,
    check_condition_6_7,
    threshold_p,
)

DEFAULT_BUDGET = 10_000_000


def _budget(args) -> int:
    if args.budget is not None:
        return args.budget
    env = os.environ.get("HYPME_BUDGET")
    if env:
        return int(env)
    return DEFAULT_BUDGET


def _load_host(args) -> Graph:
    if getattr(args, "gen", None):
        kind, _, rest = args.gen.partition(":")
        params = [int(x) for x in rest.split(",")] if rest else []
        if kind == "tree":
            return tree_graph(*params)
        if kind == "grid":
            return grid_graph(*params)
        if kind == "cycle":
            return cycle_graph(*params)
        raise HypmeError(f"unknown generator {kind!r} (tree|grid|cycle)")
    if getattr(args, "edges", None):
        with open(args.edges) as fh:
            return load_graph(fh.read(), largest_component=args.largest_component)
    raise HypmeError("provide --gen or --edges")


def _config_echo(args) -> dict:
    skip = {"func"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = value
    return out


def _add_host_args(p):
    p.add_argument("--gen", help="generator spec: tree:b,d | grid:w,h | cycle:n")
    p.add_argument("--edges", help="edge-list file (one 'u v' pair per line)")
    p.add_argument("--largest-component", action="store_true")


def _add_common(p):
    p.add_argument("--out", required=True, help="output report path (JSON)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None, help="node budget (or HYPME_BUDGET)")
    p.add_argument("--threads", type=int, default=1, help="parallelism cap (results are deterministic regardless)")


def cmd_graph_analyze(args):
    g = _load_host(args)
    dm = distance_matrix(g)
    is_tree = g.m == g.n - 1
    if g.n <= EXACT_CUTOFF or is_tree or args.force:
        rep = hyperbolicity_report(g, dm)
    else:
        rep = sampled_hyperbolicity(g, dm, samples=args.samples, seed=args.seed)
    payload = {
        "n": g.n,
        "m": g.m,
        "diameter": int(dm.d.max()),
        **rep.to_json_dict(),
    }
    return payload, True


def cmd_find_cycles(args):
    g = _load_host(args)
    dm = distance_matrix(g)
    res = find_fat_cycle(
        g,
        dm,
        min_a=parse_fraction(args.min_a),
        min_n=args.min_n,
        mode=args.mode,
        budget=_budget(args),
        seed=args.seed,
    )
    return res.to_json_dict(), True


def cmd_check_obstruction(args):
    with open(args.embedding) as fh:
        obj = json.load(fh)
    emb = CycleEmbedding(
        n=obj["n"],
        images=tuple(obj["images"]),
        a=parse_fraction(obj["a"]),
        b=parse_fraction(obj["b"]),
    )
    if args.delta is not None:
        delta = parse_fraction(args.delta)
        delta_source = "supplied"
    else:
        host = _load_host(args)
        dm = distance_matrix(host)
        rep = hyperbolicity_report(host, dm)
        delta = rep.delta_thin + 2
        delta_source = "thin_triangle_plus_slack_2"
        emb = verify_embedding(dm, list(emb.images))  # re-verify against the host
    report = check_obstruction(emb, delta)
    payload = {"delta_source": delta_source, **report.to_json_dict()}
    return payload, report.verdict == "consistent"


def cmd_group_ball(args):
    group = parse_group(args.group)
    if args.counts_only:
        table = bfs_growth_table(group, args.radius, max_elements=_budget(args))
        payload = {
            "group": group.name,
            "radius": args.radius,
            "growth": list(table.values),
            "entropy": entropy_estimate(
                group.growth_table(args.radius)
            ).to_json_dict() if args.radius >= 2 else None,
        }
        csv_source = table
    else:
        b = ball(group, args.radius, max_elements=_budget(args))
        payload = b.to_json_dict()
        if args.radius >= 2:
            payload["entropy"] = entropy_estimate(b.growth).to_json_dict()
        csv_source = b.growth
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_source.to_csv())
    return payload, True


def _load_coupling(args):
    with open(args.spec) as fh:
        return coupling_from_spec(fh.read(), max_cosets=_budget(args))


def cmd_coupling_build(args):
    c = _load_coupling(args)
    payload = c.summary_dict()
    payload["coboundedness_witness"] = [
        c.group.describe(f) for f in coboundedness_witness(c)
    ]
    return payload, True


def cmd_coupling_verify(args):
    c = _load_coupling(args)
    checks = [
        check_cocycle_identity(c, args.radius),
        check_b_identity(c, args.radius),
        check_actions_commute(c, max(args.radius - 1, 1), samples=200, seed=args.seed),
        check_fundamental_domains(c, args.radius),
    ]
    if c.x_gamma_in_x_lambda():
        checks.append(check_inverse_relation(c, args.radius))
    payload = {
        "coupling": c.summary_dict(),
        "radius": args.radius,
        "checks": [r.to_json_dict() for r in checks],
    }
    ok = all(r.passed for r in checks)
    return payload, ok


def cmd_integrability(args):
    c = _load_coupling(args)
    rep = integrability_report(c, parse_function(args.phi), parse_function(args.psi))
    return rep.to_json_dict(), True


def cmd_claim_check(args):
    c = _load_coupling(args)
    phis = [parse_function(s) for s in args.phi.split(",")]
    r_values = [int(x) for x in args.radii.split(",")]
    payload = claim_bound_sweep(c, args.lambda_radius, r_values, phis)
    return payload, payload["passed"]


def cmd_threshold(args):
    group = parse_group(args.group)
    b = ball(group, args.ball_radius, max_elements=_budget(args))
    dm = distance_matrix(b.graph)
    hyp = hyperbolicity_report(b.graph, dm)
    est = entropy_estimate(b.growth)
    entropy = est.declared.upper() if est.declared is not None else Fraction(
        int(est.ratio_estimates[-1] * 2**32), 2**32
    )
    rep = threshold_p(
        hyp.delta_thin,
        entropy,
        provenance={
            "delta_source": f"thin_triangle on ball radius {args.ball_radius} (lower bound for the group)",
            "entropy_source": "declared" if est.declared is not None else "ratio estimate",
            "group": group.name,
        },
    )
    payload = rep.to_json_dict()
    payload["entropy_estimate"] = est.to_json_dict()
    return payload, True


def cmd_conditions(args):
    group = parse_group(args.group)
    if args.r.startswith("log:"):
        schedule = Schedule("log", coefficient=parse_fraction(args.r[4:]))
    elif args.r.startswith("pow:"):
        schedule = Schedule("pow", exponent=parse_fraction(args.r[4:]))
    else:
        raise HypmeError("schedule spec must be log:<c> or pow:<e>")
    rc = RigidityConditions(
        delta=parse_fraction(args.delta),
        L=parse_fraction(args.L),
        phi=parse_function(args.phi),
        psi=parse_function(args.psi),
        r=schedule,
        n_min=args.n_min,
        n_max=args.n_max,
    )
    reports = []
    wanted = args.check.split(",")
    if "5" in wanted:
        reports.append(check_condition_5(rc, group.growth_table(2)))
    if "6" in wanted:
        reports.append(check_condition_6_7(rc, "thm41"))
    if "7" in wanted:
        reports.append(check_condition_6_7(rc, "thm42"))
    payload = {
        "group": group.name,
        "conditions": [r.to_json_dict() for r in reports],
    }
    return payload, True


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hypme",
        description="exact toolkit for hyperbolicity obstructions and measure-equivalence couplings",
    )
    ap.add_argument("--version", action="version", version=f"hypme {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph-analyze", help="distances and hyperbolicity constants")
    _add_host_args(p)
    _add_common(p)
    p.add_argument("--force", action="store_true", help="run exact kernels past the size cutoff")
    p.add_argument("--samples", type=int, default=100_000, help="sample count past the cutoff")
    p.set_defaults(func=cmd_graph_analyze)

    p = sub.add_parser("find-cycles", help="search for fat bi-Lipschitz embedded cycles")
    _add_host_args(p)
    _add_common(p)
    p.add_argument("--min-a", required=True, help="lower bi-Lipschitz threshold, e.g. 1/2")
    p.add_argument("--min-n", type=int, required=True)
    p.add_argument("--mode", choices=["auto", "exhaustive", "heuristic"], default="auto")
    p.set_defaults(func=cmd_find_cycles)

    p = sub.add_parser("check-obstruction", help="evaluate the cycle obstruction inequality")
    _add_host_args(p)
    _add_common(p)
    p.add_argument("--embedding", required=True, help="CycleEmbedding JSON file")
    p.add_argument("--delta", help="hypothetical delta as p/q (else certified from host)")
    p.set_defaults(func=cmd_check_obstruction)

    p = sub.add_parser("group-ball", help="Cayley ball, growth table, entropy")
    _add_common(p)
    p.add_argument("--group", required=True, help="family DSL, e.g. F2, Z^2, C2*C3")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--csv", help="also write the growth table as CSV")
    p.add_argument("--counts-only", action="store_true", help="skip the ball graph")
    p.set_defaults(func=cmd_group_ball)

    p = sub.add_parser("coupling-build", help="build a subgroup coupling from a spec file")
    _add_common(p)
    p.add_argument("--spec", required=True, help='JSON: {"group","subgroup_generators","x_gamma"}')
    p.set_defaults(func=cmd_coupling_build)

    p = sub.add_parser("coupling-verify", help="exhaustive cocycle and domain checks")
    _add_common(p)
    p.add_argument("--spec", required=True)
    p.add_argument("--radius", type=int, default=3)
    p.set_defaults(func=cmd_coupling_verify)

    p = sub.add_parser("integrability", help="the K and L integral constants")
    _add_common(p)
    p.add_argument("--spec", required=True)
    p.add_argument("--phi", default="power:1")
    p.add_argument("--psi", default="power:1")
    p.set_defaults(func=cmd_integrability)

    p = sub.add_parser("claim-check", help="measure-bound sweep over a subgroup ball")
    _add_common(p)
    p.add_argument("--spec", required=True)
    p.add_argument("--lambda-radius", type=int, default=4)
    p.add_argument("--radii", default="1,2,3", help="comma-separated R values")
    p.add_argument("--phi", default="power:1,power:2", help="comma-separated functions")
    p.set_defaults(func=cmd_claim_check)

    p = sub.add_parser("threshold", help="critical exponent from group data")
    _add_common(p)
    p.add_argument("--group", required=True)
    p.add_argument("--ball-radius", type=int, default=4)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("conditions", help="vanishing and schedule condition checks")
    _add_common(p)
    p.add_argument("--group", required=True, help="growth source (closed-form families)")
    p.add_argument("--check", default="5,6,7", help="which conditions to run")
    p.add_argument("--delta", default="1")
    p.add_argument("--L", default="1")
    p.add_argument("--phi", default="power:2")
    p.add_argument("--psi", default="power:1")
    p.add_argument("--r", default="log:108", help="schedule: log:<c> or pow:<e>")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=10**6)
    p.set_defaults(func=cmd_conditions)

    return ap


def dispatch(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    config = _config_echo(args)
    config["budget_effective"] = _budget(args) if hasattr(args, "budget") else None
    try:
        payload, math_ok = args.func(args)
    except MathCheckError as exc:
        write_report(args.out, config, {"error": str(exc), "kind": "math"})
        return 2
    except HypmeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return 1
    write_report(args.out, config, payload)
    return 0 if math_ok else 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
