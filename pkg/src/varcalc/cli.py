"""Command-line interface: problem files in, deterministic reports out.

Subcommands
-----------
analyze       full growth battery plus exact-calculus cross-checks
d2            exact second subderivative along a direction
parabolic     exact parabolic subderivative (pointwise or arc-optimized)
estimate      sampling estimate of a derivative object
falsify-prox  hunt for a prox-regularity counterexample pair
catalog       list built-in problems or re-check one's expected facts

The problem argument is either a path to a JSON problem file or the id
of a catalog entry.  Exit codes: 0 success, 1 internal error, 2 invalid
or inconsistent problem, 3 undetermined-only results (budget exhausted).
The environment variable VARCALC_SEED overrides any seed from the file
or the command line, and --witness-csv dumps sample-level evidence next
to the report.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import traceback

import numpy as np

from .calculus import ExactCalculus, NotStationaryError, msqc_check
from .catalog import check_expected, get as catalog_get, named_ids
from .estimators import (
    GridSchedule,
    est_parabolic_subderivative,
    est_second_subderivative,
    est_subderivative,
    prox_regularity_falsify,
)
from .growth import growth_battery
from .polyfun import BlackBoxFn
from .problemfile import ProblemFileError, RunOptions, load_problem_file
from .report import (
    CAVEAT_BLACK_BOX,
    CAVEAT_HYPOTHESES,
    canonical_json_bytes,
    make_report,
    render_text,
    witness_csv_bytes,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2
EXIT_UNDETERMINED = 3


class CommandError(Exception):
    """A user-facing failure with a chosen exit code."""

    def __init__(self, message: str, exit_code: int = EXIT_INVALID):
        super().__init__(message)
        self.exit_code = exit_code


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _resolve_problem(ref: str):
    """A problem reference is a JSON file path or a catalog entry id."""
    if os.path.exists(ref):
        problem, options = load_problem_file(ref)
        return problem, options, None
    if ref in named_ids():
        entry = catalog_get(ref)
        return entry.problem(), RunOptions(), entry
    raise CommandError(
        f"{ref!r} is neither an existing file nor a catalog id "
        f"(known ids: {', '.join(named_ids())})"
    )


def _effective_seed(options: RunOptions, flag_seed: int | None) -> int:
    env = os.environ.get("VARCALC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CommandError(f"VARCALC_SEED must be an integer, got {env!r}") from None
    if flag_seed is not None:
        return flag_seed
    return options.seed


def _parse_vec(text: str, n: int, flag: str) -> np.ndarray:
    try:
        vals = [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise CommandError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise CommandError(f"{flag}: expected {n} component(s), got {len(vals)}")
    return np.array(vals)


def _parse_schedule_flag(text: str, seed: int) -> GridSchedule:
    base = GridSchedule(seed=seed)
    kwargs = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise CommandError(f"--schedule: expected key=value items, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key in ("t0", "ratio", "ball_scale"):
            kwargs[key] = float(raw)
        elif key in ("levels", "directions", "tail_levels"):
            kwargs[key] = int(raw)
        else:
            raise CommandError(
                f"--schedule: unknown key {key!r}; "
                "allowed: t0, ratio, levels, directions, ball_scale, tail_levels"
            )
    return dataclasses.replace(base, **kwargs)


def _schedule_for(options: RunOptions, args, seed: int) -> GridSchedule:
    if getattr(args, "schedule", None):
        return _parse_schedule_flag(args.schedule, seed)
    if options.schedule is not None:
        return dataclasses.replace(options.schedule, seed=seed)
    return GridSchedule(seed=seed)


def _base_caveats(problem) -> list[str]:
    caveats = [CAVEAT_HYPOTHESES]
    if isinstance(problem.g, BlackBoxFn):
        caveats.append(CAVEAT_BLACK_BOX)
    return caveats


def _emit(report: dict, args, witness_rows=None, field_order=None) -> None:
    if getattr(args, "format", "json") == "text":
        sys.stdout.write(render_text(report))
    else:
        sys.stdout.buffer.write(canonical_json_bytes(report))
    path = getattr(args, "witness_csv", None)
    if path:
        rows = witness_rows or []
        order = field_order or (sorted(rows[0]) if rows else ["note"])
        with open(path, "wb") as fh:
            fh.write(witness_csv_bytes(rows, order))


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    problem, options, entry = _resolve_problem(args.problem)
    seed = _effective_seed(options, args.seed)
    kappa = args.kappa if args.kappa is not None else (options.kappa or (entry.kappa if entry else None))
    gamma = args.gamma if args.gamma is not None else options.gamma

    calc = ExactCalculus(problem)
    try:
        calc.require_stationary()
    except NotStationaryError as exc:
        raise CommandError(f"base point is not stationary: {exc}") from exc

    try:
        battery = growth_battery(
            problem, kappa=kappa, gamma=gamma, n_samples=options.n_samples, seed=seed
        )
    except RuntimeError as exc:
        raise CommandError(f"inconsistent verdicts: {exc}") from exc

    # Exact cross-checks: on every generating ray of the critical cone the
    # primal and dual second-subderivative routes must agree.
    rays = calc.critical_cone().generator_rays()
    cross = []
    for w in rays[:8]:
        pair = calc.d2_dual_pair(w)
        cross.append({"direction": w, "pair": pair})
        if not pair.consistent:
            raise CommandError(
                f"primal/dual second-order values disagree along {w.tolist()}: "
                f"gap {pair.gap}"
            )

    vrep = calc.multipliers().vrep()
    results = {
        "battery": battery,
        "stationary": True,
        "multiplier_vertices": [list(v) for v in vrep.vertices],
        "multiplier_rays": [list(r) for r in vrep.all_rays()],
        "dual_pair_checks": cross,
    }
    if kappa is not None and problem.g.lipschitz is not None:
        results["tau"] = calc.tau(kappa)
        results["msqc"] = msqc_check(
            problem,
            kappa=kappa,
            gamma=max(gamma, 0.01),
            n_samples=options.n_samples,
            seed=seed,
            feasible_set=entry.feasible_set if entry else None,
        )

    report = make_report(
        "analyze", problem.name, seed, results, caveats=_base_caveats(problem)
    )
    rows = [
        {
            "item": it.name,
            "verdict": it.verdict,
            "provenance": it.provenance,
            "worst_point": (it.data or {}).get("worst_point"),
            "worst_ratio": (it.data or {}).get("worst_ratio"),
        }
        for it in battery.items
    ]
    _emit(report, args, rows, ["item", "verdict", "provenance", "worst_ratio", "worst_point"])

    verdicts = {it.verdict for it in battery.items}
    if verdicts and verdicts <= {"undetermined"}:
        return EXIT_UNDETERMINED
    return EXIT_OK


# ---------------------------------------------------------------------------
# d2 / parabolic
# ---------------------------------------------------------------------------


def _with_slope(problem, v_text: str | None):
    if v_text is None:
        return problem
    v = _parse_vec(v_text, problem.F.dim_in, "--v")
    return dataclasses.replace(problem, v_bar=v, _base=None)


def cmd_d2(args) -> int:
    problem, options, _ = _resolve_problem(args.problem)
    seed = _effective_seed(options, args.seed)
    problem = _with_slope(problem, args.v)
    w = _parse_vec(args.w, problem.F.dim_in, "--w")
    calc = ExactCalculus(problem)
    value = calc.d2_f(w)
    results = {"direction": w, "d2": value}
    if value.status in ("ok", "unbounded"):
        results["dual_pair"] = calc.d2_dual_pair(w)
    report = make_report("d2", problem.name, seed, results, caveats=_base_caveats(problem))
    _emit(report, args)
    return EXIT_OK


def cmd_parabolic(args) -> int:
    problem, options, _ = _resolve_problem(args.problem)
    seed = _effective_seed(options, args.seed)
    w = _parse_vec(args.w, problem.F.dim_in, "--w")
    calc = ExactCalculus(problem)
    if args.z is not None:
        z = _parse_vec(args.z, problem.F.dim_in, "--z")
        value = calc.parabolic_f(w, z)
        results = {"direction": w, "arc": z, "value": value}
    else:
        reg = calc.parabolic_regularity(w)
        results = {"direction": w, "regularity": reg}
    report = make_report("parabolic", problem.name, seed, results, caveats=_base_caveats(problem))
    _emit(report, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def cmd_estimate(args) -> int:
    problem, options, _ = _resolve_problem(args.problem)
    seed = _effective_seed(options, args.seed)
    n = problem.F.dim_in
    w = _parse_vec(args.w, n, "--w")
    schedule = _schedule_for(options, args, seed)

    if args.object == "subderivative":
        est = est_subderivative(problem, problem.x_bar, w, schedule)
    elif args.object == "d2":
        v = _parse_vec(args.v, n, "--v") if args.v is not None else np.zeros(n)
        est = est_second_subderivative(problem, problem.x_bar, v, w, schedule)
    else:  # parabolic
        z = _parse_vec(args.z, n, "--z") if args.z is not None else np.zeros(n)
        if args.slope is not None:
            slope = float(args.slope)
        else:
            exact = ExactCalculus(problem).subderivative_f(w)
            if not exact.is_finite:
                raise CommandError(
                    "--slope is required when the exact first-order slope "
                    "along --w is infinite"
                )
            slope = exact.finite_value()
        est = est_parabolic_subderivative(problem, problem.x_bar, w, slope, z, schedule)

    results = {"object": args.object, "direction": w, "estimate": est}
    report = make_report("estimate", problem.name, seed, results, caveats=_base_caveats(problem))
    rows = [
        {"t": wit.t, "quotient": wit.quotient, "point": wit.point}
        for wit in est.witnesses
    ]
    _emit(report, args, rows, ["t", "quotient", "point"])
    if not est.witnesses and not est.diverging:
        return EXIT_UNDETERMINED
    return EXIT_OK


# ---------------------------------------------------------------------------
# falsify-prox
# ---------------------------------------------------------------------------


def _smooth_gradient(problem):
    """Gradient of f for problems that are smooth near the base point.

    The composite is classically smooth when the outer function is a
    single affine piece; anything else has genuine kinks and the
    prox-regularity falsifier's gradient route does not apply.
    """
    g = problem.g
    if isinstance(g, BlackBoxFn) or g.kind != "affine":
        raise CommandError(
            "falsify-prox needs a smooth objective: the outer function "
            "must be affine (a single linear piece)"
        )
    a = np.asarray(g.pieces_A[0], dtype=float)

    def grad(x):
        x = np.asarray(x, dtype=float).reshape(-1)
        out = problem.F.jacobian(x).T @ a
        if problem.phi is not None:
            out = out + problem.phi.gradient(x)
        return out

    return grad


def cmd_falsify_prox(args) -> int:
    problem, options, entry = _resolve_problem(args.problem)
    seed = _effective_seed(options, args.seed)
    r_max = args.r_max if args.r_max is not None else options.r_max
    if args.eps:
        epsilons = tuple(float(tok) for tok in args.eps.replace(",", " ").split())
    else:
        epsilons = options.epsilons

    grad = _smooth_gradient(problem)
    x_bar = problem.x_bar
    v_bar = grad(x_bar)
    sequences = entry.pair_family if entry is not None else None

    res = prox_regularity_falsify(
        grad,
        x_bar=x_bar,
        v_bar=v_bar,
        r_max=r_max,
        epsilons=epsilons,
        sequences=sequences,
        seed=seed,
    )
    ce = res.counterexample
    reverified = bool(ce is not None and ce.reverify(grad))
    results = {
        "r_max": r_max,
        "epsilons": list(epsilons),
        "pairs_checked": res.pairs_checked,
        "implied_r_by_epsilon": {f"{eps:g}": r for eps, r in res.implied_r_by_epsilon.items()},
        "counterexample": ce,
        "reverified": reverified,
        "verdict": (
            "not prox-regular within budget"
            if reverified
            else "no violating pair found within budget"
        ),
    }
    report = make_report(
        "falsify-prox", problem.name, seed, results, caveats=_base_caveats(problem)
    )
    rows = []
    if ce is not None:
        rows.append(
            {
                "epsilon": ce.epsilon,
                "implied_r": ce.implied_r,
                "x1": ce.x1,
                "x2": ce.x2,
                "v1": ce.v1,
                "v2": ce.v2,
                "source": ce.source,
            }
        )
    _emit(report, args, rows, ["epsilon", "implied_r", "x1", "x2", "v1", "v2", "source"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def cmd_catalog(args) -> int:
    if args.catalog_action == "list":
        if getattr(args, "format", "json") == "text":
            for entry_id in named_ids():
                sys.stdout.write(f"{entry_id}\t{catalog_get(entry_id).title}\n")
        else:
            doc = {"entries": [{"id": i, "title": catalog_get(i).title} for i in named_ids()]}
            sys.stdout.buffer.write(canonical_json_bytes(doc))
        return EXIT_OK

    # run
    try:
        entry = catalog_get(args.id)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    facts = check_expected(entry)
    results = {
        "id": entry.id,
        "title": entry.title,
        "facts": [
            {"name": f.name, "ok": f.ok, "source": f.source, "detail": f.detail}
            for f in facts
        ],
        "all_ok": all(f.ok for f in facts),
    }
    seed = _effective_seed(RunOptions(), args.seed)
    report = make_report("catalog-run", entry.id, seed, results)
    _emit(report, args)
    if not results["all_ok"]:
        return EXIT_INVALID
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / main
# ---------------------------------------------------------------------------


def _add_common(sub, problem_arg: bool = True):
    if problem_arg:
        sub.add_argument("problem", help="problem file path or catalog id")
    sub.add_argument("--seed", type=int, default=None, help="RNG seed (VARCALC_SEED wins)")
    sub.add_argument(
        "--format", choices=("json", "text"), default="json", help="report format"
    )
    sub.add_argument("--witness-csv", metavar="PATH", help="dump witness rows as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varcalc",
        description="exact second-order variational calculus for polyhedral composites",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("analyze", help="growth battery plus exact cross-checks")
    _add_common(p)
    p.add_argument("--kappa", type=float, default=None, help="subregularity modulus to certify against")
    p.add_argument("--gamma", type=float, default=None, help="sampling radius around the base point")
    p.set_defaults(fn=cmd_analyze)

    p = subs.add_parser("d2", help="exact second subderivative along --w")
    _add_common(p)
    p.add_argument("--w", required=True, help="direction, comma-separated")
    p.add_argument("--v", default=None, help="override the base slope vector")
    p.set_defaults(fn=cmd_d2)

    p = subs.add_parser("parabolic", help="exact parabolic subderivative")
    _add_common(p)
    p.add_argument("--w", required=True, help="direction, comma-separated")
    p.add_argument("--z", default=None, help="second-order arc; omit to optimize over arcs")
    p.set_defaults(fn=cmd_parabolic)

    p = subs.add_parser("estimate", help="sampling estimate of a derivative object")
    _add_common(p)
    p.add_argument(
        "--object",
        required=True,
        choices=("subderivative", "d2", "parabolic"),
        help="which object to estimate",
    )
    p.add_argument("--w", required=True, help="direction, comma-separated")
    p.add_argument("--v", default=None, help="slope vector for d2 (default: zero)")
    p.add_argument("--z", default=None, help="arc vector for parabolic (default: zero)")
    p.add_argument("--slope", type=float, default=None, help="first-order slope for parabolic")
    p.add_argument("--schedule", default=None, help="grid schedule, e.g. t0=0.01,ratio=0.5,levels=24")
    p.set_defaults(fn=cmd_estimate)

    p = subs.add_parser("falsify-prox", help="search for a prox-regularity counterexample")
    _add_common(p)
    p.add_argument("--r-max", type=float, default=None, dest="r_max", help="modulus budget")
    p.add_argument("--eps", default=None, help="localization radii, comma-separated")
    p.set_defaults(fn=cmd_falsify_prox)

    p = subs.add_parser("catalog", help="built-in problem catalog")
    catsubs = p.add_subparsers(dest="catalog_action", required=True)
    pl = catsubs.add_parser("list", help="list catalog ids")
    pl.add_argument("--format", choices=("json", "text"), default="json")
    pl.set_defaults(fn=cmd_catalog)
    pr = catsubs.add_parser("run", help="re-check an entry's expected facts")
    pr.add_argument("id", help="catalog entry id")
    pr.add_argument("--seed", type=int, default=None)
    pr.add_argument("--format", choices=("json", "text"), default="json")
    pr.add_argument("--witness-csv", metavar="PATH")
    pr.set_defaults(fn=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CommandError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except ProblemFileError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except NotStationaryError as exc:
        sys.stderr.write(f"error: base point is not stationary: {exc}\n")
        return EXIT_INVALID
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
