"""
Command-line interface.

Subcommands
-----------
gen        emit a matrix from a preset or a GenSpec JSON config
perturb    emit a perturbation of a matrix file plus its measured
           magnitudes
levscores  leverage scores of a matrix file
bounds     evaluate a named bound for a matrix/perturbation pair
figure     run one figure experiment and emit CSV + SVG
check      run the full acceptance suite (nonzero exit on failure)

Common flags: --seed, --out, --config, --format.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import acceptance
from .bounds import (
    HypothesisError,
    bound_c1,
    bound_t1,
    bound_t2,
    bound_t3_1,
    bound_t3_2,
    bound_t3_3,
    bound_t3_4,
)
from .angles import principal_angles
from .experiments import (
    BoundViolationError,
    ExperimentConfig,
    FigureRow,
    emit_csv,
    run_figure,
)
from .generate import (
    GenSpec,
    generate,
    stepped_illconditioned_spec,
    stepped_orthonormal_spec,
)
from .io import format_float, read_matrix, write_matrix
from .leverage import leverage_qr, matrix_stats, relative_diffs
from .linalg import RankDeficiencyError, householder_qr
from .perturb import PerturbationSpec, make_perturbation, measure

GEN_PRESETS = {
    "stepped": stepped_orthonormal_spec,
    "stepped-illconditioned": stepped_illconditioned_spec,
}

BOUND_NAMES = ("t1", "c1", "t2", "t3_1", "t3_2", "t3_3", "t3_4")


def _add_common(parser, out_default=None):
    parser.add_argument(
        "--seed", type=int, default=None, help="RNG seed (deterministic default)"
    )
    parser.add_argument("--out", default=out_default, help="output path or directory")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="report format"
    )


def _seed(args, fallback=0):
    return fallback if args.seed is None else args.seed


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qrlev",
        description="Leverage scores via QR, perturbation generators, and bound checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a matrix")
    p.add_argument("--preset", choices=sorted(GEN_PRESETS), help="built-in recipe")
    _add_common(p, out_default="matrix.txt")

    p = sub.add_parser("perturb", help="generate a perturbation of a matrix file")
    p.add_argument("matrix", help="input matrix file")
    _add_common(p, out_default="delta.txt")
    p.add_argument("--metrics-out", help="where to write measured magnitudes")

    p = sub.add_parser("levscores", help="leverage scores of a matrix file")
    p.add_argument("matrix", help="input matrix file")
    _add_common(p)

    p = sub.add_parser("bounds", help="evaluate a bound for matrix + perturbation files")
    p.add_argument("name", choices=BOUND_NAMES, help="bound to evaluate")
    p.add_argument("--matrix", required=True, help="base matrix file")
    p.add_argument("--delta", required=True, help="perturbation file")
    _add_common(p)

    p = sub.add_parser("figure", help="run a figure experiment")
    p.add_argument("number", type=int, choices=range(1, 6), help="figure number")
    _add_common(p, out_default=".")
    p.add_argument(
        "--no-assert",
        action="store_true",
        help="skip the bound-holds invariant before emitting",
    )

    p = sub.add_parser("check", help="run the acceptance suite")
    _add_common(p)
    return parser


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def cmd_gen(args):
    if args.config:
        spec = GenSpec.from_dict(_load_json(args.config))
    elif args.preset:
        spec = GEN_PRESETS[args.preset]()
    else:
        print("gen: provide --preset or --config", file=sys.stderr)
        return 1
    write_matrix(generate(spec, _seed(args)), args.out)
    print(args.out)
    return 0


def cmd_perturb(args):
    a = read_matrix(args.matrix)
    if not args.config:
        print("perturb: --config with a PerturbationSpec is required", file=sys.stderr)
        return 1
    spec = PerturbationSpec.from_dict(_load_json(args.config))
    delta = make_perturbation(spec, a, rng=_seed(args))
    write_matrix(delta, args.out)
    print(args.out)
    metrics = measure(a, delta)
    payload = {
        "eps_two": metrics.eps_two,
        "eps_fro": metrics.eps_fro,
        "eps_two_perp": metrics.eps_two_perp,
        "eps_fro_perp": metrics.eps_fro_perp,
        "eps_row_max": float(np.nanmax(metrics.eps_row)),
        "eps_row_perp_max": float(np.nanmax(metrics.eps_row_perp)),
    }
    if args.metrics_out:
        with open(args.metrics_out, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        print(json.dumps(payload, indent=2))
    return 0


def cmd_levscores(args):
    lev = leverage_qr(read_matrix(args.matrix))
    if args.format == "json":
        text = json.dumps([float(x) for x in lev]) + "\n"
    else:
        text = "j,ell\n" + "".join(
            f"{j},{format_float(x)}\n" for j, x in enumerate(lev)
        )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(args.out)
    else:
        sys.stdout.write(text)
    return 0


def _componentwise_eta(a, delta):
    """Per-row scaling factors when delta is a componentwise row scaling."""
    scale = np.abs(a)
    bad = (scale == 0) & (np.abs(delta) > 0)
    if bad.any():
        raise HypothesisError(
            "delta perturbs zero entries of the matrix; not a componentwise "
            "row-scaled perturbation"
        )
    ratio = np.where(scale > 0, np.abs(delta) / np.maximum(scale, 1e-300), 0.0)
    return ratio.max(axis=1)


def cmd_bounds(args):
    a = read_matrix(args.matrix)
    delta = read_matrix(args.delta)
    lev = leverage_qr(a)
    lev_tilde = leverage_qr(a + delta)
    rel = relative_diffs(lev, lev_tilde)

    name = args.name
    if name in ("t1", "c1"):
        q = householder_qr(a).q
        q_tilde = householder_qr(a + delta).q
        angles = principal_angles(q, q_tilde)
        if name == "t1":
            report = bound_t1(lev, angles, observed=np.abs(lev_tilde - lev))
        else:
            report = bound_c1(lev, angles, observed=rel)
        reports = [report]
    elif name == "t3_4":
        stats = matrix_stats(a)
        eta = _componentwise_eta(a, delta)
        reports = [bound_t3_4(eta, a.shape[1], kappa2=stats.kappa2, observed=rel)]
    else:
        stats = matrix_stats(a)
        metrics = measure(a, delta)
        if name == "t2":
            reports = list(bound_t2(lev, stats, metrics, observed=rel))
        elif name == "t3_1":
            reports = [bound_t3_1(lev, stats, metrics, observed=rel)]
        elif name == "t3_2":
            reports = [bound_t3_2(stats, metrics, observed=rel)]
        else:
            reports = [bound_t3_3(stats, metrics, observed=rel)]

    rows = []
    for report in reports:
        for j in range(lev.shape[0]):
            rows.append(
                FigureRow(
                    j=j,
                    ell=float(lev[j]),
                    ell_tilde=float(lev_tilde[j]),
                    rel_diff=float(report.observed[j]),
                    bound=float(report.per_index_bound[j]),
                    theorem=report.theorem,
                    panel=report.theorem,
                )
            )
    if args.format == "json":
        text = json.dumps(
            [
                {
                    "theorem": r.theorem,
                    "j": r.j,
                    "ell": r.ell,
                    "observed": r.rel_diff,
                    "bound": r.bound,
                }
                for r in rows
            ]
        ) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
            print(args.out)
        else:
            sys.stdout.write(text)
    else:
        out = args.out or "bounds.csv"
        emit_csv(rows, out)
        print(out)
    return 0


def cmd_figure(args):
    if args.config:
        cfg = ExperimentConfig.from_dict(_load_json(args.config))
        if args.out != ".":
            cfg.output_dir = args.out
    else:
        cfg = ExperimentConfig(
            figure=f"fig{args.number}", seed=_seed(args), output_dir=args.out or "."
        )
    _, csv_path, svg_path = run_figure(cfg, assert_bounds=not args.no_assert)
    print(csv_path)
    print(svg_path)
    return 0


def cmd_check(args):
    results = acceptance.run_all(seed=_seed(args, acceptance.DEFAULT_SEED))
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"criterion {res.number:2d} [{status}] {res.name}: {res.detail}")
        failed += not res.passed
    print(f"{len(results) - failed}/{len(results)} criteria passed")
    return 1 if failed else 0


COMMANDS = {
    "gen": cmd_gen,
    "perturb": cmd_perturb,
    "levscores": cmd_levscores,
    "bounds": cmd_bounds,
    "figure": cmd_figure,
    "check": cmd_check,
}


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("QRLEV_LOGLEVEL", "INFO"),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (
        ValueError,
        HypothesisError,
        RankDeficiencyError,
        BoundViolationError,
        OSError,
    ) as exc:
        print(f"qrlev {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
