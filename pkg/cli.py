"""
Command-line front end for the frog-model toolkit.

    python main.py fence --d 2 --kmax 8 --reps 1000 --seed 7
    python main.py certify --model phi6 --power 66
    python main.py delta --n 1
"""

import argparse
import logging
import math
import sys
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from core.certify import (
    DEFAULT_Y,
    irreducibility_check,
    minimal_passing_power,
    model_matrix,
    power_rowsum_certificate,
    spectral_radius_estimate,
    single_type_transient,
    theta_star,
)
from core.config import CliConfig, default_seed, format_rational, parse_rational
from core.errors import FrogTreesError, ResourceError, UsageError
from core.experiments import delta_lower_bound, event_abc_counts, fence_experiment, root_visit_census
from core.export import dumps_json, fence_csv_text, with_schema, write_text
from core.frog_model import Custom, NonePerSite, OnePerSite
from core.graphs import parse_graph
from core.laurent import eval_matrix
from core.rational_matrix import DEFAULT_BIT_RAIL
from core.rde import RDE_MAX_DEPTH, goodness_of_fit, rde_pmf_exact, sample_many
from core.recurrence import ArithmeticMode, DyadicFunctionTable, EXACT_ITERATE_MAX, poisson_seq
from core.rng import RngStreamSpec
from core.two_step import SplitRule

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CERTIFICATE_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

INIT_CONDITIONS = {
    "one": OnePerSite(),
    "none": NonePerSite(),
    "no-ancestors": Custom(no_ancestor_frogs=True),
}


def status(message: str) -> None:
    print(message, file=sys.stderr)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise UsageError(message)


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=str, default=None, help="Artifact path (default: $FROGTREES_OUTPUT_DIR)")
    common.add_argument("--format", choices=["json", "csv"], default="json", dest="output_format")
    common.add_argument("--parallel", type=int, default=1, help="Worker processes")
    common.add_argument("--report", action="store_true", help="Also write a PDF report")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true")
    verbosity.add_argument("--quiet", action="store_true")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=None, help="Master seed (default: $FROGTREES_SEED)")

    parser = argparse.ArgumentParser(prog="frogtrees", description="Frog model on trees: simulation and exact certificates")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("fence", parents=[common, seeded], help="Stunning-fence statistics")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--step-cap", type=int, default=1_000_000)
    p.add_argument("--let-woken-move", action="store_true", help="Frogs woken on the fence are not stunned")

    p = sub.add_parser("certify", parents=[common], help="Exact row-sum certificate")
    p.add_argument("--model", choices=["phi6", "phi27"], required=True)
    p.add_argument("--power", type=int, required=True)
    p.add_argument("--y", type=str, default=format_rational(DEFAULT_Y))
    p.add_argument("--split", choices=[r.value for r in SplitRule], default=SplitRule.SHARED.value)
    p.add_argument("--bit-rail", type=int, default=DEFAULT_BIT_RAIL)
    p.add_argument("--search", type=int, default=None, metavar="E_MAX", help="Also find the smallest passing power")
    p.add_argument("--dump", type=str, default=None, help="Write the matrix in canonical text form")

    p = sub.add_parser("mu", parents=[common], help="Single-type transience criterion")
    p.add_argument("--d", type=int, required=True)

    p = sub.add_parser("recurrence", parents=[common], help="Iterates of the generating-function operator")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=str, required=True)
    p.add_argument("--exact", action="store_true")

    p = sub.add_parser("rde", parents=[common, seeded], help="Law of the truncated root-visit count")
    p.add_argument("--depth", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--sample", type=int, default=None, metavar="R")

    p = sub.add_parser("census", parents=[common, seeded], help="Root-visit census")
    p.add_argument("--graph", type=str, required=True, help="dary:D, hom:D, alt56:R or zglue6")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--init", choices=sorted(INIT_CONDITIONS), default="one")
    p.add_argument("--depth-cap", type=int, default=8)

    p = sub.add_parser("delta", parents=[common], help="Escape probability lower bound")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("abc", parents=[common, seeded], help="Event A/B/C frequencies")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--depth-cap", type=int, default=10)

    return parser


# ----------------------------------------------------------------------
# Subcommands: each returns (payload, csv text or None, exit code)
# ----------------------------------------------------------------------

Outcome = Tuple[Dict, Optional[str], int]


def cmd_fence(args, config: CliConfig) -> Outcome:
    _require(args.d >= 2, "--d must be >= 2")
    _require(1 <= args.kmax <= 25, "--kmax must lie in [1, 25]")
    _require(args.reps >= 1, "--reps must be >= 1")
    _require(args.step_cap >= 1, "--step-cap must be >= 1")
    stats = fence_experiment(
        args.d, args.kmax, args.reps, config.seed,
        step_cap=args.step_cap,
        stun_woken_on_fence=not args.let_woken_move,
        parallel=config.parallel,
    )
    status(f"✓ {args.reps - stats.aborted} replicates completed, {stats.aborted} aborted")
    if config.report:
        from core.reporting import ReportGenerator
        path = ReportGenerator().generate_report(config.header_lines(), fence=stats, name="fence")
        status(f"✓ Report written to: {path}")
    payload = {"d": stats.d, "records": stats.rows(), "aborted": stats.aborted, "diagnostics": stats.diagnostics}
    return payload, fence_csv_text(stats), EXIT_OK


def cmd_certify(args, config: CliConfig) -> Outcome:
    y = parse_rational(args.y, "--y")
    _require(y > 0, "--y must be positive")
    _require(args.power >= 1, "--power must be >= 1")
    rule = SplitRule(args.split)
    typed = model_matrix(args.model, rule, config.parallel)
    if args.dump:
        write_text(args.dump, typed.dump())
        status(f"✓ Matrix dumped to: {args.dump}")
    m = eval_matrix(typed, y)
    cert = power_rowsum_certificate(m, args.power, matrix_id=args.model, y=y, bit_rail=args.bit_rail)
    payload = cert.to_dict()
    payload["irreducible"] = irreducibility_check(typed)
    # the float estimate is only meaningful for irreducible matrices
    payload["spectral_radius_float"] = (
        spectral_radius_estimate(typed.evaluate_float(float(y))) if payload["irreducible"] else None
    )
    if args.search:
        payload["minimal_passing_power"] = minimal_passing_power(m, args.search, args.bit_rail)
    status(f"{'✓' if cert.passed else '✗'} {args.model}^{args.power} at y={args.y}: "
           f"max row sum {cert.max_row_sum_float:.10f}")
    if config.report:
        from core.reporting import ReportGenerator
        path = ReportGenerator().generate_report(config.header_lines(), certificates=[cert], name="certificate")
        status(f"✓ Report written to: {path}")
    return payload, None, EXIT_OK if cert.passed else EXIT_CERTIFICATE_FAILED


def cmd_mu(args, config: CliConfig) -> Outcome:
    _require(args.d >= 2, "--d must be >= 2")
    theta, mu = theta_star(args.d)
    payload = {
        "d": args.d,
        "theta_star": theta,
        "mu_star": mu,
        "transient": single_type_transient(args.d),
        "threshold": 3 + 2 * math.sqrt(2),
    }
    return payload, None, EXIT_OK


def cmd_recurrence(args, config: CliConfig) -> Outcome:
    x = parse_rational(args.x, "--x")
    _require(0 <= x <= 1, "--x must lie in [0, 1]")
    _require(args.n >= 0, "--n must be >= 0")
    if args.exact:
        _require(args.n <= EXACT_ITERATE_MAX, f"--n must be <= {EXACT_ITERATE_MAX} with --exact")
    mode = ArithmeticMode.EXACT if args.exact else ArithmeticMode.FLOAT
    table = DyadicFunctionTable(args.n, x, mode)
    bound = math.exp(poisson_seq(args.n)[args.n] * (float(x) - 1))
    value_float = table.float_value()
    payload = {
        "n": args.n,
        "x": format_rational(x),
        "value": format_rational(table.value()) if args.exact else value_float,
        "value_float": value_float,
        "bound": bound,
        "slack": bound - value_float,
        "dominated": table.le(bound),
    }
    return payload, None, EXIT_OK


def cmd_rde(args, config: CliConfig) -> Outcome:
    _require(0 <= args.depth <= RDE_MAX_DEPTH, f"--depth must lie in [0, {RDE_MAX_DEPTH}]")
    pmf = rde_pmf_exact(args.depth)
    payload = pmf.to_dict()
    if args.sample is not None:
        _require(args.sample >= 1, "--sample must be >= 1")
        rng = RngStreamSpec(config.seed, 0).generator()
        samples = sample_many(args.depth, args.sample, rng)
        statistic, pvalue = goodness_of_fit(samples, pmf)
        counts = np.bincount(samples, minlength=pmf.support_max + 1)
        payload["samples"] = {
            "n": args.sample,
            "histogram": {str(v): int(c) for v, c in enumerate(counts) if c},
            "chi2": statistic,
            "p_value": pvalue,
        }
    return payload, None, EXIT_OK


def cmd_census(args, config: CliConfig) -> Outcome:
    _require(args.horizon >= 0, "--horizon must be >= 0")
    _require(args.reps >= 1, "--reps must be >= 1")
    _require(args.depth_cap >= 1, "--depth-cap must be >= 1")
    try:
        graph = parse_graph(args.graph)
    except FrogTreesError as e:
        raise UsageError(f"--graph: {e}") from e
    result = root_visit_census(
        graph, INIT_CONDITIONS[args.init], args.horizon, args.reps, config.seed,
        depth_cap=args.depth_cap, parallel=config.parallel,
    )
    return result.to_dict(), None, EXIT_OK


def cmd_delta(args, config: CliConfig) -> Outcome:
    _require(args.n >= 1, "--n must be >= 1")
    return delta_lower_bound(args.n).to_dict(), None, EXIT_OK


def cmd_abc(args, config: CliConfig) -> Outcome:
    _require(args.reps >= 1, "--reps must be >= 1")
    _require(args.depth_cap >= 2, "--depth-cap must be >= 2")
    tally = event_abc_counts(args.reps, args.depth_cap, config.seed, parallel=config.parallel)
    payload = {"reps": args.reps, "depth_cap": args.depth_cap, "counts": dict(sorted(tally.items()))}
    payload.update({f"p_{label}": count / args.reps for label, count in sorted(tally.items())})
    return payload, None, EXIT_OK


COMMANDS: Dict[str, Callable] = {
    "fence": cmd_fence,
    "certify": cmd_certify,
    "mu": cmd_mu,
    "recurrence": cmd_recurrence,
    "rde": cmd_rde,
    "census": cmd_census,
    "delta": cmd_delta,
    "abc": cmd_abc,
}

PARAM_EXCLUDE = {"subcommand", "out", "output_format", "parallel", "report", "verbose", "quiet", "seed", "dump"}


def make_config(args) -> CliConfig:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in PARAM_EXCLUDE}
    seed = getattr(args, "seed", None)
    if "seed" in vars(args):
        seed = default_seed() if seed is None else seed
        if not 0 <= seed < 1 << 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
    if args.parallel < 1:
        raise UsageError("--parallel must be >= 1")
    return CliConfig(
        subcommand=args.subcommand,
        params=params,
        seed=seed,
        output=args.out,
        output_format=args.output_format,
        parallel=args.parallel,
        report=args.report,
    )


def run_cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        config = make_config(args)
        if config.output_format == "csv" and args.subcommand != "fence":
            raise UsageError("--format csv is only available for fence")
        for line in config.header_lines():
            print(line)
        payload, csv_text, code = COMMANDS[args.subcommand](args, config)
    except ResourceError as e:
        status(f"✗ Resource limit: {e}")
        for key, value in e.diagnostics.items():
            status(f"    {key}: {value}")
        return EXIT_RESOURCE
    except UsageError as e:
        parser.print_usage(sys.stderr)
        status(f"✗ {e}")
        return EXIT_USAGE
    except FrogTreesError as e:
        status(f"✗ {type(e).__name__}: {e}")
        return EXIT_USAGE

    if config.output_format == "csv":
        text = csv_text
    else:
        text = dumps_json(with_schema(args.subcommand, payload))
    path = write_text(config.output_path(), text)
    print(text, end="")
    status(f"✓ {args.subcommand} output written to: {path}")
    return code
