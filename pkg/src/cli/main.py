# src/cli/main.py - Command-line front end

import argparse
import difflib
import json
import logging
import math
import sys
from functools import partial
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from src.cli.output import RunWriter, to_jsonable
from src.cli.verify import run_verify
from src.config import ConfigManager, load_config
from src.estimators import (
    DecaySeries,
    DepthRule,
    EstimateResult,
    draw_tilted_volumes,
    estimate_alpha,
    estimate_beta,
    estimate_chi,
    estimate_magnetization,
    estimate_peak_survival,
    estimate_slab_crossing,
    estimate_tail,
    estimate_triangle,
    estimate_truncated_susceptibility,
    fit_tail_exponent,
    peak_probabilities,
    resolve_threads,
)
from src.exceptions import DivergenceError, OracleDomainError, TiltlabError, UsageError
from src.experiments import (
    SweepSettings,
    TraceSettings,
    exact_chi,
    parse_grid,
    phase_sweep,
    susceptibility_exponent,
    tiltable_cells,
    trace_pcl_curve,
)
from src.graph_models import Family, GraphModel, parse_model
from src.layers import SlabSpec
from src.oracles import (
    OracleValue,
    ball_brute_force,
    ball_chi,
    certified_radius,
    fixed_end_alpha,
    fixed_end_chi,
    fixed_end_chi_pt_coefficient,
    fixed_end_crossing,
    fixed_end_descendants,
    fixed_end_pcl,
    oriented_alpha,
    oriented_chi_closed,
    oriented_chi_system,
    oriented_pcl,
    oriented_pt,
    peak_reach,
    tree_cluster,
)
from src.percolation import Budget, PercConfig
from src.performance import RunMonitor

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# flag dest -> config key
FLAG_KEYS = {
    "model": "run.model",
    "p": "run.p",
    "lam": "run.lambda",
    "h": "run.h",
    "samples": "run.samples",
    "seed": "run.seed",
    "threads": "run.threads",
    "slab": "run.slab",
    "out": "run.out",
    "budget_vertices": "budget.vertices",
    "budget_height": "budget.height",
    "n_max": "fit.n_max",
    "k_max": "fit.k_max",
    "thresholds": "fit.thresholds",
    "margin": "fit.margin",
    "p_tree": "sweep.p_tree",
    "p_lattice": "sweep.p_lattice",
    "lambdas": "trace.lambdas",
    "tolerance": "trace.tolerance",
}

ESTIMATE_COLUMNS = [
    "model",
    "p",
    "lambda",
    "mean",
    "se",
    "n_samples",
    "truncation_fraction",
    "seed",
    "budget_vertices",
    "budget_height",
]
DECAY_COLUMNS = ["n", "estimate", "se", "rate_value", "rate_value_se", "exact"]


class UsageArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting"""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


class RunContext:
    """Resolved parameters shared by every subcommand"""

    def __init__(self, args: argparse.Namespace, config: ConfigManager):
        self.args = args
        self.config = config
        self.model: GraphModel = parse_model(config.get("run.model"))
        self.seed = int(config.get("run.seed"))
        self.threads = resolve_threads(int(config.get("run.threads")))
        self.samples = int(config.get("run.samples"))
        self.lam = float(config.get("run.lambda"))
        self.h = float(config.get("run.h"))
        self.slab = SlabSpec.parse(str(config.get("run.slab")))
        self.budget = Budget(int(config.get("budget.vertices")), int(config.get("budget.height")))
        self.perc = PercConfig.parse(self.model, str(config.get("run.p")), self.seed)
        self.writer = RunWriter(Path(config.get("run.out")), config.get("output.float_format"))

    @property
    def window(self) -> Tuple[int, int]:
        return (int(self.config.get("fit.n_min")), int(self.config.get("fit.n_max")))

    @property
    def depth_rule(self) -> DepthRule:
        return DepthRule(
            initial=int(self.config.get("fit.depth_initial")),
            maximum=int(self.config.get("fit.depth_max")),
            tolerance_se=float(self.config.get("fit.depth_tolerance")),
            adaptive=bool(self.config.get("fit.adaptive_depth")),
        )

    def isotropic_p(self) -> Optional[float]:
        return self.perc.describe() if self.perc.is_isotropic else None  # type: ignore[return-value]

    def estimate_row(self, result: EstimateResult, **extra: Any) -> Dict[str, Any]:
        row = {
            "model": str(self.model),
            "p": self.config.get("run.p"),
            "lambda": self.lam,
            "mean": result.mean,
            "se": result.std_error,
            "n_samples": result.n_samples,
            "truncation_fraction": result.truncation_fraction,
            "seed": result.seed,
            "budget_vertices": self.budget.max_vertices,
            "budget_height": self.budget.max_abs_height,
        }
        row.update(extra)
        return row


def _write_estimate(ctx: RunContext, name: str, rows: List[Dict[str, Any]], extra_columns: Sequence[str]) -> None:
    ctx.writer.write_csv(f"{name}.csv", rows, ESTIMATE_COLUMNS + list(extra_columns))


def _write_series(ctx: RunContext, name: str, series: DecaySeries, exact: Callable[[int], float]) -> None:
    rows = [
        {
            "n": pt.n,
            "estimate": pt.estimate,
            "se": pt.std_error,
            "rate_value": pt.value,
            "rate_value_se": pt.value_se,
            "exact": exact(pt.n),
        }
        for pt in series.points
    ]
    ctx.writer.write_csv(f"{name}.csv", rows, DECAY_COLUMNS)
    payload = series.to_dict()
    payload.pop("points")
    ctx.writer.write_json(f"{name}.json", payload)
    logger.info(f"{name}: fitted rate {series.fitted_rate:.4f} +- {series.rate_se:.4f}")


def _fixed_end_p(ctx: RunContext) -> Optional[float]:
    if ctx.model.family is Family.FIXED_END_TREE:
        return ctx.isotropic_p()
    return None


def cmd_chi(ctx: RunContext) -> int:
    result = estimate_chi(ctx.model, ctx.perc, ctx.lam, ctx.samples, ctx.budget, ctx.threads)
    p = ctx.isotropic_p()
    exact = exact_chi(ctx.model, p, ctx.lam) if p is not None else None
    _write_estimate(ctx, "chi", [ctx.estimate_row(result, exact=exact)], ["exact"])
    ctx.writer.write_json("chi.json", result.to_dict())
    return 0


def cmd_magnetization(ctx: RunContext) -> int:
    draw = draw_tilted_volumes(ctx.model, ctx.perc, ctx.lam, ctx.samples, ctx.budget, ctx.threads)
    m = estimate_magnetization(ctx.model, ctx.perc, ctx.lam, ctx.h, ctx.samples, draw=draw)
    chi_h = estimate_truncated_susceptibility(ctx.model, ctx.perc, ctx.lam, ctx.h, ctx.samples, draw=draw)
    rows = [
        ctx.estimate_row(m, h=ctx.h, quantity="magnetization"),
        ctx.estimate_row(chi_h, h=ctx.h, quantity="truncated_susceptibility"),
    ]
    _write_estimate(ctx, "magnetization", rows, ["h", "quantity"])
    ctx.writer.write_json("magnetization.json", {"magnetization": m.to_dict(), "truncated_susceptibility": chi_h.to_dict()})
    return 0


def cmd_crossing(ctx: RunContext) -> int:
    target = ctx.args.target_layer
    if target is None:
        if math.isinf(ctx.slab.hi):
            raise UsageError("crossing needs --target-layer or a slab with a finite upper end")
        target = int(ctx.slab.hi)
    result = estimate_slab_crossing(ctx.model, ctx.perc, ctx.slab, target, ctx.samples, ctx.budget, ctx.threads)
    p = _fixed_end_p(ctx)
    exact = fixed_end_crossing(p, target).value if p is not None and target >= 0 else None
    row = ctx.estimate_row(result, slab=str(ctx.slab), target_layer=target, exact=exact)
    _write_estimate(ctx, "crossing", [row], ["slab", "target_layer", "exact"])
    ctx.writer.write_json("crossing.json", result.to_dict())
    return 0


def cmd_alpha(ctx: RunContext) -> int:
    n_max = int(ctx.config.get("fit.n_max"))
    series = estimate_alpha(
        ctx.model, ctx.perc, n_max, ctx.samples, ctx.budget, ctx.window,
        float(ctx.config.get("fit.rel_se_cap")), ctx.threads,
    )
    p = _fixed_end_p(ctx)
    if p is not None:
        series.metadata["exact_alpha"] = fixed_end_alpha(ctx.model.k, p).value
    _write_series(ctx, "alpha", series, lambda n: fixed_end_crossing(p, n).value if p is not None else math.nan)
    return 0


def cmd_beta(ctx: RunContext) -> int:
    n_max = int(ctx.config.get("fit.n_max"))
    downward = bool(ctx.args.downward)
    series = estimate_beta(
        ctx.model, ctx.perc, n_max, ctx.samples, ctx.depth_rule, ctx.budget, ctx.window,
        float(ctx.config.get("fit.rel_se_cap")), downward, ctx.threads,
    )
    p = _fixed_end_p(ctx)

    def exact(n: int) -> float:
        if p is None:
            return math.nan
        if downward:
            return fixed_end_descendants(ctx.model.k, p, n).value
        return fixed_end_crossing(p, n).value

    _write_series(ctx, "beta", series, exact)
    return 0


def cmd_peak(ctx: RunContext) -> int:
    k_max = int(ctx.config.get("fit.k_max"))
    series = estimate_peak_survival(
        ctx.model, ctx.perc, k_max, ctx.samples, ctx.budget, float(ctx.config.get("fit.rel_se_cap")), ctx.threads
    )
    p = _fixed_end_p(ctx)
    rows = []
    for k, estimate, se in peak_probabilities(series):
        exact = math.nan
        if p is not None:
            exact = 1.0 - p if k == 0 else peak_reach(ctx.model.k, p, k).value
        rows.append({"k": k, "estimate": estimate, "se": se, "exact": exact})
    ctx.writer.write_csv("peak.csv", rows, ["k", "estimate", "se", "exact"])
    payload = series.to_dict()
    payload.pop("points")
    ctx.writer.write_json("peak.json", payload)
    return 0


def cmd_triangle(ctx: RunContext) -> int:
    result = estimate_triangle(ctx.model, ctx.perc, ctx.samples, ctx.budget, ctx.threads)
    _write_estimate(ctx, "triangle", [ctx.estimate_row(result)], [])
    ctx.writer.write_json("triangle.json", result.to_dict())
    return 0


def cmd_tail(ctx: RunContext) -> int:
    thresholds = [int(x) for x in parse_grid(str(ctx.config.get("fit.thresholds")))]
    table = estimate_tail(ctx.model, ctx.perc, thresholds, ctx.samples, ctx.budget, ctx.threads)
    p = _fixed_end_p(ctx)
    oracle = tree_cluster(ctx.model.k, p) if p is not None else None
    rows = []
    for statistic, results in table.results.items():
        for n, result in zip(table.thresholds, results):
            lower, upper = result.interval if result.interval is not None else (math.nan, math.nan)
            exact = math.nan
            if oracle is not None and statistic == "vertex_count":
                exact = oracle.survival_tail(n).value
            rows.append(
                {
                    "statistic": statistic,
                    "n": n,
                    "estimate": result.mean,
                    "se": result.std_error,
                    "lower": lower,
                    "upper": upper,
                    "exact": exact,
                    "truncation_fraction": result.truncation_fraction,
                    "seed": result.seed,
                }
            )
    columns = ["statistic", "n", "estimate", "se", "lower", "upper", "exact", "truncation_fraction", "seed"]
    ctx.writer.write_csv("tail.csv", rows, columns)
    fit_range = (float(ctx.config.get("fit.tail_fit_lo")), float(ctx.config.get("fit.tail_fit_hi")))
    exponents = {}
    for statistic in table.results:
        slope, slope_se = fit_tail_exponent(table, statistic, fit_range)
        exponents[statistic] = {"slope": slope, "se": slope_se}
    ctx.writer.write_json(
        "tail.json",
        {
            "gap_ratio": table.gap_ratio,
            "gap_ratio_se": table.gap_ratio_se,
            "truncation_fraction": table.truncation_fraction,
            "exponents": exponents,
            "fit_range": list(fit_range),
            "seed": ctx.seed,
            "budget_vertices": ctx.budget.max_vertices,
            "budget_height": ctx.budget.max_abs_height,
        },
    )
    return 0


def cmd_sweep(ctx: RunContext) -> int:
    settings = SweepSettings(
        n_max=int(ctx.config.get("fit.n_max")),
        n_samples=ctx.samples,
        window=ctx.window,
        rel_se_cap=float(ctx.config.get("fit.rel_se_cap")),
        margin=float(ctx.config.get("fit.margin")),
        truncation_cap=float(ctx.config.get("sweep.truncation_cap")),
        depth_rule=ctx.depth_rule,
        budget=ctx.budget,
        threads=ctx.threads,
    )
    grid = phase_sweep(
        ctx.model,
        parse_grid(str(ctx.config.get("sweep.p_tree"))),
        parse_grid(str(ctx.config.get("sweep.p_lattice"))),
        ctx.seed,
        settings,
    )
    ctx.writer.write_frame("grid.csv", grid.to_frame())
    payload = dict(grid.metadata)
    payload["tiltable"] = [[c.p_tree, c.p_lattice] for c in tiltable_cells(grid)]
    ctx.writer.write_json("grid.json", payload)
    return 0


def cmd_trace(ctx: RunContext) -> int:
    settings = TraceSettings(
        n_max=int(ctx.config.get("fit.n_max")),
        n_samples=ctx.samples,
        window=ctx.window,
        rel_se_cap=float(ctx.config.get("fit.rel_se_cap")),
        margin=float(ctx.config.get("fit.margin")),
        depth_rule=ctx.depth_rule,
        budget=ctx.budget,
        threads=ctx.threads,
    )
    points = trace_pcl_curve(
        ctx.model,
        parse_grid(str(ctx.config.get("trace.lambdas"))),
        float(ctx.config.get("trace.tolerance")),
        ctx.seed,
        float(ctx.config.get("trace.p_lo")),
        float(ctx.config.get("trace.p_hi")),
        settings,
    )
    rows = [pt.to_row() for pt in points]
    ctx.writer.write_csv("curve.csv", rows, list(rows[0].keys()) if rows else ["lambda", "p_lo", "p_hi"])
    ctx.writer.write_json(
        "curve.json",
        {
            "model": str(ctx.model),
            "seed": ctx.seed,
            "tolerance": float(ctx.config.get("trace.tolerance")),
            "budget_vertices": ctx.budget.max_vertices,
            "budget_height": ctx.budget.max_abs_height,
        },
    )
    return 0


def _default_pc(ctx: RunContext) -> float:
    if ctx.model.family is Family.FIXED_END_TREE:
        return fixed_end_pcl(ctx.model.k, ctx.lam).value
    if ctx.model.family is Family.ORIENTED_TREE_112:
        return oriented_pcl(ctx.lam).value
    raise UsageError(f"No known p_c for {ctx.model}; pass --p-c")


def cmd_exponent(ctx: RunContext) -> int:
    p_c = ctx.args.p_c if ctx.args.p_c is not None else _default_pc(ctx)
    eps_grid = parse_grid(ctx.args.eps)
    result = susceptibility_exponent(
        ctx.model, p_c, eps_grid, ctx.seed, ctx.lam, ctx.samples, ctx.budget, ctx.threads
    )
    ctx.writer.write_frame("exponent.csv", result.to_frame())
    ctx.writer.write_json(
        "exponent.json",
        {
            "slope": result.slope,
            "slope_se": result.slope_se,
            "exact_slope": result.exact_slope,
            "budget_vertices": ctx.budget.max_vertices,
            "budget_height": ctx.budget.max_abs_height,
            **result.metadata,
        },
    )
    return 0


ORACLE_TAIL_TOLERANCE = 1e-6


def oracle_rows(
    model: GraphModel,
    p: float,
    lam: float,
    generations: Sequence[int] = (1, 2, 4, 8),
    thresholds: Sequence[int] = (1, 10, 100, 1000),
    tolerance: float = ORACLE_TAIL_TOLERANCE,
) -> List[Dict[str, Any]]:
    """Every exact quantity available for the model at (p, lambda)"""
    rows: List[Dict[str, Any]] = []

    def add(name: str, compute: Callable[[], OracleValue]) -> None:
        try:
            value = compute()
        except (DivergenceError, OracleDomainError) as e:
            logger.info(f"oracle {name} unavailable: {e}")
            rows.append({"quantity": name, "value": math.nan, "error_bound": math.nan, "method": "diverges"})
            return
        rows.append({"quantity": name, "value": value.value, "error_bound": value.error_bound, "method": value.method})

    def triangle() -> OracleValue:
        radius = certified_radius(model, p, lam, tolerance, integrand="triangle")
        return ball_brute_force(model, radius, "triangle", p, lam)

    if model.family is Family.FIXED_END_TREE:
        d = model.k
        add("p_c_lambda", lambda: fixed_end_pcl(d, lam))
        add("chi", lambda: fixed_end_chi(d, p, lam))
        add("chi_ball", lambda: ball_chi(model, p, lam, 80))
        add("alpha", lambda: fixed_end_alpha(d, p))
        add("chi_pt_coefficient", lambda: fixed_end_chi_pt_coefficient(d))
    elif model.family is Family.ORIENTED_TREE_112:
        add("p_c_lambda", lambda: oriented_pcl(lam))
        add("p_t", oriented_pt)
        add("chi", lambda: oriented_chi_closed(p, lam))
        add("chi_system", lambda: oriented_chi_system(p, lam))
        add("chi_ball", lambda: ball_chi(model, p, lam, 80))
        add("alpha", lambda: oriented_alpha(p))
    else:
        raise UsageError(f"No exact oracles for {model}; available for fixed-end-tree and oriented-tree-112")
    add("triangle", triangle)
    # both tree models are regular trees, so clusters are the same branching process
    gw = tree_cluster(model.degree, p)
    add("extinction", gw.extinction)
    add("cluster_finite", gw.cluster_finite)
    for k in generations:
        add(f"reach_generation_{k}", partial(gw.reach_generation, k))
        if model.family is Family.FIXED_END_TREE:
            add(f"peak_reach_{k}", partial(peak_reach, model.k, p, k))
    for n in thresholds:
        add(f"progeny_{n}", partial(gw.progeny, n))
        add(f"survival_tail_{n}", partial(gw.survival_tail, n))
    return rows


def cmd_oracle(ctx: RunContext) -> int:
    p = ctx.isotropic_p()
    if p is None:
        raise UsageError("oracle needs an isotropic --p")
    generations = range(1, int(ctx.config.get("fit.k_max")) + 1)
    thresholds = [int(x) for x in parse_grid(str(ctx.config.get("fit.thresholds")))]
    rows = oracle_rows(ctx.model, p, ctx.lam, generations, thresholds)
    document = {
        "model": str(ctx.model),
        "p": p,
        "lambda": ctx.lam,
        "quantities": {
            row["quantity"]: {"value": row["value"], "error_bound": row["error_bound"], "method": row["method"]}
            for row in rows
        },
    }
    for row in rows:
        row.update({"model": str(ctx.model), "p": p, "lambda": ctx.lam})
    ctx.writer.write_csv("oracle.csv", rows, ["model", "p", "lambda", "quantity", "value", "error_bound", "method"])
    ctx.writer.write_json("oracle.json", document)
    print(json.dumps(to_jsonable(document), sort_keys=True, indent=2))
    return 0


def cmd_verify(ctx: RunContext) -> int:
    results = run_verify(ctx.seed)
    ctx.writer.write_csv("verify.csv", [r.to_row() for r in results], ["check", "passed", "checked", "worst"])
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"{len(failed)} verification check(s) failed: {', '.join(failed)}")
        return 2
    logger.info(f"All {len(results)} verification checks passed")
    return 0


COMMANDS: Dict[str, Callable[[RunContext], int]] = {
    "verify": cmd_verify,
    "chi": cmd_chi,
    "crossing": cmd_crossing,
    "alpha": cmd_alpha,
    "beta": cmd_beta,
    "triangle": cmd_triangle,
    "magnetization": cmd_magnetization,
    "tail": cmd_tail,
    "peak": cmd_peak,
    "sweep": cmd_sweep,
    "trace": cmd_trace,
    "exponent": cmd_exponent,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    common = UsageArgumentParser(add_help=False)
    common.add_argument("--model", help="graph model, e.g. fixed-end-tree:k=4 or tree-x-lattice:k=4,d=1")
    common.add_argument("--p", help="retention probability, or per-orbit list such as tree=0.3,lattice=0.01")
    common.add_argument("--lambda", dest="lam", type=float, help="tilt exponent")
    common.add_argument("--h", type=float, help="magnetization field")
    common.add_argument("--samples", type=int, help="number of Monte Carlo samples")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--threads", type=int, help="worker count (0 = all cores)")
    common.add_argument("--budget-vertices", dest="budget_vertices", type=int)
    common.add_argument("--budget-height", dest="budget_height", type=int)
    common.add_argument("--slab", help="layer slab lo:hi, inf allowed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="configuration file")
    common.add_argument("--n-max", dest="n_max", type=int)
    common.add_argument("--k-max", dest="k_max", type=int)
    common.add_argument("--thresholds", help="tail thresholds, comma list")
    common.add_argument("--margin", type=float, help="classification margin in standard errors")

    parser = UsageArgumentParser(prog="tiltlab", description="Percolation on nonunimodular transitive graphs")
    sub = parser.add_subparsers(dest="command", parser_class=UsageArgumentParser)
    for name in COMMANDS:
        cmd = sub.add_parser(name, parents=[common])
        if name == "crossing":
            cmd.add_argument("--target-layer", dest="target_layer", type=int)
        elif name == "beta":
            cmd.add_argument("--downward", action="store_true", help="estimate E[X_-n] in slab [-D, 0]")
        elif name == "sweep":
            cmd.add_argument("--p-tree", dest="p_tree", help="grid lo:hi:step or comma list")
            cmd.add_argument("--p-lattice", dest="p_lattice", help="grid lo:hi:step or comma list")
        elif name == "trace":
            cmd.add_argument("--lambdas", help="grid lo:hi:step or comma list")
            cmd.add_argument("--tolerance", type=float)
        elif name == "exponent":
            cmd.add_argument("--p-c", dest="p_c", type=float, help="critical point (default: exact p_c(lambda))")
            cmd.add_argument("--eps", default="0.02,0.04,0.08,0.16", help="distances below p_c")
    return parser


def setup_logging(level: str, log_file: str = "") -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO), format=LOG_FORMAT, handlers=handlers, force=True)


def _check_command(argv: Sequence[str]) -> None:
    if not argv or argv[0].startswith("-"):
        return
    if argv[0] not in COMMANDS:
        hint = difflib.get_close_matches(argv[0], COMMANDS.keys(), n=1)
        suggestion = f" (did you mean '{hint[0]}'?)" if hint else ""
        raise UsageError(f"Unknown command '{argv[0]}'{suggestion}; choose from {', '.join(COMMANDS)}")


def resolve_config(args: argparse.Namespace) -> ConfigManager:
    """Defaults < environment < config file < flags"""
    config = load_config(args.config)
    overrides = {key: getattr(args, dest, None) for dest, key in FLAG_KEYS.items()}
    config.apply_overrides(overrides)
    return config


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _check_command(argv)
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError(f"No command given; choose from {', '.join(COMMANDS)}")
        config = resolve_config(args)
        setup_logging(config.get("logging.level"), config.get("logging.file"))
        ctx = RunContext(args, config)
        logger.info(f"tiltlab {args.command}: model={ctx.model}, p={ctx.perc.describe()}, seed={ctx.seed}, threads={ctx.threads}")
        with RunMonitor(args.command) as monitor:
            monitor.start_stage()
            code = COMMANDS[args.command](ctx)
            monitor.end_stage(ctx.samples)
        if config.get("output.manifest"):
            ctx.writer.write_manifest(argv, config.to_dict(), ctx.seed)
        return code
    except UsageError as e:
        print(f"tiltlab: error: {e}", file=sys.stderr)
        return 1
    except TiltlabError as e:
        logger.error(f"Run failed: {e}")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
