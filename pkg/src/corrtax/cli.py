"""
``corrtax`` command line: batch analysis, file in, file out.

Every subcommand reads a path or ``-`` for stdin. Exit status is 0 on
success, 1 when the input data fails validation and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from corrtax import corrnet, dynamics, panel, synth, taxonomy
from corrtax.errors import CorrtaxError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2

FLOOR_ENV = "CORRTAX_FLOOR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        accepted = ", ".join(sorted(a for action in self._actions for a in action.option_strings))
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\naccepted flags: {accepted}\n")


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _floor(args) -> float | None:
    if args.floor is not None:
        return args.floor
    env = os.environ.get(FLOOR_ENV)
    if not env:
        return None
    try:
        return float(env)
    except ValueError:
        raise UsageError(f"{FLOOR_ENV} must be a number, got {env!r}") from None


def _is_matrix(text: str) -> bool:
    head = text.lstrip("﻿").lstrip()
    if head.startswith("{"):
        return True
    first = head.split("\n", 1)[0].split(",", 1)[0].strip().strip('"')
    return first.lower() != "date"


def _load_sales(text: str, args) -> panel.SalesPanel:
    sales = panel.parse_panel(text)
    eps = _floor(args)
    if eps is not None:
        sales = panel.apply_floor(sales, eps)
    return panel.validate_panel(sales)


def _load_returns(args) -> panel.ReturnPanel:
    text = _read_input(args.input)
    if args.kind == "returns":
        return panel.parse_returns(text)
    return panel.log_returns(_load_sales(text, args))


def _load_correlation(args) -> corrnet.CorrelationMatrix:
    text = _read_input(args.input)
    if _is_matrix(text):
        assets, values, key = corrnet.parse_matrix(text)
        if key == "d":
            raise CorrtaxError("expected a correlation matrix, got a distance matrix")
        return corrnet.CorrelationMatrix(assets, values)
    if args.kind == "returns":
        returns = panel.parse_returns(text)
    else:
        returns = panel.log_returns(_load_sales(text, args))
    return corrnet.correlation_matrix(returns)


def _load_distance(args) -> corrnet.DistanceMatrix:
    text = _read_input(args.input)
    if _is_matrix(text):
        assets, values, key = corrnet.parse_matrix(text)
        if key == "d":
            return corrnet.DistanceMatrix(assets, values)
        return corrnet.distance_matrix(corrnet.CorrelationMatrix(assets, values))
    if args.kind == "returns":
        returns = panel.parse_returns(text)
    else:
        returns = panel.log_returns(_load_sales(text, args))
    return corrnet.distance_matrix(corrnet.correlation_matrix(returns))


def _matrix_table(assets, values) -> str:
    width = max(8, max(len(a) for a in assets))
    lines = [" " * width + "".join(f"{a:>{width + 2}}" for a in assets)]
    for name, row in zip(assets, values):
        lines.append(f"{name:<{width}}" + "".join(f"{v:>{width + 2}.4f}" for v in row))
    return "\n".join(lines) + "\n"


# -- subcommands -----------------------------------------------------------


def cmd_validate(args) -> int:
    text = _read_input(args.input)
    try:
        sales = _load_sales(text, args)
        panel.validate_panel(sales, args.min_length)
    except CorrtaxError as exc:
        if args.format == "json":
            _write_output(json.dumps({"valid": False, "error": str(exc)}) + "\n", args.output)
        else:
            _write_output(f"invalid panel: {exc}\n", args.output)
        return EXIT_INVALID
    report = {
        "valid": True,
        "rows": sales.n_rows,
        "assets": list(sales.assets),
        "first_date": sales.dates[0].isoformat(),
        "last_date": sales.dates[-1].isoformat(),
    }
    if args.format == "json":
        out = json.dumps(report) + "\n"
    else:
        out = (
            f"panel ok: {sales.n_rows} rows x {sales.n_assets} assets\n"
            f"dates: {report['first_date']} .. {report['last_date']}\n"
            f"assets: {', '.join(sales.assets)}\n"
        )
    _write_output(out, args.output)
    return EXIT_OK


def cmd_returns(args) -> int:
    returns = panel.log_returns(_load_sales(_read_input(args.input), args))
    _write_output(panel.panel_to_csv(returns), args.output)
    return EXIT_OK


def cmd_corr(args) -> int:
    corr = _load_correlation(args)
    if args.distance:
        values, key = corrnet.distance_matrix(corr).d, "d"
    else:
        values, key = corr.rho, "rho"
    if args.format == "csv":
        out = corrnet.matrix_to_csv(corr.assets, values)
    elif args.format == "json":
        out = corrnet.matrix_to_json(corr.assets, values, key) + "\n"
    else:
        out = _matrix_table(corr.assets, values)
    _write_output(out, args.output)
    return EXIT_OK


def cmd_census(args) -> int:
    result = corrnet.census(_load_correlation(args))
    if args.format == "json":
        out = corrnet.census_to_json(result) + "\n"
    else:
        out = (
            f"{'strong':>10} {'weak':>8} {'negative':>10} {'pairs':>8}\n"
            f"{result.strong:>10} {result.weak:>8} {result.negative:>10} {result.pairs:>8}\n"
        )
    _write_output(out, args.output)
    return EXIT_OK


def cmd_pairs(args) -> int:
    ranked = corrnet.top_pairs(_load_correlation(args), args.top)
    if args.format == "json":
        out = json.dumps([{"first": p.first, "second": p.second, "rho": p.rho, "d": p.distance} for p in ranked]) + "\n"
    elif args.format == "csv":
        out = "first,second,rho,d\n" + "".join(f"{p.first},{p.second},{p.rho!r},{p.distance!r}\n" for p in ranked)
    else:
        out = "".join(f"{p.rho:.2f}  {p.first} – {p.second}  (d = {p.distance:.2f})\n" for p in ranked)
    _write_output(out, args.output)
    return EXIT_OK


def cmd_mst(args) -> int:
    tree = taxonomy.minimum_spanning_tree(_load_distance(args))
    if args.format == "dot":
        out = taxonomy.export_dot(tree)
    elif args.format == "json":
        out = taxonomy.tree_to_json(tree) + "\n"
    else:
        lines = []
        for e in tree.edges:
            a, b = corrnet.canonical_pair(tree.assets[e.i], tree.assets[e.j])
            lines.append(f"{e.weight:.4f}  {a} – {b}")
        lines.append(f"total weight {tree.total_weight:.4f}")
        out = "\n".join(lines) + "\n"
    _write_output(out, args.output)
    return EXIT_OK


def cmd_tree(args) -> int:
    dendro = taxonomy.single_linkage(_load_distance(args))
    if args.format == "newick":
        out = taxonomy.export_newick(dendro) + "\n"
    elif args.format == "json":
        out = json.dumps(
            {"leaves": list(dendro.leaves), "merges": [[m.left, m.right, m.height] for m in dendro.merges]}
        ) + "\n"
    else:
        members = dendro.members()
        lines = []
        for m in dendro.merges:
            left = ",".join(dendro.leaves[i] for i in members[m.left])
            right = ",".join(dendro.leaves[i] for i in members[m.right])
            lines.append(f"{m.height:.4f}  {{{left}}} + {{{right}}}")
        out = "\n".join(lines) + "\n"
    _write_output(out, args.output)
    return EXIT_OK


def cmd_halflife(args) -> int:
    returns = _load_returns(args)
    trees = dynamics.rolling_trees(returns, dynamics.WindowPlan(args.width, args.step))
    lag_duration = args.step * args.step_duration
    curve = dynamics.edge_survival(trees, args.origin)
    single = dynamics.tree_half_life(curve, lag_duration)
    mean = dynamics.mean_half_life(trees, lag_duration) if len(trees) >= 2 else dynamics.HalfLifeEstimate(None, 0)
    if args.format == "csv":
        out = dynamics.survival_to_csv(curve)
    elif args.format == "json":
        doc = json.loads(dynamics.survival_to_json(curve, single))
        doc["mean_half_life"] = mean.half_life
        doc["mean_origin_count"] = mean.origin_count
        out = json.dumps(doc) + "\n"
    else:
        def show(est):
            return "undefined" if not est.defined else f"{est.half_life:.4f} weeks"

        lines = [
            f"# windows: {len(trees)} (width {args.width}, step {args.step})",
            f"# t_half from origin {args.origin}: {show(single)}",
            f"# mean t_half over {mean.origin_count} origins: {show(mean)}",
            "# lag fraction",
        ]
        lines += [f"{int(l)} {f:.6f}" for l, f in zip(curve.lags, curve.fraction)]
        out = "\n".join(lines) + "\n"
    _write_output(out, args.output)
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one width")
    return values


def cmd_scaling(args) -> int:
    returns = _load_returns(args)
    max_fit = None if args.max_fit_width <= 0 else args.max_fit_width
    result = dynamics.half_life_scaling(returns, args.widths, args.step, args.step_duration, max_fit)
    if args.format == "csv":
        out = dynamics.scaling_to_csv(result)
    elif args.format == "json":
        out = dynamics.scaling_to_json(result) + "\n"
    else:
        out = dynamics.scaling_plot_data(result)
    _write_output(out, args.output)
    return EXIT_OK


def _sector_list(text: str) -> list[synth.Sector]:
    sectors = []
    for item in text.split(","):
        parts = item.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"sector must be label:members:loading, got {item!r}")
        try:
            sectors.append(synth.Sector(parts[0], int(parts[1]), float(parts[2])))
        except (ValueError, CorrtaxError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return sectors


def cmd_simulate(args) -> int:
    if args.config:
        config = synth.config_from_json(_read_input(args.config), args.model, args.seed)
    elif args.model == "sector":
        config = synth.SectorConfig(
            sectors=tuple(args.sectors),
            weeks=args.weeks,
            seed=args.seed,
            noise_sd=args.noise_sd,
            initial_sales=args.initial_sales,
        )
    else:
        config = synth.CompetitionConfig(
            assets=args.assets,
            weeks=args.weeks,
            seed=args.seed,
            churn=args.churn,
            total_sales=args.total_sales,
        )
    if isinstance(config, synth.SectorConfig):
        sales = synth.generate_sector_market(config)
    else:
        sales = synth.generate_competitive_market(config)
    _write_output(panel.panel_to_csv(sales), args.output)
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def _add_io(p, formats, default, kind=True):
    p.add_argument("input", help="input file, or - for stdin")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--format", choices=formats, default=default, help=f"output format (default: {default})")
    p.add_argument("--floor", type=float, help=f"replace zero sales with this value (env: {FLOOR_ENV})")
    if kind:
        p.add_argument(
            "--kind",
            choices=["sales", "returns"],
            default="sales",
            help="whether a date-indexed input holds sales or log-returns (default: sales)",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corrtax", description="Correlation-based taxonomy of weekly sales panels.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a sales panel")
    _add_io(p, ["table", "json"], "table", kind=False)
    p.add_argument("--min-length", type=int, default=3)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("returns", help="weekly log-returns as CSV")
    _add_io(p, ["csv"], "csv", kind=False)
    p.set_defaults(func=cmd_returns)

    p = sub.add_parser("corr", help="correlation (or distance) matrix")
    _add_io(p, ["table", "csv", "json"], "table")
    p.add_argument("--distance", action="store_true", help="emit the distance matrix instead")
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("census", help="count strong, weak and negative pairs")
    _add_io(p, ["table", "json"], "table")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("pairs", help="most correlated pairs")
    _add_io(p, ["table", "csv", "json"], "table")
    p.add_argument("--top", type=int, default=5)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("mst", help="minimum spanning tree")
    _add_io(p, ["table", "dot", "json"], "table")
    p.set_defaults(func=cmd_mst)

    p = sub.add_parser("tree", help="single-linkage hierarchy")
    _add_io(p, ["newick", "table", "json"], "newick")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("halflife", help="edge survival curve and tree half-life")
    _add_io(p, ["table", "csv", "json"], "table")
    p.add_argument("--width", type=int, required=True, help="window width in return rows")
    p.add_argument("--step", type=int, default=1, help="rows between window starts")
    p.add_argument("--origin", type=int, default=0, help="origin window of the reported curve")
    p.add_argument("--step-duration", type=float, default=1.0, help="weeks per return row")
    p.set_defaults(func=cmd_halflife)

    p = sub.add_parser("scaling", help="tree half-life against window width")
    _add_io(p, ["table", "csv", "json"], "table")
    p.add_argument("--widths", type=_int_list, required=True, help="comma-separated window widths")
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--step-duration", type=float, default=1.0, help="weeks per return row")
    p.add_argument(
        "--max-fit-width",
        type=float,
        default=dynamics.DEFAULT_MAX_FIT_WIDTH,
        help="largest width used in the linear fit; 0 uses all (default: 52)",
    )
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("simulate", help="generate a synthetic sales panel")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--model", choices=["sector", "competition"], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config", help="JSON config file (its seed is ignored)")
    p.add_argument("--weeks", type=int, default=500)
    p.add_argument("--sectors", type=_sector_list, default=_sector_list("a:5:1.0,b:5:1.0"),
                   help="label:members:loading,... (sector model)")
    p.add_argument("--noise-sd", type=float, default=0.1)
    p.add_argument("--initial-sales", type=float, default=10000.0)
    p.add_argument("--assets", type=int, default=10, help="number of assets (competition model)")
    p.add_argument("--churn", type=float, default=0.1)
    p.add_argument("--total-sales", type=float, default=1_000_000.0)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"corrtax: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CorrtaxError as exc:
        print(f"corrtax {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
