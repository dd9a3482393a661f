"""Command-line front end.

Each subcommand loads a CSV, runs one attribution pipeline, and writes its
artifacts (CSV, SVG, a text summary, and a JSON run manifest) into the
output directory.  `replay` re-executes a previously written manifest and
reproduces the artifacts bit for bit.

Exit codes: 0 success, 2 argument error, 3 data error, 4 computation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import game, report
from .curves import Strategy, default_grid
from .dataset import (
    Dataset,
    ImbalanceSpec,
    SplitSpec,
    drop_features,
    duplicate_feature,
    load_csv,
    split,
    subsample_imbalance,
    write_dataset_csv,
)
from .errors import ComputationError, CurveshapError, DataError
from .game import GameSpec, Target, evaluate_all, evaluate_slices
from .shapley import (
    Attribution,
    shapley_curve,
    shapley_exact,
    shapley_sampled,
    shapley_sampled_curve,
)
from .uncertainty import McConfig, mc_attributions, mc_curves

MANIFEST_NAME = "manifest.json"


# ----------------------------------------------------------------------
# Argument parsing
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curveshap",
        description="Attribute classifier ROC/PR performance to features "
                    "with Shapley values.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("--data", required=True, help="input CSV path")
        p.add_argument("--label-column", required=True, help="0/1 label column")
        if with_out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--train-fraction", type=float, default=0.8)
        p.add_argument("--seed", type=int, default=0,
                       help="single source of all randomness in the run")

    def sampled_flag(p):
        p.add_argument("--sampled", type=int, default=None, metavar="N",
                       help="estimate with N permutation samples instead of "
                            "exact enumeration")

    def strategy_flag(p):
        p.add_argument("--strategy", default="interpolation",
                       choices=[s.value for s in Strategy])

    def grid_flag(p):
        p.add_argument("--grid-size", type=int, default=101)

    def imbalance_flag(p):
        p.add_argument("--imbalance", type=float, default=None,
                       metavar="POSITIVE_FRACTION",
                       help="down-sample positives to this proportion first")

    p = sub.add_parser("explain-auc", help="Shapley decomposition of AUC")
    common(p)
    sampled_flag(p)

    p = sub.add_parser("explain-roc", help="per-FPR Shapley contribution curves")
    common(p)
    sampled_flag(p)
    strategy_flag(p)
    grid_flag(p)
    p.add_argument("--fpr", type=float, default=None,
                   help="also explain the single ROC slice at this FPR")

    p = sub.add_parser("explain-prc", help="per-recall Shapley contribution curves")
    common(p)
    sampled_flag(p)
    strategy_flag(p)
    grid_flag(p)
    imbalance_flag(p)
    p.add_argument("--recall", type=float, default=None,
                   help="also explain the single PRC slice at this recall")

    p = sub.add_parser("explain-auprc", help="Shapley decomposition of AUPRC")
    common(p)
    sampled_flag(p)
    imbalance_flag(p)

    p = sub.add_parser("uncertainty",
                       help="Monte-Carlo bands for curves and attributions")
    common(p)
    grid_flag(p)
    p.add_argument("--iterations", type=int, required=True)
    p.add_argument("--slices", action="store_true",
                   help="also emit per-feature ROC-slice bands over the grid")

    p = sub.add_parser("feature-select",
                       help="compare the metric with and without dropped features")
    common(p)
    sampled_flag(p)
    imbalance_flag(p)
    p.add_argument("--target", default="auc", choices=["auc", "auprc"])
    p.add_argument("--drop", action="append", required=True, metavar="NAME",
                   help="feature to drop; repeatable, commas allowed")

    p = sub.add_parser("duplicate",
                       help="write a copy of the dataset with one feature duplicated")
    common(p)
    p.add_argument("--feature", required=True, help="feature to duplicate")
    p.add_argument("--new-name", default=None,
                   help="name of the copy (default: <feature>_copy)")

    p = sub.add_parser("replay", help="re-execute a run manifest")
    p.add_argument("manifest", help="path to a manifest.json")

    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> dict:
    """Range-check arguments and flatten them into a manifest dict."""
    params = {k: v for k, v in vars(args).items() if k != "manifest"}
    if params.get("train_fraction") is not None:
        if not 0.0 < params["train_fraction"] < 1.0:
            parser.error("--train-fraction must lie in (0, 1)")
    if params.get("seed") is not None and params["seed"] < 0:
        parser.error("--seed must be non-negative")
    for key in ("fpr", "recall"):
        value = params.get(key)
        if value is not None and not 0.0 <= value <= 1.0:
            parser.error(f"--{key} must lie in [0, 1]")
    if params.get("imbalance") is not None:
        if not 0.0 < params["imbalance"] < 1.0:
            parser.error("--imbalance must lie in (0, 1)")
    if params.get("sampled") is not None and params["sampled"] < 1:
        parser.error("--sampled must be ≥ 1")
    if params.get("grid_size") is not None and params["grid_size"] < 2:
        parser.error("--grid-size must be ≥ 2")
    if params.get("iterations") is not None and params["iterations"] < 2:
        parser.error("--iterations must be ≥ 2")
    if params.get("drop") is not None:
        names = []
        for chunk in params["drop"]:
            names.extend(n.strip() for n in chunk.split(",") if n.strip())
        if not names:
            parser.error("--drop needs at least one feature name")
        params["drop"] = names
    return params


# ----------------------------------------------------------------------
# Shared pipeline pieces
# ----------------------------------------------------------------------

def _load(params: dict) -> Dataset:
    try:
        d = load_csv(params["data"], params["label_column"])
    except OSError as exc:
        raise DataError(f"cannot read {params['data']}: {exc}") from exc
    if params.get("imbalance") is not None:
        d = subsample_imbalance(
            d, ImbalanceSpec(params["imbalance"], params["seed"])
        )
    return d


def _split(d: Dataset, params: dict):
    return split(d, SplitSpec(params["train_fraction"], params["seed"]))


def _strategy(params: dict) -> Strategy:
    return Strategy(params.get("strategy") or "interpolation")


def _area_attribution(spec: GameSpec, params: dict):
    """Exact (with payoff table) or sampled (table-less) attribution."""
    if params.get("sampled"):
        return shapley_sampled(spec, params["sampled"], params["seed"]), None
    table = evaluate_all(spec)
    return shapley_exact(table), table


def _out_dir(params: dict) -> Path:
    out = Path(params["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, params: dict) -> None:
    out.joinpath(MANIFEST_NAME).write_text(
        json.dumps(params, indent=2, sort_keys=True) + "\n"
    )


def _write_attribution(out: Path, stem: str, attr: Attribution) -> None:
    header, rows = report.attribution_rows(attr)
    report.write_csv(out / f"{stem}.csv", header, rows)
    report.write_svg(out / f"{stem}.svg", report.render_waterfall(report.waterfall(attr)))


def _ranking_lines(attr: Attribution) -> list[str]:
    order = sorted(range(attr.n), key=lambda i: -abs(float(attr.values[i])))
    width = max(len(n) for n in attr.feature_names)
    return [
        f"  {attr.feature_names[i]:<{width}}  {100.0 * attr.values[i]:+.2f}%"
        for i in order
    ]


def _summary(out: Path, lines: list[str]) -> None:
    out.joinpath("summary.txt").write_text("\n".join(lines) + "\n")


# ----------------------------------------------------------------------
# Runners
# ----------------------------------------------------------------------

def run_explain_auc(params: dict) -> None:
    d = _load(params)
    train, test = _split(d, params)
    spec = GameSpec(Target.auc(), train, test)
    attr, table = _area_attribution(spec, params)
    out = _out_dir(params)
    _write_attribution(out, "attribution", attr)
    if table is not None:
        header, rows = report.payoff_rows(table)
        report.write_csv(out / "payoffs.csv", header, rows)
    lines = [
        "target: AUC",
        f"achieved: {report.percent(attr.total)} (baseline {report.percent(attr.baseline)})",
        "phi ranking:",
        *_ranking_lines(attr),
    ]
    _summary(out, lines)
    _write_manifest(out, params)


def _run_slice_curves(params: dict, kind: str) -> None:
    d = _load(params)
    train, test = _split(d, params)
    strategy = _strategy(params)
    spec = GameSpec(Target(kind), train, test, strategy)
    grid = default_grid(params["grid_size"])
    if params.get("sampled"):
        ca = shapley_sampled_curve(spec, grid, params["sampled"], params["seed"])
    else:
        ca = shapley_curve(evaluate_slices(spec, grid))
    out = _out_dir(params)
    header, rows = report.curve_attribution_rows(ca)
    report.write_csv(out / "contributions.csv", header, rows)
    report.write_svg(out / "contributions.svg", report.contribution_curves(ca).to_svg())
    report.write_svg(out / "relative.svg", report.relative_contributions(ca).to_svg())

    abscissa_key = "fpr" if kind == game.ROC_SLICE else "recall"
    lines = [
        f"target: {'TPR over FPR grid' if kind == game.ROC_SLICE else 'precision over recall grid'}",
        f"strategy: {strategy.value}",
        f"grid: {grid.size} points",
    ]
    q = params.get(abscissa_key)
    if q is not None:
        slice_spec = GameSpec(
            Target(kind, q), train, test, strategy
        )
        attr, table = _area_attribution(slice_spec, params)
        _write_attribution(out, f"attribution_{abscissa_key}", attr)
        if table is not None:
            header, rows = report.payoff_rows(table)
            report.write_csv(out / f"payoffs_{abscissa_key}.csv", header, rows)
        lines += [
            f"slice at {abscissa_key}={q:g}: {report.percent(attr.total)} "
            f"(baseline {report.percent(attr.baseline)})",
            "phi ranking:",
            *_ranking_lines(attr),
        ]
    mean_abs = np.abs(ca.values).mean(axis=1)
    order = sorted(range(ca.n), key=lambda i: -mean_abs[i])
    lines.append("mean |phi| over grid:")
    width = max(len(n) for n in ca.feature_names)
    lines += [
        f"  {ca.feature_names[i]:<{width}}  {100.0 * mean_abs[i]:.2f}%"
        for i in order
    ]
    _summary(out, lines)
    _write_manifest(out, params)


def run_explain_roc(params: dict) -> None:
    _run_slice_curves(params, game.ROC_SLICE)


def run_explain_prc(params: dict) -> None:
    _run_slice_curves(params, game.PRC_SLICE)


def run_explain_auprc(params: dict) -> None:
    d = _load(params)
    train, test = _split(d, params)
    spec = GameSpec(Target.auprc(), train, test)
    attr, table = _area_attribution(spec, params)
    out = _out_dir(params)
    _write_attribution(out, "attribution", attr)
    if table is not None:
        header, rows = report.payoff_rows(table)
        report.write_csv(out / "payoffs.csv", header, rows)
    lines = [
        "target: AUPRC",
        f"achieved: {report.percent(attr.total)} (baseline {report.percent(attr.baseline)})",
        f"positive proportion: {d.n_positive / d.n_rows:.4f}",
        "phi ranking:",
        *_ranking_lines(attr),
    ]
    _summary(out, lines)
    _write_manifest(out, params)


def run_uncertainty(params: dict) -> None:
    d = _load(params)
    cfg = McConfig(
        params["iterations"], params["seed"], params["train_fraction"],
        default_grid(params["grid_size"]),
    )
    band = mc_curves(d, cfg, "roc")
    mca = mc_attributions(d, cfg, Target.auc())
    out = _out_dir(params)
    header, rows = report.banded_rows(band, "fpr")
    report.write_csv(out / "roc_band.csv", header, rows)
    report.write_svg(
        out / "roc_band.svg",
        report.banded_plot(band, title="Monte-Carlo ROC").to_svg(),
    )
    header, rows = report.mc_attribution_rows(mca)
    report.write_csv(out / "attribution_mc.csv", header, rows)
    report.write_svg(
        out / "attribution_mc.svg",
        report.attribution_whiskers(
            mca, title=f"AUC attribution over {cfg.iterations} iterations"
        ).to_svg(),
    )
    lines = [
        f"iterations: {cfg.iterations}",
        f"mean achieved AUC: {report.percent(mca.mean_total)}",
        "mean phi (std):",
    ]
    width = max(len(n) for n in mca.feature_names)
    order = sorted(range(len(mca.feature_names)), key=lambda i: -abs(mca.mean[i]))
    lines += [
        f"  {mca.feature_names[i]:<{width}}  {100.0 * mca.mean[i]:+.2f}% "
        f"(±{100.0 * mca.std[i]:.2f}%)"
        for i in order
    ]
    if params.get("slices"):
        mcca = mc_attributions(d, cfg, Target(game.ROC_SLICE))
        header = ["fpr"]
        for name in mcca.feature_names:
            header += [f"mean_{name}", f"std_{name}"]
        rows = []
        for j, q in enumerate(mcca.abscissae):
            row = [float(q)]
            for i in range(len(mcca.feature_names)):
                row += [float(mcca.mean[i, j]), float(mcca.std[i, j])]
            rows.append(row)
        report.write_csv(out / "slice_bands.csv", header, rows)
        for name in mcca.feature_names:
            fb = mcca.feature_band(name)
            report.write_svg(
                out / f"band_{name}.svg",
                report.banded_plot(
                    fb, title=f"{name} contribution band",
                    y_label="Shapley contribution", clip=None,
                    color=report.color_for(mcca.feature_names.index(name)),
                ).to_svg(),
            )
    _summary(out, lines)
    _write_manifest(out, params)


def run_feature_select(params: dict) -> None:
    d = _load(params)
    target = Target.auc() if params["target"] == "auc" else Target.auprc()
    reduced = drop_features(d, params["drop"])
    if reduced.n_features == 0:
        raise DataError("cannot drop every feature")
    out = _out_dir(params)
    results = {}
    for tag, data in (("full", d), ("reduced", reduced)):
        train, test = _split(data, params)
        spec = GameSpec(target, train, test)
        attr, _ = _area_attribution(spec, params)
        results[tag] = attr
        _write_attribution(out, f"attribution_{tag}", attr)
    delta = results["reduced"].total - results["full"].total
    header = ["set", "n_features", "features", target.kind]
    rows = [
        ("full", d.n_features, "+".join(d.feature_names), results["full"].total),
        ("reduced", reduced.n_features, "+".join(reduced.feature_names),
         results["reduced"].total),
    ]
    report.write_csv(out / "selection.csv", header, rows)
    lines = [
        f"target: {target.describe()}",
        f"dropped: {', '.join(params['drop'])}",
        f"full set:    {report.percent(results['full'].total)}",
        f"reduced set: {report.percent(results['reduced'].total)}",
        f"delta: {100.0 * delta:+.2f} points",
    ]
    _summary(out, lines)
    _write_manifest(out, params)


def run_duplicate(params: dict) -> None:
    d = _load(params)
    index = d.feature_index(params["feature"])
    new_name = params.get("new_name") or f"{params['feature']}_copy"
    augmented = duplicate_feature(d, index, new_name)
    out = _out_dir(params)
    write_dataset_csv(augmented, out / "dataset.csv", params["label_column"])
    _summary(out, [
        f"duplicated feature: {params['feature']} -> {new_name}",
        f"columns: {', '.join(augmented.feature_names)}",
        f"rows: {augmented.n_rows}",
    ])
    _write_manifest(out, params)


RUNNERS = {
    "explain-auc": run_explain_auc,
    "explain-roc": run_explain_roc,
    "explain-prc": run_explain_prc,
    "explain-auprc": run_explain_auprc,
    "uncertainty": run_uncertainty,
    "feature-select": run_feature_select,
    "duplicate": run_duplicate,
}


def _error_record(exc: Exception) -> None:
    record = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        try:
            params = json.loads(Path(args.manifest).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            _error_record(exc)
            return 3
        command = params.get("command")
        if command not in RUNNERS:
            _error_record(DataError(f"manifest names unknown command {command!r}"))
            return 3
    else:
        params = _validate(parser, args)
        command = params["command"]
    try:
        RUNNERS[command](params)
    except ComputationError as exc:
        _error_record(exc)
        return 4
    except DataError as exc:
        _error_record(exc)
        return 3
    except CurveshapError as exc:
        _error_record(exc)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
