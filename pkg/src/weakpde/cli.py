"""Command-line interface.

Exit codes: 0 success, 1 pipeline or data error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import pipeline
from .data import export_csv, save_dataset
from .errors import ConfigError, WeakPDEError
from .metrics import all_metrics

EXIT_OK, EXIT_PIPELINE, EXIT_CONFIG = 0, 1, 2


def _noise_levels(text: str) -> list[float]:
    try:
        levels = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid noise list {text!r}") from None
    if not levels or any(v < 0 for v in levels):
        raise argparse.ArgumentTypeError("noise levels must be a non-empty list of values >= 0")
    return levels


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weakpde", description="Weak-form sparse PDE identification.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default=None):
        sp.add_argument("--config", required=True, help="key = value configuration file")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", default=out_default, help="output directory (overrides config)")

    sp = sub.add_parser("simulate", help="generate a dataset and write it as WSND")
    common(sp)
    sp.add_argument("--csv", action="store_true", help="also export each component as CSV")

    sp = sub.add_parser("discover", help="run the discovery pipeline")
    common(sp)
    sp.add_argument("--dry-run", action="store_true", help="print the stage plan and exit")
    sp.add_argument("--system", action="store_true", help="also write system.csv (b~ and G~)")

    sp = sub.add_parser("sweep", help="noise ensembles, writes sweep.csv")
    common(sp)
    sp.add_argument("--trials", type=_positive, default=20)
    sp.add_argument("--noise", type=_noise_levels, default=[0.0, 0.25, 0.5, 1.0],
                    help="comma separated noise ratios, e.g. 0,0.25,0.5")

    sp = sub.add_parser("metrics", help="compare a report.json with a truth file")
    sp.add_argument("--report", required=True)
    sp.add_argument("--truth", required=True,
                    help='JSON mapping {"term": coefficient} or {"lhs": {"term": coefficient}}')
    return p


def _load_config(args):
    cfg = pipeline.parse_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out=args.out)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    clean = pipeline.load_clean(cfg)
    comps, _ = pipeline.noisy_fields(clean, cfg.noise, cfg.seed)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    name = Path(cfg.dataset).stem
    save_dataset(comps[0].grid, comps, out / f"{name}.wsnd")
    if args.csv:
        for f in comps:
            export_csv(f, out / f"{name}_{f.component_name}.csv")
    print(out / f"{name}.wsnd")
    return EXIT_OK


def _cmd_discover(args) -> int:
    cfg = _load_config(args)
    if args.dry_run:
        print("\n".join(pipeline.stage_plan(cfg)))
        return EXIT_OK
    report = pipeline.discover(cfg)
    pipeline.write_outputs(report, cfg.out, write_system=args.system or cfg.write_system)
    print(report.render())
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    rows = pipeline.sweep(cfg, args.noise, args.trials)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    pipeline.write_sweep_csv(rows, out / "sweep.csv")
    for r in rows:
        print(f"sigma_nr={r['sigma_nr']:g} tpr={r['mean_tpr']:.3f} e_inf={r['mean_e_inf']:.3g} "
              f"lambda_hat={r['mean_lambda_hat']:.3g}")
    return EXIT_OK


def _cmd_metrics(args) -> int:
    try:
        report = json.loads(Path(args.report).read_text())
        truth = json.loads(Path(args.truth).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read input: {exc}") from None
    if not isinstance(truth, dict) or not truth:
        raise ConfigError("truth file must hold a non-empty JSON object")
    labels = report["labels"]
    nested = all(isinstance(v, dict) for v in truth.values())
    results = {}
    for eq in report["equations"]:
        terms = truth.get(eq["lhs"]) if nested else (truth if eq is report["equations"][0] else None)
        if not terms:
            continue
        unknown = [k for k in terms if k not in labels]
        if unknown:
            raise ConfigError(f"truth terms not in library: {unknown}")
        w_star = [float(terms.get(lab, 0.0)) for lab in labels]
        results[eq["lhs"]] = all_metrics(eq["w_hat"], w_star)
    if not results:
        raise ConfigError("truth file matches no equation in the report")
    print(json.dumps(results, indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "simulate": _cmd_simulate,
    "discover": _cmd_discover,
    "sweep": _cmd_sweep,
    "metrics": _cmd_metrics,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (WeakPDEError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
