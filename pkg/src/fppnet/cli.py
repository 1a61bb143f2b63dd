"""Command-line interface.

Subcommands: degrees, build, fpp, pd, limit, attack, verify. Parameters
come from an optional JSON config file plus flag overrides; outputs land in
a run-scoped directory named by the config hash. Exit status: 0 on success,
1 when a verify criterion fails, 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .runs import SUBCOMMANDS, run
from .verify import run_verify, write_verify_outputs

_FLAG_FIELDS = {
    "tau": "tau",
    "scale_c": "scale_c",
    "n": "n",
    "K": "K",
    "replicas": "replicas",
    "pairs": "pairs",
    "seed": "master_seed",
    "weight_law": "weight_kind",
    "weight_b": "weight_b",
    "eps_exponent": "eps_exponent",
    "mode": "graph_mode",
    "kind": "limit_kind",
    "zeta": "zeta",
    "attack_mode": "attack_mode",
    "p": "p_keep",
    "k_remove": "k_remove",
    "out": "out_dir",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--tau", type=float)
    p.add_argument("--scale-c", type=float, dest="scale_c")
    p.add_argument("--n", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--pairs", type=int)
    p.add_argument("--seed", type=int, help="master seed; replicas derive child seeds")
    p.add_argument("--weight-law", choices=["exponential", "uniform"], dest="weight_law")
    p.add_argument("--weight-b", type=float, dest="weight_b")
    p.add_argument("--eps-exponent", type=float, dest="eps_exponent")
    p.add_argument("--zeta", type=float)
    p.add_argument("--threads", type=int, help="worker processes (FPP_THREADS also caps)")
    p.add_argument("--out", help="output directory root (default from config)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fppnet",
        description="First passage percolation on heavy-tailed configuration models",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("degrees", help="sample one degree sequence to CSV")
    _add_common(p)

    p = sub.add_parser("build", help="build one configuration graph, edge-list CSV")
    _add_common(p)
    p.add_argument("--erased", action="store_true", help="emit the erased simple graph")

    p = sub.add_parser("fpp", help="minimal-weight paths between uniform pairs")
    _add_common(p)
    p.add_argument("--mode", choices=["original", "erased"])

    p = sub.add_parser("pd", help="sample the limiting cell-mass distribution")
    _add_common(p)
    p.add_argument("--draws", type=int, help="alias for --replicas")

    p = sub.add_parser("limit", help="hopcount/weight samples from the limit networks")
    _add_common(p)
    p.add_argument("--kind", choices=["or", "er"])

    p = sub.add_parser("attack", help="random percolation or targeted hub removal")
    _add_common(p)
    p.add_argument("--attack-mode", choices=["random", "targeted"], dest="attack_mode")
    p.add_argument("--p", type=float, help="keep probability for random attacks")
    p.add_argument("--k-remove", type=int, dest="k_remove")

    p = sub.add_parser("verify", help="run the acceptance suite")
    _add_common(p)
    p.add_argument("--quick", action="store_true", help="reduced smoke-test sizes")

    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if getattr(args, "config", None):
        cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    else:
        cfg = ExperimentConfig()
    overrides = {}
    for flag, fieldname in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[fieldname] = value
    if getattr(args, "draws", None) is not None:
        overrides["replicas"] = args.draws
    if getattr(args, "erased", False):
        overrides["graph_mode"] = "erased"
    return cfg.replace(**overrides)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    threads = getattr(args, "threads", None)
    if args.subcommand == "verify":
        report = run_verify(
            master_seed=cfg.master_seed,
            quick=bool(getattr(args, "quick", False)),
            threads=threads,
            echo=True,
        )
        out = Path(cfg.out_dir) / f"verify-{cfg.config_hash}"
        write_verify_outputs(report, out)
        print(
            f"{'all criteria passed' if report.all_passed else 'CRITERION FAILURES'} "
            f"in {report.wall_time:.1f}s -> {out}"
        )
        return 0 if report.all_passed else 1

    if args.subcommand not in SUBCOMMANDS:
        print(f"error: unknown subcommand {args.subcommand!r}", file=sys.stderr)
        return 2
    record = run(cfg, args.subcommand, threads=threads)
    out = Path(cfg.out_dir) / f"{args.subcommand}-{cfg.config_hash}"
    csv_path, json_path = record.write(out)
    print(f"wrote {csv_path} and {json_path} ({len(record.rows)} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
