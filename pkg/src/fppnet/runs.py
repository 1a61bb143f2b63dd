"""Replica orchestration and machine-readable outputs.

Every replica owns an RNG stream derived from (master_seed, replica index,
stream tag) through SeedSequence spawn keys, so results are identical
whatever the worker count and aggregation is a pure, order-fixed reduction.
Files are written to a temporary name and renamed into place, so partial
outputs are never left behind. The FPP_THREADS environment variable caps
process-level parallelism.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cmgraph, fpp, limitnet, pdlaw, resilience
from .config import ExperimentConfig
from .degrees import sample_degree_sequence, u_n
from .seeds import child_rng, child_seed

__all__ = [
    "child_seed",
    "child_rng",
    "resolve_threads",
    "map_replicas",
    "RunRecord",
    "run",
    "SUBCOMMANDS",
]


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("FPP_THREADS", "")
        if env.strip():
            threads = int(env)
        else:
            threads = min(os.cpu_count() or 1, 8)
    return max(1, threads)


def map_replicas(worker, args, count: int, threads: int | None = None) -> list:
    """worker(args, r) for r in range(count), order-preserving, optionally pooled."""
    threads = resolve_threads(threads)
    if threads == 1 or count <= 1:
        return [worker(args, r) for r in range(count)]
    with ProcessPoolExecutor(max_workers=min(threads, count)) as pool:
        return list(pool.map(worker, [args] * count, range(count), chunksize=1))


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(buf.getvalue())
    os.replace(tmp, path)


def write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n")
    os.replace(tmp, path)


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


@dataclass
class RunRecord:
    """One subcommand run: long-form rows plus a summary, bound to the config."""

    config: ExperimentConfig
    subcommand: str
    columns: list[str]
    rows: list[dict]
    summary: dict
    wall_time: float

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.subcommand}.csv"
        json_path = out / f"{self.subcommand}_summary.json"
        write_csv(csv_path, self.columns, self.rows)
        summary = {
            "config": self.config.to_dict(),
            "config_hash": self.config.config_hash,
            "subcommand": self.subcommand,
            "rows": len(self.rows),
            **self.summary,
        }
        # wall time is reported but kept out of the determinism contract
        summary["wall_time_seconds"] = round(self.wall_time, 3)
        write_json(json_path, summary)
        return csv_path, json_path


# --------------------------------------------------------------------------
# subcommand implementations; workers are module-level for picklability
# --------------------------------------------------------------------------


def _run_degrees(cfg: ExperimentConfig, threads: int | None) -> tuple[list, dict]:
    seq = sample_degree_sequence(cfg.law, cfg.n, child_seed(cfg.master_seed, 0, 0))
    rows = [
        {"vertex_id": i, "degree": int(d)} for i, d in enumerate(seq.degrees)
    ]
    summary = {
        "total_degree": seq.total,
        "max_degree": int(seq.degrees.max()),
        "u_n": u_n(cfg.law, cfg.n),
    }
    return rows, summary


def _run_build(cfg: ExperimentConfig, threads: int | None) -> tuple[list, dict]:
    seq = sample_degree_sequence(cfg.law, cfg.n, child_seed(cfg.master_seed, 0, 0))
    mg = cmgraph.pair_stubs(seq, child_rng(cfg.master_seed, 0, 1))
    if cfg.graph_mode == "erased":
        sg = cmgraph.erase(mg)
        eu, ev = sg.edge_list()
        rows = [
            {"i": int(a), "j": int(b), "multiplicity": 1} for a, b in zip(eu, ev)
        ]
        summary = {
            "mode": "erased",
            "total_degree": seq.total,
            "distinct_edges": int(sg.edge_count),
            "max_erased_degree": int(sg.erased_degree.max()),
        }
    else:
        rows = [
            {"i": int(a), "j": int(b), "multiplicity": int(m)}
            for a, b, m in zip(mg.ei, mg.ej, mg.mult)
        ]
        summary = {
            "mode": "original",
            "total_degree": seq.total,
            "distinct_edges": len(rows),
            "self_loops": int(mg.self_loops.sum()),
        }
    return rows, summary


def _fpp_worker(args: dict, r: int) -> list[dict]:
    cfg = ExperimentConfig.from_dict(args)
    seq = sample_degree_sequence(cfg.law, cfg.n, child_seed(cfg.master_seed, r, 0))
    mg = cmgraph.pair_stubs(seq, child_rng(cfg.master_seed, r, 1))
    if cfg.graph_mode == "erased":
        wg = fpp.assign_weights(
            cmgraph.erase(mg), cfg.weight_law, "erased", child_rng(cfg.master_seed, r, 2)
        )
    else:
        wg = fpp.assign_weights(mg, cfg.weight_law, "original", child_rng(cfg.master_seed, r, 2))
    rng = child_rng(cfg.master_seed, r, 3)
    rows = []
    for _ in range(cfg.pairs):
        res = fpp.sample_pair_fpp(wg, rng)
        rows.append(
            {
                "replica": r,
                "A1": res.endpoints[0],
                "A2": res.endpoints[1],
                "W": res.weight,
                "H": res.hops,
                "connected": res.connected,
            }
        )
    return rows


def _run_fpp(cfg: ExperimentConfig, threads: int | None) -> tuple[list, dict]:
    parts = map_replicas(_fpp_worker, cfg.to_dict(), cfg.replicas, threads)
    rows = [row for part in parts for row in part]
    conn = [row for row in rows if row["connected"]]
    hops = np.array([row["H"] for row in conn], dtype=np.int64)
    summary = {
        "connected_fraction": (len(conn) / len(rows)) if rows else 0.0,
        "p_h2": float((hops == 2).mean()) if len(hops) else 0.0,
        "p_h_odd": float((hops % 2 == 1).mean()) if len(hops) else 0.0,
        "mean_weight": float(np.mean([row["W"] for row in conn])) if conn else 0.0,
    }
    return rows, summary


def _pd_worker(args: dict, r: int) -> dict:
    cfg = ExperimentConfig.from_dict(args)
    rng = child_rng(cfg.master_seed, r, 0)
    pd = pdlaw.sample_pd(cfg.tau, cfg.K, rng)
    return {
        "P": pd.P,
        "eta": pd.eta,
        "tail_mass": pd.tail_mass,
        "sum_p2": float((pd.P**2).sum()),
        "sum_p3": float((pd.P**3).sum()),
    }


def _run_pd(cfg: ExperimentConfig, threads: int | None) -> tuple[list, dict]:
    parts = map_replicas(_pd_worker, cfg.to_dict(), cfg.replicas, threads)
    rows = [
        {"draw_id": r, "i": i + 1, "P_i": float(p)}
        for r, part in enumerate(parts)
        for i, p in enumerate(part["P"])
    ]
    p2 = np.array([part["sum_p2"] for part in parts])
    p3 = np.array([part["sum_p3"] for part in parts])
    summary = {
        "eta_median": float(np.median([part["eta"] for part in parts])) if parts else 0.0,
        "tail_mass_median": float(np.median([part["tail_mass"] for part in parts])) if parts else 0.0,
        "moment2_estimate": float(p2.mean()) if len(p2) else 0.0,
        "moment2_stderr": float(p2.std() / np.sqrt(len(p2))) if len(p2) > 1 else 0.0,
        "moment2_exact": pdlaw.pd_moment_exact(cfg.tau, 2),
        "moment3_estimate": float(p3.mean()) if len(p3) else 0.0,
        "moment3_stderr": float(p3.std() / np.sqrt(len(p3))) if len(p3) > 1 else 0.0,
        "moment3_exact": pdlaw.pd_moment_exact(cfg.tau, 3),
    }
    return rows, summary


def _limit_worker(args: dict, r: int) -> dict:
    cfg = ExperimentConfig.from_dict(args)
    rng = child_rng(cfg.master_seed, r, 0)
    pd = pdlaw.sample_pd(cfg.tau, cfg.K, rng)
    chain_h = limitnet.hopcount_chain(pd, rng)
    net = limitnet.build_limit(pd, cfg.limit_kind, rng, zeta=cfg.zeta, law=cfg.law)
    a, b = limitnet.sample_endpoints(pd, cfg.limit_kind, cfg.law, rng)
    path = limitnet.fpp_limit_endpoints(net, a, b, rng)
    h = 2 + path.hops if cfg.limit_kind == "or" else 2 + 2 * path.hops
    return {
        "replica": r,
        "I": a.index + 1,
        "J": b.index + 1,
        "W": path.weight,
        "H": h,
        "chain_H": chain_h,
    }


def _run_limit(cfg: ExperimentConfig, threads: int | None) -> tuple[list, dict]:
    parts = map_replicas(_limit_worker, cfg.to_dict(), cfg.replicas, threads)
    rows = [{k: part[k] for k in ("replica", "I", "J", "W", "H")} for part in parts]
    fpp_h = np.array([part["H"] for part in parts], dtype=np.int64)
    chain_h = np.array([part["chain_H"] for part in parts], dtype=np.int64)
    table = []
    for k in range(2, 9):
        pf = float((fpp_h == k).mean()) if len(fpp_h) else 0.0
        pc = float((chain_h == k).mean()) if len(chain_h) else 0.0
        m = max(len(fpp_h), 1)
        table.append(
            {
                "k": k,
                "pi_fpp": pf,
                "stderr_fpp": float(np.sqrt(pf * (1 - pf) / m)),
                "pi_chain": pc,
                "stderr_chain": float(np.sqrt(pc * (1 - pc) / m)),
            }
        )
    tv = 0.5 * sum(abs(row["pi_fpp"] - row["pi_chain"]) for row in table)
    summary = {
        "pi_table": table,
        "tv_chain_vs_fpp_k_le_8": tv,
        "pi2_reference": 2.0 - cfg.tau,
    }
    return rows, summary


def _attack_worker(args: dict, r: int) -> dict:
    cfg = ExperimentConfig.from_dict(args)
    seq = sample_degree_sequence(cfg.law, cfg.n, child_seed(cfg.master_seed, r, 0))
    mg = cmgraph.pair_stubs(seq, child_rng(cfg.master_seed, r, 1))
    sg = cmgraph.erase(mg)
    rng = child_rng(cfg.master_seed, r, 2)
    if cfg.attack_mode == "random":
        out = resilience.percolate_giant(sg, cfg.p_keep, rng)
    else:
        out = resilience.targeted_attack(sg, cfg.k_remove, rng)
    return {
        "replica": r,
        "parameter": out.parameter,
        "giant_size": out.giant_size,
        "second_size": out.second_size,
        "connect_prob": out.pair_connect_prob,
    }


def _run_attack(cfg: ExperimentConfig, threads: int | None) -> tuple[list, dict]:
    rows = map_replicas(_attack_worker, cfg.to_dict(), cfg.replicas, threads)
    gf = np.array([row["giant_size"] for row in rows], dtype=float) / cfg.n
    summary = {
        "attack_mode": cfg.attack_mode,
        "giant_fraction_mean": float(gf.mean()) if len(gf) else 0.0,
        "giant_fraction_median": float(np.median(gf)) if len(gf) else 0.0,
        "connect_prob_median": float(np.median([row["connect_prob"] for row in rows])) if rows else 0.0,
    }
    if cfg.attack_mode == "random" and rows:
        d1, d2, _ = resilience.sample_joint_der(
            cfg.law, cfg.K, min(20000, max(1000, 20 * cfg.replicas)), child_seed(cfg.master_seed, 10**6)
        )
        summary["lambda_theory"] = resilience.lambda_theory(cfg.p_keep, np.concatenate([d1, d2]))
    return rows, summary


_COLUMNS = {
    "degrees": ["vertex_id", "degree"],
    "build": ["i", "j", "multiplicity"],
    "fpp": ["replica", "A1", "A2", "W", "H", "connected"],
    "pd": ["draw_id", "i", "P_i"],
    "limit": ["replica", "I", "J", "W", "H"],
    "attack": ["replica", "parameter", "giant_size", "second_size", "connect_prob"],
}

_RUNNERS = {
    "degrees": _run_degrees,
    "build": _run_build,
    "fpp": _run_fpp,
    "pd": _run_pd,
    "limit": _run_limit,
    "attack": _run_attack,
}

SUBCOMMANDS = tuple(_RUNNERS)


def run(cfg: ExperimentConfig, subcommand: str, threads: int | None = None) -> RunRecord:
    """Dispatch a subcommand; deterministic given (config, master_seed)."""
    if subcommand not in _RUNNERS:
        raise ValueError(f"unknown subcommand {subcommand!r}")
    start = time.time()
    rows, summary = _RUNNERS[subcommand](cfg, threads)
    return RunRecord(
        config=cfg,
        subcommand=subcommand,
        columns=_COLUMNS[subcommand],
        rows=rows,
        summary=summary,
        wall_time=time.time() - start,
    )
