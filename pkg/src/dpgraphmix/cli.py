"""Command-line entry point: ``simulate``, ``fit`` and ``summarize``.

Runs are configured by a flat JSON file; any key can be overridden on the
command line with ``--set key=value`` (values parsed as JSON when possible).
Set ``DPGRAPHMIX_LOG_LEVEL`` (e.g. ``DEBUG``) to control verbosity.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

from .data import load_csv, write_csv
from .errors import ConfigError, DataError, NumericError, StateCorruptionError
from .priors import ConcentrationPriorSpec, GraphPriorSpec, HyperDirichletSpec
from .sampler import SamplerConfig, Trace, run
from .simulate import ScenarioSpec, generate_scenario
from .summaries import (canonical_labels, heatmap_order, minvi_point_estimate, ppi,
                        similarity_matrix, write_pgm)

log = logging.getLogger("dpgraphmix")

EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4

SIMULATE_KEYS = {"output_dir": None, "q": 20, "n_per_cluster": [200, 200], "truth_edges": 20,
                 "m_moves": 10, "thresholds": None, "threshold_range": [0.35, 0.65],
                 "edge_weight": 0.4, "seed": 0, "keep_vars": None, "allow_nonchordal": False}

FIT_KEYS = {"input": None, "output_dir": None, "missing_token": None, "iterations": 1000,
            "burn_in": 0, "thin": 1, "seed": 0, "chains": 1, "aux_components": 1,
            "baseline_mode": False, "a": 1.0, "a_g": 1.0, "b_g": 1.0, "c": 3.0, "d": 1.0,
            "progress_every": 0, "debug_checks": False}

REQUIRED = {"simulate": ("output_dir",), "fit": ("input", "output_dir")}


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path: str | None, overrides: list[str], defaults: dict, command: str) -> dict:
    """Merge defaults, the JSON file and ``key=value`` overrides; reject unknown keys."""
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        raw[key.strip()] = _parse_value(value)
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    merged = {**defaults, **raw}
    for key in REQUIRED.get(command, ()):
        if merged.get(key) is None:
            raise ConfigError(f"missing required config key {key!r}")
    return merged


def _write_matrix(path: Path, matrix: np.ndarray) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in matrix:
            writer.writerow([f"{v:.10g}" for v in row])


def cmd_simulate(cfg: dict) -> Path:
    try:
        spec = ScenarioSpec(q=int(cfg["q"]), n_per_cluster=tuple(int(v) for v in cfg["n_per_cluster"]),
                            truth_edges=int(cfg["truth_edges"]), m_moves=int(cfg["m_moves"]),
                            thresholds=None if cfg["thresholds"] is None else tuple(cfg["thresholds"]),
                            threshold_range=tuple(cfg["threshold_range"]),
                            edge_weight=float(cfg["edge_weight"]), seed=int(cfg["seed"]),
                            keep_vars=cfg["keep_vars"], allow_nonchordal=bool(cfg["allow_nonchordal"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    dataset, truth = generate_scenario(spec)
    write_csv(dataset, out / "dataset.csv")
    with (out / "truth.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["subject", "cluster"])
        writer.writerows([i, int(lab)] for i, lab in enumerate(truth.labels))
    graphs = {"q": spec.q, "thresholds": [float(t) for t in truth.thresholds],
              "graphs": [g.to_json() for g in truth.graphs]}
    (out / "graphs.json").write_text(json.dumps(graphs, indent=2) + "\n", encoding="utf-8")
    log.info("wrote %d rows x %d variables to %s", dataset.n, dataset.q, out)
    return out


def sampler_config(cfg: dict, seed: int) -> SamplerConfig:
    try:
        return SamplerConfig(
            iterations=int(cfg["iterations"]), burn_in=int(cfg["burn_in"]), thin=int(cfg["thin"]),
            seed=seed, aux_components=int(cfg["aux_components"]),
            baseline_mode=bool(cfg["baseline_mode"]), hyper=HyperDirichletSpec(float(cfg["a"])),
            graph_prior=GraphPriorSpec(float(cfg["a_g"]), float(cfg["b_g"])),
            alpha_prior=ConcentrationPriorSpec(float(cfg["c"]), float(cfg["d"])),
            progress_every=int(cfg["progress_every"]), debug_checks=bool(cfg["debug_checks"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def chain_seeds(seed: int, chains: int) -> list[int]:
    """Independent integer seeds for each chain derived from the master seed."""
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(chains)]


def _run_chain(args) -> tuple[int, Trace]:
    dataset, config, k = args
    return k, run(dataset, config)


def cmd_fit(cfg: dict) -> Path:
    chains = cfg["chains"]
    if not isinstance(chains, int) or chains < 1:
        raise ConfigError(f"chains must be a positive integer, got {chains!r}")
    dataset = load_csv(cfg["input"], cfg["missing_token"])
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    seeds = chain_seeds(int(cfg["seed"]), chains)
    jobs = [(dataset, sampler_config(cfg, s), k) for k, s in enumerate(seeds, start=1)]
    started = time.perf_counter()
    workers = min(chains, os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_run_chain, jobs))
    else:
        results = dict(map(_run_chain, jobs))
    wall = time.perf_counter() - started
    meta = {"config": cfg, "wall_time_seconds": wall, "n": dataset.n, "q": dataset.q,
            "variables": list(dataset.names), "levels": [list(lab) for lab in dataset.labels],
            "chains": []}
    for k, seed in enumerate(seeds, start=1):
        trace = results[k]
        name = f"trace_chain{k}.jsonl"
        trace.write_jsonl(out / name)
        meta["chains"].append({"trace": name, "seed": seed, "draws": len(trace.draws),
                               "graph_moves_proposed": trace.proposed,
                               "graph_moves_accepted": trace.accepted,
                               "acceptance_rate": trace.acceptance_rate})
        log.info("chain %d: %d draws, graph acceptance %.3f", k, len(trace.draws), trace.acceptance_rate)
    (out / "fit_meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return out


def _read_group_labels(path: Path, n: int) -> list[str]:
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty labels file")
    body = rows[1:]
    if len(body) != n:
        raise DataError(f"{path}: {len(body)} labels for {n} subjects")
    return [r[-1] for r in body]


def cmd_summarize(traces: list[str], out_dir: str, burn_in: int = 0, subjects: list[int] | None = None,
                  heatmap: bool = False, labels: str | None = None) -> Path:
    loaded = []
    for p in traces:
        try:
            loaded.append(Trace.read_jsonl(p))
        except FileNotFoundError as exc:
            raise DataError(f"trace file not found: {p}") from exc
        except (KeyError, json.JSONDecodeError) as exc:
            raise DataError(f"{p}: malformed trace ({exc})") from exc
    try:
        merged = Trace.concatenate(loaded)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    merged.draws = [d for d in merged.draws if d.iter > burn_in]
    if not merged.draws:
        raise DataError(f"no draws remain after discarding iterations <= {burn_in}")
    for s in subjects or ():
        if not 0 <= s < merged.n:
            raise IndexError(f"subject {s} out of range for n={merged.n}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sim = similarity_matrix(merged)
    _write_matrix(out / "similarity.csv", sim)
    partition = minvi_point_estimate(merged, sim)
    with (out / "partition.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["subject", "cluster"])
        writer.writerows([i, int(c)] for i, c in enumerate(partition))
    for s in subjects or ():
        _write_matrix(out / f"ppi_{s}.csv", ppi(merged, s))
    with (out / "alpha_posterior.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["draw", "iter", "K", "alpha"])
        writer.writerows([k, d.iter, d.K, repr(d.alpha)] for k, d in enumerate(merged.draws))
    if heatmap:
        write_pgm(sim, out / "similarity.pgm", heatmap_order(partition))
    if labels is not None:
        groups = _read_group_labels(Path(labels), merged.n)
        with (out / "group_support.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["group", "cluster", "count", "proportion"])
            for g in sorted(set(groups)):
                members = [i for i, lab in enumerate(groups) if lab == g]
                for c in sorted(set(int(partition[i]) for i in members)):
                    count = sum(1 for i in members if partition[i] == c)
                    writer.writerow([g, c, count, f"{count / len(members):.10g}"])
    log.info("summarized %d draws over %d subjects into %s (K_hat=%d)",
             len(merged.draws), merged.n, out, int(canonical_labels(partition).max()))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpgraphmix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("simulate", "generate a two-cluster synthetic dataset"),
                           ("fit", "run the Gibbs sampler on a categorical CSV")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
    p = sub.add_parser("summarize", help="posterior summaries from one or more traces")
    p.add_argument("traces", nargs="+", help="JSON-lines trace files (chains are merged)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--burn-in", type=int, default=0, help="also drop draws with iter <= this")
    p.add_argument("--subjects", type=int, nargs="*", default=[], help="subjects for PPI matrices")
    p.add_argument("--heatmap", action="store_true", help="write similarity.pgm")
    p.add_argument("--labels", help="CSV of known group labels (last column), one row per subject")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("DPGRAPHMIX_LOG_LEVEL", "WARNING").upper(),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cmd_simulate(load_config(args.config, args.set, SIMULATE_KEYS, "simulate"))
        elif args.command == "fit":
            cmd_fit(load_config(args.config, args.set, FIT_KEYS, "fit"))
        else:
            cmd_summarize(args.traces, args.out, args.burn_in, args.subjects, args.heatmap, args.labels)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError, IndexError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, StateCorruptionError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
