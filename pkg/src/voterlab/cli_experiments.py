"""Config-driven experiment runner with deterministic, reproducible output.

Subcommands: persistence | tail | duality-check | walk-tests |
window-counts | fit | report.  Experiments read a JSON config (flags
override individual fields), farm replicas over numba worker threads,
and emit one results file plus one manifest.

Reproducibility contract: replica i of experiment stream j uses the key
hash(experiment_seed, j, i) (see streams.DERIVATION_SCHEME); results are
reduced in replica order, so output bytes depend only on (config, seed,
build), never on the worker count.  Aborted replicas (jump budget) are
excluded from estimates and counted in the output and manifest; a run
with aborts exits with status 3 instead of 0.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional

import numpy as np

import jsonschema

from . import __version__
from .dual_coalescer import sample_batch
from .estimators import (
    fit_scaling,
    mean_window_count,
    persistence_from_batch,
    persistence_series,
    tail_from_batch,
    tail_series,
)
from .forward_voter import TorusConfig, forward_persistence_mc, forward_tail_mc
from .lattice_walks import (
    annulus_stay_prob_mc,
    hit_origin_before_exit_exact,
    hit_origin_before_exit_mc,
    lawler_reference_hit_before_exit,
    meet_prob_mc,
)
from .streams import DERIVATION_SCHEME, derive_keys, replica_keys

SCHEMA_VERSION = 1
ENV_WORKERS = "VOTERLAB_WORKERS"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGRADED = 3

DEFAULT_T_GRID = [10.0**e for e in (2.0, 2.5, 3.0, 3.5, 4.0)]

# stable stream ids per experiment kind (part of the seed transcript)
KIND_IDS = {
    "persistence": 1,
    "tail": 2,
    "duality-check": 3,
    "walk-tests": 4,
    "window-counts": 5,
}

RESULT_COLUMNS = {
    "persistence": ["t", "rho", "p_hat", "stderr", "replicas", "aborted"],
    "tail": [
        "t",
        "rho",
        "level_alpha",
        "p_hat",
        "stderr",
        "replicas",
        "marks",
        "aborted",
    ],
    "window-counts": ["t", "mean_count", "stderr", "replicas"],
    "fit": ["model", "slope", "slope_stderr", "intercept", "r_squared", "n_points"],
    "duality-check": [
        "quantity",
        "t",
        "rho",
        "level_alpha",
        "forward_mean",
        "forward_stderr",
        "dual_mean",
        "dual_stderr",
        "z",
        "verdict",
    ],
    "walk-tests": [
        "test",
        "t",
        "param",
        "estimate",
        "stderr",
        "reference",
        "ratio",
        "replicas",
        "flag",
    ],
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": sorted(KIND_IDS) + ["fit", "report"]},
        "t_grid": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
            "minItems": 1,
        },
        "rho": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "level_alphas": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "minItems": 1,
        },
        "replicas": {"type": "integer", "minimum": 1},
        "marks_per_replica": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "jump_budget": {"type": ["integer", "null"], "minimum": 1},
        "workers": {"type": ["integer", "null"], "minimum": 1},
        "out": {"type": "string"},
        "format": {"enum": ["csv", "json"]},
        "torus_side": {"type": "integer", "minimum": 4},
        "horizon": {"type": "number", "exclusiveMinimum": 0},
        "forward_replicas": {"type": "integer", "minimum": 1},
        "duality_level_alpha": {
            "type": "number",
            "exclusiveMinimum": 0,
            "exclusiveMaximum": 1,
        },
        "target_neglog_stderr": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "input": {"type": ["string", "null"]},
        "fit_level_alpha": {"type": ["number", "null"]},
    },
}


@dataclass
class ExperimentConfig:
    """One experiment's parameters; JSON-serializable, flag-overridable."""

    kind: str
    t_grid: List[float] = field(default_factory=lambda: list(DEFAULT_T_GRID))
    rho: float = 0.5
    level_alphas: List[float] = field(default_factory=lambda: [0.6, 0.75, 0.9])
    replicas: int = 2000
    marks_per_replica: int = 256
    seed: int = 0
    jump_budget: Optional[int] = None
    workers: Optional[int] = None
    out: str = ""
    format: str = "csv"
    # duality-check settings
    torus_side: int = 32
    horizon: float = 16.0
    forward_replicas: int = 1_000_000
    duality_level_alpha: float = 0.75
    # adaptive sizing for persistence/tail series (None: fixed replicas)
    target_neglog_stderr: Optional[float] = None
    # fit input file and optional tail level selector
    input: Optional[str] = None
    fit_level_alpha: Optional[float] = None

    def __post_init__(self):
        if not self.out:
            self.out = f"voterlab_{self.kind.replace('-', '_')}.json" if self.format == "json" else f"voterlab_{self.kind.replace('-', '_')}.csv"

    def identity(self) -> dict:
        """Fields that determine emitted numbers (workers/out excluded)."""
        d = asdict(self)
        d.pop("workers")
        d.pop("out")
        d["version"] = __version__
        return d

    def manifest_hash(self) -> str:
        blob = json.dumps(self.identity(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path, kind, overrides) -> ExperimentConfig:
    data = {}
    if path is not None:
        with open(path) as fh:
            data = json.load(fh)
    data["kind"] = kind
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        raise ConfigError(f"invalid config: {err.message} (at {list(err.absolute_path)})")
    cfg = ExperimentConfig(**data)
    for key, value in overrides.items():
        if value is not None:
            cfg = replace(cfg, **{key: value})
    return cfg


class ConfigError(ValueError):
    pass


def experiment_seed(cfg: ExperimentConfig) -> int:
    """Per-experiment sub-seed: hash of (root seed, kind id)."""
    return int(derive_keys(cfg.seed, KIND_IDS[cfg.kind] << 32, 1)[0])


def _set_workers(cfg: ExperimentConfig):
    import numba

    workers = cfg.workers
    if workers is None:
        env = os.environ.get(ENV_WORKERS)
        workers = int(env) if env else None
    if workers is not None:
        numba.set_num_threads(max(1, min(workers, numba.config.NUMBA_NUM_THREADS)))


# ---------------------------------------------------------------------------
# Result emission
# ---------------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_results(path, kind, columns, rows, cfg: ExperimentConfig):
    """Emit rows deterministically; bytes depend only on (config, seed, build)."""
    if cfg.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": kind,
            "manifest_hash": cfg.manifest_hash(),
            "columns": columns,
            "rows": [[_fmt(v) for v in row] for row in rows],
        }
        text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    else:
        lines = [
            f"# schema_version={SCHEMA_VERSION}",
            f"# kind={kind}",
            f"# manifest_hash={cfg.manifest_hash()}",
            ",".join(columns),
        ]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        text = "\n".join(lines) + "\n"
    with open(path, "w", newline="") as fh:
        fh.write(text)


def write_manifest(path, cfg: ExperimentConfig, wall_clock, replica_counts, aborted):
    manifest = {
        "artifact_version": __version__,
        "config": asdict(cfg),
        "manifest_hash": cfg.manifest_hash(),
        "wall_clock_seconds": wall_clock,
        "replica_counts": replica_counts,
        "aborted_replicas": aborted,
        "seed_derivation": {
            "scheme": DERIVATION_SCHEME,
            "root_seed": cfg.seed,
            "experiment_stream": (
                f"experiment_seed = key(root_seed, kind_id << 32, 0) with "
                f"kind_id = {KIND_IDS.get(cfg.kind)}; replica i of stream j "
                "uses key(experiment_seed, j, i)"
            ),
            "check_key_stream0_replica0": (
                int(derive_keys(experiment_seed(cfg), 0, 1)[0])
                if cfg.kind in KIND_IDS
                else None
            ),
        },
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_results(path):
    """Parse a results file (either format); returns (kind, columns, rows)."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return doc["kind"], doc["columns"], doc["rows"]
    kind = None
    columns = None
    rows = []
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#"):
            if "=" in line:
                key, _, value = line[1:].strip().partition("=")
                if key.strip() == "kind":
                    kind = value.strip()
            continue
        if columns is None:
            columns = line.split(",")
        else:
            rows.append(line.split(","))
    if kind is None or columns is None:
        raise ConfigError(f"{path}: not a voterlab results file (missing preamble)")
    return kind, columns, rows


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def run_persistence(cfg: ExperimentConfig):
    seed = experiment_seed(cfg)
    if cfg.target_neglog_stderr is not None:
        estimates = persistence_series(
            cfg.t_grid,
            cfg.rho,
            seed,
            target_neglog_stderr=cfg.target_neglog_stderr,
            min_replicas=cfg.replicas,
            jump_budget=cfg.jump_budget,
        )
    else:
        estimates = []
        for j, t in enumerate(cfg.t_grid):
            keys = replica_keys(seed, cfg.replicas, stream=16 * j + 2)
            batch = sample_batch(t, cfg.replicas, keys, jump_budget=cfg.jump_budget)
            estimates.append(persistence_from_batch(batch, cfg.rho))
    rows = [
        (e.t, e.rho, e.mean, e.stderr, e.replicas, e.aborted) for e in estimates
    ]
    return rows, {"points": [e.replicas for e in estimates]}, sum(
        e.aborted for e in estimates
    )


def run_tail(cfg: ExperimentConfig):
    seed = experiment_seed(cfg)
    if cfg.target_neglog_stderr is not None:
        per_t = tail_series(
            cfg.t_grid,
            cfg.rho,
            cfg.level_alphas,
            cfg.marks_per_replica,
            seed,
            targets=[cfg.target_neglog_stderr] * len(cfg.level_alphas),
            min_replicas=cfg.replicas,
            jump_budget=cfg.jump_budget,
        )
    else:
        per_t = tail_series(
            cfg.t_grid,
            cfg.rho,
            cfg.level_alphas,
            cfg.marks_per_replica,
            seed,
            targets=[float("inf")] * len(cfg.level_alphas),
            pilot=2,
            min_replicas=cfg.replicas,
            max_replicas=cfg.replicas,
            jump_budget=cfg.jump_budget,
        )
    rows = []
    aborted = 0
    for ests in per_t:
        for e in ests:
            rows.append(
                (e.t, e.rho, e.level_alpha, e.prob, e.stderr, e.replicas,
                 e.marks_per_replica, e.aborted)
            )
        aborted += ests[0].aborted if ests else 0
    return rows, {"points": [ests[0].replicas for ests in per_t]}, aborted


def run_window_counts(cfg: ExperimentConfig):
    seed = experiment_seed(cfg)
    rows = []
    aborted = 0
    for j, t in enumerate(cfg.t_grid):
        keys = replica_keys(seed, cfg.replicas, stream=16 * j + 2)
        est = mean_window_count(t, cfg.replicas, keys, jump_budget=cfg.jump_budget)
        rows.append((est.t, est.mean, est.stderr, est.replicas))
        aborted += est.aborted
    return rows, {"points": [cfg.replicas] * len(cfg.t_grid)}, aborted


def run_duality_check(cfg: ExperimentConfig):
    """Forward-vs-dual cross-validation of persistence and one tail level."""
    seed = experiment_seed(cfg)
    torus = TorusConfig(side=cfg.torus_side, horizon=cfg.horizon, rho=cfg.rho)
    fwd_p = forward_persistence_mc(
        torus, cfg.forward_replicas, replica_keys(seed, cfg.forward_replicas, stream=2)
    )
    fwd_t = forward_tail_mc(
        torus,
        cfg.duality_level_alpha,
        cfg.forward_replicas,
        replica_keys(seed, cfg.forward_replicas, stream=3),
    )
    sim_keys = replica_keys(seed, cfg.replicas, stream=4)
    mark_keys = replica_keys(seed, cfg.replicas, stream=5)
    batch = sample_batch(
        cfg.horizon, cfg.replicas, sim_keys, jump_budget=cfg.jump_budget,
        want_masses=True,
    )
    dual_p = persistence_from_batch(batch, cfg.rho)
    dual_t = tail_from_batch(
        batch, cfg.rho, cfg.duality_level_alpha, cfg.marks_per_replica, mark_keys
    )
    rows = []
    for name, level, fwd, dual_mean, dual_stderr in (
        ("persistence", 1.0, fwd_p, dual_p.mean, dual_p.stderr),
        ("tail", cfg.duality_level_alpha, fwd_t, dual_t.prob, dual_t.stderr),
    ):
        z = abs(fwd.mean - dual_mean) / math.hypot(fwd.stderr, dual_stderr)
        rows.append(
            (
                name,
                cfg.horizon,
                cfg.rho,
                level,
                fwd.mean,
                fwd.stderr,
                dual_mean,
                dual_stderr,
                z,
                "agree" if z <= 3.0 else "DISAGREE",
            )
        )
    counts = {
        "forward": cfg.forward_replicas,
        "dual": cfg.replicas,
    }
    return rows, counts, batch.n_aborted


def run_walk_tests(cfg: ExperimentConfig):
    """Random-walk reference checks: hitting orders, two-walk meeting,
    annulus confinement, and the exact linear-solve oracle."""
    seed = experiment_seed(cfg)
    rows = []
    stream = iter(range(2, 200))
    replicas = cfg.replicas
    for t in cfg.t_grid:
        root_t = math.sqrt(t)
        for exponent in (0.125, 0.25, 0.375):
            x = (int(round(t**exponent)), 0)
            est = hit_origin_before_exit_mc(
                x, root_t, replicas, replica_keys(seed, replicas, stream=next(stream))
            )
            ref = lawler_reference_hit_before_exit(x, t)
            rows.append(
                ("hit_before_exit", t, x[0], est.mean, est.stderr, ref,
                 est.mean / ref, est.replicas, "")
            )
        for s in (2.0 * t / math.log(t), t / 4.0, 0.45 * t):
            est = meet_prob_mc(
                s, t, replicas, replica_keys(seed, replicas, stream=next(stream))
            )
            ref = (math.log(t) - math.log(s)) / math.log(t)
            rows.append(
                ("meet", t, s, est.mean, est.stderr, ref, est.mean / ref,
                 est.replicas, est.warning or "")
            )
    t_exact = max(cfg.t_grid)
    x = (int(round(t_exact**0.25)), 0)
    exact = hit_origin_before_exit_exact(x, math.sqrt(t_exact))
    est = hit_origin_before_exit_mc(
        x, math.sqrt(t_exact), replicas, replica_keys(seed, replicas, stream=next(stream))
    )
    rows.append(
        ("hit_exact_oracle", t_exact, x[0], est.mean, est.stderr, exact,
         est.mean / exact, est.replicas, "")
    )
    for t_ann in (100.0, 400.0):
        est = annulus_stay_prob_mc(
            t_ann, cfg.forward_replicas, replica_keys(seed, cfg.forward_replicas, stream=next(stream))
        )
        rows.append(
            ("annulus_stay", t_ann, "", est.mean, est.stderr, "", "",
             est.replicas, "")
        )
    return rows, {"per_cell": replicas, "annulus": cfg.forward_replicas}, 0


def run_fit(cfg: ExperimentConfig):
    if not cfg.input:
        raise ConfigError("fit needs --input pointing at a results file")
    kind, columns, rows = read_results(cfg.input)
    if kind == "persistence":
        triples = [
            (float(r[columns.index("t")]), float(r[columns.index("p_hat")]),
             float(r[columns.index("stderr")]))
            for r in rows
        ]
    elif kind == "tail":
        levels = sorted({float(r[columns.index("level_alpha")]) for r in rows})
        if cfg.fit_level_alpha is None:
            raise ConfigError(
                f"tail input holds levels {levels}; pick one with --level"
            )
        triples = [
            (float(r[columns.index("t")]), float(r[columns.index("p_hat")]),
             float(r[columns.index("stderr")]))
            for r in rows
            if abs(float(r[columns.index("level_alpha")]) - cfg.fit_level_alpha) < 1e-12
        ]
        if not triples:
            raise ConfigError(
                f"level {cfg.fit_level_alpha} not present; available: {levels}"
            )
    else:
        raise ConfigError(f"cannot fit results of kind {kind!r}")
    out_rows = []
    for model in ("log", "log2"):
        fit = fit_scaling(triples, model)
        out_rows.append(
            (fit.model, fit.slope, fit.slope_stderr, fit.intercept,
             fit.r_squared, fit.n_points)
        )
    return out_rows, {"input_points": len(triples)}, 0


RUNNERS = {
    "persistence": (run_persistence, "persistence"),
    "tail": (run_tail, "tail"),
    "window-counts": (run_window_counts, "window-counts"),
    "duality-check": (run_duality_check, "duality-check"),
    "walk-tests": (run_walk_tests, "walk-tests"),
    "fit": (run_fit, "fit"),
}


def run(cfg: ExperimentConfig) -> int:
    """Execute one experiment; writes results + manifest, returns exit status."""
    _set_workers(cfg)
    runner, kind = RUNNERS[cfg.kind]
    started = time.time()
    rows, replica_counts, aborted = runner(cfg)
    wall = time.time() - started
    write_results(cfg.out, kind, RESULT_COLUMNS[kind], rows, cfg)
    write_manifest(cfg.out + ".manifest.json", cfg, wall, replica_counts, aborted)
    return EXIT_DEGRADED if aborted else EXIT_OK


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def report(paths, out) -> int:
    """Summarize one or more results files; emits a text summary plus one
    plot-ready (x, y, yerr) file per figure."""
    if not paths:
        raise ConfigError("report needs at least one results file")
    groups = {}
    for path in paths:
        kind, columns, rows = read_results(path)
        groups.setdefault(kind, []).append((path, columns, rows))
    stem = out[: -len(".md")] if out.endswith(".md") else out
    lines = ["# voterlab report", ""]
    figures = []

    def table(columns, rows):
        lines.append("| " + " | ".join(columns) + " |")
        lines.append("|" + "---|" * len(columns))
        for r in rows:
            lines.append("| " + " | ".join(str(v) for v in r) + " |")
        lines.append("")

    for kind in sorted(groups):
        for path, columns, rows in groups[kind]:
            lines.append(f"## {kind} ({path})")
            lines.append("")
            table(columns, rows)
            if kind == "persistence":
                triples = [
                    (float(r[columns.index("t")]), float(r[columns.index("p_hat")]),
                     float(r[columns.index("stderr")]))
                    for r in rows
                ]
                _fit_comparison(lines, triples, "persistence")
                figures.append(
                    (f"{stem}_persistence_neglog.csv",
                     [(t, -math.log(p), se / p) for t, p, se in triples if p > 0])
                )
            elif kind == "tail":
                levels = sorted({float(r[columns.index("level_alpha")]) for r in rows})
                for lvl in levels:
                    triples = [
                        (float(r[columns.index("t")]), float(r[columns.index("p_hat")]),
                         float(r[columns.index("stderr")]))
                        for r in rows
                        if abs(float(r[columns.index("level_alpha")]) - lvl) < 1e-12
                    ]
                    _fit_comparison(lines, triples, f"tail level {lvl}")
                    figures.append(
                        (f"{stem}_tail_neglog_alpha{lvl}.csv",
                         [(t, -math.log(p), se / p) for t, p, se in triples if p > 0])
                    )
            elif kind == "window-counts":
                pts = [
                    (float(r[columns.index("t")]), float(r[columns.index("mean_count")]),
                     float(r[columns.index("stderr")]))
                    for r in rows
                ]
                if len(pts) >= 3:
                    u = np.array([math.log(t) for t, _, _ in pts])
                    y = np.array([m for _, m, _ in pts])
                    slope, intercept = np.polyfit(u, y, 1)
                    fitted = intercept + slope * u
                    ss_res = float(((y - fitted) ** 2).sum())
                    ss_tot = float(((y - y.mean()) ** 2).sum())
                    r2 = 1.0 - ss_res / ss_tot if ss_tot else 1.0
                    ratios = [m / math.log(t) for t, m, _ in pts]
                    lines.append(
                        f"- linear fit vs log t: slope={slope:.4f}, "
                        f"intercept={intercept:.4f}, R^2={r2:.4f}"
                    )
                    lines.append(
                        f"- mean/log t band: [{min(ratios):.4f}, {max(ratios):.4f}] "
                        f"(factor {max(ratios)/min(ratios):.3f})"
                    )
                    lines.append("")
                figures.append((f"{stem}_window_counts.csv", pts))
            elif kind == "duality-check":
                verdicts = [r[columns.index("verdict")] for r in rows]
                ok = all(v == "agree" for v in verdicts)
                lines.append(f"- duality verdict: {'PASS' if ok else 'FAIL'}")
                lines.append("")
    for fig_path, pts in figures:
        fig_lines = ["x,y,yerr"] + [
            f"{_fmt(x)},{_fmt(y)},{_fmt(e)}" for x, y, e in pts
        ]
        with open(fig_path, "w", newline="") as fh:
            fh.write("\n".join(fig_lines) + "\n")
        lines.append(f"- figure data: {fig_path}")
    with open(out, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def _fit_comparison(lines, triples, label):
    positive = [tr for tr in triples if tr[1] > 0]
    if len(positive) < 3:
        lines.append(f"- {label}: fewer than 3 positive points, no fit")
        lines.append("")
        return
    log_fit = fit_scaling(positive, "log")
    log2_fit = fit_scaling(positive, "log2")
    better = "log2" if log2_fit.r_squared > log_fit.r_squared else "log"
    lines.append(
        f"- {label}: log model slope={log_fit.slope:.4f}"
        f"+-{log_fit.slope_stderr:.4f}, R^2={log_fit.r_squared:.5f}"
    )
    lines.append(
        f"- {label}: log2 model slope={log2_fit.slope:.4f}"
        f"+-{log2_fit.slope_stderr:.4f}, R^2={log2_fit.r_squared:.5f}"
        f" -> better: {better}"
    )
    lines.append("")


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------


def _add_common(parser):
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="root seed (overrides config)")
    parser.add_argument("--workers", type=int, help="numba worker threads")
    parser.add_argument("--out", help="output path")
    parser.add_argument("--format", choices=["csv", "json"], help="output format")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="voterlab",
        description="Voter-model occupation-time experiments on the 2D lattice",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in ("persistence", "tail", "duality-check", "walk-tests", "window-counts"):
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        _add_common(p)
    p_fit = sub.add_parser("fit", help="fit scaling models to an emitted series")
    _add_common(p_fit)
    p_fit.add_argument("--input", help="results file to fit")
    p_fit.add_argument(
        "--level", type=float, default=None,
        help="level_alpha to select from a tail results file",
    )
    p_rep = sub.add_parser("report", help="summarize results files")
    p_rep.add_argument("paths", nargs="+", help="results files")
    p_rep.add_argument("--out", default="voterlab_report.md")
    args = parser.parse_args(argv)

    try:
        if args.command == "report":
            return report(args.paths, args.out)
        overrides = {
            "seed": args.seed,
            "workers": args.workers,
            "out": args.out,
            "format": args.format,
        }
        if args.command == "fit":
            overrides["input"] = args.input
            overrides["fit_level_alpha"] = args.level
        cfg = load_config(args.config, args.command, overrides)
        return run(cfg)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
