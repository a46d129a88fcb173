"""Command line front end: experiments, sweeps, baselines, generators.

Subcommands:

* ``run``       collaborative calibration experiment from a config file
* ``sweep``     repeat ``run`` along one config axis, summarizing final rounds
* ``baseline``  centralized reference models only (rc or ml)
* ``gengraph``  write a communication graph as an edge list
* ``gendata``   write a synthetic dataset as CSV

Configuration is a flat text file of ``key = value`` lines; ``#`` starts
a comment line.  Every key can also be given as a command line flag of
the same name, which takes precedence.  Output files go to --outdir,
falling back to the RISKCAL_OUTDIR environment variable, then ".".
"""
from __future__ import annotations

import argparse
import csv
import os
import re
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .data import DataError, infer_schema, load_csv, train_test_split, write_csv
from .model import evaluate, evaluate_many
from .network import RewireSchedule, build_topology, write_edge_list
from .partition import SPLITTERS, global_sample, local_datasets
from .sim import (
    METRICS_COLUMNS,
    RoundMetrics,
    m0_heuristic,
    run_baseline,
    run_crc,
    write_metrics_csv,
)
from .synth import categorical_mixture, gaussian_blobs, mixed_dataset

OUTDIR_ENV = "RISKCAL_OUTDIR"

SWEEP_AXES = ("n", "m_v", "iter", "delta", "topology", "partition", "fragmentation")

_TOPOLOGY_RE = re.compile(r"^(tree|chain|full|tree\+\d+)$")


class ConfigError(ValueError):
    """Bad configuration key, value or combination."""


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str | None = None
    label_column: int | str = "y"
    n: int = 50
    m_v: int = 50
    t_max: int = 64
    iter: int = 1
    lr: float = 0.05
    m0: float | str = "heuristic"
    topology: str = "tree"
    neighborhood: str = "closed"
    partition: str = "iid"
    delta: int | None = None
    train_size: int | None = None
    test_size: int = 1000
    seed: int = 0
    repetitions: int = 5
    ml_smoothing: float = 1.0
    workers: int = 1


def _parse_label_column(text: str):
    return int(text) if re.fullmatch(r"-?\d+", text) else text


def _parse_m0(text: str):
    if text == "heuristic":
        return "heuristic"
    return float(text)


def _parse_delta(text: str):
    if text in ("inf", "infinite", "none"):
        return None
    return int(text)


def _parse_train_size(text: str):
    if text == "auto":
        return None
    return int(text)


_PARSERS = {
    "dataset": str,
    "label_column": _parse_label_column,
    "n": int,
    "m_v": int,
    "t_max": int,
    "iter": int,
    "lr": float,
    "m0": _parse_m0,
    "topology": str,
    "neighborhood": str,
    "partition": str,
    "delta": _parse_delta,
    "train_size": _parse_train_size,
    "test_size": int,
    "seed": int,
    "repetitions": int,
    "ml_smoothing": float,
    "workers": int,
}


def _format_value(key: str, value) -> str:
    if key == "delta":
        return "inf" if value is None else str(value)
    if key == "train_size":
        return "auto" if value is None else str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_to_text(cfg: ExperimentConfig) -> str:
    """Serialize a config so that parse_config reads back an equal one."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "dataset" and value is None:
            continue
        lines.append(f"{f.name} = {_format_value(f.name, value)}")
    return "\n".join(lines) + "\n"


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.n < 1:
        raise ConfigError(f"n must be >= 1, got {cfg.n}")
    if cfg.m_v < 1:
        raise ConfigError(f"m_v must be >= 1, got {cfg.m_v}")
    if cfg.t_max < 1:
        raise ConfigError(f"t_max must be >= 1, got {cfg.t_max}")
    if cfg.iter < 1:
        raise ConfigError(f"iter must be >= 1, got {cfg.iter}")
    if not cfg.lr > 0:
        raise ConfigError(f"lr must be positive, got {cfg.lr}")
    if cfg.m0 != "heuristic" and not float(cfg.m0) > 0:
        raise ConfigError(f"m0 must be 'heuristic' or positive, got {cfg.m0}")
    if not _TOPOLOGY_RE.fullmatch(cfg.topology):
        raise ConfigError(f"unknown topology {cfg.topology!r}")
    if cfg.topology != "full" and cfg.n < 2:
        raise ConfigError(f"topology {cfg.topology!r} needs n >= 2")
    if cfg.neighborhood not in ("open", "closed"):
        raise ConfigError(f"neighborhood must be 'open' or 'closed', got {cfg.neighborhood!r}")
    if cfg.partition not in SPLITTERS:
        raise ConfigError(f"unknown partition {cfg.partition!r}")
    if cfg.delta is not None and cfg.delta < 1:
        raise ConfigError(f"delta must be >= 1 or inf, got {cfg.delta}")
    if cfg.train_size is not None and cfg.train_size < cfg.n * cfg.m_v:
        raise ConfigError(
            f"train_size {cfg.train_size} cannot cover n * m_v = {cfg.n * cfg.m_v}"
        )
    if cfg.test_size < 1:
        raise ConfigError(f"test_size must be >= 1, got {cfg.test_size}")
    if cfg.repetitions < 1:
        raise ConfigError(f"repetitions must be >= 1, got {cfg.repetitions}")
    if cfg.ml_smoothing < 0:
        raise ConfigError(f"ml_smoothing must be nonnegative, got {cfg.ml_smoothing}")
    if cfg.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {cfg.workers}")


def parse_config(path=None, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Read a config file and apply flag overrides on top of the defaults.

    Unknown keys are errors; an empty file with no overrides yields the
    default configuration.
    """
    values: dict = {}

    def absorb(key: str, text: str, where: str) -> None:
        key = key.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](text.strip())
        except ValueError as e:
            raise ConfigError(f"{where}: bad value for {key!r}: {text.strip()!r}") from e

    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"no such config file: {path}")
        for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
            key, _, text = stripped.partition("=")
            absorb(key, text, f"{path}: line {lineno}")
    for key, text in (overrides or {}).items():
        absorb(key, text, "flag")
    cfg = ExperimentConfig(**values)
    validate_config(cfg)
    return cfg


def resolved_train_size(cfg: ExperimentConfig) -> int:
    return cfg.train_size if cfg.train_size is not None else cfg.n * cfg.m_v


def resolved_m0(cfg: ExperimentConfig) -> float:
    if cfg.m0 == "heuristic":
        return m0_heuristic(cfg.n * cfg.m_v, cfg.lr, cfg.n)
    return float(cfg.m0)


def config_stem(cfg: ExperimentConfig) -> str:
    """Filename stem derived only from config fields, no timestamps."""
    ds = Path(cfg.dataset).stem if cfg.dataset else "nodata"
    topo = cfg.topology.replace("+", "p")
    m0 = "h" if cfg.m0 == "heuristic" else repr(float(cfg.m0))
    delta = "inf" if cfg.delta is None else str(cfg.delta)
    return (
        f"{ds}_{cfg.partition}_{topo}_n{cfg.n}_mv{cfg.m_v}_t{cfg.t_max}"
        f"_it{cfg.iter}_lr{cfg.lr!r}_m0{m0}_delta{delta}_seed{cfg.seed}"
    )


@dataclass
class ExperimentResult:
    paths: list[Path]
    aggregate: list[list[float]]
    final_metrics: list[RoundMetrics]


def _rep_rngs(seed: int, rep: int) -> tuple[np.random.Generator, ...]:
    # Independent substreams per repetition: split, partition, graph.
    return tuple(
        np.random.default_rng(np.random.SeedSequence([seed, rep, j])) for j in range(3)
    )


def _run_repetition(cfg: ExperimentConfig, full, rep: int):
    split_rng, part_rng, graph_rng = _rep_rngs(cfg.seed, rep)
    train, test = train_test_split(full, resolved_train_size(cfg), cfg.test_size, split_rng)
    plan = SPLITTERS[cfg.partition](train, cfg.n, cfg.m_v, part_rng)
    locals_ = local_datasets(train, plan)
    gtrain = global_sample(train, plan)
    m0 = resolved_m0(cfg)

    ml_params, _ = run_baseline("ml", gtrain, smoothing=cfg.ml_smoothing)
    ml_train = evaluate(ml_params, gtrain)
    ml_test = evaluate(ml_params, test)

    rc_params, rc_trace = run_baseline(
        "rc", gtrain, lr=cfg.lr, t_max=cfg.t_max, init_ess=cfg.lr * cfg.n * m0
    )
    rc_test01, _ = evaluate_many([rec.params for rec in rc_trace.records], test)
    per_round = [
        (rc_trace.records[t].err01, float(rc_test01[t])) for t in range(1, cfg.t_max + 1)
    ]

    schedule = RewireSchedule(cfg.topology, cfg.delta)
    result = run_crc(
        locals_,
        schedule,
        m0=m0,
        t_max=cfg.t_max,
        iterations=cfg.iter,
        neighborhood=cfg.neighborhood,
        rng=graph_rng,
        global_train=gtrain,
        global_test=test,
        baseline=per_round,
        workers=cfg.workers,
    )
    baselines = [
        ("ml", ml_train[0], ml_test[0]),
        ("rc", rc_trace.final.err01, float(rc_test01[-1])),
    ]
    return result, rc_trace, plan, baselines


def _write_baselines_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "train_err01", "test_err01"])
        for name, tr, te in rows:
            writer.writerow([name, repr(float(tr)), repr(float(te))])


def _aggregate_rows(per_rep: list[list[RoundMetrics]]) -> list[list[float]]:
    data = np.array([[rm.as_row() for rm in rep] for rep in per_rep], dtype=np.float64)
    mean = data.mean(axis=0)  # (t_max, columns); column 0 is t itself
    return [[int(row[0])] + [float(v) for v in row[1:]] for row in mean]


def _write_aggregate_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for row in rows:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def run_experiment(cfg: ExperimentConfig, outdir=".") -> ExperimentResult:
    """Run all repetitions of one experiment and write its artifacts.

    Per repetition: metrics CSV, centralized trace CSV, partition plan
    CSV, baseline errors CSV and final node parameter dump.  Across
    repetitions: the aggregate metrics CSV (per-round means) and the
    exact configuration used.  Fully deterministic given the config.
    """
    validate_config(cfg)
    if cfg.dataset is None:
        raise ConfigError("no dataset configured")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    table = load_csv(cfg.dataset, cfg.label_column)
    _, full = infer_schema(table)

    stem = config_stem(cfg)
    paths: list[Path] = []
    per_rep_metrics: list[list[RoundMetrics]] = []
    final_metrics: list[RoundMetrics] = []
    for rep in range(cfg.repetitions):
        result, rc_trace, plan, baselines = _run_repetition(cfg, full, rep)
        per_rep_metrics.append(result.metrics)
        final_metrics.append(result.metrics[-1])

        metrics_path = outdir / f"{stem}_rep{rep}_metrics.csv"
        write_metrics_csv(result.metrics, metrics_path)
        trace_path = outdir / f"{stem}_rep{rep}_rc_trace.csv"
        rc_trace.to_csv(trace_path)
        plan_path = outdir / f"{stem}_rep{rep}_plan.csv"
        plan.to_csv(plan_path)
        base_path = outdir / f"{stem}_rep{rep}_baselines.csv"
        _write_baselines_csv(baselines, base_path)
        params_path = outdir / f"{stem}_rep{rep}_params.txt"
        with open(params_path, "w", encoding="utf-8") as fh:
            for st in result.states:
                fh.write(f"node {st.node}\n")
                fh.write(st.params.to_text())
        paths.extend([metrics_path, trace_path, plan_path, base_path, params_path])

    agg_rows = _aggregate_rows(per_rep_metrics)
    agg_path = outdir / f"{stem}_aggregate.csv"
    _write_aggregate_csv(agg_rows, agg_path)
    cfg_path = outdir / f"{stem}_config.txt"
    cfg_path.write_text(config_to_text(cfg), encoding="utf-8")
    paths.extend([agg_path, cfg_path])
    return ExperimentResult(paths, agg_rows, final_metrics)


def _sweep_variant(cfg: ExperimentConfig, axis: str, text: str) -> ExperimentConfig:
    if axis == "fragmentation":
        n = int(text)
        total = cfg.n * cfg.m_v
        if total % n != 0:
            raise ConfigError(f"fragmentation {n} does not divide {total} total instances")
        return replace(cfg, n=n, m_v=total // n)
    if axis in ("n", "m_v", "iter"):
        return replace(cfg, **{axis: int(text)})
    if axis == "delta":
        return replace(cfg, delta=_parse_delta(text))
    if axis in ("topology", "partition"):
        return replace(cfg, **{axis: text})
    raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def sweep(cfg: ExperimentConfig, axis: str, values: list[str], outdir=".") -> Path:
    """Run one experiment per axis value; summarize final-round aggregates."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for text in values:
        variant = _sweep_variant(cfg, axis, text)
        validate_config(variant)
        result = run_experiment(variant, outdir)
        rows.append([axis, text] + result.aggregate[-1])
    path = outdir / f"sweep_{axis}_{config_stem(cfg)}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis", "value", *METRICS_COLUMNS])
        for row in rows:
            writer.writerow(row[:2] + [row[2]] + [repr(float(v)) for v in row[3:]])
    return path


# ---- argument parsing ----

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="path to a key = value config file")
    for f in fields(ExperimentConfig):
        p.add_argument(f"--{f.name}", dest=f"cfg_{f.name}", metavar="V", default=None)
    p.add_argument("--outdir", help=f"output directory (default ${OUTDIR_ENV} or '.')")


def _collect_overrides(args: argparse.Namespace) -> dict[str, str]:
    out = {}
    for f in fields(ExperimentConfig):
        value = getattr(args, f"cfg_{f.name}", None)
        if value is not None:
            out[f.name] = value
    return out


def _resolve_outdir(args: argparse.Namespace) -> str:
    if getattr(args, "outdir", None):
        return args.outdir
    return os.environ.get(OUTDIR_ENV, ".")


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = parse_config(args.config, _collect_overrides(args))
    result = run_experiment(cfg, _resolve_outdir(args))
    final = result.aggregate[-1]
    print(f"wrote {len(result.paths)} files, stem {config_stem(cfg)}")
    print(
        f"final round {final[0]}: test_err_mean={final[3]:.4f} "
        f"rc_test_err={final[7]:.4f} test_gap={final[9]:.4f}"
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = parse_config(args.config, _collect_overrides(args))
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    path = sweep(cfg, args.axis, values, _resolve_outdir(args))
    print(f"wrote {path}")
    return 0


def _cmd_baseline(args: argparse.Namespace) -> int:
    cfg = parse_config(args.config, _collect_overrides(args))
    if cfg.dataset is None:
        raise ConfigError("no dataset configured")
    outdir = Path(_resolve_outdir(args))
    outdir.mkdir(parents=True, exist_ok=True)
    table = load_csv(cfg.dataset, cfg.label_column)
    _, full = infer_schema(table)
    split_rng, _, _ = _rep_rngs(cfg.seed, 0)
    train, test = train_test_split(full, resolved_train_size(cfg), cfg.test_size, split_rng)
    params, trace = run_baseline(
        args.kind, train, lr=cfg.lr, t_max=cfg.t_max, smoothing=cfg.ml_smoothing
    )
    tr01, _ = evaluate(params, train)
    te01, _ = evaluate(params, test)
    stem = f"{config_stem(cfg)}_baseline_{args.kind}"
    params_path = outdir / f"{stem}_params.txt"
    params_path.write_text(params.to_text(), encoding="utf-8")
    if trace is not None:
        trace.to_csv(outdir / f"{stem}_trace.csv")
    print(f"{args.kind}: train_err={tr01:.4f} test_err={te01:.4f}")
    print(f"wrote {params_path}")
    return 0


def _cmd_gengraph(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    graph = build_topology(args.topology, args.n, rng)
    outdir = Path(_resolve_outdir(args))
    outdir.mkdir(parents=True, exist_ok=True)
    topo = args.topology.replace("+", "p")
    out = Path(args.out) if args.out else outdir / f"graph_{topo}_n{args.n}_seed{args.seed}.txt"
    write_edge_list(graph, out)
    print(f"wrote {out} ({len(graph.edges)} edges, sparseness {graph.sparseness():.4f})")
    return 0


def _cmd_gendata(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    if args.kind == "blobs":
        ds = gaussian_blobs(args.m, d=args.d, r=args.r, separation=args.separation, rng=rng)
    elif args.kind == "categorical":
        ds = categorical_mixture(
            args.m, d=args.d, r=args.r, cardinality=args.cardinality, skew=args.skew, rng=rng
        )
    elif args.kind == "mixed":
        ds = mixed_dataset(
            args.m,
            d_continuous=args.d_continuous,
            d_discrete=args.d_discrete,
            r=args.r,
            cardinality=args.cardinality,
            separation=args.separation,
            skew=args.skew,
            rng=rng,
        )
    else:
        raise ConfigError(f"unknown dataset kind {args.kind!r}")
    outdir = Path(_resolve_outdir(args))
    outdir.mkdir(parents=True, exist_ok=True)
    out = Path(args.out) if args.out else outdir / f"{args.kind}_m{args.m}_seed{args.seed}.csv"
    write_csv(ds, out)
    print(f"wrote {out} ({ds.m} instances, {ds.schema.d} features, {ds.schema.class_cardinality} classes)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskcal",
        description="Collaborative risk calibration of naive Bayes classifiers over networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment with repetitions")
    _add_config_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run an experiment per value of one axis")
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True, help="comma separated axis values")
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_base = sub.add_parser("baseline", help="centralized reference models only")
    p_base.add_argument("--kind", required=True, choices=["rc", "ml"])
    _add_config_flags(p_base)
    p_base.set_defaults(func=_cmd_baseline)

    p_graph = sub.add_parser("gengraph", help="generate a communication graph")
    p_graph.add_argument("--topology", required=True)
    p_graph.add_argument("--n", type=int, required=True)
    p_graph.add_argument("--seed", type=int, default=0)
    p_graph.add_argument("--out", default=None)
    p_graph.add_argument("--outdir", default=None)
    p_graph.set_defaults(func=_cmd_gengraph)

    p_data = sub.add_parser("gendata", help="generate a synthetic dataset")
    p_data.add_argument("--kind", required=True, choices=["blobs", "categorical", "mixed"])
    p_data.add_argument("--m", type=int, required=True)
    p_data.add_argument("--d", type=int, default=2)
    p_data.add_argument("--r", type=int, default=2)
    p_data.add_argument("--cardinality", type=int, default=4)
    p_data.add_argument("--separation", type=float, default=4.0)
    p_data.add_argument("--skew", type=float, default=0.7)
    p_data.add_argument("--d_continuous", type=int, default=2)
    p_data.add_argument("--d_discrete", type=int, default=2)
    p_data.add_argument("--seed", type=int, default=0)
    p_data.add_argument("--out", default=None)
    p_data.add_argument("--outdir", default=None)
    p_data.set_defaults(func=_cmd_gendata)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
