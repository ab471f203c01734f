"""``evo-tfs`` command line: oversample, evaluate, inspect.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .data import Dataset, LabeledSeries, concat, format_ucr, imbalance_ratio, load_ucr, min_max_normalize
from .errors import ConfigError, EmptyPlan, EvoTfsError
from .evaluation import CLASSIFIERS, METHODS, EvoSettings, evaluate, format_report
from .fitness import DEFAULT_ALPHA, DEFAULT_SIGMA, FitnessContext
from .gp import GpConfig, evolve
from .scheduler import FitnessSettings, build_plan, population_size_for, process_seed, run_plan
from .terminals import default_window_len, extract_windows

log = logging.getLogger("evotfs")

GP_KEYS = ("population_size", "generations", "crossover_rate", "mutation_rate", "tournament_size", "elites", "max_depth")
CONFIG_KEYS = {
    **{k: int for k in ("population_size", "generations", "tournament_size", "elites", "max_depth")},
    "crossover_rate": float,
    "mutation_rate": float,
    "alpha": float,
    "sigma_dtw": float,
    "sigma_dft": float,
    "window_len": int,
    "seed": int,
    "workers": int,
    "seeds": int,
    "k": int,
}


@dataclass
class RunConfig:
    command: str
    train: Path | None = None
    test: Path | None = None
    out: Path | None = None
    report: Path | None = None
    gp: GpConfig = field(default_factory=GpConfig)
    alpha: float = DEFAULT_ALPHA
    sigma_dtw: float = DEFAULT_SIGMA
    sigma_dft: float = DEFAULT_SIGMA
    window_len: int | None = None
    seed: int = 0
    workers: int = 1
    verbose: bool = False
    normalized_output: bool = False
    methods: tuple[str, ...] = ("none", "evotfs")
    classifier: str = "dtw1nn"
    seeds: int = 1
    k: int = 3
    dump_pool: Path | None = None
    trees: int = 0
    overrides: dict[str, object] = field(default_factory=dict)

    @property
    def fitness(self) -> FitnessSettings:
        return FitnessSettings(self.alpha, self.sigma_dtw, self.sigma_dft)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(2)


def _add_gp_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("evolution")
    g.add_argument("--seed", type=int, help="master seed (default 0)")
    g.add_argument("--workers", type=int, help="parallel GP processes (default $EVO_TFS_THREADS or 1)")
    g.add_argument("--alpha", type=float, help="weight of the DTW term in [0, 1] (default 0.5)")
    g.add_argument("--sigma-dtw", dest="sigma_dtw", type=float, help="Gaussian width for DTW (default 10)")
    g.add_argument("--sigma-dft", dest="sigma_dft", type=float, help="Gaussian width for Fourier distance (default 10)")
    g.add_argument("--window-len", dest="window_len", type=int, help="subseries length (default ceil(T/3))")
    g.add_argument("--no-dtw", dest="no_dtw", action="store_true", help="drop the DTW term (alpha=0)")
    g.add_argument("--no-dft", dest="no_dft", action="store_true", help="drop the Fourier term (alpha=1)")
    g.add_argument("--population-size", dest="population_size", type=int, help="default: 30 if IR < 15 else 50")
    g.add_argument("--generations", type=int, help="default 50")
    g.add_argument("--crossover-rate", dest="crossover_rate", type=float, help="default 0.8")
    g.add_argument("--mutation-rate", dest="mutation_rate", type=float, help="default 0.2")
    g.add_argument("--tournament-size", dest="tournament_size", type=int, help="default 3")
    g.add_argument("--elites", type=int, help="default 2")
    g.add_argument("--max-depth", dest="max_depth", type=int, help="default 10")
    g.add_argument("--config", type=Path, help="key=value file; command-line flags take precedence")
    g.add_argument("-v", "--verbose", action="store_true", help="log best fitness per generation")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evo-tfs", description="Evolutionary time-frequency oversampling for imbalanced time series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("oversample", help="rebalance a UCR training file")
    p.add_argument("--train", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--report", type=Path, help="provenance TSV (default <out>.provenance.tsv)")
    p.add_argument("--normalized", dest="normalized_output", action="store_true", help="emit min-max scaled values")
    _add_gp_flags(p)

    p = sub.add_parser("evaluate", help="compare resampling methods with a 1-NN classifier")
    p.add_argument("--train", type=Path, required=True)
    p.add_argument("--test", type=Path, required=True)
    p.add_argument("--method", dest="methods", action="append", help=f"one of {', '.join(METHODS)}; repeat or comma-separate")
    p.add_argument("--classifier", choices=CLASSIFIERS)
    p.add_argument("--seeds", type=int, help="number of seeds, starting at --seed (default 1)")
    p.add_argument("--k", type=int, help="neighbours for the density-consistency metric (default 3)")
    p.add_argument("--out", type=Path, help="report path (default stdout)")
    _add_gp_flags(p)

    p = sub.add_parser("inspect", help="show dataset statistics, plan, pool and trees")
    p.add_argument("--train", type=Path, required=True)
    p.add_argument("--dump-pool", dest="dump_pool", type=Path, help="write the terminal pool as UCR text")
    p.add_argument("--tree", dest="trees", type=int, nargs="?", const=5, default=0,
                   help="evolve the first planned target and print the top N trees (default 5)")
    _add_gp_flags(p)
    return parser


def read_config_file(path: Path) -> dict[str, object]:
    out: dict[str, object] = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise ConfigError(f"{path}:{n}: bad value for {key}: {value!r}") from None
    return out


def parse_args(argv: Sequence[str]) -> RunConfig:
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        raise SystemExit(2)
    ns = parser.parse_args(list(argv))
    if ns.command is None:
        parser.print_usage(sys.stderr)
        raise SystemExit(2)

    settings: dict[str, object] = {}
    if ns.config is not None:
        settings.update(read_config_file(ns.config))
    for key in CONFIG_KEYS:
        value = getattr(ns, key, None)
        if value is not None:
            settings[key] = value

    if ns.no_dtw and ns.no_dft:
        raise ConfigError("--no-dtw with --no-dft: fitness would be constant")
    if ns.no_dtw:
        settings["alpha"] = 0.0
    if ns.no_dft:
        settings["alpha"] = 1.0

    cfg = RunConfig(command=ns.command, train=ns.train, verbose=ns.verbose, overrides=dict(settings))
    if "workers" not in settings:
        env = os.environ.get("EVO_TFS_THREADS")
        if env:
            try:
                settings["workers"] = int(env)
            except ValueError:
                raise ConfigError(f"EVO_TFS_THREADS must be an integer, got {env!r}") from None
    for key in ("alpha", "sigma_dtw", "sigma_dft", "window_len", "seed", "workers", "seeds", "k"):
        if key in settings:
            setattr(cfg, key, settings[key])
    gp_overrides = {k: settings[k] for k in GP_KEYS if k in settings}
    cfg.gp = GpConfig(**gp_overrides, seed=cfg.seed)

    if not 0.0 <= cfg.alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {cfg.alpha}")
    if cfg.sigma_dtw <= 0 or cfg.sigma_dft <= 0:
        raise ConfigError("sigmas must be positive")
    if cfg.window_len is not None and cfg.window_len < 1:
        raise ConfigError("--window-len must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if cfg.seeds < 1:
        raise ConfigError("--seeds must be >= 1")

    if ns.command == "oversample":
        cfg.out = ns.out
        cfg.report = ns.report or ns.out.with_name(ns.out.name + ".provenance.tsv")
        cfg.normalized_output = ns.normalized_output
    elif ns.command == "evaluate":
        cfg.test = ns.test
        cfg.out = ns.out
        if ns.methods:
            methods = tuple(m.strip() for chunk in ns.methods for m in chunk.split(",") if m.strip())
            bad = [m for m in methods if m not in METHODS]
            if bad:
                raise ConfigError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
            cfg.methods = methods
        if ns.classifier:
            cfg.classifier = ns.classifier
    else:
        cfg.dump_pool = ns.dump_pool
        cfg.trees = ns.trees
    return cfg


def _effective_settings(cfg: RunConfig, population_size: int | None, window_len: int) -> list[tuple[str, object]]:
    gp = asdict(cfg.gp)
    gp["population_size"] = population_size
    items = [(k, gp[k]) for k in GP_KEYS] + [
        ("init", cfg.gp.init),
        ("alpha", cfg.alpha),
        ("sigma_dtw", cfg.sigma_dtw),
        ("sigma_dft", cfg.sigma_dft),
        ("window_len", window_len),
        ("seed", cfg.seed),
    ]
    return items


def _header(cfg: RunConfig, population_size: int | None, window_len: int) -> str:
    lines = [f"# evo-tfs {__version__} {cfg.command}"]
    for k, v in _effective_settings(cfg, population_size, window_len):
        tag = " (override)" if k in cfg.overrides else ""
        lines.append(f"# {k}={v}{tag}")
    return "\n".join(lines) + "\n"


def _prepare(cfg: RunConfig):
    raw = load_ucr(cfg.train)
    train, params = min_max_normalize(raw)
    L = cfg.window_len or default_window_len(train.length)
    pool = extract_windows(train, L)
    gp = cfg.gp
    if gp.population_size is None:
        gp = replace(gp, population_size=population_size_for(imbalance_ratio(train)))
    return raw, train, params, pool, gp


def run_oversample(cfg: RunConfig) -> int:
    raw, train, params, pool, gp = _prepare(cfg)
    try:
        plan = build_plan(train)
    except EmptyPlan:
        plan = None
    if plan is None:
        batch_values = np.empty((0, train.length))
        provenance, labels = [], np.empty(0, dtype=np.int64)
    else:
        log.info("plan: %d processes, %d samples to generate", plan.n_processes, plan.n_generate)
        batch = run_plan(train, plan, pool, gp, cfg.fitness, cfg.workers, cfg.verbose)
        batch_values, labels, provenance = batch.values, batch.labels, batch.provenance
    if cfg.normalized_output:
        base, synth = train, batch_values
    else:
        base, synth = raw, params.invert(batch_values)
    merged = base if len(provenance) == 0 else concat([base, Dataset(synth, labels, raw.label_names)])
    cfg.out.write_text(format_ucr(merged), encoding="utf-8")

    rows = [_header(cfg, gp.population_size, pool.window_len), "class\ttarget_index\trank\tfitness\tseed\n"]
    for p in provenance:
        rows.append(f"{raw.label_names[p.label]}\t{p.target_index}\t{p.rank}\t{p.fitness!r}\t{p.seed}\n")
    cfg.report.write_text("".join(rows), encoding="utf-8")
    log.info("wrote %d rows (%d synthetic) to %s", len(merged), len(provenance), cfg.out)
    return 0


def run_evaluate(cfg: RunConfig) -> int:
    train = load_ucr(cfg.train)
    test = load_ucr(cfg.test, train.label_names)
    settings = EvoSettings(cfg.gp, cfg.fitness, cfg.window_len, cfg.workers)
    seeds = list(range(cfg.seed, cfg.seed + cfg.seeds))
    scores = evaluate(train, test, cfg.methods, cfg.classifier, seeds, settings, cfg.k)
    L = cfg.window_len or default_window_len(train.length)
    text = _header(cfg, cfg.gp.population_size, L) + format_report(scores)
    if cfg.out:
        cfg.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def run_inspect(cfg: RunConfig) -> int:
    raw, train, params, pool, gp = _prepare(cfg)
    out = sys.stdout
    out.write(f"series\t{len(train)}\nlength\t{train.length}\n")
    out.write(f"min\t{params.lo!r}\nmax\t{params.hi!r}\n")
    for label, n in train.class_counts.items():
        out.write(f"class\t{raw.label_names[label]}\t{n}\n")
    ir = imbalance_ratio(train)
    out.write(f"imbalance_ratio\t{ir:.4f}\npopulation_size\t{gp.population_size}\n")
    out.write(f"window_len\t{pool.window_len}\npool_size\t{len(pool)}\n")
    try:
        plan = build_plan(train)
    except EmptyPlan:
        plan = None
        out.write("plan\tnone (balanced)\n")
    if plan is not None:
        for c in plan.classes:
            name = raw.label_names[c.label]
            out.write(f"plan\t{name}\tN={c.n_existing}\tN_g={c.n_generate}\tN_p={c.n_processes}\tquota={c.per_process_quota}\n")
            out.write(f"targets\t{name}\t{','.join(map(str, c.targets))}\n")
    if cfg.dump_pool:
        labels = train.labels[pool.source]
        cfg.dump_pool.write_text(format_ucr(Dataset(pool.subseries, labels, raw.label_names)), encoding="utf-8")
    if cfg.trees and plan is not None:
        c = plan.classes[0]
        t = c.targets[0]
        ctx = FitnessContext(train.values[t], cfg.alpha, cfg.sigma_dtw, cfg.sigma_dft)
        run_cfg = replace(gp, seed=process_seed(cfg.seed, c.label, t))
        ranked = evolve(LabeledSeries(c.label, train.values[t]), pool, ctx, run_cfg)
        for r, ind in enumerate(ranked[: cfg.trees]):
            out.write(f"tree\t{r}\t{ind.fitness!r}\t{ind.tree}\n")
    return 0


def run(cfg: RunConfig) -> int:
    logging.basicConfig(level=logging.INFO if cfg.verbose else logging.WARNING, format="%(message)s")
    handlers = {"oversample": run_oversample, "evaluate": run_evaluate, "inspect": run_inspect}
    try:
        return handlers[cfg.command](cfg)
    except EvoTfsError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except ConfigError as exc:
        sys.stderr.write(f"evo-tfs: error: ConfigError: {exc}\n")
        return 2
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
