"""Config-driven experiment runner that writes tidy CSV.

Configs are TOML documents with four sections::

    [problem]
    n = 10
    sigma = 0.1
    problem_seed = 0
    noise_scale_is_std = true

    [solver]
    kind = "local_adaseg"      # segda, minibatch_eg, local_sgda, local_segda
    G0 = 1.0
    alpha_mode = "nonsmooth"   # smooth, smooth_eps
    eps = 0.25
    # fixed_eta = 0.05         # baselines only; default D / (G0 sqrt(T))
    # D = 3.0                  # override the diameter bound

    [topology]
    M = 4
    K = 50                     # or per_worker_K = [50, 45, 40, 35]
    R = 40
    master_seed = 0

    [output]
    csv = "run.csv"
    record_every = "auto"      # round, iteration
    metric_point = "average"   # anchor
    emit_problem = false
    # label = "adaseg-K50"

Every key is optional. ``LOCALADASEG_OUTPUT_DIR`` relocates all output
files into that directory.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .algorithms import ALPHA_MODES, SOLVER_NAMES, SolverKind
from .core import ConfigurationError, UsageError
from .problems import BilinearProblem, generate_bilinear
from .simulator import CSV_COLUMNS, BilinearSpec, Topology, Trajectory, run, sweep

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "run_experiment",
    "compare",
    "write_csv",
    "read_csv",
    "main",
    "OUTPUT_DIR_ENV",
]

OUTPUT_DIR_ENV = "LOCALADASEG_OUTPUT_DIR"
AUTO_ITERATION_LIMIT = 10_000

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class ConfigError(ConfigurationError):
    """All problems found in a config document."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ProblemSection:
    n: int = 10
    sigma: float = 0.1
    problem_seed: int = 0
    noise_scale_is_std: bool = True


@dataclass
class SolverSection:
    kind: str = "local_adaseg"
    G0: float = 1.0
    alpha_mode: str = "nonsmooth"
    eps: float = 0.25
    fixed_eta: float | None = None
    D: float | None = None


@dataclass
class TopologySection:
    M: int = 4
    K: int | None = 50
    R: int = 40
    per_worker_K: list[int] | None = None
    master_seed: int = 0


@dataclass
class OutputSection:
    csv: str = "run.csv"
    record_every: str = "auto"
    metric_point: str = "average"
    emit_problem: bool = False
    label: str | None = None


@dataclass
class ExperimentConfig:
    problem: ProblemSection = field(default_factory=ProblemSection)
    solver: SolverSection = field(default_factory=SolverSection)
    topology: TopologySection = field(default_factory=TopologySection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> dict:
        """Plain nested dict with ``None`` entries dropped (TOML has no null)."""
        return {
            name: {k: v for k, v in asdict(getattr(self, name)).items() if v is not None}
            for name in ("problem", "solver", "topology", "output")
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return _build(data)

    def build_problem(self) -> BilinearProblem:
        p = self.problem
        return generate_bilinear(p.n, p.sigma, p.problem_seed, p.noise_scale_is_std)

    def build_topology(self) -> Topology:
        s, t = self.solver, self.topology
        per = tuple(t.per_worker_K) if t.per_worker_K is not None else None
        return Topology(
            M=t.M,
            R=t.R,
            K=None if per is not None else t.K,
            per_worker_K=per,
            solver=SolverKind(s.kind, s.fixed_eta),
            alpha_mode=s.alpha_mode,
            eps=s.eps,
            G0=s.G0,
            master_seed=t.master_seed,
            D=s.D,
        )

    @property
    def label(self) -> str:
        return self.output.label or self.solver.kind

    def record_every(self) -> str:
        mode = self.output.record_every
        if mode == "auto":
            return "iteration" if self.build_topology().T <= AUTO_ITERATION_LIMIT else "round"
        return mode


_SECTIONS = {
    "problem": ProblemSection,
    "solver": SolverSection,
    "topology": TopologySection,
    "output": OutputSection,
}

# Expected Python types per key; float keys also accept integers.
_TYPES: dict[str, dict[str, type | tuple]] = {
    "problem": {"n": int, "sigma": float, "problem_seed": int, "noise_scale_is_std": bool},
    "solver": {"kind": str, "G0": float, "alpha_mode": str, "eps": float, "fixed_eta": float, "D": float},
    "topology": {"M": int, "K": int, "R": int, "per_worker_K": list, "master_seed": int},
    "output": {"csv": str, "record_every": str, "metric_point": str, "emit_problem": bool, "label": str},
}


def _type_ok(value: Any, expected: type) -> bool:
    if expected is bool:
        return isinstance(value, bool)
    if expected is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if expected is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return isinstance(value, expected)


def _build(data: dict) -> ExperimentConfig:
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["config document must be a table of sections"])
    for name in data:
        if name not in _SECTIONS:
            errors.append(f"{name}: unknown section (expected one of {', '.join(_SECTIONS)})")
    sections = {}
    for name, cls in _SECTIONS.items():
        raw = data.get(name, {})
        if not isinstance(raw, dict):
            errors.append(f"{name}: must be a table")
            raw = {}
        kwargs = {}
        for key, value in raw.items():
            expected = _TYPES[name].get(key)
            if expected is None:
                errors.append(f"{name}.{key}: unknown key")
            elif not _type_ok(value, expected):
                errors.append(f"{name}.{key}: expected {expected.__name__}, got {type(value).__name__}")
            else:
                kwargs[key] = float(value) if expected is float else value
        sections[name] = cls(**kwargs)
    cfg = ExperimentConfig(**sections)
    errors.extend(_semantic_errors(cfg, data.get("topology", {}) if isinstance(data.get("topology"), dict) else {}))
    if errors:
        raise ConfigError(errors)
    return cfg


def _semantic_errors(cfg: ExperimentConfig, raw_topology: dict) -> list[str]:
    errs = []
    p, s, t, o = cfg.problem, cfg.solver, cfg.topology, cfg.output
    if p.n < 1:
        errs.append(f"problem.n: must be >= 1, got {p.n}")
    if p.sigma < 0:
        errs.append(f"problem.sigma: must be >= 0, got {p.sigma}")
    if not 0 <= p.problem_seed < 2**64:
        errs.append("problem.problem_seed: must fit in an unsigned 64-bit integer")
    if s.kind not in SOLVER_NAMES:
        errs.append(f"solver.kind: unknown solver {s.kind!r} (expected one of {', '.join(SOLVER_NAMES)})")
    if s.G0 <= 0:
        errs.append(f"solver.G0: must be > 0, got {s.G0}")
    if s.alpha_mode not in ALPHA_MODES:
        errs.append(f"solver.alpha_mode: unknown mode {s.alpha_mode!r} (expected one of {', '.join(ALPHA_MODES)})")
    elif s.alpha_mode == "smooth_eps" and not 0 < s.eps < 0.5:
        errs.append(f"solver.eps: must lie in (0, 1/2) for smooth_eps, got {s.eps}")
    if s.fixed_eta is not None and s.fixed_eta <= 0:
        errs.append(f"solver.fixed_eta: must be > 0, got {s.fixed_eta}")
    if s.D is not None and s.D <= 0:
        errs.append(f"solver.D: must be > 0, got {s.D}")
    if t.M < 1:
        errs.append(f"topology.M: must be >= 1, got {t.M}")
    if t.R < 1:
        errs.append(f"topology.R: must be >= 1, got {t.R}")
    if t.per_worker_K is not None:
        if "K" in raw_topology:
            errs.append("topology.K: give either K or per_worker_K, not both")
        if not all(_type_ok(k, int) for k in t.per_worker_K):
            errs.append("topology.per_worker_K: entries must be integers")
        else:
            if any(k < 1 for k in t.per_worker_K):
                errs.append("topology.per_worker_K: entries must be >= 1")
            if len(t.per_worker_K) != t.M:
                errs.append(f"topology.per_worker_K: has {len(t.per_worker_K)} entries but topology.M = {t.M}")
        if s.kind == "minibatch_eg":
            errs.append("topology.per_worker_K: not supported by solver.kind = minibatch_eg")
    elif t.K is not None and t.K < 1:
        errs.append(f"topology.K: must be >= 1, got {t.K}")
    if not 0 <= t.master_seed < 2**64:
        errs.append("topology.master_seed: must fit in an unsigned 64-bit integer")
    if s.kind == "segda" and t.M != 1:
        errs.append(f"topology.M: solver.kind = segda runs on a single worker, got M = {t.M}")
    if o.record_every not in ("auto", "round", "iteration"):
        errs.append(f"output.record_every: expected auto, round or iteration, got {o.record_every!r}")
    if o.metric_point not in ("average", "anchor"):
        errs.append(f"output.metric_point: expected average or anchor, got {o.metric_point!r}")
    if not o.csv:
        errs.append("output.csv: must be a non-empty path")
    return errs


def parse_config(text: str, fmt: str = "toml") -> ExperimentConfig:
    """Parse and validate a config document.

    ``fmt`` is ``"toml"`` or ``"json"``. A JSON document may also be a run
    sidecar, in which case its ``config`` entry is used. Raises
    :class:`ConfigError` listing every problem found.
    """
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"syntax error at line {exc.lineno}: {exc.msg}"]) from exc
        if isinstance(data, dict) and "config" in data and "problem" not in data:
            data = data["config"]
    elif fmt == "toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            lineno = getattr(exc, "lineno", None)
            where = f" at line {lineno}" if lineno else ""
            raise ConfigError([f"syntax error{where}: {exc}"]) from exc
    else:
        raise UsageError(f"unknown config format {fmt!r}")
    return _build(data)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc.strerror}"]) from exc
    return parse_config(text, "json" if path.suffix == ".json" else "toml")


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def output_path(path: str | os.PathLike) -> Path:
    """Apply the output-directory override from the environment."""
    path = Path(path)
    override = os.environ.get(OUTPUT_DIR_ENV)
    if override:
        return Path(override) / path.name
    return path


def _prepare(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not os.access(path.parent, os.W_OK):
        raise PermissionError(f"output directory {path.parent} is not writable")
    return path


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    path = _prepare(Path(path))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path: str | os.PathLike) -> tuple[list[str], list[list[str]]]:
    """Raw header and rows; convert with ``float`` or ``int`` as needed."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


@dataclass
class RunOutput:
    csv_path: Path
    meta_path: Path
    trajectory: Trajectory


def _sidecar(config: ExperimentConfig, problem: BilinearProblem, tr: Trajectory) -> dict:
    meta = {
        "config": config.to_dict(),
        "gamma_observed": tr.gamma_observed,
        "initial_residual": tr.initial_residual,
        "initial_gap": tr.initial_gap,
        "final_output": {"x": tr.final_output.x.tolist(), "y": tr.final_output.y.tolist()},
        "final_anchor": {"x": tr.final_anchor.x.tolist(), "y": tr.final_anchor.y.tolist()},
        "oracle_calls": tr.oracle_calls,
        "samples": tr.samples,
        "D": tr.D,
        "alpha": tr.alpha,
        "T": config.build_topology().T,
        "v_max_over_sqrt_T": tr.records[-1].v_max / config.build_topology().T ** 0.5,
    }
    if config.output.emit_problem:
        meta["problem"] = problem.to_dict()
    return meta


def run_experiment(config: ExperimentConfig, csv_path: str | os.PathLike | None = None) -> RunOutput:
    """Run one configured experiment; write the CSV and its ``.meta.json`` sidecar."""
    path = output_path(csv_path if csv_path is not None else config.output.csv)
    _prepare(path)
    problem = config.build_problem()
    topology = config.build_topology()
    tr = run(topology, problem, record_every=config.record_every(), metric_point=config.output.metric_point)
    write_csv(path, CSV_COLUMNS, tr.rows())
    meta_path = path.with_suffix(".meta.json")
    meta_path.write_text(json.dumps(_sidecar(config, problem, tr), indent=2))
    return RunOutput(path, meta_path, tr)


def compare(configs: Sequence[ExperimentConfig], csv_path: str | os.PathLike) -> Path:
    """Run several solvers on one problem; long-format CSV keyed by ``solver`` label."""
    if len(configs) < 2:
        raise UsageError("compare needs at least two configs")
    first = asdict(configs[0].problem)
    for cfg in configs[1:]:
        if asdict(cfg.problem) != first:
            raise UsageError("compare requires identical [problem] sections in every config")
    labels = [cfg.label for cfg in configs]
    dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
    if dupes:
        raise UsageError(f"duplicate run labels {dupes}; set output.label to tell runs apart")
    path = _prepare(output_path(csv_path))
    problem = configs[0].build_problem()
    rows = []
    for cfg, label in zip(configs, labels):
        tr = run(cfg.build_topology(), problem, record_every=cfg.record_every(), metric_point=cfg.output.metric_point)
        rows.extend((label, *row) for row in tr.rows())
    return write_csv(path, ("solver", *CSV_COLUMNS), rows)


# ---------------------------------------------------------------- sweeps

_SWEEP_KEYS = {
    "topology.M": "M",
    "topology.K": "K",
    "topology.R": "R",
    "solver.G0": "G0",
    "solver.alpha_mode": "alpha_mode",
    "solver.eps": "eps",
    "solver.D": "D",
    "problem.n": "n",
    "problem.sigma": "sigma",
    "problem.noise_scale_is_std": "noise_scale_is_std",
}


def _parse_value(text: str):
    low = text.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text.strip()


def parse_vary(items: Sequence[str]) -> dict[str, list]:
    """``["topology.K=1,5,10", ...]`` -> ``{"topology.K": [1, 5, 10], ...}``."""
    grid: dict[str, list] = {}
    for item in items:
        key, sep, values = item.partition("=")
        key = key.strip()
        if not sep or not values:
            raise ConfigError([f"--vary {item!r}: expected key=v1,v2,..."])
        if key not in _SWEEP_KEYS and key not in ("solver.kind", "solver.fixed_eta"):
            raise ConfigError([f"--vary {key}: cannot be varied (choose from {', '.join(sorted(_SWEEP_KEYS))}, solver.kind, solver.fixed_eta)"])
        grid[key] = [_parse_value(v) for v in values.split(",")]
    if not grid:
        raise ConfigError(["sweep needs at least one --vary"])
    return grid


def run_sweep(
    config: ExperimentConfig,
    vary: dict[str, list],
    seeds: Sequence[int],
    csv_path: str | os.PathLike,
    n_jobs: int = 1,
) -> Path:
    """Grid x seeds through :func:`localadaseg.simulator.sweep`; long-format CSV."""
    base = config.build_topology()
    spec = BilinearSpec(config.problem.n, config.problem.sigma, config.problem.noise_scale_is_std)
    if "solver.kind" in vary and "solver.fixed_eta" in vary:
        raise ConfigError(["--vary: solver.kind and solver.fixed_eta cannot be varied together"])
    sim_vary = {}
    for key, values in vary.items():
        if key == "solver.kind":
            sim_vary["solver"] = [SolverKind(v, config.solver.fixed_eta) for v in values]
        elif key == "solver.fixed_eta":
            sim_vary["solver"] = [SolverKind(config.solver.kind, float(v)) for v in values]
        else:
            sim_vary[_SWEEP_KEYS[key]] = values
    if "K" in sim_vary and base.per_worker_K is not None:
        base = replace(base, per_worker_K=None, K=sim_vary["K"][0])
    # Validate every grid point before launching anything.
    for combo in _grid(sim_vary):
        topo_kw = {k: v for k, v in combo.items() if k in {f.name for f in fields(Topology)}}
        errs = replace(base, **topo_kw).errors()
        if errs:
            raise ConfigError([f"grid point {combo}: {e}" for e in errs])
    record_every = "iteration" if config.output.record_every == "iteration" else "round"
    results = sweep(base, sim_vary, seeds, spec, n_jobs=n_jobs, record_every=record_every)
    # sweep() returns grid-major results in itertools.product order, like _grid().
    combos = _grid(vary)
    rows = []
    for i, res in enumerate(results):
        values = combos[i // len(seeds)].values()
        rows.extend((*values, res.seed, *row) for row in res.trajectory.rows())
    return write_csv(_prepare(output_path(csv_path)), (*vary, "seed", *CSV_COLUMNS), rows)


def _grid(vary: dict[str, list]) -> list[dict]:
    keys = list(vary)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(vary[k] for k in keys))]


# ------------------------------------------------------ replication bundles

FIG2_K_GRID = (1, 5, 10, 50, 100, 250, 500)
FIG2_SIGMAS = (0.1, 0.5)


def replicate_fig2(out_dir: Path, seeds: Sequence[int], T: int = 5000, n_jobs: int = 1) -> Path:
    """Residual curves for every ``K`` in the grid and both noise levels at fixed ``T``."""
    rows = []
    for K in FIG2_K_GRID:
        base = Topology(M=4, K=K, R=max(1, T // K))
        for res in sweep(base, {"sigma": list(FIG2_SIGMAS)}, seeds, BilinearSpec(n=10), n_jobs=n_jobs):
            rows.extend((res.params["sigma"], K, res.seed, *row) for row in res.trajectory.rows())
    return write_csv(_prepare(out_dir / "fig2.csv"), ("sigma", "K", "seed", *CSV_COLUMNS), rows)


def fig3_solvers(eta: float) -> list[tuple[str, SolverKind]]:
    """Labelled solvers of the baseline comparison; ``eta`` is the fixed step of the baselines.

    The adaptive minibatch extragradient stands in for the adaptive
    minibatch baselines, whose update rules are not implemented here.
    """
    return [
        ("LocalAdaSEG", SolverKind("local_adaseg")),
        ("LocalSGDA", SolverKind("local_sgda", eta)),
        ("LocalSEGDA", SolverKind("local_segda", eta)),
        ("MB-SEGDA", SolverKind("minibatch_eg", eta)),
        ("MB-AdaEG (stand-in)", SolverKind("minibatch_eg")),
    ]


def replicate_fig3(out_dir: Path, seeds: Sequence[int], R: int = 40, n_jobs: int = 1) -> Path:
    """LocalAdaSEG against the baselines at ``K = 50``, ``M = 4``, both noise levels."""
    rows = []
    K, M = 50, 4
    for sigma in FIG2_SIGMAS:
        spec = BilinearSpec(n=10, sigma=sigma)
        D = spec(0).feasible_set.diameter_bound()
        for label, kind in fig3_solvers(D / (K * R) ** 0.5):
            base = Topology(M=M, K=K, R=R, solver=kind)
            for res in sweep(base, {"R": [R]}, seeds, spec, n_jobs=n_jobs):
                rows.extend((label, sigma, res.seed, *row) for row in res.trajectory.rows())
    return write_csv(_prepare(out_dir / "fig3.csv"), ("solver", "sigma", "seed", *CSV_COLUMNS), rows)


def replicate_async(out_dir: Path, seeds: Sequence[int], R: int = 40, n_jobs: int = 1) -> Path:
    """Synchronous vs asynchronous LocalAdaSEG and single-worker SEGDA with the same sample budget."""
    rows = []
    runs = (
        ("Synch-50", Topology(M=4, K=50, R=R)),
        ("Asynch-50", Topology(M=4, K=None, per_worker_K=(50, 45, 40, 35), R=R)),
        ("SEGDA-MKR", Topology(M=1, K=4 * 50, R=R, solver=SolverKind("segda"))),
    )
    spec = BilinearSpec(n=10, sigma=0.1)
    for label, base in runs:
        for res in sweep(base, {"R": [R]}, seeds, spec, n_jobs=n_jobs):
            rows.extend((label, res.seed, *row) for row in res.trajectory.rows())
    return write_csv(_prepare(out_dir / "async.csv"), ("run", "seed", *CSV_COLUMNS), rows)


# ------------------------------------------------------------------- main


def _seeds(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return list(range(int(lo), int(hi)))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from exc


def _out_dir(arg: str | None) -> Path:
    if os.environ.get(OUTPUT_DIR_ENV):
        return Path(os.environ[OUTPUT_DIR_ENV])
    return Path(arg or ".")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="localadaseg", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one config and write CSV + sidecar")
    p.add_argument("config")
    p.add_argument("--out", help="CSV path (overrides output.csv)")

    p = sub.add_parser("sweep", help="run a parameter grid over several seeds")
    p.add_argument("config")
    p.add_argument("--vary", action="append", default=[], metavar="KEY=V1,V2,...")
    p.add_argument("--seeds", type=_seeds, default=None, help="e.g. 0,1,2 or 0:10 (default: problem_seed)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="sweep.csv")

    p = sub.add_parser("compare", help="run several configs on the same problem")
    p.add_argument("configs", nargs="+")
    p.add_argument("--out", default="compare.csv")

    for name, help_text, length in (
        ("replicate-fig2", "LocalAdaSEG over the K grid at two noise levels", ("--T", 5000, "iterations per run")),
        ("replicate-fig3", "LocalAdaSEG against baselines", ("--R", 40, "communication rounds")),
        ("replicate-async", "synchronous vs asynchronous local steps", ("--R", 40, "communication rounds")),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seeds", type=_seeds, default=[0, 1, 2])
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out-dir", default=None)
        p.add_argument(length[0], type=int, default=length[1], help=length[2])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            out = run_experiment(load_config(args.config), args.out)
            print(f"wrote {out.csv_path} ({len(out.trajectory.records)} rows) and {out.meta_path}")
        elif args.command == "sweep":
            cfg = load_config(args.config)
            seeds = args.seeds if args.seeds is not None else [cfg.problem.problem_seed]
            path = run_sweep(cfg, parse_vary(args.vary), seeds, args.out, args.jobs)
            print(f"wrote {path}")
        elif args.command == "compare":
            path = compare([load_config(c) for c in args.configs], args.out)
            print(f"wrote {path}")
        else:
            out_dir = _out_dir(args.out_dir)
            if args.command == "replicate-fig2":
                path = replicate_fig2(out_dir, args.seeds, T=args.T, n_jobs=args.jobs)
            elif args.command == "replicate-fig3":
                path = replicate_fig3(out_dir, args.seeds, R=args.R, n_jobs=args.jobs)
            else:
                path = replicate_async(out_dir, args.seeds, R=args.R, n_jobs=args.jobs)
            print(f"wrote {path}")
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
