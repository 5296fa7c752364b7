"""Seeded Monte Carlo recovery experiments over (eps, n) grids.

Seeds: the hidden path of replicate ``r`` at sample size index ``j`` uses
``mix_seed(base, STREAM_CHAIN, j, r)``; its flips at noise index ``i`` use
``mix_seed(base, STREAM_FLIP, i, j, r)``.  Changing the noise grid therefore
never changes the hidden paths.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__, seeding
from .bounds import Theorem2Params, theorem2_bound, theoretical_delta_window
from .chain import ChainLaw
from .estimator import compare_truncated, estimate_tree
from .noise import DeltaWindow, PerturbedLaw, exact_delta_window, perturb
from .tree import ContextTree, load_tree

MAX_REPLICATES = 10**5
MAX_N = 10**8

TSV_COLUMNS = ("eps", "n", "delta", "d", "K", "replicates", "errors", "freq", "bound", "admissible")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    tree: ContextTree
    eps: tuple[float, ...]
    n: tuple[int, ...]
    delta: float | str
    d: int
    K: int
    replicates: int
    seed: int

    def __post_init__(self):
        self.eps = tuple(float(e) for e in self.eps)
        self.n = tuple(int(n) for n in self.n)
        if not self.eps or not self.n:
            raise ConfigError("eps and n grids must be nonempty")
        if any(not 0.0 <= e <= 1.0 for e in self.eps):
            raise ConfigError("eps values must lie in [0, 1]")
        if not 1 <= self.replicates <= MAX_REPLICATES:
            raise ConfigError(f"replicates must lie in [1, {MAX_REPLICATES}]")
        if max(self.n) > MAX_N:
            raise ConfigError(f"n above {MAX_N:.0e}: split the run into shards")
        if not 1 <= self.d < min(self.n):
            raise ConfigError("need 1 <= d < min(n)")
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if self.delta != "auto":
            self.delta = float(self.delta)
            if self.delta <= 0:
                raise ConfigError("delta must be positive or 'auto'")


def parse_config(text: str, base_dir: str = ".") -> ExperimentConfig:
    """Read ``key=value`` lines: tree, eps, n, delta, d, K, replicates, seed."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        raw[k] = v
    required = ("tree", "eps", "n", "delta", "d", "K", "replicates", "seed")
    missing = [k for k in required if k not in raw]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    unknown = set(raw) - set(required)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    try:
        return ExperimentConfig(
            tree=load_tree(os.path.join(base_dir, raw["tree"])),
            eps=[float(x) for x in raw["eps"].split(",")],
            n=[int(float(x)) for x in raw["n"].split(",")],
            delta=raw["delta"] if raw["delta"] == "auto" else float(raw["delta"]),
            d=int(raw["d"]),
            K=int(raw["K"]),
            replicates=int(raw["replicates"]),
            seed=int(raw["seed"]),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read(), os.path.dirname(os.path.abspath(path)))


@dataclass
class RecoveryRow:
    eps: float
    n: int
    delta: float
    d: int
    K: int
    replicates: int
    errors: int | None
    bound_raw: float
    admissible: bool
    exact_window: DeltaWindow
    theoretical_window: DeltaWindow
    skipped: bool = False

    @property
    def freq(self) -> float:
        return math.nan if self.errors is None else self.errors / self.replicates

    @property
    def bound(self) -> float:
        return min(1.0, self.bound_raw)

    def tsv(self) -> str:
        if self.skipped:
            vals = (self.eps, self.n, "NA", self.d, self.K, self.replicates, "NA", "NA", "NA", "skipped")
        else:
            vals = (self.eps, self.n, f"{self.delta:.6g}", self.d, self.K, self.replicates,
                    self.errors, f"{self.freq:.6g}",
                    f"{self.bound_raw:.6g}" if self.admissible else "NA",
                    "yes" if self.admissible else "no")
        return "\t".join(str(v) for v in vals)


@dataclass
class RecoveryReport:
    config: ExperimentConfig
    rows: list[RecoveryRow] = field(default_factory=list)

    def to_tsv(self) -> str:
        cfg = self.config
        lines = [
            f"# noisyvlmc {__version__}; rng {seeding.GENERATOR_NAME}",
            f"# seed={cfg.seed} tree={cfg.tree.digest()} replicates={cfg.replicates}",
        ]
        for r in self.rows:
            lines.append(
                f"# eps={r.eps} n={r.n} exact_window=({r.exact_window.low:.6g}, {r.exact_window.high:.6g})"
                f" theoretical_window=({r.theoretical_window.low:.6g}, {r.theoretical_window.high:.6g})"
            )
        lines.append("\t".join(TSV_COLUMNS))
        lines.extend(r.tsv() for r in self.rows)
        return "\n".join(lines) + "\n"


def replicate_error(law: ChainLaw, eps: float, n: int, delta: float, d: int, K: int,
                    x_seed: int, flip_seed: int) -> bool:
    """One replicate: sample, flip, estimate, compare at level K."""
    z = perturb(law.sample(n, x_seed), eps, flip_seed)
    est = estimate_tree(z, delta, d)
    return not compare_truncated(est, law.tree, K).equal


def _count_errors(args) -> int:
    law, eps, n, delta, d, K, seeds = args
    return sum(replicate_error(law, eps, n, delta, d, K, xs, fs) for xs, fs in seeds)


def run_recovery(config: ExperimentConfig, workers: int = 1) -> RecoveryReport:
    law = ChainLaw(config.tree)
    report = RecoveryReport(config)
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for i, eps in enumerate(config.eps):
            plaw = PerturbedLaw(law, eps)
            exact = exact_delta_window(plaw, config.d)
            theo = theoretical_delta_window(law, eps, config.d)
            for j, n in enumerate(config.n):
                if config.delta == "auto":
                    if exact.empty:
                        report.rows.append(RecoveryRow(
                            eps, n, math.nan, config.d, config.K, config.replicates, None,
                            math.nan, False, exact, theo, skipped=True))
                        continue
                    delta = exact.midpoint
                else:
                    delta = config.delta
                seeds = [
                    (seeding.mix_seed(config.seed, seeding.STREAM_CHAIN, j, r),
                     seeding.mix_seed(config.seed, seeding.STREAM_FLIP, i, j, r))
                    for r in range(config.replicates)
                ]
                if pool is None:
                    errors = _count_errors((law, eps, n, delta, config.d, config.K, seeds))
                else:
                    chunks = [seeds[k::workers] for k in range(workers)]
                    errors = sum(pool.map(_count_errors, [
                        (law, eps, n, delta, config.d, config.K, c) for c in chunks]))
                params = Theorem2Params.from_tree(law, config.d, config.K, n, delta, eps)
                admissible = params.admissible
                bound = theorem2_bound(params) if admissible else math.nan
                report.rows.append(RecoveryRow(
                    eps, n, delta, config.d, config.K, config.replicates, errors,
                    bound, admissible, exact, theo))
    finally:
        if pool is not None:
            pool.shutdown()
    return report
