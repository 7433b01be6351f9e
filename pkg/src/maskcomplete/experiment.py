"""Monte-Carlo success-rate experiments over random masks.

For every measurement count and trial, a mask is drawn uniformly among
all subsets of that size, a random rank-r matrix is drawn, and each
enabled method is scored on the same pair:

* "connectivity": the graph survives removal of any r-1 edges.
* "min_degree":   every row and column has at least r observations.
* "jacobian":     the fiber-dimension test reports finitely many completions.
* "closure":      the block-completion solver reconstructs the matrix
                  (heuristic block search, exhaustive fallback on small
                  grids); success means it terminated with a full matrix.
* "nuclear":      ADMM nuclear-norm minimization recovers the truth.
* "rank_fit":     alternating-least-squares rank-r fit (a simple proxy
                  for Grassmann-descent solvers of the same program)
                  recovers the truth.

The numerical methods count as successful when the recovered matrix is
within the configured relative Frobenius threshold of the truth.  All
per-trial seeds derive from sha256(master seed, role, count, trial), so a
rerun with the same config is bit-identical regardless of worker count.
"""

from __future__ import annotations

import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .baselines import SolverConfig, nuclear_norm_complete, rank_r_fit, success
from .completion import CompleteOptions, complete
from .fiber import fiber_dimension_test
from .graphs import edge_count_bound, is_r_connected, min_degree_condition
from .linalg import random_rank_r
from .masks import apply_mask, derive_seed, random_mask

__all__ = [
    "ALL_METHODS",
    "PRESETS",
    "ExperimentConfig",
    "TrialOutcome",
    "ExperimentResult",
    "run_experiment",
    "emit_csv",
    "to_csv_text",
    "parse_experiment_csv",
    "preset",
]

logger = logging.getLogger(__name__)

ALL_METHODS = ("connectivity", "min_degree", "jacobian", "closure", "nuclear", "rank_fit")


@dataclass(frozen=True)
class ExperimentConfig:
    m: int
    n: int
    r: int
    measurement_counts: tuple[int, ...]
    trials_per_count: int = 100
    methods: tuple[str, ...] = ("connectivity", "closure", "rank_fit", "nuclear")
    seed: int = 0
    success_threshold: float = 1e-4
    fiber_tol: float = 1e-9
    # Heuristic closure falls back to the exhaustive search when m+n is at
    # most this, removing heuristic false negatives at small scale.
    exhaustive_fallback_limit: int = 30
    nuclear: SolverConfig = SolverConfig(max_iters=1000)
    rank_fit: SolverConfig = SolverConfig(max_iters=300, restarts=3)

    def __post_init__(self) -> None:
        if not 1 <= self.r <= min(self.m, self.n):
            raise ValueError(f"rank {self.r} outside [1, min({self.m}, {self.n})]")
        counts = tuple(int(a) for a in self.measurement_counts)
        if list(counts) != sorted(counts):
            raise ValueError("measurement_counts must be sorted ascending")
        if counts and not (0 <= counts[0] and counts[-1] <= self.m * self.n):
            raise ValueError("measurement_counts outside [0, m*n]")
        object.__setattr__(self, "measurement_counts", counts)
        if self.trials_per_count < 1:
            raise ValueError("trials_per_count must be at least 1")
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        if self.success_threshold <= 0:
            raise ValueError("success_threshold must be positive")

    @property
    def bound_i(self) -> int:
        return edge_count_bound(self.m, self.n, self.r)

    @property
    def full_identifiability(self) -> int:
        """Entry count from which every mask defines a unique completion."""
        return self.m * (self.n - 1) + self.r


@dataclass(frozen=True)
class TrialOutcome:
    alpha: int
    trial: int
    outcomes: dict[str, bool]
    seconds: dict[str, float]
    # For the closure method only: did the completed matrix match the
    # truth at the success threshold (None when closure failed), and did
    # the exhaustive fallback rescue a heuristic miss.
    closure_completion_ok: Optional[bool]
    closure_fallback: bool
    errors: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    trials: tuple[TrialOutcome, ...]
    method_seconds: dict[str, float] = field(default_factory=dict)

    def successes(self, alpha: int, method: str) -> int:
        return sum(
            1
            for t in self.trials
            if t.alpha == alpha and t.outcomes.get(method, False)
        )

    def rate(self, alpha: int, method: str) -> float:
        return self.successes(alpha, method) / self.config.trials_per_count

    def to_json_dict(self, include_timing: bool = False) -> dict:
        cfg = self.config
        curves = []
        for alpha in cfg.measurement_counts:
            for method in cfg.methods:
                s = self.successes(alpha, method)
                curves.append(
                    {
                        "alpha": alpha,
                        "method": method,
                        "successes": s,
                        "trials": cfg.trials_per_count,
                        "rate": s / cfg.trials_per_count,
                        "seconds": self.method_seconds.get(method, 0.0)
                        if include_timing
                        else 0.0,
                    }
                )
        return {
            "config": {
                "m": cfg.m,
                "n": cfg.n,
                "r": cfg.r,
                "measurement_counts": list(cfg.measurement_counts),
                "trials_per_count": cfg.trials_per_count,
                "methods": list(cfg.methods),
                "seed": cfg.seed,
                "success_threshold": cfg.success_threshold,
            },
            "bound_i": cfg.bound_i,
            "full_id": cfg.full_identifiability,
            "curves": curves,
        }


def _evaluate_trial(config: ExperimentConfig, alpha: int, trial: int) -> TrialOutcome:
    mask = random_mask(config.m, config.n, alpha, derive_seed(config.seed, "mask", alpha, trial))
    truth = random_rank_r(config.m, config.n, config.r, derive_seed(config.seed, "matrix", alpha, trial))
    masked = apply_mask(truth, mask)
    outcomes: dict[str, bool] = {}
    seconds: dict[str, float] = {}
    errors: list[str] = []
    completion_ok: Optional[bool] = None
    fallback = False

    for method in config.methods:
        start = time.perf_counter()
        ok = False
        try:
            if method == "connectivity":
                ok = is_r_connected(mask, config.r)[0]
            elif method == "min_degree":
                ok = min_degree_condition(mask, config.r)[0]
            elif method == "jacobian":
                report = fiber_dimension_test(
                    mask,
                    config.r,
                    seed=derive_seed(config.seed, "jacobian", alpha, trial),
                    tol=config.fiber_tol,
                )
                ok = report.generically_finite
            elif method == "closure":
                opts = CompleteOptions(
                    strategy="heuristic",
                    seed=derive_seed(config.seed, "closure", alpha, trial),
                )
                res = complete(masked, config.r, opts)
                if res is None and config.m + config.n <= config.exhaustive_fallback_limit:
                    res = complete(
                        masked,
                        config.r,
                        CompleteOptions(strategy="exhaustive", seed=opts.seed),
                    )
                    fallback = res is not None
                ok = res is not None
                if res is not None:
                    completion_ok = success(res.matrix, truth, config.success_threshold)
            elif method == "nuclear":
                cfg = config.nuclear.replace(seed=derive_seed(config.seed, "nuclear", alpha, trial))
                out = nuclear_norm_complete(masked, cfg)
                ok = success(out.matrix, truth, config.success_threshold)
            elif method == "rank_fit":
                cfg = config.rank_fit.replace(seed=derive_seed(config.seed, "rank_fit", alpha, trial))
                out = rank_r_fit(masked, config.r, cfg)
                ok = success(out.matrix, truth, config.success_threshold)
            else:  # pragma: no cover - rejected by config validation
                raise ValueError(f"unknown method {method}")
        except Exception as exc:  # a failing trial counts as non-success
            errors.append(f"{method}@{alpha}/{trial}: {exc}")
            ok = False
        outcomes[method] = ok
        seconds[method] = time.perf_counter() - start

    if errors:
        logger.warning("trial errors: %s", "; ".join(errors))
    return TrialOutcome(alpha, trial, outcomes, seconds, completion_ok, fallback, tuple(errors))


def _evaluate_star(args: tuple[ExperimentConfig, int, int]) -> TrialOutcome:
    return _evaluate_trial(*args)


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Evaluate every enabled method on every (count, trial) pair.

    Deterministic for a fixed config: per-trial seeds ignore scheduling,
    and aggregation follows (count, trial) order, so any worker count
    yields the same result.
    """
    units = [
        (config, alpha, trial)
        for alpha in config.measurement_counts
        for trial in range(config.trials_per_count)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(_evaluate_star, units, chunksize=4))
    else:
        trials = [_evaluate_trial(*u) for u in units]
    method_seconds = {
        method: sum(t.seconds.get(method, 0.0) for t in trials)
        for method in config.methods
    }
    return ExperimentResult(config, tuple(trials), method_seconds)


def to_csv_text(result: ExperimentResult, include_timing: bool = False) -> str:
    """CSV form of the success-rate curves.

    Timing is zeroed unless requested so that reruns of the same config
    are byte-identical.
    """
    cfg = result.config
    out = io.StringIO()
    out.write(f"# bound_i={cfg.bound_i}, full_id={cfg.full_identifiability}\n")
    out.write("alpha,method,successes,trials,rate,seconds\n")
    for alpha in cfg.measurement_counts:
        for method in cfg.methods:
            s = result.successes(alpha, method)
            rate = repr(s / cfg.trials_per_count)
            secs = (
                f"{result.method_seconds.get(method, 0.0):.3f}"
                if include_timing
                else "0.000"
            )
            out.write(f"{alpha},{method},{s},{cfg.trials_per_count},{rate},{secs}\n")
    return out.getvalue()


def emit_csv(result: ExperimentResult, path: str, include_timing: bool = False) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(to_csv_text(result, include_timing))


def parse_experiment_csv(text: str) -> tuple[dict[str, int], list[dict]]:
    """Read back an emitted CSV: (reference lines, data rows)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    refs: dict[str, int] = {}
    if lines and lines[0].startswith("#"):
        for part in lines[0].lstrip("#").split(","):
            key, _, value = part.strip().partition("=")
            refs[key] = int(value)
        lines = lines[1:]
    if not lines or lines[0] != "alpha,method,successes,trials,rate,seconds":
        raise ValueError("missing experiment CSV header")
    rows = []
    for ln in lines[1:]:
        alpha, method, s, t, rate, secs = ln.split(",")
        rows.append(
            {
                "alpha": int(alpha),
                "method": method,
                "successes": int(s),
                "trials": int(t),
                "rate": float(rate),
                "seconds": float(secs),
            }
        )
    return refs, rows


# Shipped measurement grids: even spacing spanning the two reference
# entry counts (the identifiability lower bound and the count from which
# every mask is identifiable).  The 10x15 grid additionally samples the
# right reference count itself.
PRESETS: dict[str, ExperimentConfig] = {
    "fig1a": ExperimentConfig(
        m=10,
        n=15,
        r=3,
        measurement_counts=(60, 70, 80, 90, 100, 110, 120, 130, 140, 143, 150),
    ),
    "fig1b": ExperimentConfig(
        m=40,
        n=50,
        r=3,
        measurement_counts=tuple(range(260, 1971, 190)),
    ),
    "fig1c": ExperimentConfig(
        m=40,
        n=50,
        r=10,
        measurement_counts=(800, 930, 1060, 1190, 1320, 1450, 1580, 1710, 1840, 1970),
    ),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    """Shipped config by name, optionally with fields overridden."""
    import dataclasses

    try:
        base = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r} (have {sorted(PRESETS)})") from None
    return dataclasses.replace(base, **overrides) if overrides else base
