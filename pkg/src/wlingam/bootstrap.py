"""Subject-level bootstrap over the full constrained pipeline.

Each replicate resamples whole subject trajectories with replacement,
refits the masked longitudinal model, and recomputes the requested total
effects. Replicate b draws from its own counter-based RNG stream keyed by
(seed, b), so results are bit-identical for any worker count.
"""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .effects import build_stacked, influence_vector
from .errors import DegenerateBootstrap, MaskInfeasible, RankDeficient
from .mask import PKMask
from .model import fit
from .panel import Panel

_STREAM_SALT = 0x42535452  # Philox stream family for resampling


@dataclass(frozen=True)
class BootstrapConfig:
    n_replicates: int = 1000
    seed: int = 0
    ci_level: float = 0.95
    workers: int = 1

    def __post_init__(self):
        if self.n_replicates < 1:
            raise ValueError("need at least one replicate")
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError("ci_level must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if self.n_replicates < 200:
            warnings.warn(
                f"B={self.n_replicates} is small for {self.ci_level:.0%} percentile bounds",
                stacklevel=2,
            )


@dataclass(frozen=True)
class BootstrapSummary:
    queries: tuple  # ((source, target), ...) with node = (name, time)
    point: np.ndarray  # full-sample estimates, one per query
    draws: np.ndarray  # (kept replicates x queries)
    ci_low: np.ndarray
    ci_high: np.ndarray
    includes_zero: np.ndarray
    excluded_replicates: int
    config: BootstrapConfig

    def __post_init__(self):
        for name in ("point", "draws", "ci_low", "ci_high"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        inc = np.array(self.includes_zero, dtype=bool)
        inc.setflags(write=False)
        object.__setattr__(self, "includes_zero", inc)

    def to_dict(self) -> dict:
        return {
            "config": {
                "n_replicates": self.config.n_replicates,
                "seed": self.config.seed,
                "ci_level": self.config.ci_level,
            },
            "excluded_replicates": self.excluded_replicates,
            "queries": [
                {
                    "source": list(src),
                    "target": list(dst),
                    "lag": dst[1] - src[1],
                    "point": float(self.point[i]),
                    "ci_low": float(self.ci_low[i]),
                    "ci_high": float(self.ci_high[i]),
                    "includes_zero": bool(self.includes_zero[i]),
                }
                for i, (src, dst) in enumerate(self.queries)
            ],
        }

    def save(self, path, draws_path=None) -> None:
        doc = self.to_dict()
        if draws_path is not None:
            np.asarray(self.draws, dtype="<f8").tofile(draws_path)
            doc["draws_file"] = {
                "dtype": "<f8",
                "shape": list(self.draws.shape),
                "order": "C",
            }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _effects_for_queries(model, queries, include_auxiliary):
    sys_ = build_stacked(model, include_auxiliary=include_auxiliary)
    by_source: dict = {}
    values = np.zeros(len(queries))
    for i, (src, dst) in enumerate(queries):
        if src not in by_source:
            by_source[src] = influence_vector(sys_, sys_.node(*src))
        values[i] = by_source[src][sys_.node(*dst)]
    return values


_WORKER_STATE: dict = {}


def _init_worker(panel, mask, queries, seed, include_auxiliary):
    _WORKER_STATE.update(
        panel=panel, mask=mask, queries=queries, seed=seed, include_auxiliary=include_auxiliary
    )


def _one_replicate_from_state(b: int):
    return _one_replicate(
        b,
        _WORKER_STATE["panel"],
        _WORKER_STATE["mask"],
        _WORKER_STATE["queries"],
        _WORKER_STATE["seed"],
        _WORKER_STATE["include_auxiliary"],
    )


def _one_replicate(b, panel, mask, queries, seed, include_auxiliary):
    rng = np.random.Generator(np.random.Philox(key=[(seed + _STREAM_SALT) % 2**64, b]))
    idx = rng.integers(0, panel.n_subjects, panel.n_subjects)
    resampled = Panel(
        schema=panel.schema,
        data=panel.data[idx],
        subject_ids=tuple(f"r{i:06d}" for i in range(panel.n_subjects)),
        dropped_subjects=0,
    )
    try:
        model = fit(resampled, mask, include_auxiliary=include_auxiliary)
    except (RankDeficient, MaskInfeasible):
        return b, None
    return b, _effects_for_queries(model, queries, include_auxiliary)


def percentile_interval(draws: np.ndarray, ci_level: float) -> tuple[np.ndarray, np.ndarray]:
    """Equal-tail empirical quantiles with linear interpolation (type 7)."""
    tail = (1.0 - ci_level) / 2.0
    lo = np.quantile(draws, tail, axis=0, method="linear")
    hi = np.quantile(draws, 1.0 - tail, axis=0, method="linear")
    return lo, hi


def run_bootstrap(
    panel: Panel,
    mask: PKMask,
    config: BootstrapConfig,
    queries,
    include_auxiliary: bool = False,
) -> BootstrapSummary:
    """Resample subjects, refit, and summarize the requested total effects."""
    queries = tuple((tuple(src), tuple(dst)) for src, dst in queries)
    if not queries:
        raise ValueError("need at least one effect query")

    full_model = fit(panel, mask, include_auxiliary=include_auxiliary)
    point = _effects_for_queries(full_model, queries, include_auxiliary)

    B = config.n_replicates
    results: list = [None] * B
    if config.workers == 1:
        for b in range(B):
            _, row = _one_replicate(b, panel, mask, queries, config.seed, include_auxiliary)
            results[b] = row
    else:
        with ProcessPoolExecutor(
            max_workers=config.workers,
            initializer=_init_worker,
            initargs=(panel, mask, queries, config.seed, include_auxiliary),
        ) as pool:
            chunk = max(1, B // (config.workers * 8))
            for b, row in pool.map(_one_replicate_from_state, range(B), chunksize=chunk):
                results[b] = row

    kept = [row for row in results if row is not None]
    excluded = B - len(kept)
    if not kept:
        raise DegenerateBootstrap("every bootstrap replicate failed to refit")
    draws = np.vstack(kept)
    ci_low, ci_high = percentile_interval(draws, config.ci_level)
    includes_zero = (ci_low <= 0.0) & (0.0 <= ci_high)
    return BootstrapSummary(
        queries=queries,
        point=point,
        draws=draws,
        ci_low=ci_low,
        ci_high=ci_high,
        includes_zero=includes_zero,
        excluded_replicates=excluded,
        config=config,
    )


def histogram_export(summary: BootstrapSummary, bins: int = 30) -> list[dict]:
    """Equal-width histogram series plus interval and zero markers per query."""
    if bins < 1:
        raise ValueError("need at least one bin")
    out = []
    for i, (src, dst) in enumerate(summary.queries):
        col = summary.draws[:, i]
        lo, hi = float(col.min()), float(col.max())
        if lo == hi:
            counts, edges = np.histogram(col, bins=1)
        else:
            counts, edges = np.histogram(col, bins=bins, range=(lo, hi))
        out.append(
            {
                "source": list(src),
                "target": list(dst),
                "lag": dst[1] - src[1],
                "edges": edges.tolist(),
                "counts": counts.tolist(),
                "point": float(summary.point[i]),
                "ci_low": float(summary.ci_low[i]),
                "ci_high": float(summary.ci_high[i]),
                "zero": 0.0,
            }
        )
    return out
