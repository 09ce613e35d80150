"""Regenerate the demo artifact directory.

The demo model is constructed (not fitted): its lag-0 intervention effects
equal the reference effect table exactly, lagged effects follow from
diagonal carry-over ratios, and the no-intervention trajectory holds a
typical screening profile fixed. Bootstrap draws are planted so that the
type-7 percentile bounds reproduce the reference intervals bit-exactly.

Run ``python -m wlingam.fixtures.build`` to rewrite the files in place.
"""

from __future__ import annotations

import os

import numpy as np

from ..bootstrap import BootstrapConfig, BootstrapSummary
from ..mask import build_default_mask, default_block_order
from ..model import LongitudinalModel
from ..motif import extract_motif
from ..panel import default_screening_schema
from ..simulator import EffectBundle, default_bounds
from . import demo_dir

OUTCOMES = ("BMI", "SBP", "DBP", "HbA1c", "LDL")

# reference guidance effect table: point and 95% bounds per (outcome, lag)
POINT = {
    0: (-0.129, -0.737, -0.185, -0.005, -0.258),
    1: (-0.067, -0.117, 0.305, -0.007, 0.086),
    2: (-0.031, 0.203, 0.531, 0.002, 0.348),
}
CI = {
    0: ((-0.165, -0.094), (-1.112, -0.358), (-0.450, 0.080), (-0.014, 0.005), (-0.928, 0.439)),
    1: ((-0.109, -0.029), (-0.543, 0.290), (0.011, 0.591), (-0.017, 0.005), (-0.683, 0.845)),
    2: ((-0.076, 0.014), (-0.250, 0.630), (0.207, 0.837), (-0.010, 0.015), (-0.472, 1.175)),
}

TYPICAL_PROFILE = np.array([24.9, 128.0, 78.0, 5.7, 122.0])

ANCHOR_TIME = 1
LAGS = (0, 1, 2)
N_DRAWS = 1000


def demo_model() -> LongitudinalModel:
    schema = default_screening_schema()
    mask = build_default_mask(schema, default_block_order(schema, background=("Age", "Sex")))
    p, q, T = 5, 8, schema.n_times
    reps = T - 1

    alpha = np.tile(np.array(POINT[0]), (reps, 1))
    b_cross = np.zeros((reps, p, p))
    b_cross[0] = np.eye(p)
    b_cross[1] = np.diag(np.array(POINT[1]) / np.array(POINT[0]))
    b_cross[2] = np.diag(np.array(POINT[2]) / np.array(POINT[1]))
    intercepts = np.zeros((reps, p))
    intercepts[1] = TYPICAL_PROFILE - b_cross[1] @ TYPICAL_PROFILE
    intercepts[2] = TYPICAL_PROFILE - b_cross[2] @ TYPICAL_PROFILE

    return LongitudinalModel(
        schema=schema,
        intercepts=intercepts,
        alpha=alpha,
        b_within=np.zeros((reps, p, p)),
        b_cross=b_cross,
        c_within=np.zeros((reps, p, q)),
        c_cross=np.zeros((reps, p, q)),
        delta=np.zeros(p),
        orderings=tuple(tuple(range(p)) for _ in range(reps)),
        residual_variance=np.full((reps, p), 0.01),
        outcome_scale=np.ones((reps, p)),
        schema_hash=schema.content_hash(),
        mask_hash=mask.content_hash(),
    )


def planted_draws(point: float, lo: float, hi: float, n: int = N_DRAWS) -> np.ndarray:
    """Sorted draws whose type-7 2.5%/97.5% quantiles equal lo/hi exactly."""
    width = max(hi - lo, 1e-6)
    lower_tail = np.linspace(lo - 0.4 * width, lo, 25)
    body = np.linspace(lo, hi, n - 50)
    upper_tail = np.linspace(hi, hi + 0.4 * width, 25)
    draws = np.concatenate([lower_tail, body, upper_tail])
    assert draws.shape == (n,)
    assert draws[24] == draws[25] == lo and draws[n - 26] == draws[n - 25] == hi
    return draws


def demo_summary(schema) -> BootstrapSummary:
    v_name = schema.names[schema.intervention_index]
    queries, point, lows, highs, draws = [], [], [], [], []
    for lag in LAGS:
        for oi, name in enumerate(OUTCOMES):
            queries.append(((v_name, ANCHOR_TIME), (name, ANCHOR_TIME + lag)))
            point.append(POINT[lag][oi])
            lo, hi = CI[lag][oi]
            lows.append(lo)
            highs.append(hi)
            draws.append(planted_draws(POINT[lag][oi], lo, hi))
    draws = np.column_stack(draws)
    lows = np.array(lows)
    highs = np.array(highs)
    import warnings as _w

    with _w.catch_warnings():
        _w.simplefilter("ignore")
        config = BootstrapConfig(n_replicates=N_DRAWS, seed=0, ci_level=0.95, workers=1)
    return BootstrapSummary(
        queries=tuple(queries),
        point=np.array(point),
        draws=draws,
        ci_low=lows,
        ci_high=highs,
        includes_zero=(lows <= 0.0) & (0.0 <= highs),
        excluded_replicates=0,
        config=config,
    )


def demo_bundle(model: LongitudinalModel) -> EffectBundle:
    """Planted guidance cells; other sources get illustrative +-15% bands."""
    from ..effects import build_stacked, influence_vector

    schema = model.schema
    names = schema.names
    sources = tuple(n for i, n in enumerate(names) if i != schema.baseline_index)
    shape = (len(sources), len(OUTCOMES), len(LAGS))
    point = np.zeros(shape)
    lo = np.zeros(shape)
    hi = np.zeros(shape)

    sys_ = build_stacked(model)
    v_name = names[schema.intervention_index]
    for si, s in enumerate(sources):
        col = influence_vector(sys_, sys_.node(s, ANCHOR_TIME))
        for ti, tname in enumerate(OUTCOMES):
            for li, lag in enumerate(LAGS):
                value = float(col[sys_.node(tname, ANCHOR_TIME + lag)])
                if s == v_name:
                    value = POINT[lag][ti]
                    lo[si, ti, li], hi[si, ti, li] = CI[lag][ti]
                else:
                    band = 0.15 * abs(value)
                    lo[si, ti, li], hi[si, ti, li] = value - band, value + band
                point[si, ti, li] = value
    return EffectBundle(
        sources=sources,
        targets=OUTCOMES,
        lags=LAGS,
        point=point,
        ci_low=lo,
        ci_high=hi,
        uncertain=(lo <= 0.0) & (0.0 <= hi),
        anchor_time=ANCHOR_TIME,
        bounds=default_bounds(schema),
        model_hash=model.content_hash(),
    )


def demo_motif_model() -> LongitudinalModel:
    """Hand-built coefficient sequence exercising every motif rule branch."""
    schema = default_screening_schema()
    mask = build_default_mask(schema)
    p, q, T = 5, 8, schema.n_times
    reps = T - 1
    b_within = np.zeros((reps, p, p))
    orderings = []
    # BMI(0) SBP(1) DBP(2) HbA1c(3) LDL(4)
    for slot in range(reps):
        B = np.zeros((p, p))
        B[1, 0] = 0.4          # BMI -> SBP every year
        B[3, 0] = 0.2          # BMI -> HbA1c every year
        B[4, 2] = 0.3          # DBP -> LDL every year
        if slot == 0:
            B[2, 1] = 0.25     # SBP -> DBP in the first fitted year
            order = (0, 1, 2, 3, 4)
        else:
            B[1, 2] = 0.25     # direction flips afterwards: DBP -> SBP
            order = (0, 2, 1, 3, 4)
        if slot == 1:
            B[4, 3] = 0.15     # HbA1c -> LDL in one year only: excluded
        b_within[slot] = B
        orderings.append(order)
    return LongitudinalModel(
        schema=schema,
        intercepts=np.zeros((reps, p)),
        alpha=np.zeros((reps, p)),
        b_within=b_within,
        b_cross=np.zeros((reps, p, p)),
        c_within=np.zeros((reps, p, q)),
        c_cross=np.zeros((reps, p, q)),
        delta=np.zeros(p),
        orderings=tuple(orderings),
        residual_variance=np.zeros((reps, p)),
        outcome_scale=np.ones((reps, p)),
        schema_hash=schema.content_hash(),
        mask_hash=mask.content_hash(),
    )


def build(out_dir=None) -> str:
    out_dir = out_dir or demo_dir()
    os.makedirs(out_dir, exist_ok=True)
    model = demo_model()
    model.save(os.path.join(out_dir, "model.json"))
    bundle = demo_bundle(model)
    bundle.save(os.path.join(out_dir, "bundle.json"))
    summary = demo_summary(model.schema)
    summary.save(
        os.path.join(out_dir, "bootstrap.json"),
        draws_path=os.path.join(out_dir, "draws.bin"),
    )
    motif = extract_motif(demo_motif_model(), edge_threshold=0.01)
    motif.save(os.path.join(out_dir, "motif.json"))
    return out_dir


if __name__ == "__main__":
    print(build())
