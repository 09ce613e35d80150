"""Acceptance suite: one test per release criterion, strict tolerances.

Each test prints a single [PASS] line on success (visible even under output
capture); a failing criterion shows up as an ordinary pytest failure.
"""

import json
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from wlingam.bootstrap import BootstrapConfig, run_bootstrap
from wlingam.cli import main as cli_main
from wlingam.discovery import fit_within_time
from wlingam.effects import (
    StackedSystem,
    build_stacked,
    guidance_effect_table,
    influence_vector,
    oracle_total_effect,
)
from wlingam.fixtures import demo_dir
from wlingam.mask import PKMask, build_default_mask, default_block_order
from wlingam.model import LongitudinalModel, fit
from wlingam.motif import extract_motif
from wlingam.simulator import EPS_SINGULAR, EffectBundle, SimQuery, Simulator, default_bounds
from wlingam.synth import canonical_spec, generate

import helpers_accept
from smallspec import small_spec
from test_motif import edge_matrix, model_from_b_sequence

WORKERS = min(8, os.cpu_count() or 1)


def parallel_map(task, items):
    if WORKERS == 1:
        return [task(item) for item in items]
    with ProcessPoolExecutor(max_workers=WORKERS) as pool:
        return list(pool.map(task, items))


def announce(capsys, line):
    with capsys.disabled():
        print(line, flush=True)


# ---------------------------------------------------------------------------
# structure recovery
# ---------------------------------------------------------------------------


def test_structure_recovery(capsys):
    t0 = time.time()
    results = parallel_map(helpers_accept.structure_recovery_task, range(100))
    elapsed = time.time() - t0
    ordering_hits = sum(ok for ok, _ in results)
    worst = max(err for _, err in results)
    assert ordering_hits >= 95, f"ordering recovered in only {ordering_hits}/100 seeds"
    assert worst <= 0.05, f"max coefficient-block error {worst:.4f} exceeds 0.05"
    assert elapsed <= 300.0, f"structure recovery took {elapsed:.0f}s"
    announce(
        capsys,
        f"[PASS] structure recovery: orderings {ordering_hits}/100, "
        f"max block error {worst:.4f}, {elapsed:.0f}s",
    )


# ---------------------------------------------------------------------------
# mask compliance fuzz
# ---------------------------------------------------------------------------


def random_within_submask(rng, p):
    mask = np.zeros((p, p), dtype=np.int8)
    perm = rng.permutation(p)
    rank = np.empty(p, dtype=int)
    rank[perm] = np.arange(p)
    for a in range(p):
        for b in range(p):
            if a == b:
                continue
            draw = rng.random()
            if draw < 0.35:
                mask[a, b] = 0
            elif draw < 0.9 or rank[b] >= rank[a]:
                mask[a, b] = -1
            else:
                mask[a, b] = 1
    return mask


def test_mask_compliance_fuzz(capsys):
    rng = np.random.Generator(np.random.Philox(key=[77, 0]))
    violations = 0

    # 400 rounds through the within-time discovery core
    for _ in range(400):
        p = int(rng.integers(2, 7))
        mask = random_within_submask(rng, p)
        X = rng.uniform(-1, 1, size=(160, p)) @ rng.normal(size=(p, p))
        _, B = fit_within_time(X, mask)
        violations += int(B[mask == 0].any())

    # 100 rounds through the full longitudinal fit with randomly zeroed masks
    spec = canonical_spec(n_subjects=320, seed=123)
    panel = generate(spec).panel
    schema = spec.schema
    base = build_default_mask(schema, default_block_order(schema, background=("Age", "Sex")))
    out_idx = schema.outcome_indices
    z_idx = schema.exogenous_indices
    v_idx = schema.intervention_index
    for _ in range(100):
        within = base.within.copy()
        cross = {k: m.copy() for k, m in base.cross.items()}
        for t in range(1, schema.n_times):
            for j in out_idx:
                for parent in (v_idx, *z_idx, *out_idx):
                    if parent != j and rng.random() < 0.25:
                        within[t, j, parent] = 0
                for parent in (*z_idx, *out_idx):
                    if rng.random() < 0.25:
                        cross[(t, 1)][j, parent] = 0
        trial = PKMask(schema=schema, within=within, cross=cross)
        model = fit(panel, trial)
        for t in range(1, schema.n_times):
            slot = t - 1
            wt, ct = trial.within_at(t), trial.cross_at(t, 1)
            for k, gk in enumerate(out_idx):
                if wt[gk, v_idx] == 0 and model.alpha[slot, k] != 0.0:
                    violations += 1
                for j, gj in enumerate(out_idx):
                    if wt[gk, gj] == 0 and model.b_within[slot, k, j] != 0.0:
                        violations += 1
                    if ct[gk, gj] == 0 and model.b_cross[slot, k, j] != 0.0:
                        violations += 1
                for j, gj in enumerate(z_idx):
                    if wt[gk, gj] == 0 and model.c_within[slot, k, j] != 0.0:
                        violations += 1
                    if ct[gk, gj] == 0 and model.c_cross[slot, k, j] != 0.0:
                        violations += 1
    assert violations == 0, f"{violations} structural-zero violations"
    announce(capsys, "[PASS] mask compliance fuzz: 500 random masks, 0 violations")


# ---------------------------------------------------------------------------
# effects oracle equivalence
# ---------------------------------------------------------------------------


def test_effects_oracle_equivalence(capsys):
    rng = np.random.Generator(np.random.Philox(key=[88, 0]))
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 13))
        perm = rng.permutation(n)
        A = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if perm[i] > perm[j] and rng.random() < 0.4:
                    A[i, j] = rng.uniform(-2.0, 2.0)
        sys_ = StackedSystem([(f"n{i}", 0) for i in range(n)], A)
        for s in range(n):
            col = influence_vector(sys_, s)
            for t in range(n):
                if t == s:
                    continue
                slow = oracle_total_effect(sys_, (f"n{s}", 0), (f"n{t}", 0))
                worst = max(worst, abs(col[t] - slow))
    assert worst <= 1e-10, f"worst oracle deviation {worst:.2e}"
    announce(capsys, f"[PASS] effects oracle equivalence: 1000 DAGs, worst dev {worst:.2e}")


# ---------------------------------------------------------------------------
# bootstrap coverage + scheduling determinism
# ---------------------------------------------------------------------------


def test_bootstrap_coverage_and_determinism(capsys):
    t0 = time.time()
    results = parallel_map(helpers_accept.coverage_task, range(200))
    hits = sum(h for h, _ in results)
    coverage = hits / 200.0
    assert 0.90 <= coverage <= 0.98, f"coverage {coverage:.3f} outside [0.90, 0.98]"

    # identical draws for 1 and 8 workers
    spec = small_spec(seed=777, n_subjects=helpers_accept.COVERAGE_N)
    panel = generate(spec).panel
    mask = build_default_mask(spec.schema)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        one = run_bootstrap(
            panel, mask, BootstrapConfig(n_replicates=40, seed=5, workers=1), [helpers_accept.COVERAGE_QUERY]
        )
        eight = run_bootstrap(
            panel, mask, BootstrapConfig(n_replicates=40, seed=5, workers=8), [helpers_accept.COVERAGE_QUERY]
        )
    assert np.array_equal(one.draws, eight.draws)
    elapsed = time.time() - t0
    assert elapsed <= 1800.0
    announce(
        capsys,
        f"[PASS] bootstrap coverage: {hits}/200 hits ({coverage:.1%}), "
        f"workers 1 == 8, {elapsed:.0f}s",
    )


# ---------------------------------------------------------------------------
# reference fixture exactness
# ---------------------------------------------------------------------------


def test_fixture_exactness(capsys):
    model = LongitudinalModel.load(demo_dir() + "/model.json")
    bundle = EffectBundle.load(demo_dir() + "/bundle.json")
    table = guidance_effect_table(build_stacked(model), 1, [0, 1, 2])
    bmi_row = table["outcomes"].index("BMI")
    assert table["values"][bmi_row, 0] == -0.129
    point, lo, hi, uncertain = bundle.cell("Health-guidance", "BMI", 0)
    assert (point, lo, hi, uncertain) == (-0.129, -0.165, -0.094, False)
    _, _, _, ldl_uncertain = bundle.cell("Health-guidance", "LDL", 0)
    assert ldl_uncertain is True

    with open(demo_dir() + "/bootstrap.json", encoding="utf-8") as fh:
        doc = json.load(fh)
    draws = np.fromfile(demo_dir() + "/draws.bin", dtype=doc["draws_file"]["dtype"]).reshape(
        doc["draws_file"]["shape"]
    )
    lo_q = np.quantile(draws[:, 0], 0.025, method="linear")
    hi_q = np.quantile(draws[:, 0], 0.975, method="linear")
    assert lo_q == -0.165 and hi_q == -0.094
    announce(capsys, "[PASS] fixture exactness: BMI lag-0 -0.129 [-0.165, -0.094], LDL flagged")


# ---------------------------------------------------------------------------
# guardrail soundness
# ---------------------------------------------------------------------------


def random_bundle(rng, model):
    schema = model.schema
    sources = tuple(v.name for i, v in enumerate(schema.variables) if i != schema.baseline_index)
    targets = tuple(schema.names[j] for j in schema.outcome_indices)
    shape = (len(sources), len(targets), 3)
    point = rng.uniform(-1.0, 1.0, shape)
    spread_lo = rng.uniform(0.01, 0.8, shape)
    spread_hi = rng.uniform(0.01, 0.8, shape)
    lo = point - spread_lo
    hi = point + spread_hi
    return EffectBundle(
        sources=sources,
        targets=targets,
        lags=(0, 1, 2),
        point=point,
        ci_low=lo,
        ci_high=hi,
        uncertain=(lo <= 0) & (0 <= hi),
        anchor_time=1,
        bounds=default_bounds(schema),
        model_hash=model.content_hash(),
    )


def test_guardrail_soundness(capsys):
    model = LongitudinalModel.load(demo_dir() + "/model.json")
    baseline = {
        "Health-guidance": 0,
        "BMI": 24.9,
        "SBP": 128.0,
        "DBP": 78.0,
        "HbA1c": 5.7,
        "LDL": 122.0,
        "Drug-HT": 0,
        "Drug-DM": 0,
        "Drug-LDL": 0,
        "Smoke": 0,
        "Exercise": 1,
        "Alcohol": 0,
        "Age": 55,
        "Sex": 1,
    }
    rng = np.random.Generator(np.random.Philox(key=[99, 0]))
    scanned = estimates = 0
    residual_checks = 0
    worst_residual = 0.0
    for b in range(12):
        sim = Simulator(random_bundle(rng, model), model)
        bundle = sim.bundle
        for s in bundle.sources:
            binary = sim._is_binary(s)
            for t in bundle.targets:
                for lag in bundle.lags:
                    _, _, _, uncertain = bundle.cell(s, t, lag)
                    value = 1.0 if binary else float(baseline[s]) + 0.5
                    answer = sim.forward_query(
                        SimQuery("forward", baseline, s, t, lag, forward_value=value)
                    )
                    scanned += 1
                    if uncertain:
                        assert answer.status != "Estimate"
                    else:
                        assert answer.status == "Estimate"
                        estimates += 1
        # goal-seek round trips on admissible continuous cells
        continuous = [
            s for s in bundle.sources if bundle.bounds.get(s, {}).get("kind") == "continuous"
        ]
        while residual_checks < (b + 1) * 90:
            s = continuous[rng.integers(len(continuous))]
            t = bundle.targets[rng.integers(len(bundle.targets))]
            lag = int(rng.integers(3))
            point, _, _, uncertain = bundle.cell(s, t, lag)
            if uncertain or abs(point) < EPS_SINGULAR:
                continue
            desired = float(baseline[t]) + float(rng.uniform(-1, 1))
            answer, residual = sim.round_trip(
                SimQuery("goal_seek", baseline, s, t, lag, desired_target=desired)
            )
            if answer.status != "Estimate":
                continue
            worst_residual = max(worst_residual, residual)
            residual_checks += 1
    assert residual_checks >= 1000
    assert worst_residual <= 1e-9, f"round-trip residual {worst_residual:.2e}"
    announce(
        capsys,
        f"[PASS] guardrail soundness: {scanned} cells scanned, {estimates} estimates, "
        f"{residual_checks} round trips, worst residual {worst_residual:.2e}",
    )


# ---------------------------------------------------------------------------
# motif rule
# ---------------------------------------------------------------------------


def test_motif_rule(capsys):
    # hand-computed: BMI->SBP persists, SBP/DBP flips, HbA1c->LDL appears once
    first = edge_matrix({(0, 1): 0.4, (1, 2): 0.25, (3, 4): 0.2})
    second = edge_matrix({(0, 1): 0.35, (2, 1): 0.3})
    third = edge_matrix({(0, 1): 0.45, (2, 1): 0.3})
    motif = extract_motif(model_from_b_sequence([first, second, third]), 0.01)
    assert motif.directed == (("BMI", "SBP"),)
    assert motif.undirected == (("SBP", "DBP"),)

    constant = edge_matrix({(0, 1): 0.4, (0, 2): 0.3, (4, 3): 0.2})
    motif_const = extract_motif(model_from_b_sequence([constant] * 3), 0.01)
    assert set(motif_const.directed) == {("BMI", "SBP"), ("BMI", "DBP"), ("LDL", "HbA1c")}
    assert motif_const.undirected == ()
    announce(capsys, "[PASS] motif rule: hand-computed motifs incl. flip case reproduced")


# ---------------------------------------------------------------------------
# pipeline determinism
# ---------------------------------------------------------------------------


def run_pipeline(out: Path):
    out.mkdir()
    steps = [
        ["synth", "--spec", "canonical", "--n", "400", "--seed", "7", "--out", str(out)],
        [
            "fit",
            "--panel",
            str(out / "panel.csv"),
            "--mask",
            str(out / "mask.json"),
            "--out",
            str(out / "model.json"),
        ],
        [
            "bootstrap",
            "--panel",
            str(out / "panel.csv"),
            "--mask",
            str(out / "mask.json"),
            "--b",
            "50",
            "--seed",
            "7",
            "--out",
            str(out / "bootstrap.json"),
            "--draws-out",
            str(out / "draws.bin"),
        ],
        [
            "effects",
            "--model",
            str(out / "model.json"),
            "--horizons",
            "0,1,2",
            "--out",
            str(out / "effects.csv"),
        ],
        [
            "motif",
            "--model",
            str(out / "model.json"),
            "--out",
            str(out / "motif.json"),
            "--dot",
            str(out / "motif.dot"),
        ],
    ]
    for step in steps:
        assert cli_main(step) == 0, f"pipeline step failed: {step[0]}"


def test_pipeline_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run_pipeline(a)
    run_pipeline(b)
    artifacts = [
        "panel.csv",
        "panel.meta.json",
        "mask.json",
        "truth.json",
        "model.json",
        "bootstrap.json",
        "draws.bin",
        "effects.csv",
        "motif.json",
        "motif.dot",
    ]
    for name in artifacts:
        assert (a / name).read_bytes() == (b / name).read_bytes(), f"{name} differs"
    # manifests match except the isolated timestamp field
    for manifest in sorted(a.glob("*.manifest.json")):
        left = json.loads(manifest.read_text())
        right = json.loads((b / manifest.name).read_text())
        left.pop("created_at")
        right.pop("created_at")
        left["artifact"] = right["artifact"] = ""
        left_inputs = {k: v["sha256"] for k, v in left.pop("inputs").items()}
        right_inputs = {k: v["sha256"] for k, v in right.pop("inputs").items()}
        assert left == right and left_inputs == right_inputs, manifest.name
    announce(capsys, "[PASS] pipeline determinism: byte-identical artifacts for seed 7")
