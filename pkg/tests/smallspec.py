"""Small 3-outcome generator shared by the bootstrap and acceptance tests."""

import numpy as np

from wlingam.mask import build_default_mask
from wlingam.model import LongitudinalModel
from wlingam.panel import PanelSchema, Role, Variable
from wlingam.synth import BinaryMarkov, DriftWalk, ExogenousLaw, GeneratorSpec, NoiseSpec


def small_schema() -> PanelSchema:
    return PanelSchema(
        (
            Variable("guidance", Role.INTERVENTION, binary=True),
            Variable("m1", Role.OUTCOME),
            Variable("m2", Role.OUTCOME),
            Variable("m3", Role.OUTCOME),
            Variable("habit", Role.EXOGENOUS, binary=True),
            Variable("level", Role.EXOGENOUS),
        ),
        (2020, 2021, 2022),
    )


def small_true_model(schema: PanelSchema) -> LongitudinalModel:
    p, reps = 3, schema.n_times - 1
    bw = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.3, -0.4, 0.0]])
    bc = np.array([[0.5, 0.0, 0.0], [0.1, 0.5, 0.0], [0.0, 0.1, 0.5]])
    alpha = np.array([-0.5, -0.7, -0.4])
    cw = np.array([[0.3, 0.2], [-0.25, 0.2], [0.3, 0.2]])
    cc = np.array([[0.1, 0.1], [0.12, 0.1], [-0.1, 0.1]])
    mask = build_default_mask(schema)
    return LongitudinalModel(
        schema=schema,
        intercepts=np.tile([0.4, -0.2, 0.3], (reps, 1)),
        alpha=np.tile(alpha, (reps, 1)),
        b_within=np.tile(bw, (reps, 1, 1)),
        b_cross=np.tile(bc, (reps, 1, 1)),
        c_within=np.tile(cw, (reps, 1, 1)),
        c_cross=np.tile(cc, (reps, 1, 1)),
        delta=np.zeros(p),
        orderings=tuple(tuple(range(p)) for _ in range(reps)),
        residual_variance=np.zeros((reps, p)),
        outcome_scale=np.ones((reps, p)),
        schema_hash=schema.content_hash(),
        mask_hash=mask.content_hash(),
    )


def small_spec(seed: int, n_subjects: int = 400, noise_scale: float = 0.5) -> GeneratorSpec:
    schema = small_schema()
    return GeneratorSpec(
        schema=schema,
        true_model=small_true_model(schema),
        noise=tuple(NoiseSpec("uniform", noise_scale) for _ in range(3)),
        law=ExogenousLaw(
            input_laws=(BinaryMarkov(0.4), DriftWalk(-2.0, 2.0, jitter=1.0)), v_rate=0.5
        ),
        n_subjects=n_subjects,
        seed=seed,
    )
