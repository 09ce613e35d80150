import numpy as np
import pytest

from wlingam.mask import build_default_mask, default_block_order
from wlingam.panel import Panel, PanelSchema, Role, Variable, default_screening_schema


@pytest.fixture(scope="session")
def screening_schema():
    return default_screening_schema()


@pytest.fixture(scope="session")
def screening_mask(screening_schema):
    blocks = default_block_order(screening_schema, background=("Age", "Sex"))
    return build_default_mask(screening_schema, blocks)


def tiny_schema(n_outcomes=2, n_inputs=1, n_times=3, with_baseline=False):
    variables = [Variable("treat", Role.INTERVENTION, binary=True)]
    variables += [Variable(f"y{k}", Role.OUTCOME) for k in range(n_outcomes)]
    variables += [Variable(f"u{j}", Role.EXOGENOUS) for j in range(n_inputs)]
    if with_baseline:
        variables.append(Variable("hist", Role.BASELINE_ONLY))
    return PanelSchema(tuple(variables), tuple(2020 + t for t in range(n_times)))


def panel_from_tensor(schema, data, dropped=0):
    n = data.shape[0]
    return Panel(
        schema=schema,
        data=data,
        subject_ids=tuple(f"s{i}" for i in range(n)),
        dropped_subjects=dropped,
    )


@pytest.fixture
def index_panel():
    """x[s, j, t] = s + j + t over a 3-subject, 4-variable, 4-time panel."""
    schema = PanelSchema(
        (
            Variable("treat", Role.INTERVENTION, binary=True),
            Variable("y0", Role.OUTCOME),
            Variable("y1", Role.OUTCOME),
            Variable("u0", Role.EXOGENOUS),
        ),
        (2020, 2021, 2022, 2023),
    )
    s, j, t = np.meshgrid(np.arange(3), np.arange(4), np.arange(4), indexing="ij")
    data = (s + j + t).astype(float)
    data[:, 0, :] = 0.0  # keep the binary intervention in domain
    return panel_from_tensor(schema, data)
