"""Lagged total effects through the fitted longitudinal system.

All modeled (variable, time) pairs become nodes of one stacked coefficient
matrix A with A[child, parent] the structural coefficient. Total effects are
sums over all directed paths of coefficient products, computed exactly by
forward substitution (A is nilpotent under the workflow order). A brute-force
path-enumeration oracle provides the independent cross-check.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ArtifactError, OutOfRange
from .model import LongitudinalModel
from .panel import PanelSchema


@dataclass(frozen=True)
class TotalEffect:
    source: tuple[str, int]
    target: tuple[str, int]
    value: float

    @property
    def lag(self) -> int:
        return self.target[1] - self.source[1]


class StackedSystem:
    """Immutable coefficient matrix over (variable, time) nodes."""

    def __init__(self, nodes, A, schema: PanelSchema | None = None):
        self.nodes = tuple((str(name), int(t)) for name, t in nodes)
        self.index = {node: i for i, node in enumerate(self.nodes)}
        if len(self.index) != len(self.nodes):
            raise ValueError("duplicate stacked nodes")
        A = np.array(A, dtype=float)
        if A.shape != (len(self.nodes),) * 2:
            raise ValueError(f"A shape {A.shape} != {(len(self.nodes),) * 2}")
        A.setflags(write=False)
        self.A = A
        self.schema = schema
        self.topo = self._topological_order()

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def _topological_order(self) -> tuple[int, ...]:
        n = self.n_nodes
        indeg = np.count_nonzero(self.A, axis=1)
        ready = sorted(np.flatnonzero(indeg == 0).tolist())
        order = []
        remaining = indeg.copy()
        while ready:
            u = ready.pop(0)
            order.append(u)
            for child in np.flatnonzero(self.A[:, u]):
                remaining[child] -= 1
                if remaining[child] == 0:
                    ready.append(int(child))
            ready.sort()
        if len(order) != n:
            raise ValueError("stacked system contains a cycle")
        return tuple(order)

    def node(self, name: str, t: int) -> int:
        key = (str(name), int(t))
        if key not in self.index:
            raise KeyError(f"no stacked node {key}")
        return self.index[key]


def build_stacked(model: LongitudinalModel, include_auxiliary: bool = False) -> StackedSystem:
    """Assemble the stacked system from the fitted coefficient blocks.

    Observed-input nodes have no parents unless ``include_auxiliary`` wires
    in the within-time intervention-to-input slopes stored on the model.
    """
    if include_auxiliary and model.aux_alpha is None:
        raise ArtifactError("model artifact carries no auxiliary input equations")
    schema = model.schema
    names = schema.names
    out_idx = schema.outcome_indices
    z_idx = schema.exogenous_indices
    v_name = names[schema.intervention_index]
    w_idx = schema.baseline_index

    nodes: list[tuple[str, int]] = []
    for j in out_idx:
        nodes.append((names[j], 0))
    for j in z_idx:
        nodes.append((names[j], 0))
    if w_idx is not None:
        nodes.append((names[w_idx], 0))
    for t in model.modeled_times:
        nodes.append((v_name, t))
        for j in z_idx:
            nodes.append((names[j], t))
        for j in out_idx:
            nodes.append((names[j], t))

    sys_ = np.zeros((len(nodes),) * 2)
    index = {node: i for i, node in enumerate(nodes)}
    for t in model.modeled_times:
        slot = t - 1
        for k, gk in enumerate(out_idx):
            child = index[(names[gk], t)]
            sys_[child, index[(v_name, t)]] = model.alpha[slot, k]
            for j, gj in enumerate(out_idx):
                sys_[child, index[(names[gj], t)]] += model.b_within[slot, k, j]
                sys_[child, index[(names[gj], t - 1)]] += model.b_cross[slot, k, j]
            for j, gj in enumerate(z_idx):
                sys_[child, index[(names[gj], t)]] += model.c_within[slot, k, j]
                sys_[child, index[(names[gj], t - 1)]] += model.c_cross[slot, k, j]
            if t == 1 and w_idx is not None:
                sys_[child, index[(names[w_idx], 0)]] = model.delta[k]
        if include_auxiliary:
            for j, gj in enumerate(z_idx):
                sys_[index[(names[gj], t)], index[(v_name, t)]] = model.aux_alpha[slot, j]
    return StackedSystem(nodes, sys_, schema=schema)


def influence_vector(sys: StackedSystem, source: int) -> np.ndarray:
    """Column ``source`` of (I - A)^-1 by forward substitution in topo order."""
    y = np.zeros(sys.n_nodes)
    y[source] = 1.0
    started = False
    for u in sys.topo:
        if u == source:
            started = True
            continue
        if started:
            row = sys.A[u]
            y[u] += row @ y
    return y


def total_effect(sys: StackedSystem, source: tuple[str, int], target: tuple[str, int]) -> TotalEffect:
    """Sum over all directed paths of coefficient products (0 when no path)."""
    s, g = sys.node(*source), sys.node(*target)
    if s == g:
        return TotalEffect(source=source, target=target, value=1.0)
    value = float(influence_vector(sys, s)[g])
    return TotalEffect(source=source, target=target, value=value)


def oracle_total_effect(sys: StackedSystem, source: tuple[str, int], target: tuple[str, int]) -> float:
    """Exhaustive DFS over all directed paths; guard: at most 16 nodes."""
    if sys.n_nodes > 16:
        raise ValueError(f"oracle limited to 16 nodes, got {sys.n_nodes}")
    s, g = sys.node(*source), sys.node(*target)
    if s == g:
        return 1.0
    children = [np.flatnonzero(sys.A[:, u]) for u in range(sys.n_nodes)]

    total = 0.0
    stack = [(s, 1.0)]
    while stack:
        u, product = stack.pop()
        for child in children[u]:
            contrib = product * sys.A[child, u]
            if child == g:
                total += contrib
            else:
                stack.append((int(child), contrib))
    return total


def neumann_total_matrix(sys: StackedSystem) -> np.ndarray:
    """Truncated Neumann series sum_{k=0..N} A^k; exact by nilpotency."""
    acc = np.eye(sys.n_nodes)
    term = np.eye(sys.n_nodes)
    for _ in range(sys.n_nodes):
        term = term @ sys.A
        if not term.any():
            break
        acc += term
    return acc


def guidance_effect_table(sys: StackedSystem, anchor_time: int, horizons) -> dict:
    """Total effects of the intervention at the anchor on each later outcome.

    Lag 0 is the anchor's own modeled time point (the first visit after the
    guidance interval under measurement-year indexing).
    """
    if sys.schema is None:
        raise ArtifactError("stacked system carries no schema; cannot anchor the table")
    schema = sys.schema
    v_name = schema.names[schema.intervention_index]
    outcome_names = [schema.names[j] for j in schema.outcome_indices]
    horizons = [int(h) for h in horizons]
    T = schema.n_times
    for lag in horizons:
        if lag < 0 or anchor_time + lag >= T:
            raise OutOfRange(f"horizon {lag} reaches beyond the panel (T={T})")
    source = (v_name, anchor_time)
    values = np.zeros((len(outcome_names), len(horizons)))
    col = influence_vector(sys, sys.node(*source))
    for li, lag in enumerate(horizons):
        for oi, name in enumerate(outcome_names):
            values[oi, li] = col[sys.node(name, anchor_time + lag)]
    return {
        "source": source,
        "outcomes": outcome_names,
        "horizons": horizons,
        "anchor_labels": [schema.time_labels[anchor_time + lag] for lag in horizons],
        "values": values,
    }


def default_guidance_queries(schema: PanelSchema, anchor_time: int, horizons) -> list:
    """(source, target) node pairs for the standard intervention-effect report."""
    v_name = schema.names[schema.intervention_index]
    queries = []
    for lag in horizons:
        t = anchor_time + lag
        if not 0 <= t < schema.n_times:
            raise OutOfRange(f"horizon {lag} reaches beyond the panel (T={schema.n_times})")
        for j in schema.outcome_indices:
            queries.append(((v_name, anchor_time), (schema.names[j], t)))
    return queries


def write_effects_csv(path, effects: list[TotalEffect]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "source_time", "target", "target_time", "lag", "estimate"])
        for e in effects:
            writer.writerow(
                [e.source[0], e.source[1], e.target[0], e.target[1], e.lag, repr(e.value)]
            )
