"""Workflow-derived constraint masks over directed edges.

Convention (fixed): entry ``(i, j)`` constrains the edge ``j -> i``
(row = child, column = parent). Within-time entries take values in
{-1, 0, 1} = unknown / forbidden / required-allowed; cross-time entries
are binary {0, 1} and only lag 1 may carry 1s.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import MaskError, SchemaError
from .panel import PanelSchema

CONVENTION = "row=child,col=parent"


@dataclass(frozen=True)
class BlockOrder:
    """Ordered partition of variable indices governing within-time direction."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))

    def validate(self, schema: PanelSchema) -> None:
        seen = [i for block in self.blocks for i in block]
        if sorted(seen) != list(range(schema.n_variables)):
            raise SchemaError("blocks must partition the variable indices exactly")
        v = schema.intervention_index
        if v not in self.blocks[0]:
            raise SchemaError("intervention variable must sit in the first block")
        outcome_set = set(schema.outcome_indices)
        for block in self.blocks:
            bs = set(block)
            if bs & outcome_set and bs != outcome_set:
                raise SchemaError("outcome variables must form a block of their own")

    def block_of(self, var_index: int) -> int:
        for k, block in enumerate(self.blocks):
            if var_index in block:
                return k
        raise SchemaError(f"variable index {var_index} not covered by blocks")


def default_block_order(schema: PanelSchema, background: tuple[str, ...] = ()) -> BlockOrder:
    """Intervention and background first, questionnaire indicators next, outcomes last."""
    bg = {schema.index_of(name) for name in background}
    v = schema.intervention_index
    w = schema.baseline_index
    first = [v] + sorted(bg) + ([w] if w is not None and w not in bg else [])
    middle = [i for i in schema.exogenous_indices if i not in bg]
    return BlockOrder((tuple(first), tuple(middle), tuple(schema.outcome_indices)))


@dataclass(frozen=True)
class PKMask:
    """Time- and lag-indexed edge constraints for one panel schema.

    ``within[t]`` is the (n x n) within-time matrix at time point t
    (t = 0 carries no within-time structure and is all zero).
    ``cross[(t, lag)]`` is the binary (n x n) matrix for edges from
    t - lag to t; present for 1 <= lag <= t.
    """

    schema: PanelSchema
    within: np.ndarray            # (T, n, n) int8
    cross: dict = field(default_factory=dict)  # (t, lag) -> (n, n) uint8

    def __post_init__(self):
        within = np.array(self.within, dtype=np.int8)
        n, T = self.schema.n_variables, self.schema.n_times
        if within.shape != (T, n, n):
            raise MaskError(f"within mask shape {within.shape} != {(T, n, n)}")
        within.setflags(write=False)
        cross = {}
        for (t, lag), mat in self.cross.items():
            mat = np.array(mat, dtype=np.uint8)
            if mat.shape != (n, n):
                raise MaskError(f"cross mask ({t},{lag}) shape {mat.shape} != {(n, n)}")
            if not (1 <= lag <= t < T):
                raise MaskError(f"cross mask key ({t},{lag}) out of range")
            mat.setflags(write=False)
            cross[(t, lag)] = mat
        object.__setattr__(self, "within", within)
        object.__setattr__(self, "cross", cross)

    def within_at(self, t: int) -> np.ndarray:
        return self.within[t]

    def cross_at(self, t: int, lag: int = 1) -> np.ndarray:
        key = (t, lag)
        if key not in self.cross:
            return np.zeros((self.schema.n_variables,) * 2, dtype=np.uint8)
        return self.cross[key]

    def outcome_submask(self, t: int) -> np.ndarray:
        idx = self.schema.outcome_indices
        return self.within[t][np.ix_(idx, idx)]

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {
            "convention": CONVENTION,
            "T": self.schema.n_times,
            "variables": list(self.schema.names),
            "schema": self.schema.to_dict(),
            "within": [self.within[t].tolist() for t in range(self.schema.n_times)],
            "cross": {
                str(t): {str(lag): self.cross_at(t, lag).tolist() for lag in range(1, t + 1)}
                for t in range(1, self.schema.n_times)
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PKMask":
        if d.get("convention") != CONVENTION:
            raise MaskError(f"unsupported mask convention {d.get('convention')!r}")
        schema = PanelSchema.from_dict(d["schema"])
        within = np.array(d["within"], dtype=np.int8)
        cross = {
            (int(t), int(lag)): np.array(mat, dtype=np.uint8)
            for t, lags in d["cross"].items()
            for lag, mat in lags.items()
        }
        return cls(schema=schema, within=within, cross=cross)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "PKMask":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def build_default_mask(schema: PanelSchema, blocks: BlockOrder | None = None) -> PKMask:
    """Encode the recording-workflow constraints for an annual panel.

    Within time: no parents of the intervention, no edges between the
    questionnaire indicators in the middle block, outcome-to-outcome
    directions left unknown, earlier blocks required-allowed as parents
    of later blocks. Cross time: one-year lag only, no direct
    intervention(t-1) -> outcome(t) shortcut (the within-time edge already
    spans that exposure interval), baseline covariate parents only at the
    first modeled time point.
    """
    if blocks is None:
        blocks = default_block_order(schema)
    blocks.validate(schema)

    n, T = schema.n_variables, schema.n_times
    v = schema.intervention_index
    w = schema.baseline_index
    outcomes = set(schema.outcome_indices)

    within = np.zeros((T, n, n), dtype=np.int8)
    for t in range(1, T):
        for i in range(n):
            for j in range(n):
                if i == j or i == v or w in (i, j):
                    continue
                bi, bj = blocks.block_of(i), blocks.block_of(j)
                if bj < bi:
                    within[t, i, j] = 1
                elif bj == bi and i in outcomes and j in outcomes:
                    within[t, i, j] = -1

    cross = {}
    for t in range(1, T):
        for lag in range(1, t + 1):
            mat = np.zeros((n, n), dtype=np.uint8)
            if lag == 1:
                for i in range(n):
                    if i == w:
                        continue
                    for j in range(n):
                        if j == w:
                            mat[i, j] = 1 if t == 1 else 0
                        elif j == v and i in outcomes:
                            mat[i, j] = 0
                        else:
                            mat[i, j] = 1
            cross[(t, lag)] = mat
    return PKMask(schema=schema, within=within, cross=cross)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


def _required_edges_cyclic(within_t: np.ndarray) -> bool:
    """DFS cycle check on the graph of required (value 1) edges."""
    n = within_t.shape[0]
    children = [np.flatnonzero(within_t[:, j] == 1) for j in range(n)]
    state = [0] * n  # 0 unvisited, 1 in stack, 2 done

    def visit(u: int) -> bool:
        state[u] = 1
        for child in children[u]:
            if state[child] == 1:
                return True
            if state[child] == 0 and visit(child):
                return True
        state[u] = 2
        return False

    return any(state[u] == 0 and visit(u) for u in range(n))


def validate_mask(mask: PKMask, schema: PanelSchema) -> ValidationReport:
    """Check a mask against the admissibility rules; empty report iff admissible."""
    if mask.schema.n_variables != schema.n_variables or mask.schema.n_times != schema.n_times:
        raise MaskError("mask dimensions do not match schema")
    v = schema.intervention_index
    w = schema.baseline_index
    T = schema.n_times
    out: list[Violation] = []

    if np.any(mask.within[0] != 0):
        out.append(Violation("WithinAtInitialTime", "time point 0 has no within-time structure"))
    for t in range(1, T):
        wt = mask.within[t]
        if not np.isin(wt, (-1, 0, 1)).all():
            out.append(Violation("BadValue", f"within[{t}] has entries outside {{-1,0,1}}"))
        if np.any(np.diag(wt) != 0):
            out.append(Violation("SelfLoop", f"within[{t}] has nonzero diagonal entries"))
        if np.any(wt[v, :] != 0):
            out.append(
                Violation(
                    "NoInstantaneousParentsOfIntervention",
                    f"within[{t}] permits a parent of the intervention variable",
                )
            )
        if w is not None and (np.any(wt[w, :] != 0) or np.any(wt[:, w] != 0)):
            out.append(
                Violation("BaselineNotIsolated", f"within[{t}] links the baseline-only variable")
            )
        if _required_edges_cyclic(wt):
            out.append(Violation("RequiredEdgesCyclic", f"within[{t}] required edges form a cycle"))

    for (t, lag), mat in sorted(mask.cross.items()):
        if not np.isin(mat, (0, 1)).all():
            out.append(Violation("BadValue", f"cross[{t},{lag}] has entries outside {{0,1}}"))
        if lag >= 2 and np.any(mat != 0):
            out.append(
                Violation("CrossLagBeyondOne", f"cross[{t},{lag}] permits a lag-{lag} edge")
            )
        if w is not None:
            if np.any(mat[w, :] != 0):
                out.append(
                    Violation("EdgeIntoBaseline", f"cross[{t},{lag}] permits a parent of baseline")
                )
            if t > lag and np.any(mat[:, w] != 0):
                out.append(
                    Violation(
                        "BaselineNotIsolated",
                        f"cross[{t},{lag}] uses baseline as a parent beyond the first step",
                    )
                )
    return ValidationReport(tuple(out))


def admissible_edge_count(mask: PKMask) -> tuple[int, int, int]:
    """(within unknown, within required, cross allowed) summed over time points."""
    within_unknown = int(np.sum(mask.within == -1))
    within_required = int(np.sum(mask.within == 1))
    cross_allowed = int(sum(int(m.sum()) for m in mask.cross.values()))
    return within_unknown, within_required, cross_allowed
