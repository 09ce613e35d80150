"""Panel data model: variable roles, schema, dense tensor, and long-CSV ingestion.

The analytic unit is a complete subject trajectory: a dense tensor of shape
(subjects x variables x time points). Subjects with any missing cell are
dropped at ingestion and counted, never imputed.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import BinaryDomainViolation, IngestionError, OutOfRange, SchemaError


class Role(enum.Enum):
    """What a recorded variable contributes to the structural model."""

    INTERVENTION = "intervention"
    OUTCOME = "outcome"
    EXOGENOUS = "exogenous"
    BASELINE_ONLY = "baseline_only"

    @property
    def short(self) -> str:
        return {"intervention": "v", "outcome": "x", "exogenous": "z", "baseline_only": "w"}[self.value]


@dataclass(frozen=True)
class Variable:
    name: str
    role: Role
    binary: bool = False

    def __post_init__(self):
        if self.role is Role.INTERVENTION and not self.binary:
            object.__setattr__(self, "binary", True)
        if self.role is Role.OUTCOME and self.binary:
            raise SchemaError(f"outcome variable {self.name!r} must be continuous")


@dataclass(frozen=True)
class PanelSchema:
    """Ordered variable list plus the shared time axis.

    The variable order is the canonical index space for every tensor and
    constraint mask downstream; it is never reordered after construction.
    """

    variables: tuple[Variable, ...]
    time_labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "time_labels", tuple(int(y) for y in self.time_labels))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise SchemaError("variable names must be unique")
        if len(self.time_labels) < 2:
            raise SchemaError("need at least two time points")
        if any(b >= a for a, b in zip(self.time_labels[1:], self.time_labels)):
            raise SchemaError("time labels must be strictly increasing")
        n_interv = sum(v.role is Role.INTERVENTION for v in self.variables)
        if n_interv != 1:
            raise SchemaError(f"exactly one intervention variable required, found {n_interv}")
        if sum(v.role is Role.BASELINE_ONLY for v in self.variables) > 1:
            raise SchemaError("at most one baseline-only variable supported")

    # -- index helpers ---------------------------------------------------

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_times(self) -> int:
        return len(self.time_labels)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"unknown variable {name!r}") from None

    def indices_with_role(self, role: Role) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.role is role]

    @property
    def intervention_index(self) -> int:
        return self.indices_with_role(Role.INTERVENTION)[0]

    @property
    def outcome_indices(self) -> list[int]:
        return self.indices_with_role(Role.OUTCOME)

    @property
    def exogenous_indices(self) -> list[int]:
        return self.indices_with_role(Role.EXOGENOUS)

    @property
    def baseline_index(self) -> int | None:
        idx = self.indices_with_role(Role.BASELINE_ONLY)
        return idx[0] if idx else None

    def excluded_from_fit(self, var_index: int, t: int) -> bool:
        """Layout placeholders: intervention at t=0, baseline-only at t>0."""
        role = self.variables[var_index].role
        if role is Role.INTERVENTION:
            return t == 0
        if role is Role.BASELINE_ONLY:
            return t > 0
        return False

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "variables": [
                {"name": v.name, "role": v.role.value, "binary": v.binary} for v in self.variables
            ],
            "time_labels": list(self.time_labels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PanelSchema":
        variables = tuple(
            Variable(e["name"], Role(e["role"]), bool(e.get("binary", False)))
            for e in d["variables"]
        )
        return cls(variables, tuple(d["time_labels"]))

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def default_screening_schema(time_labels=(2020, 2021, 2022, 2023)) -> PanelSchema:
    """The 15-variable annual health screening layout used by the demo assets."""
    variables = (
        Variable("Health-guidance", Role.INTERVENTION, binary=True),
        Variable("BMI", Role.OUTCOME),
        Variable("SBP", Role.OUTCOME),
        Variable("DBP", Role.OUTCOME),
        Variable("HbA1c", Role.OUTCOME),
        Variable("LDL", Role.OUTCOME),
        Variable("Drug-HT", Role.EXOGENOUS, binary=True),
        Variable("Drug-DM", Role.EXOGENOUS, binary=True),
        Variable("Drug-LDL", Role.EXOGENOUS, binary=True),
        Variable("Smoke", Role.EXOGENOUS, binary=True),
        Variable("Exercise", Role.EXOGENOUS, binary=True),
        Variable("Alcohol", Role.EXOGENOUS, binary=True),
        Variable("Age", Role.EXOGENOUS),
        Variable("Sex", Role.EXOGENOUS, binary=True),
        Variable("Check_num", Role.BASELINE_ONLY),
    )
    return PanelSchema(variables, tuple(time_labels))


@dataclass(frozen=True)
class Panel:
    """Immutable dense panel: data[subject, variable, time]."""

    schema: PanelSchema
    data: np.ndarray
    subject_ids: tuple[str, ...]
    dropped_subjects: int = 0

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        expected = (len(self.subject_ids), self.schema.n_variables, self.schema.n_times)
        if data.shape != expected:
            raise IngestionError(f"data shape {data.shape} != {expected}")
        if np.isnan(data).any():
            raise IngestionError("panel tensor contains missing values")
        for j, var in enumerate(self.schema.variables):
            if var.binary and not np.isin(data[:, j, :], (0.0, 1.0)).all():
                raise BinaryDomainViolation(f"binary variable {var.name!r} has values outside {{0,1}}")
        w = self.schema.baseline_index
        if w is not None and self.schema.n_times > 1:
            # carried value for t > 0; excluded from fit there
            data[:, w, 1:] = data[:, w, :1]
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "subject_ids", tuple(str(s) for s in self.subject_ids))

    @property
    def n_subjects(self) -> int:
        return len(self.subject_ids)

    def slice_time(self, t: int) -> np.ndarray:
        """Read-only (subjects x variables) view at time point t."""
        if not 0 <= t < self.schema.n_times:
            raise OutOfRange(f"time index {t} outside [0, {self.schema.n_times})")
        return self.data[:, :, t]

    def values(self, var_index: int, t: int) -> np.ndarray:
        return self.data[:, var_index, t]

    def summarize(self) -> dict:
        """Counts plus per-variable/time means, sds, and binary prevalences."""
        if self.n_subjects == 0:
            raise IngestionError("cannot summarize an empty panel")
        per_variable = []
        for j, var in enumerate(self.schema.variables):
            stats = []
            for t in range(self.schema.n_times):
                col = self.data[:, j, t]
                if var.binary:
                    stats.append({"time": self.schema.time_labels[t], "prevalence": float(col.mean())})
                else:
                    stats.append(
                        {
                            "time": self.schema.time_labels[t],
                            "mean": float(col.mean()),
                            "sd": float(col.std()),
                        }
                    )
            per_variable.append({"name": var.name, "role": var.role.value, "by_time": stats})
        return {
            "n_subjects": self.n_subjects,
            "n_variables": self.schema.n_variables,
            "n_times": self.schema.n_times,
            "person_years": self.n_subjects * self.schema.n_times,
            "dropped_subjects": self.dropped_subjects,
            "variables": per_variable,
        }


CSV_HEADER = ("subject_id", "time_index", "variable", "value")


def ingest_long_csv(path, schema: PanelSchema) -> Panel:
    """Read a long-format CSV (subject_id,time_index,variable,value) into a Panel.

    Subjects missing any required (variable, time) cell are dropped and
    counted. The baseline-only variable is required at t=0 only.
    """
    cells: dict[str, dict[tuple[int, int], float]] = {}
    order: list[str] = []
    name_to_idx = {v.name: i for i, v in enumerate(schema.variables)}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise IngestionError(f"expected header {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise IngestionError(f"line {lineno}: expected 4 columns, got {len(row)}")
            sid, t_raw, name, val_raw = row
            if name not in name_to_idx:
                raise IngestionError(f"line {lineno}: unknown variable {name!r}")
            try:
                t = int(t_raw)
            except ValueError:
                raise IngestionError(f"line {lineno}: non-integer time index {t_raw!r}") from None
            if not 0 <= t < schema.n_times:
                raise IngestionError(f"line {lineno}: time index {t} outside [0, {schema.n_times})")
            try:
                value = float(val_raw)
            except ValueError:
                raise IngestionError(f"line {lineno}: non-numeric value {val_raw!r}") from None
            var = schema.variables[name_to_idx[name]]
            if var.binary and value not in (0.0, 1.0):
                raise BinaryDomainViolation(
                    f"line {lineno}: binary variable {name!r} has value {val_raw}"
                )
            if sid not in cells:
                cells[sid] = {}
                order.append(sid)
            cells[sid][(name_to_idx[name], t)] = value

    required = [
        (j, t)
        for j in range(schema.n_variables)
        for t in range(schema.n_times)
        if not (schema.variables[j].role is Role.BASELINE_ONLY and t > 0)
    ]
    kept, dropped = [], 0
    for sid in order:
        if all(key in cells[sid] for key in required):
            kept.append(sid)
        else:
            dropped += 1
    if not kept:
        raise IngestionError("no complete subjects after ingestion")

    data = np.zeros((len(kept), schema.n_variables, schema.n_times))
    for s, sid in enumerate(kept):
        subject = cells[sid]
        for (j, t), value in subject.items():
            data[s, j, t] = value
        w = schema.baseline_index
        if w is not None:
            data[s, w, 1:] = data[s, w, 0]
    return Panel(schema=schema, data=data, subject_ids=tuple(kept), dropped_subjects=dropped)


def emit_long_csv(panel: Panel, path) -> None:
    """Write the round-trippable long-format CSV (floats via repr: bit-exact)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for s, sid in enumerate(panel.subject_ids):
            for j, var in enumerate(panel.schema.variables):
                for t in range(panel.schema.n_times):
                    writer.writerow([sid, t, var.name, repr(float(panel.data[s, j, t]))])


def write_meta(panel: Panel, path) -> None:
    meta = {
        "schema": panel.schema.to_dict(),
        "schema_hash": panel.schema.content_hash(),
        "n_subjects": panel.n_subjects,
        "dropped_subjects": panel.dropped_subjects,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
