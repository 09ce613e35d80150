"""Forward what-if and goal-seeking queries over a precomputed effect bundle.

All numbers come from lookups into four aligned matrices (point estimate,
interval bounds, uncertainty indicator); the only runtime arithmetic is
scaling and the no-change trajectory from the fitted model. Queries whose
interval includes zero never produce a number: the guardrail answer
NoDetectableEffect is returned instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ArtifactError, WlingamError
from .model import LongitudinalModel, predict_one_step

EPS_SINGULAR = 1e-8

ESTIMATE = "Estimate"
NO_DETECTABLE_EFFECT = "NoDetectableEffect"
NOT_SUPPORTED = "NotSupported"
INPUT_IMPLAUSIBLE = "InputImplausible"

MESSAGE_KEYS = (
    "estimate",
    "estimate_binary_setting",
    "no_detectable_effect",
    "not_supported_horizon",
    "not_supported_ill_posed",
    "input_implausible",
)


class UnknownVariable(WlingamError, KeyError):
    """Query names a variable absent from the bundle."""


@dataclass(frozen=True)
class EffectBundle:
    """Four aligned (source x target x lag) matrices plus plausibility bounds."""

    sources: tuple[str, ...]
    targets: tuple[str, ...]
    lags: tuple[int, ...]
    point: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    uncertain: np.ndarray
    anchor_time: int
    bounds: dict
    model_hash: str = ""

    def __post_init__(self):
        shape = (len(self.sources), len(self.targets), len(self.lags))
        for name in ("point", "ci_low", "ci_high"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ArtifactError(f"{name} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        unc = np.array(self.uncertain, dtype=bool)
        if unc.shape != shape:
            raise ArtifactError(f"uncertain has shape {unc.shape}, expected {shape}")
        expected = (self.ci_low <= 0.0) & (0.0 <= self.ci_high)
        if not np.array_equal(unc, expected):
            raise ArtifactError("uncertainty indicator disagrees with the interval bounds")
        if np.any(self.ci_low > self.ci_high):
            raise ArtifactError("interval bounds are not ordered")
        unc.setflags(write=False)
        object.__setattr__(self, "uncertain", unc)
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "lags", tuple(int(l) for l in self.lags))

    def cell(self, source: str, target: str, lag: int) -> tuple[float, float, float, bool]:
        try:
            s = self.sources.index(source)
        except ValueError:
            raise UnknownVariable(f"unknown source variable {source!r}") from None
        try:
            t = self.targets.index(target)
        except ValueError:
            raise UnknownVariable(f"unknown target variable {target!r}") from None
        l = self.lags.index(int(lag))
        return (
            float(self.point[s, t, l]),
            float(self.ci_low[s, t, l]),
            float(self.ci_high[s, t, l]),
            bool(self.uncertain[s, t, l]),
        )

    def to_dict(self) -> dict:
        return {
            "format_version": "v1",
            "anchor_time": self.anchor_time,
            "sources": list(self.sources),
            "targets": list(self.targets),
            "lags": list(self.lags),
            "point": self.point.tolist(),
            "ci_low": self.ci_low.tolist(),
            "ci_high": self.ci_high.tolist(),
            "uncertain": self.uncertain.tolist(),
            "bounds": self.bounds,
            "model_hash": self.model_hash,
            "message_keys": list(MESSAGE_KEYS),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EffectBundle":
        if d.get("format_version") != "v1":
            raise ArtifactError(f"unsupported bundle format {d.get('format_version')!r}")
        return cls(
            sources=tuple(d["sources"]),
            targets=tuple(d["targets"]),
            lags=tuple(d["lags"]),
            point=np.array(d["point"]),
            ci_low=np.array(d["ci_low"]),
            ci_high=np.array(d["ci_high"]),
            uncertain=np.array(d["uncertain"]),
            anchor_time=int(d["anchor_time"]),
            bounds=dict(d["bounds"]),
            model_hash=d.get("model_hash", ""),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "EffectBundle":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def build_bundle(model: LongitudinalModel, summary, anchor_time: int, lags) -> EffectBundle:
    """Assemble the bundle from a bootstrap summary covering the full grid."""
    schema = model.schema
    names = schema.names
    sources = tuple(
        names[j]
        for j in range(schema.n_variables)
        if j != schema.baseline_index
    )
    targets = tuple(names[j] for j in schema.outcome_indices)
    lags = tuple(int(l) for l in lags)
    shape = (len(sources), len(targets), len(lags))
    point = np.zeros(shape)
    ci_low = np.zeros(shape)
    ci_high = np.zeros(shape)
    table = {
        (src, dst): i for i, (src, dst) in enumerate(summary.queries)
    }
    for si, s in enumerate(sources):
        for ti, t in enumerate(targets):
            for li, lag in enumerate(lags):
                key = ((s, anchor_time), (t, anchor_time + lag))
                if key not in table:
                    raise ArtifactError(f"bootstrap summary is missing query {key}")
                i = table[key]
                point[si, ti, li] = summary.point[i]
                ci_low[si, ti, li] = summary.ci_low[i]
                ci_high[si, ti, li] = summary.ci_high[i]
    uncertain = (ci_low <= 0.0) & (0.0 <= ci_high)
    return EffectBundle(
        sources=sources,
        targets=targets,
        lags=lags,
        point=point,
        ci_low=ci_low,
        ci_high=ci_high,
        uncertain=uncertain,
        anchor_time=anchor_time,
        bounds=default_bounds(schema),
        model_hash=model.content_hash(),
    )


def default_bounds(schema) -> dict:
    """Permissive plausibility ranges; deployments override per variable."""
    known = {
        "BMI": (10.0, 60.0),
        "SBP": (70.0, 250.0),
        "DBP": (40.0, 150.0),
        "HbA1c": (3.0, 15.0),
        "LDL": (20.0, 400.0),
        "Age": (18.0, 100.0),
    }
    bounds = {}
    for v in schema.variables:
        if v.binary:
            bounds[v.name] = {"kind": "binary"}
        elif v.name in known:
            lo, hi = known[v.name]
            bounds[v.name] = {"kind": "continuous", "low": lo, "high": hi}
        else:
            bounds[v.name] = {"kind": "continuous", "low": -1e6, "high": 1e6}
    return bounds


@dataclass(frozen=True)
class SimQuery:
    mode: str  # "forward" | "goal_seek"
    baseline: dict
    source: str
    target: str
    horizon: int
    forward_value: float | None = None
    desired_target: float | None = None


@dataclass(frozen=True)
class SimAnswer:
    status: str
    message: str
    value: float | None = None
    interval: tuple[float, float] | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.value is not None) != (self.status == ESTIMATE):
            raise ValueError("value must be present exactly for Estimate answers")
        if (self.interval is not None) != (self.value is not None):
            raise ValueError("interval must accompany the value")

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "message": self.message,
            "value": self.value,
            "interval": None if self.interval is None else list(self.interval),
            "detail": self.detail,
        }


class Simulator:
    """Guardrailed query evaluation over one bundle + fitted model pair."""

    def __init__(self, bundle: EffectBundle, model: LongitudinalModel):
        if bundle.model_hash and bundle.model_hash != model.content_hash():
            raise ArtifactError("bundle was built from a different model artifact")
        self.bundle = bundle
        self.model = model
        self.schema = model.schema
        w = self.schema.baseline_index
        self.required_inputs = tuple(
            v.name for i, v in enumerate(self.schema.variables) if i != w
        )

    # -- validation ------------------------------------------------------

    def validate_inputs(self, query: SimQuery) -> SimAnswer | None:
        """None when plausible, otherwise an InputImplausible answer."""
        problems = []
        for name in self.required_inputs:
            if name not in query.baseline:
                problems.append(f"missing baseline value for {name}")
                continue
            problem = self._check_bound(name, query.baseline[name])
            if problem:
                problems.append(problem)
        if query.mode == "forward" and query.forward_value is not None:
            problem = self._check_bound(query.source, query.forward_value)
            if problem:
                problems.append(f"hypothetical value: {problem}")
        if query.mode == "goal_seek" and query.desired_target is not None:
            problem = self._check_bound(query.target, query.desired_target)
            if problem:
                problems.append(f"desired target: {problem}")
        if problems:
            return SimAnswer(
                status=INPUT_IMPLAUSIBLE,
                message="input_implausible",
                detail={"problems": problems},
            )
        return None

    def _check_bound(self, name: str, value) -> str | None:
        spec = self.bundle.bounds.get(name)
        if spec is None:
            return None
        try:
            value = float(value)
        except (TypeError, ValueError):
            return f"{name} is not numeric"
        if spec["kind"] == "binary":
            if value not in (0.0, 1.0):
                return f"{name} must be 0 or 1, got {value}"
        elif not spec["low"] <= value <= spec["high"]:
            return f"{name}={value} outside plausible range [{spec['low']}, {spec['high']}]"
        return None

    # -- trajectory ------------------------------------------------------

    def baseline_implied_target(self, baseline: dict, target: str, horizon: int) -> float:
        """No-change trajectory value of the target ``horizon`` visits ahead."""
        schema = self.schema
        x = np.array([baseline[schema.names[j]] for j in schema.outcome_indices], dtype=float)
        z = np.array([baseline[schema.names[j]] for j in schema.exogenous_indices], dtype=float)
        for step in range(1, horizon + 1):
            t = self.bundle.anchor_time + step
            x = predict_one_step(self.model, x_prev=x, v=0.0, z=z, z_prev=z, t=t)
        k = schema.outcome_indices.index(schema.index_of(target))
        return float(x[k])

    # -- queries -----------------------------------------------------------

    def forward_query(self, query: SimQuery) -> SimAnswer:
        precheck = self._common_checks(query)
        if precheck is not None:
            return precheck
        if query.forward_value is None:
            return SimAnswer(
                status=INPUT_IMPLAUSIBLE,
                message="input_implausible",
                detail={"problems": ["forward query needs a hypothetical value"]},
            )
        point, lo, hi, uncertain = self.bundle.cell(query.source, query.target, query.horizon)
        if uncertain:
            return SimAnswer(status=NO_DETECTABLE_EFFECT, message="no_detectable_effect")
        delta = float(query.forward_value) - float(query.baseline[query.source])
        change = point * delta
        ends = sorted((lo * delta, hi * delta))
        implied = self.baseline_implied_target(query.baseline, query.target, query.horizon)
        return SimAnswer(
            status=ESTIMATE,
            message="estimate",
            value=change,
            interval=(ends[0], ends[1]),
            detail={
                "predicted_level": implied + change,
                "level_interval": [implied + ends[0], implied + ends[1]],
                "baseline_implied_target": implied,
                "delta": delta,
            },
        )

    def goal_seek(self, query: SimQuery) -> SimAnswer:
        precheck = self._common_checks(query)
        if precheck is not None:
            return precheck
        if query.desired_target is None:
            return SimAnswer(
                status=INPUT_IMPLAUSIBLE,
                message="input_implausible",
                detail={"problems": ["goal-seek query needs a desired target value"]},
            )
        point, lo, hi, uncertain = self.bundle.cell(query.source, query.target, query.horizon)
        if uncertain:
            return SimAnswer(status=NO_DETECTABLE_EFFECT, message="no_detectable_effect")
        implied = self.baseline_implied_target(query.baseline, query.target, query.horizon)
        desired = float(query.desired_target)
        base_source = float(query.baseline[query.source])

        if self._is_binary(query.source):
            settings = {}
            for setting in (0.0, 1.0):
                pred = implied + point * (setting - base_source)
                settings[setting] = pred
            best = min(settings, key=lambda s: (abs(settings[s] - desired), s))
            delta = best - base_source
            ends = sorted((lo * delta, hi * delta))
            return SimAnswer(
                status=ESTIMATE,
                message="estimate_binary_setting",
                value=best,
                interval=(ends[0], ends[1]),
                detail={
                    "predicted_level": settings[best],
                    "gap": abs(settings[best] - desired),
                    "predictions": {str(int(s)): p for s, p in settings.items()},
                    "baseline_implied_target": implied,
                },
            )

        if abs(point) < EPS_SINGULAR:
            return SimAnswer(status=NOT_SUPPORTED, message="not_supported_ill_posed")
        required_delta = (desired - implied) / point
        value = base_source + required_delta
        gap = desired - implied
        ends = sorted((base_source + gap / lo, base_source + gap / hi)) if lo != 0 and hi != 0 else None
        if ends is None:
            ends = (value, value)
        return SimAnswer(
            status=ESTIMATE,
            message="estimate",
            value=value,
            interval=(ends[0], ends[1]),
            detail={
                "required_change": required_delta,
                "baseline_implied_target": implied,
            },
        )

    def round_trip(self, query: SimQuery) -> tuple[SimAnswer, float | None]:
        """Goal-seek then forward at the answer; residual to the desired target."""
        goal = self.goal_seek(query)
        if goal.status != ESTIMATE or self._is_binary(query.source):
            return goal, None
        forward = self.forward_query(
            SimQuery(
                mode="forward",
                baseline=query.baseline,
                source=query.source,
                target=query.target,
                horizon=query.horizon,
                forward_value=goal.value,
            )
        )
        if forward.status != ESTIMATE:
            return forward, None
        level = forward.detail["predicted_level"]
        return goal, abs(level - float(query.desired_target))

    # -- helpers -----------------------------------------------------------

    def _is_binary(self, name: str) -> bool:
        spec = self.bundle.bounds.get(name)
        if spec is not None:
            return spec["kind"] == "binary"
        return self.schema.variables[self.schema.index_of(name)].binary

    def _common_checks(self, query: SimQuery) -> SimAnswer | None:
        if query.source not in self.bundle.sources:
            raise UnknownVariable(f"unknown source variable {query.source!r}")
        if query.target not in self.bundle.targets:
            raise UnknownVariable(f"unknown target variable {query.target!r}")
        if int(query.horizon) not in self.bundle.lags:
            return SimAnswer(status=NOT_SUPPORTED, message="not_supported_horizon")
        return self.validate_inputs(query)
