"""First-order longitudinal structural model over annual panels.

For every modeled time point t >= 1 each continuous outcome gets one linear
equation over: its within-time outcome parents (discovered under the mask),
the current intervention indicator, current and one-year-lagged observed
inputs, lagged outcomes, and (at t = 1 only) the baseline-only covariate.
Time point 0 contributes initial conditions, never equations.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import __version__ as _LIB_VERSION
from .discovery import _collinear_columns, fit_within_time
from .errors import ArtifactError, OutOfRange, RankDeficient
from .mask import PKMask
from .panel import Panel, PanelSchema

FORMAT_VERSION = "v1"


@dataclass(frozen=True)
class LongitudinalModel:
    """Fitted coefficient blocks, one slot per modeled time point t = 1..T-1.

    Arrays are indexed by ``t - 1``; use the ``*_at(t)`` accessors to stay in
    panel time coordinates. ``delta`` applies only to the t = 1 equations.
    """

    schema: PanelSchema
    intercepts: np.ndarray        # (T-1, p)
    alpha: np.ndarray             # (T-1, p)
    b_within: np.ndarray          # (T-1, p, p)
    b_cross: np.ndarray           # (T-1, p, p)
    c_within: np.ndarray          # (T-1, p, q)
    c_cross: np.ndarray           # (T-1, p, q)
    delta: np.ndarray             # (p,)
    orderings: tuple[tuple[int, ...], ...]
    residual_variance: np.ndarray  # (T-1, p)
    outcome_scale: np.ndarray      # (T-1, p)
    schema_hash: str
    mask_hash: str
    aux_alpha: np.ndarray | None = None   # (T-1, q), within-time z-on-v slopes
    degenerate_columns: tuple[str, ...] = ()

    def __post_init__(self):
        for name in (
            "intercepts",
            "alpha",
            "b_within",
            "b_cross",
            "c_within",
            "c_cross",
            "delta",
            "residual_variance",
            "outcome_scale",
        ):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.aux_alpha is not None:
            aux = np.array(self.aux_alpha, dtype=float)
            aux.setflags(write=False)
            object.__setattr__(self, "aux_alpha", aux)
        object.__setattr__(self, "orderings", tuple(tuple(o) for o in self.orderings))

    # -- dimensions --------------------------------------------------------

    @property
    def n_outcomes(self) -> int:
        return self.alpha.shape[1]

    @property
    def n_inputs(self) -> int:
        return self.c_within.shape[2]

    @property
    def n_times(self) -> int:
        return self.alpha.shape[0] + 1

    @property
    def modeled_times(self) -> range:
        return range(1, self.n_times)

    def _slot(self, t: int) -> int:
        if not 1 <= t < self.n_times:
            raise OutOfRange(f"time point {t} has no fitted equations (T={self.n_times})")
        return t - 1

    def alpha_at(self, t):
        return self.alpha[self._slot(t)]

    def intercepts_at(self, t):
        return self.intercepts[self._slot(t)]

    def b_within_at(self, t):
        return self.b_within[self._slot(t)]

    def b_cross_at(self, t):
        return self.b_cross[self._slot(t)]

    def c_within_at(self, t):
        return self.c_within[self._slot(t)]

    def c_cross_at(self, t):
        return self.c_cross[self._slot(t)]

    def ordering_at(self, t):
        return self.orderings[self._slot(t)]

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "library_version": _LIB_VERSION,
            "schema": self.schema.to_dict(),
            "schema_hash": self.schema_hash,
            "mask_hash": self.mask_hash,
            "intercepts": self.intercepts.tolist(),
            "alpha": self.alpha.tolist(),
            "b_within": self.b_within.tolist(),
            "b_cross": self.b_cross.tolist(),
            "c_within": self.c_within.tolist(),
            "c_cross": self.c_cross.tolist(),
            "delta": self.delta.tolist(),
            "orderings": [list(o) for o in self.orderings],
            "residual_variance": self.residual_variance.tolist(),
            "outcome_scale": self.outcome_scale.tolist(),
            "aux_alpha": None if self.aux_alpha is None else self.aux_alpha.tolist(),
            "degenerate_columns": list(self.degenerate_columns),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LongitudinalModel":
        if d.get("format_version") != FORMAT_VERSION:
            raise ArtifactError(f"unsupported model format {d.get('format_version')!r}")
        aux = d.get("aux_alpha")
        return cls(
            schema=PanelSchema.from_dict(d["schema"]),
            intercepts=np.array(d["intercepts"]),
            alpha=np.array(d["alpha"]),
            b_within=np.array(d["b_within"]),
            b_cross=np.array(d["b_cross"]),
            c_within=np.array(d["c_within"]),
            c_cross=np.array(d["c_cross"]),
            delta=np.array(d["delta"]),
            orderings=tuple(tuple(o) for o in d["orderings"]),
            residual_variance=np.array(d["residual_variance"]),
            outcome_scale=np.array(d["outcome_scale"]),
            schema_hash=d["schema_hash"],
            mask_hash=d["mask_hash"],
            aux_alpha=None if aux is None else np.array(aux),
            degenerate_columns=tuple(d.get("degenerate_columns", ())),
        )

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LongitudinalModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _constant(col: np.ndarray) -> bool:
    return bool(np.ptp(col) == 0.0)


def fit(panel: Panel, mask: PKMask, include_auxiliary: bool = False) -> LongitudinalModel:
    """Fit all coefficient blocks of the longitudinal model under the mask.

    Per modeled time point: residualize outcomes on the adjustment set to
    discover the within-time ordering, then re-estimate each outcome
    equation by OLS on its admissible parents. Constant regressor columns
    are dropped with an audit entry instead of failing the fit.
    """
    schema = panel.schema
    T = schema.n_times
    if T < 2:
        raise OutOfRange("need at least two time points to fit")
    out_idx = schema.outcome_indices
    z_idx = schema.exogenous_indices
    v_idx = schema.intervention_index
    w_idx = schema.baseline_index
    p, q = len(out_idx), len(z_idx)
    names = schema.names

    intercepts = np.zeros((T - 1, p))
    alpha = np.zeros((T - 1, p))
    b_within = np.zeros((T - 1, p, p))
    b_cross = np.zeros((T - 1, p, p))
    c_within = np.zeros((T - 1, p, q))
    c_cross = np.zeros((T - 1, p, q))
    delta = np.zeros(p)
    resid_var = np.zeros((T - 1, p))
    out_scale = np.zeros((T - 1, p))
    orderings: list[tuple[int, ...]] = []
    aux_alpha = np.zeros((T - 1, q)) if include_auxiliary else None
    degenerate: list[str] = []

    for t in range(1, T):
        slot = t - 1
        X_t = panel.data[:, out_idx, t]
        X_prev = panel.data[:, out_idx, t - 1]
        v_t = panel.data[:, v_idx, t]
        Z_t = panel.data[:, z_idx, t]
        Z_prev = panel.data[:, z_idx, t - 1]
        w0 = panel.data[:, w_idx, 0] if (w_idx is not None and t == 1) else None
        out_scale[slot] = X_t.std(axis=0)

        # tagged adjustment columns; kind drives which mask entry applies
        columns: list[tuple[str, str, int, np.ndarray]] = []
        columns.append(("v", f"{names[v_idx]}@t{t}", v_idx, v_t))
        for local_j, gj in enumerate(z_idx):
            columns.append(("z", f"{names[gj]}@t{t}", local_j, Z_t[:, local_j]))
        for local_j, gj in enumerate(z_idx):
            columns.append(("z_prev", f"{names[gj]}@t{t - 1}", local_j, Z_prev[:, local_j]))
        for local_j, gj in enumerate(out_idx):
            columns.append(("x_prev", f"{names[gj]}@t{t - 1}", local_j, X_prev[:, local_j]))
        if w0 is not None:
            columns.append(("w", f"{names[w_idx]}@t0", 0, w0))

        live = []
        for kind, label, local_j, col in columns:
            if _constant(col):
                degenerate.append(label)
            else:
                live.append((kind, label, local_j, col))

        adj = np.column_stack([c[3] for c in live]) if live else np.empty((X_t.shape[0], 0))
        adj_labels = [c[1] for c in live]
        resid = _residualize_block(X_t, adj, adj_labels)

        submask = mask.outcome_submask(t)
        order, _ = fit_within_time(resid, submask)
        orderings.append(tuple(order))

        within_mask = mask.within_at(t)
        cross_mask = mask.cross_at(t, 1)
        position = {k: pos for pos, k in enumerate(order)}
        for k in range(p):
            gk = out_idx[k]
            reg_cols: list[np.ndarray] = []
            reg_meta: list[tuple[str, int, str]] = []
            for j in order[: position[k]]:
                if submask[k, j] != 0:
                    reg_cols.append(X_t[:, j])
                    reg_meta.append(("b_within", j, f"{names[out_idx[j]]}@t{t}"))
            for kind, label, local_j, col in live:
                if kind == "v":
                    allowed = within_mask[gk, v_idx] != 0
                elif kind == "z":
                    allowed = within_mask[gk, z_idx[local_j]] != 0
                elif kind == "z_prev":
                    allowed = cross_mask[gk, z_idx[local_j]] != 0
                elif kind == "x_prev":
                    allowed = cross_mask[gk, out_idx[local_j]] != 0
                else:  # w
                    allowed = cross_mask[gk, w_idx] != 0
                if allowed:
                    reg_cols.append(col)
                    reg_meta.append((kind, local_j, label))

            design = np.column_stack([np.ones(X_t.shape[0])] + reg_cols)
            beta, _, rank, _ = np.linalg.lstsq(design, X_t[:, k], rcond=None)
            if rank < design.shape[1]:
                raise RankDeficient(
                    f"equation for {names[gk]}@t{t} is rank deficient",
                    columns=_collinear_columns(design, [m[2] for m in reg_meta]),
                )
            intercepts[slot, k] = beta[0]
            for coef, (kind, local_j, _) in zip(beta[1:], reg_meta):
                if kind == "b_within":
                    b_within[slot, k, local_j] = coef
                elif kind == "v":
                    alpha[slot, k] = coef
                elif kind == "z":
                    c_within[slot, k, local_j] = coef
                elif kind == "z_prev":
                    c_cross[slot, k, local_j] = coef
                elif kind == "x_prev":
                    b_cross[slot, k, local_j] = coef
                else:
                    delta[k] = coef
            fitted = design @ beta
            resid_var[slot, k] = float(np.mean((X_t[:, k] - fitted) ** 2))

        if include_auxiliary:
            if _constant(v_t):
                aux_alpha[slot, :] = 0.0
            else:
                design = np.column_stack([np.ones(v_t.shape[0]), v_t])
                sol, _, _, _ = np.linalg.lstsq(design, Z_t, rcond=None)
                aux_alpha[slot, :] = sol[1, :]

    return LongitudinalModel(
        schema=schema,
        intercepts=intercepts,
        alpha=alpha,
        b_within=b_within,
        b_cross=b_cross,
        c_within=c_within,
        c_cross=c_cross,
        delta=delta,
        orderings=tuple(orderings),
        residual_variance=resid_var,
        outcome_scale=out_scale,
        schema_hash=schema.content_hash(),
        mask_hash=mask.content_hash(),
        aux_alpha=aux_alpha,
        degenerate_columns=tuple(degenerate),
    )


def _residualize_block(Y: np.ndarray, covariates: np.ndarray, labels) -> np.ndarray:
    n = Y.shape[0]
    if covariates.shape[1] == 0:
        return Y - Y.mean(axis=0)
    design = np.column_stack([np.ones(n), covariates])
    beta, _, rank, _ = np.linalg.lstsq(design, Y, rcond=None)
    if rank < design.shape[1]:
        raise RankDeficient("adjustment set is rank deficient", columns=_collinear_columns(design, labels))
    return Y - design @ beta


def predict_one_step(
    model: LongitudinalModel,
    x_prev: np.ndarray,
    v: float,
    z: np.ndarray,
    z_prev: np.ndarray,
    t: int,
    w: float | None = None,
) -> np.ndarray:
    """One-step outcome prediction by forward substitution in causal order."""
    slot = model._slot(t)
    has_baseline = model.schema.baseline_index is not None
    if t == 1 and has_baseline:
        if w is None:
            raise ValueError("baseline covariate value required at t=1")
    elif w is not None:
        raise ValueError(f"baseline covariate must not be supplied at t={t}")

    rhs = (
        model.intercepts[slot]
        + model.alpha[slot] * float(v)
        + model.b_cross[slot] @ np.asarray(x_prev, dtype=float)
        + model.c_within[slot] @ np.asarray(z, dtype=float)
        + model.c_cross[slot] @ np.asarray(z_prev, dtype=float)
    )
    if t == 1 and has_baseline:
        rhs = rhs + model.delta * float(w)

    x_hat = np.zeros(model.n_outcomes)
    B = model.b_within[slot]
    for k in model.orderings[slot]:
        x_hat[k] = rhs[k] + B[k] @ x_hat
    return x_hat
