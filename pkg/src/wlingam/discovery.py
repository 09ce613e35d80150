"""Constrained within-time causal ordering and coefficients for continuous outcomes.

The ordering search repeatedly extracts the most plausibly exogenous
remaining variable using the maximum-entropy approximation of the pairwise
likelihood-ratio measure, honoring the edge mask: forbidden (0) pairs are
excluded from regressions (structural zeros), required (1) pairs force both
the ordering and the regressor.
"""

from __future__ import annotations

import numpy as np

from .errors import MaskInfeasible, RankDeficient

# Constants of the maximum-entropy approximation to differential entropy.
_K1 = 79.047
_K2 = 7.4129
_GAMMA = 0.37457
_H_GAUSS = (1.0 + np.log(2.0 * np.pi)) / 2.0


def nongaussianity_entropy(u: np.ndarray) -> float:
    """Differential-entropy approximation of a standardized sample.

    Equals (1 + log 2*pi)/2 for exactly Gaussian input and drops as the
    sample departs from Gaussianity in either tail direction.
    """
    u = np.asarray(u, dtype=float)
    if u.size == 0 or float(np.std(u)) == 0.0:
        raise ValueError("entropy approximation needs a non-degenerate sample")
    t1 = float(np.mean(np.log(np.cosh(u)))) - _GAMMA
    t2 = float(np.mean(u * np.exp(-(u**2) / 2.0)))
    return _H_GAUSS - _K1 * t1**2 - _K2 * t2**2


def residualize(y: np.ndarray, covariates: np.ndarray | None, names=None) -> np.ndarray:
    """OLS residuals of y on [1, covariates]; empty covariates just center y."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if covariates is None or covariates.size == 0:
        return y - y.mean()
    covariates = np.asarray(covariates, dtype=float)
    if covariates.ndim == 1:
        covariates = covariates[:, None]
    design = np.column_stack([np.ones(n), covariates])
    beta, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        offending = _collinear_columns(design, names)
        raise RankDeficient(
            f"design is rank deficient (rank {rank} < {design.shape[1]})", columns=offending
        )
    return y - design @ beta


def _collinear_columns(design: np.ndarray, names=None) -> tuple[str, ...]:
    """Greedy QR-style pass naming columns not adding rank (intercept excluded)."""
    labels = list(names) if names else [f"col{j}" for j in range(design.shape[1] - 1)]
    offending = []
    kept = design[:, :1]
    for j in range(1, design.shape[1]):
        trial = np.column_stack([kept, design[:, j]])
        if np.linalg.matrix_rank(trial) == trial.shape[1]:
            kept = trial
        else:
            offending.append(labels[j - 1])
    return tuple(offending)


def _pair_residual(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Residual of a on b for centered columns; no-op when b is degenerate."""
    denom = float(b @ b)
    if denom == 0.0:
        return a
    return a - (float(a @ b) / denom) * b


def _standardized(col: np.ndarray) -> np.ndarray:
    centered = col - col.mean()
    sd = centered.std()
    return centered / sd if sd > 0 else centered


def _entropy_or_gauss(u: np.ndarray) -> float:
    sd = u.std()
    if sd == 0.0:
        return _H_GAUSS
    return nongaussianity_entropy(u / sd)


def admissible_roots(remaining: list[int], mask: np.ndarray) -> list[int]:
    """Candidates not forced by the mask to have a parent among the rest."""
    out = []
    for i in remaining:
        if any(mask[i, j] == 1 for j in remaining if j != i):
            continue
        out.append(i)
    return out


def select_exogenous(X: np.ndarray, mask: np.ndarray, remaining=None) -> int:
    """Pick the most plausibly exogenous admissible variable.

    X holds the current working columns (original or partially
    residualized); mask is the within-time constraint submatrix over the
    same index space. Ties break toward the lowest variable index.
    """
    if remaining is None:
        remaining = list(range(X.shape[1]))
    remaining = sorted(remaining)
    candidates = admissible_roots(remaining, mask)
    if not candidates:
        raise MaskInfeasible("mask requires a parent for every remaining candidate")
    if len(candidates) == 1:
        return candidates[0]

    std_cols = {i: _standardized(X[:, i]) for i in remaining}
    marginal = {i: _entropy_or_gauss(std_cols[i]) for i in remaining}

    # Pairwise likelihood-ratio measure; antisymmetric, so fill each pair once.
    measure: dict[tuple[int, int], float] = {}
    for a_pos, i in enumerate(remaining):
        for j in remaining[a_pos + 1 :]:
            xi, xj = std_cols[i], std_cols[j]
            r_i_on_j = _pair_residual(xi, xj)
            r_j_on_i = _pair_residual(xj, xi)
            m_ij = (marginal[j] + _entropy_or_gauss(r_i_on_j)) - (
                marginal[i] + _entropy_or_gauss(r_j_on_i)
            )
            measure[(i, j)] = m_ij
            measure[(j, i)] = -m_ij

    scores = []
    for i in candidates:
        total = sum(min(0.0, measure[(i, j)]) ** 2 for j in remaining if j != i)
        scores.append(total)
    return candidates[int(np.argmin(scores))]


def fit_within_time(X: np.ndarray, mask: np.ndarray) -> tuple[list[int], np.ndarray]:
    """Causal ordering plus within-time coefficient matrix under the mask.

    Returns (order, B) with B[i, j] the coefficient of j in i's equation,
    strictly lower triangular under the permutation given by the order and
    exactly zero wherever the mask forbids the edge.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if mask.shape != (p, p):
        raise ValueError(f"mask shape {mask.shape} does not match {p} variables")
    if n <= p + 10:
        raise ValueError(f"need more than {p + 10} rows to order {p} variables, got {n}")

    work = np.array([_standardized(X[:, j]) for j in range(p)]).T
    remaining = list(range(p))
    order: list[int] = []
    while remaining:
        m = select_exogenous(work, mask, remaining)
        order.append(m)
        remaining.remove(m)
        for i in remaining:
            work[:, i] = _pair_residual(work[:, i], work[:, m])

    B = np.zeros((p, p))
    for pos, k in enumerate(order):
        preds = [j for j in order[:pos] if mask[k, j] != 0]
        if not preds:
            continue
        design = np.column_stack([np.ones(n), X[:, preds]])
        beta, _, rank, _ = np.linalg.lstsq(design, X[:, k], rcond=None)
        if rank < design.shape[1]:
            raise RankDeficient(
                f"within-time design for variable {k} is rank deficient",
                columns=tuple(str(j) for j in preds),
            )
        B[k, preds] = beta[1:]
    return order, B
