"""Recurring within-time subgraph over the continuous outcomes.

An edge enters the motif only if the pair is adjacent at every fitted time
point: direction-consistent pairs stay directed, direction-flipping pairs
become undirected, and everything else is dropped. Coefficients are compared
on the standardized scale so magnitudes are comparable across outcomes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange
from .model import LongitudinalModel

DEFAULT_EDGE_THRESHOLD = 0.01


@dataclass(frozen=True)
class Motif:
    directed: tuple[tuple[str, str], ...]
    undirected: tuple[tuple[str, str], ...]
    threshold: float
    scale: str = "standardized"

    def to_dict(self) -> dict:
        return {
            "directed": [list(e) for e in self.directed],
            "undirected": [list(e) for e in self.undirected],
            "threshold": self.threshold,
            "scale": self.scale,
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def to_dot(self, name: str = "motif") -> str:
        lines = [f"digraph {name} {{"]
        for a, b in self.directed:
            lines.append(f'  "{a}" -> "{b}";')
        for a, b in self.undirected:
            lines.append(f'  "{a}" -> "{b}" [dir=none];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def extract_motif(model: LongitudinalModel, edge_threshold: float = DEFAULT_EDGE_THRESHOLD) -> Motif:
    """Apply the recurrence rule across all fitted time points."""
    if edge_threshold < 0:
        raise ValueError("edge threshold must be nonnegative")
    n_fitted = model.n_times - 1
    if n_fitted < 2:
        raise OutOfRange("motif extraction needs at least two fitted time points")
    names = [model.schema.names[j] for j in model.schema.outcome_indices]
    p = len(names)

    # per time point: unordered pair -> direction set ((j, k) means j -> k)
    adjacency: list[dict] = []
    for slot in range(n_fitted):
        B = model.b_within[slot]
        scale = model.outcome_scale[slot]
        sd = np.where(scale > 0, scale, 1.0)
        pairs: dict[tuple[int, int], set] = {}
        for k in range(p):
            for j in range(p):
                if j == k:
                    continue
                standardized = B[k, j] * sd[j] / sd[k]
                if abs(standardized) > edge_threshold:
                    pairs.setdefault((min(j, k), max(j, k)), set()).add((j, k))
        adjacency.append(pairs)

    everywhere = set(adjacency[0])
    for pairs in adjacency[1:]:
        everywhere &= set(pairs)

    directed, undirected = [], []
    for pair in sorted(everywhere):
        directions = [adjacency[slot][pair] for slot in range(n_fitted)]
        if all(len(d) == 1 for d in directions) and len(set.union(*directions)) == 1:
            j, k = next(iter(directions[0]))
            directed.append((names[j], names[k]))
        else:
            undirected.append((names[pair[0]], names[pair[1]]))
    return Motif(
        directed=tuple(directed),
        undirected=tuple(undirected),
        threshold=float(edge_threshold),
    )
