"""Run manifests: input hashes, seed, and versions accompanying every artifact.

Artifacts themselves stay timestamp-free so reruns are byte-identical; the
wall-clock stamp lives only in the sidecar manifest's ``created_at`` field.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone

from . import __version__


def file_hash(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(artifact_path, inputs: dict, seed=None, extra: dict | None = None) -> str:
    doc = {
        "artifact": str(artifact_path),
        "inputs": {name: {"path": str(p), "sha256": file_hash(p)} for name, p in inputs.items()},
        "seed": seed,
        "library_version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        doc.update(extra)
    out = f"{artifact_path}.manifest.json"
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out
