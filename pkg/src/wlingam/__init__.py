"""Workflow-constrained longitudinal LiNGAM toolkit."""

__version__ = "0.1.0"

from .panel import Panel, PanelSchema, Role, Variable, default_screening_schema, ingest_long_csv
from .mask import BlockOrder, PKMask, build_default_mask, default_block_order, validate_mask

__all__ = [
    "Panel",
    "PanelSchema",
    "Role",
    "Variable",
    "default_screening_schema",
    "ingest_long_csv",
    "BlockOrder",
    "PKMask",
    "build_default_mask",
    "default_block_order",
    "validate_mask",
    "__version__",
]
