"""Shipped demonstration artifacts: a constructed health-guidance effect bundle."""

from importlib import resources


def demo_dir() -> str:
    """Filesystem path of the bundled demo artifact directory."""
    return str(resources.files(__package__) / "demo")
