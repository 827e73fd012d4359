"""Bundled example graphs."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .graph import read_edge_list

BUILTIN_PREFIX = "builtin:"


def karate_path() -> Path:
    return Path(str(resources.files("sparsecd") / "data" / "karate.edges"))


def karate():
    """Zachary's karate club: 34 nodes, 78 edges, ids 0..33."""
    return read_edge_list(karate_path(), strict=True)


def resolve(path: str) -> Path:
    """Map ``builtin:karate`` to the bundled file; other strings are paths."""
    if path.startswith(BUILTIN_PREFIX):
        name = path[len(BUILTIN_PREFIX):]
        if name != "karate":
            raise FileNotFoundError(f"no builtin graph named {name!r} (available: karate)")
        return karate_path()
    return Path(path)
