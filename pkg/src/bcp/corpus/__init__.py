"""Bundled protocols (``*.bcp``) and counter machines (``*.cm``).

Each machine ``cm-<name>`` computes the builtin oracle ``<name>``.
"""

from __future__ import annotations

from pathlib import Path

from ..cm import load_machine
from ..errors import UnknownName
from ..textfmt import load_protocol

CORPUS_DIR = Path(__file__).resolve().parent


def catalog() -> dict:
    """Name to file path for every bundled artifact."""
    return {p.stem: p for p in sorted(CORPUS_DIR.iterdir()) if p.suffix in (".bcp", ".cm")}


def path(name: str) -> Path:
    files = catalog()
    if name not in files:
        raise UnknownName(f"no corpus entry {name!r}; known: {', '.join(files)}")
    return files[name]


def load(name: str):
    """Parsed protocol or counter machine for a catalog name."""
    p = path(name)
    return load_protocol(p) if p.suffix == ".bcp" else load_machine(p)


def oracle_name(name: str) -> str | None:
    """Builtin oracle computed by a corpus entry."""
    if name.startswith("cm-"):
        base = name[3:]
        return base.split("-")[0]
    return name if name in ("power2", "majority") else None
