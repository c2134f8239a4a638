"""Access to the bundled template library (recursiveReplacer, rcons, field)."""

from __future__ import annotations

from importlib import resources


def prelude_text() -> str:
    return resources.files("synrec").joinpath("data/prelude.synrec").read_text()
