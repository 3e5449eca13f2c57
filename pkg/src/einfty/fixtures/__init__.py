"""Reference data shipped with the package (JSON files in this directory)."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from ..free_operad import FormalSum
from ..level_trees import tree_from_barcode


@lru_cache(maxsize=None)
def load(name: str) -> dict:
    text = resources.files(__name__).joinpath(name).read_text(encoding="utf-8")
    return json.loads(text)


def boundary_formulas() -> list[dict]:
    return load("boundary_formulas.json")["formulas"]


def boundary_fixtures(as_printed: bool = False) -> dict:
    """Unlabeled tree gaps -> expected full boundary (identity labels only).

    By default the corrected version is used where the printed formula
    contradicts d o d = 0 (see the note in the JSON file).
    """
    out = {}
    for f in boundary_formulas():
        t = tree_from_barcode(f["barcode"])
        if t.labels != tuple(range(1, t.n + 1)):
            continue
        text = f["boundary"] if as_printed else f.get("consistent", f["boundary"])
        out[t.tree.gaps] = FormalSum.parse(text)
    return out


def linear_formulas() -> list[dict]:
    return load("linear_formulas.json")["formulas"]


def reduced_trees() -> dict[int, list[str]]:
    return {int(k): v for k, v in load("reduced_trees.json")["by_dimension"].items()}


def bad_cells() -> dict:
    return load("bad_cells.json")


def criticality_figures() -> dict:
    return load("criticality_figures.json")
