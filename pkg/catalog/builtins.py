"""
The built-in operator catalog: named instances loaded from data/catalog, with
"did you mean" suggestions for unknown names.
"""

import logging
import os
from functools import lru_cache
from typing import List, Optional

from thefuzz import process

import config
from catalog.builders import build_operator
from catalog.catalog_entry import CatalogEntry
from catalog.in_memory_catalog import InMemoryCatalog
from core.errors import UnknownNameError
from operators.operator import Operator

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))


@lru_cache(maxsize=1)
def default_catalog() -> InMemoryCatalog:
    """The catalog loaded from config.CATALOG_DATA_DIRS (relative to the project root)."""
    dirs = [d if os.path.isabs(d) else os.path.join(PROJECT_ROOT, d) for d in config.CATALOG_DATA_DIRS]
    return InMemoryCatalog.from_directories(dirs)


def suggest(name: str, names: List[str]) -> List[str]:
    """Closest known names, best first."""
    if not names:
        return []
    matches = process.extract(name, names, limit=config.SUGGESTION_LIMIT)
    return [m[0] for m in matches if m[1] >= config.SUGGESTION_MIN_SCORE]


def expected(name: str, catalog: Optional[InMemoryCatalog] = None) -> CatalogEntry:
    """The entry of a catalog operator, with its reference points and expected verdicts."""
    catalog = catalog or default_catalog()
    found = catalog.get_entry(name)
    if found is None:
        suggestions = suggest(name, catalog.names())
        hint = f" Did you mean: {', '.join(suggestions)}?" if suggestions else ""
        raise UnknownNameError(f"Unknown catalog operator '{name}'.{hint}", name=name, suggestions=suggestions)
    return found


def builtin(name: str, catalog: Optional[InMemoryCatalog] = None, **overrides) -> Operator:
    """Builds the named catalog operator; keyword overrides replace entries of its params."""
    catalog = catalog or default_catalog()
    found = expected(name, catalog)
    params = {**found.params, **overrides}
    logging.debug("Building catalog operator %s (%s).", name, found.kind)
    return build_operator(found.kind, params, name, lambda other: builtin(other, catalog))


def list_names(catalog: Optional[InMemoryCatalog] = None) -> List[str]:
    return (catalog or default_catalog()).names()
