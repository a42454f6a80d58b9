"""In-memory implementation of the CatalogDatabase interface."""

import json
import logging
import os
from typing import Any, Dict, List, Optional

from catalog.builders import BUILDERS
from catalog.catalog_db import CatalogDatabase
from catalog.catalog_entry import PROVENANCE_TAGS, CatalogEntry, Expectation, Reference
from core.errors import DimensionMismatchError
from core.normgeom import GraphPoint


class InMemoryCatalog(CatalogDatabase):
    """Stores and retrieves catalog entries entirely in memory."""

    def __init__(self):
        self._entries: Dict[str, CatalogEntry] = {}
        logging.debug("Initialized empty InMemoryCatalog.")

    @classmethod
    def from_directories(cls, directory_paths: List[str]) -> "InMemoryCatalog":
        """Creates a catalog by loading every JSON list file in the given directories."""
        catalog = cls()
        logging.info("Initializing InMemoryCatalog from directories: %s", directory_paths)

        loaded_count = 0
        error_files = []

        for directory_path in directory_paths:
            if not os.path.isdir(directory_path):
                logging.warning("Directory not found, skipping: %s", directory_path)
                continue

            # Sorted so that duplicate-name resolution does not depend on the filesystem.
            for filename in sorted(os.listdir(directory_path)):
                if not filename.endswith(".json"):
                    continue
                filepath = os.path.join(directory_path, filename)
                try:
                    logging.debug("Processing catalog file: %s", filepath)
                    with open(filepath, "r", encoding="utf-8") as f:
                        entry_data_list = json.load(f)

                    if not isinstance(entry_data_list, list):
                        raise ValueError(f"File {filepath} must contain a JSON list of entries.")

                    for entry_data in entry_data_list:
                        if not isinstance(entry_data, dict):
                            logging.warning("Skipping non-dictionary item in list within %s", filepath)
                            continue
                        try:
                            entry = catalog._parse_entry_data(dict(entry_data, _source_file=filepath))
                            if entry.name in catalog._entries:
                                raise ValueError(f"Duplicate name found: {entry.name} from file {filepath}")
                            catalog._add_entry(entry)
                            loaded_count += 1
                        except (ValueError, TypeError, KeyError) as e:
                            logging.error("Skipping entry in %s due to error: %s", filepath, e)

                except (json.JSONDecodeError, ValueError, TypeError) as e:
                    logging.error("Failed to load or parse top-level list from %s: %s", filepath, e)
                    error_files.append(filepath)
                except Exception as e:
                    logging.exception("Unexpected error processing file %s: %s", filepath, e)
                    error_files.append(filepath)

        logging.info("Finished catalog initialization. Loaded %d entries.", loaded_count)
        if error_files:
            logging.error("Errors encountered loading files: %s", error_files)
        return catalog

    @classmethod
    def from_data(cls, entry_data: List[Dict[str, Any]]) -> "InMemoryCatalog":
        """Creates a catalog from a list of entry dictionaries; any bad entry raises."""
        catalog = cls()
        for i, data in enumerate(entry_data):
            try:
                entry = catalog._parse_entry_data(dict(data))
                if entry.name in catalog._entries:
                    raise ValueError(f"Duplicate name found at index {i}: {entry.name}")
                catalog._add_entry(entry)
            except (ValueError, TypeError, KeyError) as e:
                raise ValueError(f"Failed to process catalog entry at index {i}: {e}") from e
            except Exception as e:
                raise RuntimeError(f"Unexpected error processing catalog entry at index {i}") from e
        logging.info("Finished initialization from data. Loaded %d entries.", len(catalog._entries))
        return catalog

    # --- Helper Methods ---

    def _parse_reference(self, data: Dict[str, Any], source: str, name: str) -> Reference:
        if not isinstance(data, dict) or "point" not in data:
            raise ValueError(f"Source '{source}', entry '{name}': each reference needs a 'point'.")
        point = data["point"]
        try:
            pt = GraphPoint(point["x"], point["v"])
        except DimensionMismatchError as e:
            raise ValueError(f"Source '{source}', entry '{name}': {e}") from e
        expected = data.get("expected", {})
        moduli = data.get("moduli", {})
        if not isinstance(expected, dict) or not isinstance(moduli, dict):
            raise TypeError(f"Source '{source}', entry '{name}': 'expected' and 'moduli' must be dictionaries.")
        where = f"Source '{source}', entry '{name}'"
        return Reference(
            point=pt,
            x_radius=float(data.get("x_radius", 1.0)),
            v_radius=float(data.get("v_radius", data.get("x_radius", 1.0))),
            expectations={k: self._parse_expectation(v, f"{where}, '{k}'") for k, v in expected.items()},
            moduli={k: float(v) for k, v in moduli.items()},
        )

    @staticmethod
    def _parse_expectation(data: Any, where: str) -> Expectation:
        if not isinstance(data, dict):
            raise TypeError(f"{where}: an expectation needs 'status', 'provenance' and 'note'.")
        status, provenance, note = data.get("status"), data.get("provenance"), data.get("note")
        if not isinstance(status, str) or not status:
            raise ValueError(f"{where}: missing status.")
        if provenance not in PROVENANCE_TAGS:
            raise ValueError(f"{where}: provenance must be one of {', '.join(PROVENANCE_TAGS)}, got {provenance!r}.")
        if not isinstance(note, str) or not note.strip():
            raise ValueError(f"{where}: a {provenance} expectation needs a note.")
        return Expectation(status, provenance, note.strip())

    def _parse_entry_data(self, data: Dict[str, Any]) -> CatalogEntry:
        """Parses a dictionary into a CatalogEntry, checking the required fields."""
        name = data.pop("name", "")
        kind = data.pop("kind", "")
        params = data.pop("params", {})
        source = data.get("_source_file", "input data")

        if not name or not kind:
            raise ValueError(f"Source '{source}': 'name' and 'kind' are required.")
        if kind not in BUILDERS:
            raise ValueError(f"Source '{source}', entry '{name}': unknown kind '{kind}'.")
        if not isinstance(params, dict):
            raise TypeError(f"Source '{source}', entry '{name}': 'params' field must be a dictionary.")
        references = [self._parse_reference(r, source, name) for r in data.get("references", [])]
        return CatalogEntry(
            name=name,
            kind=kind,
            params=params,
            description=data.get("description", ""),
            provenance=data.get("provenance", ""),
            references=references,
        )

    def _add_entry(self, entry: CatalogEntry):
        if not entry.name:
            raise ValueError("Attempted to add catalog entry with empty name")
        if entry.name in self._entries:
            logging.warning("Duplicate catalog entry overwrite: %s", entry.name)
        self._entries[entry.name] = entry

    # --- Catalog Query Methods ---

    def get_entry(self, name: str) -> Optional[CatalogEntry]:
        return self._entries.get(name)

    def get_all_entries(self) -> List[CatalogEntry]:
        return [self._entries[k] for k in sorted(self._entries)]

    def get_entries_by_kind(self, kind: str) -> List[CatalogEntry]:
        return [e for e in self.get_all_entries() if e.kind == kind]

    def names(self) -> List[str]:
        return sorted(self._entries)
