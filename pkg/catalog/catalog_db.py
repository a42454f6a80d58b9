"""Defines the abstract interface for a catalog of named operators."""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

from catalog.catalog_entry import CatalogEntry


class CatalogDatabase(ABC):
    """Abstract base class for storing and retrieving catalog entries."""

    @classmethod
    @abstractmethod
    def from_data(cls, entry_data: List[Dict[str, Any]]) -> "CatalogDatabase":
        """Creates a catalog instance from a list of entry data dictionaries."""
        pass

    @classmethod
    @abstractmethod
    def from_directories(cls, directory_paths: List[str]) -> "CatalogDatabase":
        """Creates a catalog instance by loading from JSON files in specified directories."""
        pass

    @abstractmethod
    def get_entry(self, name: str) -> Optional[CatalogEntry]:
        """Retrieves an entry by its name."""
        pass

    @abstractmethod
    def get_all_entries(self) -> List[CatalogEntry]:
        """Returns a list of all entries, sorted by name."""
        pass

    @abstractmethod
    def get_entries_by_kind(self, kind: str) -> List[CatalogEntry]:
        """Returns all entries built by a specific builder kind."""
        pass
