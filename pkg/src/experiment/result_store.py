import logging
import threading
from typing import Dict, Generic, Hashable, List, Optional, Tuple, TypeVar

K = TypeVar("K", bound=Hashable)
V = TypeVar("V")


class ThreadSafeResultStore(Generic[K, V]):
    """A thread-safe store collecting experiment cell results in memory."""

    def __init__(self, max_cells: Optional[int] = None):
        """Create a new :class:`ThreadSafeResultStore`.

        Args:
            max_cells: Optional maximum number of results the store accepts.
                :pydata:`None` (default) means unlimited.
        """
        self._results: Dict[K, V] = {}
        self._lock = threading.Lock()
        # None == unlimited
        self._max_cells = max_cells if (max_cells or 0) > 0 else None
        self._logger = logging.getLogger(__name__)

    def add(self, key: K, result: V) -> None:
        """
        Stores the result of one cell.
        Raises ValueError if the key was already recorded or the store is full.
        """
        with self._lock:
            if self._max_cells is not None and len(self._results) >= self._max_cells:
                raise ValueError(
                    f"Result store is full ({self._max_cells} cells); refusing {key!r}."
                )
            if key in self._results:
                raise ValueError(f"Result for cell {key!r} already recorded.")
            self._results[key] = result
        self._logger.debug("cell_recorded", extra={"cell": key})

    def get(self, key: K) -> Optional[V]:
        """Retrieves a result by its key. Returns None if not found."""
        with self._lock:
            return self._results.get(key)

    def count(self) -> int:
        """Returns the number of recorded cells."""
        with self._lock:
            return len(self._results)

    def sorted_items(self) -> List[Tuple[K, V]]:
        """Returns all results ordered by key, independent of completion order."""
        with self._lock:
            items = list(self._results.items())
        return sorted(items, key=lambda item: item[0])
