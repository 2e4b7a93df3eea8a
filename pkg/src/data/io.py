"""Long-format delimited text reader/writer (``subject,var,u,y``)."""
from __future__ import annotations

import csv
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from src.data.dataset import FunctionalDataset
from src.exceptions import AllEmptyError, DatasetFormatError

logger = logging.getLogger(__name__)

HEADER = ("subject", "var", "u", "y")


def format_metadata(metadata: Optional[Mapping[str, object]]) -> str:
    """Return the ``# key=value ...`` comment line embedded in output files."""
    if not metadata:
        return ""
    body = " ".join(f"{key}={metadata[key]}" for key in sorted(metadata))
    return f"# {body}\n"


def _data_lines(handle: Iterable[str]) -> Iterator[Tuple[int, str]]:
    for lineno, line in enumerate(handle, start=1):
        if line.startswith("#") or not line.strip():
            continue
        yield lineno, line


def read_long_csv(path: str | Path, *, one_based: bool = False) -> FunctionalDataset:
    """Read a long-format file into a :class:`FunctionalDataset`.

    Subjects and variables are numbered from zero unless *one_based* is set.
    The dataset dimensions are ``max(index) + 1``; (subject, var) lists that
    never appear are empty.
    """
    path = Path(path)
    offset = 1 if one_based else 0
    cells: Dict[Tuple[int, int], List[Tuple[float, float]]] = defaultdict(list)

    with path.open("r", encoding="utf-8", newline="") as handle:
        lines = list(_data_lines(handle))
    if not lines:
        raise DatasetFormatError(str(path), 1, "missing header row")

    header_line, header_text = lines[0]
    header = tuple(col.strip() for col in next(csv.reader([header_text])))
    if header != HEADER:
        raise DatasetFormatError(
            str(path), header_line, f"expected header {','.join(HEADER)}"
        )

    for lineno, text in lines[1:]:
        row = next(csv.reader([text]))
        if len(row) != 4:
            raise DatasetFormatError(str(path), lineno, f"expected 4 columns, got {len(row)}")
        try:
            i = int(row[0]) - offset
            j = int(row[1]) - offset
            u = float(row[2])
            y = float(row[3])
        except ValueError as exc:
            raise DatasetFormatError(str(path), lineno, str(exc)) from exc
        if i < 0 or j < 0:
            raise DatasetFormatError(str(path), lineno, "negative subject or var index")
        if not 0.0 <= u <= 1.0:
            raise DatasetFormatError(str(path), lineno, f"time {u!r} outside [0, 1]")
        cells[(i, j)].append((u, y))

    if not cells:
        raise AllEmptyError(f"{path} contains no observations")

    n = max(i for i, _ in cells) + 1
    p = max(j for _, j in cells) + 1
    obs = [[cells.get((i, j), []) for j in range(p)] for i in range(n)]
    logger.debug("Read %d observations from %s (n=%d, p=%d)", len(lines) - 1, path, n, p)
    return FunctionalDataset.from_observations(obs)


def write_long_csv(
    dataset: FunctionalDataset,
    path: str | Path,
    *,
    metadata: Optional[Mapping[str, object]] = None,
    one_based: bool = False,
) -> int:
    """Write *dataset* in long format; returns the number of data rows."""
    path = Path(path)
    offset = 1 if one_based else 0
    rows = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_metadata(metadata))
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        for i in range(dataset.n_subjects):
            for j in range(dataset.n_vars):
                times, values = dataset.observations(i, j)
                for u, y in zip(times.tolist(), values.tolist()):
                    writer.writerow((i + offset, j + offset, repr(u), repr(y)))
                    rows += 1
    logger.debug("Wrote %d rows to %s", rows, path)
    return rows
