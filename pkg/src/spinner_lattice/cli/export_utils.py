import csv
import datetime
import json
import logging
import os
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from .. import __version__


def format_value(value: Any) -> str:
    """17 significant digits for floats, empty for None, str() otherwise."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return str(value)


def _pad(row: Sequence[Any], width: int) -> List[Any]:
    row = list(row)
    if len(row) > width:
        raise ValueError(f"Row has {len(row)} fields but the header only {width}")
    return row + [None] * (width - len(row))


def _open_for_writing(path: str):
    try:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as e:
        raise OSError(f"Cannot write '{path}': {e.strerror or e}") from e


def export_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    Writes a CSV table with a header row; short (ragged) rows are padded with empty fields.
    """
    with _open_for_writing(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in _pad(row, len(header))])
    logging.info(f"Wrote {path}")
    return path


def export_plotdata(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Writes a whitespace-separated table for plotting tools; missing values become NaN."""
    with _open_for_writing(path) as f:
        f.write("# " + " ".join(header) + "\n")
        for row in rows:
            fields = [
                "NaN" if value is None else format_value(value)
                for value in _pad(row, len(header))
            ]
            f.write(" ".join(fields) + "\n")
    logging.info(f"Wrote {path}")
    return path


def export_grid(
    directory: str, name: str, grid: np.ndarray, spacing: float, origin: float = 0.0
) -> List[str]:
    """
    Writes a real 2D grid as CSV, as raw little-endian float64 and as a JSON header.

    Rows of the grid run along y, columns along x.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2:
        raise ValueError(f"Grid must be two-dimensional. Received shape {grid.shape}")
    csv_path = os.path.join(directory, f"{name}.csv")
    with _open_for_writing(csv_path) as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in grid:
            writer.writerow([format_value(v) for v in row])
    bin_path = os.path.join(directory, f"{name}.bin")
    try:
        grid.astype("<f8").tofile(bin_path)
    except OSError as e:
        raise OSError(f"Cannot write '{bin_path}': {e.strerror or e}") from e
    header_path = os.path.join(directory, f"{name}.json")
    write_json(
        header_path,
        {
            "dims": list(grid.shape),
            "spacing": spacing,
            "origin": [origin, origin],
            "dtype": "<f8",
            "order": "row-major, rows along y",
        },
    )
    logging.info(f"Wrote grid '{name}' ({grid.shape[0]}x{grid.shape[1]}) to {directory}")
    return [csv_path, bin_path, header_path]


def write_json(path: str, content: Any) -> str:
    with _open_for_writing(path) as f:
        json.dump(content, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")
    return path


def _json_default(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_manifest(
    directory: str, parameters: dict, config_text: str, artifacts: Optional[List[str]] = None
) -> str:
    """Records the resolved parameters, package version and timestamp of a run."""
    manifest = {
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "parameters": parameters,
        "config": config_text,
        "artifacts": sorted(os.path.basename(a) for a in (artifacts or [])),
    }
    return write_json(os.path.join(directory, "manifest.json"), manifest)
