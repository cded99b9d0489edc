import csv
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from logger_config import logger


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """
    Independent generator for one (seed, keys...) stream.

    Streams with different keys never overlap and do not depend on the order in
    which they are created, so parallel runs draw identical numbers.

    Args:
        seed: Experiment seed.
        keys: Stream identifiers, e.g. a sensor id and a grid index.

    Returns:
        A PCG64-backed generator.
    """
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(sequence))


def output_path(folder: Path, name: str) -> Path:
    """Create `folder` if needed and return folder / name."""
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    return folder / name


def save_csv(rows: Iterable[Mapping[str, object]], columns: Sequence[str], path: Path) -> Path:
    """
    Write dict rows to a CSV file with a fixed column order.

    Args:
        rows: Rows keyed by column name; missing keys are written empty.
        columns: Header and column order.
        path: Target file, parent folders are created.

    Returns:
        The written path.
    """
    path = output_path(Path(path).parent, Path(path).name)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), extrasaction="ignore", restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: format_cell(value) for key, value in row.items()})
    logger.debug(f"Saved file {path}")
    return path


def format_cell(value: object) -> object:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return "" if np.isnan(value) else f"{float(value):.9g}"
    return value


def save_text(text: str, path: Path) -> Optional[Path]:
    """Write a text file; failures are logged and reported as None."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.debug(f"Saved file {path}")
        return path
    except OSError as exc:
        logger.error(f"Failed to save file {path}: {exc}")
        return None
