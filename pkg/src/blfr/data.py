"""Lifetime datasets: validation, text ingestion and the embedded Aarset sample."""

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DomainError

# Times to first failure of 50 devices (Aarset 1987), the standard
# bathtub-hazard benchmark.
AARSET = (
    0.1, 0.2, 1, 1, 1, 1, 1, 2, 3, 6,
    7, 11, 12, 18, 18, 18, 18, 18, 21, 32,
    36, 40, 45, 46, 47, 50, 55, 60, 63, 63,
    67, 67, 67, 67, 72, 75, 79, 82, 82, 83,
    84, 84, 84, 85, 85, 85, 85, 85, 86, 86,
)

BUILTIN = {"aarset": AARSET}


@dataclass(frozen=True)
class Dataset:
    """A complete (uncensored) sample of positive lifetimes."""

    observations: np.ndarray
    name: str = ""

    def __post_init__(self):
        arr = np.array(self.observations, dtype=float).ravel()
        if arr.size == 0:
            raise DomainError("a dataset needs at least one observation")
        bad = ~(np.isfinite(arr) & (arr > 0))
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DomainError(f"observation {i} is {arr[i]!r}; lifetimes must be positive and finite")
        arr.setflags(write=False)
        object.__setattr__(self, "observations", arr)

    @property
    def n(self):
        return self.observations.size

    def sorted(self):
        return np.sort(self.observations)

    def __len__(self):
        return self.n


_SPLIT = re.compile(r"[,\s]+")


def parse_text(text, source="<text>"):
    """Parse whitespace- or comma-separated positive reals; ``#`` starts a comment."""
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        for token in _SPLIT.split(body):
            if not token:
                continue
            try:
                v = float(token)
            except ValueError:
                raise DomainError(f"{source}:{lineno}: cannot parse {token!r} as a number") from None
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{source}:{lineno}: {token!r} is not a positive lifetime")
            values.append(v)
    if not values:
        raise DomainError(f"{source}: no observations found")
    return Dataset(np.array(values), name=str(source))


def ingest_data(path):
    """Read a dataset from ``path``, or return a built-in one by name (``"aarset"``)."""
    key = str(path).strip().lower()
    if key in BUILTIN:
        return Dataset(np.array(BUILTIN[key], dtype=float), name=key)
    p = Path(path)
    if not p.is_file():
        raise DomainError(f"no such data file: {path}")
    return parse_text(p.read_text(), source=str(p))


def aarset():
    return ingest_data("aarset")
