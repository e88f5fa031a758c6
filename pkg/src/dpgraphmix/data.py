"""Categorical datasets and marginal configuration counts."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class MarginalCountTable:
    """Sparse table of configuration counts over a variable subset.

    Keys are value tuples aligned with ``subset``; absent keys read as 0.
    """

    subset: tuple[int, ...]
    counts: dict[tuple[int, ...], int]
    total: int

    def __getitem__(self, config: tuple[int, ...]) -> int:
        return self.counts.get(tuple(config), 0)

    def marginalize(self, keep: Sequence[int]) -> "MarginalCountTable":
        """Sum out every variable of the table not listed in ``keep``."""
        keep = tuple(sorted(keep))
        pos = [self.subset.index(v) for v in keep]
        out: Counter = Counter()
        for config, c in self.counts.items():
            out[tuple(config[p] for p in pos)] += c
        return MarginalCountTable(keep, dict(out), self.total)


@dataclass(frozen=True, eq=False)
class CategoricalDataset:
    """An n x q table of categorical codes with per-variable level labels.

    Column ``j`` takes codes in ``range(levels[j])``; ``labels[j][code]`` is
    the original string.
    """

    codes: np.ndarray
    labels: tuple[tuple[str, ...], ...]
    names: tuple[str, ...] = ()
    _subset_codes: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.ndim != 2:
            raise ValidationError("codes must be a 2-d array")
        n, q = codes.shape
        if n < 1:
            raise ValidationError("dataset has no rows")
        if q < 1:
            raise ValidationError("dataset has no variables")
        if len(self.labels) != q:
            raise ValidationError(f"expected {q} label lists, got {len(self.labels)}")
        names = tuple(self.names) if self.names else tuple(f"X{j + 1}" for j in range(q))
        if len(names) != q:
            raise ValidationError(f"expected {q} variable names, got {len(names)}")
        for j, lab in enumerate(self.labels):
            if len(set(lab)) != len(lab):
                raise ValidationError(f"column {names[j]!r} has duplicate level labels")
            if len(lab) < 2:
                raise ValidationError(f"column {names[j]!r} has a single level")
            col = codes[:, j]
            if col.min() < 0 or col.max() >= len(lab):
                raise ValidationError(f"column {names[j]!r} has codes outside [0, {len(lab)})")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "labels", tuple(tuple(lab) for lab in self.labels))

    @classmethod
    def from_codes(cls, codes, levels: Sequence[int] | None = None, names=()) -> "CategoricalDataset":
        """Build a dataset from integer codes; labels are the code strings."""
        codes = np.asarray(codes, dtype=np.int64)
        if codes.ndim == 1:
            codes = codes[:, None]
        if levels is None:
            levels = [max(2, int(codes[:, j].max()) + 1) if codes.size else 2
                      for j in range(codes.shape[1])]
        labels = tuple(tuple(str(v) for v in range(l)) for l in levels)
        return cls(codes, labels, tuple(names))

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @property
    def q(self) -> int:
        return self.codes.shape[1]

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(len(lab) for lab in self.labels)

    def decode(self) -> list[list[str]]:
        """Map codes back to their label strings."""
        return [[self.labels[j][c] for j, c in enumerate(row)] for row in self.codes.tolist()]

    def select_columns(self, columns: Sequence[int]) -> "CategoricalDataset":
        columns = list(columns)
        return CategoricalDataset(self.codes[:, columns],
                                  tuple(self.labels[j] for j in columns),
                                  tuple(self.names[j] for j in columns))

    def subset_codes(self, subset: tuple[int, ...]) -> list[int]:
        """Mixed-radix integer code of every row's configuration on ``subset``.

        Cached per subset; the empty subset maps every row to 0.
        """
        cached = self._subset_codes.get(subset)
        if cached is None:
            flat = np.zeros(self.n, dtype=np.int64)
            for j in subset:
                flat = flat * self.levels[j] + self.codes[:, j]
            cached = flat.tolist()
            self._subset_codes[subset] = cached
        return cached

    def cell_count(self, subset: Iterable[int]) -> int:
        """Number of cells |X_S| of the subset's contingency table."""
        out = 1
        for j in subset:
            out *= self.levels[j]
        return out


def load_csv(path, missing_token: str | None = None) -> CategoricalDataset:
    """Read a header-first CSV of categorical cells.

    Levels are the sorted distinct strings of each column. When
    ``missing_token`` is given, that string becomes an extra level placed
    last regardless of sort order.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file, expected a header row")
    header, body = rows[0], rows[1:]
    q = len(header)
    for lineno, row in enumerate(body, start=2):
        if len(row) != q:
            raise ParseError(f"{path}: row {lineno} has {len(row)} cells, expected {q}")
    if not body:
        raise ValidationError(f"{path}: no data rows")

    labels = []
    codes = np.empty((len(body), q), dtype=np.int64)
    for j in range(q):
        column = [row[j] for row in body]
        distinct = set(column)
        observed = sorted(distinct - {missing_token}) if missing_token is not None else sorted(distinct)
        lab = observed + ([missing_token] if missing_token in distinct else [])
        if len(lab) < 2:
            raise ValidationError(f"{path}: column {header[j]!r} has a single distinct level")
        index = {s: k for k, s in enumerate(lab)}
        codes[:, j] = [index[s] for s in column]
        labels.append(tuple(lab))
    return CategoricalDataset(codes, tuple(labels), tuple(header))


def write_csv(dataset: CategoricalDataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dataset.names)
        writer.writerows(dataset.decode())


def marginal_counts(dataset: CategoricalDataset, rows: Iterable[int],
                    subset: Sequence[int]) -> MarginalCountTable:
    """Tally the configurations of ``subset`` over the selected rows."""
    subset = tuple(subset)
    if list(subset) != sorted(set(subset)):
        raise ValueError(f"subset must be sorted and duplicate-free, got {subset}")
    for j in subset:
        if not 0 <= j < dataset.q:
            raise IndexError(f"variable index {j} out of range for q={dataset.q}")
    rows = list(rows)
    for i in rows:
        if not 0 <= i < dataset.n:
            raise IndexError(f"row index {i} out of range for n={dataset.n}")
    if rows:
        block = dataset.codes[np.asarray(rows)][:, list(subset)]
        counts = Counter(map(tuple, block.tolist()))
    else:
        counts = Counter()
    return MarginalCountTable(subset, dict(counts), len(rows))
