"""Frequency-based strength levels for passwords.

Passwords are bucketed into d levels, 0 = weakest (most common) through
d-1 = strongest.  Buckets are built greedily from the rare end of the
corpus so that each remaining bucket targets an equal share of the
remaining probability mass; the class that overflows a bucket is still
included in it and closes it.  A level is then summarised by a threshold
t_i = the largest frequency assigned to it, and lookups reduce to "the
largest level whose threshold still covers the frequency estimate".
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .corpus import EquivalenceClassList
from .errors import DomainError, ParseError


def _bucket_labels(mass, d, init_volume=0.0):
    # Walk classes from rarest to most common, pouring mass into the current
    # bucket; capacity is re-derived from the unlabeled remainder each step.
    n = mass.shape[0]
    labels = np.empty(n, dtype=np.int64)
    volume = float(init_volume)
    labeled = 0.0
    remaining = d
    for i in range(n - 1, -1, -1):
        volume += mass[i]
        capacity = (1.0 - labeled) / remaining
        labels[i] = remaining - 1
        if volume > capacity:
            labeled += volume
            volume = 0.0
            if remaining > 1:  # once only level 0 is left it absorbs the rest
                remaining -= 1
    return labels


def _thresholds_from_labels(freqs, labels, d):
    # t_l = largest frequency labeled l; labels are non-decreasing along the
    # descending-frequency axis, so the first occurrence is the max.
    thresholds = np.full(d, np.nan)
    for i in range(freqs.shape[0]):
        lvl = labels[i]
        if np.isnan(thresholds[lvl]):
            thresholds[lvl] = freqs[i]
    return thresholds


@dataclass(frozen=True)
class StrengthThresholds:
    """Per-level frequency cutoffs; NaN marks a level that got no classes."""

    d: int
    thresholds: np.ndarray
    class_labels: np.ndarray | None = None

    def __post_init__(self):
        thresholds = np.asarray(self.thresholds, dtype=np.float64)
        if self.d < 2:
            raise DomainError("need at least 2 strength levels")
        if thresholds.shape != (self.d,):
            raise DomainError("thresholds must have one entry per level")
        if not np.any(np.isfinite(thresholds)):
            raise DomainError("at least one level must be non-empty")
        thresholds.setflags(write=False)
        object.__setattr__(self, "thresholds", thresholds)
        if self.class_labels is not None:
            labels = np.asarray(self.class_labels, dtype=np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "class_labels", labels)

    @cached_property
    def _ascending(self):
        # thresholds sorted ascending with their level ids; strongest first
        levels = np.flatnonzero(np.isfinite(self.thresholds))[::-1]
        return self.thresholds[levels], levels

    def strengths(self, estimates) -> np.ndarray:
        """Vectorized level lookup for an array of frequency estimates."""
        t_asc, levels = self._ascending
        idx = np.searchsorted(t_asc, np.asarray(estimates, dtype=np.float64), side="left")
        out = np.where(idx < levels.shape[0], levels[np.minimum(idx, levels.shape[0] - 1)], 0)
        return out.astype(np.int64)

    def get_strength(self, estimate: float) -> int:
        """Largest level whose threshold covers `estimate`; 0 if none does.

        Negative or tiny estimates land in the strongest non-empty level.
        """
        return int(self.strengths(np.atleast_1d(float(estimate)))[0])

    def labels_for(self, ecl: EquivalenceClassList) -> np.ndarray:
        return self.strengths(ecl.freqs)

    def to_text(self) -> str:
        lines = [str(self.d)]
        for lvl in range(self.d):
            t = self.thresholds[lvl]
            if np.isfinite(t):
                lines.append(f"{lvl} {float(t)!r}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "StrengthThresholds":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParseError("empty thresholds file")
        try:
            d = int(lines[0])
        except ValueError:
            raise ParseError(f"expected level count, got {lines[0]!r}", line=1) from None
        thresholds = np.full(d, np.nan)
        for lineno, ln in enumerate(lines[1:], start=2):
            fields = ln.split()
            if len(fields) != 2:
                raise ParseError(f"expected 'level frequency', got {ln!r}", line=lineno)
            try:
                lvl = int(fields[0])
                freq = float(fields[1])
            except ValueError:
                raise ParseError(f"non-numeric field in {ln!r}", line=lineno) from None
            if not 0 <= lvl < d:
                raise DomainError(f"line {lineno}: level {lvl} out of range for d={d}")
            thresholds[lvl] = freq
        return cls(d, thresholds)

    @classmethod
    def read(cls, path) -> "StrengthThresholds":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def label_strength(ecl: EquivalenceClassList, d: int) -> StrengthThresholds:
    """Assign every corpus class a strength level, balancing mass per level."""
    if d < 2:
        raise DomainError("need at least 2 strength levels")
    labels = _bucket_labels(ecl.class_mass, d)
    thresholds = _thresholds_from_labels(ecl.freqs, labels, d)
    return StrengthThresholds(d, thresholds, labels)


def label_strength_top_k(ecl: EquivalenceClassList, d: int, k: int) -> StrengthThresholds:
    """Like label_strength but only the top-k ranked passwords are trusted.

    Every password ranked below k is assumed strongest (level d-1); its mass
    is poured into the strongest bucket before the trusted classes are
    processed, so the trusted head of the corpus is bucketed against what is
    left.  k counts individual passwords, not classes.
    """
    if d < 2:
        raise DomainError("need at least 2 strength levels")
    n_pw = int(np.sum(ecl.counts))
    if not d <= k <= n_pw:
        raise DomainError(f"k must satisfy {d} <= k <= {n_pw}, got {k}")
    ranks_before = np.concatenate(([0], np.cumsum(ecl.counts)[:-1]))
    head = int(np.searchsorted(ranks_before, k, side="left"))
    # head = first class whose members are all ranked below k
    labels = np.full(ecl.n_classes, d - 1, dtype=np.int64)
    tail_mass = float(np.sum(ecl.class_mass[head:]))
    labels[:head] = _bucket_labels(ecl.class_mass[:head], d, init_volume=tail_mass)
    thresholds = _thresholds_from_labels(ecl.freqs, labels, d)
    return StrengthThresholds(d, thresholds, labels)
