"""Password frequency corpora, compressed as equivalence class lists.

A corpus of N passwords is represented by classes (f_i, c_i): c_i distinct
passwords that each occur f_i times.  Frequencies are strictly descending,
so class arrays are tiny compared to N and everything downstream runs in
time proportional to the number of classes rather than the number of
passwords.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, EmptyCorpusError, ParseError


def _merge_sorted(freqs, counts):
    """Merge duplicate frequencies and return arrays sorted descending."""
    freqs = np.asarray(freqs, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.int64)
    uniq, inverse = np.unique(freqs, return_inverse=True)
    merged = np.zeros(uniq.shape[0], dtype=np.int64)
    np.add.at(merged, inverse, counts)
    return uniq[::-1].copy(), merged[::-1].copy()


@dataclass(frozen=True)
class EquivalenceClassList:
    """Frequency classes of a password corpus, strongest class first.

    freqs[i] is the occurrence count (or noisy estimate) shared by the
    counts[i] distinct passwords of class i.  freqs must be strictly
    descending and positive; counts must be >= 1.
    """

    freqs: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if freqs.ndim != 1 or counts.ndim != 1 or freqs.shape != counts.shape:
            raise DomainError("freqs and counts must be 1-d arrays of equal length")
        if freqs.shape[0] == 0:
            raise EmptyCorpusError("corpus has no classes")
        if not np.all(freqs > 0):
            raise DomainError("frequencies must be positive")
        if freqs.shape[0] > 1 and not np.all(np.diff(freqs) < 0):
            raise DomainError("frequencies must be strictly descending")
        if not np.all(counts >= 1):
            raise DomainError("class counts must be >= 1")
        freqs.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_classes(cls, pairs):
        """Build from (frequency, count) pairs in any order; duplicates merge."""
        pairs = list(pairs)
        if not pairs:
            raise EmptyCorpusError("no classes given")
        freqs, counts = _merge_sorted([p[0] for p in pairs], [p[1] for p in pairs])
        return cls(freqs, counts)

    @property
    def n_classes(self) -> int:
        return self.freqs.shape[0]

    @cached_property
    def total(self) -> float:
        """Total number of passwords N = sum of f_i * c_i."""
        return float(np.sum(self.freqs * self.counts))

    @cached_property
    def probabilities(self) -> np.ndarray:
        """Per-password probability p_i = f_i / N for each class."""
        p = self.freqs / self.total
        p.setflags(write=False)
        return p

    @cached_property
    def class_mass(self) -> np.ndarray:
        """Probability mass p_i * c_i carried by each whole class."""
        m = self.probabilities * self.counts
        m.setflags(write=False)
        return m

    @cached_property
    def _cum_mass(self) -> np.ndarray:
        cm = np.cumsum(self.class_mass)
        cm.setflags(write=False)
        return cm

    def cumulative_mass(self, class_prefix: int) -> float:
        """Mass of the first `class_prefix` classes; reaches 1.0 at n_classes."""
        if not 0 <= class_prefix <= self.n_classes:
            raise DomainError(f"class prefix {class_prefix} out of range")
        if class_prefix == 0:
            return 0.0
        return float(self._cum_mass[class_prefix - 1])

    def guesses_for_prefix(self, class_prefix: int) -> int:
        """Number of individual passwords in the first `class_prefix` classes."""
        if not 0 <= class_prefix <= self.n_classes:
            raise DomainError(f"class prefix {class_prefix} out of range")
        return int(np.sum(self.counts[:class_prefix]))

    def to_text(self) -> str:
        lines = ["# frequency count"]
        for f, c in zip(self.freqs, self.counts):
            lines.append(f"{float(f)!r} {int(c)}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


@dataclass(frozen=True)
class EmpiricalDistribution:
    """An equivalence class list plus a confidence annotation.

    Classes whose frequency is at or below `confidence_cutoff` (default 1,
    i.e. hapax passwords) carry little statistical weight and estimates that
    depend on them should be flagged.
    """

    source: EquivalenceClassList
    confidence_cutoff: float = 1.0

    @property
    def probabilities(self) -> np.ndarray:
        return self.source.probabilities

    @cached_property
    def low_confidence(self) -> np.ndarray:
        mask = self.source.freqs <= self.confidence_cutoff
        mask.setflags(write=False)
        return mask


def load_plaintext(path) -> EquivalenceClassList:
    """Count a newline-delimited password list into an equivalence class list.

    Blank lines are skipped.  Raises EmptyCorpusError if nothing remains.
    """
    counter = collections.Counter()
    with open(path, "r", encoding="utf-8", errors="surrogateescape") as fh:
        for line in fh:
            pw = line.rstrip("\r\n")
            if pw:
                counter[pw] += 1
    if not counter:
        raise EmptyCorpusError(f"no passwords in {path}")
    by_freq = collections.Counter(counter.values())
    return EquivalenceClassList.from_classes(
        (float(freq), n_pw) for freq, n_pw in by_freq.items()
    )


def load_frequency_corpus(path) -> EquivalenceClassList:
    """Parse a "<frequency> <count>" text corpus.

    Lines starting with '#' and blank lines are ignored.  Duplicate
    frequencies are merged.  Malformed lines raise ParseError with the line
    number; non-positive values raise DomainError.
    """
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split()
            if len(fields) != 2:
                raise ParseError(f"expected 'frequency count', got {stripped!r}", line=lineno)
            try:
                freq = float(fields[0])
                count = float(fields[1])
            except ValueError:
                raise ParseError(f"non-numeric field in {stripped!r}", line=lineno) from None
            if not np.isfinite(freq) or freq <= 0:
                raise DomainError(f"line {lineno}: frequency must be positive, got {freq}")
            if count <= 0 or count != int(count):
                raise DomainError(f"line {lineno}: count must be a positive integer, got {fields[1]}")
            pairs.append((freq, int(count)))
    if not pairs:
        raise EmptyCorpusError(f"no classes in {path}")
    return EquivalenceClassList.from_classes(pairs)
