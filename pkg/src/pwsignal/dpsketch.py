"""Differentially private count-min frequency sketch.

A width x depth table of float64 counters.  Each row hashes an item with an
independent multiply-shift hash over a 64-bit digest of the item, and an
insert adds the item's weight to one cell per row; the estimate is the
minimum over rows.  Initialising every cell with Laplace(0, b) noise, where
b = depth / epsilon, makes the sketch epsilon-differentially private with
respect to a single password insertion, at the price of signed noise: the
no-noise sketch never underestimates, the noisy one can.

A dictionary-free view of the sketch is obtained by reading column minima as
candidate frequencies ("extraction"); columns dominated by noise are dropped
by thresholding.  A column minimum only reflects an inserted item when every
row is occupied at that column, so extraction is informative for shallow
sketches (depth 1) or near-full occupancy; deep sparse sketches extract
mostly noise even though per-item estimates stay accurate.
"""

from __future__ import annotations

import hashlib
import math
import struct

import numpy as np

from .corpus import EquivalenceClassList
from .errors import DomainError, EmptyCorpusError, ParseError

_MAGIC = b"PWCMSK01"
_VERSION = 1
_M64 = (1 << 64) - 1


def dims_for_error(eps_err: float, delta: float) -> tuple[int, int]:
    """Width/depth so estimates err by < eps_err*N with probability delta."""
    if eps_err <= 0:
        raise DomainError("eps_err must be positive")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    width = math.ceil(2.0 / eps_err)
    depth = math.ceil(-math.log(1.0 - delta) / math.log(2.0))
    return width, max(depth, 1)


def _digest64(item: str) -> int:
    return int.from_bytes(hashlib.blake2b(item.encode("utf-8"), digest_size=8).digest(), "little")


class DPCountSketch:
    """Count-min sketch with optional Laplace-noise initialisation."""

    def __init__(self, width: int, depth: int, epsilon: float | None = None, seed=0):
        if width < 1 or depth < 1:
            raise DomainError("width and depth must be >= 1")
        if epsilon is not None and epsilon <= 0:
            raise DomainError("epsilon must be positive when given")
        self.width = int(width)
        self.depth = int(depth)
        self.scale_b = float(depth) / float(epsilon) if epsilon is not None else 0.0
        hash_ss, noise_ss = np.random.SeedSequence(seed).spawn(2)
        hash_rng = np.random.default_rng(hash_ss)
        a = hash_rng.integers(0, _M64, size=self.depth, dtype=np.uint64, endpoint=True)
        self._hash_a = (a | np.uint64(1)).astype(np.uint64)  # odd multiplier
        self._hash_b = hash_rng.integers(0, _M64, size=self.depth, dtype=np.uint64, endpoint=True)
        if self.scale_b > 0.0:
            noise_rng = np.random.default_rng(noise_ss)
            self.table = noise_rng.laplace(0.0, self.scale_b, size=(self.depth, self.width))
        else:
            self.table = np.zeros((self.depth, self.width))

    @classmethod
    def _from_parts(cls, width, depth, scale_b, hash_a, hash_b, table):
        self = cls.__new__(cls)
        self.width = int(width)
        self.depth = int(depth)
        self.scale_b = float(scale_b)
        self._hash_a = hash_a
        self._hash_b = hash_b
        self.table = table
        return self

    def _indices(self, item: str) -> np.ndarray:
        x = _digest64(item)
        out = np.empty(self.depth, dtype=np.int64)
        for r in range(self.depth):
            h = (int(self._hash_a[r]) * x + int(self._hash_b[r])) & _M64
            out[r] = (h * self.width) >> 64  # multiply-high range reduction
        return out

    def insert(self, item: str, count: float = 1.0) -> None:
        """Add `count` occurrences of item (one cell per row)."""
        if not np.isfinite(count) or count <= 0:
            raise DomainError("insert count must be positive")
        idx = self._indices(item)
        self.table[np.arange(self.depth), idx] += count

    def estimate(self, item: str) -> float:
        """Frequency estimate: minimum counter over the item's cells."""
        idx = self._indices(item)
        return float(self.table[np.arange(self.depth), idx].min())

    def estimate_many(self, items) -> np.ndarray:
        rows = np.arange(self.depth)
        return np.array([self.table[rows, self._indices(it)].min() for it in items])

    def extract_noisy_corpus(self, drop_threshold: float = 0.5) -> EquivalenceClassList:
        """Read column minima as a frequency corpus.

        Columns whose minimum is <= drop_threshold (or negative) are treated
        as pure noise and discarded.
        """
        col_min = self.table.min(axis=0)
        keep = col_min > max(drop_threshold, 0.0)
        if not np.any(keep):
            raise EmptyCorpusError("no sketch column survives the drop threshold")
        freqs, counts = np.unique(col_min[keep], return_counts=True)
        return EquivalenceClassList(freqs[::-1].copy(), counts[::-1].astype(np.int64))

    def save(self, path) -> None:
        header = struct.pack("<8sIQQd", _MAGIC, _VERSION, self.width, self.depth, self.scale_b)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(self._hash_a.astype("<u8").tobytes())
            fh.write(self._hash_b.astype("<u8").tobytes())
            fh.write(self.table.astype("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "DPCountSketch":
        with open(path, "rb") as fh:
            header = fh.read(struct.calcsize("<8sIQQd"))
            try:
                magic, version, width, depth, scale_b = struct.unpack("<8sIQQd", header)
            except struct.error:
                raise ParseError(f"{path} is not a sketch file") from None
            if magic != _MAGIC:
                raise ParseError(f"{path} is not a sketch file")
            if version != _VERSION:
                raise ParseError(f"unsupported sketch version {version}")

            def read_exact(n_bytes):
                buf = fh.read(n_bytes)
                if len(buf) != n_bytes:
                    raise ParseError(f"{path} is truncated")
                return buf

            hash_a = np.frombuffer(read_exact(8 * depth), dtype="<u8").astype(np.uint64)
            hash_b = np.frombuffer(read_exact(8 * depth), dtype="<u8").astype(np.uint64)
            data = np.frombuffer(read_exact(8 * width * depth), dtype="<f8")
            table = data.reshape(depth, width).copy()
        return cls._from_parts(width, depth, scale_b, hash_a, hash_b, table)
