"""Shared fixtures and random-instance generators."""

from __future__ import annotations

import sys

import numpy as np
import pytest

from pwsignal import EquivalenceClassList, GameInstance, SignalMatrix


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Replay the acceptance-criterion verdict lines after the run; pytest
    captures passing tests' stdout, so this is where they stay visible."""
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "ANNOUNCEMENTS", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def folded_geometric(n: int = 30) -> EquivalenceClassList:
    """Geometric corpus 2^-1 .. 2^-n with the tail mass folded into the
    last class so the frequencies sum to exactly 1.0."""
    freqs = 0.5 ** np.arange(1, n + 1)
    counts = np.ones(n, dtype=np.int64)
    counts[-1] = 2
    return EquivalenceClassList(freqs, counts)


def weak_rest_labels(n: int = 30) -> np.ndarray:
    """Two-level labeling: most likely password weak (0), everything else
    strong (1)."""
    labels = np.ones(n, dtype=np.int64)
    labels[0] = 0
    return labels


@pytest.fixture
def geometric_corpus() -> EquivalenceClassList:
    return folded_geometric()


@pytest.fixture
def half_half_matrix() -> SignalMatrix:
    return SignalMatrix([[0.5, 0.5], [0.0, 1.0]])


@pytest.fixture
def two_level_labels() -> np.ndarray:
    return weak_rest_labels()


def random_game(rng: np.random.Generator, max_classes: int = 8,
                max_guesses: int = 200, dims=(2, 3)):
    """Random small instance, matrix, and price ratio for property tests.

    Totals stay below `max_guesses` so exhaustive per-guess oracles stay
    cheap.
    """
    n = int(rng.integers(1, max_classes + 1))
    freqs = np.sort(rng.uniform(0.5, 100.0, size=n))[::-1]
    while np.unique(freqs).shape[0] != n:
        freqs = np.sort(rng.uniform(0.5, 100.0, size=n))[::-1]
    max_count = max(1, max_guesses // n)
    counts = rng.integers(1, max_count + 1, size=n).astype(np.int64)
    ecl = EquivalenceClassList(freqs, counts)

    d = int(rng.choice(dims))
    labels = rng.integers(0, d, size=n).astype(np.int64)
    raw = rng.random((d, d)) + 1e-3
    matrix = SignalMatrix(raw / raw.sum(axis=1, keepdims=True))
    vk = float(rng.uniform(0.5, 50.0))

    inst = GameInstance(ecl.probabilities, ecl.counts.astype(np.float64), labels)
    return ecl, inst, matrix, vk


def random_corpus(rng: np.random.Generator, max_classes: int = 12,
                  max_count: int = 40) -> EquivalenceClassList:
    """Random corpus with integer frequencies (so text round-trips are
    exact) and arbitrary counts."""
    n = int(rng.integers(2, max_classes + 1))
    freqs = rng.choice(np.arange(1, 10 * max_classes), size=n, replace=False)
    freqs = np.sort(freqs.astype(np.float64))[::-1]
    counts = rng.integers(1, max_count + 1, size=n).astype(np.int64)
    return EquivalenceClassList(freqs, counts)
