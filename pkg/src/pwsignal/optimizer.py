"""Box-constrained derivative-free minimiser and the signaling-matrix search.

The minimiser keeps a small population sorted by cost and, each iteration,
mutates one of the best members through a short randomized automaton:

  stage 1  difference move against the worst members (DE-flavoured),
  stage 2  mantissa bitmask inversion (averaged over two masks) on one or
           all coordinates,
  stage 3  random move towards/away from a random member (applied twice),
  stage 4  centroid jump or reflection,
  stage 5  "short-cut": collapse the vector to one of its coordinates.

A candidate replaces the worst member iff it improves on it.  Every stage
clamps back into [0, 1]^D.  The search is deterministic per seed.

The matrix search runs this minimiser over raw vectors in [0,1]^(d(d-1)),
mapped to row-stochastic matrices by `simplex_repair`; the uninformative and
identity matrices are injected into the initial population, so the result is
never worse than the better of the two.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .game import AttackerEconomy, SignalMatrix, GameInstance, _as_instance, evaluate_signaling

logger = logging.getLogger(__name__)

_LOG_EVERY = 100


@dataclass(frozen=True)
class OptimizerConfig:
    population_size: int = 20
    iterations: int = 1000
    seed: int = 0
    q1: float = 0.5  # branch: bitmask/centroid side vs difference move
    q2: float = 0.5  # within the branch: centroid vs bitmask
    q3: float = 0.5  # stage-3 gate and step scale
    q4: float = 0.5  # short-cut gate
    allp_prob: float = 0.5  # bitmask on all coordinates vs a single one
    mant_size: int = 54
    mant_size_sh: float = 16.0

    def __post_init__(self):
        if self.population_size < 5:
            raise DomainError("population must have at least 5 members")
        if self.iterations < 0:
            raise DomainError("iterations must be >= 0")
        for name in ("q1", "q2", "q3", "q4", "allp_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    cost: float
    evals: int
    rejected: int


def _bitmask_invert(x, i, rng, cfg):
    scale = float(1 << cfg.mant_size)
    full = (1 << cfg.mant_size) - 1
    a = int(x[i] * scale)
    m1 = full >> int(rng.random() ** 4 * cfg.mant_size_sh)
    m2 = full >> int(rng.random() ** 4 * cfg.mant_size_sh)
    x[i] = 0.5 * ((a ^ m1) / scale + (a ^ m2) / scale)


def minimize(objective, dim: int, config: OptimizerConfig, init=None) -> MinimizeResult:
    """Minimise `objective` over [0,1]^dim.

    `init` vectors (clamped) overwrite the first members of the random
    initial population; every seeded vector is evaluated, so the result can
    never be worse than the best of them.  Non-finite objective values are
    rejected (and counted) rather than propagated.
    """
    if dim < 1:
        raise DomainError("dimension must be >= 1")
    rng = np.random.default_rng(config.seed)
    size_p = config.population_size

    pop = [rng.random(dim) for _ in range(size_p)]
    if init is not None:
        for j, vec in enumerate(init[:size_p]):
            vec = np.clip(np.asarray(vec, dtype=np.float64), 0.0, 1.0)
            if vec.shape != (dim,):
                raise DomainError("init vector has wrong dimension")
            pop[j] = vec

    evals = 0
    rejected = 0
    costs = []
    for x in pop:
        c = float(objective(x))
        evals += 1
        if not np.isfinite(c):
            rejected += 1
            c = np.inf
        costs.append(c)
    order = sorted(range(size_p), key=lambda j: costs[j])
    pop = [pop[j] for j in order]
    costs = [costs[j] for j in order]
    best_x = pop[0].copy()
    best_c = costs[0]

    for it in range(config.iterations):
        x = pop[int(rng.integers(min(4, size_p)))].copy()

        if rng.random() < config.q1:
            if rng.random() < config.q2:
                # stage 4: centroid jump (+) or reflection (-)
                cent = np.mean(pop, axis=0)
                sign = 1.0 if rng.random() < 0.5 else -1.0
                x += sign * (cent - x)
                np.clip(x, 0.0, 1.0, out=x)
            else:
                # stage 2
                if rng.random() < config.allp_prob:
                    idxs = range(dim)
                else:
                    idxs = (int(rng.integers(dim)),)
                for i in idxs:
                    _bitmask_invert(x, i, rng, config)
                np.clip(x, 0.0, 1.0, out=x)
                if rng.random() < config.q3:
                    for _ in range(2):  # stage 3, twice
                        xr = pop[int(rng.integers(size_p))]
                        step = rng.uniform(-1.0, 1.0, dim)
                        x -= step * config.q3 * (x - xr)
                        np.clip(x, 0.0, 1.0, out=x)
        else:
            # stage 1: difference move anchored at the chosen elite member
            i_worst = size_p - 1 - int(rng.integers(min(3, size_p)))
            r = rng.choice(size_p, size=3, replace=False)
            x -= (pop[i_worst] - pop[r[0]] - (pop[r[1]] - pop[r[2]])) * 0.5
            np.clip(x, 0.0, 1.0, out=x)

        if rng.random() < config.q4:
            # stage 5: short-cut to a constant vector
            x[:] = x[int(rng.integers(dim))]

        c = float(objective(x))
        evals += 1
        if not np.isfinite(c):
            rejected += 1
            logger.debug("iteration %d: rejected non-finite objective value", it)
            continue
        if c < best_c:
            best_c = c
            best_x = x.copy()
        if c < costs[-1]:
            pos = bisect.bisect_right(costs, c)
            costs.insert(pos, c)
            pop.insert(pos, x)
            del costs[-1]
            del pop[-1]
        if (it + 1) % _LOG_EVERY == 0:
            logger.debug("iteration %d: best cost %.10g", it + 1, best_c)

    return MinimizeResult(best_x, best_c, evals, rejected)


def simplex_repair(raw, d: int) -> SignalMatrix:
    """Map a raw vector in [0,1]^(d(d-1)) to a row-stochastic d x d matrix.

    Row i takes entries raw[i*(d-1):(i+1)*(d-1)]; rows summing past 1 are
    rescaled, and the last column absorbs the remainder.  Already feasible
    rows pass through unchanged, so the map is idempotent.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.shape != (d * (d - 1),):
        raise DomainError(f"raw vector must have length d(d-1) = {d * (d - 1)}")
    m = np.clip(raw, 0.0, 1.0).reshape(d, d - 1).copy()
    s = m.sum(axis=1)
    over = s > 1.0
    if np.any(over):
        m[over] /= s[over, None]
    last = np.maximum(1.0 - m.sum(axis=1), 0.0)
    return SignalMatrix(np.hstack([m, last[:, None]]))


def gen_sig_mat(source, strength, economy: AttackerEconomy, d: int,
                config: OptimizerConfig) -> SignalMatrix:
    """Search for the signaling matrix minimising the cracked fraction.

    The no-signal defender is always reachable (uninformative seed), so the
    optimised matrix never does worse than not signaling.
    """
    inst = _as_instance(source, strength)
    if inst.labels is None or np.any(inst.labels >= d):
        raise DomainError("corpus labels must cover levels 0..d-1")

    def cost(raw):
        return evaluate_signaling(inst, None, simplex_repair(raw, d), economy).p_adv

    seeds = [
        np.full(d * (d - 1), 1.0 / d),
        np.eye(d)[:, : d - 1].ravel().copy(),
    ]
    result = minimize(cost, d * (d - 1), config, init=seeds)
    logger.info("matrix search: %d evals, %d rejected, best p_adv %.10g",
                result.evals, result.rejected, result.cost)
    return simplex_repair(result.x, d)
