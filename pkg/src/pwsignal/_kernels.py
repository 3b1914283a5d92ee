"""Hot loops for best-response budget scans.

Two interchangeable implementations: a numba-compiled scan and a pure-numpy
fallback.  Both perform the same floating-point operations in the same order
(np.cumsum accumulates sequentially, matching the compiled loop), so the two
paths return bit-identical results.  Selection happens automatically; set
PWSIGNAL_NO_NUMBA=1 before import to force the numpy path.

The scan evaluates every class-prefix budget m = 0..n of a guessing attack
against per-password success probabilities `prob` on classes of size `cnt`
(sorted by descending prob), at password value v and per-guess cost k, and
picks the utility-maximising budget.  Ties within `tie_tol` break in the
attacker's favour: largest cracked mass first, then the smallest budget that
achieves it (no point paying for guesses that add nothing).
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    numba = None
    HAVE_NUMBA = False

_FORCED_OFF = os.environ.get("PWSIGNAL_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")
USE_NUMBA = HAVE_NUMBA and not _FORCED_OFF


def using_numba() -> bool:
    """True when the compiled path is active."""
    return USE_NUMBA


def best_budget_numpy(prob, cnt, v, k, tie_tol):
    mass = prob * cnt
    lam = np.cumsum(mass)
    lam_prev = np.empty_like(lam)
    lam_prev[0] = 0.0
    lam_prev[1:] = lam[:-1]
    # expected cost of guessing through class i: survivors pay for every
    # member, and within the class the hit stops payment partway through
    cost = cnt * (1.0 - lam_prev) - mass * (cnt - 1.0) * 0.5
    util = v * lam - k * np.cumsum(cost)

    best_u = 0.0  # m = 0: guess nothing
    if util.shape[0] and util.max() > best_u:
        best_u = float(util.max())
    thr = best_u - tie_tol
    cand = np.flatnonzero(util >= thr) + 1  # candidate budgets, ascending
    if cand.shape[0] == 0:
        return 0, 0.0, 0.0
    lam_star = lam[cand[-1] - 1]
    if lam_star == 0.0 and 0.0 >= thr:
        return 0, 0.0, 0.0
    best_m = int(cand[lam[cand - 1] == lam_star][0])
    return best_m, float(lam[best_m - 1]), float(util[best_m - 1])


def _best_budget_seq(prob, cnt, v, k, tie_tol):
    n = prob.shape[0]
    lam = np.empty(n)
    util = np.empty(n)
    lam_run = 0.0
    cost_run = 0.0
    for i in range(n):
        mass = prob[i] * cnt[i]
        cost = cnt[i] * (1.0 - lam_run) - mass * (cnt[i] - 1.0) * 0.5
        lam_run = lam_run + mass
        cost_run = cost_run + cost
        lam[i] = lam_run
        util[i] = v * lam_run - k * cost_run

    best_u = 0.0
    for i in range(n):
        if util[i] > best_u:
            best_u = util[i]
    thr = best_u - tie_tol
    best_m = -1
    best_lam = 0.0
    for m in range(n, -1, -1):
        u_m = util[m - 1] if m > 0 else 0.0
        l_m = lam[m - 1] if m > 0 else 0.0
        if u_m >= thr:
            if best_m < 0:
                best_m = m
                best_lam = l_m
            elif l_m == best_lam:
                best_m = m
            else:
                break
    if best_m <= 0:
        return 0, 0.0, 0.0
    return best_m, lam[best_m - 1], util[best_m - 1]


if HAVE_NUMBA:
    best_budget_numba = numba.njit(cache=True)(_best_budget_seq)
else:
    best_budget_numba = None


def best_budget(prob, cnt, v, k, tie_tol):
    """Dispatch to the active implementation.  Arrays must be float64."""
    if USE_NUMBA:
        m, lam, util = best_budget_numba(prob, cnt, v, k, tie_tol)
        return int(m), float(lam), float(util)
    return best_budget_numpy(prob, cnt, v, k, tie_tol)
