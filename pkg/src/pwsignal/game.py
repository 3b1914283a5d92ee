"""Best-response analysis of guessing attacks against signaled accounts.

The defender publishes, per account, a noisy strength signal drawn from a
row-stochastic matrix S indexed by the password's strength level.  A rational
attacker conditions on the signal, re-sorts passwords by posterior
probability, and runs a guessing attack with the utility-maximising budget;
with no signaling the same machinery runs on the prior.  All attacks operate
on equivalence classes, and optimal budgets only ever sit on class
boundaries, so everything is linear in the number of classes.

Tie handling is adversarial: budgets whose utility is within TIE_TOL of the
maximum count as maximisers, and among them the attacker cracks the most
mass (then spends the fewest guesses that achieve it).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels
from .corpus import EquivalenceClassList
from .errors import DomainError, ParseError, UnreachableSignalError
from .strength import StrengthThresholds

TIE_TOL = 1e-9


@dataclass(frozen=True)
class AttackerEconomy:
    """Value v of one cracked account and cost k of one hash evaluation."""

    v: float
    k: float

    def __post_init__(self):
        if not np.isfinite(self.v) or self.v < 0:
            raise DomainError("password value v must be >= 0")
        if not np.isfinite(self.k) or self.k <= 0:
            raise DomainError("guessing cost k must be > 0")

    @property
    def vk(self) -> float:
        return self.v / self.k


class SignalMatrix:
    """Row-stochastic d x d matrix: rows[level][signal] = Pr(signal | level)."""

    def __init__(self, rows):
        rows = np.array(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1] or rows.shape[0] < 2:
            raise DomainError("signal matrix must be square with d >= 2")
        if np.any(rows < -1e-12) or np.any(rows > 1.0 + 1e-12):
            raise DomainError("matrix entries must lie in [0, 1]")
        sums = rows.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise DomainError("matrix rows must sum to 1")
        rows = np.clip(rows, 0.0, 1.0)
        rows.setflags(write=False)
        self.rows = rows

    @property
    def d(self) -> int:
        return self.rows.shape[0]

    @classmethod
    def uninformative(cls, d: int) -> "SignalMatrix":
        """Identical rows: the signal carries no information."""
        return cls(np.full((d, d), 1.0 / d))

    @classmethod
    def identity(cls, d: int) -> "SignalMatrix":
        """Fully revealing: signal equals the strength level."""
        return cls(np.eye(d))

    def to_text(self) -> str:
        lines = [str(self.d)]
        for row in self.rows:
            lines.append(" ".join(f"{float(x)!r}" for x in row))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "SignalMatrix":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines:
            raise ParseError("empty matrix file")
        try:
            d = int(lines[0])
        except ValueError:
            raise ParseError(f"expected matrix size, got {lines[0]!r}", line=1) from None
        if len(lines) != d + 1:
            raise ParseError(f"expected {d} matrix rows, got {len(lines) - 1}")
        try:
            rows = [[float(x) for x in ln.split()] for ln in lines[1:]]
        except ValueError as exc:
            raise ParseError(f"non-numeric matrix entry: {exc}") from None
        if any(len(r) != d for r in rows):
            raise ParseError("matrix row has wrong length")
        return cls(rows)

    @classmethod
    def read(cls, path) -> "SignalMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())


@dataclass(frozen=True)
class GameInstance:
    """Attack-ready view of a corpus: per-password probs, class sizes, levels.

    prob is sorted descending (stable); labels may be None when only
    prior-order attacks are needed.
    """

    prob: np.ndarray
    cnt: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        prob = np.ascontiguousarray(self.prob, dtype=np.float64)
        cnt = np.ascontiguousarray(self.cnt, dtype=np.float64)
        if prob.ndim != 1 or prob.shape != cnt.shape:
            raise DomainError("prob and cnt must be 1-d arrays of equal length")
        if np.any(prob < 0) or np.any(cnt < 1):
            raise DomainError("probabilities must be >= 0 and counts >= 1")
        order = np.argsort(-prob, kind="stable")
        prob = prob[order]
        cnt = cnt[order]
        labels = self.labels
        if labels is not None:
            labels = np.ascontiguousarray(labels, dtype=np.int64)[order]
            if labels.shape != prob.shape or np.any(labels < 0):
                raise DomainError("labels must be non-negative, one per class")
            labels.setflags(write=False)
        prob.setflags(write=False)
        cnt.setflags(write=False)
        object.__setattr__(self, "prob", prob)
        object.__setattr__(self, "cnt", cnt)
        object.__setattr__(self, "labels", labels)

    @property
    def class_mass(self) -> np.ndarray:
        return self.prob * self.cnt

    @classmethod
    def from_corpus(cls, ecl: EquivalenceClassList, strength=None) -> "GameInstance":
        labels = _resolve_labels(ecl, strength) if strength is not None else None
        return cls(ecl.probabilities, ecl.counts.astype(np.float64), labels)


Source = Union[EquivalenceClassList, GameInstance]


def _resolve_labels(ecl: EquivalenceClassList, strength) -> np.ndarray:
    if isinstance(strength, StrengthThresholds):
        return strength.labels_for(ecl)
    labels = np.asarray(strength, dtype=np.int64)
    if labels.shape != (ecl.n_classes,):
        raise DomainError("need one strength label per corpus class")
    return labels


def _as_instance(source: Source, strength=None) -> GameInstance:
    if isinstance(source, GameInstance):
        return source
    return GameInstance.from_corpus(source, strength)


def _require_labels(inst: GameInstance, d: int) -> np.ndarray:
    if inst.labels is None:
        raise DomainError("this operation needs strength labels")
    if np.any(inst.labels >= d):
        raise DomainError("strength labels exceed matrix size")
    return inst.labels


@dataclass(frozen=True)
class NoSignalResponse:
    budget_classes: int
    budget_guesses: int
    p_adv: float
    u_adv: float


@dataclass(frozen=True)
class SignalPlan:
    """Best response conditioned on one signal value."""

    signal: int
    reachable: bool
    prob: float
    budget_classes: int
    budget_guesses: int
    lam: float
    utility: float


@dataclass(frozen=True)
class AttackPlan:
    signal_probs: np.ndarray
    plans: tuple[SignalPlan, ...]


@dataclass(frozen=True)
class SignalingOutcome:
    p_adv: float
    u_adv: float
    plan: AttackPlan


def best_response_no_signal(source: Source, economy: AttackerEconomy,
                            tie_tol: float = TIE_TOL) -> NoSignalResponse:
    """Utility-maximising guessing attack against the prior distribution."""
    inst = _as_instance(source)
    m, lam, util = _kernels.best_budget(inst.prob, inst.cnt, economy.v, economy.k, tie_tol)
    guesses = int(round(float(np.sum(inst.cnt[:m]))))
    return NoSignalResponse(m, guesses, lam, util)


def signal_probabilities(source: Source, strength, matrix: SignalMatrix) -> np.ndarray:
    """Marginal Pr[Sig = y] for every signal value y."""
    inst = _as_instance(source, strength)
    labels = _require_labels(inst, matrix.d)
    level_mass = np.bincount(labels, weights=inst.class_mass, minlength=matrix.d)
    return level_mass @ matrix.rows


def posterior(source: Source, strength, matrix: SignalMatrix, y: int) -> np.ndarray:
    """Per-password posterior probability of each class, given signal y."""
    inst = _as_instance(source, strength)
    labels = _require_labels(inst, matrix.d)
    if not 0 <= y < matrix.d:
        raise DomainError(f"signal {y} out of range")
    pr_sig = signal_probabilities(inst, None, matrix)
    if pr_sig[y] == 0.0:
        raise UnreachableSignalError(f"signal {y} is never emitted")
    return inst.prob * matrix.rows[labels, y] / pr_sig[y]


def best_response_signal(source: Source, strength, matrix: SignalMatrix,
                         economy: AttackerEconomy, tie_tol: float = TIE_TOL) -> AttackPlan:
    """Per-signal best responses against the posterior distributions."""
    inst = _as_instance(source, strength)
    labels = _require_labels(inst, matrix.d)
    pr_sig = signal_probabilities(inst, None, matrix)
    plans = []
    for y in range(matrix.d):
        if pr_sig[y] == 0.0:
            plans.append(SignalPlan(y, False, 0.0, 0, 0, 0.0, 0.0))
            continue
        q = inst.prob * matrix.rows[labels, y] / pr_sig[y]
        order = np.argsort(-q, kind="stable")
        m, lam, util = _kernels.best_budget(
            np.ascontiguousarray(q[order]), np.ascontiguousarray(inst.cnt[order]),
            economy.v, economy.k, tie_tol)
        guesses = int(round(float(np.sum(inst.cnt[order[:m]]))))
        plans.append(SignalPlan(y, True, float(pr_sig[y]), m, guesses, lam, util))
    return AttackPlan(pr_sig, tuple(plans))


def evaluate_signaling(source: Source, strength, matrix: SignalMatrix,
                       economy: AttackerEconomy, tie_tol: float = TIE_TOL) -> SignalingOutcome:
    """Defender-side evaluation: signal-averaged cracked mass and utility."""
    plan = best_response_signal(source, strength, matrix, economy, tie_tol)
    p_adv = 0.0
    u_adv = 0.0
    for sp in plan.plans:
        if sp.reachable:
            p_adv += sp.prob * sp.lam
            u_adv += sp.prob * sp.utility
    return SignalingOutcome(p_adv, u_adv, plan)


def _cracked_masks(inst: GameInstance, matrix: SignalMatrix, economy: AttackerEconomy,
                   tie_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (d, n) table: is class i cracked when signal y is sent?"""
    labels = _require_labels(inst, matrix.d)
    pr_sig = signal_probabilities(inst, None, matrix)
    n = inst.prob.shape[0]
    cracked = np.zeros((matrix.d, n), dtype=bool)
    for y in range(matrix.d):
        if pr_sig[y] == 0.0:
            continue
        q = inst.prob * matrix.rows[labels, y] / pr_sig[y]
        order = np.argsort(-q, kind="stable")
        m, _, _ = _kernels.best_budget(
            np.ascontiguousarray(q[order]), np.ascontiguousarray(inst.cnt[order]),
            economy.v, economy.k, tie_tol)
        cracked[y, order[:m]] = True
    return cracked, pr_sig


def lucky_unlucky(source: Source, strength, matrix: SignalMatrix,
                  economy: AttackerEconomy, tie_tol: float = TIE_TOL) -> tuple[float, float]:
    """Expected fractions of users hurt/saved by signaling.

    Returns (E[X_u], E[L_u]): X_u marks an unlucky user whose password is
    cracked only because of the signal, L_u a lucky user saved by it.
    P_adv_signal - P_adv_nosignal == E[X_u] - E[L_u] holds by construction.
    """
    inst = _as_instance(source, strength)
    labels = _require_labels(inst, matrix.d)
    base = best_response_no_signal(inst, economy, tie_tol)
    cracked, _ = _cracked_masks(inst, matrix, economy, tie_tol)
    mass = inst.class_mass
    sig_rows = matrix.rows[labels, :]  # (n, d): signal dist of each class
    e_x = 0.0
    e_l = 0.0
    for i in range(inst.prob.shape[0]):
        crack_prob = float(np.sum(sig_rows[i, cracked[:, i]]))
        if i < base.budget_classes:
            e_l += mass[i] * float(np.sum(sig_rows[i, ~cracked[:, i]]))
        else:
            e_x += mass[i] * crack_prob
    return float(e_x), float(e_l)


def utility_never_decreases(source: Source, strength, matrix: SignalMatrix,
                            economy: AttackerEconomy,
                            tie_tol: float = TIE_TOL) -> tuple[bool, float, float]:
    """Check the attacker's utility floor: signaling cannot hurt a rational
    attacker.  Returns (holds, u_signal, u_nosignal)."""
    inst = _as_instance(source, strength)
    outcome = evaluate_signaling(inst, None, matrix, economy, tie_tol)
    base = best_response_no_signal(inst, economy, tie_tol)
    return outcome.u_adv >= base.u_adv - tie_tol, outcome.u_adv, base.u_adv
