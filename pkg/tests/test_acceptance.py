"""Acceptance gate: eight end-to-end checks over the whole toolkit.

Each test records one PASS/FAIL/SKIPPED line for its criterion and asserts
the same condition, so a printed FAIL always comes with a failing test.  The
lines are printed immediately (to the unbuffered real stdout) and collected
in ANNOUNCEMENTS, which conftest replays in the terminal summary so every
criterion's verdict is visible even though pytest captures passing tests'
output.

Criterion 6 needs a large leaked-corpus file and is skipped unless the
ROCKYOU_CORPUS_PATH environment variable points at one.
"""

import os
import sys

import numpy as np
import pytest
import scipy.stats

from pwsignal import (
    AttackerEconomy,
    AuthServer,
    DPCountSketch,
    EquivalenceClassList,
    GameInstance,
    LoginResult,
    OptimizerConfig,
    RecordStore,
    SignalMatrix,
    StrengthThresholds,
    best_response_no_signal,
    best_response_signal,
    evaluate_signaling,
    gen_sig_mat,
    label_strength,
    load_frequency_corpus,
    lucky_unlucky,
    minimize,
    point_seed,
    posterior,
    signal_probabilities,
    utility_never_decreases,
)

from conftest import folded_geometric, random_game, weak_rest_labels
from oracles import no_signal_oracle, signal_oracle


ANNOUNCEMENTS: list[str] = []


def record(num: int, label: str, status: str) -> None:
    line = f"[acceptance] criterion {num} ({label}): {status}"
    ANNOUNCEMENTS.append(line)
    print(line, file=sys.__stdout__, flush=True)


def announce(num: int, label: str, failures) -> None:
    record(num, label, "PASS" if not failures else "FAIL: " + "; ".join(failures))


def geometric_game():
    ecl = folded_geometric()
    inst = GameInstance(ecl.probabilities, ecl.counts.astype(np.float64),
                        weak_rest_labels())
    matrix = SignalMatrix([[0.5, 0.5], [0.0, 1.0]])
    return inst, matrix


def test_criterion_1_closed_form_two_level_game():
    failures = []
    inst, matrix = geometric_game()

    out = evaluate_signaling(inst, None, matrix, AttackerEconomy(2.1, 1.0))
    if abs(out.p_adv - 0.25) > 2.0**-28:
        failures.append(f"v/k=2.1: cracked fraction {out.p_adv!r}, expected 0.25")

    q = posterior(inst, None, matrix, 1)
    if abs(q[0] - 1.0 / 3.0) > 1e-12:
        failures.append(f"posterior of top password given weak signal {q[0]!r}, "
                        "expected 1/3")

    p_high = evaluate_signaling(inst, None, matrix, AttackerEconomy(3.0, 1.0)).p_adv
    if p_high < 1.0 - 2.0**-29:
        failures.append(f"v/k=3: cracked fraction {p_high!r}, expected ~1")

    even = AttackerEconomy(2.0, 1.0)
    p_even_base = best_response_no_signal(inst, even).p_adv
    p_even_sig = evaluate_signaling(inst, None, matrix, even).p_adv
    if p_even_base != 0.0 or p_even_sig != 0.0:
        failures.append(
            f"v/k=2 break-even: cracked fraction {p_even_base!r} without "
            f"signaling ({p_even_sig!r} with), expected 0.0; this build "
            "resolves attacker indifference adversarially (a zero-utility "
            "attack is taken, not declined), and the tail-folded corpus "
            "leaves the full-attack utility at +2^-30 rather than exactly 0")

    announce(1, "closed-form two-level game", failures)
    assert not failures, failures


def test_criterion_2_exhaustive_oracle_500_instances():
    failures = []
    rng = np.random.default_rng(20260814)
    for i in range(500):
        _, inst, matrix, vk = random_game(rng)
        econ = AttackerEconomy(vk, 1.0)

        base = best_response_no_signal(inst, econ)
        om, olam, outil = no_signal_oracle(inst.prob, inst.cnt, vk, 1.0)
        if base.budget_guesses != om:
            failures.append(f"instance {i}: prior budget {base.budget_guesses} != {om}")
            continue
        if abs(base.p_adv - olam) > 1e-12 or abs(base.u_adv - outil) > 1e-9:
            failures.append(f"instance {i}: prior value mismatch")
            continue

        plan = best_response_signal(inst, None, matrix, econ)
        _, plans_o, p_o, _ = signal_oracle(inst.prob, inst.cnt, inst.labels,
                                           matrix.rows, vk, 1.0)
        for y in range(matrix.d):
            sp = plan.plans[y]
            if plans_o[y] is None:
                if sp.reachable:
                    failures.append(f"instance {i} signal {y}: reachability mismatch")
                continue
            bm, blam, butil = plans_o[y]
            if sp.budget_guesses != bm:
                failures.append(f"instance {i} signal {y}: budget "
                                f"{sp.budget_guesses} != {bm}")
            elif abs(sp.lam - blam) > 1e-12 or abs(sp.utility - butil) > 1e-9:
                failures.append(f"instance {i} signal {y}: value mismatch")

    announce(2, "best response matches exhaustive oracle on 500 instances",
             failures[:5])
    assert not failures, failures[:5]


def test_criterion_3_optimizer_never_hurts_and_matches_grid():
    failures = []
    rng = np.random.default_rng(31415)
    grid = np.arange(0.0, 1.0 + 1e-9, 0.01)

    for i in range(50):
        ecl, _, _, vk = random_game(rng)
        d = 2 if i % 2 == 0 else 3
        thresholds = label_strength(ecl, d)
        inst = GameInstance.from_corpus(ecl, thresholds)
        econ = AttackerEconomy(vk, 1.0)

        cfg = OptimizerConfig(iterations=2000, seed=point_seed(777, vk) + i)
        matrix = gen_sig_mat(inst, None, econ, d, cfg)
        p_opt = evaluate_signaling(inst, None, matrix, econ).p_adv
        p_no = best_response_no_signal(inst, econ).p_adv
        if p_opt > p_no + 1e-9:
            failures.append(f"corpus {i}: optimised {p_opt!r} above baseline {p_no!r}")
            continue

        if d == 2:
            best_grid = np.inf
            for a in grid:
                for b in grid:
                    m = SignalMatrix([[a, 1.0 - a], [b, 1.0 - b]])
                    p = evaluate_signaling(inst, None, m, econ).p_adv
                    if p < best_grid:
                        best_grid = p
            if p_opt > best_grid + 0.01:
                failures.append(f"corpus {i}: optimised {p_opt:.6f} worse than "
                                f"grid minimum {best_grid:.6f} by more than 0.01")

    announce(3, "matrix search never hurts and matches a fine grid", failures)
    assert not failures, failures


def test_criterion_4_optimizer_test_functions():
    failures = []

    def quadratic(x):
        return float(np.sum((x - 0.3) ** 2))

    def sphere(x):
        return float(np.sum(x**2))

    res_q = minimize(quadratic, 6, OptimizerConfig(iterations=5000, seed=0))
    if res_q.cost >= 1e-8:
        failures.append(f"quadratic cost {res_q.cost!r} >= 1e-8")

    res_s = minimize(sphere, 6, OptimizerConfig(iterations=5000, seed=0))
    if res_s.cost >= 1e-6:
        failures.append(f"sphere cost {res_s.cost!r} >= 1e-6")

    rerun = minimize(quadratic, 6, OptimizerConfig(iterations=5000, seed=0))
    if rerun.cost != res_q.cost or not np.array_equal(rerun.x, res_q.x):
        failures.append("same-seed rerun is not bit-identical")

    announce(4, "minimiser accuracy and determinism", failures)
    assert not failures, failures


def test_criterion_5_sketch_guarantees():
    failures = []

    rng = np.random.default_rng(99)
    underestimates = 0
    for t in range(10_000):
        sk = DPCountSketch(int(rng.integers(8, 64)), int(rng.integers(1, 5)),
                           seed=int(rng.integers(0, 2**31)))
        counts = {}
        for _ in range(int(rng.integers(1, 20))):
            item = f"i{rng.integers(0, 12)}"
            counts[item] = counts.get(item, 0) + 1
            sk.insert(item)
        for item, true_count in counts.items():
            if sk.estimate(item) < true_count:
                underestimates += 1
    if underestimates:
        failures.append(f"{underestimates} underestimates without noise")

    sk = DPCountSketch(2000, 10, epsilon=2.0, seed=42)
    if sk.scale_b != 5.0:
        failures.append(f"noise scale {sk.scale_b!r}, expected 5.0 for depth 10, eps 2")
    stat = scipy.stats.kstest(sk.table.ravel(), "laplace", args=(0.0, 5.0))
    if stat.pvalue <= 0.01:
        failures.append(f"KS test rejects Laplace(0, 5): p = {stat.pvalue:.4g}")

    announce(5, "sketch never underestimates and noise is Laplace(0, depth/eps)",
             failures)
    assert not failures, failures


def test_criterion_6_leaked_corpus_baselines():
    corpus_path = os.environ.get("ROCKYOU_CORPUS_PATH")
    if not corpus_path:
        record(6, "leaked-corpus baselines",
               "SKIPPED (set ROCKYOU_CORPUS_PATH to a frequency file to enable)")
        pytest.skip("set ROCKYOU_CORPUS_PATH to a leaked-corpus frequency "
                    "file to enable")

    failures = []
    ecl = load_frequency_corpus(corpus_path)

    expected = {1e5: 0.19928784701761645, 1e6: 0.37663407864237897}
    for vk, want in expected.items():
        got = best_response_no_signal(ecl, AttackerEconomy(vk, 1.0)).p_adv
        if abs(got - want) > 1e-9:
            failures.append(f"v/k={vk:g}: cracked fraction {got!r}, expected {want!r}")

    thresholds = label_strength(ecl, 7)
    inst = GameInstance.from_corpus(ecl, thresholds)
    econ = AttackerEconomy(1e6, 1.0)
    cfg = OptimizerConfig(iterations=5000, seed=point_seed(0, 1e6))
    matrix = gen_sig_mat(inst, None, econ, 7, cfg)
    p_opt = evaluate_signaling(inst, None, matrix, econ).p_adv
    if p_opt > 0.36:
        failures.append(f"7-level optimised cracked fraction {p_opt!r} > 0.36")

    announce(6, "leaked-corpus baselines", failures)
    assert not failures, failures


def test_criterion_7_conservation_and_utility_floor():
    failures = []
    rng = np.random.default_rng(271828)
    for i in range(200):
        _, inst, matrix, vk = random_game(rng)
        econ = AttackerEconomy(vk, 1.0)

        pr = signal_probabilities(inst, None, matrix)
        if abs(float(pr.sum()) - 1.0) > 1e-9:
            failures.append(f"instance {i}: signal probabilities sum to {pr.sum()!r}")

        p_s = evaluate_signaling(inst, None, matrix, econ).p_adv
        p_no = best_response_no_signal(inst, econ).p_adv
        e_x, e_l = lucky_unlucky(inst, None, matrix, econ)
        if abs((p_s - p_no) - (e_x - e_l)) > 1e-9:
            failures.append(f"instance {i}: unlucky/lucky bookkeeping off")

        holds, u_s, u_no = utility_never_decreases(inst, None, matrix, econ)
        if not holds:
            failures.append(f"instance {i}: attacker utility fell {u_no!r} -> {u_s!r}")

    announce(7, "probability bookkeeping and attacker-utility floor on 200 "
                "instances", failures[:5])
    assert not failures, failures[:5]


def test_criterion_8_registration_signal_statistics(tmp_path):
    failures = []
    thresholds = StrengthThresholds(2, np.array([6.0, 3.0]))
    matrix = SignalMatrix([[0.5, 0.5], [0.0, 1.0]])

    server = AuthServer(thresholds, matrix, freq_oracle=lambda pw: 6.0,
                        rng=np.random.default_rng(8))
    n = 10_000
    signals = [server.register(f"u{i}", "123456").signal for i in range(n)]
    frac0 = signals.count(0) / n
    if abs(frac0 - 0.5) > 0.02:
        failures.append(f"weak-level signal-0 fraction {frac0!r} outside 0.5 +/- 0.02")

    path = tmp_path / "accounts.tsv"
    store = RecordStore(path)
    late = AuthServer(thresholds, matrix, store=store,
                      rng=np.random.default_rng(9))
    late.register("late", "123456")
    if store.get("late").signal is not None:
        failures.append("signal assigned without a frequency oracle")
    late.freq_oracle = lambda pw: 6.0
    if late.login("late", "wrong") != LoginResult.FAIL:
        failures.append("wrong password accepted")
    if store.get("late").signal is not None:
        failures.append("failed login assigned a signal")
    for _ in range(3):
        if late.login("late", "123456") != LoginResult.SUCCESS:
            failures.append("correct password rejected")
    if store.get("late").signal is None:
        failures.append("successful login did not assign a signal")
    if len(path.read_text().splitlines()) != 2:
        failures.append("signal written more or less than exactly once")

    announce(8, "registration signal statistics and delayed assignment", failures)
    assert not failures, failures
