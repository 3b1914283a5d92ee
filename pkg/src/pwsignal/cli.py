"""Command-line interface.

Subcommands mirror the library layers: corpus compaction, strength labeling,
DP sketch build/extract, single-point solving and evaluation, v/k sweeps,
fixed-matrix robustness runs, attack reports, and an authentication-server
demo.  Exit codes: 0 on success, 1 on a fatal error, 2 when some sweep
points failed but the run produced partial results.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .authsim import AuthServer, make_hash_fn
from .corpus import load_frequency_corpus, load_plaintext
from .dpsketch import DPCountSketch
from .errors import PwsignalError
from .experiments import (SweepSpec, attack_report, build_sketch, point_seed,
                          rows_to_csv, run_robustness, run_sweep, _member_names)
from .game import AttackerEconomy, SignalMatrix, best_response_no_signal, evaluate_signaling, lucky_unlucky
from .optimizer import OptimizerConfig, gen_sig_mat
from .strength import label_strength, label_strength_top_k

logger = logging.getLogger(__name__)


def _load_corpus(args):
    if getattr(args, "plaintext", False):
        return load_plaintext(args.corpus)
    return load_frequency_corpus(args.corpus)


def _emit(text: str, out_path) -> None:
    if out_path and out_path != "-":
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_vk_list(raw: str) -> list[float]:
    return [float(tok) for tok in raw.replace(",", " ").split()]


def cmd_corpus_compact(args) -> int:
    ecl = _load_corpus(args)
    _emit(ecl.to_text(), args.out)
    return 0


def cmd_strength_label(args) -> int:
    ecl = _load_corpus(args)
    if args.top_k is not None:
        thresholds = label_strength_top_k(ecl, args.levels, args.top_k)
    else:
        thresholds = label_strength(ecl, args.levels)
    _emit(thresholds.to_text(), args.out)
    return 0


def cmd_sketch_build(args) -> int:
    ecl = _load_corpus(args)
    sketch = build_sketch(ecl, args.sketch_width, args.sketch_depth,
                          args.epsilon, args.seed)
    sketch.save(args.out)
    logger.info("sketch %dx%d (b=%g) written to %s",
                sketch.depth, sketch.width, sketch.scale_b, args.out)
    return 0


def cmd_sketch_extract(args) -> int:
    sketch = DPCountSketch.load(args.sketch)
    ecl = sketch.extract_noisy_corpus(args.drop_threshold)
    _emit(ecl.to_text(), args.out)
    return 0


def cmd_solve(args) -> int:
    ecl = _load_corpus(args)
    thresholds = label_strength(ecl, args.levels)
    econ = AttackerEconomy(v=args.vk, k=1.0)
    config = OptimizerConfig(population_size=args.population, iterations=args.iters,
                             seed=point_seed(args.seed, args.vk))
    matrix = gen_sig_mat(ecl, thresholds, econ, args.levels, config)
    _emit(matrix.to_text(), args.out)
    return 0


def cmd_evaluate(args) -> int:
    ecl = _load_corpus(args)
    matrix = SignalMatrix.read(args.matrix)
    if args.levels is not None and args.levels != matrix.d:
        raise PwsignalError(f"matrix is {matrix.d}x{matrix.d} but --levels {args.levels} given")
    thresholds = label_strength(ecl, matrix.d)
    econ = AttackerEconomy(v=args.vk, k=1.0)
    base = best_response_no_signal(ecl, econ)
    outcome = evaluate_signaling(ecl, thresholds, matrix, econ)
    e_x, e_l = lucky_unlucky(ecl, thresholds, matrix, econ)
    lines = [
        f"p_nosignal = {base.p_adv!r}",
        f"p_signal = {outcome.p_adv!r}",
        f"improvement = {base.p_adv - outcome.p_adv!r}",
        f"e_unlucky = {e_x!r}",
        f"e_lucky = {e_l!r}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    ecl = _load_corpus(args)
    spec = SweepSpec(vk_values=tuple(_parse_vk_list(args.vk_list)),
                     d=args.levels, iterations=args.iters, seed=args.seed,
                     mode=args.mode, top_k=args.top_k,
                     sketch_width=args.sketch_width, sketch_depth=args.sketch_depth,
                     epsilon=args.epsilon, drop_threshold=args.drop_threshold,
                     monotonic_repair=args.monotonic_repair,
                     population_size=args.population)
    rows = run_sweep(ecl, spec)
    _emit(rows_to_csv(rows), args.out)
    return 2 if any(r.error for r in rows) else 0


def cmd_robustness(args) -> int:
    ecl = _load_corpus(args)
    matrix = SignalMatrix.read(args.matrix)
    rows = run_robustness(ecl, matrix, _parse_vk_list(args.vk_list), d=args.levels)
    _emit(rows_to_csv(rows), args.out)
    return 2 if any(r.error for r in rows) else 0


def cmd_attack(args) -> int:
    ecl = _load_corpus(args)
    matrix = SignalMatrix.read(args.matrix) if args.matrix else None
    econ = AttackerEconomy(v=args.vk, k=1.0)
    _emit(attack_report(ecl, econ, d=args.levels, matrix=matrix), args.out)
    return 0


def cmd_authsim_demo(args) -> int:
    ecl = _load_corpus(args)
    thresholds = label_strength(ecl, args.levels)
    matrix = SignalMatrix.read(args.matrix) if args.matrix else SignalMatrix.identity(args.levels)
    if matrix.d != args.levels:
        raise PwsignalError(f"matrix is {matrix.d}x{matrix.d} but --levels {args.levels} given")
    rng = np.random.default_rng(args.seed)

    freq_table = {}
    for i in range(ecl.n_classes):
        for name in _member_names(i, int(ecl.counts[i])):
            freq_table[name] = float(ecl.freqs[i])
    oracle = lambda pw: freq_table.get(pw, 0.0)

    server = AuthServer(thresholds, matrix, hash_fn=make_hash_fn(16),
                        freq_oracle=oracle, rng=rng)
    class_idx = rng.choice(ecl.n_classes, size=args.users, p=ecl.class_mass)
    out = [f"registering {args.users} users ({args.levels} levels)"]
    signal_counts = np.zeros(matrix.d, dtype=np.int64)
    for u, i in enumerate(class_idx):
        pw = f"c{i}m{int(rng.integers(int(ecl.counts[i])))}"
        rec = server.register(f"user{u:04d}", pw)
        signal_counts[rec.signal] += 1
    for y in range(matrix.d):
        out.append(f"  signal {y}: {int(signal_counts[y])} users")

    out.append("delayed signaling:")
    server.freq_oracle = None
    rec = server.register("late_user", "c0m0")
    out.append(f"  registered without oracle: {rec.to_line()}")
    server.freq_oracle = oracle
    server.login("late_user", "wrong-password")
    out.append("  failed login leaves signal unset: "
               f"{server.store.get('late_user').to_line()}")
    server.login("late_user", "c0m0")
    first = server.store.get("late_user").signal
    server.login("late_user", "c0m0")
    out.append(f"  successful login assigned signal {first} "
               f"(stable across further logins: {server.store.get('late_user').signal == first})")
    _emit("\n".join(out) + "\n", args.out)
    return 0


def _add_corpus_arg(p, plaintext_ok=True):
    p.add_argument("--corpus", required=True, help="corpus file path")
    if plaintext_ok:
        p.add_argument("--plaintext", action="store_true",
                       help="treat --corpus as a newline-delimited password list")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pwsignal",
                                     description="password strength signaling toolkit")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for info, -vv for debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_corpus = sub.add_parser("corpus", help="corpus utilities")
    sub_corpus = p_corpus.add_subparsers(dest="subcommand", required=True)
    p = sub_corpus.add_parser("compact", help="normalize a corpus to frequency/count classes")
    _add_corpus_arg(p)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_corpus_compact)

    p_strength = sub.add_parser("strength", help="strength level utilities")
    sub_strength = p_strength.add_subparsers(dest="subcommand", required=True)
    p = sub_strength.add_parser("label", help="derive level thresholds from a corpus")
    _add_corpus_arg(p)
    p.add_argument("--levels", type=int, default=7)
    p.add_argument("--top-k", type=int, default=None,
                   help="trust only the top-k ranked passwords")
    p.add_argument("--out")
    p.set_defaults(func=cmd_strength_label)

    p_sketch = sub.add_parser("sketch", help="DP count-min sketch utilities")
    sub_sketch = p_sketch.add_subparsers(dest="subcommand", required=True)
    p = sub_sketch.add_parser("build", help="populate a noisy sketch from a corpus")
    _add_corpus_arg(p)
    p.add_argument("--sketch-width", type=int, default=100_000_000)
    p.add_argument("--sketch-depth", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=2.0,
                   help="privacy budget (Laplace scale = depth/epsilon)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sketch_build)
    p = sub_sketch.add_parser("extract", help="read a noisy corpus out of a sketch")
    p.add_argument("--sketch", required=True)
    p.add_argument("--drop-threshold", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sketch_extract)

    p = sub.add_parser("solve", help="optimise a signaling matrix for one v/k")
    _add_corpus_arg(p)
    p.add_argument("--vk", type=float, required=True)
    p.add_argument("--levels", type=int, default=7)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evaluate", help="evaluate a fixed matrix at one v/k")
    _add_corpus_arg(p)
    p.add_argument("--vk", type=float, required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="optimise across a list of v/k values")
    _add_corpus_arg(p)
    p.add_argument("--vk-list", required=True, help="comma-separated v/k values")
    p.add_argument("--levels", type=int, default=7)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=20)
    p.add_argument("--mode", choices=("perfect", "imperfect", "online"), default="perfect")
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--sketch-width", type=int, default=100_000_000)
    p.add_argument("--sketch-depth", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=2.0)
    p.add_argument("--drop-threshold", type=float, default=0.5)
    p.add_argument("--monotonic-repair", action="store_true",
                   help="reuse matrices from lower v/k points when they do better")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("robustness", help="evaluate one fixed matrix across v/k values")
    _add_corpus_arg(p)
    p.add_argument("--vk-list", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("attack", help="best-response report at one v/k")
    _add_corpus_arg(p)
    p.add_argument("--vk", type=float, required=True)
    p.add_argument("--levels", type=int, default=7)
    p.add_argument("--matrix", default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_attack)

    p_auth = sub.add_parser("authsim", help="authentication server simulator")
    sub_auth = p_auth.add_subparsers(dest="subcommand", required=True)
    p = sub_auth.add_parser("demo", help="register/login walkthrough with signaling")
    _add_corpus_arg(p)
    p.add_argument("--levels", type=int, default=7)
    p.add_argument("--matrix", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--users", type=int, default=50)
    p.add_argument("--out")
    p.set_defaults(func=cmd_authsim_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PwsignalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
