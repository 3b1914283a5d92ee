"""Strategic password-strength signaling toolkit.

Model a defender who publishes noisy per-account strength signals and a
rational attacker who best-responds to them; search for the signaling matrix
that minimises the cracked fraction; feed the pipeline from exact corpora or
from a differentially private count-min sketch; and simulate the
registration/login surface of an authentication server that deploys it.
"""

from .corpus import EmpiricalDistribution, EquivalenceClassList, load_frequency_corpus, load_plaintext
from .dpsketch import DPCountSketch, dims_for_error
from .errors import (DomainError, EmptyCorpusError, ParseError, PwsignalError,
                     UnreachableSignalError, UserExistsError)
from .game import (AttackerEconomy, AttackPlan, GameInstance, NoSignalResponse,
                   SignalMatrix, SignalPlan, SignalingOutcome, TIE_TOL,
                   best_response_no_signal, best_response_signal, evaluate_signaling,
                   lucky_unlucky, posterior, signal_probabilities, utility_never_decreases)
from .optimizer import MinimizeResult, OptimizerConfig, gen_sig_mat, minimize, simplex_repair
from .strength import StrengthThresholds, label_strength, label_strength_top_k
from .authsim import (AccountRecord, AuthServer, LoginResult, RecordStore,
                      make_hash_fn, sample_signal)
from .experiments import (SweepRow, SweepSpec, attack_report, build_sketch,
                          point_seed, rows_to_csv, run_robustness, run_sweep)

__version__ = "0.1.0"

__all__ = [
    "AccountRecord", "AttackPlan", "AttackerEconomy", "AuthServer",
    "DPCountSketch", "DomainError", "EmptyCorpusError", "EmpiricalDistribution",
    "EquivalenceClassList", "GameInstance", "LoginResult", "MinimizeResult",
    "NoSignalResponse", "OptimizerConfig", "ParseError", "PwsignalError",
    "RecordStore", "SignalMatrix", "SignalPlan", "SignalingOutcome",
    "StrengthThresholds", "SweepRow", "SweepSpec", "TIE_TOL",
    "UnreachableSignalError", "UserExistsError", "attack_report",
    "best_response_no_signal", "best_response_signal", "build_sketch",
    "dims_for_error", "evaluate_signaling", "gen_sig_mat", "label_strength",
    "label_strength_top_k", "load_frequency_corpus", "load_plaintext",
    "lucky_unlucky", "make_hash_fn", "minimize", "point_seed", "posterior", "rows_to_csv",
    "run_robustness", "run_sweep", "sample_signal", "signal_probabilities",
    "simplex_repair", "utility_never_decreases",
]
