"""Authentication server simulator with per-account strength signals.

Accounts store (salt, hash, signal).  At registration the server grades the
password with a frequency oracle, looks up its strength level, and samples a
noisy signal from the signaling matrix row of that level; the signal is the
only thing an attacker ever sees.  Verification ignores the signal entirely.
If no oracle is available at registration the signal stays unset and is
sampled on the first successful login once an oracle is present (exactly
once) - the "delayed signaling" deployment path.
"""

from __future__ import annotations

import enum
import hashlib
import hmac
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, ParseError, UserExistsError
from .game import SignalMatrix
from .strength import StrengthThresholds


class LoginResult(enum.Enum):
    SUCCESS = "success"
    FAIL = "fail"


def make_hash_fn(iterations: int = 1000):
    """Iterated salted hash; the iteration count stands in for a slow KDF."""
    if iterations < 1:
        raise DomainError("iterations must be >= 1")

    def hash_fn(salt: bytes, password: str) -> bytes:
        digest = hashlib.blake2b(salt + password.encode("utf-8"), digest_size=32).digest()
        for _ in range(iterations - 1):
            digest = hashlib.blake2b(digest, digest_size=32).digest()
        return digest

    return hash_fn


def sample_signal(row, r: float) -> int:
    """Inverse-CDF draw from one matrix row using r in (0, 1]."""
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or np.any(row < 0) or abs(row.sum() - 1.0) > 1e-9:
        raise DomainError("signal row must be a probability vector")
    if not 0.0 < r <= 1.0:
        raise DomainError("r must lie in (0, 1]")
    cum = np.cumsum(row)
    idx = int(np.searchsorted(cum, r, side="left"))
    if idx >= row.shape[0]:  # float dust: cum[-1] slightly below 1
        idx = int(np.flatnonzero(row > 0)[-1])
    return idx


@dataclass(frozen=True)
class AccountRecord:
    user: str
    salt: bytes
    signal: int | None
    pw_hash: bytes

    def to_line(self) -> str:
        sig = "-" if self.signal is None else str(self.signal)
        return f"{self.user}\t{self.salt.hex()}\t{sig}\t{self.pw_hash.hex()}"

    @classmethod
    def from_line(cls, line: str, lineno=None) -> "AccountRecord":
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", line=lineno)
        user, salt_hex, sig, hash_hex = fields
        try:
            salt = bytes.fromhex(salt_hex)
            pw_hash = bytes.fromhex(hash_hex)
            signal = None if sig == "-" else int(sig)
        except ValueError:
            raise ParseError(f"malformed record for user {user!r}", line=lineno) from None
        return cls(user, salt, signal, pw_hash)


class RecordStore:
    """In-memory account index, optionally mirrored to an append-only file.

    Updates append a fresh line; on load the last line per user wins.
    """

    def __init__(self, path=None):
        self._records: dict[str, AccountRecord] = {}
        self._path = path

    def __len__(self):
        return len(self._records)

    def __contains__(self, user):
        return user in self._records

    def users(self):
        return list(self._records)

    def get(self, user: str) -> AccountRecord | None:
        return self._records.get(user)

    def _append(self, record: AccountRecord) -> None:
        if self._path is not None:
            with open(self._path, "a", encoding="utf-8") as fh:
                fh.write(record.to_line() + "\n")

    def add(self, record: AccountRecord) -> None:
        if record.user in self._records:
            raise UserExistsError(f"user {record.user!r} already registered")
        if "\t" in record.user or "\n" in record.user or not record.user:
            raise DomainError("usernames must be non-empty and tab/newline free")
        self._records[record.user] = record
        self._append(record)

    def set_signal(self, user: str, signal: int) -> AccountRecord:
        rec = self._records[user]
        rec = replace(rec, signal=int(signal))
        self._records[user] = rec
        self._append(rec)
        return rec

    @classmethod
    def load(cls, path) -> "RecordStore":
        store = cls(path=None)
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                rec = AccountRecord.from_line(line, lineno=lineno)
                store._records[rec.user] = rec
        store._path = path
        return store


class AuthServer:
    """Registration and login against a RecordStore, with signaling.

    freq_oracle maps a password string to a frequency estimate; leave it
    None to defer signal assignment to the first successful login.
    """

    def __init__(self, thresholds: StrengthThresholds, matrix: SignalMatrix,
                 store: RecordStore | None = None, hash_fn=None,
                 freq_oracle=None, rng=None):
        if thresholds.d != matrix.d:
            raise DomainError("thresholds and matrix disagree on level count")
        self.thresholds = thresholds
        self.matrix = matrix
        self.store = store if store is not None else RecordStore()
        self.hash_fn = hash_fn if hash_fn is not None else make_hash_fn(1)
        self.freq_oracle = freq_oracle
        self.rng = rng if rng is not None else np.random.default_rng()

    def _draw_signal(self, password: str) -> int:
        level = self.thresholds.get_strength(self.freq_oracle(password))
        r = 1.0 - self.rng.random()  # in (0, 1]
        return sample_signal(self.matrix.rows[level], r)

    def register(self, user: str, password: str) -> AccountRecord:
        if user in self.store:
            raise UserExistsError(f"user {user!r} already registered")
        salt = self.rng.bytes(16)
        pw_hash = self.hash_fn(salt, password)
        signal = self._draw_signal(password) if self.freq_oracle is not None else None
        record = AccountRecord(user, salt, signal, pw_hash)
        self.store.add(record)
        return record

    def login(self, user: str, password: str) -> LoginResult:
        record = self.store.get(user)
        if record is None:
            return LoginResult.FAIL
        if not hmac.compare_digest(self.hash_fn(record.salt, password), record.pw_hash):
            return LoginResult.FAIL
        if record.signal is None and self.freq_oracle is not None:
            self.store.set_signal(user, self._draw_signal(password))
        return LoginResult.SUCCESS
