"""Bounded searches for (strong) relation words in A and Q_{r/p}, plus the
Pell-type sequence of relation numbers converging to 2 + sqrt(2)."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from ._accel import kernel
from .identities import EXACT, FAIL, VerificationReport, by_name, verify
from .mat2 import A, GenWord, Mat2, TriangularClass, diag, eval_word, membership, triangular_class, upper
from .mat2 import DIAGONAL, NOT_TRIANGULAR, PRINCIPAL, UPPER

RELATION = "relation"
STRONG = "strong"


@dataclass(frozen=True)
class SearchBounds:
    max_syllables: int = 7
    max_abs_exponent: int = 12
    mode: str = RELATION

    def __post_init__(self) -> None:
        if self.max_syllables < 1 or self.max_abs_exponent < 1:
            raise ValueError("search bounds must be at least 1")
        if self.mode not in (RELATION, STRONG):
            raise ValueError(f"mode must be {RELATION!r} or {STRONG!r}")


@kernel
def _enumerate_from(p, r, S, E, strong, s0, e0, mats, out):
    """Depth-first enumeration of alternating words starting with syllable
    (s0, e0); symbol 0 is A, symbol 1 is Q.

    Matrices are kept integral: Q^f is stored as p * Q_{r/p}^f, so a word with
    n Q-syllables evaluates to p^n times the true matrix.  ``mats[d]`` holds the
    scaled product of the first d + 1 syllables.  Rows of ``out`` receive
    ``[length, e_1, ..., e_S]`` for every triangular hit.  Returns the number
    of hits, or -1 when ``out`` is too small.
    """
    cap = out.shape[0]
    count = 0
    choice = np.zeros(S, dtype=np.int64)
    nq = np.zeros(S, dtype=np.int64)
    # first syllable
    if s0 == 0:
        mats[0, 0] = 1
        mats[0, 1] = 0
        mats[0, 2] = e0
        mats[0, 3] = 1
        nq[0] = 0
    else:
        mats[0, 0] = p
        mats[0, 1] = e0 * r
        mats[0, 2] = 0
        mats[0, 3] = p
        nq[0] = 1
    if S == 1:
        return 0
    d = 1
    choice[1] = -1
    while d >= 1:
        choice[d] += 1
        if choice[d] >= 2 * E:
            d -= 1
            continue
        c = choice[d]
        e = c - E if c < E else c - E + 1
        sym = (s0 + d) % 2
        a0 = mats[d - 1, 0]
        b0 = mats[d - 1, 1]
        c0 = mats[d - 1, 2]
        d0 = mats[d - 1, 3]
        if sym == 0:
            mats[d, 0] = a0 + b0 * e
            mats[d, 1] = b0
            mats[d, 2] = c0 + d0 * e
            mats[d, 3] = d0
            nq[d] = nq[d - 1]
        else:
            mats[d, 0] = a0 * p
            mats[d, 1] = a0 * e * r + b0 * p
            mats[d, 2] = c0 * p
            mats[d, 3] = c0 * e * r + d0 * p
            nq[d] = nq[d - 1] + 1
        if mats[d, 1] == 0 or mats[d, 2] == 0:
            hit = True
            if strong:
                scale = mats[d, 0] - mats[d, 0] + 1
                for _ in range(nq[d]):
                    scale = scale * p
                aa = mats[d, 0]
                if aa < 0:
                    aa = -aa
                hit = aa != scale
            if hit:
                if count >= cap:
                    return -1
                out[count, 0] = d + 1
                out[count, 1] = e0
                for t in range(1, d + 1):
                    ct = choice[t]
                    out[count, t + 1] = ct - E if ct < E else ct - E + 1
                for t in range(d + 2, S + 1):
                    out[count, t] = 0
                count += 1
        if d + 1 < S:
            d += 1
            choice[d] = -1
    return count


def _fits_int64(p: int, r: int, S: int, E: int) -> bool:
    m0 = max(p, E * r, E, 1) + p
    return (2 * m0) ** S < 2**62


def _run_prefix(p: int, r: int, S: int, E: int, strong: bool, s0: int, e0: int) -> np.ndarray:
    wide = not _fits_int64(p, r, S, E)
    cap = 256
    while True:
        out = np.zeros((cap, S + 1), dtype=np.int64)
        if wide:
            mats = np.zeros((S, 4), dtype=object)
            n = _enumerate_from.py_func(p, r, S, E, strong, s0, e0, mats, out)
        else:
            mats = np.zeros((S, 4), dtype=np.int64)
            n = _enumerate_from(p, r, S, E, strong, s0, e0, mats, out)
        if n >= 0:
            return out[:n]
        cap *= 4


@dataclass(frozen=True)
class Witness:
    word: GenWord
    shape: TriangularClass
    matrix: Mat2

    def as_dict(self) -> dict:
        return {
            "word": str(self.word),
            "shape": self.shape.shape,
            "k": self.shape.k,
            "sign": self.shape.sign,
            "strong": self.shape.strong,
            "matrix": str(self.matrix),
        }


def search_witness(p: int, r: int, bounds: SearchBounds, workers: int = 1) -> list[Witness]:
    """All alternating words in A and Q = Q_{r/p} within ``bounds`` that use
    both symbols and evaluate to a triangular matrix.

    Ordered by syllable length, then first symbol (A before Q), then the
    exponent sequence.  The result does not depend on ``workers``.
    """
    if gcd(p, r) != 1:
        raise ValueError(f"gcd({p}, {r}) != 1")
    S, E = bounds.max_syllables, bounds.max_abs_exponent
    strong = bounds.mode == STRONG
    exps = [e for e in range(-E, E + 1) if e]
    prefixes = [(s0, e0) for s0 in (0, 1) for e0 in exps]
    job = lambda se: _run_prefix(p, r, S, E, strong, se[0], se[1])
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(job, prefixes))
    else:
        chunks = [job(se) for se in prefixes]
    keyed = []
    for (s0, _), rows in zip(prefixes, chunks):
        for row in rows:
            n = int(row[0])
            keyed.append(((n, s0, tuple(int(x) for x in row[1 : n + 1])), s0))
    keyed.sort()
    table = {"A": A, "Q": upper(Fraction(r, p))}
    out = []
    for (n, s0, es), _ in keyed:
        syms = ("A", "Q") if s0 == 0 else ("Q", "A")
        w = GenWord.build(("A", "Q"), [(syms[i % 2], e) for i, e in enumerate(es)])
        m = eval_word(w, table)
        cls = triangular_class(m, p)
        if not cls.triangular or (strong and not cls.strong):  # pragma: no cover
            raise AssertionError(f"kernel reported {w} but exact evaluation disagrees")
        out.append(Witness(w, cls, m))
    return out


# ---------------------------------------------------------------------------
# Pell machinery


@dataclass(frozen=True)
class PellState:
    X: int
    Y: int

    def __post_init__(self) -> None:
        if self.X * self.X - 2 * self.Y * self.Y not in (1, -1):
            raise ValueError(f"({self.X}, {self.Y}) does not satisfy X^2 - 2Y^2 = +-1")

    def step(self) -> "PellState":
        return PellState(3 * self.X + 4 * self.Y, 2 * self.X + 3 * self.Y)


def pell_state(n: int) -> PellState:
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return PellState(1, 1)
    s = PellState(3, 2)
    for _ in range(n - 2):
        s = s.step()
    return s


def pell_q(n: int) -> Fraction:
    """q_1 = 3 and q_n = 2 + X/Y along the norm +1 orbit of (3, 2)."""
    if n == 1:
        return Fraction(3)
    s = pell_state(n)
    return 2 + Fraction(s.X, s.Y)


def a_seq(n: int) -> int:
    """a(1) = 0, a(2) = 2, a(n) = 34 a(n-1) - a(n-2) - 8."""
    if n < 1:
        raise ValueError("n must be positive")
    prev, cur = 0, 2
    if n == 1:
        return prev
    for _ in range(n - 2):
        prev, cur = cur, 34 * cur - prev - 8
    return cur


@dataclass(frozen=True)
class PellCheck:
    n: int
    q: Fraction
    a: int
    word: GenWord
    matrix: Mat2
    shape: str

    @property
    def ok(self) -> bool:
        """A triangular product of this shape commutes with a generator
        power, so it is a relation witness whichever side is zero."""
        return self.shape != NOT_TRIANGULAR

    @property
    def upper(self) -> bool:
        return self.shape in (UPPER, DIAGONAL)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "q": f"{self.q.numerator}/{self.q.denominator}" if self.q.denominator != 1 else str(self.q.numerator),
            "a": self.a,
            "word": str(self.word),
            "matrix": str(self.matrix),
            "shape": self.shape,
            "upper": self.upper,
            "verdict": "pass" if self.ok else "fail",
        }


def pell_witness_check(n: int) -> PellCheck:
    """Q^a (A^-1 Q)^3 A^-1 Q^a with Q = Q_{q_n} and a = a(n)."""
    q, a = pell_q(n), a_seq(n)
    w = GenWord.build(("A", "Q"), [("Q", a)] + [("A", -1), ("Q", 1)] * 3 + [("A", -1), ("Q", a)])
    m = eval_word(w, {"A": A, "Q": upper(q)})
    return PellCheck(n, q, a, w, m, triangular_class(m).shape)


def diamond_checks() -> list[VerificationReport]:
    """The diag(-8, -1/8) identity in <X_{3/2}, Y_{3/2}> and the congruence
    facts around it (membership in the level-3 principal subgroup of SL2(Z[1/2]))."""
    reports = [verify(by_name("diamond-3/2"), 2, 3)]
    facts = [
        ("diamond-minus8-in-principal", diag(-8), True),
        ("diamond-plus8-not-in-principal", diag(8), False),
        ("diamond-coset-rep-4", diag(4), True),
        ("diamond-coset-rep-16", diag(16), True),
    ]
    for name, m, want in facts:
        got = membership(m, 2, 3, PRINCIPAL)
        reports.append(
            VerificationReport(
                name, 2, 3, None, EXACT if got == want else FAIL, m, m,
                in_gamma1bar=membership(m, 2, 3),
                note=f"membership in the principal congruence subgroup is {got}, expected {want}",
            )
        )
    return reports
