"""Constructive reduction of matrices in the congruence subgroup to words in
A, Q = Q_{r/p} and U = U_p^k, and completion of strong relation words to
exact powers of U_p.

The direct pipeline follows the prime-modulus argument: clear denominators
with U, make b/r odd and prime to p, move the upper-left entry to a prime q
in an arithmetic progression (p a primitive root mod q), conjugate the
upper-right entry to +-r using a discrete logarithm mod q, finish with two
Euclid steps, and identify the remaining lower unipotent as a U-conjugate of
an A-power.

That pipeline needs the prime q and the discrete logarithm to stay small, so
inputs with large or non-integral entries go through a Euclidean algorithm
over Z[1/p] instead: a += x b and b += y a with x in Z[1/p] and y in
r Z[1/p] are both available as U-conjugates of A- and Q-powers, and picking
the power of p that minimizes the p-free remainder makes the algorithm
contract even for r > 3.  The diagonal that remains is small and is handled
by the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterator

from .arith import _strip, int_valuation, p_valuation
from .mat2 import A, GenWord, Mat2, U, eval_word, triangular_class, upper, why_not_member
from .numtheory import (
    APSearchSpec,
    Congruence,
    Predicate,
    PrimitiveRoot,
    discrete_log,
    is_prime,
    jacobi,
    mult_order,
)

ALPHABET = ("A", "Q", "U")


class ReductionError(ValueError):
    """A stage could not proceed.  ``steps`` is the partial audit trail."""

    def __init__(self, message: str, steps: list | None = None):
        super().__init__(message)
        self.steps = list(steps or [])


class NotInSubgroupError(ReductionError):
    pass


class ArtinSearchFailure(ReductionError):
    """No admissible prime was found within the search bound."""


Step = tuple  # (rule name, params dict)


@dataclass(frozen=True)
class Context:
    p: int
    r: int
    k: int

    def __post_init__(self) -> None:
        if gcd(self.p, self.r) != 1:
            raise ValueError(f"gcd({self.p}, {self.r}) != 1")
        if self.k < 1:
            raise ValueError("k must be positive")

    @property
    def u(self) -> int:
        return self.p**self.k

    @property
    def left_step(self) -> int:
        """Smallest i > 0 with U^i = 1 mod r, so left factors stay in the subgroup."""
        return mult_order(self.u, self.r)

    def table(self) -> dict[str, Mat2]:
        return {"A": A, "Q": upper(Fraction(self.r, self.p)), "U": U(self.p) ** self.k}


def _w(pairs) -> GenWord:
    return GenWord.build(ALPHABET, pairs)


_EMPTY = GenWord.empty(ALPHABET)


@dataclass(frozen=True)
class StageResult:
    """``matrix = eval(left) * input * eval(right)``."""

    matrix: Mat2
    left: GenWord = _EMPTY
    right: GenWord = _EMPTY
    steps: tuple = ()


class _Tracker:
    """Current matrix ``M = eval(left) * target * eval(right)``."""

    def __init__(self, target: Mat2, ctx: Context):
        self.ctx = ctx
        self.table = ctx.table()
        self.m = target
        self.left = _EMPTY
        self.right = _EMPTY
        self.steps: list[Step] = []

    def _ev(self, w: GenWord) -> Mat2:
        return eval_zp(w, self.ctx)

    def mul_left(self, w: GenWord) -> None:
        if w:
            self.m = self._ev(w) * self.m
            self.left = w * self.left

    def mul_right(self, w: GenWord) -> None:
        if w:
            self.m = self.m * self._ev(w)
            self.right = self.right * w

    def conj(self, w: GenWord) -> None:
        """M <- w M w^-1."""
        if w:
            self.mul_left(w)
            self.mul_right(w.inverse())

    def apply(self, res: StageResult) -> None:
        self.mul_left(res.left)
        self.mul_right(res.right)
        self.steps.extend(res.steps)
        if self.m != res.matrix:  # pragma: no cover - stage bookkeeping bug
            raise AssertionError("stage result disagrees with its words")


def _run(stage, m: Mat2, ctx: Context) -> StageResult:
    t = _Tracker(m, ctx)
    stage(t)
    return StageResult(t.m, t.left, t.right, tuple(t.steps))


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


# ---------------------------------------------------------------------------
# pipeline stages


def _clear(t: _Tracker) -> None:
    ctx, m = t.ctx, t.m
    i = j = 0
    va = p_valuation(m.a, ctx.p).v if m.a else 0
    vb = p_valuation(m.b, ctx.p).v if m.b else 0
    if va < 0:
        step = ctx.left_step
        i = step * _ceil_div(_ceil_div(-va, ctx.k), step)
    if m.b and vb + i * ctx.k < 0:
        j = _ceil_div(-(vb + i * ctx.k), 2 * ctx.k)
    t.mul_left(_w([("U", i)]))
    t.conj(_w([("U", j)]))
    t.steps.append(("clear-denominators", {"left_U": i, "conj_U": j}))


def clear_denominators(m: Mat2, p: int, r: int, k: int) -> StageResult:
    """Left multiply by U^i (i a multiple of the order of p^k mod r) and
    conjugate by U^j, both minimal, until the top row is integral."""
    return _run(_clear, m, Context(p, r, k))


def _normalize(t: _Tracker) -> None:
    ctx = t.ctx
    p, r, k = ctx.p, ctx.r, ctx.k
    Qr = lambda m: _w([("Q", p * m)])  # Q_r^m
    m = t.m
    if m.a.denominator != 1 or m.b.denominator != 1:
        raise ReductionError("normalize_b needs an integral top row", t.steps)
    if m.a == 0:
        t.mul_right(_w([("A", 1)]))
        t.steps.append(("normalize-b:a-nonzero", {"A": 1}))
    a, b = int(t.m.a), int(t.m.b)
    if b % r:
        raise NotInSubgroupError(f"upper-right entry {b} is not divisible by {r}", t.steps)
    bp = b // r
    if bp == 0:
        t.mul_right(Qr(1))
        t.steps.append(("normalize-b:b-nonzero", {"Q_r": 1}))
        bp = a
    if bp % p == 0:
        if a % p:
            t.mul_right(Qr(1))
            t.steps.append(("normalize-b:coprime", {"Q_r": 1}))
        else:
            if int_valuation(bp, p) < int_valuation(a, p):
                t.mul_right(_w([("A", 1)]))
                t.steps.append(("normalize-b:balance", {"A": 1}))
                a = int(t.m.a)
            va = int_valuation(a, p)
            alpha = a // p**va
            beta = bp // p**va
            j = _ceil_div(va, 2 * k)
            tt = 2 * k * j - va
            mod = p**tt
            m0 = (-beta * pow(alpha, -1, mod)) % mod if tt else 0
            if (beta + m0 * alpha) % (mod * p) == 0:
                m0 += mod
            t.mul_right(Qr(m0))
            t.conj(_w([("U", -j)]))
            t.steps.append(("normalize-b:valuation", {"Q_r": m0, "conj_U": -j}))
    a, bp = int(t.m.a), int(t.m.b) // r
    if bp % 2 == 0:
        for mm in (1, 3):
            if (bp + mm * a) % p:
                break
        t.mul_right(Qr(mm))
        t.steps.append(("normalize-b:parity", {"Q_r": mm}))
    a, bp = int(t.m.a), int(t.m.b) // r
    if bp % 2 == 0 or bp % p == 0:  # pragma: no cover - excluded by det = 1
        raise ReductionError(f"could not normalize b/r = {bp}", t.steps)


def normalize_b(m: Mat2, p: int, r: int, k: int = 1) -> StageResult:
    """Right multiply by Q_r-powers (and conjugate by U when p divides the
    whole top row) until b/r is odd and prime to p."""
    return _run(_normalize, m, Context(p, r, k))


CRITERIA = ("exact", "artin")


def _good_prime_extras(ctx: Context) -> tuple:
    k = ctx.k
    return (
        Congruence(3, 4),
        PrimitiveRoot(ctx.p),
        Predicate(f"p^{2 * k} generates the squares", lambda q: gcd(k, (q - 1) // 2) == 1),
    )


LOG_TABLE_BOUND = 1 << 20


def _conj_choice(ctx: Context, bp: int, q: int, bound: int | None = LOG_TABLE_BOUND) -> tuple[int, int] | None:
    """(sign, l) with b' p^{2kl} = sign (mod q) and l least, trying the
    Jacobi sign first.  None if neither sign is reachable."""
    g = pow(ctx.p, 2 * ctx.k, q)
    inv = pow(bp, -1, q)
    eps = (jacobi(bp, q) or 1) if q % 2 else 1
    for sign in (eps, -eps):
        try:
            ell = discrete_log(g, sign * inv, q, q - 1, bound)
        except OverflowError as exc:
            raise ReductionError(f"modulus {q} is too large for the discrete logarithm") from exc
        if ell is not None:
            return sign, ell
    return None


def _iter_good(ctx: Context, a: int, b: int, bound: int, criterion: str) -> Iterator[tuple[int, int]]:
    """(A-exponent, q) for every admissible candidate, in search order.

    ``artin``: a_n = a + n|b| (a_n = -(|b| n - a) when 4 | r) for n = 0..bound,
    |a_n| = q prime, q = 3 mod 4, p primitive mod q and gcd(k, (q-1)/2) = 1.
    ``exact``: a_n = a + n b for n = 0, 1, -1, 2, -2, ... (|n| <= bound),
    |a_n| = q prime and some +-b'^{-1} a power of p^{2k} mod q, which is all
    the next stage needs.
    """
    bp = b // ctx.r
    sgn = 1 if b > 0 else -1
    if criterion == "exact":
        ns = (n for m in range(bound + 1) for n in ((m,) if m == 0 else (m, -m)))
        for n in ns:
            v = abs(a + n * b)
            if v > 2 and v != ctx.p and is_prime(v) and _conj_choice(ctx, bp, v) is not None:
                yield n, v
        return
    negative = ctx.r % 4 == 0
    step = abs(b)
    spec = APSearchSpec(step, -a if negative else a, _good_prime_extras(ctx), bound)
    v = spec.offset
    for n in range(spec.bound + 1):
        if v > 1 and v != ctx.p and is_prime(v) and all(x(v) for x in spec.extras):
            yield (-n * sgn if negative else n * sgn), v
        v += step


def _find_good(t: _Tracker, bound: int, max_log: int | None, patience: int = 64, criterion: str = "exact") -> None:
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    ctx = t.ctx
    a, b = int(t.m.a), int(t.m.b)
    bp = b // ctx.r
    best = None
    seen = 0
    for n, q in _iter_good(ctx, a, b, bound, criterion):
        if max_log is None:
            best = (n, q, None)
            break
        ell = _conj_choice(ctx, bp, q)[1]
        if best is None or ell < best[2]:
            best = (n, q, ell)
        seen += 1
        if ell <= max_log or seen >= patience:
            break
    if best is None:
        raise ArtinSearchFailure(
            f"no admissible prime among a + n*b for n <= {bound} ({criterion} criterion)", t.steps
        )
    n, q, ell = best
    t.mul_right(_w([("A", n)]))
    t.steps.append(("find-good-a", {"A": n, "q": q, "criterion": criterion}))


def find_good_a(
    m: Mat2,
    p: int,
    r: int,
    k: int = 1,
    bound: int = 10**6,
    max_log: int | None = None,
    patience: int = 64,
    criterion: str = "artin",
) -> StageResult:
    """Right multiply by A^n so that a becomes an admissible prime modulus.

    With the ``artin`` criterion |a| is a prime q = 3 mod 4 (a < 0 when
    4 | r), p is primitive mod q and p^{2k} generates the squares mod q.
    The ``exact`` criterion searches n = 0, 1, -1, ... and only asks that
    q = |a_n| be prime with +-b'^{-1} a power of p^{2k} mod q.

    Without ``max_log`` the first admissible n is taken.  With it, the first
    candidate whose discrete logarithm in the next stage is at most
    ``max_log`` wins; failing that, the smallest logarithm among the first
    ``patience`` candidates.  This keeps U-exponents (and entry sizes) small.
    """
    t = _Tracker(m, Context(p, r, k))
    _find_good(t, bound, max_log, patience, criterion)
    return StageResult(t.m, t.left, t.right, tuple(t.steps))


def _conj_pm_r(t: _Tracker, bound: int | None) -> None:
    ctx = t.ctx
    a, b = int(t.m.a), int(t.m.b)
    q = abs(a)
    bp = b // ctx.r
    if q < 3 or gcd(bp, q) != 1:
        raise ReductionError(f"upper-left entry {a} is not usable as a modulus", t.steps)
    try:
        choice = _conj_choice(ctx, bp, q, LOG_TABLE_BOUND if bound is None else bound)
    except ReductionError as exc:
        raise ReductionError(str(exc), t.steps) from exc
    if choice is None:
        raise ReductionError(f"+-{bp}^-1 is not a power of {ctx.p}^{2 * ctx.k} mod {q}", t.steps)
    eps, ell = choice
    t.conj(_w([("U", ell)]))
    bp = int(t.m.b) // ctx.r
    mm, rem = divmod(eps - bp, a)
    if rem:  # pragma: no cover - congruence guaranteed by the discrete log
        raise AssertionError("discrete logarithm did not give a multiple")
    t.mul_right(_w([("Q", ctx.p * mm)]))
    t.steps.append(("conjugate-to-pm-r", {"conj_U": ell, "Q_r": mm, "sign": eps, "q": q}))


def conjugate_to_pm_r(m: Mat2, p: int, r: int, k: int = 1, bound: int | None = None) -> StageResult:
    """Conjugate by U^l and right multiply by a Q_r-power to make the
    upper-right entry exactly +-r.  The sign is the Jacobi symbol of b/r
    mod |a| when that one is reachable, the other sign otherwise."""
    return _run(lambda t: _conj_pm_r(t, bound), m, Context(p, r, k))


def _euclid(t: _Tracker, max_rounds: int) -> None:
    ctx = t.ctx
    r, p = ctx.r, ctx.p
    a, b = t.m.a, t.m.b
    if a.denominator != 1 or b.denominator != 1:
        raise ReductionError("euclid_reduce needs an integral top row", t.steps)
    a, b = int(a), int(b)
    if (a - 1) % r == 0 and abs(b) == r and r > 0:
        eps = b // r
        n = (1 - a) // (eps * r)
        t.mul_right(_w([("A", n)]))
        t.mul_right(_w([("Q", -eps * p)]))
        t.steps.append(("euclid", {"A": n, "Q_r": -eps}))
        return
    rounds = 0
    while int(t.m.b) != 0:
        rounds += 1
        if rounds > max_rounds:
            raise ReductionError("Euclid cascade did not terminate", t.steps)
        a, b = int(t.m.a), int(t.m.b)
        n = _round_div(1 - a, b) if abs(b) > 0 else 0
        if n:
            t.mul_right(_w([("A", n)]))
        a = int(t.m.a)
        if a == 0:
            raise ReductionError("Euclid cascade reached a zero pivot", t.steps)
        mq = _round_div(-int(t.m.b), r * a)
        if mq:
            t.mul_right(_w([("Q", p * mq)]))
        t.steps.append(("euclid", {"A": n, "Q_r": mq}))
    if t.m.a == -1 and r <= 2:
        # -I is in the subgroup at levels 1 and 2: (Q_r A^-1) has order 6 or 4
        t.mul_right(_w([("Q", p), ("A", -1)] * (3 if r == 1 else 2)))
        t.steps.append(("euclid:minus-identity", {}))
    if t.m.a != 1:
        raise ReductionError(f"Euclid cascade ended at upper-left {t.m.a}", t.steps)


def _round_div(x: int, y: int) -> int:
    q, rem = divmod(x, y)
    if 2 * abs(rem) > abs(y) or (2 * abs(rem) == abs(y) and q % 2):
        q += 1 if (rem > 0) == (y > 0) else 0
    return q


def euclid_reduce(m: Mat2, p: int, r: int, k: int = 1, max_rounds: int = 10_000) -> StageResult:
    """Right multiply by A- and Q-powers until the top row is (1, 0)."""
    return _run(lambda t: _euclid(t, max_rounds), m, Context(p, r, k))


def _final(t: _Tracker) -> GenWord:
    """The word for the remaining lower unipotent [[1,0],[c,1]]."""
    m, ctx = t.m, t.ctx
    if not (m.a == 1 and m.b == 0):  # pragma: no cover
        raise ReductionError("final step needs a lower unipotent matrix", t.steps)
    c = m.c
    if c == 0:
        t.steps.append(("final", {"A": 0, "conj_U": 0}))
        return _EMPTY
    vc = p_valuation(c, ctx.p).v
    j = max(0, _ceil_div(-vc, 2 * ctx.k))
    n = c * ctx.p ** (2 * ctx.k * j)
    if n.denominator != 1:  # pragma: no cover - excluded by membership
        raise NotInSubgroupError("lower-left entry outside Z[1/p]", t.steps)
    t.steps.append(("final", {"A": int(n), "conj_U": j}))
    return _w([("U", j), ("A", int(n)), ("U", -j)])


# ---------------------------------------------------------------------------
# certificates


def eval_zp(word: GenWord, ctx: Context) -> Mat2:
    """Evaluate a word over A, Q, U with integer arithmetic.

    The running product is kept as N / p^e with N integral; this is much
    faster than Fraction arithmetic for long certificates.
    """
    p, r, k = ctx.p, ctx.r, ctx.k
    idx = {s: i for i, s in enumerate(word.alphabet)}
    ia, iq, iu = idx.get("A"), idx.get("Q"), idx.get("U")
    a, b, c, d, e = 1, 0, 0, 1, 0
    for n, (sym, x) in enumerate(word.syllables):
        if sym == ia:
            # right multiply by [[1,0],[x,1]]
            a, c = a + b * x, c + d * x
        elif sym == iq:
            # [[p, x r],[0, p]] / p
            a, b, c, d = a * p, a * x * r + b * p, c * p, c * x * r + d * p
            e += 1
        elif sym == iu:
            s = k * abs(x)
            big = p ** (2 * s)
            if x > 0:
                a, c = a * big, c * big
            else:
                b, d = b * big, d * big
            e += s
        else:
            raise ValueError(f"unexpected symbol {word.alphabet[sym]!r}")
        if e > 64 and n % 16 == 0:
            a, b, c, d, e = _strip_common(a, b, c, d, e, p)
    den = Fraction(1, p**e) if e >= 0 else Fraction(p**-e)
    return Mat2(a * den, b * den, c * den, d * den)


def _strip_common(a, b, c, d, e, p):
    v = e
    for x in (a, b, c, d):
        if x and v:
            v = min(v, _strip(x, p)[0])
    if v > 0:
        f = p**v
        a, b, c, d, e = a // f, b // f, c // f, d // f, e - v
    return a, b, c, d, e


@dataclass(frozen=True)
class Certificate:
    """``word`` over A, Q, U (U bound to U_p^k) evaluating exactly to ``target``."""

    target: Mat2
    word: GenWord
    p: int
    r: int
    k: int
    steps: tuple = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.word.alphabet != ALPHABET:
            object.__setattr__(self, "word", self.word.over(ALPHABET))
        if eval_zp(self.word, Context(self.p, self.r, self.k)) != self.target:
            raise AssertionError("certificate does not evaluate to its target")

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "r": self.r,
            "k": self.k,
            "target": str(self.target),
            "word": str(self.word),
            "syllables": len(self.word),
            "steps": [[rule, params] for rule, params in self.steps],
        }


def _direct(target: Mat2, ctx: Context, bound: int, max_log: int | None, criterion: str = "exact") -> Certificate:
    t = _Tracker(target, ctx)
    m = t.m
    if m.a == 1 and m.b == 0:
        fin = _final(t)
        t.steps.insert(0, ("lower-unipotent", {}))
    else:
        _clear(t)
        _normalize(t)
        _find_good(t, bound, max_log, criterion=criterion)
        _conj_pm_r(t, None)
        _euclid(t, 4)
        fin = _final(t)
    word = t.left.inverse() * fin * t.right.inverse()
    return Certificate(target, word, ctx.p, ctx.r, ctx.k, tuple(t.steps))


# ---------------------------------------------------------------------------
# Euclid over Z[1/p] inside the subgroup


def _split(x: Fraction, p: int) -> tuple[int, int]:
    pv = p_valuation(x, p)
    return pv.v, int(pv.unit)


def _nearest(x: int, y: int) -> int:
    """x / y rounded to the nearest integer."""
    q, rem = divmod(x, y)
    if 2 * abs(rem) > abs(y):
        q += 1
    return q


def _lower_pairs(n: int, e: int, ctx: Context) -> list:
    """L_x with x = n p^e as U^-j A^N U^j."""
    j = e // (2 * ctx.k)
    return [("U", -j), ("A", n * ctx.p ** (e - 2 * ctx.k * j)), ("U", j)]


def _upper_pairs(n: int, e: int, ctx: Context) -> list:
    """Q_y with y = r n p^e as U^j Q^N U^-j (Q^N = Q_{N r / p})."""
    j = (e + 1) // (2 * ctx.k)
    return [("U", j), ("Q", n * ctx.p ** (e + 1 - 2 * ctx.k * j)), ("U", -j)]


def _best_power(x: int, y: int, p: int, window: int) -> tuple[int, int, int, int, int]:
    """Minimize the p-free part of R = x p^F + n y over F in [0, window].

    Returns (size, F, n, v, unit) with R = unit p^v (size = |unit|, 0 if R = 0).
    """
    best = None
    xf = x
    for f in range(window + 1):
        n = -_nearest(xf, y)
        rem = xf + n * y
        if rem == 0:
            return 0, f, n, 0, 0
        if best is None or abs(rem) < best[0] * p:  # cheap prefilter
            v, unit = _strip(rem, p)
            if best is None or abs(unit) < best[0]:
                best = (abs(unit), f, n, v, unit)
                if best[0] == 1:
                    break
        xf *= p
    return best


def _padic_euclid(t: _Tracker, window: int, max_rounds: int) -> None:
    """Right multiply by subgroup elements until the top row is (+-p^f, 0).

    The top row is kept as a = au p^va, b = bu p^vb with p-free integer
    units; the full matrix is updated once at the end.
    """
    ctx = t.ctx
    p, r = ctx.p, ctx.r
    pairs: list = []
    a, b = t.m.a, t.m.b
    if b == 0:
        return
    zero_a = a == 0
    va, au = (0, 0) if zero_a else _split(a, p)
    vb, bu = _split(b, p)
    rounds = 0
    while True:
        rounds += 1
        if rounds > max_rounds:
            raise ReductionError("Euclid over Z[1/p] did not terminate", t.steps)
        if au == 0:
            # a = 1/b * b: x = 1 / b = bu p^-vb since bu = +-1
            if abs(bu) != 1:  # pragma: no cover - det 1 forces a unit
                raise AssertionError("zero pivot with a non-unit partner")
            pairs += _lower_pairs(bu, -vb, ctx)
            va, au = 0, 1
            t.steps.append(("padic:unit-a", {}))
            continue
        if abs(au) == 1:
            # b -> b - (b / a) a; b / a lies in r Z[1/p]
            q, rem = divmod(bu * au, r)
            if rem:  # pragma: no cover - membership gives r | b
                raise NotInSubgroupError("upper-right entry is not a multiple of r", t.steps)
            pairs += _upper_pairs(-q, vb - va, ctx)
            t.steps.append(("padic:clear-b", {}))
            break
        if abs(bu) == 1:
            pairs += _lower_pairs(-au * bu, va - vb, ctx)
            au = 0
            t.steps.append(("padic:clear-a", {}))
            continue
        res_a = _best_power(au, bu, p, window)
        res_b = _best_power(bu, r * au, p, window)
        size_a = res_a[0] * abs(bu)
        size_b = res_b[0] * abs(au)
        if min(size_a, size_b) >= abs(au * bu):
            raise ReductionError("Euclid over Z[1/p] is stuck", t.steps)
        if size_a <= size_b:
            # a + n p^(va - F - vb) b = p^(va - F) (au p^F + n bu)
            _, f, n, v, unit = res_a
            pairs += _lower_pairs(n, va - f - vb, ctx)
            va, au = (va - f + v, unit)
            t.steps.append(("padic:a", {"F": f, "n": n}))
        else:
            _, f, n, v, unit = res_b
            pairs += _upper_pairs(n, vb - f - va, ctx)
            vb, bu = (vb - f + v, unit)
            t.steps.append(("padic:b", {"F": f, "n": n}))
            if unit == 0:
                break
    t.mul_right(_w(pairs))
    if t.m.b != 0:  # pragma: no cover
        raise AssertionError("Euclid bookkeeping lost track of the top row")


_DIAG_CACHE: dict[tuple, Certificate] = {}


def _strip_diagonal(t: _Tracker, bound: int, max_log: int | None, criterion: str) -> None:
    """Left multiply away the diagonal part once the top row is (s p^f, 0)."""
    ctx = t.ctx
    f, s = _split(t.m.a, ctx.p)
    step = ctx.left_step
    i = (f // (ctx.k * step)) * step
    t.mul_left(_w([("U", -i)]))
    f0 = f - ctx.k * i
    t.steps.append(("padic:diagonal", {"sign": s, "exponent": f0, "left_U": -i}))
    if s == 1 and f0 == 0:
        return
    key = (ctx, s, f0, bound, max_log, criterion)
    if key not in _DIAG_CACHE:
        x = s * Fraction(ctx.p) ** f0
        _DIAG_CACHE[key] = _direct(Mat2(x, 0, 0, 1 / x), ctx, bound, max_log, criterion)
    cert = _DIAG_CACHE[key]
    t.mul_left(cert.word.inverse())


def _via_padic(
    target: Mat2, ctx: Context, bound: int, max_log: int | None, window: int, criterion: str
) -> Certificate:
    t = _Tracker(target, ctx)
    _padic_euclid(t, window, max_rounds=64 * (target.height().bit_length() + 16))
    _strip_diagonal(t, bound, max_log, criterion)
    fin = _final(t)
    word = t.left.inverse() * fin * t.right.inverse()
    return Certificate(target, word, ctx.p, ctx.r, ctx.k, tuple(t.steps))


DIRECT_HEIGHT = 10**3
DEFAULT_MAX_LOG = 64
METHODS = ("auto", "pipeline", "padic")


def reduce_to_word(
    m: Mat2,
    p: int,
    r: int,
    k: int | None = None,
    bound: int = 10**5,
    method: str = "auto",
    max_log: int | None = DEFAULT_MAX_LOG,
    window: int | None = None,
    criterion: str = "exact",
) -> Certificate:
    """Certificate expressing ``m`` as a word in A, Q_{r/p} and U_p^k.

    ``k`` defaults to the order of p mod r.  ``method="pipeline"`` runs the
    prime-modulus pipeline; ``"padic"`` runs the Euclidean algorithm over
    Z[1/p] (with the pipeline only for the leftover diagonal); ``"auto"``
    uses the pipeline for integral top rows of height at most
    ``DIRECT_HEIGHT`` and the Euclidean route otherwise.  ``max_log`` caps
    the U-exponent of the conjugation stage (None takes the first prime);
    ``criterion`` selects the prime test of the search stage.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if k is None:
        k = mult_order(p, r)
    ctx = Context(p, r, k)
    why = why_not_member(m, p, r, "gamma1bar")
    if why is not None:
        raise NotInSubgroupError(f"matrix is not in the congruence subgroup: {why}")
    if window is None:
        window = max(64, 8 * r)
    small = m.a.denominator == 1 and m.b.denominator == 1 and m.height() <= DIRECT_HEIGHT
    if method == "pipeline" or (method == "auto" and (small or (m.a == 1 and m.b == 0))):
        return _direct(m, ctx, bound, max_log, criterion)
    return _via_padic(m, ctx, bound, max_log, window, criterion)


def reduce_m5(p: int, k: int | None = None) -> Certificate:
    """Certificate for M_5 = [[11,20],[-5,-9]] over A, Q_{5/p}, U_p^k using
    the modulus 11 directly (no prime search).

    Works when p^{2k} generates the squares mod 11, i.e. p != +-1 mod 11 and
    5 does not divide k; otherwise the conditional failure is reported.
    """
    from .mat2 import M5

    if k is None:
        k = mult_order(p, 5)
    ctx = Context(p, 5, k)
    t = _Tracker(M5, ctx)
    if p % 11 in (1, 10) or k % 5 == 0:
        raise ArtinSearchFailure(f"p^{2 * k} does not generate the squares mod 11", t.steps)
    t.steps.append(("modulus-11", {"q": 11}))
    _conj_pm_r(t, None)
    _euclid(t, 4)
    fin = _final(t)
    return Certificate(M5, t.left.inverse() * fin * t.right.inverse(), p, 5, k, tuple(t.steps))


# ---------------------------------------------------------------------------
# strong witnesses


def strong_witness_to_diagonal(w: GenWord, p: int, r: int) -> GenWord:
    """Extend a strong relation word to one evaluating to +-U_p^k exactly.

    For upper triangular M = eval(w) = [[e p^k, b], [0, e p^-k]] the word
    ``w * w^m Q^c w^-m`` equals M * Q_{-b/(e p^k)}, with m and c chosen so
    that c is an integer (conjugation by M^m scales Q-entries by p^{2km}).
    Lower triangular inputs use A-powers the same way; their entries scale
    by p^{-2km}.
    """
    table = {"A": A, "Q": upper(Fraction(r, p))}
    w = w.over(("A", "Q"))
    m = eval_word(w, table)
    cls = triangular_class(m, p)
    if not cls.triangular:
        raise ValueError("word does not evaluate to a triangular matrix")
    if not cls.strong:
        raise ValueError("the diagonal is +-1, so the word is not a strong witness")
    if cls.shape == "diagonal":
        return w
    k = cls.k
    alpha = m.a
    if cls.shape == "upper":
        x = -m.b / alpha
        X = x * p / r
        e = -p_valuation(X, p).v
        # need 2km <= -e
        mm = (-e) // (2 * k) if k > 0 else _ceil_div(-e, 2 * k)
        c = X * Fraction(p) ** (-2 * k * mm)
        sym = "Q"
    else:
        y = -m.c * alpha
        e = -p_valuation(y, p).v
        # need 2km >= e
        mm = _ceil_div(e, 2 * k) if k > 0 else e // (2 * k)
        c = y * Fraction(p) ** (2 * k * mm)  # lower entries scale by alpha^-2
        sym = "A"
    if c.denominator != 1:  # pragma: no cover - b = 0 mod r in the subgroup
        raise AssertionError("completion exponent is not integral")
    conj = (w**mm) * GenWord.syllable(("A", "Q"), sym, int(c)) * (w ** (-mm))
    out = w * conj
    res = eval_word(out, table)
    if res.b != 0 or res.c != 0:  # pragma: no cover
        raise AssertionError("completion did not produce a diagonal matrix")
    return out
