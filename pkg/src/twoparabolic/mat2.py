"""Determinant-one 2x2 matrices over Q, syllable words, and congruence tests."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .arith import (
    NotReducibleError,
    RationalLike,
    format_rational,
    in_z_inv_p,
    p_valuation,
    parse_rational,
    reduce_mod,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True, slots=True)
class Mat2:
    """``[[a, b], [c, d]]`` with ``ad - bc == 1`` checked on construction."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            v = getattr(self, name)
            if not isinstance(v, Fraction):
                if isinstance(v, float) or not isinstance(v, int):
                    raise TypeError(f"entry {name}={v!r} is not an exact rational")
                object.__setattr__(self, name, Fraction(v))
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self} is not 1")

    @classmethod
    def of(cls, a: RationalLike, b: RationalLike, c: RationalLike, d: RationalLike) -> "Mat2":
        return cls(Fraction(a), Fraction(b), Fraction(c), Fraction(d))

    @classmethod
    def _unchecked(cls, a, b, c, d) -> "Mat2":
        m = object.__new__(cls)
        object.__setattr__(m, "a", a)
        object.__setattr__(m, "b", b)
        object.__setattr__(m, "c", c)
        object.__setattr__(m, "d", d)
        return m

    @classmethod
    def identity(cls) -> "Mat2":
        return cls._unchecked(_ONE, _ZERO, _ZERO, _ONE)

    @classmethod
    def parse(cls, text: str) -> "Mat2":
        """Accepts ``"a b c d"`` or ``"[[a,b],[c,d]]"``."""
        toks = [t for t in re.split(r"[\s,\[\]]+", text.strip()) if t]
        if len(toks) != 4:
            raise ValueError(f"expected four entries, got {text!r}")
        return cls(*(parse_rational(t) for t in toks))

    # arithmetic

    def __mul__(self, other: "Mat2") -> "Mat2":
        if not isinstance(other, Mat2):
            return NotImplemented
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        # product of det-1 matrices has det 1
        return Mat2._unchecked(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    __matmul__ = __mul__

    def __neg__(self) -> "Mat2":
        return Mat2._unchecked(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "Mat2":
        return Mat2._unchecked(self.d, -self.b, -self.c, self.a)

    def __pow__(self, e: int) -> "Mat2":
        if not isinstance(e, int):
            return NotImplemented
        m = self
        if e < 0:
            m, e = m.inverse(), -e
        if e == 0:
            return Mat2.identity()
        # closed forms for +-unipotent and diagonal matrices keep huge
        # exponents (e.g. p^3 - p^2 - p) cheap
        if m.b == 0 and m.c == 0:
            return Mat2._unchecked(m.a**e, _ZERO, _ZERO, m.d**e)
        if m.a == m.d and m.a in (1, -1) and (m.b == 0 or m.c == 0):
            s = m.a**e
            s1 = m.a ** (e - 1)
            return Mat2._unchecked(s, e * s1 * m.b, e * s1 * m.c, s)
        result = Mat2.identity()
        while e:
            if e & 1:
                result = result * m
            m = m * m
            e >>= 1
        return result

    def conj(self, g: "Mat2") -> "Mat2":
        """``g * self * g^-1``."""
        return g * self * g.inverse()

    # views

    @property
    def entries(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def is_identity(self) -> bool:
        return self.a == 1 and self.d == 1 and self.b == 0 and self.c == 0

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.entries)

    def height(self) -> int:
        """Largest absolute numerator or denominator among the entries."""
        return max(max(abs(x.numerator), x.denominator) for x in self.entries)

    def __str__(self) -> str:
        a, b, c, d = (format_rational(x) for x in self.entries)
        return f"[[{a},{b}],[{c},{d}]]"

    def __repr__(self) -> str:
        return f"Mat2({self})"


def diag(x: RationalLike) -> Mat2:
    x = Fraction(x)
    return Mat2(x, _ZERO, _ZERO, 1 / x)


def upper(x: RationalLike) -> Mat2:
    return Mat2._unchecked(_ONE, Fraction(x), _ZERO, _ONE)


def lower(x: RationalLike) -> Mat2:
    return Mat2._unchecked(_ONE, _ZERO, Fraction(x), _ONE)


A = lower(1)
B = Mat2.of(0, 1, -1, 0)
M5 = Mat2.of(11, 20, -5, -9)
I2 = Mat2.identity()


def U(p: int) -> Mat2:
    return diag(p)


def Q(q: RationalLike) -> Mat2:
    return upper(q)


def atoms(p: int, q: RationalLike = 1, mu: RationalLike = 1) -> dict[str, Mat2]:
    """The named generator matrices for prime ``p``, ratio ``q`` and ``mu``."""
    return {
        "A": A,
        "B": B,
        "U": U(p),
        "Q": Q(q),
        "M5": M5,
        "X": upper(mu),
        "Y": lower(mu),
    }


# ---------------------------------------------------------------------------
# words

_SYL_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^([+-]?\d+))?$")


@dataclass(frozen=True)
class GenWord:
    """A word stored as syllables ``(symbol index, nonzero exponent)``.

    Adjacent syllables always carry distinct symbols.
    """

    alphabet: tuple[str, ...]
    syllables: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        prev = None
        for idx, e in self.syllables:
            if not 0 <= idx < len(self.alphabet):
                raise ValueError(f"symbol index {idx} outside alphabet {self.alphabet}")
            if e == 0:
                raise ValueError("syllable exponents must be nonzero")
            if idx == prev:
                raise ValueError("adjacent syllables must have distinct symbols")
            prev = idx

    @classmethod
    def build(cls, alphabet: Sequence[str], pairs: Iterable[tuple[str | int, int]]) -> "GenWord":
        """Free-reduce ``(symbol, exponent)`` pairs into a word."""
        alphabet = tuple(alphabet)
        out: list[list[int]] = []
        for sym, e in pairs:
            idx = alphabet.index(sym) if isinstance(sym, str) else sym
            if e == 0:
                continue
            if out and out[-1][0] == idx:
                out[-1][1] += e
                if out[-1][1] == 0:
                    out.pop()
            else:
                out.append([idx, e])
        return cls(alphabet, tuple((i, e) for i, e in out))

    @classmethod
    def parse(cls, text: str, alphabet: Sequence[str] | None = None) -> "GenWord":
        pairs = []
        seen: list[str] = list(alphabet) if alphabet is not None else []
        for tok in text.split():
            m = _SYL_RE.match(tok)
            if m is None:
                raise ValueError(f"malformed syllable {tok!r}")
            sym, e = m.group(1), int(m.group(2)) if m.group(2) is not None else 1
            if sym not in seen:
                if alphabet is not None:
                    raise ValueError(f"unknown symbol {sym!r}")
                seen.append(sym)
            pairs.append((sym, e))
        return cls.build(seen, pairs)

    @classmethod
    def empty(cls, alphabet: Sequence[str]) -> "GenWord":
        return cls(tuple(alphabet))

    @classmethod
    def syllable(cls, alphabet: Sequence[str], sym: str, e: int = 1) -> "GenWord":
        return cls.build(alphabet, [(sym, e)])

    def pairs(self) -> list[tuple[str, int]]:
        return [(self.alphabet[i], e) for i, e in self.syllables]

    def over(self, alphabet: Sequence[str]) -> "GenWord":
        """The same word re-indexed over a (super-)alphabet."""
        alphabet = tuple(alphabet)
        if alphabet == self.alphabet:
            return self
        return GenWord.build(alphabet, self.pairs())

    def __mul__(self, other: "GenWord") -> "GenWord":
        if not isinstance(other, GenWord):
            return NotImplemented
        alph = list(self.alphabet)
        for s in other.alphabet:
            if s not in alph:
                alph.append(s)
        return GenWord.build(alph, self.pairs() + other.pairs())

    def inverse(self) -> "GenWord":
        return GenWord(self.alphabet, tuple((i, -e) for i, e in reversed(self.syllables)))

    def __pow__(self, n: int) -> "GenWord":
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0 or not self.syllables:
            return GenWord.empty(self.alphabet)
        syl = self.syllables
        # conjugate of a single syllable: u x^e u^-1, power stays short
        k = 0
        while k < len(syl) // 2 and syl[k][0] == syl[-1 - k][0] and syl[k][1] == -syl[-1 - k][1]:
            k += 1
        if len(syl) == 2 * k + 1:
            idx, e = syl[k]
            return GenWord(self.alphabet, syl[:k] + ((idx, e * n),) + syl[k + 1 :])
        # otherwise cancel what meets across the seam and repeat the core
        return GenWord.build(self.alphabet, self.pairs() * n)

    def __len__(self) -> int:
        return len(self.syllables)

    def __bool__(self) -> bool:
        return bool(self.syllables)

    def letter_length(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def letters(self) -> Iterator[tuple[int, int]]:
        """Expand to ``(symbol index, +-1)`` letters."""
        for idx, e in self.syllables:
            s = 1 if e > 0 else -1
            for _ in range(abs(e)):
                yield idx, s

    def symbols(self) -> set[str]:
        return {self.alphabet[i] for i, _ in self.syllables}

    def __str__(self) -> str:
        return " ".join(s if e == 1 else f"{s}^{e}" for s, e in self.pairs())


class UnboundSymbolError(KeyError):
    pass


def eval_word(w: GenWord, table: Mapping[str, Mat2]) -> Mat2:
    """Left-to-right product of the syllable powers; empty word is I."""
    result = Mat2.identity()
    cache: dict[tuple[int, int], Mat2] = {}
    for idx, e in w.syllables:
        sym = w.alphabet[idx]
        if sym not in table:
            raise UnboundSymbolError(f"symbol {sym!r} is not bound")
        key = (idx, e)
        m = cache.get(key)
        if m is None:
            m = cache[key] = table[sym] ** e
        result = result * m
    return result


# ---------------------------------------------------------------------------
# triangularity

UPPER = "upper"
LOWER = "lower"
DIAGONAL = "diagonal"
NOT_TRIANGULAR = "not-triangular"


@dataclass(frozen=True)
class TriangularClass:
    shape: str
    k: int | None = None
    sign: int | None = None

    @property
    def triangular(self) -> bool:
        return self.shape != NOT_TRIANGULAR

    @property
    def strong(self) -> bool:
        # +-unipotent diagonals certify nothing, so k == 0 is not strong
        return self.triangular and self.k is not None and self.k != 0


def triangular_class(m: Mat2, p: int | None = None) -> TriangularClass:
    if m.b == 0 and m.c == 0:
        shape = DIAGONAL
    elif m.c == 0:
        shape = UPPER
    elif m.b == 0:
        shape = LOWER
    else:
        return TriangularClass(NOT_TRIANGULAR)
    if p is None:
        return TriangularClass(shape)
    pv = p_valuation(m.a, p)
    if abs(pv.unit) != 1:
        raise ValueError(f"upper-left entry {format_rational(m.a)} is not +-{p}^k")
    return TriangularClass(shape, pv.v, int(pv.unit))


# ---------------------------------------------------------------------------
# congruence subgroups

GAMMA1BAR = "gamma1bar"
PRINCIPAL = "principal"
GAMMA0Z = "gamma0Z"
SL2Z = "sl2z"


def why_not_member(m: Mat2, p: int, r: int, which: str) -> str | None:
    """``None`` when ``m`` lies in the subgroup, else a short reason."""
    if which == SL2Z:
        return None if m.is_integral() else "entry is not an integer"
    if which == GAMMA0Z:
        if not m.is_integral():
            return "entry is not an integer"
        return None if m.c.numerator % p == 0 else f"lower-left entry not divisible by {p}"
    if which not in (GAMMA1BAR, PRINCIPAL):
        raise ValueError(f"unknown subgroup {which!r}")
    for name, x in zip("abcd", m.entries):
        if not in_z_inv_p(x, p):
            return f"entry {name}={format_rational(x)} is outside Z[1/{p}]"
    try:
        a, b, c, d = (reduce_mod(x, r) for x in m.entries)
    except NotReducibleError as exc:
        return str(exc)
    one = 1 % r
    if a != one or d != one:
        return f"diagonal not congruent to 1 mod {r}"
    if b != 0:
        return f"upper-right entry not congruent to 0 mod {r}"
    if which == PRINCIPAL and c != 0:
        return f"lower-left entry not congruent to 0 mod {r}"
    return None


def membership(m: Mat2, p: int, r: int, which: str = GAMMA1BAR) -> bool:
    return why_not_member(m, p, r, which) is None
